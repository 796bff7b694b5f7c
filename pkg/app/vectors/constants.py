# Texts per embedding request.
EMBEDDING_BATCH_SIZE = 64

# Scores are rounded before ranking so ties are decided by payload id rather
# than by floating-point noise.
SCORE_DECIMALS = 12

HASH_DIGEST_SIZE = 8
