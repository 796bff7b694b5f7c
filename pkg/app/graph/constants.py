STORE_FORMAT = "lattice-rag-store"
STORE_FORMAT_VERSION = 1

# Section tags, in file order.
SECTION_ENTITY = "entity"
SECTION_RELATION = "relation"
SECTION_KV = "kv"
SECTION_CHUNK = "chunk"
