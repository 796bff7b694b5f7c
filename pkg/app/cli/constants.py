PROG = "lattice-rag"

CMD_INDEX = "index"
CMD_UPDATE = "update"
CMD_QUERY = "query"
CMD_EVAL = "eval"
CMD_STATS = "stats"

EVAL_QUESTIONS = "questions"
EVAL_ANSWERS = "answers"
EVAL_JUDGE = "judge"
