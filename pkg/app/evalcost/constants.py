DIMENSIONS = ("Comprehensiveness", "Diversity", "Empowerment")
OVERALL_FIELD = "Overall Winner"
OVERALL = "Overall"
WINNER_FIELD = "Winner"
EXPLANATION_FIELD = "Explanation"

USERS = 5
TASKS_PER_USER = 5
QUESTIONS_PER_TASK = 5

SYSTEM_1 = "system_1"
SYSTEM_2 = "system_2"
