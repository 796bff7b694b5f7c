STOPWORDS = frozenset(
    """
    a about above after again against all also am an and any are as at be because been before
    being below between both but by can could did do does doing down during each few for from
    further had has have having he her here hers herself him himself his how i if in into is it
    its itself just me might more most must my myself no nor not now of off on once only or other
    our ours ourselves out over own same she should so some such than that the their theirs them
    themselves then there these they this those through to too under until up very was we were
    what when where which while who whom why will with would you your yours yourself yourselves
    many much may within without upon across among around via per
    """.split()
)

# Capitalized words that only start a phrase because they start a sentence.
LEADING_FUNCTION_WORDS = frozenset(
    """
    a an the this that these those in on at by for from of to and but or so if when while with
    without after before during since as it its their his her our we they he she i you there here
    what which who whom whose why how where is are was were do does did can could will would should
    many some most all each every both several such no not yes
    """.split()
)

ORGANIZATION_SUFFIXES = frozenset(
    """
    inc corp corporation company co ltd llc university institute association society council
    foundation agency bank group committee ministry department college school laboratory lab
    """.split()
)

LOCATION_SUFFIXES = frozenset(
    """
    city river mountain mountains lake island islands valley county street park ocean sea bay
    province state kingdom republic region desert forest coast
    """.split()
)

EVENT_SUFFIXES = frozenset(
    """
    war conference festival summit revolution olympics election battle treaty crisis pandemic
    championship expedition
    """.split()
)

PERSON_TITLES = frozenset("dr mr mrs ms prof professor sir lady lord king queen saint st".split())

LOCATION_PREPOSITIONS = frozenset("in at near from across".split())

MAX_RELATION_KEYWORDS = 3
MAX_PROFILE_KEYS = 3
FALLBACK_RELATION_KEY = "related"
MAX_KEYWORD_RUN = 3
ANSWER_PREVIEW_LINES = 5

# Canned personas for question generation; the description is woven into
# every task and question.
PERSONAS = (
    "Data scientist exploring patterns",
    "Finance analyst assessing risks",
    "Product manager planning features",
    "Researcher reviewing prior work",
    "Educator preparing course material",
)
