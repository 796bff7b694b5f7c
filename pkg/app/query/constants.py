# Context section headers; five dashes keep them apart from prompt sections.
ENTITIES_HEADER = "-----ENTITIES-----"
RELATIONSHIPS_HEADER = "-----RELATIONSHIPS-----"
SOURCES_HEADER = "-----SOURCES-----"

HIGH_LEVEL_FIELD = "high_level_keywords"
LOW_LEVEL_FIELD = "low_level_keywords"
