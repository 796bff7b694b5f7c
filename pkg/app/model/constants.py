# Separator used when rendering merged description fragments as one string.
DESCRIPTION_SEPARATOR = "<SEP>"

# Entity categories offered to the extractor; free-form labels are accepted.
DEFAULT_ENTITY_TYPES = ("organization", "person", "location", "event", "concept")

UNKNOWN_ENTITY_TYPE = "unknown"
