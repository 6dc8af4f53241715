import logging

__version__ = "0.1.0"

logger = logging.getLogger("surrogate")
logger.addHandler(logging.NullHandler())
