import logging
import os

__version__ = "0.1.0"

TAILCUT_LOGGER = logging.getLogger(__name__)
TAILCUT_LOGGER.setLevel(logging.DEBUG if os.environ.get("DEBUG_TAILCUT") else logging.WARNING)
