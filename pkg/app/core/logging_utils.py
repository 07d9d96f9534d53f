import logging

from app.core.config import settings

# Basic log formatting
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"

# Configure root logger; handlers write to stderr
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format=LOG_FORMAT,
)


# Function for modules
def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
