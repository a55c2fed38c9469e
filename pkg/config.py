import os
from dotenv import load_dotenv

from errors import InvalidParameter

# Load environment variables
load_dotenv()


def _env_flag(name: str, default: str = 'false') -> bool:
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


def _as_cap(value, name: str) -> int:
    """Caps come from the environment as text; validate them when first used."""
    try:
        cap = int(value)
    except (TypeError, ValueError):
        raise InvalidParameter(f"{name} must be a nonnegative integer, got {value!r}") from None
    if cap < 0:
        raise InvalidParameter(f"{name} must be a nonnegative integer, got {value!r}")
    return cap


class Config:
    # Reduction Configuration
    ITERATION_CAP = os.getenv('TDL_ITERATION_CAP', '1000000')

    # Special-set search Configuration (free model vertices)
    SEARCH_CAP = os.getenv('TDL_SEARCH_CAP', '20')

    # Shared override for whichever cap a command consumes; --cap wins over it
    CAP_OVERRIDE = os.getenv('TDL_CAP') or None

    # Rank Configuration
    RR_SHORTCUT = _env_flag('TDL_RR_SHORTCUT')

    # Logging Configuration
    LOG_LEVEL = os.getenv('TDL_LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('TDL_LOG_FILE', '')

    # Progress bars for long enumerations
    SHOW_PROGRESS = _env_flag('TDL_PROGRESS')

    @classmethod
    def cap_override(cls):
        if cls.CAP_OVERRIDE is None:
            return None
        return _as_cap(cls.CAP_OVERRIDE, 'TDL_CAP')

    @classmethod
    def iteration_cap(cls) -> int:
        override = cls.cap_override()
        return override if override is not None else _as_cap(cls.ITERATION_CAP, 'TDL_ITERATION_CAP')

    @classmethod
    def search_cap(cls) -> int:
        override = cls.cap_override()
        return override if override is not None else _as_cap(cls.SEARCH_CAP, 'TDL_SEARCH_CAP')
