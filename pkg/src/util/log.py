"""
Pluggable log sinks. Library code calls loginfo/logwarn/logerr/logdebug and the application decides where the
messages go through set_loggers, the same surface the state machine logger exposes.
"""
import logging
from typing import Callable, Dict, Optional

LOGGER_NAME = "etf"

_logger = logging.getLogger(LOGGER_NAME)

_sinks: Dict[str, Callable[[str], None]] = {
    "info": _logger.info,
    "warn": _logger.warning,
    "error": _logger.error,
    "debug": _logger.debug,
}


def set_loggers(
    info: Optional[Callable[[str], None]] = None,
    warn: Optional[Callable[[str], None]] = None,
    error: Optional[Callable[[str], None]] = None,
    debug: Optional[Callable[[str], None]] = None,
) -> None:
    """
    Replace any of the log sinks. Sinks left as None keep their current value.

    :param info: callable receiving info messages
    :param warn: callable receiving warnings
    :param error: callable receiving errors
    :param debug: callable receiving debug messages
    """
    for name, sink in (("info", info), ("warn", warn), ("error", error), ("debug", debug)):
        if sink is not None:
            _sinks[name] = sink


def reset_loggers() -> None:
    set_loggers(info=_logger.info, warn=_logger.warning, error=_logger.error, debug=_logger.debug)


def configure(level: int = logging.INFO) -> None:
    logging.basicConfig(format="[%(levelname)s] %(name)s: %(message)s", level=level)
    _logger.setLevel(level)


def loginfo(msg) -> None:
    _sinks["info"](str(msg))


def logwarn(msg) -> None:
    _sinks["warn"](str(msg))


def logerr(msg) -> None:
    _sinks["error"](str(msg))


def logdebug(msg) -> None:
    _sinks["debug"](str(msg))
