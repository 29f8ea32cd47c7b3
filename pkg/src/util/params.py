"""
Parameter lookup over config/dynamics.yaml.

Keys are slash separated paths into the YAML tree, e.g. get_param("orbit/max_iter", 200). Lookups never raise:
a missing file, a malformed file or a missing key all fall back to the default given at the call site.
"""
import copy
import os
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, TypeVar

import yaml

from util.errors import ConfigError
from util.log import logerr

CONFIG_ENV = "ETF_CONFIG"
DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "config" / "dynamics.yaml"

_config: Optional[Dict[str, Any]] = None
_overrides: Dict[str, Any] = {}
# bumped whenever the effective parameter set changes
_generation = 0

T = TypeVar("T")


def config_path() -> Path:
    return Path(os.environ.get(CONFIG_ENV, DEFAULT_CONFIG_PATH))


def load_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Read a YAML parameter file.

    :param path: file to read, defaults to config_path()
    :returns: the parsed tree, or an empty dict if the file cannot be read
    """
    path = path or config_path()
    try:
        with open(path) as f:
            tree = yaml.safe_load(f) or {}
        if not isinstance(tree, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return tree
    except Exception as e:
        logerr(f"load_config error: {e}")
        return {}


def _tree() -> Dict[str, Any]:
    global _config
    if _config is None:
        _config = load_config()
    return _config


def _lookup(tree: Mapping[str, Any], name: str) -> Any:
    node: Any = tree
    for part in name.strip("/").split("/"):
        if not isinstance(node, Mapping) or part not in node:
            raise KeyError(name)
        node = node[part]
    return node


def get_param(name: str, default: Any) -> Any:
    """
    Look up a parameter, preferring run overrides, then the config file, then the default.

    :param name: slash separated key path
    :param default: value used when the key is absent
    :returns: the parameter value
    """
    try:
        if name in _overrides:
            return _overrides[name]
        return _lookup(_tree(), name)
    except KeyError:
        return default
    except Exception as e:
        logerr(f"get_param error: {e}")
        return default


def _flatten(tree: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in tree.items():
        path = f"{prefix}/{key}" if prefix else str(key)
        if isinstance(value, Mapping):
            flat.update(_flatten(value, path))
        else:
            flat[path] = value
    return flat


def apply_overrides(tree: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Overlay run-specific parameters. Every key must already exist in the config file.

    :param tree: nested mapping in the same shape as the config file
    :returns: the flattened overrides that were applied
    :raises ConfigError: if a key is unknown
    """
    global _generation
    known = _flatten(_tree())
    flat = _flatten(tree)
    unknown = sorted(k for k in flat if k not in known)
    if unknown:
        raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
    _overrides.update(flat)
    _generation += 1
    return flat


def load_overrides(path: Path) -> Dict[str, Any]:
    try:
        with open(path) as f:
            tree = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"{path}: {e}") from e
    if not isinstance(tree, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    return apply_overrides(tree)


def clear_overrides() -> None:
    global _generation
    _overrides.clear()
    _generation += 1


def cached_params(factory: Callable[[], T]) -> Callable[[], T]:
    """
    Memoize a settings factory built from get_param. The value is rebuilt after any change to the overrides.

    :param factory: builds the settings object
    :returns: a zero-argument accessor for the current settings
    """
    state: Dict[str, Any] = {"generation": None, "value": None}

    def current() -> T:
        if state["generation"] != _generation:
            state["value"] = factory()
            state["generation"] = _generation
        return state["value"]

    return current


def snapshot() -> Dict[str, Any]:
    """The effective flattened parameter set, for recording next to run outputs."""
    flat = _flatten(copy.deepcopy(_tree()))
    flat.update(_overrides)
    return flat


THREADS_ENV = "ETF_THREADS"


def thread_count(threads: Optional[int] = None) -> int:
    """
    Worker count for data-parallel loops: the explicit value, else ETF_THREADS, else cli/threads. Never changes
    results, only wall time.
    """
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError as e:
                raise ConfigError(f"{THREADS_ENV}={env!r} is not an integer") from e
        else:
            threads = get_param("cli/threads", 1)
    if threads < 1:
        raise ConfigError(f"thread count must be at least 1, got {threads}")
    return threads
