"""
Configuration loading shared by the engine classes
"""
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

ROOT_DIR = Path(__file__).resolve().parent
DEFAULT_CONFIG_FILE = str(ROOT_DIR / "data" / "config.json")
CONFIG_ENV_VAR = "SOS_LYAPUNOV_CONFIG"


def resolve_config_file(config_file: Optional[str] = None) -> str:
    """Explicit path, then the environment override, then the bundled config."""
    if config_file:
        return config_file
    return os.environ.get(CONFIG_ENV_VAR) or DEFAULT_CONFIG_FILE


def load_config(config_file: Optional[str] = None) -> Dict[str, Any]:
    path = Path(resolve_config_file(config_file))
    if not path.is_absolute() and not path.exists():
        path = ROOT_DIR / path
    with open(path, "r") as f:
        return json.load(f)


def load_config_section(section: str, config_file: Optional[str] = None) -> Dict[str, Any]:
    return load_config(config_file).get(section, {})
