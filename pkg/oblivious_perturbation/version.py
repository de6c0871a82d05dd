"""Contains the version of the package"""

from pathlib import Path

import toml

def get_version() -> str:
    """Returns the project version from pyproject.toml, empty if it cannot be read"""
    try:
        pyproject = toml.load(Path(__file__).resolve().parent.parent / "pyproject.toml")
        return pyproject["project"]["version"]
    except (OSError, KeyError, toml.TomlDecodeError):
        return ""

__version__ = get_version()
