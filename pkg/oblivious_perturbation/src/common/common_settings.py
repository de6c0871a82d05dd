"""Global settings"""

import os
import logging

import toml

from .common_errors import InvalidArgumentError

class Settings:
    """Process-wide settings for oracles, streaming and solver cadence"""

    oracle_cap : int = 2048
    pattern_cache_dim : int = 0
    stream_block_entries : int = 1 << 16
    residual_cadence : int = 25
    rejection_cap : int = 128
    log_directory : str = "logs"
    oracle_cap_variable : str = "OBLIV_ORACLE_CAP"

    @classmethod
    def load_environment(cls) -> None:
        """Applies environment overrides"""
        value = os.environ.get(cls.oracle_cap_variable)
        if value is None:
            return
        try:
            cls.set_oracle_cap(int(value, 0))
        except (ValueError, InvalidArgumentError):
            logging.warning("Ignoring invalid %s=%s", cls.oracle_cap_variable, value)

    @classmethod
    def set_oracle_cap(cls, cap : int) -> None:
        """Sets the largest dimension the dense oracles accept"""
        if cap < 1:
            raise InvalidArgumentError(f"oracle cap must be positive, got {cap}")
        cls.oracle_cap = cap

    @classmethod
    def set_pattern_cache_dim(cls, dim : int) -> None:
        """Sets the largest n whose pattern sign matrix is cached densely, 0 disables"""
        if dim < 0:
            raise InvalidArgumentError(f"pattern cache dimension must be non-negative, got {dim}")
        cls.pattern_cache_dim = dim

    @classmethod
    def set_stream_block_entries(cls, entries : int) -> None:
        """Sets the number of pattern entries evaluated per streamed block"""
        if entries < 1:
            raise InvalidArgumentError(f"stream block must hold at least one entry, got {entries}")
        cls.stream_block_entries = entries

    @classmethod
    def set_residual_cadence(cls, cadence : int) -> None:
        """Sets how many CG iterations pass between true-residual checks"""
        if cadence < 1:
            raise InvalidArgumentError(f"residual cadence must be positive, got {cadence}")
        cls.residual_cadence = cadence

    @classmethod
    def load_file(cls, path : str) -> dict:
        """Loads a TOML configuration file, applies its [settings] table and returns the whole document"""
        try:
            document = toml.load(path)
        except (OSError, toml.TomlDecodeError) as error:
            raise InvalidArgumentError(f"cannot read configuration {path}: {error}") from error
        section = document.get("settings", {})
        if "oracle_cap" in section:
            cls.set_oracle_cap(int(section["oracle_cap"]))
        if "pattern_cache_dim" in section:
            cls.set_pattern_cache_dim(int(section["pattern_cache_dim"]))
        if "stream_block_entries" in section:
            cls.set_stream_block_entries(int(section["stream_block_entries"]))
        if "residual_cadence" in section:
            cls.set_residual_cadence(int(section["residual_cadence"]))
        logging.info("Loaded configuration from %s", path)
        return document

Settings.load_environment()
