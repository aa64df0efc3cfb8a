"""
core/file_utils.py | File Utility Module
Purpose: Utility functions for file operations (JSON config loading, text loading, output folders).
Author: ChAI-Engine (chaiji)
Last-Updated: 2026-10-18
Non-Std Deps: None
Abstract Spec: Reusable file helpers with error handling; JSON decode errors are reported
with line and column so config mistakes can be located.
"""
import json
from pathlib import Path


def load_config(config_path, required_keys=None):
    """
    Purpose: Load a JSON config file and validate required keys.
    Inputs: config_path (Path or str) - Path to the config file.
            required_keys (list or None) - List of required keys to check.
    Outputs: config (dict) - Loaded configuration dictionary.
    Role: Centralizes config loading and validation with error handling.
    """
    from core.errors import ConfigError
    config_path = Path(config_path)
    if not config_path.exists():
        raise FileNotFoundError(f"[ERROR] Config file not found: {config_path}")
    text = config_path.read_text(encoding="utf-8")
    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"invalid JSON in {config_path} at line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(config, dict):
        raise ConfigError("<file>", f"top level of {config_path} must be a JSON object")
    if required_keys:
        for key in required_keys:
            if key not in config:
                raise ConfigError(key, f"required key not found in {config_path}")
    return config


def load_text(text_path):
    """
    Purpose: Load a UTF-8 text file (grid layouts).
    Inputs: text_path (Path or str)
    Outputs: contents (str)
    """
    text_path = Path(text_path)
    if not text_path.exists():
        raise FileNotFoundError(f"[ERROR] File not found: {text_path}")
    return text_path.read_text(encoding="utf-8")


def ensure_folder(folder) -> Path:
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    return folder
