"""
core/log_utils.py | Logging Utility for Verbose Mode
Author: ChAI-Engine
Last-Updated: 2026-10-18
Non-std deps: None
Abstract Spec: Appends tagged process events ([START], [STEP], [INFO], [ERROR]) to
<output_dir>/logs.txt when --verbose is set.

Behavior: The parent process truncates logs.txt once per CLI invocation (set_log_path with
reset=True). Monte Carlo worker processes call set_log_path with reset=False so they append
to the same file instead of truncating it on their first write.
"""
import os
import threading
from typing import Optional
from pathlib import Path

_log_file_initialized = {}
_default_log_path = None
_write_lock = threading.Lock()


def set_log_path(log_path: str, reset: bool = True):
    """
    Purpose: Set the default log file path for all log_event calls.
    Inputs: log_path (str), reset (bool) - truncate the file on the next write
    Outputs: None
    Role: Lets the CLI point every module at <output_dir>/logs.txt; workers pass reset=False.
    """
    global _default_log_path
    _default_log_path = log_path
    key = str(Path(log_path).resolve())
    _log_file_initialized[key] = not reset


def get_log_path() -> Optional[str]:
    return _default_log_path


def log_event(msg: str, verbose: bool, log_path: Optional[str] = None) -> None:
    """
    Purpose: Log a process event message to a file if verbose is True.
    Inputs:
        msg: Message to log (str); callers prefix a tag such as [INFO]
        verbose: Whether to log (bool)
        log_path: Path to log file (Optional[str]); defaults to the path given to set_log_path
                  or 'core/logs.txt'.
    Outputs:
        None
    Role: Shared audit trail for experiment runs, selector probes and CLI workflows.
    """
    if not verbose:
        return
    log_file = Path(log_path) if log_path else Path(_default_log_path) if _default_log_path else Path(__file__).parent / "logs.txt"
    log_file.parent.mkdir(parents=True, exist_ok=True)
    key = str(log_file.resolve())
    with _write_lock:
        mode = "a"
        if not _log_file_initialized.get(key, False):
            mode = "w"
            _log_file_initialized[key] = True
        with log_file.open(mode, encoding="utf-8") as f:
            f.write(f"[pid {os.getpid()}] " + msg.rstrip("\n") + "\n")
