"""
Console log callback: one coloured line per engine event, written to stderr
"""
import sys
from datetime import datetime
from typing import Callable, List, Optional, Tuple

from colorama import Fore, Style, init

init()

TYPE_PREFIX = {
    "info": "ℹ️",
    "success": "✅",
    "warning": "⚠️",
    "error": "❌",
    "debug": "🔍",
    "solver": "🧮",
    "verify": "🔎",
}

TYPE_COLOR = {
    "success": Fore.GREEN,
    "warning": Fore.YELLOW,
    "error": Fore.RED,
    "debug": Style.DIM,
}

STATUS_TYPE = {
    "feasible": "success",
    "infeasible": "warning",
    "indeterminate": "error",
    "verified": "success",
    "rejected": "error",
}


def format_event(component: str, details: dict) -> Tuple[str, str]:
    """Message text and log type for one structured event."""
    stage = details.get("stage")
    status = str(details.get("status") or details.get("verdict") or "")
    log_type = STATUS_TYPE.get(status, "info")

    if component == "sdp_solver":
        margin = details.get("margin")
        margin_text = f"{margin:.3g}" if isinstance(margin, float) else "n/a"
        return (f"SDP blocks {details.get('blocks')} with {details.get('constraints')} equalities: "
                f"{status} after {details.get('iterations')} iterations, margin {margin_text}"), "solver"
    if stage == "compile":
        return f"Compiled {details.get('blocks')} blocks, {details.get('constraints')} equalities", "debug"
    if stage == "degree":
        return f"Degree {details.get('degree')} ({details.get('mode')}): {status.upper()} {details.get('note', '')}".rstrip(), log_type
    if stage == "k":
        return f"Mode {details.get('mode')}, k = {details.get('k')}: {status.upper()}", log_type
    if stage == "verify":
        reasons = details.get("reasons") or []
        return f"Verification of {details.get('kind')} certificate: {status} {'; '.join(reasons)}".rstrip(), "verify"
    if stage == "expectation":
        mark = "matches" if details.get("matched") else "MISMATCH"
        where = f" degree {details['degree']}" if details.get("degree") is not None else ""
        return (f"{details.get('entry')}{where}: expected {details.get('expected')}, "
                f"got {status} ({mark})"), "success" if details.get("matched") else "error"
    if "traceback" in details:
        return details["traceback"], "error"
    text = ", ".join(f"{k}={v}" for k, v in details.items())
    return f"{component}: {text}", log_type


def make_console_callback(verbose: bool = False, stream=None,
                          lines: Optional[List[str]] = None) -> Callable[[str, str, dict], None]:
    """
    Build a log_callback(run_id, component, details) for the engines.

    Solver and compile events print only when verbose. Every line is also appended to
    `lines` when a list is given.
    """
    stream = stream or sys.stderr

    def callback(run_id: str, component: str, details: dict):
        message, log_type = format_event(component, details)
        if log_type in ("debug", "solver") and not verbose:
            return
        timestamp = datetime.now().strftime("%H:%M:%S")
        line = f"[{timestamp}] {TYPE_PREFIX.get(log_type, 'ℹ️')} {message}"
        if lines is not None:
            lines.append(line)
        color = TYPE_COLOR.get(log_type, "")
        print(f"{color}{line}{Style.RESET_ALL if color else ''}", file=stream)

    return callback
