"""
CLI and Corpus

Command-line front end and the curated example corpus with its expected verdicts.
"""

from .models import (
    CorpusFilterError, Provenance, CorpusTask, Expected, CorpusSettings, Expectation, CorpusEntry,
    Corpus, CheckResult, EntryReport, CorpusReport,
)
from .corpus import CorpusRunner
from .console import make_console_callback, format_event
from .cli import main, build_parser

__version__ = "1.0.0"
__all__ = [
    "CorpusFilterError", "Provenance", "CorpusTask", "Expected", "CorpusSettings", "Expectation",
    "CorpusEntry", "Corpus", "CheckResult", "EntryReport", "CorpusReport", "CorpusRunner",
    "make_console_callback", "format_event", "main", "build_parser",
]
