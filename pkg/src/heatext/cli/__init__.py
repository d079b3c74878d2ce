"""Command-line front end: parsing, emission and verification suites."""

from .emit import decode, emit
from .main import Command, main
from .parser import parse_expression
from .suites import SUITES, SuiteReport, run_suite

__all__ = ["Command", "SUITES", "SuiteReport", "decode", "emit", "main", "parse_expression", "run_suite"]
