"""Text, LaTeX and JSON emission, and JSON decoding by kind."""

from __future__ import annotations

import json

from ..forms import ConnectionMatrix, ExtensionTable, GradedForm
from ..jets import JetExpression
from ..psdo import FlowTable, PsdoOperator
from ..rings import Polynomial, ZSeries
from ..weyl import StructureTable, WeylElement
from ..window import TruncationWindow
from .suites import SuiteReport

FORMATS = ("text", "latex", "json")

KINDS = {
    "polynomial": Polynomial,
    "zseries": ZSeries,
    "weyl": WeylElement,
    "jet": JetExpression,
    "form": GradedForm,
    "matrix": ConnectionMatrix,
    "extension": ExtensionTable,
    "psdo": PsdoOperator,
    "flows": FlowTable,
    "structure": StructureTable,
    "window": TruncationWindow,
    "report": SuiteReport,
}


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def emit(value, fmt: str = "text") -> str:
    """Render ``value``; the result is deterministic for equal inputs."""
    if fmt == "json":
        return dumps(value.to_json())
    if fmt == "latex":
        return value.to_latex()
    if fmt == "text":
        return value.to_text()
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def emit_bytes(value, fmt: str = "text") -> bytes:
    return (emit(value, fmt) + "\n").encode("utf-8")


def decode(kind: str, text: str | bytes):
    """Inverse of ``emit(value, "json")`` for a value of the given kind."""
    try:
        cls = KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown kind {kind!r}") from None
    return cls.from_json(json.loads(text))
