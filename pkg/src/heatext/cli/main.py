"""``heatext`` command line.

Window bounds come from flags, then from a ``--config`` file, then from
the built-in defaults.  The config file holds ``key = value`` lines in the
style of ``hierarchy.toml``; an optional ``[window]`` header is allowed::

    # hierarchy.toml
    M = 2
    K = 3
    N = 6
    P = 8
    depth = 6

Exit codes: 0 all checks pass, 1 nonzero residual, 2 usage error,
3 window or depth exhausted.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, field

from .. import forms, psdo
from ..errors import (
    DepthExhausted,
    ExprSyntaxError,
    HeatextError,
    NonzeroResidual,
    UnknownSymbol,
    WindowExceeded,
)
from ..window import TruncationWindow
from .emit import FORMATS, dumps, emit
from .parser import parse_expression
from .suites import EXIT_OK, EXIT_RESIDUAL, EXIT_USAGE, EXIT_WINDOW, SUITES, run_suite

WINDOW_FLAGS = {"m_max": "M", "k_max": "K", "tmax": "N", "jetmax": "P", "depth": "depth"}
CONFIG_ALIASES = {
    "m": "M", "m-max": "M", "m_max": "M",
    "k": "K", "k-max": "K", "k_max": "K",
    "n": "N", "tmax": "N",
    "p": "P", "jetmax": "P",
    "depth": "depth",
}
SUITE_PARAMS = ("imax", "mjmax", "bound", "jacobi_bound", "j", "k", "jmax")


class UsageError(Exception):
    pass


@dataclass
class Command:
    verb: str
    subcommand: str | None
    window: TruncationWindow
    emit: str = "text"
    expression: str | None = None
    params: dict = field(default_factory=dict)
    workers: int = 1


def read_config(path: str) -> dict:
    """Window bounds from a ``key = value`` file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[__top__]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc
    out = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            name = CONFIG_ALIASES.get(key.lower())
            if name is None:
                raise UsageError(f"unknown config key {key!r} in {path}")
            try:
                out[name] = int(raw.strip().strip('"'))
            except ValueError:
                raise UsageError(f"config key {key!r} needs an integer, got {raw!r}") from None
    return out


def _window_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("window")
    g.add_argument("--m-max", type=int, help="largest power of T (M)")
    g.add_argument("--k-max", type=int, help="largest z-power / x-derivative (K)")
    g.add_argument("--tmax", type=int, help="largest time index (N)")
    g.add_argument("--jetmax", type=int, help="largest jet order (P)")
    g.add_argument("--depth", type=int, help="pseudo-differential tail depth")
    p.add_argument("--config", help="key=value file with window bounds")
    p.add_argument("--emit", choices=FORMATS, default="text", help="output format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heatext", description="Exact computations for the extended heat hierarchy.")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("weyl", help="evaluate a Weyl-algebra expression")
    p.add_argument("expression")
    _window_args(p)

    p = sub.add_parser("jets", help="evaluate an operator expression on the jet ring")
    p.add_argument("expression")
    _window_args(p)

    p = sub.add_parser("extend", help="solve an extension table")
    p.add_argument("subcommand", choices=["wave"])
    _window_args(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("subcommand", metavar="suite", choices=SUITES)
    _window_args(p)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--imax", type=int)
    p.add_argument("--mjmax", type=int)
    p.add_argument("--bound", type=int)
    p.add_argument("--jacobi-bound", type=int)
    p.add_argument("--jmax", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--k", type=int)

    p = sub.add_parser("kp", help="KP hierarchy computations")
    p.add_argument("subcommand", choices=["flows", "zc", "dress", "s-relations"])
    _window_args(p)
    p.add_argument("--j", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--imax", type=int)
    return ap


def resolve(ns: argparse.Namespace) -> Command:
    """Merge flags, config file and defaults into a validated :class:`Command`."""
    values = TruncationWindow().to_json()
    if ns.config:
        values.update(read_config(ns.config))
    for flag, name in WINDOW_FLAGS.items():
        got = getattr(ns, flag, None)
        if got is not None:
            values[name] = got
    try:
        window = TruncationWindow(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params = {k: getattr(ns, k) for k in SUITE_PARAMS if getattr(ns, k, None) is not None}
    workers = getattr(ns, "workers", 1)
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    return Command(
        ns.verb,
        getattr(ns, "subcommand", None),
        window,
        ns.emit,
        getattr(ns, "expression", None),
        params,
        workers,
    )


def _require(params: dict, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise UsageError("missing " + ", ".join("--" + n for n in missing))


def _dress_output(depth: int, fmt: str) -> str:
    g, g_inv, L = psdo.dress(depth)
    parts = [("g", g), ("g_inv", g_inv), ("L", L)]
    if fmt == "json":
        return dumps({name: op.to_json() for name, op in parts})
    if fmt == "latex":
        names = {"g": "g", "g_inv": "g^{-1}", "L": "L"}
        lines = [rf"{names[n]} &= {op.to_latex()}" for n, op in parts]
        return "\\begin{aligned}\n" + " \\\\\n".join(lines) + "\n\\end{aligned}"
    return "\n".join(f"{n} = {op.to_text()}" for n, op in parts)


def execute(cmd: Command) -> tuple[str, int]:
    """Run a resolved command; returns (stdout text, exit status)."""
    w = cmd.window
    if cmd.verb == "weyl":
        return emit(parse_expression(cmd.expression, "weyl", w), cmd.emit), EXIT_OK
    if cmd.verb == "jets":
        return emit(parse_expression(cmd.expression, "jets", w), cmd.emit), EXIT_OK
    if cmd.verb == "extend":
        return emit(forms.solve_wave_extension(w), cmd.emit), EXIT_OK
    if cmd.verb == "verify":
        try:
            report = run_suite(cmd.subcommand, w, workers=cmd.workers, **cmd.params)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        print(f"{report.suite}: {report.wall_time:.3f} s", file=sys.stderr)
        return emit(report, cmd.emit), report.exit_status
    if cmd.verb == "kp":
        if cmd.subcommand == "flows":
            _require(cmd.params, "j")
            return emit(psdo.kp_flows(cmd.params["j"], w.depth), cmd.emit), EXIT_OK
        if cmd.subcommand == "zc":
            _require(cmd.params, "j", "k")
            report = run_suite("zero-curvature", w, j=cmd.params["j"], k=cmd.params["k"])
            return emit(report, cmd.emit), report.exit_status
        if cmd.subcommand == "dress":
            g, g_inv, _ = psdo.dress(w.depth)
            ok = (psdo.leibniz_compose(g, g_inv) - psdo.IDENTITY).is_zero()
            return _dress_output(w.depth, cmd.emit), EXIT_OK if ok else EXIT_RESIDUAL
        if cmd.subcommand == "s-relations":
            imax = cmd.params.get("imax", 2)
            report = run_suite("s-relations", w, imax=imax)
            return emit(report, cmd.emit), report.exit_status
    raise UsageError(f"unknown command {cmd.verb} {cmd.subcommand or ''}".strip())


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cmd = resolve(ns)
        out, status = execute(cmd)
    except UsageError as exc:
        print(f"heatext: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ExprSyntaxError, UnknownSymbol) as exc:
        print(f"heatext: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WindowExceeded, DepthExhausted) as exc:
        print(f"heatext: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except NonzeroResidual as exc:
        print(f"heatext: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    except HeatextError as exc:
        print(f"heatext: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    except ValueError as exc:
        print(f"heatext: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.buffer.write((out + "\n").encode("utf-8"))
    sys.stdout.flush()
    return status
