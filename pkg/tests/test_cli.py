import json
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import polynomials, rationals
from heatext.cli import SuiteReport, decode, emit, main, parse_expression, run_suite
from heatext.cli.emit import KINDS
from heatext.cli.main import build_parser, read_config, resolve
from heatext.errors import ExprSyntaxError, UnknownSymbol, WindowExceeded
from heatext.forms import ConnectionMatrix, GradedForm, dt, eta, solve_wave_extension
from heatext.jets import JetExpression
from heatext.psdo import FlowTable, PsdoOperator
from heatext.rings import ZSeries, p, t
from heatext.weyl import StructureTable, WeylElement, basis_within, s_bracket, structure_table
from heatext.window import TruncationWindow


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- parser ---------------------------------------------------------------

def test_weyl_parse_examples():
    assert parse_expression("[D,z]", "weyl") == WeylElement.scalar(1)
    assert parse_expression("D z", "weyl") == parse_expression("z*D + 1", "weyl")
    assert parse_expression("zD", "weyl") == WeylElement.basis(1, 1)
    assert parse_expression("3/2 z^2 - (D)", "weyl") == WeylElement({(0, 2): Fraction(3, 2), (1, 0): -1})
    assert parse_expression("[D^2, z^2]", "weyl") == parse_expression("4 z D + 2", "weyl")


def test_jets_parse_examples():
    w = TruncationWindow(N=3, P=5)
    got = parse_expression("V(1,1)(p0)", "jets", w)
    assert got == t(1) * p(1) + t(2) * p(2) * 2 + t(3) * p(3) * 3
    assert parse_expression("[Dx, T](p0 p1)", "jets") == p(0) * p(1)
    assert parse_expression("Dt2(p1) - Dx Dx(p1)", "jets").is_zero()
    assert parse_expression("T(1)", "jets") == t(1)
    assert parse_expression("2 t1^2 + p3", "jets") == t(1) ** 2 * 2 + p(3)


@pytest.mark.parametrize(
    "src,context,offset",
    [("V(1,", "jets", 4), ("(D", "weyl", 2), ("D +", "weyl", 3), ("[D z]", "weyl", 4), ("p0 )", "jets", 3), ("2/0", "weyl", 2)],
)
def test_syntax_error_offsets(src, context, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expression(src, context)
    assert info.value.offset == offset


def test_unknown_symbols_and_empty_input():
    with pytest.raises(UnknownSymbol):
        parse_expression("q", "weyl")
    with pytest.raises(UnknownSymbol):
        parse_expression("Foo(p0)", "jets")
    with pytest.raises(ExprSyntaxError):
        parse_expression("   ", "weyl")


def test_jets_window_is_respected():
    with pytest.raises(WindowExceeded):
        parse_expression("Dt3(p7)", "jets", TruncationWindow(P=8))


# -- emission ---------------------------------------------------------------

def test_emit_examples():
    assert emit(WeylElement({(1, 1): 1, (0, 0): 1}), "latex") == r"z\frac{d}{dz}+1"
    table = solve_wave_extension(TruncationWindow(M=2, K=3))
    assert emit(table, "text").splitlines()[0] == "dt0 = eta(0,0) + t1*eta(1,0) + (t1^2+2*t2)*eta(2,0)"
    data = json.loads(emit(table, "json"))
    assert data["dt"][0]["k"] == 0 and data["dt"][0]["terms"][0]["eta"] == [0, 0]
    op = json.loads(emit(PsdoOperator({1: 1, -1: p(0)}, -6), "json"))
    assert op["tail_depth"] == -6 and op["orders"][0]["a"] == 1
    with pytest.raises(ValueError):
        emit(table, "yaml")


weyl_values = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), rationals, max_size=4).map(WeylElement)
jet_values = polynomials(gens=[("t", 1), ("t", 2), ("p", 0), ("p", 3)]).map(lambda f: JetExpression.of(f, (4, 6)))
psdo_values = st.builds(
    PsdoOperator,
    st.dictionaries(st.integers(-4, 3), polynomials(), max_size=3),
    st.one_of(st.none(), st.integers(-6, -4)),
)
form_values = st.builds(
    lambda cs: GradedForm(1, {(s,): c for s, c in cs}),
    st.lists(st.tuples(st.sampled_from([dt(1), dt(2), eta(0, 0), eta(1, 2)]), polynomials()), max_size=3),
)
matrix_values = st.lists(form_values, min_size=4, max_size=4).map(
    lambda fs: ConnectionMatrix([[fs[0], fs[1]], [fs[2], fs[3]]])
)
zseries_values = st.builds(
    lambda cs, valid: ZSeries(cs, valid), st.lists(polynomials(), min_size=1, max_size=4), st.integers(-1, 3)
)
flow_values = st.builds(
    lambda eqs, j, depth, tag: FlowTable(j, eqs, depth, tag),
    st.dictionaries(st.integers(1, 5), polynomials(), max_size=3),
    st.integers(1, 4),
    st.integers(2, 8),
    st.sampled_from(["v", "w"]),
)
window_values = st.builds(
    TruncationWindow, *(st.integers(0, 9) for _ in range(5))
)
extension_values = st.builds(
    lambda M, K: solve_wave_extension(TruncationWindow(M=M, K=K, N=M + K)), st.integers(0, 3), st.integers(0, 4)
)
_pairs = [(a, b) for a in basis_within(3) for b in basis_within(3)]
structure_values = st.one_of(
    st.integers(1, 3).map(structure_table),
    st.lists(st.sampled_from(_pairs), max_size=6).map(
        lambda keys: StructureTable(3, {k: s_bracket(*k) for k in keys})
    ),
)
report_values = st.builds(
    lambda name, cases, fails: SuiteReport(
        name, TruncationWindow(), {"imax": 2}, cases,
        [{"case": c, "kind": "residual", "location": "x", "coefficient": "1/2"} for c in fails],
    ),
    st.sampled_from(["reduction", "symmetry"]),
    st.lists(st.text(min_size=1, max_size=8), max_size=4),
    st.lists(st.text(max_size=5), max_size=2),
)

CORPUS = {
    "polynomial": polynomials(),
    "zseries": zseries_values,
    "weyl": weyl_values,
    "jet": jet_values,
    "form": form_values,
    "matrix": matrix_values,
    "extension": extension_values,
    "psdo": psdo_values,
    "flows": flow_values,
    "structure": structure_values,
    "window": window_values,
    "report": report_values,
}


def test_corpus_covers_every_kind():
    assert set(CORPUS) == set(KINDS)


@pytest.mark.parametrize("kind", sorted(CORPUS))
def test_json_round_trip(kind):
    @settings(max_examples=60)
    @given(CORPUS[kind])
    def check(value):
        text = emit(value, "json")
        again = decode(kind, text)
        assert again == value
        assert emit(again, "json") == text

    check()


# -- commands ---------------------------------------------------------------

def test_weyl_command(capsys):
    code, out, _ = run(capsys, "weyl", "[D,z]")
    assert (code, out) == (0, "1\n")
    code, out, _ = run(capsys, "weyl", "z D + 1", "--emit", "latex")
    assert out == "z\\frac{d}{dz}+1\n"


def test_jets_command(capsys):
    code, out, _ = run(capsys, "jets", "V(1,1)(p0)", "--tmax", "3", "--jetmax", "4")
    assert (code, out) == (0, "p1*t1+2*p2*t2+3*p3*t3\n")


def test_syntax_error_is_usage_error(capsys):
    code, _, err = run(capsys, "jets", "V(1,")
    assert code == 2 and "offset 4" in err


def test_window_exhaustion_exit_code(capsys):
    code, _, err = run(capsys, "jets", "Dt3(p7)")
    assert code == 3 and "P=8" in err
    code, _, _ = run(capsys, "extend", "wave", "--m-max", "3", "--k-max", "4")
    assert code == 3


def test_extend_command(capsys):
    code, out, _ = run(capsys, "extend", "wave", "--m-max", "2", "--k-max", "3")
    assert code == 0
    assert out.splitlines()[0] == "dt0 = eta(0,0) + t1*eta(1,0) + (t1^2+2*t2)*eta(2,0)"
    code, out, _ = run(capsys, "extend", "wave", "--m-max", "2", "--k-max", "3", "--emit", "json")
    assert decode("extension", out) == solve_wave_extension(TruncationWindow(M=2, K=3))


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "reduction", "--m-max", "2", "--k-max", "3"],
        ["verify", "zero-curvature", "--j", "2", "--k", "3", "--depth", "6"],
        ["verify", "structure", "--bound", "3"],
        ["verify", "heat-compat"],
        ["verify", "extended-flatness"],
        ["verify", "dressing", "--depth", "4", "--tmax", "4"],
        ["verify", "symmetry", "--tmax", "4", "--jetmax", "16", "--imax", "2", "--mjmax", "2"],
        ["kp", "zc", "--j", "2", "--k", "4", "--depth", "6"],
        ["kp", "s-relations", "--imax", "2", "--depth", "4", "--tmax", "4"],
    ],
)
def test_suites_pass(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0, out
    assert " 0 failures" in out.splitlines()[0]


def test_unknown_suite_is_usage_error(capsys):
    code, _, _ = run(capsys, "verify", "nope")
    assert code == 2


def test_unknown_flag_is_usage_error(capsys):
    assert run(capsys, "weyl", "D", "--frobnicate")[0] == 2
    assert run(capsys, "verify", "reduction", "--bound", "3")[0] == 2
    assert run(capsys, "verify", "reduction", "--depth", "-1")[0] == 2


def test_symmetry_suite_reports_small_window(capsys):
    code, out, _ = run(capsys, "verify", "symmetry")
    assert code == 3
    assert "window" in out


def test_residual_exit_code(monkeypatch):
    from heatext.cli import suites

    monkeypatch.setitem(suites._CASES, "zero-curvature", lambda window, j, k: [("D^0", 1)])
    report = run_suite("zero-curvature", TruncationWindow(), j=2, k=3)
    assert report.exit_status == 1 and not report.ok


def test_kp_commands(capsys):
    code, out, _ = run(capsys, "kp", "flows", "--j", "2", "--depth", "6")
    assert code == 0 and out.splitlines()[0] == "v1_t2 = v1_xx+2*v2_x"
    code, out, _ = run(capsys, "kp", "flows", "--j", "2", "--depth", "6", "--emit", "json")
    assert decode("flows", out).j == 2
    code, out, _ = run(capsys, "kp", "dress", "--depth", "3", "--emit", "json")
    data = json.loads(out)
    assert code == 0 and set(data) == {"g", "g_inv", "L"}
    assert run(capsys, "kp", "flows")[0] == 2


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "hierarchy.toml"
    cfg.write_text("# window\n[window]\nM = 1\nK = 2\ndepth = 5  # tail\n")
    assert read_config(str(cfg)) == {"M": 1, "K": 2, "depth": 5}
    ns = build_parser().parse_args(["extend", "wave", "--config", str(cfg), "--k-max", "3"])
    cmd = resolve(ns)
    assert (cmd.window.M, cmd.window.K, cmd.window.N, cmd.window.depth) == (1, 3, 6, 5)
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 3\n")
    assert run(capsys, "extend", "wave", "--config", str(bad))[0] == 2


def test_determinism_and_workers(capsys):
    argv = ["verify", "extended-flatness", "--emit", "json"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    pooled = run(capsys, *argv, "--workers", "2")[1]
    assert pooled == first


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "heatext", "weyl", "[D, z^2]"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and proc.stdout == "2*z\n"
