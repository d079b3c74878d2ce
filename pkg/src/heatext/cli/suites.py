"""Verification suites run by ``heatext verify``.

Every suite enumerates its cases up front, sorted by canonical key, and
runs each case independently.  Module errors are caught per case and
recorded in the report, so one exhausted window does not hide the others.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

from .. import forms, jets, psdo, weyl
from ..errors import DepthExhausted, HeatextError, NonzeroResidual, WindowExceeded
from ..rings import p, t
from ..window import TruncationWindow

SUITES = (
    "heat-compat",
    "symmetry",
    "structure",
    "extended-flatness",
    "reduction",
    "zero-curvature",
    "dressing",
)

EXIT_OK, EXIT_RESIDUAL, EXIT_USAGE, EXIT_WINDOW = 0, 1, 2, 3


@dataclass
class SuiteReport:
    """Outcome of one suite.  ``failures`` holds dicts with keys
    ``case``, ``kind`` (residual, window, depth, error), ``location`` and
    ``coefficient``.  Wall time is diagnostic only: it is left out of the
    serialized report and of equality so reruns stay byte-identical."""

    suite: str
    window: TruncationWindow
    params: dict
    cases: list
    failures: list
    wall_time: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def exit_status(self) -> int:
        kinds = {f["kind"] for f in self.failures}
        if not kinds:
            return EXIT_OK
        if kinds <= {"window", "depth"}:
            return EXIT_WINDOW
        return EXIT_RESIDUAL

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "window": self.window.to_json(),
            "params": dict(sorted(self.params.items())),
            "cases": list(self.cases),
            "failures": [dict(f) for f in self.failures],
            "ok": self.ok,
        }

    @classmethod
    def from_json(cls, data) -> "SuiteReport":
        return cls(
            data["suite"],
            TruncationWindow.from_json(data["window"]),
            dict(data["params"]),
            list(data["cases"]),
            [dict(f) for f in data["failures"]],
        )

    def to_text(self) -> str:
        failed = {f["case"] for f in self.failures}
        lines = [f"suite {self.suite}: {len(self.cases)} cases, {len(self.failures)} failures"]
        for case in self.cases:
            lines.append(f"{'FAIL' if case in failed else 'ok  '} {case}")
        for f in self.failures:
            if f["kind"] == "residual":
                lines.append(f"  {f['case']}: residual at {f['location']}: {f['coefficient']}")
            else:
                lines.append(f"  {f['case']}: {f['kind']}: {f['coefficient']}")
        return "\n".join(lines)

    def to_latex(self) -> str:
        rows = []
        failed = {f["case"] for f in self.failures}
        for case in self.cases:
            mark = r"\text{fail}" if case in failed else r"\text{ok}"
            rows.append(rf"\texttt{{{case}}} & {mark}")
        body = " \\\\\n".join(rows)
        return "\\begin{array}{ll}\n" + body + "\n\\end{array}"


def _show(x) -> str:
    if hasattr(x, "to_text"):
        return x.to_text()
    return str(x)


def _failure(case: str, kind: str, location, coefficient) -> dict:
    return {"case": case, "kind": kind, "location": str(location), "coefficient": _show(coefficient)}


# -- case bodies ----------------------------------------------------------
# Each returns a list of (location, nonzero coefficient).  They are module
# level functions so a process pool can pickle them.

def _nonzero_poly(loc, value):
    return [] if value == 0 else [(loc, value)]


def _case_heat_compat(window, i, j):
    out = []
    lhs = jets.d_t(i, jets.d_t(j, jets.JetExpression.of(p(0), window)))
    out += _nonzero_poly("p0", (lhs - p(i + j)).poly)
    for a in range(1, window.N + 1):
        e = jets.JetExpression.of(p(0) * t(a), window)
        r = jets.d_t(i, jets.d_t(j, e)) - jets.d_t(j, jets.d_t(i, e))
        out += _nonzero_poly(f"p0*t{a}", r.poly)
    return out


def _case_symmetry(window, i, m, j):
    jets.verify_symmetry(i, m, j, window)
    return []


def _weyl_oracle(A, B, smax):
    out = []
    prod = weyl.normal_order_product(A, B)
    for s in range(smax + 1):
        inner = weyl.act_on_monomial(B, s)
        expect: dict = {}
        for power, c in inner.items():
            for q, d in weyl.act_on_monomial(A, power).items():
                expect[q] = expect.get(q, 0) + c * d
        expect = {q: c for q, c in expect.items() if c}
        if weyl.act_on_monomial(prod, s) != expect:
            out.append((f"z^{s}", prod))
    return out


def _case_structure_pair(a, b):
    A, B = weyl.image(*a), weyl.image(*b)
    out = []
    direct = -weyl.weyl_commutator(A, B)
    if weyl.s_bracket(a, b) != direct:
        out.append(("bracket", weyl.s_bracket(a, b) - direct))
    anti = weyl.s_bracket(a, b) + weyl.s_bracket(b, a)
    if anti:
        out.append(("antisymmetry", anti))
    out += _weyl_oracle(A, B, sum(a) + sum(b) + 1)
    return out


def _case_structure_jacobi(a, b, c):
    X, Y, Z = (weyl.image(*x) for x in (a, b, c))
    r = weyl.jacobi(X, Y, Z, bracket=weyl.s_bracket_elements)
    return [("jacobi", r)] if r else []


def _case_flatness(window, k):
    ext = forms.solve_wave_extension(window)
    report = forms.verify_flatness(ext, raise_on_failure=False)
    return [(key, c) for kk, key, c in report.failures if kk == k]


def _case_d_squared(window, q, i):
    J = window.K + window.M
    dd, certified = forms.d_squared_eta(q, i, window.M, J)
    return [(key, dd.coefficient(*key)) for key in certified if dd.coefficient(*key)]


def _case_constraint(window, k):
    ext = forms.solve_wave_extension(window)
    got = forms.apply_constraint(ext.dt[k])
    want = forms.GradedForm.zero(1) if k == 0 else forms.GradedForm.basis(forms.eta(0, k))
    diff = got - want
    return [(f"dt{k}", diff)] if not diff.is_zero() else []


def _case_collapse(window, n):
    ext = forms.solve_wave_extension(window)
    reduced = forms.reduce_to_heat(forms.build_hat_omega(ext, n))
    target = forms.build_omega(n)
    out = []
    for i in range(n):
        for k in range(n):
            diff = reduced[i, k] - target[i, k]
            if not diff.is_zero():
                out.append((f"[{i},{k}]", diff))
    return out


def _case_0wave(window, n):
    solved = forms.example_0wave(n).solved()
    want = {f"dt{j}": 0 for j in range(3, n + 1)}
    if solved != want:
        return [("constraints", ", ".join(sorted(solved)))]
    return []


def _case_zero_curvature(window, j, k):
    r = psdo.verify_zero_curvature(j, k, window.depth, raise_on_failure=False)
    return [(f"D^{a}", r.coefficient(a)) for a in r.orders() if r.coefficient(a)]


def _case_g_inverse(window):
    g, g_inv, _ = psdo.dress(window.depth)
    r = psdo.leibniz_compose(g, g_inv) - psdo.IDENTITY
    return [(f"D^{a}", r.coefficient(a)) for a in r.orders() if r.coefficient(a)]


def _case_g_flow(window, j):
    r = psdo.verify_g_flow_consistency(j, window.depth, raise_on_failure=False)
    return [(f"D^{a}", r.coefficient(a)) for a in r.orders() if r.coefficient(a)]


def _case_s_relations(window, imax):
    rep = psdo.verify_S_relations(imax, window.N, window.depth, raise_on_failure=False)
    out = [(f"[L,S]-1 D^{a}", rep.L_S_residual.coefficient(a)) for a in rep.L_S_residual.orders()
           if rep.L_S_residual.coefficient(a)]
    for i, r in sorted(rep.flow_residuals.items()):
        out += [(f"flow t{i} D^{a}", r.coefficient(a)) for a in r.orders() if r.coefficient(a)]
    return out


_CASES = {
    "heat-compat": _case_heat_compat,
    "symmetry": _case_symmetry,
    "structure-pair": _case_structure_pair,
    "structure-jacobi": _case_structure_jacobi,
    "flatness": _case_flatness,
    "d-squared": _case_d_squared,
    "constraint": _case_constraint,
    "collapse": _case_collapse,
    "0wave": _case_0wave,
    "zero-curvature": _case_zero_curvature,
    "g-inverse": _case_g_inverse,
    "g-flow": _case_g_flow,
    "s-relations": _case_s_relations,
}

# which case bodies take the window as first argument
_WINDOWLESS = {"structure-pair", "structure-jacobi"}


# -- enumeration ------------------------------------------------------------

DEFAULT_PARAMS = {
    "symmetry": {"imax": 4, "mjmax": 3},
    "structure": {"bound": 5, "jacobi_bound": 4},
    "zero-curvature": {"j": None, "k": None},
    "dressing": {"jmax": 2, "imax": 2},
    "s-relations": {"imax": 2},
}


def enumerate_cases(name: str, window: TruncationWindow, params: dict) -> list[tuple]:
    """``[(sort key, case label, body name, args)]`` sorted by key."""
    cases = []
    if name == "heat-compat":
        for i in range(1, window.P + 1):
            for j in range(1, window.P + 1 - i):
                cases.append(((i, j), f"D_t{i} D_t{j}", "heat-compat", (i, j)))
    elif name == "symmetry":
        for i in range(1, params["imax"] + 1):
            for s in range(params["mjmax"] + 1):
                for m in range(s + 1):
                    j = s - m
                    cases.append(((i, m, j), f"[D_t{i}-dx^{i},V({m},{j})]", "symmetry", (i, m, j)))
    elif name == "structure":
        basis = weyl.basis_within(params["bound"])
        for a in basis:
            for b in basis:
                label = f"[V({a[0]},{a[1]}),V({b[0]},{b[1]})]"
                cases.append(((0, a, b), label, "structure-pair", (a, b)))
        small = weyl.basis_within(params["jacobi_bound"])
        for a, b, c in combinations(small, 3):
            label = "jacobi " + " ".join(f"V({x[0]},{x[1]})" for x in (a, b, c))
            cases.append(((1, a, b, c), label, "structure-jacobi", (a, b, c)))
    elif name == "extended-flatness":
        for k in range(window.K + 1):
            cases.append(((0, k), f"d(dt{k})", "flatness", (k,)))
        for q in range(window.M + 1):
            for i in range(window.K + 1):
                cases.append(((1, q, i), f"dd eta({q},{i})", "d-squared", (q, i)))
    elif name == "reduction":
        for k in range(window.K + 1):
            cases.append(((0, k), f"constraint dt{k}", "constraint", (k,)))
        cases.append(((1, window.K + 1), f"collapse n={window.K + 1}", "collapse", (window.K + 1,)))
        n0 = max(window.N, 3)
        cases.append(((2, n0), f"0wave n={n0}", "0wave", (n0,)))
    elif name == "zero-curvature":
        j, k = params.get("j"), params.get("k")
        if j is not None and k is not None:
            pairs = [(j, k)]
        else:
            pairs = [
                (a, b)
                for a in range(1, window.depth + 1)
                for b in range(a + 1, window.depth + 2)
                if a + b <= window.depth + 1
            ]
        for a, b in sorted(pairs):
            cases.append(((a, b), f"zc ({a},{b})", "zero-curvature", (a, b)))
    elif name == "dressing":
        cases.append(((0,), "g g^-1 = 1", "g-inverse", ()))
        for j in range(1, params["jmax"] + 1):
            cases.append(((1, j), f"g-flow t{j}", "g-flow", (j,)))
        cases.append(((2,), f"S relations i<={params['imax']}", "s-relations", (params["imax"],)))
    elif name == "s-relations":
        cases.append(((0,), f"S relations i<={params['imax']}", "s-relations", (params["imax"],)))
    else:
        raise ValueError(f"unknown suite {name!r}")
    return sorted(cases, key=lambda c: c[0])


def _run_case(body: str, window: TruncationWindow, args: tuple):
    fn = _CASES[body]
    try:
        if body in _WINDOWLESS:
            return "ok", fn(*args)
        return "ok", fn(window, *args)
    except NonzeroResidual as exc:
        return "residual", [(exc.location, exc.residual)]
    except WindowExceeded as exc:
        return "window", [("window", str(exc))]
    except DepthExhausted as exc:
        return "depth", [("depth", str(exc))]
    except (HeatextError, ValueError) as exc:
        return "error", [(type(exc).__name__, str(exc))]


def _run_case_star(job):
    return _run_case(*job)


def run_suite(name: str, window: TruncationWindow | None = None, workers: int = 1, **params) -> SuiteReport:
    """Run a suite and collect every case's outcome into a :class:`SuiteReport`."""
    window = window or TruncationWindow()
    merged = dict(DEFAULT_PARAMS.get(name, {}))
    unknown = set(params) - set(merged)
    if unknown:
        raise ValueError(f"suite {name!r} takes no parameter(s) {sorted(unknown)}")
    merged.update(params)
    start = time.perf_counter()
    cases = enumerate_cases(name, window, merged)
    jobs = [(body, window, args) for _, _, body, args in cases]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_case_star, jobs))
    else:
        results = [_run_case_star(job) for job in jobs]
    failures = []
    for (_, label, _, _), (status, items) in zip(cases, results):
        kind = "residual" if status == "ok" else status
        for loc, coef in items:
            failures.append(_failure(label, kind, loc, coef))
    return SuiteReport(
        name,
        window,
        merged,
        [label for _, label, _, _ in cases],
        failures,
        wall_time=time.perf_counter() - start,
    )
