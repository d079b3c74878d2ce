"""Exact symbolic computation for the heat hierarchy, its Weyl-algebra
symmetries, the wave-function extension and the dressed KP calculus.

All coefficients are exact rationals.  Every truncated computation carries
an explicit :class:`TruncationWindow` or tail depth and raises instead of
dropping terms it cannot certify.
"""

from .errors import (
    DepthExhausted,
    ExprSyntaxError,
    HeatextError,
    MissingDifferentialRule,
    MissingFlow,
    NonIntegralBracket,
    NonzeroResidual,
    UnknownSymbol,
    WindowExceeded,
)
from .forms import (
    ConnectionMatrix,
    ExtensionTable,
    GradedForm,
    apply_constraint,
    build_hat_omega,
    build_omega,
    exterior_d,
    solve_wave_extension,
    verify_flatness,
)
from .jets import JetExpression, apply_T, apply_V, d_t, verify_symmetry
from .psdo import (
    FlowTable,
    PsdoOperator,
    dress,
    kp_flows,
    leibniz_compose,
    split,
    verify_g_flow_consistency,
    verify_S_relations,
    verify_zero_curvature,
)
from .rings import Polynomial, ZSeries, bell_sequence
from .weyl import StructureTable, WeylElement, normal_order_product, s_bracket, structure_table
from .window import TruncationWindow

__version__ = "0.1.0"

__all__ = [
    "ConnectionMatrix",
    "DepthExhausted",
    "ExprSyntaxError",
    "ExtensionTable",
    "FlowTable",
    "GradedForm",
    "HeatextError",
    "JetExpression",
    "MissingDifferentialRule",
    "MissingFlow",
    "NonIntegralBracket",
    "NonzeroResidual",
    "Polynomial",
    "PsdoOperator",
    "StructureTable",
    "TruncationWindow",
    "UnknownSymbol",
    "WeylElement",
    "WindowExceeded",
    "ZSeries",
    "apply_T",
    "apply_V",
    "apply_constraint",
    "bell_sequence",
    "build_hat_omega",
    "build_omega",
    "d_t",
    "dress",
    "exterior_d",
    "kp_flows",
    "leibniz_compose",
    "normal_order_product",
    "s_bracket",
    "solve_wave_extension",
    "split",
    "structure_table",
    "verify_S_relations",
    "verify_flatness",
    "verify_g_flow_consistency",
    "verify_symmetry",
    "verify_zero_curvature",
]
