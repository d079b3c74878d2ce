"""
Symmetries of the heat hierarchy
================================

The jets p_j of u, the flows D_{t_i}, and the operator T that commutes
with every flow once the flow is corrected by d_x^i.
"""

from heatext.jets import JetExpression, apply_T, apply_V, commutator_residual, d_t
from heatext.rings import p, t
from heatext.window import TruncationWindow

window = TruncationWindow(N=3, P=10)
u = JetExpression.of(p(0), window)

# the flows are compatible: D_t2 D_t3 u = p_5
print(d_t(2, d_t(3, u)))

# T u with three times, and V(1,1) u = T d_x u
print(apply_T(u))
print(apply_V(1, 1, u))

# [D_t2 - d_x^2, V(2,1)] vanishes on a mixed monomial
e = JetExpression.of(p(1) * t(2), window)
print(commutator_residual(2, 2, 1, e))
