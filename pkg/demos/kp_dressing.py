"""
KP flows and dressing
=====================

Powers of the Lax operator, the flows they generate, the zero-curvature
identity, and the dressing operator g.
"""

from heatext.psdo import (
    L_power,
    dress,
    kp_flows,
    split,
    v_in_terms_of_w,
    verify_S_relations,
    verify_zero_curvature,
)

plus, _ = split(L_power(3, 6))
print(plus.to_text())

print(kp_flows(2, 6).to_text())

print(verify_zero_curvature(2, 3, 6).is_zero())

g, g_inv, L = dress(4)
print(g.to_text())
print(L.to_text())
print({a: f.to_text() for a, f in v_in_terms_of_w(4).items()})

# S = g T g^{-1} satisfies [L, S] = 1 and commutes with the corrected flows
print(verify_S_relations(2, 4, 4).ok)
