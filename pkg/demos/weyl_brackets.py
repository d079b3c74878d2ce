"""
Brackets in the Weyl algebra
============================

Normal ordering, the bracket on the symmetry algebra, and a look at its
structure constants.
"""

from heatext.weyl import D, Z, s_bracket, structure_table, v_text
from heatext.cli import parse_expression

# D . z = z D + 1, written with z to the left of D
print((D * Z).to_text())

# the parser reads the same notation the command line accepts
print(parse_expression("[D^2, z^3]", "weyl").to_text())

# [V_{m,j}, V_{n,k}] in the basis V_{m,j} = T^m d_x^j.  The map to the Weyl
# algebra reverses products, so each bracket is minus a Weyl commutator.
print(v_text(s_bracket((0, 1), (1, 0))))   # [d_x, T] = 1
print(v_text(s_bracket((2, 0), (0, 2))))

# all brackets with index sums up to 2
print(structure_table(2).to_text())
