"""Scalar expressions, tensor fields and exterior calculus.

Walks through the building blocks: parse coefficient expressions, take exact
derivatives, assemble tensor fields, and check the classical form identities
numerically at random chart points.
"""

import numpy as np

from affsym import (
    TensorField,
    VectorField,
    exterior_derivative,
    interior_product,
    lie_derivative,
    parse_expr,
    sample_points,
    wedge,
)
from affsym.expr import diff_expr, eval_expr, to_string

# -- expressions ------------------------------------------------------------

e = parse_expr("sin(y1*y2) + exp(y1)/(1 + y2^2)", 2)
print("expression:     ", to_string(e))
print("d/dy1:          ", to_string(diff_expr(e, 1)))
print("value at (.3,.7):", eval_expr(e, [0.3, 0.7]))

# derivatives are exact: compare against central differences
h = 1e-5
p = np.array([0.3, 0.7])
fd = (eval_expr(e, p + [h, 0]) - eval_expr(e, p - [h, 0])) / (2 * h)
print("finite diff err :", abs(eval_expr(diff_expr(e, 1), p) - fd))

# -- forms --------------------------------------------------------------
# A 1-form and a vector field; d, wedge and the interior product carry the
# normalizations under which Cartan's identity holds exactly.

n = 3
omega = TensorField.from_strings(n, 0, 1, ["y2*y3", "0", "y1"])
xi = VectorField.from_strings(n, ["y2", "-y1", "1"])

domega = exterior_derivative(omega)
print("\nd(omega) is skew:", domega.is_skew())

cartan_lhs = interior_product(xi.to_tensor(), domega) + exterior_derivative(
    interior_product(xi.to_tensor(), omega)
)
cartan_rhs = lie_derivative(xi, omega)
pts = sample_points(n, 12)
gap = np.max(np.abs(cartan_lhs.evaluate_many(pts) - cartan_rhs.evaluate_many(pts)))
print("Cartan identity residual:", gap)

dd = exterior_derivative(domega)
print("d(d(omega)) max:", np.max(np.abs(dd.evaluate_many(pts))))

w2 = wedge(omega, exterior_derivative(TensorField.scalar(n, parse_expr("y3^2", n))))
print("omega ^ d(y3^2) valence:", w2.valence)
