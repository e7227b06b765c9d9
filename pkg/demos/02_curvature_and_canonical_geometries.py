"""Curvature, Ricci splits, and the canonical geometries.

Builds the constant-curvature and intermediate families, checks their
structure identities at sample points, and classifies each by the rank of
the symmetric Ricci part.
"""

import numpy as np

from affsym import (
    CanonicalSpec,
    build_system,
    classify,
    constcurv_metric,
    covariant_differential,
    curvature,
    metric_connection,
    ricci_and_s,
    sample_points,
    structure_residual,
)

# -- constant curvature -------------------------------------------------

n = 3
spec = CanonicalSpec("constcurv_22_13", n=n, a=1.0, epsilons=(1, 1, 1))
sysd = build_system(spec)
g, f = constcurv_metric(n)
pts = sample_points(n, 20)

parts = ricci_and_s(sysd.conn)
print("constant-curvature geometry, n =", n)
print("  |Ricci - g|      :", np.max(np.abs(parts["ricci"].evaluate_many(pts) - g.evaluate_many(pts))))
print("  |nabla g|        :", np.max(np.abs(covariant_differential(sysd.conn, g).evaluate_many(pts))))
print("  |S|              :", np.max(np.abs(parts["s"].evaluate_many(pts))))
print("  |nabla Ricci|    :", np.max(np.abs(covariant_differential(sysd.conn, parts["ricci"]).evaluate_many(pts))))
print("  structure defect :", structure_residual(sysd.conn, "const_curv_19_14").max_abs)

# the connection coincides with the Christoffel symbols of its own Ricci metric
christoffel = metric_connection(g)
print("  |Gamma - Christoffel(g)|:",
      np.max(np.abs(sysd.conn.evaluate_many(pts) - christoffel.evaluate_many(pts))))

rep = classify(sysd.conn)
print("  classification   : m=%d (%s), bound %d" % (rep.m, rep.case_label, rep.bound))

# -- intermediate degeneration ------------------------------------------

inter = build_system(CanonicalSpec("intermediate_17_19", n=3, a=1.0, m=1, u=("y1",)))
rep = classify(inter.conn)
print("\nintermediate geometry (m = 1, u = y1 dy1)")
print("  classification   : m=%d (%s), bound %d" % (rep.m, rep.case_label, rep.bound))
print("  curvature-structure defect:",
      structure_residual(inter.conn, "intermediate_10_15").max_abs)

# curvature itself, for the curious: R^i_srk components at one point
R = curvature(inter.conn)
print("  R at (0.2, 0.1, -0.3):")
print(np.round(R.evaluate([0.2, 0.1, -0.3]), 6))
