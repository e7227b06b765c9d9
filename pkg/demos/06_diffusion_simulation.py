"""Method-of-lines runs: heat decay, symmetry transport, and the spin chain.

The simulator is validated against external anchors: the heat kernel, the
commutation of a symmetry flow with the evolution, and for the spin chain
the embedding equation S_t = S x S_xx evaluated directly on the sphere.
"""

import io

import numpy as np

from affsym import (
    CanonicalSpec,
    Connection,
    DiffusionSystem,
    VectorField,
    build_system,
    evolve,
    heisenberg_system,
    make_grid,
    pde_residual,
    scalar_operator,
    symmetry_transport_check,
)
from affsym.pdesim import (
    dump_csv,
    evolve_snapshots,
    heisenberg_embedding_residual,
    stability_limit,
    stereo_to_sphere,
)

L = 2 * np.pi

# -- heat decay ----------------------------------------------------------

heat = DiffusionSystem(1, scalar_operator(1, 1.0), Connection.zeros(1))
grid = make_grid([np.sin], 64, L)
print("stability limit:", stability_limit(heat, grid))
out = evolve(heat, grid, dt=0.002, steps=50)
err = np.max(np.abs(out.values[:, 0] - np.exp(-0.1) * np.sin(grid.x)))
print(f"heat mode decay error at t=0.1: {err:.2e}")

snaps = evolve_snapshots(heat, grid, 0.002, steps=8, every=2)
print("equation residual over snapshots:", pde_residual(heat, snaps))

# -- symmetry transport ----------------------------------------------------

cc = build_system(CanonicalSpec("constcurv_22_13", n=2, a=1.0))
eta = VectorField.from_strings(2, ["(1 + y1^2 - y2^2)/2", "y1*y2"])
grid2 = make_grid([lambda x: 0.25 * np.sin(x), lambda x: 0.2 * np.cos(x)], 32, L)
rep = symmetry_transport_check(cc, eta, 0.1, grid2, dt=0.0025, steps=20)
print("\ntransport mismatch (map-then-evolve vs evolve-then-map):", rep["max_abs"])

# -- spin chain -------------------------------------------------------------

spin = heisenberg_system()
gspin = make_grid([lambda x: 0.3 * np.sin(x) + 0.05, lambda x: 0.2 * np.cos(x) - 0.1], 64, L)
print("\nspin chain:")
print("  embedding residual (N=64) :", heisenberg_embedding_residual(gspin, dt=1e-6))
out = evolve(spin, gspin, dt=0.003, steps=100)
svals = stereo_to_sphere(out.values)
print("  | |S|^2 - 1 | after 100 steps:", np.max(np.abs((svals**2).sum(axis=1) - 1)))

buf = io.StringIO()
dump_csv([gspin, out], buf)
print("  CSV snapshot header:", buf.getvalue().splitlines()[0])
