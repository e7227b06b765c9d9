"""Point-symmetry analysis: determining-equation residuals, flows and
linearization at stationary points, the explicit flat-case symmetry basis,
degeneration classification, and pointwise dimension bounds.

A vector field eta is accepted as a (special) point symmetry of a system
when two residuals vanish on sample points: the vanishing Lie derivative of
the operator field,

    sum_k ( eta^k dA^i_j/dy^k - A^k_j d eta^i/dy^k + A^i_k d eta^k/dy^j ) = 0,

and the connection equation.  For nondegenerate A the latter reduces to

    sum_k d eta^i/dy^k Gamma^k_rs
      = d2 eta^i/dy^r dy^s
        + sum_k ( dGamma^i_rs/dy^k eta^k
                  + Gamma^i_ks d eta^k/dy^r + Gamma^i_rk d eta^k/dy^s );

when det A vanishes somewhere the full A-weighted form is used instead.
Acceptance is residual-based at sample points, not a symbolic proof.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .expr import ZERO, add, coord, diff_expr, eval_many, mul, sub
from .geometry import covariant_differential, curvature, ricci_and_s
from .liefn import VectorField, lie_derivative
from .tensor import TensorField
from .util import ResidualReport, max_report, sample_points

__all__ = [
    "LinearizationMatrix",
    "DegenerationReport",
    "RankNotConstantError",
    "FlowError",
    "determining_residuals",
    "is_symmetry",
    "affine_residual",
    "flow",
    "linearization",
    "flat_symmetry_basis",
    "classify",
    "degeneration_bound",
    "pointwise_symmetry_bound",
    "invariance_suite",
]

RANK_RTOL = 1e-7  # relative singular-value cutoff, scale-invariant


class FlowError(RuntimeError):
    """Flow integration failed (blow-up / step underflow); carries the time
    actually reached."""

    def __init__(self, message, t_reached):
        super().__init__(f"{message} (reached t = {t_reached:.6g})")
        self.t_reached = t_reached


class RankNotConstantError(ValueError):
    """The rank of the symmetric Ricci part varies over the sample set."""


# ---------------------------------------------------------------------------
# Determining equations
# ---------------------------------------------------------------------------


def _lie_a_exprs(sys, eta):
    n = sys.n
    A = sys.A.comps
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            total = ZERO
            for k in range(n):
                total = add(total, mul(eta.comps[k], diff_expr(A[i, j], k + 1)))
                total = sub(total, mul(A[k, j], diff_expr(eta.comps[i], k + 1)))
                total = add(total, mul(A[i, k], diff_expr(eta.comps[k], j + 1)))
            out[i, j] = total
    return out


def _conn_eq_exprs(conn, eta):
    """Residual of the reduced connection equation (valid for det A != 0)."""
    n = conn.n
    G = conn.gamma
    out = np.empty((n, n, n), dtype=object)
    d1 = [[diff_expr(eta.comps[i], k + 1) for k in range(n)] for i in range(n)]
    for i in range(n):
        for r in range(n):
            for s in range(n):
                total = ZERO
                for k in range(n):
                    total = add(total, mul(d1[i][k], G[k, r, s]))
                total = sub(total, diff_expr(d1[i][r], s + 1))
                for k in range(n):
                    total = sub(total, mul(diff_expr(G[i, r, s], k + 1), eta.comps[k]))
                    total = sub(total, mul(G[i, k, s], d1[k][r]))
                    total = sub(total, mul(G[i, r, k], d1[k][s]))
                out[i, r, s] = total
    return out


def _conn_eq_full_exprs(sys, eta):
    """Residual of the full A-weighted connection equation (degenerate A)."""
    n = sys.n
    A = sys.A.comps
    G = sys.conn.gamma
    out = np.empty((n, n, n), dtype=object)
    d1 = [[diff_expr(eta.comps[i], k + 1) for k in range(n)] for i in range(n)]
    for i in range(n):
        for r in range(n):
            for s in range(n):
                total = ZERO
                for j in range(n):
                    for k in range(n):
                        lhs = sub(
                            mul(d1[i][k], A[k, j]),
                            mul(diff_expr(A[i, j], k + 1), eta.comps[k]),
                        )
                        total = add(total, mul(lhs, G[j, r, s]))
                for j in range(n):
                    total = sub(total, mul(A[i, j], diff_expr(d1[j][r], s + 1)))
                    for k in range(n):
                        rhs = mul(diff_expr(G[j, r, s], k + 1), eta.comps[k])
                        rhs = add(rhs, mul(G[j, k, s], d1[k][r]))
                        rhs = add(rhs, mul(G[j, r, k], d1[k][s]))
                        total = sub(total, mul(A[i, j], rhs))
                out[i, r, s] = total
    return out


def _eval_obj_array(arr, pts):
    out = np.empty((len(pts),) + arr.shape, dtype=float)
    for idx in np.ndindex(*arr.shape):
        out[(slice(None),) + idx] = eval_many(arr[idx], pts)
    return out


def determining_residuals(sys, eta, pts=None):
    """Max-norm residuals of the two determining equations over sample
    points.  Returns {"res_A": ..., "res_Gamma": ...}; eta is accepted as a
    symmetry when both stay within tolerance.  With det A = 0 at a probe
    point the A-weighted connection equation replaces the reduced one."""
    n = sys.n
    if pts is None:
        pts = sample_points(n, 20)
    res_a = max_report(_eval_obj_array(_lie_a_exprs(sys, eta), pts), pts)
    if sys.a_nondegenerate(pts):
        exprs = _conn_eq_exprs(sys.conn, eta)
        which = "reduced"
    else:
        exprs = _conn_eq_full_exprs(sys, eta)
        which = "full"
    res_g = max_report(_eval_obj_array(exprs, pts), pts, details={"equation": which})
    return {"res_A": res_a, "res_Gamma": res_g}


def is_symmetry(sys, eta, tol=1e-8, pts=None):
    res = determining_residuals(sys, eta, pts)
    return res["res_A"].max_abs <= tol and res["res_Gamma"].max_abs <= tol


def affine_residual(conn, eta, pts=None):
    """Residual of the curvature form of the affine condition:

    nabla_r nabla_s eta^i - sum_k R^i_srk eta^k over sample points.  For a
    nondegenerate operator field this accepts exactly when the reduced
    connection equation does.
    """
    n = conn.n
    if pts is None:
        pts = sample_points(n, 20)
    dd_eta = covariant_differential(conn, covariant_differential(conn, eta.to_tensor()))
    # dd_eta comps [i, r, s] = nabla_r nabla_s eta^i
    R = curvature(conn)
    out = np.empty((n, n, n), dtype=object)
    for i in range(n):
        for r in range(n):
            for s in range(n):
                total = dd_eta.comps[i, r, s]
                for k in range(n):
                    total = sub(total, mul(R.comps[i, s, r, k], eta.comps[k]))
                out[i, r, s] = total
    return max_report(_eval_obj_array(out, pts), pts)


# ---------------------------------------------------------------------------
# Flows and linearization
# ---------------------------------------------------------------------------


def flow(eta, p, tau, rtol=1e-9, atol=1e-10, blowup=1e8):
    """phi_tau(p): transport p along eta by adaptive Runge-Kutta.

    phi_0 is the identity and the group property holds to integrator
    tolerance.  Blow-up or step underflow raises FlowError with the time
    reached.
    """
    p = np.asarray(p, dtype=float)
    if tau == 0.0:
        return p.copy()

    def rhs(_t, y):
        return eta.evaluate_many(y[None, :])[0]

    def too_big(_t, y):
        return float(np.max(np.abs(y)) - blowup)

    too_big.terminal = True
    sol = solve_ivp(rhs, (0.0, tau), p, method="RK45", rtol=rtol, atol=atol, events=too_big)
    if sol.status == 1:
        raise FlowError("flow left the working region (blow-up guard)", sol.t[-1])
    if sol.status != 0:
        raise FlowError(f"integration failed: {sol.message}", sol.t[-1] if len(sol.t) else 0.0)
    return sol.y[:, -1]


@dataclass
class LinearizationMatrix:
    """d(eta)/dy at a stationary point; the flow differential there is its
    matrix exponential."""

    point: np.ndarray
    F: np.ndarray


def linearization(eta, p0, tol=1e-10):
    p0 = np.asarray(p0, dtype=float)
    v = eta.evaluate(p0)
    if np.max(np.abs(v)) > tol:
        raise ValueError(
            f"point is not stationary: |eta| = {np.max(np.abs(v)):.3e} exceeds {tol}"
        )
    n = eta.n
    F = np.empty((n, n), dtype=float)
    for i in range(n):
        for j in range(n):
            F[i, j] = eval_many(diff_expr(eta.comps[i], j + 1), p0[None, :])[0]
    return LinearizationMatrix(point=p0, F=F)


def flat_symmetry_basis(n):
    """The n(n+1) fields spanning the symmetry algebra of a flat maximally
    degenerate system: n translations e_i followed by the n^2 linear fields
    y^s e_i.  All of them are linear, so both determining residuals vanish
    identically on any system with zero connection and constant scalar A."""
    fields = [VectorField.basis(n, i + 1) for i in range(n)]
    for i in range(n):
        for s in range(n):
            comps = [ZERO] * n
            comps[i] = coord(s + 1)
            fields.append(VectorField(n, comps))
    return fields


# ---------------------------------------------------------------------------
# Degeneration classification and dimension bounds
# ---------------------------------------------------------------------------


@dataclass
class DegenerationReport:
    n: int
    m: int
    case_label: str
    bound: int
    rank_constant: bool

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "case": self.case_label,
            "bound": self.bound,
            "rank_constant": self.rank_constant,
        }


def degeneration_bound(n, m):
    """n(n+1-m) + m(m-1)/2: n(n+1) at m=0, n(n+1)/2 at m=n."""
    return n * (n + 1 - m) + (m * (m - 1)) // 2


def _matrix_rank(mat, rtol=RANK_RTOL):
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def classify(conn, sample=None):
    """Degeneration case from the rank of the symmetric Ricci part.

    The rank must be constant over the sample (relative singular-value
    threshold 1e-7); a varying rank raises RankNotConstantError rather than
    being resolved silently.
    """
    n = conn.n
    if sample is None:
        sample = sample_points(n, 20)
    sample = np.asarray(sample, dtype=float)
    if sample.ndim == 1:
        sample = sample[None, :]
    if len(sample) == 0:
        raise ValueError("sample set is empty")
    rh = ricci_and_s(conn)["ricci_sym"].evaluate_many(sample)
    ranks = [_matrix_rank(rh[p]) for p in range(len(sample))]
    if len(set(ranks)) != 1:
        raise RankNotConstantError(
            f"rank not constant over the sample: observed {sorted(set(ranks))}"
        )
    m = ranks[0]
    if m == 0:
        label = "maximal"
    elif m == n:
        label = "general"
    else:
        label = "intermediate"
    return DegenerationReport(
        n=n, m=m, case_label=label, bound=degeneration_bound(n, m), rank_constant=True
    )


def _f_pos(n, i, k):
    """Column of F^i_k in the unknown vector (eta block first)."""
    return n + i * n + k


def pointwise_symmetry_bound(sys, p0, depth=2):
    """Upper bound for the symmetry-algebra dimension from pointwise linear
    constraints on (eta(p0), F(p0)).

    depth 0 uses the invariance of A alone; depth 1 adds the invariance of
    the curvature tensor; depth 2 adds the invariance of the covariant
    differential of the Ricci tensor.  Returns (n^2 + n) - rank of the
    assembled constraint matrix; monotone nonincreasing in depth.
    """
    if depth not in (0, 1, 2):
        raise ValueError("depth must be 0, 1 or 2")
    n = sys.n
    p0 = np.asarray(p0, dtype=float)
    nunk = n * n + n
    rows = []

    A = sys.A.evaluate(p0)
    dA = np.empty((n, n, n))  # dA[k,i,j] = d A^i_j / dy^k at p0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                dA[k, i, j] = eval_many(diff_expr(sys.A.comps[i, j], k + 1), p0[None, :])[0]
    for i in range(n):
        for j in range(n):
            row = np.zeros(nunk)
            for k in range(n):
                row[k] += dA[k, i, j]
                row[_f_pos(n, i, k)] -= A[k, j]
                row[_f_pos(n, k, j)] += A[i, k]
            rows.append(row)

    if depth >= 1:
        Rfield = curvature(sys.conn)
        R = Rfield.evaluate(p0)
        dR = np.empty((n, n, n, n, n))
        for idx in np.ndindex(n, n, n, n):
            for k in range(n):
                dR[(k,) + idx] = eval_many(diff_expr(Rfield.comps[idx], k + 1), p0[None, :])[0]
        for i, j, r, s in np.ndindex(n, n, n, n):
            row = np.zeros(nunk)
            for k in range(n):
                row[k] += dR[k, i, j, r, s]
                row[_f_pos(n, i, k)] -= R[k, j, r, s]
                row[_f_pos(n, k, j)] += R[i, k, r, s]
                row[_f_pos(n, k, r)] += R[i, j, k, s]
                row[_f_pos(n, k, s)] += R[i, j, r, k]
            rows.append(row)

    if depth >= 2:
        Qfield = covariant_differential(sys.conn, ricci_and_s(sys.conn)["ricci"])
        Q = Qfield.evaluate(p0)
        dQ = np.empty((n, n, n, n))
        for idx in np.ndindex(n, n, n):
            for k in range(n):
                dQ[(k,) + idx] = eval_many(diff_expr(Qfield.comps[idx], k + 1), p0[None, :])[0]
        for a, b, c in np.ndindex(n, n, n):
            row = np.zeros(nunk)
            for k in range(n):
                row[k] += dQ[k, a, b, c]
                row[_f_pos(n, k, a)] += Q[k, b, c]
                row[_f_pos(n, k, b)] += Q[a, k, c]
                row[_f_pos(n, k, c)] += Q[a, b, k]
            rows.append(row)

    mat = np.asarray(rows)
    return nunk - _matrix_rank(mat)


# ---------------------------------------------------------------------------
# Invariance consequences of a verified symmetry
# ---------------------------------------------------------------------------


def _lie_max(eta, field, pts):
    return max_report(lie_derivative(eta, field).evaluate_many(pts), pts)


def invariance_suite(sys, eta, pts=None, rng=None, n_random=5):
    """Residual suite for the geometric consequences of a point symmetry:
    vanishing Lie derivatives of the curvature tensor, the Ricci tensor, the
    S field and nabla(Ricci), plus the commutator of the Lie derivative with
    the covariant differential on random tensor fields."""
    n = sys.n
    if pts is None:
        pts = sample_points(n, 20)
    conn = sys.conn
    curv = curvature(conn)
    parts = ricci_and_s(conn, curv)
    out = {
        "lie_curvature": _lie_max(eta, curv, pts),
        "lie_ricci": _lie_max(eta, parts["ricci"], pts),
        "lie_s": _lie_max(eta, parts["s"], pts),
        "lie_nabla_ricci": _lie_max(
            eta, covariant_differential(conn, parts["ricci"]), pts
        ),
    }
    rng = rng if rng is not None else np.random.default_rng(7)
    worst = 0.0
    for _ in range(n_random):
        w = _random_field(n, rng)
        lhs = lie_derivative(eta, covariant_differential(conn, w))
        rhs = covariant_differential(conn, lie_derivative(eta, w))
        worst = max(worst, float(np.max(np.abs(lhs.evaluate_many(pts) - rhs.evaluate_many(pts)))))
    out["commutator_nabla"] = ResidualReport(worst)
    return out


def _random_field(n, rng, valences=((1, 0), (0, 1), (1, 1), (0, 2))):
    from .expr import const

    r, s = valences[rng.integers(len(valences))]
    arr = np.empty((n,) * (r + s), dtype=object)
    for idx in np.ndindex(*arr.shape):
        c0, c1, c2 = rng.uniform(-1, 1, size=3)
        ya = coord(int(rng.integers(1, n + 1)))
        yb = coord(int(rng.integers(1, n + 1)))
        arr[idx] = add(const(c0), add(mul(const(c1), ya), mul(const(c2), mul(ya, yb))))
    return TensorField(n, r, s, arr)
