"""Affine connections: curvature, Ricci splits, covariant differential,
metric connections, structure-formula residuals, coordinate transforms.

Index conventions are pinned once here and cited everywhere else:

    R^i_srk = d Gamma^i_ks / dy^r - d Gamma^i_rs / dy^k
              + sum_q Gamma^q_ks Gamma^i_rq - sum_q Gamma^q_rs Gamma^i_kq

stored as comps[i, s, r, k]; s is the argument (Z) slot, (r, k) the skew
pair, so [nabla_r, nabla_k] Z^i = sum_s R^i_srk Z^s.  The covariant
differential puts its new covariant slot first, so contracting a vector into
slot one gives the covariant derivative along it.  Ricci contracts the upper
index with the r slot, the S field with the s slot; S = 2 * skew(Ricci) is
forced by the first Bianchi identity and is asserted as a test, not used as
a shortcut.
"""

from __future__ import annotations

import numpy as np

from .expr import Expr, ZERO, add, const, diff_expr, eval_many, mul, parse_expr, sub
from .tensor import TensorField, pushforward, sym_matrix_inverse
from .util import max_report, sample_points

__all__ = [
    "Connection",
    "DiffusionSystem",
    "curvature",
    "covariant_differential",
    "ricci_and_s",
    "metric_connection",
    "lower_curvature",
    "structure_residual",
    "bianchi_padov_residual",
    "transform_connection",
    "transform_system",
    "scalar_operator",
]

STRUCTURE_FORMS = ("intermediate_10_15", "two_dim_12_1", "beta_14_1", "const_curv_19_14")


class Connection:
    """Symmetric affine connection: n^3 coefficient fields Gamma^k_rs.

    Not a tensor; transforms with an inhomogeneous term (see
    transform_connection).  gamma[k, r, s] must be symmetric in (r, s).
    """

    def __init__(self, n, gamma):
        self.n = int(n)
        if isinstance(gamma, np.ndarray) and gamma.dtype == object and gamma.shape == (n, n, n):
            self.gamma = gamma
        else:
            arr = np.empty((n, n, n), dtype=object)
            src = np.asarray(gamma, dtype=object)
            if src.shape != (n, n, n):
                raise ValueError(f"gamma shape {src.shape} != {(n, n, n)}")
            for idx in np.ndindex(n, n, n):
                v = src[idx]
                arr[idx] = v if isinstance(v, Expr) else const(v)
            self.gamma = arr

    @classmethod
    def zeros(cls, n):
        arr = np.empty((n, n, n), dtype=object)
        arr[...] = ZERO
        return cls(n, arr)

    @classmethod
    def from_strings(cls, n, entries):
        """entries[k][r][s] are expression strings for Gamma^k_rs."""
        src = np.asarray(entries, dtype=object)
        arr = np.empty((n, n, n), dtype=object)
        for idx in np.ndindex(n, n, n):
            t = src[idx]
            arr[idx] = parse_expr(t, n) if isinstance(t, str) else (
                t if isinstance(t, Expr) else const(t)
            )
        return cls(n, arr)

    def as_tensor_slots(self):
        """The coefficient array as a (1,2) TensorField (storage only; the
        object does not transform tensorially)."""
        return TensorField(self.n, 1, 2, self.gamma)

    def evaluate_many(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        out = np.empty((pts.shape[0], self.n, self.n, self.n), dtype=float)
        for idx in np.ndindex(self.n, self.n, self.n):
            out[(slice(None),) + idx] = eval_many(self.gamma[idx], pts)
        return out

    def symmetry_residual(self, pts=None):
        """max |Gamma^k_rs - Gamma^k_sr| over sample points."""
        if pts is None:
            pts = sample_points(self.n, 20)
        g = self.evaluate_many(pts)
        return float(np.max(np.abs(g - g.transpose(0, 1, 3, 2))))

    def check_symmetric(self, tol=1e-12, pts=None):
        res = self.symmetry_residual(pts)
        if res > tol:
            raise ValueError(f"connection coefficients not symmetric: residual {res:.3e}")


class DiffusionSystem:
    """Geometric data of an evolution system: operator field A of valence
    (1,1) plus a symmetric affine connection on the same chart."""

    def __init__(self, n, a_field, conn, check=True):
        self.n = int(n)
        self.A = a_field
        self.conn = conn
        if a_field.valence != (1, 1) or a_field.n != n or conn.n != n:
            raise ValueError("operator field must be (1,1) on the same chart as the connection")
        if check:
            conn.check_symmetric()

    def a_nondegenerate(self, pts=None, tol=1e-12):
        """True when det A stays away from zero on the probe points."""
        if pts is None:
            pts = sample_points(self.n, 20)
        vals = self.A.evaluate_many(pts)
        return bool(np.min(np.abs(np.linalg.det(vals))) > tol)


def scalar_operator(n, a):
    """A = a * identity."""
    return TensorField.identity(n).scale(a)


# ---------------------------------------------------------------------------
# Curvature and contractions
# ---------------------------------------------------------------------------


def curvature(conn):
    """Curvature tensor of the connection, comps[i, s, r, k] = R^i_srk."""
    n = conn.n
    G = conn.gamma
    out = np.empty((n, n, n, n), dtype=object)
    for i in range(n):
        for s in range(n):
            for r in range(n):
                for k in range(n):
                    total = sub(diff_expr(G[i, k, s], r + 1), diff_expr(G[i, r, s], k + 1))
                    for q in range(n):
                        total = add(total, mul(G[q, k, s], G[i, r, q]))
                        total = sub(total, mul(G[q, r, s], G[i, k, q]))
                    out[i, s, r, k] = total
    return TensorField(n, 1, 3, out)


def covariant_differential(conn, w):
    """nabla W as a (r, s+1) field with the derivative slot first.

    Contracting a vector Y into the first covariant slot yields nabla_Y W;
    on scalars this is the gradient, and the Leibniz rule over tensor
    products holds componentwise.
    """
    if isinstance(w, Expr):
        w = TensorField.scalar(conn.n, w)
    n = conn.n
    G = conn.gamma
    out = np.empty((n,) * (w.r + w.s + 1), dtype=object)
    for idx in np.ndindex(*w.comps.shape):
        I, J = idx[: w.r], idx[w.r :]
        for k in range(n):
            total = diff_expr(w.comps[idx], k + 1)
            for a in range(w.r):
                for q in range(n):
                    src = I[:a] + (q,) + I[a + 1 :] + J
                    total = add(total, mul(G[I[a], k, q], w.comps[src]))
            for b in range(w.s):
                for q in range(n):
                    src = I + J[:b] + (q,) + J[b + 1 :]
                    total = sub(total, mul(G[q, k, J[b]], w.comps[src]))
            out[I + (k,) + J] = total
    return TensorField(n, w.r, w.s + 1, out)


def ricci_and_s(conn, curv=None):
    """Ricci tensor, the S field, and the symmetric/skew Ricci split.

    R_ij = sum_k R^k_ikj and S_ij = sum_k R^k_kij; returns a dict with keys
    ricci, s, ricci_sym, ricci_skew.
    """
    n = conn.n
    R = curv.comps if curv is not None else curvature(conn).comps
    ric = np.empty((n, n), dtype=object)
    sfield = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            tr = ZERO
            ts = ZERO
            for k in range(n):
                tr = add(tr, R[k, i, k, j])
                ts = add(ts, R[k, k, i, j])
            ric[i, j] = tr
            sfield[i, j] = ts
    half = const(0.5)
    sym = np.empty((n, n), dtype=object)
    skew = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            sym[i, j] = mul(half, add(ric[i, j], ric[j, i]))
            skew[i, j] = mul(half, sub(ric[i, j], ric[j, i]))
    return {
        "ricci": TensorField(n, 0, 2, ric),
        "s": TensorField(n, 0, 2, sfield),
        "ricci_sym": TensorField(n, 0, 2, sym),
        "ricci_skew": TensorField(n, 0, 2, skew),
    }


def metric_connection(g, check=True, pts=None):
    """Christoffel symbols of a symmetric invertible metric field:

    Gamma^k_ij = sum_s g^{ks}/2 (d g_sj/dy^i + d g_is/dy^j - d g_ij/dy^s),

    the unique symmetric connection with nabla g = 0.
    """
    n = g.n
    if g.valence != (0, 2):
        raise ValueError("metric must be a (0,2) field")
    if check and not g.is_symmetric():
        raise ValueError("metric is not symmetric")
    if pts is None:
        pts = sample_points(n, 20)
    dets = np.linalg.det(g.evaluate_many(pts))
    if np.min(np.abs(dets)) < 1e-12:
        raise ValueError("metric is singular at a probe point")
    ginv = sym_matrix_inverse(g.comps)
    half = const(0.5)
    out = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                total = ZERO
                for s in range(n):
                    inner = add(
                        diff_expr(g.comps[s, j], i + 1), diff_expr(g.comps[i, s], j + 1)
                    )
                    inner = sub(inner, diff_expr(g.comps[i, j], s + 1))
                    total = add(total, mul(ginv[k, s], inner))
                out[k, i, j] = mul(half, total)
    return Connection(n, out)


def lower_curvature(g, curv):
    """R_kqij = sum_s g_ks R^s_qij, a (0,4) field."""
    n = g.n
    out = np.empty((n, n, n, n), dtype=object)
    for k in range(n):
        for q in range(n):
            for i in range(n):
                for j in range(n):
                    total = ZERO
                    for s in range(n):
                        total = add(total, mul(g.comps[k, s], curv.comps[s, q, i, j]))
                    out[k, q, i, j] = total
    return TensorField(n, 0, 4, out)


# ---------------------------------------------------------------------------
# Structure residuals
# ---------------------------------------------------------------------------


def _delta(i, j):
    return 1.0 if i == j else 0.0


def structure_residual(conn, form, pts=None):
    """Max-norm residual of a curvature structure formula.

    The right-hand side is assembled numerically from the Ricci split:

    - intermediate_10_15 (n >= 3):
        R^k_sij = (2 Rt_ij d^k_s - Rt_js d^k_i + Rt_is d^k_j)/(n+1)
                  + (Rh_js d^k_i - Rh_is d^k_j)/(n-1)
    - two_dim_12_1 (n == 2):  R^k_sij = Rh_sj d^k_i - Rh_si d^k_j
    - beta_14_1:  with beta = Rh/(n-1) - Rt/(n+1),
        R^k_sij = (b_ji - b_ij) d^k_s + b_js d^k_i - b_is d^k_j
    - const_curv_19_14:  R^k_sij = (g_sj d^k_i - g_si d^k_j)/(n-1), g = Rh
      (at n=2 the prefactor is 1, which is the planar special case).
    """
    n = conn.n
    if form not in STRUCTURE_FORMS:
        raise ValueError(f"unknown structure form {form!r}; pick one of {STRUCTURE_FORMS}")
    if form == "intermediate_10_15" and n < 3:
        raise ValueError("intermediate_10_15 requires n >= 3")
    if form == "two_dim_12_1" and n != 2:
        raise ValueError("two_dim_12_1 requires n = 2")
    if form == "beta_14_1" and n < 2:
        raise ValueError("beta_14_1 requires n >= 2")
    if form == "const_curv_19_14" and n < 2:
        raise ValueError("const_curv_19_14 requires n >= 2")
    if pts is None:
        pts = sample_points(n, 20)
    curv = curvature(conn)
    parts = ricci_and_s(conn, curv)
    Rv = curv.evaluate_many(pts)
    rh = parts["ricci_sym"].evaluate_many(pts)
    rt = parts["ricci_skew"].evaluate_many(pts)
    rhs = np.zeros_like(Rv)
    for k in range(n):
        for s in range(n):
            for i in range(n):
                for j in range(n):
                    if form == "intermediate_10_15":
                        val = (
                            2.0 * rt[:, i, j] * _delta(k, s)
                            - rt[:, j, s] * _delta(k, i)
                            + rt[:, i, s] * _delta(k, j)
                        ) / (n + 1.0) + (
                            rh[:, j, s] * _delta(k, i) - rh[:, i, s] * _delta(k, j)
                        ) / (n - 1.0)
                    elif form == "two_dim_12_1":
                        val = rh[:, s, j] * _delta(k, i) - rh[:, s, i] * _delta(k, j)
                    elif form == "beta_14_1":
                        beta = rh / (n - 1.0) - rt / (n + 1.0)
                        val = (
                            (beta[:, j, i] - beta[:, i, j]) * _delta(k, s)
                            + beta[:, j, s] * _delta(k, i)
                            - beta[:, i, s] * _delta(k, j)
                        )
                    else:  # const_curv_19_14
                        val = (rh[:, s, j] * _delta(k, i) - rh[:, s, i] * _delta(k, j)) / (
                            n - 1.0
                        )
                    rhs[:, k, s, i, j] = val
    return max_report(Rv - rhs, pts, details={"form": form})


def bianchi_padov_residual(conn, pts=None):
    """Cyclic second-Bianchi residual:

    nabla_i R^k_sjq + nabla_j R^k_sqi + nabla_q R^k_sij over sample points;
    an identity for every symmetric connection, so this doubles as an
    implementation self-test of the covariant differential.
    """
    n = conn.n
    if pts is None:
        pts = sample_points(n, 20)
    nr = covariant_differential(conn, curvature(conn)).evaluate_many(pts)
    # nr[:, k, i, s, j, q] = nabla_i R^k_sjq
    res = (
        nr
        + nr.transpose(0, 1, 4, 3, 5, 2)  # nabla_j R^k_sqi
        + nr.transpose(0, 1, 5, 3, 2, 4)  # nabla_q R^k_sij
    )
    return max_report(res, pts)


# ---------------------------------------------------------------------------
# Coordinate transforms (tensor rule for A, inhomogeneous rule for Gamma)
# ---------------------------------------------------------------------------


def transform_connection(conn, pmap):
    """Connection coefficients in the new chart:

    Gb^a_bc = sum_k Tb^a_k ( sum_ij (Gamma^k_ij o inv) S^i_b S^j_c
                             + d S^k_b / d yt^c ),

    with T the forward Jacobian (composed with the inverse map) and S the
    Jacobian of the inverse; the second term is the inhomogeneous part that
    makes the object a connection rather than a tensor.
    """
    pmap.require_inverse()
    n = conn.n
    T = pmap.jac_forward()
    Tbar = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            Tbar[i, j] = pmap.substitute_inverse(T[i, j])
    S = pmap.jac_inverse()
    Gbar = np.empty((n, n, n), dtype=object)
    Gsub = np.empty((n, n, n), dtype=object)
    for idx in np.ndindex(n, n, n):
        Gsub[idx] = pmap.substitute_inverse(conn.gamma[idx])
    for a in range(n):
        for b in range(n):
            for c in range(n):
                total = ZERO
                for k in range(n):
                    inner = diff_expr(S[k, b], c + 1)
                    for i in range(n):
                        for j in range(n):
                            inner = add(inner, mul(Gsub[k, i, j], mul(S[i, b], S[j, c])))
                    total = add(total, mul(Tbar[a, k], inner))
                Gbar[a, b, c] = total
    return Connection(n, Gbar)


def transform_system(sys, pmap, check_points=None):
    """Carry a system to new coordinates: A by the (1,1) tensor rule, the
    connection with its inhomogeneous term.  The map must supply its inverse
    and have a nonsingular Jacobian at the probe points."""
    pmap.require_inverse()
    n = sys.n
    pts = check_points if check_points is not None else sample_points(n, 20)
    jac = np.empty((len(pts), n, n), dtype=float)
    T = pmap.jac_forward()
    for i in range(n):
        for j in range(n):
            jac[:, i, j] = eval_many(T[i, j], pts)
    if np.min(np.abs(np.linalg.det(jac))) < 1e-12:
        raise ValueError("map Jacobian is singular at a probe point")
    a_new = pushforward(sys.A, pmap)
    conn_new = transform_connection(sys.conn, pmap)
    return DiffusionSystem(n, a_new, conn_new, check=False)
