"""Constructors for the canonical maximally-symmetric geometries and the
projective-flattening pipeline.

Covered families (with A = a * id unless stated):

- maximal:       zero connection (decoupled heat equations after transform);
- intermediate:  Gamma^k_rs = -(u_r d^k_s + u_s d^k_r) with a covector u
                 depending on the first m coordinates only, optionally u =
                 grad(psi);
- constant curvature: conformally-euclidean data
                 f = 1/(2(n-1)) + sum eps_i (y^i)^2 / 2,
                 u^j = -f y^j,   g = diag(eps)/f^2,
                 Gamma^k_rs = u_r d^k_s + u_s d^k_r - u^k g_rs,
                 and for n = 2 the operator field gains a rotation part
                 b * P with P the 90-degree rotation of the metric;
- scalar:        the single equation (one-dimensional chart, any
                 coefficient profile; always maximally degenerate).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import (
    Expr,
    ZERO,
    add,
    const,
    coord,
    diff_expr,
    eval_many,
    func,
    mul,
    parse_expr,
    sub,
)
from .geometry import (
    Connection,
    DiffusionSystem,
    covariant_differential,
    curvature,
    scalar_operator,
    structure_residual,
)
from .pfaff import named_system, transport_to
from .tensor import TensorField, matrix_determinant
from .util import ResidualReport, max_report, sample_points

__all__ = [
    "CanonicalSpec",
    "CANONICAL_KINDS",
    "build_system",
    "conformal_factor",
    "constcurv_metric",
    "rotation_field",
    "deformed_curvature",
    "deformation_from_covector",
    "projective_flatten",
    "FlattenResult",
]

CANONICAL_KINDS = (
    "maximal_7_11",
    "intermediate_17_19",
    "intermediate_potential_17_24",
    "constcurv_22_13",
    "constcurv_2d_22_14",
    "scalar_23_1",
)


@dataclass
class CanonicalSpec:
    """Parameters of a canonical system; u / psi entries may be Exprs or
    source strings (parsed under the chart dimension)."""

    kind: str
    n: int
    a: float = 1.0
    m: int = 0
    b: float = 0.0
    epsilons: tuple = ()
    u: tuple = ()
    psi: object = None

    def __post_init__(self):
        if self.kind not in CANONICAL_KINDS:
            raise ValueError(f"unknown canonical kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.a == 0.0:
            raise ValueError("leading coefficient a must be nonzero")
        if self.kind in ("intermediate_17_19", "intermediate_potential_17_24"):
            if not (0 <= self.m <= self.n):
                raise ValueError(f"m = {self.m} outside 0..{self.n}")
        if self.kind.startswith("constcurv"):
            if self.n < 2:
                raise ValueError("constant-curvature construction needs n >= 2")
            eps = self.epsilons or tuple([1] * self.n)
            if len(eps) != self.n or any(e not in (1, -1, 1.0, -1.0) for e in eps):
                raise ValueError("epsilons must be n entries of +/-1")
            self.epsilons = tuple(int(e) for e in eps)
        if self.b != 0.0 and self.kind != "constcurv_2d_22_14":
            raise ValueError("a rotation part b is only meaningful for the n=2 case")
        if self.kind == "constcurv_2d_22_14" and self.n != 2:
            raise ValueError("constcurv_2d_22_14 requires n = 2")
        if self.kind == "scalar_23_1" and self.n != 1:
            raise ValueError("scalar_23_1 requires n = 1")

    def u_exprs(self):
        out = []
        for t in self.u:
            out.append(parse_expr(t, self.n) if isinstance(t, str) else t)
        return out

    def psi_expr(self):
        if self.psi is None:
            return None
        return parse_expr(self.psi, self.n) if isinstance(self.psi, str) else self.psi

    def to_dict(self):
        d = {"kind": self.kind, "n": self.n, "a": self.a}
        if self.kind in ("intermediate_17_19", "intermediate_potential_17_24"):
            d["m"] = self.m
        if self.b:
            d["b"] = self.b
        if self.epsilons:
            d["epsilons"] = list(self.epsilons)
        if self.u:
            d["u"] = [str(t) if isinstance(t, Expr) else t for t in self.u]
        if self.psi is not None:
            d["psi"] = str(self.psi)
        return d


def conformal_factor(n, epsilons):
    """f = 1/(2(n-1)) + sum_i eps_i (y^i)^2 / 2; df/dy^i = eps_i y^i."""
    f = const(1.0 / (2 * (n - 1)))
    for i in range(n):
        f = add(f, mul(const(0.5 * epsilons[i]), mul(coord(i + 1), coord(i + 1))))
    return f


def constcurv_metric(n, epsilons=None):
    """g = diag(eps)/f^2 on the conformally-euclidean chart."""
    eps = tuple(epsilons) if epsilons else tuple([1] * n)
    f = conformal_factor(n, eps)
    f2 = mul(f, f)
    arr = np.empty((n, n), dtype=object)
    arr[...] = ZERO
    for i in range(n):
        arr[i, i] = const(float(eps[i])) / f2
    return TensorField(n, 0, 2, arr), f


def _constcurv_connection(n, eps):
    """Gamma^k_rs = u_r d^k_s + u_s d^k_r - u^k g_rs with u^j = -f y^j."""
    f = conformal_factor(n, eps)
    arr = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for r in range(n):
            for s in range(n):
                e = ZERO
                if k == s:
                    e = sub(e, mul(const(float(eps[r])), coord(r + 1)))
                if k == r:
                    e = sub(e, mul(const(float(eps[s])), coord(s + 1)))
                if r == s:
                    e = add(e, mul(const(float(eps[r])), coord(k + 1)))
                arr[k, r, s] = e / f
    return Connection(n, arr)


def _intermediate_connection(n, m, u_exprs):
    if len(u_exprs) != m:
        raise ValueError(f"expected {m} covector components, got {len(u_exprs)}")
    for r, e in enumerate(u_exprs):
        if e.max_index > m:
            raise ValueError(
                f"u_{r + 1} references y{e.max_index}; the canonical covector may "
                f"depend on y1..y{m} only"
            )
    us = list(u_exprs) + [ZERO] * (n - m)
    arr = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for r in range(n):
            for s in range(n):
                e = ZERO
                if k == s:
                    e = sub(e, us[r])
                if k == r:
                    e = sub(e, us[s])
                arr[k, r, s] = e
    return Connection(n, arr)


def rotation_field(g, orientation=1.0):
    """The 90-degree rotation operator of a 2d metric:

    P^i_j = sum_s d^{is} g_sj / sqrt(|det g|), with d the skew unit matrix.
    """
    if g.n != 2 or g.valence != (0, 2):
        raise ValueError("rotation field is defined for a 2d metric")
    det = matrix_determinant(g.comps)
    sgn = float(np.sign(eval_many(det, np.array([[0.05, -0.07]]))[0]))
    root = func("sqrt", mul(const(sgn), det))
    d = ((0.0, 1.0), (-1.0, 0.0))
    arr = np.empty((2, 2), dtype=object)
    for i in range(2):
        for j in range(2):
            e = ZERO
            for s in range(2):
                if d[i][s]:
                    e = add(e, mul(const(d[i][s] * orientation), g.comps[s, j]))
            arr[i, j] = e / root
    return TensorField(2, 1, 1, arr)


def build_system(spec):
    """Assemble the DiffusionSystem of a canonical specification."""
    n, a = spec.n, spec.a
    kind = spec.kind
    if kind == "maximal_7_11":
        return DiffusionSystem(n, scalar_operator(n, a), Connection.zeros(n))
    if kind == "intermediate_17_19":
        conn = _intermediate_connection(n, spec.m, spec.u_exprs())
        return DiffusionSystem(n, scalar_operator(n, a), conn)
    if kind == "intermediate_potential_17_24":
        psi = spec.psi_expr()
        if psi is None:
            raise ValueError("intermediate_potential_17_24 needs a potential psi")
        if psi.max_index > spec.m:
            raise ValueError("psi may depend on y1..ym only")
        u = [diff_expr(psi, r + 1) for r in range(spec.m)]
        conn = _intermediate_connection(n, spec.m, u)
        return DiffusionSystem(n, scalar_operator(n, a), conn)
    if kind == "constcurv_22_13":
        conn = _constcurv_connection(n, spec.epsilons)
        return DiffusionSystem(n, scalar_operator(n, a), conn)
    if kind == "constcurv_2d_22_14":
        conn = _constcurv_connection(2, spec.epsilons)
        g, _ = constcurv_metric(2, spec.epsilons)
        A = scalar_operator(2, a) + rotation_field(g).scale(spec.b)
        return DiffusionSystem(2, A, conn)
    # scalar_23_1: the single equation; u (when given) holds the lone
    # connection coefficient
    gamma = spec.u_exprs()[0] if spec.u else ZERO
    arr = np.empty((1, 1, 1), dtype=object)
    arr[0, 0, 0] = gamma
    return DiffusionSystem(1, scalar_operator(1, a), Connection(1, arr))


# ---------------------------------------------------------------------------
# Connection deformations
# ---------------------------------------------------------------------------


def deformed_curvature(conn, T):
    """Curvature of Gamma + T through the deformation identity:

    Rbar^i_srk = R^i_srk + nabla_r T^i_ks - nabla_k T^i_rs
                 + sum_q ( T^q_ks T^i_rq - T^q_rs T^i_kq ),

    which must coincide with curvature(Gamma + T) computed directly.  T must
    be symmetric in its lower slots.
    """
    n = conn.n
    if T.valence != (1, 2):
        raise ValueError("deformation tensor must be (1,2)")
    if not T.is_symmetric():
        raise ValueError("deformation tensor must be symmetric in its lower slots")
    R = curvature(conn)
    nt = covariant_differential(conn, T)  # [i, deriv, k, s]
    out = np.empty((n, n, n, n), dtype=object)
    for i in range(n):
        for s in range(n):
            for r in range(n):
                for k in range(n):
                    e = R.comps[i, s, r, k]
                    e = add(e, nt.comps[i, r, k, s])
                    e = sub(e, nt.comps[i, k, r, s])
                    for q in range(n):
                        e = add(e, mul(T.comps[q, k, s], T.comps[i, r, q]))
                        e = sub(e, mul(T.comps[q, r, s], T.comps[i, k, q]))
                    out[i, s, r, k] = e
    return TensorField(n, 1, 3, out)


def deformation_from_covector(n, epsilons):
    """The flattening deformation of the constant-curvature connection:
    T^k_rs = -u_r d^k_s - u_s d^k_r + u^k g_rs with u^j = -f y^j."""
    eps = tuple(epsilons) if epsilons else tuple([1] * n)
    f = conformal_factor(n, eps)
    arr = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for r in range(n):
            for s in range(n):
                e = ZERO
                if k == s:
                    e = add(e, mul(const(float(eps[r])), coord(r + 1)))
                if k == r:
                    e = add(e, mul(const(float(eps[s])), coord(s + 1)))
                if r == s:
                    e = sub(e, mul(const(float(eps[r])), coord(k + 1)))
                arr[k, r, s] = e / f
    return TensorField(n, 1, 2, arr)


# ---------------------------------------------------------------------------
# Projective flattening
# ---------------------------------------------------------------------------


@dataclass
class FlattenResult:
    """Point samplers for the transported covector and the deformed
    connection, plus the residual report of the whole pipeline."""

    u: object
    flat_conn: object
    report: dict


def projective_flatten(conn, p0, u0, probe=None, fd_step=1e-4, precondition_tol=1e-7):
    """Deform a projectively-euclidean connection to a flat one.

    Checks the curvature structure and the symmetry of nabla(beta) first
    (beta extracted from the Ricci split), transports the covector equation
    from (p0, u0), and reports the max-norm curvature of the deformed
    connection Gamma + u (x) id + id (x) u estimated by central finite
    differences of the point sampler.  Every stage lands in the report; a
    failed precondition raises.
    """
    n = conn.n
    p0 = np.asarray(p0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    pre_structure = structure_residual(conn, "beta_14_1")
    nb = covariant_differential(conn, _beta_field(conn))
    pts = sample_points(n, 20)
    nbv = nb.evaluate_many(pts)
    pre_symmetry = max_report(nbv - nbv.transpose(0, 2, 1, 3), pts)
    report = {
        "precondition_structure": pre_structure,
        "precondition_nabla_beta": pre_symmetry,
    }
    if pre_structure.max_abs > precondition_tol or pre_symmetry.max_abs > precondition_tol:
        raise ValueError(
            "connection is not projectively-euclidean within tolerance: "
            f"structure {pre_structure.max_abs:.3e}, "
            f"nabla(beta) symmetry {pre_symmetry.max_abs:.3e}"
        )
    prob = named_system("covector_14", conn=conn, p0=p0, u0=u0)

    def u_sampler(y):
        y = np.asarray(y, dtype=float)
        if np.max(np.abs(y - p0)) < 1e-15:
            return u0.copy()
        return transport_to(prob, y)

    def flat_conn_sampler(y):
        gam = conn.evaluate_many(np.asarray(y, float)[None, :])[0]
        u = u_sampler(y)
        out = gam.copy()
        for k in range(n):
            for r in range(n):
                for s in range(n):
                    if k == s:
                        out[k, r, s] += u[r]
                    if k == r:
                        out[k, r, s] += u[s]
        return out

    if probe is None:
        probe = sample_points(n, 5, seed=11)
    worst = 0.0
    worst_pt = tuple(probe[0])
    for y in probe:
        rbar = _fd_curvature(flat_conn_sampler, y, n, fd_step)
        m = float(np.max(np.abs(rbar)))
        if m > worst:
            worst, worst_pt = m, tuple(y)
    report["flat_curvature"] = ResidualReport(worst, worst_pt)
    return FlattenResult(u=u_sampler, flat_conn=flat_conn_sampler, report=report)


def _beta_field(conn):
    from .pfaff import _beta_from_connection

    return TensorField(conn.n, 0, 2, _beta_from_connection(conn))


def _fd_curvature(sampler, y, n, h):
    """Curvature from central finite differences of a connection sampler."""
    center = sampler(y)
    dgam = np.empty((n, n, n, n))
    for d in range(n):
        yp = np.array(y, dtype=float)
        ym = np.array(y, dtype=float)
        yp[d] += h
        ym[d] -= h
        dgam[d] = (sampler(yp) - sampler(ym)) / (2 * h)
    R = np.empty((n, n, n, n))
    for i in range(n):
        for s in range(n):
            for r in range(n):
                for k in range(n):
                    val = dgam[r, i, k, s] - dgam[k, i, r, s]
                    acc = 0.0
                    for q in range(n):
                        acc += center[q, k, s] * center[i, r, q]
                        acc -= center[q, r, s] * center[i, k, q]
                    R[i, s, r, k] = val + acc
    return R
