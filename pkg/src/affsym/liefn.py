"""Lie derivatives, vector-field commutators, and the bracket of
vector-valued differential forms.

The bracket of a (1,p) and a (1,q) fully skew field is computed by expanding
both over the coordinate basis, B = sum_i e_i (x) beta_i, and applying the
decomposable-case formula termwise:

    {b (x) beta, c (x) gamma} = [b,c] (x) beta^gamma
                              - b (x) (L_c beta)^gamma
                              + c (x) beta^(L_b gamma)
                              + (-1)^p b (x) (i_c beta)^(d gamma)
                              + (-1)^p c (x) (d beta)^(i_b gamma).

With basis fields the commutator term drops and L_{e_i} is a plain partial
derivative, so the expansion reuses the exterior calculus of :mod:`tensor`
directly.  On a pair of vector fields the bracket degenerates to the ordinary
commutator, and {A,A}/2 of an operator field is its Nijenhuis tensor.
"""

from __future__ import annotations

import numpy as np

from .expr import Expr, ZERO, add, const, diff_expr, eval_many, mul, parse_expr, sub
from .tensor import TensorField, alternate, exterior_derivative, tensor_product

__all__ = [
    "VectorField",
    "as_vector_field",
    "vf_commutator",
    "lie_derivative",
    "fn_bracket",
    "nijenhuis",
    "nijenhuis_classical",
]


class VectorField:
    """Vector field on the chart, n Expr components."""

    def __init__(self, n, comps):
        self.n = int(n)
        self.comps = [c if isinstance(c, Expr) else const(c) for c in comps]
        if len(self.comps) != self.n:
            raise ValueError(f"expected {n} components, got {len(self.comps)}")

    @classmethod
    def from_strings(cls, n, texts):
        return cls(n, [parse_expr(t, n) for t in texts])

    @classmethod
    def basis(cls, n, i):
        """Coordinate field e_i (1-based)."""
        return cls(n, [1.0 if k == i - 1 else 0.0 for k in range(n)])

    def to_tensor(self):
        arr = np.empty((self.n,), dtype=object)
        arr[:] = self.comps
        return TensorField(self.n, 1, 0, arr)

    def evaluate(self, point):
        from .expr import eval_expr

        return np.array([eval_expr(c, point) for c in self.comps])

    def evaluate_many(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        return np.stack([eval_many(c, pts) for c in self.comps], axis=-1)

    def __repr__(self):
        return "VectorField(" + ", ".join(str(c) for c in self.comps) + ")"


def as_vector_field(obj, n=None):
    if isinstance(obj, VectorField):
        return obj
    if isinstance(obj, TensorField):
        if obj.valence != (1, 0):
            raise ValueError("expected a (1,0) field")
        return VectorField(obj.n, list(obj.comps))
    return VectorField(n, obj)


def vf_commutator(x, y):
    """[X,Y]^i = sum_k X^k d_k Y^i - Y^k d_k X^i."""
    if x.n != y.n:
        raise ValueError("commutator across different chart dimensions")
    n = x.n
    out = []
    for i in range(n):
        total = ZERO
        for k in range(n):
            total = add(total, mul(x.comps[k], diff_expr(y.comps[i], k + 1)))
            total = sub(total, mul(y.comps[k], diff_expr(x.comps[i], k + 1)))
        out.append(total)
    return VectorField(n, out)


def lie_derivative(eta, w):
    """Coordinate Lie derivative of a (r,s) tensor field along eta.

    Transport term plus -d(eta) contractions on upper slots and +d(eta)
    contractions on lower slots; on scalars it is the directional derivative.
    """
    eta = as_vector_field(eta)
    if isinstance(w, VectorField):
        return as_vector_field(lie_derivative(eta, w.to_tensor()))
    n = w.n
    out = np.empty(w.comps.shape, dtype=object)
    for idx in np.ndindex(*w.comps.shape):
        total = ZERO
        for k in range(n):
            total = add(total, mul(eta.comps[k], diff_expr(w.comps[idx], k + 1)))
        for a in range(w.r):
            for k in range(n):
                src = idx[:a] + (k,) + idx[a + 1 :]
                total = sub(total, mul(w.comps[src], diff_expr(eta.comps[idx[a]], k + 1)))
        for b in range(w.s):
            pos = w.r + b
            for k in range(n):
                src = idx[:pos] + (k,) + idx[pos + 1 :]
                total = add(total, mul(w.comps[src], diff_expr(eta.comps[k], idx[pos] + 1)))
        out[idx] = total
    return TensorField(n, w.r, w.s, out)


# ---------------------------------------------------------------------------
# Bracket of vector-valued forms
# ---------------------------------------------------------------------------


def _form_slice(field, i):
    """beta_i of the basis expansion: the (0,p) form with comps field[i, ...]."""
    n, p = field.n, field.s
    arr = np.empty((n,) * p, dtype=object)
    for idx in np.ndindex(*arr.shape):
        arr[idx] = field.comps[(i,) + idx]
    return TensorField(n, 0, p, arr)


def _partial_form(form, j):
    """L_{e_j} of a form: componentwise d/dy^j."""
    return form.map(lambda e: diff_expr(e, j + 1))


def _basis_interior(form, j):
    """i_{e_j} of a (0,p) form, p >= 1: comps p * form[j, ...]."""
    n, p = form.n, form.s
    out = np.empty((n,) * (p - 1), dtype=object)
    pfac = const(float(p))
    for idx in np.ndindex(*out.shape):
        out[idx] = mul(pfac, form.comps[(j,) + idx])
    return TensorField(n, 0, p - 1, out)


def _wedge_nc(a, b):
    return alternate(tensor_product(a, b))


def _accumulate(out, i, form):
    for idx in np.ndindex(*form.comps.shape):
        out[(i,) + idx] = add(out[(i,) + idx], form.comps[idx])


def _as_vector_valued(obj):
    if isinstance(obj, VectorField):
        return obj.to_tensor()
    return obj


def fn_bracket(b_field, c_field, check=True):
    """Bracket {B,C} of fully skew (1,p) and (1,q) fields -> (1,p+q).

    Vector fields (p=0 or q=0) are accepted; two vector fields reproduce
    their commutator.
    """
    B = _as_vector_valued(b_field)
    C = _as_vector_valued(c_field)
    if B.n != C.n:
        raise ValueError("bracket across different chart dimensions")
    if B.r != 1 or C.r != 1:
        raise ValueError("bracket expects (1,p) and (1,q) fields")
    n, p, q = B.n, B.s, C.s
    if check:
        if not B.is_skew():
            raise ValueError("first argument is not fully skew in covariant slots")
        if not C.is_skew():
            raise ValueError("second argument is not fully skew in covariant slots")
    sign = -1.0 if p % 2 else 1.0
    out = np.empty((n,) * (1 + p + q), dtype=object)
    out[...] = ZERO
    betas = [_form_slice(B, i) for i in range(n)]
    gammas = [_form_slice(C, j) for j in range(n)]
    dgammas = [exterior_derivative(g, check=False) for g in gammas]
    dbetas = [exterior_derivative(b, check=False) for b in betas]
    for i in range(n):
        beta = betas[i]
        for j in range(n):
            gamma = gammas[j]
            # [e_i, e_j] = 0: first term of the decomposable formula drops.
            t2 = _wedge_nc(_partial_form(beta, j), gamma)
            _accumulate(out, i, t2.scale(-1.0))
            t3 = _wedge_nc(beta, _partial_form(gamma, i))
            _accumulate(out, j, t3)
            if p >= 1:
                t4 = _wedge_nc(_basis_interior(beta, j), dgammas[j]).scale(sign)
                _accumulate(out, i, t4)
            if q >= 1:
                t5 = _wedge_nc(dbetas[i], _basis_interior(gamma, i)).scale(sign)
                _accumulate(out, j, t5)
    return TensorField(n, 1, p + q, out)


def nijenhuis(a_field, check=True):
    """Nijenhuis tensor of a (1,1) operator field.

    With the normalizations used here (1/(r+1) in d, factor r in the
    interior product, signed average for the wedge) the self-bracket {A,A}
    already equals the classical component formula N^k_ij; under the
    determinant wedge convention the same formula would carry the usual 1/2.
    The identity is pinned by nijenhuis_classical, an independent oracle.
    """
    return fn_bracket(a_field, a_field, check=check)


def lie_derivative_operator_power(eta, a_field, q, pts):
    """Numeric Lie-derivative residual of an integer power of an operator
    field: max |L_eta(A^q)| over the points.

    Negative powers invert pointwise (no symbolic matrix inversion); the
    derivative of the power comes from the product rule, with
    d(A^-1) = -A^-1 dA A^-1 feeding the negative branch.
    """
    if q == 0:
        return 0.0
    n = a_field.n
    pts = np.asarray(pts, dtype=float)
    A = a_field.evaluate_many(pts)
    dA = np.empty((len(pts), n, n, n))  # dA[:, k] = dA/dy^k
    for i in range(n):
        for j in range(n):
            for k in range(n):
                dA[:, k, i, j] = eval_many(diff_expr(a_field.comps[i, j], k + 1), pts)
    eta_vals = eta.evaluate_many(pts)
    deta = np.empty((len(pts), n, n))  # deta[:, i, k] = d eta^i / dy^k
    for i in range(n):
        for k in range(n):
            deta[:, i, k] = eval_many(diff_expr(eta.comps[i], k + 1), pts)
    base, dbase = A, dA
    if q < 0:
        base = np.linalg.inv(A)
        dbase = -np.einsum("pij,pkjl,plm->pkim", base, dA, base)
        q = -q
    # power and its derivative by the product rule
    powv = base.copy()
    dpow = dbase.copy()
    for _ in range(q - 1):
        dpow = np.einsum("pkij,pjl->pkil", dpow, base) + np.einsum(
            "pij,pkjl->pkil", powv, dbase
        )
        powv = powv @ base
    transport = np.einsum("pk,pkij->pij", eta_vals, dpow)
    lie = transport - np.einsum("pik,pkj->pij", deta, powv) + np.einsum(
        "pik,pkj->pij", powv, deta
    )
    return float(np.max(np.abs(lie)))


def nijenhuis_classical(a_field):
    """Independent component formula for the Nijenhuis tensor:

    N^k_ij = sum_s ( A^s_i d_s A^k_j - A^s_j d_s A^k_i
                     - A^k_s d_i A^s_j + A^k_s d_j A^s_i ).
    """
    A = a_field.comps
    n = a_field.n
    out = np.empty((n, n, n), dtype=object)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                total = ZERO
                for s in range(n):
                    total = add(total, mul(A[s, i], diff_expr(A[k, j], s + 1)))
                    total = sub(total, mul(A[s, j], diff_expr(A[k, i], s + 1)))
                    total = sub(total, mul(A[k, s], diff_expr(A[s, j], i + 1)))
                    total = add(total, mul(A[k, s], diff_expr(A[s, i], j + 1)))
                out[k, i, j] = total
    return TensorField(n, 1, 2, out)
