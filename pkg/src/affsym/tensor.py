"""Valence-(r,s) tensor fields with symbolic components.

Components are stored densely in numpy object arrays of Expr, upper indices
first.  Chart dimension stays small (desk scale), so products, contractions
and index permutations are plain loops over multi-indices; numeric work goes
through the compiled vectorized evaluators of the component expressions.

Differential forms are fully skew (0,r) fields.  The exterior derivative,
interior product and wedge carry explicit normalizations:

    (d w)(X_0..X_r)      has the 1/(r+1) prefactor,
    (i_c w)(X_1..X_{r-1}) = r * w(c, X_1, ...),
    (b ^ g)               = signed average of b (x) g over all permutations,

a convention under which the Cartan identity i_c d + d i_c = L_c holds
exactly and the vector-valued-form bracket in liefn closes.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .expr import (
    Expr,
    ZERO,
    ONE,
    add,
    const,
    diff_expr,
    eval_expr,
    eval_many,
    mul,
    parse_expr,
    sub,
    subst,
)
from .util import sample_points

__all__ = [
    "TensorField",
    "PointMap",
    "tensor_product",
    "contract",
    "permute_indices",
    "symmetrize",
    "alternate",
    "wedge",
    "exterior_derivative",
    "interior_product",
    "partial_differential",
    "pushforward",
    "sym_matrix_inverse",
    "matrix_determinant",
]


def _as_expr(v):
    return v if isinstance(v, Expr) else const(v)


class TensorField:
    """Dense valence-(r,s) tensor field on an n-dimensional chart.

    comps is an object ndarray of Expr with shape (n,)*(r+s); upper (contra-
    variant) axes come first.  Immutable by convention: operations return new
    fields.
    """

    def __init__(self, n, r, s, comps):
        self.n = int(n)
        self.r = int(r)
        self.s = int(s)
        arr = np.empty((n,) * (r + s), dtype=object) if not isinstance(comps, np.ndarray) else None
        if arr is not None:
            flat = list(np.asarray(comps, dtype=object).reshape(-1))
            if len(flat) != n ** (r + s):
                raise ValueError(
                    f"expected {n ** (r + s)} components for valence ({r},{s}), got {len(flat)}"
                )
            arr[...] = np.asarray([_as_expr(v) for v in flat], dtype=object).reshape(arr.shape)
            self.comps = arr
        else:
            if comps.shape != (n,) * (r + s):
                raise ValueError(f"component array shape {comps.shape} != {(n,) * (r + s)}")
            self.comps = comps

    @property
    def valence(self):
        return (self.r, self.s)

    @classmethod
    def zeros(cls, n, r, s):
        arr = np.empty((n,) * (r + s), dtype=object)
        arr[...] = ZERO
        return cls(n, r, s, arr)

    @classmethod
    def identity(cls, n):
        """Kronecker delta as a (1,1) field."""
        arr = np.empty((n, n), dtype=object)
        arr[...] = ZERO
        for i in range(n):
            arr[i, i] = ONE
        return cls(n, 1, 1, arr)

    @classmethod
    def scalar(cls, n, e):
        arr = np.empty((), dtype=object)
        arr[()] = _as_expr(e)
        return cls(n, 0, 0, arr)

    @classmethod
    def from_strings(cls, n, r, s, entries):
        arr = np.asarray(entries, dtype=object)
        flat = [parse_expr(t, n) if isinstance(t, str) else _as_expr(t) for t in arr.reshape(-1)]
        out = np.empty((n,) * (r + s), dtype=object)
        out[...] = np.asarray(flat, dtype=object).reshape(out.shape)
        return cls(n, r, s, out)

    def map(self, f):
        out = np.empty(self.comps.shape, dtype=object)
        for idx in np.ndindex(*self.comps.shape):
            out[idx] = f(self.comps[idx])
        return TensorField(self.n, self.r, self.s, out)

    def __add__(self, other):
        self._check_like(other)
        out = np.empty(self.comps.shape, dtype=object)
        for idx in np.ndindex(*self.comps.shape):
            out[idx] = add(self.comps[idx], other.comps[idx])
        return TensorField(self.n, self.r, self.s, out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c):
        ce = _as_expr(c)
        return self.map(lambda e: mul(ce, e))

    def _check_like(self, other):
        if (self.n, self.r, self.s) != (other.n, other.r, other.s):
            raise ValueError(
                f"valence/dimension mismatch: ({self.r},{self.s}) on n={self.n} vs "
                f"({other.r},{other.s}) on n={other.n}"
            )

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, point):
        """Checked pointwise evaluation -> float ndarray of shape (n,)*(r+s)."""
        out = np.empty(self.comps.shape, dtype=float)
        for idx in np.ndindex(*self.comps.shape):
            out[idx] = eval_expr(self.comps[idx], point)
        return out

    def evaluate_many(self, points):
        """Vectorized evaluation -> float ndarray of shape (P,) + (n,)*(r+s).

        All components share one subtree cache, so common factors across the
        component array are evaluated once.
        """
        from .expr import eval_many_shared

        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        idxs = list(np.ndindex(*self.comps.shape))
        flats = eval_many_shared([self.comps[i] for i in idxs], pts)
        out = np.empty((pts.shape[0],) + self.comps.shape, dtype=float)
        for idx, vals in zip(idxs, flats):
            out[(slice(None),) + idx] = vals
        return out

    # -- symmetry checks ----------------------------------------------------

    def is_skew(self, axes=None, pts=None, tol=1e-10):
        """Numeric check of full antisymmetry over the given axes (default:
        all covariant axes) at sample points."""
        axes = tuple(axes) if axes is not None else tuple(range(self.r, self.r + self.s))
        if len(axes) < 2:
            return True
        if pts is None:
            pts = sample_points(self.n, 8)
        vals = self.evaluate_many(pts)
        scale = max(1.0, float(np.max(np.abs(vals))))
        for perm in itertools.permutations(range(len(axes))):
            sign = _perm_sign(perm)
            moved = _permute_axes_array(vals, axes, perm)
            if not np.allclose(vals, sign * moved, atol=tol * scale, rtol=0.0):
                return False
        return True

    def is_symmetric(self, axes=None, pts=None, tol=1e-10):
        axes = tuple(axes) if axes is not None else tuple(range(self.r, self.r + self.s))
        if len(axes) < 2:
            return True
        if pts is None:
            pts = sample_points(self.n, 8)
        vals = self.evaluate_many(pts)
        scale = max(1.0, float(np.max(np.abs(vals))))
        for perm in itertools.permutations(range(len(axes))):
            moved = _permute_axes_array(vals, axes, perm)
            if not np.allclose(vals, moved, atol=tol * scale, rtol=0.0):
                return False
        return True

    def __repr__(self):
        return f"TensorField(n={self.n}, valence=({self.r},{self.s}))"


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _permute_axes_array(vals, axes, perm):
    """Reorder the listed axes of ``vals`` by ``perm`` (leading axes offset by 1
    for the sample-point axis)."""
    order = list(range(vals.ndim))
    src = [a + 1 for a in axes]
    for k, p in enumerate(perm):
        order[src[k]] = src[p]
    return vals.transpose(order)


# ---------------------------------------------------------------------------
# Algebraic operations
# ---------------------------------------------------------------------------


def tensor_product(a, b):
    """Tensor product; upper axes of both factors precede all lower axes."""
    if a.n != b.n:
        raise ValueError("tensor product across different chart dimensions")
    n = a.n
    r, s = a.r + b.r, a.s + b.s
    out = np.empty((n,) * (r + s), dtype=object)
    for ia in np.ndindex(*a.comps.shape):
        ea = a.comps[ia]
        for ib in np.ndindex(*b.comps.shape):
            iu = ia[: a.r] + ib[: b.r] + ia[a.r :] + ib[b.r :]
            out[iu] = mul(ea, b.comps[ib])
    return TensorField(n, r, s, out)


def contract(a, i_up, j_down):
    """Contract upper slot i_up (0-based in 0..r-1) with lower slot j_down."""
    if not (0 <= i_up < a.r and 0 <= j_down < a.s):
        raise ValueError(f"contraction slots ({i_up},{j_down}) out of range for valence {a.valence}")
    n = a.n
    ax1, ax2 = i_up, a.r + j_down
    out_shape = (n,) * (a.r + a.s - 2)
    out = np.empty(out_shape, dtype=object)
    for idx in np.ndindex(*out_shape):
        total = ZERO
        for k in range(n):
            full = list(idx)
            full.insert(ax1, k)
            full.insert(ax2, k)
            total = add(total, a.comps[tuple(full)])
        out[idx] = total
    return TensorField(n, a.r - 1, a.s - 1, out)


def permute_indices(a, upper_perm=None, lower_perm=None):
    """Reorder index slots; perms are given per block (upper, lower)."""
    up = list(upper_perm) if upper_perm is not None else list(range(a.r))
    lo = list(lower_perm) if lower_perm is not None else list(range(a.s))
    if sorted(up) != list(range(a.r)) or sorted(lo) != list(range(a.s)):
        raise ValueError("invalid permutation")
    # new slot k carries the old slot up[k] / lo[k]
    order = list(up) + [a.r + j for j in lo]
    return TensorField(a.n, a.r, a.s, a.comps.transpose(order))


def _sym_alt(a, axes, signed):
    axes = tuple(axes)
    k = len(axes)
    out = np.empty(a.comps.shape, dtype=object)
    scale = const(1.0 / math.factorial(k))
    for idx in np.ndindex(*a.comps.shape):
        total = ZERO
        for perm in itertools.permutations(range(k)):
            src = list(idx)
            for pos, p in enumerate(perm):
                src[axes[pos]] = idx[axes[p]]
            term = a.comps[tuple(src)]
            if signed and _perm_sign(perm) < 0:
                total = sub(total, term)
            else:
                total = add(total, term)
        out[idx] = mul(scale, total)
    return TensorField(a.n, a.r, a.s, out)


def symmetrize(a, axes=None):
    """Average over permutations of the given axes (default: all lower)."""
    if axes is None:
        axes = range(a.r, a.r + a.s)
    return _sym_alt(a, axes, signed=False)


def alternate(a, axes=None):
    """Signed average over permutations of the given axes (default: all lower)."""
    if axes is None:
        axes = range(a.r, a.r + a.s)
    return _sym_alt(a, axes, signed=True)


# ---------------------------------------------------------------------------
# Exterior calculus
# ---------------------------------------------------------------------------


def _require_form(omega, name, check):
    if omega.r != 0:
        raise ValueError(f"{name} expects a (0,r) field, got valence {omega.valence}")
    if check and not omega.is_skew():
        raise ValueError(f"{name}: input is not fully skew")


def wedge(beta, gamma, check=True):
    """Exterior product of a p-form and a q-form: alternation of beta (x) gamma."""
    _require_form(beta, "wedge", check)
    _require_form(gamma, "wedge", check)
    return alternate(tensor_product(beta, gamma))


def partial_differential(w):
    """Plain coordinate derivative: new first covariant slot k holds d/dy^k."""
    n = w.n
    out = np.empty((n,) * (w.r + w.s + 1), dtype=object)
    for idx in np.ndindex(*w.comps.shape):
        for k in range(n):
            pos = idx[: w.r] + (k,) + idx[w.r :]
            out[pos] = diff_expr(w.comps[idx], k + 1)
    return TensorField(n, w.r, w.s + 1, out)


def exterior_derivative(omega, check=True):
    """Exterior derivative with the 1/(r+1) normalization.

    (d w)_{j0..jr} = 1/(r+1) * sum_a (-1)^a  d w_{j0..^ja..jr} / dy^{ja};
    on scalars this is the gradient 1-form, and d(d(w)) = 0.
    """
    _require_form(omega, "exterior_derivative", check)
    n, p = omega.n, omega.s
    out = np.empty((n,) * (p + 1), dtype=object)
    scale = const(1.0 / (p + 1))
    for idx in np.ndindex(*out.shape):
        total = ZERO
        for a in range(p + 1):
            rest = idx[:a] + idx[a + 1 :]
            term = diff_expr(omega.comps[rest], idx[a] + 1)
            if a % 2 == 1:
                total = sub(total, term)
            else:
                total = add(total, term)
        out[idx] = mul(scale, total)
    return TensorField(n, 0, p + 1, out)


def interior_product(c, omega, check=True):
    """Substitution of the vector field c into the first slot, scaled by r:
    (i_c w)(X_1..X_{r-1}) = r * w(c, X_1, ..).  Requires r >= 1."""
    if omega.s == 0:
        raise ValueError("interior product of a 0-form is undefined")
    _require_form(omega, "interior_product", check)
    if c.valence != (1, 0):
        raise ValueError("interior product expects a (1,0) vector argument")
    n, p = omega.n, omega.s
    out = np.empty((n,) * (p - 1), dtype=object)
    rfac = const(float(p))
    for idx in np.ndindex(*out.shape):
        total = ZERO
        for k in range(n):
            total = add(total, mul(c.comps[(k,)], omega.comps[(k,) + idx]))
        out[idx] = mul(rfac, total)
    return TensorField(n, 0, p - 1, out)


# ---------------------------------------------------------------------------
# Symbolic linear algebra helpers (small n)
# ---------------------------------------------------------------------------


def matrix_determinant(m):
    """Determinant of a square object array of Expr by cofactor expansion."""
    k = m.shape[0]
    if k == 1:
        return m[0, 0]
    total = ZERO
    for j in range(k):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        term = mul(m[0, j], matrix_determinant(minor))
        total = add(total, term) if j % 2 == 0 else sub(total, term)
    return total


def sym_matrix_inverse(m):
    """Symbolic inverse via the adjugate; entries are Expr ratios."""
    from .expr import div as _div

    k = m.shape[0]
    det = matrix_determinant(m)
    out = np.empty((k, k), dtype=object)
    if k == 1:
        out[0, 0] = _div(ONE, m[0, 0])
        return out
    for i in range(k):
        for j in range(k):
            minor = np.delete(np.delete(m, j, axis=0), i, axis=1)
            cof = matrix_determinant(minor)
            if (i + j) % 2 == 1:
                cof = sub(ZERO, cof)
            out[i, j] = _div(cof, det)
    return out


# ---------------------------------------------------------------------------
# Point maps and transformation rules
# ---------------------------------------------------------------------------


class PointMap:
    """Coordinate change y -> ytilde on one chart, with optional inverse.

    forward holds n Exprs ytilde^i(y); inverse, when present, holds n Exprs
    y^i(ytilde).  Transformation of systems requires the inverse (symbolic
    inversion is not attempted).
    """

    def __init__(self, n, forward, inverse=None):
        self.n = int(n)
        self.forward = [_as_expr(e) for e in forward]
        self.inverse = [_as_expr(e) for e in inverse] if inverse is not None else None
        if len(self.forward) != n or (self.inverse is not None and len(self.inverse) != n):
            raise ValueError("component count does not match dimension")

    @classmethod
    def from_strings(cls, n, forward, inverse=None):
        fw = [parse_expr(t, n) for t in forward]
        inv = [parse_expr(t, n) for t in inverse] if inverse is not None else None
        return cls(n, fw, inv)

    @classmethod
    def identity(cls, n):
        from .expr import coord

        ids = [coord(i + 1) for i in range(n)]
        return cls(n, ids, list(ids))

    def require_inverse(self):
        if self.inverse is None:
            raise ValueError("this operation needs an explicit inverse map")

    def jac_forward(self):
        """T^i_j = d ytilde^i / dy^j, Exprs in y."""
        n = self.n
        T = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                T[i, j] = diff_expr(self.forward[i], j + 1)
        return T

    def jac_inverse(self):
        """S^i_j = d y^i / d ytilde^j, Exprs in ytilde."""
        self.require_inverse()
        n = self.n
        S = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                S[i, j] = diff_expr(self.inverse[i], j + 1)
        return S

    def apply(self, points):
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = np.stack([eval_many(e, pts) for e in self.forward], axis=-1)
        return out[0] if single else out

    def apply_inverse(self, points):
        self.require_inverse()
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = np.stack([eval_many(e, pts) for e in self.inverse], axis=-1)
        return out[0] if single else out

    def roundtrip_residual(self, pts=None):
        """max |forward(inverse(yt)) - yt| over sample points."""
        if pts is None:
            pts = sample_points(self.n, 20)
        back = self.apply(self.apply_inverse(pts))
        return float(np.max(np.abs(back - pts)))

    def substitute_inverse(self, e):
        """Compose an Expr in y with y = inverse(ytilde)."""
        self.require_inverse()
        return subst(e, {i + 1: self.inverse[i] for i in range(self.n)})


def pushforward(w, pmap):
    """Transform a tensor field by the (r,s) tensor rule, expressed in the
    new coordinates.  Upper slots contract with T = d(ytilde)/dy, lower slots
    with S = dy/d(ytilde)."""
    pmap.require_inverse()
    n = w.n
    T = pmap.jac_forward()
    Tbar = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            Tbar[i, j] = pmap.substitute_inverse(T[i, j])
    S = pmap.jac_inverse()
    wbar = w.map(pmap.substitute_inverse)
    out = np.empty(w.comps.shape, dtype=object)
    for idx in np.ndindex(*out.shape):
        total = ZERO
        for src in np.ndindex(*w.comps.shape):
            factor = wbar.comps[src]
            for a in range(w.r):
                factor = mul(factor, Tbar[idx[a], src[a]])
            for b in range(w.s):
                factor = mul(factor, S[src[w.r + b], idx[w.r + b]])
            total = add(total, factor)
        out[idx] = total
    return TensorField(n, w.r, w.s, out)
