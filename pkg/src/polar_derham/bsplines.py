"""Univariate B-spline spaces on open knot vectors.

Provides the Cox-de Boor evaluation kernel, the derivative basis of a
spline space, the extraction matrices tying a C1 space into its
C1-periodic subspace, the bidiagonal coefficient-difference stencils and
the design-through-analysis (DTA) compatibility check used throughout
the polar construction.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

__all__ = [
    "KnotVector",
    "SplineSpace",
    "DerivativeBasis",
    "DtaDiagnostic",
    "make_uniform_open_knots",
    "difference_matrix",
    "periodic_h0",
    "periodic_h1",
    "eval_basis",
    "eval_spline",
    "eval_derivative",
    "is_dta_compatible",
]


# =============================== knot vectors ===============================

class KnotVector:
    """Open knot vector ``t_1 <= ... <= t_{n+p+1}`` of a degree-p basis.

    Parameters
    ----------
    degree : int
        Polynomial degree p >= 0.
    knots : array_like
        Non-decreasing knot sequence with the first and last p+1 entries
        repeated (open vector).
    """

    def __init__(self, degree, knots):
        if degree < 0:
            raise ValueError(f"degree must be non-negative, got {degree}")
        knots = np.ascontiguousarray(knots, dtype=float)
        if knots.ndim != 1:
            raise ValueError("knots must be a one-dimensional sequence")
        n = knots.size - degree - 1
        if n < degree + 1:
            raise ValueError(
                f"knot vector of length {knots.size} supports no degree-{degree} basis"
            )
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be non-decreasing")
        if knots[degree] != knots[0] or knots[-degree - 1] != knots[-1]:
            raise ValueError("knot vector must be open (boundary multiplicity p+1)")
        if knots[0] == knots[-1]:
            raise ValueError("knot vector spans an empty interval")
        self.degree = int(degree)
        self.knots = knots
        self.knots.setflags(write=False)

    @property
    def n(self):
        """Number of B-spline basis functions."""
        return self.knots.size - self.degree - 1

    @property
    def interval(self):
        return self.knots[0], self.knots[-1]

    def breakpoints(self):
        """Distinct knot values and their multiplicities."""
        values, counts = np.unique(self.knots, return_counts=True)
        return values, counts

    def smoothness(self):
        """Global smoothness class k: the space is C^k on the interval.

        Computed as p minus the largest interior knot multiplicity; a
        single-span vector (no interior knots) is reported as C^{p-1}.
        """
        _, counts = self.breakpoints()
        interior = counts[1:-1]
        max_mult = int(interior.max()) if interior.size else 1
        return self.degree - max_mult

    def find_span(self, t):
        """0-based index of the knot span containing t.

        Half-open spans ``[t_i, t_{i+1})``, closed at the right interval
        endpoint.
        """
        a, b = self.interval
        if t < a or t > b:
            raise ValueError(f"parameter {t} outside knot interval [{a}, {b}]")
        p, n = self.degree, self.n
        if t >= self.knots[n]:
            return n - 1
        span = int(np.searchsorted(self.knots, t, side="right")) - 1
        return min(max(span, p), n - 1)

    def eval_all(self, t):
        """Values of all n basis functions at t (dense vector)."""
        span = self.find_span(t)
        vals = _basis_funs(self.knots, self.degree, t, span)
        out = np.zeros(self.n)
        out[span - self.degree : span + 1] = vals
        return out

    def greville(self):
        """Knot-average abscissae (midpoints of the spans for p = 0)."""
        p, t = self.degree, self.knots
        if p == 0:
            return 0.5 * (t[:-1] + t[1:])
        return np.array([t[j + 1 : j + p + 1].mean() for j in range(self.n)])

    def __repr__(self):
        return f"KnotVector(degree={self.degree}, knots={self.knots.tolist()})"

    def __eq__(self, other):
        return (
            isinstance(other, KnotVector)
            and self.degree == other.degree
            and np.array_equal(self.knots, other.knots)
        )


def _basis_funs(knots, p, t, span):
    """Non-vanishing basis values at t (NURBS-book triangular scheme)."""
    left = np.empty(p)
    right = np.empty(p)
    vals = np.empty(p + 1)
    vals[0] = 1.0
    for j in range(1, p + 1):
        left[j - 1] = t - knots[span + 1 - j]
        right[j - 1] = knots[span + j] - t
        saved = 0.0
        for r in range(j):
            tmp = vals[r] / (right[r] + left[j - r - 1])
            vals[r] = saved + right[r] * tmp
            saved = left[j - r - 1] * tmp
        vals[j] = saved
    return vals


def make_uniform_open_knots(p, num_distinct, a, b):
    """Uniform open knot vector with `num_distinct` equally spaced values.

    Boundary values carry multiplicity p+1, interior values multiplicity 1.
    """
    if p < 0:
        raise ValueError(f"degree must be non-negative, got {p}")
    if num_distinct < 2:
        raise ValueError(f"need at least two distinct knots, got {num_distinct}")
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    values = np.linspace(a, b, num_distinct)
    knots = np.concatenate([np.full(p, a), values, np.full(p, b)])
    return KnotVector(p, knots)


# ========================== coefficient differences =========================

def difference_matrix(n, periodic):
    """Bidiagonal -1/+1 stencil mapping coefficients to derivative
    coefficients.

    `(n-1) x n` for an open space; the periodic variant appends the
    wraparound row ``(1, 0, ..., 0, -1)`` and is square of size n.
    """
    if n < 2:
        raise ValueError(f"difference stencil needs n >= 2, got {n}")
    rows, cols, vals = [], [], []
    for i in range(n - 1):
        rows += [i, i]
        cols += [i, i + 1]
        vals += [-1, 1]
    if periodic:
        rows += [n - 1, n - 1]
        cols += [0, n - 1]
        vals += [1, -1]
    shape = (n, n) if periodic else (n - 1, n)
    return sparse.coo_array(
        (np.array(vals, dtype=np.int64), (rows, cols)), shape=shape
    ).tocsr()


# =========================== derivative basis ===============================

@dataclass(frozen=True)
class DerivativeBasis:
    """Scaled degree-(p-1) basis spanning the derivatives of a spline space.

    The j-th function is ``p / (t_{j+p+1} - t_{j+1})`` times the j-th
    B-spline on the clipped knot vector ``(t_2, ..., t_{n+p})``.
    """

    parent: KnotVector
    hat_kv: KnotVector = field(init=False)
    scales: np.ndarray = field(init=False)

    def __post_init__(self):
        p, t = self.parent.degree, self.parent.knots
        if p < 1:
            raise ValueError("derivative basis needs degree >= 1")
        denom = t[p + 1 : -1] - t[1 : -p - 1]
        if np.any(denom <= 0):
            raise ValueError(
                "derivative basis requires interior knot multiplicity <= degree"
            )
        object.__setattr__(self, "hat_kv", KnotVector(p - 1, t[1:-1]))
        object.__setattr__(self, "scales", p / denom)
        self.scales.setflags(write=False)

    @property
    def n(self):
        return self.parent.n - 1

    def eval_all(self, t):
        """Values of the n-1 scaled derivative-space functions at t."""
        return self.scales * self.hat_kv.eval_all(t)


# ======================== C1-periodic extraction ============================

def _periodic_weights(kv):
    """The pair (c1, c2) splitting the two boundary functions."""
    p, t = kv.degree, kv.knots
    num = np.array([t[-1] - t[-p - 2], t[p + 1] - t[0]])
    return num / num.sum()


def periodic_h0(space):
    """Extraction matrix of the C1-periodic subspace, size (n-2) x n.

    Column block layout ``[c | I_{n-2} | c]`` with
    ``c = (c1, 0, ..., 0, c2)^T``; every column sums to 1.
    """
    kv = _as_knot_vector(space)
    n = kv.n
    if kv.smoothness() < 1:
        raise ValueError("C1-periodic subspace requires a C1 space")
    if n < 4:
        raise ValueError(f"C1-periodic subspace requires n >= 4, got n = {n}")
    c1, c2 = _periodic_weights(kv)
    rows = [0, n - 3] + list(range(n - 2)) + [0, n - 3]
    cols = [0, 0] + list(range(1, n - 1)) + [n - 1, n - 1]
    vals = [c1, c2] + [1.0] * (n - 2) + [c1, c2]
    return sparse.coo_array((vals, (rows, cols)), shape=(n - 2, n)).tocsr()


def periodic_h1(space):
    """Extraction matrix of the C0-periodic derivative basis, (n-2) x (n-1).

    Identity of size n-3 in the upper middle block; the last row carries
    c2 in the first column and c1 in the last.
    """
    kv = _as_knot_vector(space)
    n = kv.n
    if kv.smoothness() < 1:
        raise ValueError("C1-periodic subspace requires a C1 space")
    if n < 4:
        raise ValueError(f"C1-periodic subspace requires n >= 4, got n = {n}")
    c1, c2 = _periodic_weights(kv)
    rows = list(range(n - 3)) + [n - 3, n - 3]
    cols = list(range(1, n - 2)) + [0, n - 2]
    vals = [1.0] * (n - 3) + [c2, c1]
    return sparse.coo_array((vals, (rows, cols)), shape=(n - 2, n - 1)).tocsr()


def _as_knot_vector(space):
    if isinstance(space, KnotVector):
        return space
    return space.kv


# ============================= spline spaces ================================

class SplineSpace:
    """Degree-p spline space on an open knot vector, optionally restricted
    to its C1-periodic subspace.

    The periodic restriction ties value and first derivative at the two
    interval endpoints; its basis is ``H0 @ B`` with two fewer functions
    than the full space, and parameters are identified modulo the interval
    length before evaluation.
    """

    def __init__(self, kv, periodic=False):
        self.kv = kv
        self.periodic = bool(periodic)
        if self.periodic:
            if kv.smoothness() < 1:
                raise ValueError("periodic restriction requires a C1 space")
            if kv.n < 4:
                raise ValueError("periodic restriction requires n >= 4")
        self._h0 = periodic_h0(kv) if self.periodic else None
        self._h1 = periodic_h1(kv) if self.periodic else None
        self._deriv = None

    @property
    def degree(self):
        return self.kv.degree

    @property
    def smoothness_class(self):
        return self.kv.smoothness()

    @property
    def dim(self):
        return self.kv.n - 2 if self.periodic else self.kv.n

    @property
    def deriv_dim(self):
        """Dimension of the derivative space."""
        return self.kv.n - 2 if self.periodic else self.kv.n - 1

    @property
    def interval(self):
        return self.kv.interval

    @property
    def h0(self):
        return self._h0

    @property
    def h1(self):
        return self._h1

    @property
    def derivative_basis(self):
        if self._deriv is None:
            self._deriv = DerivativeBasis(self.kv)
        return self._deriv

    def _wrap(self, t):
        a, b = self.kv.interval
        if not self.periodic:
            return t
        return a + (t - a) % (b - a)

    def eval_basis(self, t):
        """Values of the dim(space) basis functions at t."""
        t = self._wrap(t)
        vals = self.kv.eval_all(t)
        if self.periodic:
            return self._h0 @ vals
        return vals

    def eval_deriv_space_basis(self, t):
        """Values of the functions spanning the derivative space at t.

        Length n-1 (open) or n-2 (periodic, extracted through H1).
        """
        t = self._wrap(t)
        vals = self.derivative_basis.eval_all(t)
        if self.periodic:
            return self._h1 @ vals
        return vals

    def eval_basis_derivative(self, t):
        """First derivatives of the dim(space) basis functions at t."""
        delta = difference_matrix(self.dim, self.periodic)
        return delta.T @ self.eval_deriv_space_basis(t)

    def eval(self, coeffs, t):
        coeffs = _check_coeffs(coeffs, self.dim)
        return float(self.eval_basis(t) @ coeffs)

    def eval_derivative(self, coeffs, t):
        """f'(t) through the derivative basis and the difference stencil."""
        coeffs = _check_coeffs(coeffs, self.dim)
        delta = difference_matrix(self.dim, self.periodic)
        return float(self.eval_deriv_space_basis(t) @ (delta @ coeffs))

    def greville(self):
        """Greville abscissae identifying the degrees of freedom.

        For the periodic restriction the two merged boundary functions are
        dropped and the interior knot averages are kept.
        """
        pts = self.kv.greville()
        if self.periodic:
            return pts[1:-1]
        return pts

    def __repr__(self):
        tag = ", periodic" if self.periodic else ""
        return f"SplineSpace(degree={self.degree}, dim={self.dim}{tag})"


def _check_coeffs(coeffs, dim):
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (dim,):
        raise ValueError(f"expected {dim} coefficients, got shape {coeffs.shape}")
    return coeffs


def eval_basis(space, t):
    return space.eval_basis(t)


def eval_spline(space, coeffs, t):
    return space.eval(coeffs, t)


def eval_derivative(space, coeffs, t):
    return space.eval_derivative(coeffs, t)


# ========================== DTA compatibility ===============================

@dataclass
class DtaDiagnostic:
    """Outcome of the design-through-analysis compatibility check."""

    ok: bool
    full_rank: bool
    columns_sum_to_one: bool
    nonnegative: bool
    rank: int
    min_entry: float
    max_column_sum_error: float
    max_row_support: int
    violation: str | None = None

    def __bool__(self):
        return self.ok


def is_dta_compatible(matrix, tol=1e-12):
    """Check full rank, unit column sums and non-negativity of `matrix`.

    Row support sizes are recorded in the diagnostic but DTA compatibility
    itself only constrains them through sparsity, not a hard bound.
    """
    M = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix, dtype=float)
    rank = int(np.linalg.matrix_rank(M))
    full_rank = rank == min(M.shape)
    col_err = float(np.abs(M.sum(axis=0) - 1.0).max())
    columns_ok = col_err <= tol
    min_entry = float(M.min())
    nonneg = min_entry >= -tol
    max_support = int((np.abs(M) > tol).sum(axis=1).max())
    violation = None
    if not full_rank:
        violation = f"rank deficient: rank {rank} < {min(M.shape)}"
    elif not columns_ok:
        violation = f"column sums deviate from 1 by {col_err:.3e}"
    elif not nonneg:
        violation = f"negative entry {min_entry:.3e}"
    return DtaDiagnostic(
        ok=full_rank and columns_ok and nonneg,
        full_rank=full_rank,
        columns_sum_to_one=columns_ok,
        nonnegative=nonneg,
        rank=rank,
        min_entry=min_entry,
        max_column_sum_error=col_err,
        max_row_support=max_support,
        violation=violation,
    )
