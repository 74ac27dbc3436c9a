"""Tensor-product spline complexes on the parametric box.

The four levels of the tensor complex (scalar potentials, curl-domain
triples, div-domain triples, densities) share three univariate spaces:
periodic in the first and third directions, open in the second.  All
coefficient-level differential operators are Kronecker products of
identities with the bidiagonal difference stencils; the vectorization
convention (first index fastest) is owned by :class:`VecIndexMap`.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .bsplines import SplineSpace, difference_matrix, make_uniform_open_knots

__all__ = [
    "wrap1",
    "VecIndexMap",
    "TensorComplex",
    "build_tensor_sequence",
    "LEVEL_PATTERNS",
]

# Component patterns per complex level; a 1 marks a direction carrying the
# derivative (degree-lowered) basis.
LEVEL_PATTERNS = {
    0: ((0, 0, 0),),
    1: ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    2: ((0, 1, 1), (1, 0, 1), (1, 1, 0)),
    3: ((1, 1, 1),),
}


def wrap1(i, n):
    """Wrap a 1-based index into 1..n (the ``n+1 = 1`` convention)."""
    return (i - 1) % n + 1


@dataclass(frozen=True)
class VecIndexMap:
    """1-based vectorization ``l = i + (j-1) n_r + (k-1) n_r n_s``.

    Single conversion authority between triple indices and flat indices;
    all wraparound conventions go through :func:`wrap1` or :meth:`wrap`.
    """

    nr: int
    ns: int
    nt: int

    @property
    def size(self):
        return self.nr * self.ns * self.nt

    def ravel(self, i, j, k):
        if not (1 <= i <= self.nr and 1 <= j <= self.ns and 1 <= k <= self.nt):
            raise IndexError(f"index ({i}, {j}, {k}) out of range {self}")
        return i + (j - 1) * self.nr + (k - 1) * self.nr * self.ns

    def unravel(self, flat):
        if not 1 <= flat <= self.size:
            raise IndexError(f"flat index {flat} out of range 1..{self.size}")
        q, i = divmod(flat - 1, self.nr)
        k, j = divmod(q, self.ns)
        return i + 1, j + 1, k + 1

    def wrap(self, i, j, k):
        """Ravel with periodic wraparound in the first and third indices."""
        return self.ravel(wrap1(i, self.nr), j, wrap1(k, self.nt))


class TensorComplex:
    """The four tensor-product spline levels over one triple of spaces.

    Parameters
    ----------
    space_r, space_s, space_t : SplineSpace
        Univariate factors; the first and third must be periodic, the
        second must not be.
    """

    def __init__(self, space_r, space_s, space_t):
        if not (space_r.periodic and space_t.periodic):
            raise ValueError("first and third directions must be periodic")
        if space_s.periodic:
            raise ValueError("second direction must be a plain open space")
        for name, sp in (("r", space_r), ("s", space_s), ("t", space_t)):
            if sp.degree < 2:
                raise ValueError(
                    f"direction {name}: degree >= 2 required, got {sp.degree}"
                )
        self.spaces = (space_r, space_s, space_t)
        self.nr, self.ns, self.nt = (sp.dim for sp in self.spaces)
        if self.nr < 3 or self.ns < 4 or self.nt < 3:
            raise ValueError(
                "size floors violated: need nr >= 3, ns >= 4, nt >= 3, got "
                f"({self.nr}, {self.ns}, {self.nt})"
            )
        self.index_map = VecIndexMap(self.nr, self.ns, self.nt)

    @property
    def dims(self):
        return self.nr, self.ns, self.nt

    @property
    def degrees(self):
        return tuple(sp.degree for sp in self.spaces)

    # --------------------------- dimensions ---------------------------------

    def component_shape(self, pattern):
        """(nr, ns or ns-1, nt) of one component; periodic derivative bases
        keep the periodic dimension."""
        return self.nr, self.ns - pattern[1], self.nt

    def component_dim(self, pattern):
        nr, ns, nt = self.component_shape(pattern)
        return nr * ns * nt

    def level_dim(self, level):
        return sum(self.component_dim(pat) for pat in LEVEL_PATTERNS[level])

    def level_slices(self, level):
        """Slices of the stacked coefficient vector, one per component."""
        out, start = [], 0
        for pat in LEVEL_PATTERNS[level]:
            stop = start + self.component_dim(pat)
            out.append(slice(start, stop))
            start = stop
        return out

    # ------------------------ basis evaluation ------------------------------

    def _direction_basis(self, axis, lowered, x):
        sp = self.spaces[axis]
        return sp.eval_deriv_space_basis(x) if lowered else sp.eval_basis(x)

    def eval_component_basis(self, pattern, point):
        """Dense vector of one component's tensor basis at (r, s, t)."""
        r, s, t = point
        br = self._direction_basis(0, pattern[0], r)
        bs = self._direction_basis(1, pattern[1], s)
        bt = self._direction_basis(2, pattern[2], t)
        return np.kron(bt, np.kron(bs, br))

    # --------------------- coefficient derivatives --------------------------

    def _eye(self, n):
        return sparse.identity(n, dtype=np.int64, format="csr")

    def derivative_r(self, s_count=None):
        """I x I x Delta_per acting along the first index."""
        s_count = self.ns if s_count is None else s_count
        delta = difference_matrix(self.nr, periodic=True)
        return sparse.kron(
            self._eye(self.nt), sparse.kron(self._eye(s_count), delta), format="csr"
        )

    def derivative_s(self):
        """I x Delta x I, lowering the open direction count by one."""
        delta = difference_matrix(self.ns, periodic=False)
        return sparse.kron(
            self._eye(self.nt), sparse.kron(delta, self._eye(self.nr)), format="csr"
        )

    def derivative_t(self, s_count=None):
        """Delta_per x I x I acting along the third index."""
        s_count = self.ns if s_count is None else s_count
        delta = difference_matrix(self.nt, periodic=True)
        return sparse.kron(
            delta, sparse.kron(self._eye(s_count), self._eye(self.nr)), format="csr"
        )

    def derivative_matrices(self):
        """The three coefficient-derivative matrices on level-0 input."""
        return self.derivative_r(), self.derivative_s(), self.derivative_t()

    def grad_matrix(self):
        """Stacked level-0 -> level-1 coefficient map (integer entries)."""
        dr, ds, dt = self.derivative_matrices()
        return sparse.vstack([dr, ds, dt], format="csr")

    def curl_matrix(self):
        """Block level-1 -> level-2 coefficient map (integer entries)."""
        ns1 = self.ns - 1
        dr, ds, dt = self.derivative_matrices()
        dr1 = self.derivative_r(ns1)
        dt1 = self.derivative_t(ns1)
        n_g1 = self.component_dim((1, 0, 0))
        n_g2 = self.component_dim((0, 1, 0))
        n_g3 = self.component_dim((0, 0, 1))

        def zeros(m, n):
            return sparse.csr_array((m, n), dtype=np.int64)

        row1 = [zeros(dt1.shape[0], n_g1), -dt1, ds]
        row2 = [dt, zeros(dt.shape[0], n_g2), -dr]
        row3 = [-ds, dr1, zeros(dr1.shape[0], n_g3)]
        return sparse.vstack(
            [sparse.hstack(r, format="csr") for r in (row1, row2, row3)],
            format="csr",
        )

    def div_matrix(self):
        """Block level-2 -> level-3 coefficient map (integer entries)."""
        ns1 = self.ns - 1
        return sparse.hstack(
            [self.derivative_r(ns1), self.derivative_s(), self.derivative_t(ns1)],
            format="csr",
        )

    # -------------------------- operator actions ----------------------------

    def apply_grad(self, coeffs):
        coeffs = self._check(coeffs, 0)
        return self.grad_matrix() @ coeffs

    def apply_curl(self, coeffs):
        coeffs = self._check(coeffs, 1)
        return self.curl_matrix() @ coeffs

    def apply_div(self, coeffs):
        coeffs = self._check(coeffs, 2)
        return self.div_matrix() @ coeffs

    def _check(self, coeffs, level):
        coeffs = np.asarray(coeffs, dtype=float)
        expected = self.level_dim(level)
        if coeffs.shape != (expected,):
            raise ValueError(
                f"level-{level} coefficients must have length {expected}, "
                f"got shape {coeffs.shape}"
            )
        return coeffs

    # ------------------------------ misc ------------------------------------

    def greville_points(self):
        """Level-0 Greville abscissae, one (r, s, t) row per flat index."""
        gr = self.spaces[0].greville()
        gs = self.spaces[1].greville()
        gt = self.spaces[2].greville()
        pts = np.empty((self.index_map.size, 3))
        for flat in range(1, self.index_map.size + 1):
            i, j, k = self.index_map.unravel(flat)
            pts[flat - 1] = (gr[i - 1], gs[j - 1], gt[k - 1])
        return pts


def build_tensor_sequence(degrees, dims, lengths=(1.0, 1.0, 1.0)):
    """Construct the tensor complex from degree and dimension triples.

    `dims` counts basis functions after the periodic reduction in the
    first and third directions; uniform open knot vectors are used, so the
    distinct-knot counts are ``n - p + 3`` (periodic) and ``n - p + 1``
    (open).
    """
    pr, ps, pt = degrees
    nr, ns, nt = dims
    if min(degrees) < 2:
        raise ValueError(f"degrees >= 2 required, got {degrees}")
    if nr < 3 or ns < 4 or nt < 3:
        raise ValueError(
            f"size floors violated: need dims >= (3, 4, 3), got {dims}"
        )
    R, S, T = lengths
    space_r = SplineSpace(make_uniform_open_knots(pr, nr - pr + 3, 0.0, R), periodic=True)
    space_s = SplineSpace(make_uniform_open_knots(ps, ns - ps + 1, 0.0, S))
    space_t = SplineSpace(make_uniform_open_knots(pt, nt - pt + 3, 0.0, T), periodic=True)
    return TensorComplex(space_r, space_s, space_t)
