"""Incidence matrices of the polar control ring and the cohomology engine.

The reduced complex acts on degrees of freedom attached to the vertices,
edges, faces and volumes of a polygonal ring with n_t joints.  Three
matrices encode gradient, curl and divergence on those DOFs; their
entries are +/-1 except near the ring centers, where the barycentric
center block supplies the weights.  Everything here is transcribed from
the per-joint index loops with two wraparound conventions: poloidal
positions wrap modulo n_r, global indices wrap modulo the vector length.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .extraction import PolarCounts, ebar_block, polar_counts
from .tensor import wrap1

__all__ = [
    "IncidenceSet",
    "CohomologyReport",
    "build_d0",
    "build_d1",
    "build_d2",
    "build_incidence",
    "verify_commutation",
    "cohomology_dimensions",
    "divergence_preimage",
    "max_abs",
    "rank_with_gap",
]


class _Triplets:
    """1-based COO accumulator; duplicate entries sum."""

    def __init__(self, shape):
        self.shape = shape
        self.rows = []
        self.cols = []
        self.vals = []
        self.weighted_rows = set()

    def add(self, row, col, val, weighted=False):
        if not (1 <= row <= self.shape[0] and 1 <= col <= self.shape[1]):
            raise IndexError(f"entry ({row}, {col}) outside {self.shape}")
        self.rows.append(row - 1)
        self.cols.append(col - 1)
        self.vals.append(val)
        if weighted:
            self.weighted_rows.add(row - 1)

    def tocsr(self):
        mat = sparse.coo_array(
            (np.array(self.vals, dtype=float),
             (np.array(self.rows), np.array(self.cols))),
            shape=self.shape,
        ).tocsr()
        mat.sum_duplicates()
        return mat


# ============================ gradient: D0 ===================================

def build_d0(nr, ns, nt, ebar=None):
    """Vertex-to-edge incidence matrix (n1 x n0).

    Rows are edge DOFs of the control ring: per joint, two center edges,
    the first radial round weighted by the center block, the alternating
    poloidal/radial rounds of the outer rings, then one toroidal edge per
    vertex connecting to the next joint.
    """
    ebar = ebar_block(nr) if ebar is None else ebar
    c = polar_counts(nr, ns, nt)
    acc = _Triplets((c.n1, c.n0))

    def vertex(i, j, k):
        # 1-based flat index of ring-j (j >= 3) vertex at poloidal position i.
        return 3 + wrap1(i, nr) + (j - 3) * nr + (k - 1) * c.nbar0

    for k in range(1, nt + 1):
        bg = (k - 1) * (c.nbar0 + c.nbar1)
        bf = (k - 1) * c.nbar0

        acc.add(1 + bg, 2 + bf, 1.0)
        acc.add(1 + bg, 1 + bf, -1.0)
        acc.add(2 + bg, 3 + bf, 1.0)
        acc.add(2 + bg, 1 + bf, -1.0)

        for i in range(1, nr + 1):
            row = 2 + i + bg
            acc.add(row, 3 + i + bf, 1.0)
            col2 = ebar.col2(i)
            for ell in range(1, 4):
                acc.add(row, ell + bf, -col2[ell - 1], weighted=True)

        for j in range(3, ns):
            for i in range(1, nr + 1):
                row = 2 + i + (2 * j - 5) * nr + bg
                acc.add(row, vertex(i + 1, j, k), 1.0)
                acc.add(row, vertex(i, j, k), -1.0)
                row = 2 + i + (2 * j - 4) * nr + bg
                acc.add(row, 3 + i + (j - 2) * nr + bf, 1.0)
                acc.add(row, 3 + i + (j - 3) * nr + bf, -1.0)

        for i in range(1, nr + 1):
            row = 2 + i + (2 * ns - 5) * nr + bg
            acc.add(row, vertex(i + 1, ns, k), 1.0)
            acc.add(row, vertex(i, ns, k), -1.0)

        for i in range(1, c.nbar0 + 1):
            row = i + k * c.nbar1 + (k - 1) * c.nbar0
            acc.add(row, wrap1(i + k * c.nbar0, c.n0), 1.0)
            acc.add(row, i + bf, -1.0)

    return acc.tocsr(), acc.weighted_rows


# ============================== curl: D1 =====================================

def build_d1(nr, ns, nt, ebar=None):
    """Edge-to-face incidence matrix (n2 x n1).

    Generic rows combine the four edges framing a face; faces touching
    the center cylinders replace the missing edges by center-block
    combinations of the two center edges (joint faces) or the three
    toroidal center edges (side faces).
    """
    ebar = ebar_block(nr) if ebar is None else ebar
    c = polar_counts(nr, ns, nt)
    acc = _Triplets((c.n2, c.n1))

    for k in range(1, nt + 1):
        bj = (k - 1) * (c.nbar2 + c.nbar1)   # joint faces of joint k
        bs = k * c.nbar2 + (k - 1) * c.nbar1  # side faces k -> k+1
        bg = (k - 1) * (c.nbar0 + c.nbar1)   # in-joint edges of joint k
        bgn = k * (c.nbar0 + c.nbar1)        # in-joint edges of joint k+1
        bt = (k - 1) * c.nbar0 + k * c.nbar1  # toroidal edges of joint k

        def g(idx):
            return wrap1(idx, c.n1)

        # joint faces: first round, against the center edges
        for i in range(1, nr + 1):
            row = i + bj
            acc.add(row, g(2 + wrap1(i + 1, nr) + bg), 1.0)
            acc.add(row, g(2 + i + bg), -1.0)
            acc.add(row, g(2 + nr + i + bg), -1.0)
            d2 = ebar.delta2(i)
            for ell in (1, 2):
                acc.add(row, g(ell + bg), d2[ell], weighted=True)

        # joint faces: outer rounds
        for j in range(2, ns - 1):
            for i in range(1, nr + 1):
                row = i + (j - 1) * nr + bj
                acc.add(row, g(2 + wrap1(i + 1, nr) + 2 * (j - 1) * nr + bg), 1.0)
                acc.add(row, g(2 + i + 2 * (j - 1) * nr + bg), -1.0)
                acc.add(row, g(2 + i + (2 * j - 1) * nr + bg), -1.0)
                acc.add(row, g(2 + i + (2 * j - 3) * nr + bg), 1.0)

        # side faces: the two spanning the center cylinder
        acc.add(1 + bs, g(2 + bt), 1.0)
        acc.add(1 + bs, g(1 + bt), -1.0)
        acc.add(1 + bs, g(1 + bg), 1.0)
        acc.add(1 + bs, g(1 + bgn), -1.0)
        acc.add(2 + bs, g(3 + bt), 1.0)
        acc.add(2 + bs, g(1 + bt), -1.0)
        acc.add(2 + bs, g(2 + bg), 1.0)
        acc.add(2 + bs, g(2 + bgn), -1.0)

        # side faces: first radial round, against the toroidal center edges
        for i in range(1, nr + 1):
            row = 2 + i + bs
            acc.add(row, g(i + 2 + bgn), -1.0)
            acc.add(row, g(i + 2 + bg), 1.0)
            acc.add(row, g(i + 3 + bt), 1.0)
            col2 = ebar.col2(i)
            for ell in range(1, 4):
                acc.add(row, g(ell + bt), -col2[ell - 1], weighted=True)

        # side faces: outer rounds
        for j in range(3, ns):
            for i in range(1, nr + 1):
                row = 2 + i + (2 * j - 5) * nr + bs
                acc.add(row, g(i + 2 + (2 * j - 5) * nr + bgn), -1.0)
                acc.add(row, g(i + 2 + (2 * j - 5) * nr + bg), 1.0)
                acc.add(row, g(wrap1(i + 1, nr) + 3 + (j - 3) * nr + bt), 1.0)
                acc.add(row, g(i + 3 + (j - 3) * nr + bt), -1.0)
                row = 2 + i + (2 * j - 4) * nr + bs
                acc.add(row, g(i + 2 + (2 * j - 4) * nr + bgn), -1.0)
                acc.add(row, g(i + 2 + (2 * j - 4) * nr + bg), 1.0)
                acc.add(row, g(i + 3 + (j - 2) * nr + bt), 1.0)
                acc.add(row, g(i + 3 + (j - 3) * nr + bt), -1.0)

        for i in range(1, nr + 1):
            row = 2 + i + (2 * ns - 5) * nr + bs
            acc.add(row, g(i + 2 + (2 * ns - 5) * nr + bgn), -1.0)
            acc.add(row, g(i + 2 + (2 * ns - 5) * nr + bg), 1.0)
            acc.add(row, g(wrap1(i + 1, nr) + 3 + (ns - 3) * nr + bt), 1.0)
            acc.add(row, g(i + 3 + (ns - 3) * nr + bt), -1.0)

    return acc.tocsr(), acc.weighted_rows


# ============================ divergence: D2 =================================

def build_d2(nr, ns, nt, ebar=None):
    """Face-to-volume incidence matrix (n3 x n2).

    Generic rows combine the six faces enclosing a volume; volumes with a
    boundary face on a center cylinder use the center-block combination
    of the two cylinder faces instead.
    """
    ebar = ebar_block(nr) if ebar is None else ebar
    c = polar_counts(nr, ns, nt)
    acc = _Triplets((c.n3, c.n2))

    for k in range(1, nt + 1):
        bm = (k - 1) * c.nbar2
        bs = k * c.nbar2 + (k - 1) * c.nbar1   # side faces of joint k
        bj = (k - 1) * (c.nbar2 + c.nbar1)     # joint faces of joint k
        bjn = k * (c.nbar2 + c.nbar1)          # joint faces of joint k+1

        def h(idx):
            return wrap1(idx, c.n2)

        # first radial round of volumes
        for i in range(1, nr + 1):
            row = i + bm
            acc.add(row, h(2 + wrap1(i + 1, nr) + bs), 1.0)
            acc.add(row, h(2 + i + bs), -1.0)
            acc.add(row, h(2 + i + nr + bs), -1.0)
            d2 = ebar.delta2(i)
            for ell in (1, 2):
                acc.add(row, h(ell + bs), d2[ell], weighted=True)
            acc.add(row, h(i + bjn), 1.0)
            acc.add(row, h(i + bj), -1.0)

        # outer rounds of volumes
        for j in range(2, ns - 1):
            for i in range(1, nr + 1):
                row = i + (j - 1) * nr + bm
                acc.add(row, h(2 + wrap1(i + 1, nr) + (2 * j - 2) * nr + bs), 1.0)
                acc.add(row, h(2 + i + (2 * j - 2) * nr + bs), -1.0)
                acc.add(row, h(2 + i + (2 * j - 1) * nr + bs), -1.0)
                acc.add(row, h(2 + i + (2 * j - 3) * nr + bs), 1.0)
                acc.add(row, h(i + (j - 1) * nr + bjn), 1.0)
                acc.add(row, h(i + (j - 1) * nr + bj), -1.0)

    return acc.tocsr(), acc.weighted_rows


# ============================== assembly =====================================

@dataclass(frozen=True)
class IncidenceSet:
    """The three DOF-level differential operators of one polar complex."""

    counts: PolarCounts
    D0: sparse.csr_array
    D1: sparse.csr_array
    D2: sparse.csr_array
    # rows whose entries carry center-block weights rather than pure +/-1
    weighted_rows: dict = field(default_factory=dict)


def build_incidence(nr, ns, nt, ebar=None):
    ebar = ebar_block(nr) if ebar is None else ebar
    d0, w0 = build_d0(nr, ns, nt, ebar)
    d1, w1 = build_d1(nr, ns, nt, ebar)
    d2, w2 = build_d2(nr, ns, nt, ebar)
    return IncidenceSet(
        counts=polar_counts(nr, ns, nt),
        D0=d0,
        D1=d1,
        D2=d2,
        weighted_rows={"D0": sorted(w0), "D1": sorted(w1), "D2": sorted(w2)},
    )


def max_abs(matrix):
    """Largest absolute entry of a sparse matrix (0 for an empty one)."""
    if sparse.issparse(matrix):
        data = matrix.tocoo().data
        return float(np.abs(data).max()) if data.size else 0.0
    arr = np.asarray(matrix)
    return float(np.abs(arr).max()) if arr.size else 0.0


# ============================ commutation ====================================

def verify_commutation(tensor, extraction, incidence):
    """Max-abs residuals of the seven matrix commutation identities.

    Three gradient diagrams, three curl diagrams and the divergence
    diagram; all vanish identically up to roundoff in the center-block
    weights.
    """
    ns1 = tensor.ns - 1
    dr, ds, dt = tensor.derivative_matrices()
    dr1 = tensor.derivative_r(ns1)
    dt1 = tensor.derivative_t(ns1)
    e = extraction
    d0, d1, d2 = incidence.D0, incidence.D1, incidence.D2

    identities = {
        "grad_r": lambda: dr @ e.E000.T - e.E100.T @ d0,
        "grad_s": lambda: ds @ e.E000.T - e.E010.T @ d0,
        "grad_t": lambda: dt @ e.E000.T - e.E001.T @ d0,
        "curl_1": lambda: -dt1 @ e.E010.T + ds @ e.E001.T - e.E011.T @ d1,
        "curl_2": lambda: dt @ e.E100.T - dr @ e.E001.T - e.E101.T @ d1,
        "curl_3": lambda: -ds @ e.E100.T + dr1 @ e.E010.T - e.E110.T @ d1,
        "div": lambda: (dr1 @ e.E011.T + ds @ e.E101.T + dt1 @ e.E110.T
                        - e.E111.T.astype(float) @ d2),
    }
    residuals = {}
    for name, compute in identities.items():
        try:
            residuals[name] = max_abs(compute())
        except ValueError as exc:
            raise ValueError(
                f"commutation identity {name!r}: inconsistent matrix shapes "
                f"(construction bug): {exc}"
            ) from exc
    return residuals


# ============================ cohomology =====================================

@dataclass
class CohomologyReport:
    """Kernel-modulo-image dimensions of the reduced complex."""

    dims: tuple
    ranks: tuple
    gap_ratios: tuple
    sv_bracket: tuple
    euler_characteristic: int
    alternating_dim_sum: int
    warnings: list
    harmonic_one_form: np.ndarray | None = None

    @property
    def euler_ok(self):
        return self.euler_characteristic == self.alternating_dim_sum


def rank_with_gap(matrix, rank_tol=None):
    """Numerical rank by singular-value counting.

    Returns (rank, gap_ratio, (smallest kept, largest dropped)).  The
    default threshold is max(shape) * ulp * sigma_max; `rank_tol`
    overrides it with an absolute cutoff.
    """
    dense = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix, float)
    svals = np.linalg.svd(dense, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0, float("inf"), (0.0, 0.0)
    tol = rank_tol if rank_tol is not None else max(dense.shape) * np.finfo(float).eps * svals[0]
    rank = int((svals > tol).sum())
    kept = float(svals[rank - 1]) if rank > 0 else 0.0
    dropped = float(svals[rank]) if rank < svals.size else 0.0
    gap = kept / dropped if dropped > 0.0 else float("inf")
    return rank, gap, (kept, dropped)


def _null_space(matrix, rank_tol=None):
    dense = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix, float)
    u, svals, vt = np.linalg.svd(dense)
    tol = rank_tol if rank_tol is not None else max(dense.shape) * np.finfo(float).eps * (svals[0] if svals.size else 0.0)
    rank = int((svals > tol).sum())
    return vt[rank:].T


def cohomology_dimensions(incidence, rank_tol=None, harmonic=True):
    """Compute the cohomology dimensions of the reduced complex.

    h0 = dim ker D0, h1 = dim ker D1 - rank D0, h2 = dim ker D2 - rank D1,
    h3 = n3 - rank D2.  Ranks come from singular values; a gap ratio below
    1e3 at any rank decision is recorded as a warning, not a failure.
    A least-squares harmonic representative of h1 (kernel of D1 orthogonal
    to the image of D0) is attached as a non-normative diagnostic.
    """
    c = incidence.counts
    r0, g0, b0 = rank_with_gap(incidence.D0, rank_tol)
    r1, g1, b1 = rank_with_gap(incidence.D1, rank_tol)
    r2, g2, b2 = rank_with_gap(incidence.D2, rank_tol)
    dims = (c.n0 - r0, (c.n1 - r1) - r0, (c.n2 - r2) - r1, c.n3 - r2)
    warnings = []
    for name, gap in (("D0", g0), ("D1", g1), ("D2", g2)):
        if gap < 1e3:
            warnings.append(
                f"ill-conditioned rank gap for {name}: ratio {gap:.3e} < 1e3"
            )
    rep = None
    if harmonic and dims[1] > 0:
        kernel = _null_space(incidence.D1, rank_tol)
        if kernel.shape[1]:
            image_basis = np.linalg.svd(incidence.D0.toarray())[0][:, :r0]
            residual = kernel - image_basis @ (image_basis.T @ kernel)
            u, svals, _ = np.linalg.svd(residual)
            rep = u[:, 0] if svals.size and svals[0] > 0 else None
    euler = dims[0] - dims[1] + dims[2] - dims[3]
    return CohomologyReport(
        dims=dims,
        ranks=(r0, r1, r2),
        gap_ratios=(g0, g1, g2),
        sv_bracket=(b0, b1, b2),
        euler_characteristic=euler,
        alternating_dim_sum=c.alternating_sum,
        warnings=warnings,
        harmonic_one_form=rep,
    )


# ======================= divergence surjectivity =============================

def divergence_preimage(counts, m, beta=0.0):
    """Back-substitute a level-2 coefficient vector h with D2 @ h = m.

    The construction zeroes the poloidal side faces, accumulates the
    radial side faces ring by ring and sets every joint face to the free
    parameter beta.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (counts.n3,):
        raise ValueError(f"expected {counts.n3} volume DOFs, got shape {m.shape}")
    nr, ns, nt = counts.nr, counts.ns, counts.nt
    nbar1, nbar2 = counts.nbar1, counts.nbar2
    h = np.zeros(counts.n2)

    def set1(idx, value):
        h[idx - 1] = value

    def get1(idx):
        return h[idx - 1]

    for k in range(1, nt + 1):
        bs = k * nbar2 + (k - 1) * nbar1
        bj = (k - 1) * (nbar2 + nbar1)
        bm = (k - 1) * nbar2
        set1(1 + bs, 0.0)
        set1(2 + bs, 0.0)
        for i in range(1, nr + 1):
            set1(2 + i + bs, 0.0)
            set1(2 + i + nr + bs, -m[i + bm - 1])
        # Uniform in i: the poloidal round 2j-2 is zeroed and the radial
        # round 2j-1 accumulates; slot indices never leave the side block.
        for j in range(2, ns - 1):
            for i in range(1, nr + 1):
                set1(2 + i + (2 * j - 2) * nr + bs, 0.0)
                set1(
                    2 + i + (2 * j - 1) * nr + bs,
                    get1(2 + i + (2 * j - 3) * nr + bs) - m[i + (j - 1) * nr + bm - 1],
                )
        for ell in range(1, nbar2 + 1):
            set1(ell + bj, beta)
    return h
