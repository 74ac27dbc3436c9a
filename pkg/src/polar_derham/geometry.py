"""Polar geometry of the solid torus: maps, Jacobians, pushforwards.

The polar map F collapses the s = 0 face of the parameter box onto a
circle around the hole of the torus; the reduced-space geometry map G
reparametrizes the same solid with a control net that is smooth across
that polar curve.  Physical-space evaluation is always parametric: a
sample (r, s, t) is emitted together with its image, the map is never
inverted.
"""

from dataclasses import dataclass

import numpy as np

from .extraction import reduced_basis_values

__all__ = [
    "SingularityProximityError",
    "SplineMap",
    "build_polar_map",
    "build_geometry_g",
    "eval_map_and_jacobian",
    "pushforward_eval",
    "polar_smoothness_probe",
    "polar_basis_smoothness_probe",
    "SmoothnessProbeReport",
]


class SingularityProximityError(ValueError):
    """Raised when a field transform is requested too close to s = 0."""


# ============================== spline maps ==================================

class SplineMap:
    """R^3-valued spline over the level-0 tensor-product basis.

    Control points are flat in the vectorization order (first index
    fastest), one xyz row per basis function.
    """

    def __init__(self, tensor, control_points):
        control_points = np.asarray(control_points, dtype=float)
        n = tensor.index_map.size
        if control_points.shape != (n, 3):
            raise ValueError(
                f"control net must have shape ({n}, 3), got {control_points.shape}"
            )
        self.tensor = tensor
        self.control_points = control_points
        self._grid = control_points.reshape(tensor.nt, tensor.ns, tensor.nr, 3)

    def _check_point(self, point):
        r, s, t = point
        for x, sp, name in zip((r, s, t), self.tensor.spaces, "rst"):
            a, b = sp.interval
            if not sp.periodic and not a <= x <= b:
                raise ValueError(f"{name} = {x} outside [{a}, {b}]")
        return float(r), float(s), float(t)

    def eval(self, point):
        r, s, t = self._check_point(point)
        br = self.tensor.spaces[0].eval_basis(r)
        bs = self.tensor.spaces[1].eval_basis(s)
        bt = self.tensor.spaces[2].eval_basis(t)
        return np.einsum("r,s,t,tsrd->d", br, bs, bt, self._grid)

    def jacobian(self, point):
        """(xyz, DF, det DF); DF columns are the r, s, t partials."""
        r, s, t = self._check_point(point)
        br = self.tensor.spaces[0].eval_basis(r)
        bs = self.tensor.spaces[1].eval_basis(s)
        bt = self.tensor.spaces[2].eval_basis(t)
        dbr = self.tensor.spaces[0].eval_basis_derivative(r)
        dbs = self.tensor.spaces[1].eval_basis_derivative(s)
        dbt = self.tensor.spaces[2].eval_basis_derivative(t)
        xyz = np.einsum("r,s,t,tsrd->d", br, bs, bt, self._grid)
        jac = np.empty((3, 3))
        jac[:, 0] = np.einsum("r,s,t,tsrd->d", dbr, bs, bt, self._grid)
        jac[:, 1] = np.einsum("r,s,t,tsrd->d", br, dbs, bt, self._grid)
        jac[:, 2] = np.einsum("r,s,t,tsrd->d", br, bs, dbt, self._grid)
        return xyz, jac, float(np.linalg.det(jac))


def eval_map_and_jacobian(spline_map, point):
    return spline_map.jacobian(point)


# ============================== polar map F ==================================

@dataclass(frozen=True)
class PolarMapData:
    rho_bar: float
    rhos: np.ndarray
    thetas: np.ndarray
    phis: np.ndarray


class PolarMap(SplineMap):
    """The singular torus parametrization with its control-angle data."""

    def __init__(self, tensor, control_points, data):
        super().__init__(tensor, control_points)
        self.data = data

    @property
    def rho_bar(self):
        return self.data.rho_bar


def build_polar_map(tensor, rho_bar):
    """Control net of the polar map: circles of radius rho_j around the
    ring of major radius rho_bar, collapsing to the polar curve at j = 1."""
    if not rho_bar > 2:
        raise ValueError(f"major-radius offset must exceed 2, got {rho_bar}")
    nr, ns, nt = tensor.dims
    j = np.arange(1, ns + 1)
    i = np.arange(1, nr + 1)
    k = np.arange(1, nt + 1)
    rhos = (j - 1) / (ns - 1)
    thetas = (2 * np.pi + (1 - 2 * i) * np.pi / nr) % (2 * np.pi)
    phis = (2 * np.pi + (1 - 2 * k) * np.pi / nt) % (2 * np.pi)

    pts = np.empty((tensor.index_map.size, 3))
    for flat in range(1, tensor.index_map.size + 1):
        ii, jj, kk = tensor.index_map.unravel(flat)
        rad = rho_bar + rhos[jj - 1] * np.cos(thetas[ii - 1])
        pts[flat - 1] = (
            rad * np.cos(phis[kk - 1]),
            rad * np.sin(phis[kk - 1]),
            rhos[jj - 1] * np.sin(thetas[ii - 1]),
        )
    return PolarMap(
        tensor, pts, PolarMapData(float(rho_bar), rhos, thetas, phis)
    )


# ============================ geometry map G =================================

class GeometryMapG(SplineMap):
    """Smooth reparametrization over the reduced vertex basis.

    Three center control points per joint sit 120 degrees apart on a
    small circle in the meridian plane; the outer points coincide with
    the polar-map net.
    """

    def __init__(self, tensor, reduced_control_points, extraction):
        self.reduced_control_points = np.asarray(reduced_control_points, float)
        tensor_net = extraction.E000.T @ self.reduced_control_points
        super().__init__(tensor, tensor_net)


def build_geometry_g(tensor, extraction, polar_map):
    """Reduced control net of the smooth geometry map."""
    nr, ns, nt = tensor.dims
    c = extraction.counts
    data = polar_map.data
    rho2 = data.rhos[1]
    sqrt3 = np.sqrt(3.0)
    pts = np.empty((c.n0, 3))
    for k in range(1, nt + 1):
        phi = data.phis[k - 1]
        base = (k - 1) * c.nbar0
        pts[base + 0] = ((data.rho_bar + rho2) * np.cos(phi),
                         (data.rho_bar + rho2) * np.sin(phi), 0.0)
        pts[base + 1] = ((data.rho_bar - rho2 / 2) * np.cos(phi),
                         (data.rho_bar - rho2 / 2) * np.sin(phi), sqrt3 / 2 * rho2)
        pts[base + 2] = ((data.rho_bar - rho2 / 2) * np.cos(phi),
                         (data.rho_bar - rho2 / 2) * np.sin(phi), -sqrt3 / 2 * rho2)
        for jj in range(3, ns + 1):
            for ii in range(1, nr + 1):
                ell = 3 + ii + (jj - 3) * nr + base
                flat = tensor.index_map.ravel(ii, jj, k)
                pts[ell - 1] = polar_map.control_points[flat - 1]
    return GeometryMapG(tensor, pts, extraction)


# ============================= pushforwards ==================================

_LEVEL_DIM_ATTR = {0: "n0", 1: "n1", 2: "n2", 3: "n3"}


def pushforward_eval(polar_map, tensor, extraction, level, coeffs, point,
                     s_min_factor=1e-8):
    """Physical location and pushforward value of a reduced-space field.

    Levels transform as scalar, covector (DF^{-T}), vector density
    (DF / det) and density (1 / det); the latter three refuse points with
    s below ``s_min_factor * S``.  Everything is evaluated parametrically.
    """
    if level not in (0, 1, 2, 3):
        raise ValueError(f"level must be 0..3, got {level}")
    coeffs = np.asarray(coeffs, dtype=float)
    expected = getattr(extraction.counts, _LEVEL_DIM_ATTR[level])
    if coeffs.shape != (expected,):
        raise ValueError(
            f"level-{level} field needs {expected} coefficients, got {coeffs.shape}"
        )
    r, s, t = point
    S = tensor.spaces[1].interval[1]
    s_min = s_min_factor * S
    if level > 0 and s < s_min:
        raise SingularityProximityError(
            f"level-{level} pushforward undefined this close to the polar "
            f"curve: s = {s} < s_min = {s_min}"
        )
    values = reduced_basis_values(extraction, tensor, level, point)
    if level == 0:
        return polar_map.eval(point), float(coeffs @ values)
    param = coeffs @ values
    xyz, jac, det = polar_map.jacobian(point)
    if level == 1:
        return xyz, np.linalg.solve(jac.T, param)
    if level == 2:
        return xyz, jac @ param / det
    return xyz, float(param / det)


# =========================== smoothness probes ===============================

@dataclass
class SmoothnessProbeReport:
    """Discrepancy tables of the polar-curve regularity probe.

    ``value_discrepancy`` is the spread of the field over the collapsed
    s = 0 face (well-definedness); ``c1_table`` holds, per epsilon, the
    weighted first-difference estimate of the derivative mismatch across
    the polar curve, which must shrink at least linearly for a field
    whose pushforward is C1 there.
    """

    t: float
    r_samples: np.ndarray
    value_discrepancy: np.ndarray
    c1_table: list
    weights: np.ndarray

    def scalar(self):
        """Collapse to plain floats when a single field was probed."""
        disc = float(np.asarray(self.value_discrepancy).max())
        table = [(eps, float(np.asarray(d).max())) for eps, d in self.c1_table]
        return disc, table


def _probe_engine(value_fn, polar_map, tensor, t, eps_list, num_r):
    R = tensor.spaces[0].interval[1]
    S = tensor.spaces[1].interval[1]
    rs = np.linspace(0.0, R, num_r, endpoint=False) + 0.37 * R / num_r
    vals0 = np.stack([np.atleast_1d(value_fn((r, 0.0, t))) for r in rs])
    value_disc = vals0.max(axis=0) - vals0.min(axis=0)

    # Three approach directions in the meridian plane always admit a
    # nontrivial cancelling combination; for symmetric nets two of them
    # are antipodal and this reduces to the opposite-direction pair.
    r3 = (0.15 * R + np.array([0.0, R / 3.0, 2.0 * R / 3.0])) % R
    dirs = np.stack(
        [polar_map.jacobian((r, 0.0, t))[1][:, 1] for r in r3], axis=1
    )
    weights = np.linalg.svd(dirs)[2][-1]
    base = np.stack([np.atleast_1d(value_fn((r, 0.0, t))) for r in r3])
    table = []
    for eps in eps_list:
        vals = np.stack([np.atleast_1d(value_fn((r, eps * S, t))) for r in r3])
        delta = np.abs(weights @ (vals - base)) / eps
        table.append((float(eps), delta))
    return SmoothnessProbeReport(
        t=float(t),
        r_samples=rs,
        value_discrepancy=value_disc,
        c1_table=table,
        weights=weights,
    )


def polar_smoothness_probe(polar_map, tensor, extraction, coeffs, t, eps_list,
                           space="reduced", num_r=8):
    """Probe one scalar field for regularity at the polar curve.

    `space` selects the coefficient interpretation: "reduced" (the polar
    vertex basis) or "tensor" (raw tensor-product coefficients, the
    negative control, which is generically multivalued at s = 0).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if space == "reduced":
        if coeffs.shape != (extraction.counts.n0,):
            raise ValueError(
                f"expected {extraction.counts.n0} reduced coefficients"
            )
        tensor_coeffs = extraction.E000.T @ coeffs
    elif space == "tensor":
        if coeffs.shape != (tensor.index_map.size,):
            raise ValueError(
                f"expected {tensor.index_map.size} tensor coefficients"
            )
        tensor_coeffs = coeffs
    else:
        raise ValueError(f"unknown space {space!r}")

    def value(point):
        return tensor_coeffs @ tensor.eval_component_basis((0, 0, 0), point)

    return _probe_engine(value, polar_map, tensor, t, eps_list, num_r)


def polar_basis_smoothness_probe(polar_map, tensor, extraction, t, eps_list,
                                 space="reduced", num_r=8):
    """Probe every level-0 basis function at once.

    Returns a report whose discrepancy entries are vectors indexed by
    basis function (reduced basis, or the raw tensor basis for the
    negative control).
    """

    def values(point):
        b = tensor.eval_component_basis((0, 0, 0), point)
        return (extraction.E000 @ b) if space == "reduced" else b

    if space not in ("reduced", "tensor"):
        raise ValueError(f"unknown space {space!r}")
    return _probe_engine(values, polar_map, tensor, t, eps_list, num_r)
