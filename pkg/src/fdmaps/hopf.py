"""Discrete Hopf and Ahlfors-Hopf differentials and their holomorphy residual.

A critical point of the inverse distortion problems carries a holomorphic
Hopf differential; the residual of local anti-holomorphic content is the
numerical certificate that a minimiser has been reached.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .fields import DerivedField
from .functionals import truncated_exp
from .geometry import Mesh


@dataclass(frozen=True)
class HopfField:
    mesh: Mesh
    values: np.ndarray        # complex per triangle
    flagged: np.ndarray       # triangles with J <= 0
    chart: Optional[np.ndarray] = None  # per-triangle coordinates of the
                                        # differential's independent variable;
                                        # None means the mesh centroids

    @property
    def l1_norm(self) -> float:
        ok = ~self.flagged
        return float(np.sum(np.abs(self.values[ok]) * self.mesh.areas[ok]))

    def chart_points(self) -> np.ndarray:
        return self.mesh.centroids() if self.chart is None else self.chart


def hyperbolic_weight(z):
    """Poincare metric density 1/(1-|z|^2)^2 on the unit disk."""
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    if np.any(r2 >= 1.0):
        raise DomainError("hyperbolic weight requires |z| < 1")
    out = 1.0 / (1.0 - r2) ** 2
    return float(out) if out.ndim == 0 else out


def hopf_differential(derived: DerivedField, p: float) -> HopfField:
    """K^(p-1) h_w conj(h_wbar) per triangle."""
    flagged = derived.jac <= 0
    k = np.where(flagged, 1.0, derived.khs)
    values = k ** (p - 1.0) * derived.fz * np.conj(derived.fzbar)
    values = np.where(flagged, np.nan + 1j * np.nan, values)
    return HopfField(derived.mesh, values, flagged)


def ahlfors_hopf(derived: DerivedField, p: float, n_trunc: Optional[int],
                 weight: str = "none") -> HopfField:
    """Truncated-exponential Hopf differential S_N(p K) h_w conj(h_wbar) eta(h).

    n_trunc = None selects the full exponential form.  The hyperbolic
    weight is evaluated at the image of the element centroid and requires
    the image to stay inside the open unit disk.
    """
    flagged = derived.jac <= 0
    k = np.where(flagged, 0.0, derived.khs)
    if n_trunc is None:
        factor = np.exp(p * k)
    else:
        factor = truncated_exp(p * k, int(n_trunc))
    values = factor * derived.fz * np.conj(derived.fzbar)
    if weight == "hyperbolic":
        values = values * hyperbolic_weight(derived.f_centroid)
    elif weight != "none":
        raise DomainError(f"unknown weight {weight!r}")
    values = np.where(flagged, np.nan + 1j * np.nan, values)
    return HopfField(derived.mesh, values, flagged)


def inverse_ahlfors_hopf(derived: DerivedField, p: float, n_trunc: Optional[int],
                         weight: str = "none") -> HopfField:
    """Ahlfors-Hopf differential of the inverse of the given map.

    The critical-point certificate belongs to the inverse problem: if f
    minimises the forward energy, h = f^{-1} is critical for the inverse
    energy and its differential is holomorphic in the image chart.  With
    h_w = conj(f_z)/J and h_wbar = -f_zbar/J pulled back to the source
    triangles, the coefficient becomes -S_N(pK) conj(f_z f_zbar)/J^2,
    located at the image of each centroid.
    """
    flagged = derived.jac <= 0
    k = np.where(flagged, 0.0, derived.khs)
    if n_trunc is None:
        factor = np.exp(p * k)
    else:
        factor = truncated_exp(p * k, int(n_trunc))
    jac = np.where(flagged, 1.0, derived.jac)
    values = -factor * np.conj(derived.fz * derived.fzbar) / jac ** 2
    if weight == "hyperbolic":
        # the inverse map sends the image chart back to the source mesh
        values = values * hyperbolic_weight(derived.mesh.centroids())
    elif weight != "none":
        raise DomainError(f"unknown weight {weight!r}")
    values = np.where(flagged, np.nan + 1j * np.nan, values)
    return HopfField(derived.mesh, values, flagged, chart=derived.f_centroid)


@dataclass(frozen=True)
class HolomorphyResidual:
    l1_residual: float
    l2_residual: float
    skipped_vertices: int
    interior_area: float


def holomorphy_residual(field: HopfField) -> HolomorphyResidual:
    """Anti-holomorphic content by per-vertex affine fitting.

    For each interior vertex, fit c0 + c1 w + c2 conj(w) to the field over
    the centroids of the vertex star; |c2| is the local residual, and the
    aggregates are vertex-lumped-area weighted L^1 and L^2 sums.
    """
    mesh = field.mesh
    centroids = field.chart_points()
    boundary = mesh.is_boundary()
    stars = [[] for _ in range(mesh.n_nodes)]
    for t, tri in enumerate(mesh.triangles):
        for v in tri:
            stars[v].append(t)
    l1 = 0.0
    l2 = 0.0
    skipped = 0
    interior_area = 0.0
    for v in range(mesh.n_nodes):
        if boundary[v]:
            continue
        tris = stars[v]
        if len(tris) < 3:
            skipped += 1
            continue
        w = centroids[tris]
        vals = field.values[tris]
        if np.any(~np.isfinite(vals)):
            skipped += 1
            continue
        A = np.column_stack([np.ones_like(w), w, np.conj(w)])
        coeffs, *_ = np.linalg.lstsq(A, vals, rcond=None)
        c2 = abs(coeffs[2])
        lumped = float(np.sum(mesh.areas[tris]) / 3.0)
        interior_area += lumped
        l1 += lumped * c2
        l2 += lumped * c2 ** 2
    return HolomorphyResidual(l1, float(np.sqrt(l2)), skipped, interior_area)


def hopf_to_csv(field: HopfField, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tri_id", "re", "im", "area"])
        for t in range(field.mesh.n_triangles):
            writer.writerow([t, field.values[t].real, field.values[t].imag,
                             field.mesh.areas[t]])
