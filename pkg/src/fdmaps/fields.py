"""Discrete mappings and their pointwise differential quantities.

A mapping is a complex value per mesh node; derivatives come from the
unique affine interpolant on each triangle, so every pointwise formula
(Wirtinger derivatives, Jacobian, distortions, Beltrami coefficient) is
exact per element.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, InternalError
from .geometry import Mesh


@dataclass(frozen=True)
class AnalyticMap:
    """Closed-form map with exact Wirtinger derivatives, for oracle use."""
    tag: str
    value: Callable[[np.ndarray], np.ndarray]
    fz: Callable[[np.ndarray], np.ndarray]
    fzbar: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MappingField:
    mesh: Mesh
    values: np.ndarray                     # complex per node
    analytic: Optional[AnalyticMap] = None

    def __post_init__(self):
        if len(self.values) != self.mesh.n_nodes:
            raise ConfigurationError("values length does not match node count")
        if not np.all(np.isfinite(self.values)):
            raise ConfigurationError("mapping values must be finite")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class DerivedField:
    mesh: Mesh
    fz: np.ndarray          # complex per triangle
    fzbar: np.ndarray
    jac: np.ndarray         # |fz|^2 - |fzbar|^2
    khs: np.ndarray         # 2(|fz|^2+|fzbar|^2)/J, inf where J <= 0
    kop: np.ndarray         # (|fz|+|fzbar|)^2/J, inf where J <= 0
    mu: np.ndarray          # fzbar/fz, nan marker where fz == 0
    mu_defined: np.ndarray  # bool per triangle
    f_centroid: np.ndarray  # image of the element centroid (affine => mean)

    @property
    def areas(self) -> np.ndarray:
        return self.mesh.areas


def derivative_coefficients(mesh: Mesh):
    """Per-triangle complex coefficients (a, b) with fz = sum a_i w_i, fzbar = sum b_i w_i.

    w_i are the three nodal values of the triangle.  Shapes (m, 3).
    """
    z = mesh.nodes[mesh.triangles]
    e1 = z[:, 1] - z[:, 0]
    e2 = z[:, 2] - z[:, 0]
    D = e1 * np.conj(e2) - e2 * np.conj(e1)  # = -4i * area
    if np.any(D == 0):
        raise InternalError("degenerate triangle in mesh")
    a = np.stack([(np.conj(e1) - np.conj(e2)) / D, np.conj(e2) / D, -np.conj(e1) / D], axis=1)
    b = np.stack([(e2 - e1) / D, -e2 / D, e1 / D], axis=1)
    return a, b


def derived_from_derivatives(mesh: Mesh, fz: np.ndarray, fzbar: np.ndarray,
                             f_centroid: np.ndarray | None = None) -> DerivedField:
    P = np.abs(fz) ** 2
    Q = np.abs(fzbar) ** 2
    jac = P - Q
    pos = jac > 0
    khs = np.where(pos, 2.0 * (P + Q) / np.where(pos, jac, 1.0), np.inf)
    kop = np.where(pos, (np.abs(fz) + np.abs(fzbar)) ** 2 / np.where(pos, jac, 1.0), np.inf)
    defined = fz != 0
    mu = np.where(defined, fzbar / np.where(defined, fz, 1.0), np.nan + 1j * np.nan)
    if f_centroid is None:
        f_centroid = np.full(mesh.n_triangles, np.nan + 0j)
    return DerivedField(mesh, fz, fzbar, jac, khs, kop, mu, defined, f_centroid)


def wirtinger_derivatives(mapping: MappingField) -> DerivedField:
    """Exact per-triangle f_z, f_zbar of the piecewise-affine interpolant."""
    mesh = mapping.mesh
    a, b = derivative_coefficients(mesh)
    w = mapping.values[mesh.triangles]
    fz = np.sum(a * w, axis=1)
    fzbar = np.sum(b * w, axis=1)
    return derived_from_derivatives(mesh, fz, fzbar, w.mean(axis=1))


@dataclass(frozen=True)
class DistortionReport:
    bad_count: int          # triangles with J <= 0
    bad_area: float
    ess_sup_k: float        # max operator distortion over J > 0
    mean_khs: float         # area-weighted over J > 0
    mean_jac: float         # area-weighted over all triangles
    finite_distortion: bool


def finite_distortion_report(derived: DerivedField) -> DistortionReport:
    pos = derived.jac > 0
    areas = derived.areas
    bad_area = float(np.sum(areas[~pos]))
    good_area = float(np.sum(areas[pos]))
    ess_sup = float(np.max(derived.kop[pos])) if np.any(pos) else np.inf
    mean_khs = float(np.sum(derived.khs[pos] * areas[pos]) / good_area) if good_area > 0 else np.inf
    mean_jac = float(np.sum(derived.jac * areas) / np.sum(areas))
    return DistortionReport(
        bad_count=int(np.sum(~pos)),
        bad_area=bad_area,
        ess_sup_k=ess_sup,
        mean_khs=mean_khs,
        mean_jac=mean_jac,
        finite_distortion=(bad_area == 0.0),
    )


def analytic_affine(a: complex, b: complex) -> AnalyticMap:
    a, b = complex(a), complex(b)
    return AnalyticMap(
        tag=f"affine({a},{b})",
        value=lambda z: a * z + b * np.conj(z),
        fz=lambda z: np.full_like(np.asarray(z, dtype=complex), a),
        fzbar=lambda z: np.full_like(np.asarray(z, dtype=complex), b),
    )


def analytic_radial_stretch(alpha: float) -> AnalyticMap:
    """z -> z|z|^(alpha-1); the standard closed-form finite-distortion example."""
    alpha = float(alpha)

    def value(z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        return z * np.where(r > 0, r ** (alpha - 1.0), 0.0)

    def fz(z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        return ((alpha + 1.0) / 2.0) * np.where(r > 0, r ** (alpha - 1.0), 0.0) + 0j

    def fzbar(z):
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        with np.errstate(invalid="ignore", divide="ignore"):
            phase = np.where(r > 0, z / np.where(r > 0, np.conj(z), 1.0), 0.0)
        return ((alpha - 1.0) / 2.0) * np.where(r > 0, r ** (alpha - 1.0), 0.0) * phase

    return AnalyticMap(tag=f"radial_stretch({alpha})", value=value, fz=fz, fzbar=fzbar)


def analytic_oscillation(j: int) -> AnalyticMap:
    """z -> z + sin(2 pi j x)/(2 pi j): bounded gradients, no strong W^{1,2} limit."""
    j = int(j)
    w = 2.0 * np.pi * j

    def value(z):
        z = np.asarray(z, dtype=complex)
        return z + np.sin(w * z.real) / w

    def fz(z):
        z = np.asarray(z, dtype=complex)
        return 1.0 + 0.5 * np.cos(w * z.real) + 0j

    def fzbar(z):
        z = np.asarray(z, dtype=complex)
        return 0.5 * np.cos(w * z.real) + 0j

    return AnalyticMap(tag=f"oscillation({j})", value=value, fz=fz, fzbar=fzbar)


_FORMULAS = {
    "affine": lambda params: analytic_affine(*params),
    "radial_stretch": lambda params: analytic_radial_stretch(*params),
    "oscillation": lambda params: analytic_oscillation(*params),
    "identity": lambda params: analytic_affine(1.0, 0.0),
}


def sample_analytic(mesh: Mesh, formula: str, *params) -> MappingField:
    """Nodal sampling of a closed-form map; the closed form rides along."""
    if formula not in _FORMULAS:
        raise ConfigurationError(f"unknown analytic formula tag {formula!r}")
    amap = _FORMULAS[formula](params)
    return MappingField(mesh, amap.value(mesh.nodes), analytic=amap)


def derived_to_csv(derived: DerivedField, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tri_id", "re_fz", "im_fz", "re_fzbar", "im_fzbar",
                         "J", "K_hs", "K_op", "re_mu", "im_mu", "area"])
        for t in range(derived.mesh.n_triangles):
            writer.writerow([
                t,
                derived.fz[t].real, derived.fz[t].imag,
                derived.fzbar[t].real, derived.fzbar[t].imag,
                derived.jac[t], derived.khs[t], derived.kop[t],
                derived.mu[t].real, derived.mu[t].imag,
                derived.areas[t],
            ])
