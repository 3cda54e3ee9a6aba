"""Closed-form mapping sequences with known convergence behavior.

These are the ground-truth instances for the convergence diagnostics: an
oscillation family that converges weakly but not strongly, mollified and
drifting families that converge in C^1, and constant sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .convergence import SequenceHandle
from .errors import ConfigurationError
from .fields import (AnalyticMap, MappingField, analytic_affine,
                     analytic_oscillation, analytic_radial_stretch)
from .geometry import Mesh

KINDS = ("constant", "oscillation", "mollified", "affine_drift", "radial_stretch_family")


@dataclass(frozen=True)
class SequenceRecipe:
    kind: str
    params: Dict = field(default_factory=dict)
    j_max: int = 16

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown sequence kind {self.kind!r}")
        if self.j_max < 2:
            raise ConfigurationError("j_max must be >= 2")

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "j_max": self.j_max}

    @staticmethod
    def from_json(doc: dict) -> "SequenceRecipe":
        return SequenceRecipe(kind=doc["kind"], params=dict(doc.get("params", {})),
                              j_max=int(doc.get("j_max", 16)))


@dataclass(frozen=True)
class RadialStretchFacts:
    alpha: float
    khs: float       # constant Hilbert-Schmidt distortion (alpha^2+1)/alpha
    abs_mu: float    # constant |Beltrami| = |alpha-1|/(alpha+1)
    amap: AnalyticMap

    def fz_abs(self, z):
        return np.abs(self.amap.fz(z))

    def fzbar_abs(self, z):
        return np.abs(self.amap.fzbar(z))

    def jac(self, z):
        r = np.abs(np.asarray(z, dtype=complex))
        return self.alpha * r ** (2.0 * self.alpha - 2.0)


def radial_stretch_facts(alpha: float) -> RadialStretchFacts:
    if alpha <= 0:
        raise ConfigurationError("alpha must be positive")
    return RadialStretchFacts(
        alpha=float(alpha),
        khs=(alpha ** 2 + 1.0) / alpha,
        abs_mu=abs(alpha - 1.0) / (alpha + 1.0),
        amap=analytic_radial_stretch(alpha),
    )


def _bump_quadrature(delta: float, n: int = 16):
    """Tensor Gauss rule for the normalized polynomial bump on |u| < delta."""
    x, w = np.polynomial.legendre.leggauss(n)
    u = delta * x
    wu = delta * w
    U = u[:, None] + 1j * u[None, :]
    W = np.outer(wu, wu)
    r2 = np.abs(U) ** 2 / delta ** 2
    rho = np.where(r2 < 1.0, (1.0 - np.minimum(r2, 1.0)) ** 8, 0.0)
    weights = (W * rho).ravel()
    weights = weights / np.sum(weights)  # exact on constants, symmetric on affine
    return U.ravel(), weights


def mollify_values(amap: AnalyticMap, points: np.ndarray, delta: float) -> np.ndarray:
    """Convolution of the closed form with a polynomial bump of radius delta."""
    offsets, weights = _bump_quadrature(delta)
    pts = np.asarray(points, dtype=complex)
    vals = amap.value(pts.reshape(-1, 1) - offsets[None, :])
    return (vals @ weights).reshape(pts.shape)


def _target_map(params: Dict) -> AnalyticMap:
    tag = params.get("target", "radial_stretch")
    if tag == "radial_stretch":
        return analytic_radial_stretch(float(params.get("alpha", 2.0)))
    if tag == "affine":
        return analytic_affine(complex(*params.get("a", (1.0, 0.0))),
                               complex(*params.get("b", (0.0, 0.0))))
    raise ConfigurationError(f"unknown mollification target {tag!r}")


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def generate(recipe: SequenceRecipe, mesh: Mesh) -> SequenceHandle:
    """Sample every member and the analytic limit on the mesh."""
    js = range(1, recipe.j_max + 1)
    p = recipe.params
    metadata: Dict = {"recipe": recipe.to_json()}

    if recipe.kind == "constant":
        from .fields import sample_analytic
        tag = p.get("formula", "identity")
        args = tuple(p.get("args", ()))
        member = sample_analytic(mesh, tag, *args)
        members = [member for _ in js]
        limit = member
    elif recipe.kind == "oscillation":
        if mesh.kind != "rect":
            raise ConfigurationError("oscillation sequences are defined on rectangles")
        members = []
        for j in js:
            amap = analytic_oscillation(j)
            members.append(MappingField(mesh, amap.value(mesh.nodes), analytic=amap))
        ident = analytic_affine(1.0, 0.0)
        limit = MappingField(mesh, mesh.nodes.copy(), analytic=ident)
        area = mesh.total_area
        # per unit x-interval: int cos^2 = 1/2; members have
        # fz = 1 + cos/2, fzbar = cos/2 against the identity limit
        metadata.update({
            "fzbar_l2_gap": float(np.sqrt(area / 8.0)),
            "df_l2_gap": float(np.sqrt(area / 4.0)),
            "dirichlet_energy_tail": 2.5 * area,
            "dirichlet_energy_limit": 2.0 * area,
        })
    elif recipe.kind == "mollified":
        if mesh.kind != "disk" and p.get("target", "radial_stretch") == "radial_stretch":
            raise ConfigurationError("mollified radial stretches are defined on the disk")
        amap = _target_map(p)
        radius_scale = float(p.get("radius_scale", 1.0))
        members = [MappingField(mesh, mollify_values(amap, mesh.nodes, radius_scale / j))
                   for j in js]
        limit = MappingField(mesh, amap.value(mesh.nodes), analytic=None)
        metadata["convergence"] = "C1 on compact subsets away from the origin"
    elif recipe.kind == "affine_drift":
        a = _as_complex(p.get("a", 1.0))
        b = _as_complex(p.get("b", 0.0))
        da = _as_complex(p.get("da", 0.5))
        db = _as_complex(p.get("db", 0.0))
        members = []
        for j in js:
            amap = analytic_affine(a + da / j, b + db / j)
            members.append(MappingField(mesh, amap.value(mesh.nodes), analytic=amap))
        lim_map = analytic_affine(a, b)
        limit = MappingField(mesh, lim_map.value(mesh.nodes), analytic=lim_map)
    elif recipe.kind == "radial_stretch_family":
        if mesh.kind != "disk":
            raise ConfigurationError("radial stretch families are defined on the disk")
        alpha = float(p.get("alpha", 2.0))
        dalpha = float(p.get("dalpha", 1.0))
        members = []
        for j in js:
            amap = analytic_radial_stretch(alpha + dalpha / j)
            members.append(MappingField(mesh, amap.value(mesh.nodes), analytic=amap))
        lim_map = analytic_radial_stretch(alpha)
        limit = MappingField(mesh, lim_map.value(mesh.nodes), analytic=lim_map)
    else:  # pragma: no cover
        raise ConfigurationError(recipe.kind)

    return SequenceHandle(mesh=mesh, members=members, limit=limit, metadata=metadata)
