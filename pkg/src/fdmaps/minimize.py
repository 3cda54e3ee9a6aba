"""Minimising sequences: projected gradient descent over nodal values.

Boundary values are held fixed, steps are accepted only if the energy
strictly decreases and every triangle keeps its Jacobian above a floor,
so iterates stay orientation-preserving all along the sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, DomainError, InitializationError
from .fields import MappingField, derivative_coefficients, wirtinger_derivatives
from .functionals import FunctionalSpec, _base, _base_prime, weight_values
from .geometry import Mesh

MIN_STEP = 1e-14


@dataclass(frozen=True)
class MinimizeConfig:
    max_iterations: int = 2000
    gradient_tolerance: float = 1e-8
    initial_step: float = 0.1
    backtracking_factor: float = 0.5
    jacobian_floor: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations <= 0 or self.gradient_tolerance <= 0 \
                or self.initial_step <= 0 or self.jacobian_floor <= 0:
            raise ConfigurationError("minimize config fields must be positive")
        if not (0.0 < self.backtracking_factor < 1.0):
            raise ConfigurationError("backtracking_factor must lie in (0, 1)")

    def to_json(self) -> dict:
        return {"max_iterations": self.max_iterations,
                "gradient_tolerance": self.gradient_tolerance,
                "initial_step": self.initial_step,
                "backtracking_factor": self.backtracking_factor,
                "jacobian_floor": self.jacobian_floor,
                "seed": self.seed}

    @staticmethod
    def from_json(doc: dict) -> "MinimizeConfig":
        base = MinimizeConfig()
        return MinimizeConfig(
            max_iterations=int(doc.get("max_iterations", base.max_iterations)),
            gradient_tolerance=float(doc.get("gradient_tolerance", base.gradient_tolerance)),
            initial_step=float(doc.get("initial_step", base.initial_step)),
            backtracking_factor=float(doc.get("backtracking_factor", base.backtracking_factor)),
            jacobian_floor=float(doc.get("jacobian_floor", base.jacobian_floor)),
            seed=int(doc.get("seed", base.seed)),
        )


@dataclass(frozen=True)
class BoundaryData:
    kind: str = "identity"                     # "identity" | "circle_diffeo" | "explicit"
    sin_coeffs: Sequence[float] = ()           # a_n for theta + sum a_n sin(n theta) + b_n cos
    cos_coeffs: Sequence[float] = ()
    explicit_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("identity", "circle_diffeo", "explicit"):
            raise ConfigurationError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "circle_diffeo":
            theta = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
            deriv = np.ones_like(theta)
            for n, a in enumerate(self.sin_coeffs, start=1):
                deriv += n * a * np.cos(n * theta)
            for n, b in enumerate(self.cos_coeffs, start=1):
                deriv -= n * b * np.sin(n * theta)
            if np.min(deriv) <= 0.0:
                raise ConfigurationError(
                    "circle_diffeo coefficients do not give a boundary homeomorphism")
        if self.kind == "explicit" and self.explicit_values is None:
            raise ConfigurationError("explicit boundary data requires values")

    def boundary_values(self, mesh: Mesh) -> np.ndarray:
        zb = mesh.nodes[mesh.boundary_nodes]
        if self.kind == "identity":
            return zb.copy()
        if self.kind == "circle_diffeo":
            theta = np.angle(zb)
            phi = theta.copy()
            for n, a in enumerate(self.sin_coeffs, start=1):
                phi += a * np.sin(n * theta)
            for n, b in enumerate(self.cos_coeffs, start=1):
                phi += b * np.cos(n * theta)
            return np.exp(1j * phi)
        values = np.asarray(self.explicit_values, dtype=complex)
        if len(values) != len(zb):
            raise ConfigurationError("explicit boundary values length mismatch")
        return values

    def to_json(self) -> dict:
        doc = {"kind": self.kind}
        if self.kind == "circle_diffeo":
            doc["sin_coeffs"] = list(self.sin_coeffs)
            doc["cos_coeffs"] = list(self.cos_coeffs)
        if self.kind == "explicit":
            doc["values"] = [[v.real, v.imag] for v in np.asarray(self.explicit_values)]
        return doc

    @staticmethod
    def from_json(doc: dict) -> "BoundaryData":
        kind = doc.get("kind", "identity")
        if kind == "explicit":
            vals = np.array([complex(x, y) for x, y in doc["values"]])
            return BoundaryData(kind="explicit", explicit_values=vals)
        return BoundaryData(kind=kind,
                            sin_coeffs=tuple(doc.get("sin_coeffs", ())),
                            cos_coeffs=tuple(doc.get("cos_coeffs", ())))


def stiffness_matrix(mesh: Mesh) -> sp.csr_matrix:
    """P1 Laplace stiffness: S_ij = integral grad phi_i . grad phi_j."""
    tri = mesh.triangles
    z = mesh.nodes[tri]
    areas = mesh.areas
    # grad of barycentric function i is perp of the opposite edge / (2A),
    # represented as a complex number
    g = np.stack([
        1j * (z[:, 2] - z[:, 1]),
        1j * (z[:, 0] - z[:, 2]),
        1j * (z[:, 1] - z[:, 0]),
    ], axis=1) / (2.0 * areas[:, None])
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            rows.append(tri[:, i])
            cols.append(tri[:, j])
            vals.append((g[:, i] * np.conj(g[:, j])).real * areas)
    S = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.n_nodes, mesh.n_nodes))
    return S.tocsr()


def harmonic_extension(mesh: Mesh, boundary: BoundaryData) -> MappingField:
    """Discrete harmonic extension of the boundary data (the feasible start)."""
    S = stiffness_matrix(mesh)
    bmask = mesh.is_boundary()
    interior = np.where(~bmask)[0]
    values = np.zeros(mesh.n_nodes, dtype=complex)
    values[mesh.boundary_nodes] = boundary.boundary_values(mesh)
    if len(interior):
        S_ii = S[interior][:, interior]
        rhs = -S[interior][:, mesh.boundary_nodes] @ values[mesh.boundary_nodes]
        lu = spla.splu(S_ii.tocsc())
        values[interior] = lu.solve(rhs.real) + 1j * lu.solve(rhs.imag)
    return MappingField(mesh, values)


def _phi_derivatives(spec: FunctionalSpec, P: np.ndarray, Q: np.ndarray):
    """(phi, d phi/dP, d phi/dQ) per triangle, all Jacobians assumed positive."""
    y = P - Q
    if spec.family == "dirichlet":
        if spec.norm == "hs":
            phi = 2.0 * (P + Q)
            dP = np.full_like(P, 2.0)
            dQ = np.full_like(P, 2.0)
        else:
            x = np.sqrt(P) + np.sqrt(Q)
            phi = x ** 2
            dP = 1.0 + np.sqrt(np.where(P > 0, Q / np.where(P > 0, P, 1.0), 0.0))
            dQ = 1.0 + np.sqrt(np.where(Q > 0, P / np.where(Q > 0, Q, 1.0), 0.0))
        if spec.jac_exp != 0.0:
            t = spec.jac_exp
            dP = dP * y ** t + phi * t * y ** (t - 1.0)
            dQ = dQ * y ** t - phi * t * y ** (t - 1.0)
            phi = phi * y ** t
        return phi, dP, dQ
    if spec.norm == "hs":
        x2 = 2.0 * (P + Q)
        dx2_dP = np.full_like(P, 2.0)
        dx2_dQ = np.full_like(P, 2.0)
    else:
        sP, sQ = np.sqrt(P), np.sqrt(Q)
        x2 = (sP + sQ) ** 2
        ratio_QP = np.where(P > 0, sQ / np.where(P > 0, sP, 1.0), 0.0)
        ratio_PQ = np.where(Q > 0, sP / np.where(Q > 0, sQ, 1.0), 0.0)
        dx2_dP = 1.0 + ratio_QP
        dx2_dQ = 1.0 + ratio_PQ
    k = x2 / y
    k_P = dx2_dP / y - x2 / y ** 2
    k_Q = dx2_dQ / y + x2 / y ** 2
    F = _base(spec, k)
    Fp = _base_prime(spec, k)
    t = spec.jac_exp
    if t == 0.0:
        return F, Fp * k_P, Fp * k_Q
    yt = y ** t
    phi = F * yt
    dP = Fp * k_P * yt + F * t * y ** (t - 1.0)
    dQ = Fp * k_Q * yt - F * t * y ** (t - 1.0)
    return phi, dP, dQ


def energy_gradient(spec: FunctionalSpec, mapping: MappingField,
                    jacobian_floor: float = 0.0) -> np.ndarray:
    """Exact gradient of the discrete energy wrt nodal values; zero on the boundary.

    Returned as complex numbers: grad_i = dE/du_i + i dE/dv_i for w_i = u_i + i v_i.
    """
    mesh = mapping.mesh
    a, b = derivative_coefficients(mesh)
    w = mapping.values[mesh.triangles]
    fz = np.sum(a * w, axis=1)
    fzbar = np.sum(b * w, axis=1)
    P = np.abs(fz) ** 2
    Q = np.abs(fzbar) ** 2
    jac = P - Q
    if np.any(jac <= jacobian_floor):
        worst = int(np.argmin(jac))
        raise DomainError(
            f"gradient undefined: triangle {worst} has J = {jac[worst]:.6e} "
            f"<= floor {jacobian_floor:.3e}")
    eta = weight_values(spec, mesh.centroids())
    _, dP, dQ = _phi_derivatives(spec, P, Q)
    scale = (eta * mesh.areas)
    # dE/d conj(w_i) summed over elements; real gradient is twice that
    per_node = (scale * dP)[:, None] * fz[:, None] * np.conj(a) \
        + (scale * dQ)[:, None] * fzbar[:, None] * np.conj(b)
    grad = np.zeros(mesh.n_nodes, dtype=complex)
    np.add.at(grad, mesh.triangles.ravel(), 2.0 * per_node.ravel())
    grad[mesh.boundary_nodes] = 0.0
    return grad


def _energy_and_minjac(spec: FunctionalSpec, mapping: MappingField):
    from .functionals import energy
    derived = wirtinger_derivatives(mapping)
    return energy(spec, derived), float(np.min(derived.jac))


@dataclass
class MinimizeResult:
    mapping: MappingField
    trace: List[dict] = field(default_factory=list)
    converged: bool = False
    stalled: bool = False

    @property
    def final_energy(self) -> float:
        return self.trace[-1]["energy"] if self.trace else np.inf


def minimize_energy(spec: FunctionalSpec, mesh: Mesh, boundary: BoundaryData,
                    config: MinimizeConfig,
                    initial: Optional[MappingField] = None) -> MinimizeResult:
    """Projected gradient descent with backtracking; the trace is strictly decreasing."""
    if initial is None:
        mapping = harmonic_extension(mesh, boundary)
    else:
        values = initial.values.copy()
        values[mesh.boundary_nodes] = boundary.boundary_values(mesh)
        mapping = MappingField(mesh, values)
    energy_val, min_jac = _energy_and_minjac(spec, mapping)
    if min_jac <= config.jacobian_floor or not np.isfinite(energy_val):
        raise InitializationError(
            f"initial map infeasible: min J = {min_jac:.3e}, energy = {energy_val}")

    result = MinimizeResult(mapping)
    step = config.initial_step
    for it in range(config.max_iterations):
        grad = energy_gradient(spec, mapping, jacobian_floor=0.0)
        grad_norm = float(np.linalg.norm(grad))
        result.trace.append({"iteration": it, "energy": energy_val,
                             "grad_norm": grad_norm, "min_J": min_jac, "step": step})
        if grad_norm < config.gradient_tolerance:
            result.converged = True
            break
        accepted = False
        while step >= MIN_STEP:
            trial = MappingField(mesh, mapping.values - step * grad)
            e_trial, mj_trial = _energy_and_minjac(spec, trial)
            if mj_trial >= config.jacobian_floor and e_trial < energy_val:
                mapping, energy_val, min_jac = trial, e_trial, mj_trial
                accepted = True
                step *= 2.0
                break
            step *= config.backtracking_factor
        if not accepted:
            result.stalled = True
            break
    if result.trace and result.trace[-1]["energy"] != energy_val:
        grad_norm = float(np.linalg.norm(energy_gradient(spec, mapping)))
        result.trace.append({"iteration": result.trace[-1]["iteration"] + 1,
                             "energy": energy_val, "grad_norm": grad_norm,
                             "min_J": min_jac, "step": step})
        result.converged = grad_norm < config.gradient_tolerance
    result.mapping = mapping
    return result


def prolong(mapping: MappingField, fine_mesh: Mesh) -> MappingField:
    """P1 interpolation of a coarse-mesh field onto its quadrisection."""
    nc = mapping.mesh.n_nodes
    if fine_mesh.n_nodes != nc + len(fine_mesh.parent_edges):
        raise ConfigurationError("fine mesh is not a refinement of the coarse mesh")
    values = np.empty(fine_mesh.n_nodes, dtype=complex)
    values[:nc] = mapping.values
    pe = fine_mesh.parent_edges
    values[nc:] = 0.5 * (mapping.values[pe[:, 0]] + mapping.values[pe[:, 1]])
    return MappingField(fine_mesh, values)


@dataclass(frozen=True)
class SweepEntry:
    trunc_n: int
    mapping: MappingField
    energy: float
    converged: bool
    stalled: bool


def truncation_sweep(p: float, n_list: Sequence[int], mesh: Mesh,
                     boundary: BoundaryData, config: MinimizeConfig,
                     jac_exp: float = 0.0, weight: str = "none") -> List[SweepEntry]:
    """Minimize the truncated-exponential family for each N, warm-starting in N."""
    if list(n_list) != sorted(set(int(n) for n in n_list)):
        raise ConfigurationError("N_list must be strictly increasing")
    entries: List[SweepEntry] = []
    warm: Optional[MappingField] = None
    for n in n_list:
        spec = FunctionalSpec(family="trunc_exp", p=p, trunc_n=int(n),
                              jac_exp=jac_exp, weight=weight)
        res = minimize_energy(spec, mesh, boundary, config, initial=warm)
        entries.append(SweepEntry(int(n), res.mapping, res.final_energy,
                                  res.converged, res.stalled))
        warm = res.mapping
    return entries
