"""Strong-vs-weak convergence diagnostics for sequences of discrete mappings.

Given a sequence with a designated limit on a common mesh, this module
measures energy convergence, weak convergence against a polynomial test
dictionary, lower semicontinuity, and the strong-convergence gaps of the
derivatives, Jacobians and Beltrami coefficients, and combines them into a
single verdict.

Closed-form sequence members carry exact derivative callables; integrals
for those use a high-order per-element quadrature so that oscillatory
members are resolved well below the mesh scale.  Plain nodal members fall
back to the exact per-element-constant (centroid) path.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .fields import DerivedField, MappingField, wirtinger_derivatives
from .functionals import (FunctionalSpec, convexity_probe,
                          monotone_truncation_check, phi_eval)
from .geometry import Mesh
from .quadrature import mesh_quad_points

ANALYTIC_QUAD_N = 8  # 64 points per triangle

VERDICTS = ("StrongConvergence", "EnergyGap", "WeakProbeFail",
            "JacobianDegenerate", "Inconclusive")


@dataclass
class SequenceHandle:
    mesh: Mesh
    members: List[MappingField]
    limit: MappingField
    eta_members: Optional[List[np.ndarray]] = None  # per-triangle weights
    eta_limit: Optional[np.ndarray] = None
    metadata: Dict = field(default_factory=dict)
    _derived_cache: Dict[int, DerivedField] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.members:
            raise ConfigurationError("sequence must be nonempty")
        for m in self.members + [self.limit]:
            if m.mesh is not self.mesh and m.mesh.n_nodes != self.mesh.n_nodes:
                raise ConfigurationError("all members must share the mesh")
        if self.eta_members is not None and len(self.eta_members) != len(self.members):
            raise ConfigurationError("eta_members length mismatch")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def all_analytic(self) -> bool:
        return (self.limit.analytic is not None
                and all(m.analytic is not None for m in self.members))

    def derived(self, index: int) -> DerivedField:
        """P1 derived field of member `index`; index -1 is the limit."""
        if index not in self._derived_cache:
            m = self.limit if index == -1 else self.members[index]
            self._derived_cache[index] = wirtinger_derivatives(m)
        return self._derived_cache[index]


def _quad(seq: SequenceHandle):
    n = ANALYTIC_QUAD_N if seq.all_analytic else 1
    pts, w = mesh_quad_points(seq.mesh, n)
    return pts, w


def _derivatives_at(seq: SequenceHandle, index: int, pts: np.ndarray):
    """(fz, fzbar) arrays of shape pts.shape for member/limit."""
    if seq.all_analytic:
        m = seq.limit if index == -1 else seq.members[index]
        return m.analytic.fz(pts), m.analytic.fzbar(pts)
    d = seq.derived(index)
    return d.fz[:, None], d.fzbar[:, None]


def _subdomain_mask(mesh: Mesh, subdomain) -> np.ndarray:
    if subdomain is None:
        return np.ones(mesh.n_triangles, dtype=bool)
    subdomain = np.asarray(subdomain)
    if subdomain.dtype == bool:
        mask = subdomain
    else:
        mask = np.zeros(mesh.n_triangles, dtype=bool)
        mask[subdomain] = True
    if not np.any(mask):
        raise DomainError("empty subdomain")
    return mask


QUANTITIES = ("df", "fz", "fzbar", "jac", "mu")


def _quantity_diff(quantity, fz_j, fzbar_j, fz_l, fzbar_l):
    """Pointwise |q_j - q_limit| and a validity mask."""
    if quantity == "df":
        d = np.sqrt(np.abs(fz_j - fz_l) ** 2 + np.abs(fzbar_j - fzbar_l) ** 2)
        return d, np.ones(d.shape, dtype=bool)
    if quantity == "fz":
        return np.abs(fz_j - fz_l), np.ones(fz_j.shape, dtype=bool)
    if quantity == "fzbar":
        return np.abs(fzbar_j - fzbar_l), np.ones(fz_j.shape, dtype=bool)
    if quantity == "jac":
        jj = np.abs(fz_j) ** 2 - np.abs(fzbar_j) ** 2
        jl = np.abs(fz_l) ** 2 - np.abs(fzbar_l) ** 2
        return np.abs(jj - jl), np.ones(jj.shape, dtype=bool)
    if quantity == "mu":
        ok = (fz_j != 0) & (fz_l != 0)
        mu_j = np.where(ok, fzbar_j / np.where(ok, fz_j, 1.0), 0.0)
        mu_l = np.where(ok, fzbar_l / np.where(ok, fz_l, 1.0), 0.0)
        return np.abs(mu_j - mu_l), ok
    raise ConfigurationError(f"unknown quantity {quantity!r}")


def lr_gap(seq: SequenceHandle, quantity: str, r: float,
           subdomain=None) -> List[float]:
    """Discrete L^r distance of a derived quantity to the limit, per member."""
    if quantity not in QUANTITIES:
        raise ConfigurationError(f"quantity must be one of {QUANTITIES}")
    if r <= 0:
        raise ConfigurationError("r must be positive")
    if quantity == "jac" and r >= 1.0:
        warnings.warn("Jacobian convergence is only guaranteed for r < 1", stacklevel=2)
    mask = _subdomain_mask(seq.mesh, subdomain)
    pts, w = _quad(seq)
    pts, w = pts[mask], w[mask]
    fz_l, fzbar_l = _derivatives_at(seq, -1, pts)
    gaps = []
    for j in range(len(seq)):
        fz_j, fzbar_j = _derivatives_at(seq, j, pts)
        d, ok = _quantity_diff(quantity, fz_j, fzbar_j, fz_l, fzbar_l)
        gaps.append(float(np.sum(np.where(ok, d, 0.0) ** r * w) ** (1.0 / r)))
    return gaps


def quantity_scale(seq: SequenceHandle, quantity: str, r: float,
                   subdomain=None) -> float:
    """L^r size of the limit quantity, used to normalize gap tolerances."""
    mask = _subdomain_mask(seq.mesh, subdomain)
    pts, w = _quad(seq)
    pts, w = pts[mask], w[mask]
    fz_l, fzbar_l = _derivatives_at(seq, -1, pts)
    zero = np.zeros_like(fz_l)
    if quantity == "mu":
        # size of mu itself; comparing against a zero field would empty the
        # fz != 0 mask and floor the scale at nothing
        ok = np.broadcast_to(fz_l != 0, np.broadcast_shapes(fz_l.shape, pts.shape))
        d = np.zeros(ok.shape)
        np.divide(np.abs(fzbar_l), np.abs(fz_l), out=d, where=ok)
        d = np.broadcast_to(d, ok.shape)
    else:
        d, ok = _quantity_diff(quantity, fz_l, fzbar_l, zero, zero)
    return float(np.sum(np.where(ok, d, 0.0) ** r * w) ** (1.0 / r))


def _cutoff(mesh: Mesh, pts: np.ndarray) -> np.ndarray:
    if mesh.kind == "disk":
        return np.maximum(0.0, 1.0 - np.abs(pts) ** 2)
    x, y = pts.real, pts.imag
    x0, x1 = mesh.nodes.real.min(), mesh.nodes.real.max()
    y0, y1 = mesh.nodes.imag.min(), mesh.nodes.imag.max()
    return np.maximum(0.0, (x - x0) * (x1 - x) * (y - y0) * (y1 - y))


def weak_probe(seq: SequenceHandle, dictionary_degree: int = 6) -> List[float]:
    """Weak-convergence proxy against smooth polynomial test fields.

    For each member, the residual is the largest normalized pairing
    |integral (q_j - q_limit) phi| over the dictionary, for q in
    {f_z, f_zbar, J}.  Test fields are tensor Legendre polynomials up to
    the given degree times a boundary cutoff.
    """
    mesh = seq.mesh
    pts, w = _quad(seq)
    flat_pts = pts.ravel()
    cut = _cutoff(mesh, flat_pts)
    x0, x1 = mesh.nodes.real.min(), mesh.nodes.real.max()
    y0, y1 = mesh.nodes.imag.min(), mesh.nodes.imag.max()
    xi = 2.0 * (flat_pts.real - x0) / (x1 - x0) - 1.0
    psi = 2.0 * (flat_pts.imag - y0) / (y1 - y0) - 1.0
    Vx = np.polynomial.legendre.legvander(xi, dictionary_degree)
    Vy = np.polynomial.legendre.legvander(psi, dictionary_degree)
    wc = w.ravel() * cut
    norms = np.abs(Vx).T @ (np.abs(wc)[:, None] * np.abs(Vy))  # int |phi| per field
    norms = np.maximum(norms, 1e-300)

    fz_l, fzbar_l = _derivatives_at(seq, -1, pts)
    jac_l = np.abs(fz_l) ** 2 - np.abs(fzbar_l) ** 2

    def pairings(values):
        dd = (wc * values.ravel())
        M = Vx.T @ (dd[:, None] * Vy)
        return np.abs(M) / norms

    residuals = []
    for j in range(len(seq)):
        fz_j, fzbar_j = _derivatives_at(seq, j, pts)
        jac_j = np.abs(fz_j) ** 2 - np.abs(fzbar_j) ** 2
        res = 0.0
        for dv in (fz_j - fz_l, fzbar_j - fzbar_l, jac_j - jac_l):
            dv = np.broadcast_to(dv, pts.shape)
            res = max(res, float(np.max(pairings(dv.real))))
            if np.iscomplexobj(dv):
                res = max(res, float(np.max(pairings(dv.imag))))
        residuals.append(res)
    return residuals


def _member_energy(seq: SequenceHandle, index: int, spec: FunctionalSpec,
                   power: float = 1.0, eta: Optional[np.ndarray] = None,
                   subdomain=None) -> float:
    """Energy of one member with the sequence's integration scheme."""
    mask = _subdomain_mask(seq.mesh, subdomain)
    pts, w = _quad(seq)
    pts, w = pts[mask], w[mask]
    fz, fzbar = _derivatives_at(seq, index, pts)
    fz = np.broadcast_to(fz, pts.shape)
    fzbar = np.broadcast_to(fzbar, pts.shape)
    if spec.norm == "hs":
        x = np.sqrt(2.0 * (np.abs(fz) ** 2 + np.abs(fzbar) ** 2))
    else:
        x = np.abs(fz) + np.abs(fzbar)
    y = np.abs(fz) ** 2 - np.abs(fzbar) ** 2
    vals = phi_eval(spec, x, y)
    if power != 1.0:
        with np.errstate(over="ignore"):
            vals = vals ** power
    if spec.weight == "hyperbolic":
        r2 = np.abs(pts) ** 2
        vals = vals / np.maximum(1e-300, (1.0 - r2)) ** 2
    if eta is not None:
        vals = vals * np.broadcast_to(np.asarray(eta)[mask][:, None], pts.shape)
    contrib = vals * w
    if np.any(np.isinf(contrib)):
        return np.inf
    return float(np.sum(contrib))


def _eta(seq: SequenceHandle, index: int) -> Optional[np.ndarray]:
    if index == -1:
        return seq.eta_limit
    if seq.eta_members is None:
        return None
    return seq.eta_members[index]


@dataclass(frozen=True)
class LscResult:
    liminf_energy: float
    limit_energy: float
    holds: bool
    member_energies: List[float]
    limit_bad_area: float


def tail_slice(n: int) -> slice:
    """The tail half used as the finite-sequence liminf window."""
    return slice(n // 2, n)


def lsc_check(spec: FunctionalSpec, seq: SequenceHandle) -> LscResult:
    """Lower-semicontinuity measurement: limit energy vs tail-liminf of members."""
    d_lim = seq.derived(-1)
    bad_area = float(np.sum(seq.mesh.areas[d_lim.jac <= 0]))
    energies = [_member_energy(seq, j, spec, eta=_eta(seq, j)) for j in range(len(seq))]
    limit_energy = _member_energy(seq, -1, spec, eta=_eta(seq, -1))
    tail = energies[tail_slice(len(energies))]
    liminf = float(np.min(tail)) if tail else np.inf
    scale = max(1.0, abs(limit_energy)) if np.isfinite(limit_energy) else 1.0
    holds = bool(limit_energy <= liminf + 1e-8 * scale)
    return LscResult(liminf, limit_energy, holds, energies, bad_area)


@dataclass(frozen=True)
class GoodSet:
    indices: np.ndarray
    complement_area: float


def good_set(derived_limit: DerivedField, phi_limit: np.ndarray, eps: float) -> GoodSet:
    """Triangles where eps < J < 1/eps and the integrand stays below 1/eps."""
    if not (0.0 < eps < 1.0):
        raise ConfigurationError("eps must lie in (0, 1)")
    phi_limit = np.asarray(phi_limit, dtype=float)
    ok = (derived_limit.jac > eps) & (derived_limit.jac < 1.0 / eps) & (phi_limit < 1.0 / eps)
    comp = float(np.sum(derived_limit.areas[~ok]))
    return GoodSet(np.where(ok)[0], comp)


def sobolev_norm(mapping: MappingField, q: float = 2.0, subdomain=None) -> float:
    """Discrete W^{1,q} norm: node-lumped value part plus per-element |Df| part."""
    if q < 1:
        warnings.warn("q < 1 gives a quasi-norm", stacklevel=2)
    mesh = mapping.mesh
    mask = _subdomain_mask(mesh, subdomain)
    derived = wirtinger_derivatives(mapping)
    lumped = np.zeros(mesh.n_nodes)
    np.add.at(lumped, mesh.triangles[mask].ravel(),
              np.repeat(mesh.areas[mask] / 3.0, 3))
    value_part = float(np.sum(np.abs(mapping.values) ** q * lumped))
    dnorm = np.abs(derived.fz) + np.abs(derived.fzbar)
    deriv_part = float(np.sum(dnorm[mask] ** q * mesh.areas[mask]))
    return (value_part + deriv_part) ** (1.0 / q)


def orlicz_gauge(t: np.ndarray) -> np.ndarray:
    """The Orlicz function t^2 / log(e + t)."""
    t = np.asarray(t, dtype=float)
    return t ** 2 / np.log(np.e + t)


def orlicz_norm(mapping: MappingField, subdomain=None) -> float:
    """Luxemburg norm of |Df|: the lambda > 0 with int P(|Df|/lambda) = 1."""
    mesh = mapping.mesh
    mask = _subdomain_mask(mesh, subdomain)
    derived = wirtinger_derivatives(mapping)
    dnorm = (np.abs(derived.fz) + np.abs(derived.fzbar))[mask]
    areas = mesh.areas[mask]
    if np.max(dnorm, initial=0.0) == 0.0:
        return 0.0

    def integral(lam):
        return float(np.sum(orlicz_gauge(dnorm / lam) * areas))

    hi = float(np.max(dnorm) * np.sqrt(np.sum(areas)) + 1.0)
    while integral(hi) > 1.0:
        hi *= 2.0
    lo = hi
    while integral(lo) < 1.0:
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if integral(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if (hi - lo) <= 1e-10 * hi:
            break
    return 0.5 * (lo + hi)


def jacobian_area_identity(derived: DerivedField):
    """Integral of J over the disk against the target area pi."""
    if derived.mesh.kind != "disk":
        raise ConfigurationError("the area identity is asserted on the disk")
    return float(np.sum(derived.jac * derived.areas)), float(np.pi)


@dataclass(frozen=True)
class Tolerances:
    hypothesis_rel: float = 1e-3   # energy-convergence gap, relative to scale
    conclusion_rel: float = 1e-2   # strong-convergence tails, relative to scale
    weak_rel: float = 2e-2         # weak-probe last residual, relative to scale

    def to_json(self) -> dict:
        return {"hypothesis_rel": self.hypothesis_rel,
                "conclusion_rel": self.conclusion_rel,
                "weak_rel": self.weak_rel}


@dataclass
class ConvergenceReport:
    verdict: str
    energy_convergence: bool
    energy_gap: float                 # PhiConv gap at exponent p_RR
    phi_energy_gap: float             # plain-Phi energy gap (Lemma-1 scale)
    energy_series: List[float]
    limit_energy: float
    weak_probe_ok: bool
    weak_probe_residuals: List[float]
    jacobian_ok: bool
    jacobian_bad_fraction: float
    convexity_ok: bool
    monotonicity_ok: bool
    conclusion_gaps: Dict[str, dict]
    pointwise_proxy: Dict[str, dict]
    config: Dict

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ConfigurationError(f"invalid verdict {self.verdict!r}")

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "hypotheses": {
                "energy_convergence": self.energy_convergence,
                "energy_gap": self.energy_gap,
                "phi_energy_gap": self.phi_energy_gap,
                "weak_probe_ok": self.weak_probe_ok,
                "jacobian_ok": self.jacobian_ok,
                "jacobian_bad_fraction": self.jacobian_bad_fraction,
                "convexity_ok": self.convexity_ok,
                "monotonicity_ok": self.monotonicity_ok,
            },
            "energy_series": self.energy_series,
            "limit_energy": self.limit_energy,
            "weak_probe_residuals": self.weak_probe_residuals,
            "conclusions": self.conclusion_gaps,
            "pointwise_proxy": self.pointwise_proxy,
            "config": self.config,
        }


def gaps_to_csv(report: ConvergenceReport, path) -> None:
    """Gap-vs-j series for plotting."""
    names = sorted(report.conclusion_gaps)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "energy", "weak_residual"] + [f"gap_{n}" for n in names])
        for j in range(len(report.energy_series)):
            row = [j + 1, report.energy_series[j], report.weak_probe_residuals[j]]
            for n in names:
                row.append(report.conclusion_gaps[n]["series"][j])
            writer.writerow(row)


def _pointwise_proxy(seq: SequenceHandle, quantity: str) -> dict:
    """Median / 95th-percentile pointwise difference of the last member."""
    pts, w = _quad(seq)
    fz_l, fzbar_l = _derivatives_at(seq, -1, pts)
    fz_j, fzbar_j = _derivatives_at(seq, len(seq) - 1, pts)
    d, ok = _quantity_diff(quantity, fz_j, fzbar_j, fz_l, fzbar_l)
    vals = np.broadcast_to(d, pts.shape)[np.broadcast_to(ok, pts.shape)]
    return {"median": float(np.median(vals)),
            "p95": float(np.percentile(vals, 95.0))}


def radon_riesz_diagnose(spec: FunctionalSpec, seq: SequenceHandle,
                         p_RR: float, s: Optional[float] = None,
                         r_list: Optional[Dict[str, float]] = None,
                         tolerances: Tolerances = Tolerances(),
                         dictionary_degree: int = 6,
                         probe_samples: int = 20000,
                         subdomain=None) -> ConvergenceReport:
    """Hypothesis verification and conclusion measurement for the strong-
    convergence theorem, on one sequence with one functional family."""
    if p_RR <= 1.0:
        raise ConfigurationError("p_RR must exceed 1")
    if s is None:
        s = min(0.01, 0.5 * (1.0 - 1.0 / p_RR))
    if not (0.0 < s < 1.0 - 1.0 / p_RR):
        raise ConfigurationError(f"s must lie in (0, 1 - 1/p_RR), got {s}")
    if r_list is None:
        r_list = {"df": 1.5, "jac": 0.5, "mu": 1.0}
    if not isinstance(r_list, dict):
        raise ConfigurationError("r_list must map quantity names to exponents")
    for qname, r in r_list.items():
        if qname not in ("df", "jac", "mu", "fzbar", "fz"):
            raise ConfigurationError(f"unknown quantity {qname!r} in r_list")
        if not (isinstance(r, (int, float)) and r > 0):
            raise ConfigurationError(f"bad exponent for {qname!r}: {r}")

    # (a) structural conditions on the family: convexity of Phi and Phi*y^s,
    # monotone approach of the truncations to the exponential
    conv = convexity_probe(spec, s, probe_samples, seed=0)
    if spec.family == "trunc_exp":
        mono = monotone_truncation_check(spec.p, max(spec.trunc_n, 1), probe_samples, seed=0)
        monotonicity_ok = mono.ok
    elif spec.family == "exp_p":
        mono = monotone_truncation_check(spec.p, 20, probe_samples, seed=0)
        monotonicity_ok = mono.ok
    else:
        monotonicity_ok = True  # constant family sequence is trivially monotone

    # (b) weak-limit hypothesis
    residuals = weak_probe(seq, dictionary_degree)
    weak_scale = max(quantity_scale(seq, "df", 1.0, subdomain), 1e-12)
    weak_ok = bool(residuals[-1] <= tolerances.weak_rel * weak_scale
                   and residuals[-1] <= 0.5 * max(residuals))

    # (c) energy convergence of Phi^{p_RR} (weighted when eta fields present);
    # p enters every family as the rate, so the exponent substitutes directly,
    # except for the rate-free quadratic family where it acts as an outer power
    if spec.family == "dirichlet":
        rr_spec, rr_power = spec, p_RR
    else:
        rr_spec, rr_power = spec.with_(p=p_RR), 1.0
    series = [_member_energy(seq, j, rr_spec, power=rr_power,
                             eta=_eta(seq, j), subdomain=subdomain)
              for j in range(len(seq))]
    limit_energy = _member_energy(seq, -1, rr_spec, power=rr_power,
                                  eta=_eta(seq, -1), subdomain=subdomain)
    e_scale = max(1.0, abs(limit_energy)) if np.isfinite(limit_energy) else 1.0
    energy_gap = float(abs(series[-1] - limit_energy)) \
        if np.isfinite(limit_energy) and np.isfinite(series[-1]) else np.inf
    energy_ok = bool(energy_gap <= tolerances.hypothesis_rel * e_scale)

    phi_series_last = _member_energy(seq, len(seq) - 1, spec, power=1.0,
                                     eta=_eta(seq, len(seq) - 1), subdomain=subdomain)
    phi_limit = _member_energy(seq, -1, spec, power=1.0,
                               eta=_eta(seq, -1), subdomain=subdomain)
    phi_energy_gap = float(abs(phi_series_last - phi_limit)) \
        if np.isfinite(phi_limit) and np.isfinite(phi_series_last) else np.inf

    # (d) limit Jacobian positivity
    d_lim = seq.derived(-1)
    bad_fraction = float(np.sum(seq.mesh.areas[d_lim.jac <= 0]) / seq.mesh.total_area)
    jac_ok = bad_fraction == 0.0

    # (e) conclusion measurements
    conclusion_gaps: Dict[str, dict] = {}
    tails_ok = True
    phi_gap_series = _phi_lp_gap_series(seq, spec, p_RR, subdomain)
    phi_gap_scale = max(abs(limit_energy) ** (1.0 / p_RR), 1e-12) \
        if np.isfinite(limit_energy) else 1e-12
    conclusion_gaps["phi"] = _gap_record(phi_gap_series, p_RR, phi_gap_scale,
                                         tolerances.conclusion_rel)
    tails_ok &= conclusion_gaps["phi"]["ok"]
    for qname, r in r_list.items():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            series_q = lr_gap(seq, qname, r, subdomain)
            scale_q = max(quantity_scale(seq, qname, r, subdomain), 1e-12)
        conclusion_gaps[qname] = _gap_record(series_q, r, scale_q,
                                             tolerances.conclusion_rel)
        tails_ok &= conclusion_gaps[qname]["ok"]

    pointwise = {q: _pointwise_proxy(seq, q) for q in ("df", "jac", "mu")}

    if not energy_ok:
        verdict = "EnergyGap"
    elif not weak_ok:
        verdict = "WeakProbeFail"
    elif not jac_ok:
        verdict = "JacobianDegenerate"
    elif conv.ok and monotonicity_ok and tails_ok:
        verdict = "StrongConvergence"
    else:
        verdict = "Inconclusive"

    return ConvergenceReport(
        verdict=verdict,
        energy_convergence=energy_ok,
        energy_gap=energy_gap,
        phi_energy_gap=phi_energy_gap,
        energy_series=series,
        limit_energy=limit_energy,
        weak_probe_ok=weak_ok,
        weak_probe_residuals=residuals,
        jacobian_ok=jac_ok,
        jacobian_bad_fraction=bad_fraction,
        convexity_ok=conv.ok,
        monotonicity_ok=monotonicity_ok,
        conclusion_gaps=conclusion_gaps,
        pointwise_proxy=pointwise,
        config={"spec": spec.to_json(), "p_RR": p_RR, "s": s,
                "r_list": dict(r_list), "dictionary_degree": dictionary_degree,
                "tolerances": tolerances.to_json(), "n_members": len(seq)},
    )


def _gap_record(series: Sequence[float], r: float, scale: float, tol_rel: float) -> dict:
    tail = float(series[-1])
    return {"r": float(r), "series": [float(v) for v in series], "tail": tail,
            "scale": float(scale), "ok": bool(tail <= tol_rel * scale)}


def _phi_lp_gap_series(seq: SequenceHandle, spec: FunctionalSpec, p_RR: float,
                       subdomain) -> List[float]:
    """L^{p_RR} distance of the Phi-values to the limit's Phi-values."""
    mask = _subdomain_mask(seq.mesh, subdomain)
    pts, w = _quad(seq)
    pts, w = pts[mask], w[mask]

    def phi_vals(index):
        fz, fzbar = _derivatives_at(seq, index, pts)
        fz = np.broadcast_to(fz, pts.shape)
        fzbar = np.broadcast_to(fzbar, pts.shape)
        x = df_norm_arrays(fz, fzbar, spec.norm)
        y = np.abs(fz) ** 2 - np.abs(fzbar) ** 2
        return phi_eval(spec, x, y)

    ref = phi_vals(-1)
    out = []
    for j in range(len(seq)):
        diff = np.abs(phi_vals(j) - ref)
        finite = np.isfinite(diff)
        if not np.all(finite):
            out.append(np.inf)
        else:
            out.append(float(np.sum(diff ** p_RR * w) ** (1.0 / p_RR)))
    return out


def df_norm_arrays(fz: np.ndarray, fzbar: np.ndarray, norm: str) -> np.ndarray:
    if norm == "hs":
        return np.sqrt(2.0 * (np.abs(fz) ** 2 + np.abs(fzbar) ** 2))
    return np.abs(fz) + np.abs(fzbar)
