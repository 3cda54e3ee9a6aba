"""Distortion energy families and numeric oracles for their convexity structure.

Families, with k = x^2/y (x a norm of Df, y the Jacobian):
  lp_mean   -> k^p
  exp_p     -> exp(p k)
  trunc_exp -> sum_{n<=N} (p k)^n / n!
  dirichlet -> x^2 (ignores y)
The result is multiplied by y^jac_exp, which covers the inverse-problem
integrands carrying Jacobian factors.  y <= 0 yields an inf sentinel
(Dirichlet excepted) rather than an error: minimising sequences may
legitimately approach J = 0 and comparisons must stay total.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigurationError, DomainError
from .fields import DerivedField

FAMILIES = ("lp_mean", "exp_p", "trunc_exp", "dirichlet")


def default_s(p: float) -> float:
    """Condition-4 exponent: s in (0, 1 - 1/p), kept small."""
    if p > 1.0:
        return min(0.01, 0.5 * (1.0 - 1.0 / p))
    return 0.01


@dataclass(frozen=True)
class FunctionalSpec:
    family: str = "lp_mean"
    p: float = 1.0
    trunc_n: int = 0                 # truncation order for trunc_exp
    norm: str = "hs"                 # "hs" | "op"
    jac_exp: float = 0.0             # integrand multiplied by y^jac_exp
    weight: str = "none"             # "none" | "hyperbolic"
    s: Optional[float] = None        # condition-4 probe exponent

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}")
        if self.p <= 0:
            raise ConfigurationError("p must be positive")
        if self.trunc_n < 0:
            raise ConfigurationError("truncation order must be >= 0")
        if self.norm not in ("hs", "op"):
            raise ConfigurationError(f"unknown norm choice {self.norm!r}")
        if self.jac_exp < 0:
            raise ConfigurationError("jac_exp must be >= 0")
        if self.weight not in ("none", "hyperbolic"):
            raise ConfigurationError(f"unknown weight {self.weight!r}")
        if self.s is not None and not (0.0 < self.s < 1.0):
            raise ConfigurationError("s must lie in (0, 1)")

    @property
    def s_value(self) -> float:
        if self.s is not None:
            return self.s
        if self.family == "dirichlet":
            # the admissible range (0, 1 - 1/p) is empty at the quadratic
            # family's effective p = 1, so its weighted probe degenerates
            return 0.0
        return default_s(self.p)

    def with_(self, **kw) -> "FunctionalSpec":
        return replace(self, **kw)

    def to_json(self) -> dict:
        return {"family": self.family, "p": self.p, "N": self.trunc_n,
                "norm": self.norm, "jac_exp": self.jac_exp,
                "weight": self.weight, "s": self.s}

    @staticmethod
    def from_json(doc: dict) -> "FunctionalSpec":
        return FunctionalSpec(
            family=doc.get("family", "lp_mean"),
            p=float(doc.get("p", 1.0)),
            trunc_n=int(doc.get("N", 0)),
            norm=doc.get("norm", "hs"),
            jac_exp=float(doc.get("jac_exp", 0.0)),
            weight=doc.get("weight", "none"),
            s=None if doc.get("s") is None else float(doc["s"]),
        )


def truncated_exp(pk: np.ndarray, n_max: int) -> np.ndarray:
    """Partial sum of exp evaluated term-wise (monotone in n_max for pk >= 0)."""
    pk = np.asarray(pk, dtype=float)
    total = np.ones_like(pk)
    term = np.ones_like(pk)
    for n in range(1, n_max + 1):
        term = term * pk / n
        total = total + term
    return total


def _base(spec: FunctionalSpec, k: np.ndarray) -> np.ndarray:
    if spec.family == "lp_mean":
        return k ** spec.p
    if spec.family == "exp_p":
        return np.exp(spec.p * k)
    if spec.family == "trunc_exp":
        return truncated_exp(spec.p * k, spec.trunc_n)
    raise ConfigurationError(spec.family)


def _base_prime(spec: FunctionalSpec, k: np.ndarray) -> np.ndarray:
    """d/dk of the family base."""
    if spec.family == "lp_mean":
        return spec.p * k ** (spec.p - 1.0)
    if spec.family == "exp_p":
        return spec.p * np.exp(spec.p * k)
    if spec.family == "trunc_exp":
        if spec.trunc_n == 0:
            return np.zeros_like(np.asarray(k, dtype=float))
        return spec.p * truncated_exp(spec.p * k, spec.trunc_n - 1)
    raise ConfigurationError(spec.family)


def phi_eval(spec: FunctionalSpec, x, y):
    """Evaluate the family at (x, y); scalar or array, inf where y <= 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    x, y = np.broadcast_arrays(x, y)
    out = np.empty(x.shape, dtype=float)
    if spec.family == "dirichlet":
        out[:] = x ** 2
        if spec.jac_exp != 0.0:
            pos = y > 0
            out[pos] = out[pos] * y[pos] ** spec.jac_exp
            out[~pos] = np.inf
    else:
        pos = y > 0
        out[~pos] = np.inf
        yp = y[pos]
        k = x[pos] ** 2 / yp
        with np.errstate(over="ignore"):
            val = _base(spec, k)
            if spec.jac_exp != 0.0:
                val = val * yp ** spec.jac_exp
        out[pos] = val
    return float(out[()].item()) if scalar else out


def df_norm(derived: DerivedField, norm: str) -> np.ndarray:
    """Pointwise norm of Df per triangle: Hilbert-Schmidt or operator."""
    if norm == "hs":
        return np.sqrt(2.0 * (np.abs(derived.fz) ** 2 + np.abs(derived.fzbar) ** 2))
    if norm == "op":
        return np.abs(derived.fz) + np.abs(derived.fzbar)
    raise ConfigurationError(f"unknown norm {norm!r}")


def weight_values(spec: FunctionalSpec, points: np.ndarray) -> np.ndarray:
    if spec.weight == "none":
        return np.ones(np.shape(points), dtype=float)
    r2 = np.abs(points) ** 2
    if np.any(r2 >= 1.0):
        raise DomainError("hyperbolic weight requires points inside the unit disk")
    return 1.0 / (1.0 - r2) ** 2


def energy(spec: FunctionalSpec, derived: DerivedField,
           eta: Optional[np.ndarray] = None) -> float:
    """Centroid-quadrature energy sum; exact for the per-element-constant integrands."""
    x = df_norm(derived, spec.norm)
    vals = phi_eval(spec, x, derived.jac)
    if eta is None:
        eta = weight_values(spec, derived.mesh.centroids())
    contrib = vals * eta * derived.areas
    if np.any(np.isinf(contrib)):
        return np.inf
    return float(np.sum(contrib))


def inverse_energy(spec: FunctionalSpec, derived: DerivedField,
                   eta: Optional[np.ndarray] = None) -> float:
    """Inverse-problem energy computed by pull-back, without inverting.

    Uses K(w,h) = K(z,f) and J(w,h) = 1/J(z,f) at w = f(z): the integrand is
    phi_eval at the inverse map's arguments, times the forward Jacobian
    (the change-of-variables factor), summed with forward areas.  With
    jac_exp = 1 this reproduces the forward jac_exp = 0 energy exactly for
    affine maps (the change-of-variables identity).
    """
    if np.any(derived.jac <= 0):
        worst = int(np.argmin(derived.jac))
        raise DomainError(
            f"inverse undefined: triangle {worst} has J = {derived.jac[worst]:.3e} <= 0")
    jac = derived.jac
    hw = np.abs(derived.fz) / jac
    hwbar = np.abs(derived.fzbar) / jac
    if spec.norm == "hs":
        x_inv = np.sqrt(2.0 * (hw ** 2 + hwbar ** 2))
    else:
        x_inv = hw + hwbar
    vals = phi_eval(spec, x_inv, 1.0 / jac)
    if eta is None:
        if spec.weight == "none":
            eta = np.ones_like(jac)
        else:
            # weight lives on the inverse problem's domain = the image
            eta = weight_values(spec, derived.f_centroid)
    contrib = vals * eta * jac * derived.areas
    if np.any(np.isinf(contrib)):
        return np.inf
    return float(np.sum(contrib))


def polyconvex_lower_bound(x: float, y: float, x0: float, y0: float):
    """Supporting-plane inequality of the polyconvex kernel x^2/y at (x0, y0)."""
    if y <= 0 or y0 <= 0:
        raise DomainError("y and y0 must be positive")
    lhs = x ** 2 / y - x0 ** 2 / y0
    rhs = (2.0 * x0 / y0) * (x - x0) - (x0 ** 2 / y0 ** 2) * (y - y0)
    return lhs, rhs, bool(lhs >= rhs - 1e-12)


@dataclass(frozen=True)
class ProbeReport:
    n_samples: int
    violations: int
    worst_violation: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


PhiLike = Union[FunctionalSpec, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def _phi_callable(phi: PhiLike):
    if isinstance(phi, FunctionalSpec):
        return lambda x, y: phi_eval(phi, x, y)
    return phi


def convexity_probe(phi: PhiLike, s: float, n_samples: int,
                    box=((0.0, 5.0), (0.1, 5.0)), seed: int = 0) -> ProbeReport:
    """Randomized midpoint-convexity check of phi and phi * y^s on a box."""
    (x_lo, x_hi), (y_lo, y_hi) = box
    if x_lo < 0 or y_lo <= 0:
        raise ConfigurationError("box must lie in x >= 0, y > 0")
    f = _phi_callable(phi)
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(x_lo, x_hi, n_samples)
    y1 = rng.uniform(y_lo, y_hi, n_samples)
    x2 = rng.uniform(x_lo, x_hi, n_samples)
    y2 = rng.uniform(y_lo, y_hi, n_samples)
    violations = 0
    worst = 0.0
    for weight_s in (0.0, float(s)):
        def g(x, y):
            return f(x, y) * y ** weight_s
        v1, v2 = g(x1, y1), g(x2, y2)
        vm = g(0.5 * (x1 + x2), 0.5 * (y1 + y2))
        scale = np.maximum(1.0, np.maximum(np.abs(v1), np.abs(v2)))
        gap = vm - 0.5 * (v1 + v2) - 1e-10 * scale
        bad = gap > 0
        violations += int(np.sum(bad))
        if np.any(bad):
            worst = max(worst, float(np.max(gap[bad])))
    return ProbeReport(2 * n_samples, violations, worst)


def monotone_truncation_check(p: float, n_max: int, n_samples: int,
                              box=((0.0, 3.0), (0.1, 3.0)), seed: int = 0) -> ProbeReport:
    """Condition-2 oracle: truncations are non-decreasing in N, bounded by exp."""
    rng = np.random.default_rng(seed)
    (x_lo, x_hi), (y_lo, y_hi) = box
    x = rng.uniform(x_lo, x_hi, n_samples)
    y = rng.uniform(y_lo, y_hi, n_samples)
    pk = p * x ** 2 / y
    violations = 0
    worst = 0.0
    prev = truncated_exp(pk, 0)
    limit = np.exp(pk)
    for n in range(1, n_max + 1):
        cur = truncated_exp(pk, n)
        bad = (cur < prev - 1e-12) | (cur > limit * (1 + 1e-12))
        violations += int(np.sum(bad))
        if np.any(bad):
            worst = max(worst, float(np.max(np.abs(prev - cur)[bad])))
        prev = cur
    return ProbeReport(n_samples * n_max, violations, worst)


def concavity_probe(s: float, p_prime: float, n_samples: int, seed: int = 0,
                    lo: float = 1e-3, hi: float = 10.0) -> ProbeReport:
    """Tangent-line bound of the concave power t -> t^(s p') over positive pairs."""
    sp = s * p_prime
    if not (0.0 < sp < 1.0):
        raise ConfigurationError(f"need 0 < s*p' < 1, got {sp}")
    rng = np.random.default_rng(seed)
    jj = rng.uniform(lo, hi, n_samples)
    jf = rng.uniform(lo, hi, n_samples)
    lhs = jj ** sp - jf ** sp
    rhs = sp * jf ** (sp - 1.0) * (jj - jf)
    gap = lhs - rhs - 1e-12 * np.maximum(1.0, np.abs(rhs))
    bad = gap > 0
    worst = float(np.max(gap[bad])) if np.any(bad) else 0.0
    return ProbeReport(n_samples, int(np.sum(bad)), worst)
