"""External potentials 𝓑(t[,x]): evaluation, decay norms, smallness audit.

A potential is a spinor-matrix-valued function of time (and optionally a
periodic spatial coordinate in the 1+1 lattice regime) that is symmetric
with respect to the spin scalar product, γ⁰𝓑†γ⁰ = 𝓑.  Built-in kinds:

* ``scalar``    𝓑 = λ g(t) χ(x) · 1
* ``electric``  𝓑 = λ g(t) χ(x) · γ⁰   (A̸ with A = (A₀, 0))
* ``custom``    sampled matrix time series, cubic interpolation in t

Envelopes g(t), normalized to g(0) = 1:

* ``gaussian``  exp(−t²/(2σ²))
* ``power``     (1 + |t|^{2+ε})⁻¹
* ``bump``      exp(1 − 1/(1 − (t/T)²)) for |t| < T, else 0

The potential is treated as identically zero for |t| > t_max; t_max is
chosen so the discarded L¹ tail is below 1e−10 of the total.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .quadrature import adaptive_integrate
from .spinor import SpinorRep

__all__ = ["PotentialSpec", "evaluate", "decay_norms", "check_smallness",
           "symmetry_audit", "SMALLNESS_THRESHOLD"]

SMALLNESS_THRESHOLD = np.sqrt(2.0) - 1.0

_TAIL_FRACTION = 1e-10


@dataclass
class PotentialSpec:
    """Time (and optionally space) dependent matrix potential.

    For kind="custom", pass ``custom_times`` and ``custom_matrices``
    (shape (n_t, d, d)); the amplitude multiplies the samples and the
    envelope fields are ignored.  ``spatial_profile`` is a callable
    χ(x) with sup|χ| ≤ 1 (Regime B only).
    """
    kind: str = "scalar"
    amplitude: float = 0.0
    envelope: str = "gaussian"
    sigma: float = 1.0            # gaussian width
    epsilon: float = 0.5          # power-envelope decay exponent offset
    support: float = 2.0          # bump half-width
    spatial_profile: Optional[Callable] = None
    t_max: Optional[float] = None
    custom_times: Optional[np.ndarray] = None
    custom_matrices: Optional[np.ndarray] = None
    _spline: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("scalar", "electric", "custom"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "custom":
            if self.custom_times is None or self.custom_matrices is None:
                raise ValueError("custom potentials need custom_times/custom_matrices")
            self.custom_times = np.asarray(self.custom_times, dtype=float)
            self.custom_matrices = np.asarray(self.custom_matrices, dtype=complex)
            self._spline = CubicSpline(self.custom_times, self.custom_matrices,
                                       axis=0, bc_type="natural")
            if self.t_max is None:
                self.t_max = float(np.max(np.abs(self.custom_times)))
        elif self.envelope not in ("gaussian", "power", "bump"):
            raise ValueError(f"unknown envelope {self.envelope!r}")
        if self.t_max is None:
            self.t_max = self._default_t_max()

    # -- scalar envelope -----------------------------------------------------

    def envelope_value(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "custom":
            raise TypeError("custom potentials have no analytic envelope")
        if self.envelope == "gaussian":
            return np.exp(-t**2 / (2.0 * self.sigma**2))
        if self.envelope == "power":
            return 1.0 / (1.0 + np.abs(t)**(2.0 + self.epsilon))
        out = np.zeros_like(t)
        u = t / self.support
        inside = np.abs(u) < 1.0
        ui = u[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui**2))
        return out

    def envelope_derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "custom":
            raise TypeError("custom potentials: differentiate the spline instead")
        if self.envelope == "gaussian":
            return -t / self.sigma**2 * self.envelope_value(t)
        if self.envelope == "power":
            p = 2.0 + self.epsilon
            return -p * np.sign(t) * np.abs(t)**(p - 1.0) / (1.0 + np.abs(t)**p)**2
        out = np.zeros_like(t)
        u = t / self.support
        inside = np.abs(u) < 1.0
        ui = u[inside]
        out[inside] = (np.exp(1.0 - 1.0 / (1.0 - ui**2))
                       * (-2.0 * ui / (1.0 - ui**2)**2) / self.support)
        return out

    def _envelope_l1_tail(self, big_t):
        """Upper bound on ∫_{|t|>T} |g| dt."""
        if self.envelope == "gaussian":
            from scipy.special import erfc
            return float(self.sigma * np.sqrt(2 * np.pi) * erfc(big_t / (np.sqrt(2) * self.sigma)))
        if self.envelope == "power":
            p = 1.0 + self.epsilon
            return float(2.0 * big_t**(-p) / p)
        return 0.0 if big_t >= self.support else None

    def _default_t_max(self):
        if self.envelope == "bump":
            return self.support
        if self.amplitude == 0.0:
            return 1.0
        l1 = adaptive_integrate(lambda t: self.envelope_value(t), -50.0 * self._scale(),
                                50.0 * self._scale(), tol=1e-12)
        target = _TAIL_FRACTION * l1
        lo, hi = self._scale(), 1e9
        for _ in range(200):
            mid = np.sqrt(lo * hi)
            if self._envelope_l1_tail(mid) > target:
                lo = mid
            else:
                hi = mid
            if hi / lo < 1.0 + 1e-6:
                break
        return float(hi)

    def _scale(self):
        if self.envelope == "gaussian":
            return self.sigma
        if self.envelope == "bump":
            return self.support
        return 1.0

    @property
    def homogeneous(self) -> bool:
        return self.spatial_profile is None


def evaluate(pot: PotentialSpec, rep: SpinorRep, t, x=None):
    """𝓑(t[,x]) as a (…, d, d) matrix; exactly zero for |t| > t_max."""
    if (x is None) != pot.homogeneous:
        raise ValueError("spatial argument must be supplied iff the potential "
                         "has a spatial profile")
    t = np.asarray(t, dtype=float)
    d = rep.spinor_dim
    if pot.kind == "custom":
        inside = np.abs(t) <= pot.t_max
        vals = np.zeros(t.shape + (d, d), dtype=complex)
        if np.any(inside):
            vals[inside] = pot._spline(t[inside]) * pot.amplitude
        return vals
    g = np.where(np.abs(t) <= pot.t_max, pot.envelope_value(t), 0.0)
    if x is not None:
        g = g * np.asarray(pot.spatial_profile(x), dtype=float)
    base = np.eye(d, dtype=complex) if pot.kind == "scalar" else rep.gamma0
    return pot.amplitude * g[..., None, None] * base


def time_derivative(pot: PotentialSpec, rep: SpinorRep, t):
    """d𝓑/dt for homogeneous potentials (used by the commutator identity)."""
    if not pot.homogeneous:
        raise ValueError("time_derivative implemented for homogeneous potentials")
    t = np.asarray(t, dtype=float)
    d = rep.spinor_dim
    if pot.kind == "custom":
        inside = np.abs(t) <= pot.t_max
        vals = np.zeros(t.shape + (d, d), dtype=complex)
        if np.any(inside):
            vals[inside] = pot._spline(t[inside], 1) * pot.amplitude
        return vals
    gdot = np.where(np.abs(t) <= pot.t_max, pot.envelope_derivative(t), 0.0)
    base = np.eye(d, dtype=complex) if pot.kind == "scalar" else rep.gamma0
    return pot.amplitude * gdot[..., None, None] * base


def _c0_norm_curve(pot: PotentialSpec, rep: SpinorRep, t):
    """|𝓑(t)|_{C⁰}: spectral matrix norm; sup over x is 1 by normalization."""
    mats = evaluate(pot, rep, t) if pot.homogeneous else \
        pot.amplitude * pot.envelope_value(t)[..., None, None] * (
            np.eye(rep.spinor_dim, dtype=complex) if pot.kind == "scalar" else rep.gamma0)
    return np.linalg.norm(mats, ord=2, axis=(-2, -1))


def decay_norms(pot: PotentialSpec, rep: SpinorRep, tol: float = 1e-10,
                n_validate: int = 200):
    """L¹ of |𝓑|_{C⁰}, the recorded envelope constants, and the tail bound.

    Validates the claimed bound |𝓑(t)|_{C⁰} ≤ c/(1+|t|^{2+ε}) on a sample
    grid and raises on violation.  Returns a dict with keys
    L1_C0, c, epsilon, tail (callable T ↦ ∫_{|τ|>T}|𝓑|dτ bound).
    """
    if pot.amplitude == 0.0:
        return {"L1_C0": 0.0, "c": 0.0, "epsilon": pot.epsilon,
                "tail": lambda T: 0.0}
    l1 = adaptive_integrate(lambda t: _c0_norm_curve(pot, rep, t),
                            -pot.t_max, pot.t_max, tol=tol * max(abs(pot.amplitude), 1.0))
    if pot.kind == "custom":
        eps = pot.epsilon
        ts = np.linspace(-pot.t_max, pot.t_max, n_validate)
        c = float(np.max(_c0_norm_curve(pot, rep, ts) * (1.0 + np.abs(ts)**(2.0 + eps))))
    else:
        eps = pot.epsilon if pot.envelope == "power" else 1.0
        ts = np.linspace(-pot.t_max, pot.t_max, n_validate)
        bound = _c0_norm_curve(pot, rep, ts) * (1.0 + np.abs(ts)**(2.0 + eps))
        c = float(np.max(bound))
        # every sample must respect the recorded (c, eps) pair
        bad = _c0_norm_curve(pot, rep, ts) > c / (1.0 + np.abs(ts)**(2.0 + eps)) + 1e-12
        if np.any(bad):
            raise RuntimeError("envelope decay audit failed")

    def tail(big_t):
        if big_t >= pot.t_max:
            return 0.0
        return float(adaptive_integrate(
            lambda t: _c0_norm_curve(pot, rep, t), big_t, pot.t_max, tol=tol)
            + adaptive_integrate(
                lambda t: _c0_norm_curve(pot, rep, t), -pot.t_max, -big_t, tol=tol))

    return {"L1_C0": float(np.real(l1)), "c": c, "epsilon": eps, "tail": tail}


def check_smallness(pot: PotentialSpec, rep: SpinorRep):
    """Is ∫|𝓑(t)|_{C⁰} dt below the Hadamard-theorem threshold sqrt(2)−1?"""
    value = decay_norms(pot, rep)["L1_C0"]
    return {"value": value, "threshold": float(SMALLNESS_THRESHOLD),
            "pass": bool(value < SMALLNESS_THRESHOLD)}


def symmetry_audit(pot: PotentialSpec, rep: SpinorRep, sample_times,
                   sample_x=None):
    """max over the grid of ‖γ⁰𝓑†γ⁰ − 𝓑‖ (spin-symmetry residual)."""
    ts = np.asarray(sample_times, dtype=float)
    if pot.homogeneous:
        mats = evaluate(pot, rep, ts)
    else:
        xs = np.asarray(sample_x, dtype=float)
        mats = np.stack([evaluate(pot, rep, np.full(xs.shape, t), xs) for t in ts])
    resid = rep.spin_adjoint(mats) - mats
    return float(np.max(np.linalg.norm(resid, ord=2, axis=(-2, -1))))


def gaussian_amplitude_for_l1(target_l1: float, sigma: float = 1.0) -> float:
    """Amplitude λ making ∫|λ e^{−t²/2σ²}|dt equal target_l1 (scalar kind)."""
    return target_l1 / (sigma * np.sqrt(2.0 * np.pi))
