"""Gamma-matrix algebra and vacuum momentum-space building blocks.

Conventions
-----------
Metric signature (+,-,...,-).  The Feynman slash of a four-vector with
*upper* components (k0, k1, ...) is  k̸ = k0 γ⁰ − Σ_i k^i γ^i.  The spin
scalar product is ≺ψ|φ≻ = ψ†γ⁰φ; the positive scalar product on Cauchy
data is the plain ψ†φ (the γ⁰ of ≺·|γ⁰·≻ cancels).

Per momentum mode (k, m) with ω = sqrt(|k|² + m²):

* frequency projectors   Π_± = ±(k̸_± + m)γ⁰ / (2ω),  k_± = (±ω, k);
  these are the spectral projectors of the vacuum Hamiltonian
  H(k) = γ⁰(Σ_i γ^i k^i + m) for the eigenvalues ±ω.
* vacuum signature operator  S_m(k) = Π₊ − Π₋ = (m − Σ_i k^i γ^i) γ⁰ / ω,
  Hermitian with S² = 1.
* vacuum evolution  U(t,t') = Π₊ e^{−iω(t−t')} + Π₋ e^{+iω(t−t')}.

All functions broadcast over leading batch axes of ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpinorRep", "MomentumMode", "build_dirac_representation", "slash",
    "frequency_projectors", "vacuum_signature", "vacuum_evolution",
    "vacuum_hamiltonian", "mass_derivative_operators",
    "second_order_decomposition",
]


@dataclass(frozen=True)
class SpinorRep:
    """A concrete Dirac representation: gammas[j] is γ^j, spin_sign is γ⁰."""
    spacetime_dim: int
    spinor_dim: int
    gammas: tuple
    spin_sign: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.spin_sign is None:
            object.__setattr__(self, "spin_sign", self.gammas[0])

    @property
    def gamma0(self):
        return self.gammas[0]

    def spatial_gammas(self):
        return self.gammas[1:]

    def spin_adjoint(self, a):
        """Adjoint w.r.t. ≺·|·≻:  A* = γ⁰ A† γ⁰ (batched over leading axes)."""
        g0 = self.gamma0
        return g0 @ np.conj(np.swapaxes(a, -1, -2)) @ g0


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def build_dirac_representation(spacetime_dim: int) -> SpinorRep:
    """Dirac(-Pauli) gamma matrices in 3+1, and a real 2x2 pair in 1+1.

    1+1 uses γ⁰ = diag(1,−1), γ¹ = [[0,1],[−1,0]]; both Clifford relations
    and spin-adjointness γ⁰(γ^j)†γ⁰ = γ^j hold (checked in the test suite
    by explicit multiplication).
    """
    if spacetime_dim == 4:
        eye2 = np.eye(2, dtype=complex)
        zero = np.zeros((2, 2), dtype=complex)
        g0 = np.block([[eye2, zero], [zero, -eye2]])
        spatial = tuple(
            np.block([[zero, s], [-s, zero]]) for s in _PAULI)
        return SpinorRep(4, 4, (g0, *spatial))
    if spacetime_dim == 2:
        g0 = np.array([[1, 0], [0, -1]], dtype=complex)
        g1 = np.array([[0, 1], [-1, 0]], dtype=complex)
        return SpinorRep(2, 2, (g0, g1))
    raise ValueError(f"unsupported spacetime dimension {spacetime_dim}; use 2 or 4")


@dataclass(frozen=True)
class MomentumMode:
    """One momentum block: spatial momentum k (upper components) and mass m."""
    k: np.ndarray
    m: float

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.k, dtype=float))
        object.__setattr__(self, "k", k)
        if not self.m > 0:
            raise ValueError("mass must be positive")

    @property
    def omega(self) -> float:
        return float(np.sqrt(np.sum(self.k**2) + self.m**2))


def _as_batch(k):
    """Return k as (..., dspace) float array."""
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k[None]
    return k


def slash(rep: SpinorRep, k4):
    """Feynman slash of four-vectors with upper components, batched.

    k4 has shape (..., spacetime_dim); returns (..., d, d).
    """
    k4 = np.asarray(k4)
    out = k4[..., 0, None, None] * rep.gammas[0]
    for i, gi in enumerate(rep.spatial_gammas(), start=1):
        out = out - k4[..., i, None, None] * gi
    return out


def _omega(k, m):
    k = _as_batch(k)
    m = np.asarray(m, dtype=float)
    return np.sqrt(np.sum(k**2, axis=-1) + m**2)


def frequency_projectors(rep: SpinorRep, k, m):
    """(Π₊, Π₋) for momentum k and mass m; k and m may carry batch axes."""
    k = _as_batch(k)
    om = _omega(k, m)[..., None, None]
    me = np.asarray(m, dtype=float)[..., None, None]
    g0 = rep.gamma0
    kq = np.zeros(k.shape[:-1] + (rep.spinor_dim, rep.spinor_dim), dtype=complex)
    for i, gi in enumerate(rep.spatial_gammas()):
        kq = kq + k[..., i, None, None] * gi
    # k̸_± = ±ω γ⁰ − Σ k^i γ^i
    eye = np.eye(rep.spinor_dim)
    pi_p = (om * g0 - kq + me * eye) @ g0 / (2.0 * om)
    pi_m = -(-om * g0 - kq + me * eye) @ g0 / (2.0 * om)
    return pi_p, pi_m


def frequency_projectors_mode(rep: SpinorRep, mode: MomentumMode):
    _check_mode(rep, mode)
    return frequency_projectors(rep, mode.k, mode.m)


def vacuum_signature(rep: SpinorRep, k, m):
    """S_m(k) = (m − Σ k^i γ^i) γ⁰ / ω = Π₊ − Π₋."""
    k = _as_batch(k)
    om = _omega(k, m)[..., None, None]
    me = np.asarray(m, dtype=float)[..., None, None]
    kq = np.zeros(k.shape[:-1] + (rep.spinor_dim, rep.spinor_dim), dtype=complex)
    for i, gi in enumerate(rep.spatial_gammas()):
        kq = kq + k[..., i, None, None] * gi
    return (me * np.eye(rep.spinor_dim) - kq) @ rep.gamma0 / om


def vacuum_hamiltonian(rep: SpinorRep, k, m):
    """H(k) = γ⁰(Σ γ^i k^i + m);  H² = ω², H Π_± = ±ω Π_±."""
    k = _as_batch(k)
    me = np.asarray(m, dtype=float)[..., None, None]
    kq = np.zeros(k.shape[:-1] + (rep.spinor_dim, rep.spinor_dim), dtype=complex)
    for i, gi in enumerate(rep.spatial_gammas()):
        kq = kq + k[..., i, None, None] * gi
    return rep.gamma0 @ (kq + me * np.eye(rep.spinor_dim))


def vacuum_evolution(rep: SpinorRep, k, m, t, t0):
    """Closed-form vacuum propagator U(t,t0;k), batched over k and/or t."""
    k = _as_batch(k)
    om = _omega(k, m)
    pi_p, pi_m = frequency_projectors(rep, k, m)
    dt = np.asarray(t - t0)
    phase = np.exp(-1j * om * dt)
    return (phase[..., None, None] * pi_p
            + np.conj(phase)[..., None, None] * pi_m)


def _check_mode(rep: SpinorRep, mode: MomentumMode):
    if mode.k.shape[-1] != rep.spacetime_dim - 1:
        raise ValueError("momentum dimension does not match the representation")


# ---------------------------------------------------------------------------
# Mass-derivative decompositions of the vacuum propagator.
#
# First order:  (t−t0)·U_m = ∂_m V_m + W_m  with
#   V_m = Σ_± (i/2m)(k̸_± + m)γ⁰ e^{∓iωΔt}
#   W_m = Σ_± (i/2)(k̸_± γ⁰/m² ∓ 1/ω) e^{∓iωΔt}
#
# Second order: (t−t0)²·U_m = ∂²_m A_m + ∂_m B_m + C_m, obtained by applying
# the substitution ∂_ω = (ω/m)∂_m twice.  Writing e_s = e^{−isωΔt}, r = ω/m,
# and letting ∂_m below act on the m-dependent coefficient matrices only:
#   G_s  = i s r Π_s            (first-step coefficient)
#   G2_s = −r² Π_s              (second-step coefficient)
#   K_s  = i s r ∂_m G_s = −r r' Π_s − r² ∂_mΠ_s
#   A = Σ_s G2_s e_s  (= −r² U),  B = −Σ_s (∂_m G2_s + K_s) e_s,
#   C = Σ_s (∂_m K_s) e_s.
# The closed forms for ∂_mΠ_s and ∂²_mΠ_s used here:
#   ∂_mΠ_s  = m/(2ω²) + s γ⁰/(2ω) − (m/ω²) Π_s
#   ∂²_mΠ_s = (1/(2ω²) − m²/ω⁴) − s m γ⁰/(2ω³) − (1/ω² − 2m²/ω⁴) Π_s
#             − (m/ω²) ∂_mΠ_s
# ---------------------------------------------------------------------------


def _pi_mass_derivatives(rep, k, m):
    """Π_s, ∂_mΠ_s, ∂²_mΠ_s for s = ±1, at fixed k."""
    k = _as_batch(k)
    om = _omega(k, m)[..., None, None]
    eye = np.eye(rep.spinor_dim)
    g0 = rep.gamma0
    pi_p, pi_m = frequency_projectors(rep, k, m)
    out = {}
    for s, pi in ((1, pi_p), (-1, pi_m)):
        d1 = m / (2 * om**2) * eye + s * g0 / (2 * om) - (m / om**2) * pi
        d2 = ((1 / (2 * om**2) - m**2 / om**4) * eye
              - s * m / (2 * om**3) * g0
              - (1 / om**2 - 2 * m**2 / om**4) * pi
              - (m / om**2) * d1)
        out[s] = (pi, d1, d2)
    return out, om


def mass_derivative_operators(rep: SpinorRep, k, m, t, t0):
    """(V_m, W_m) with (t−t0)·U_m = ∂_m V_m + W_m."""
    k = _as_batch(k)
    om = _omega(k, m)[..., None, None]
    g0 = rep.gamma0
    eye = np.eye(rep.spinor_dim)
    kq = np.zeros(k.shape[:-1] + (rep.spinor_dim, rep.spinor_dim), dtype=complex)
    for i, gi in enumerate(rep.spatial_gammas()):
        kq = kq + k[..., i, None, None] * gi
    dt = t - t0
    v = np.zeros_like(kq)
    w = np.zeros_like(kq)
    for s in (1, -1):
        kslash = s * om * g0 - kq
        phase = np.exp(-1j * s * np.squeeze(om, axis=(-1, -2)) * dt)[..., None, None]
        v = v + (1j / (2 * m)) * ((kslash + m * eye) @ g0) * phase
        w = w + (1j / 2) * ((kslash @ g0) / m**2 - s / om * eye) * phase
    return v, w


def second_order_decomposition(rep: SpinorRep, k, m, t, t0):
    """(A_m, B_m, C_m) with (t−t0)²·U_m = ∂²_m A_m + ∂_m B_m + C_m."""
    k = _as_batch(k)
    derivs, om = _pi_mass_derivatives(rep, k, m)
    omf = np.squeeze(om, axis=(-1, -2))
    r = om / m
    ksq = np.sum(k**2, axis=-1)[..., None, None]
    rp = -ksq / (om * m**2)                       # ∂_m(ω/m)
    rpp = ksq * (1 / (om**3 * m) + 2 / (om * m**3))  # ∂²_m(ω/m)
    dt = t - t0
    dim = rep.spinor_dim
    a = np.zeros(k.shape[:-1] + (dim, dim), dtype=complex)
    b = np.zeros_like(a)
    c = np.zeros_like(a)
    for s in (1, -1):
        pi, dpi, d2pi = derivs[s]
        phase = np.exp(-1j * s * omf * dt)[..., None, None]
        g2 = -r**2 * pi
        dg2 = -2 * r * rp * pi - r**2 * dpi
        ks = -r * rp * pi - r**2 * dpi            # K_s
        dks = (-(rp**2 + r * rpp) * pi - 3 * r * rp * dpi - r**2 * d2pi)
        a = a + g2 * phase
        b = b - (dg2 + ks) * phase
        c = c + dks * phase
    return a, b, c
