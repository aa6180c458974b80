"""Mass-superposed solution families and the mass-oscillation diagnostics.

A *family* is a set of Dirac solutions (one per mass node of a Gauss grid
on an interval (m_lo, m_hi)) sharing a finite set of momentum modes.  The
stored data are the Cauchy values at the anchor time, with the smooth
compactly supported mass profile already folded in.  The superposition
operator integrates the family over the mass,

    (𝔭ψ)(t) = Σ_i w_i ψ_{m_i}(t),

and the package-wide inner products are (per momentum mode j, with mode
weights W_j):

    (ψ|φ)        = Σ_j W_j ψ̂_j(t)†φ̂_j(t)            (t-independent)
    ⟨ψ|φ⟩        = (1/2π) Σ_j W_j ∫dt ψ̂_j(t)†γ⁰φ̂_j(t)

With these conventions ⟨𝔭ψ|𝔭φ⟩ = ∫ (ψ_m|S̃_m φ_m) dm holds with the same
signature matrices produced by the signature module, and the vacuum
strong-mass-oscillation ratio stays below the paper-level bound 2π.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .evolution import EvolutionConfig, propagate_modes
from .quadrature import gauss_legendre, composite_gauss, oscillatory_nodes, loglog_slope
from .spinor import SpinorRep, frequency_projectors, slash

__all__ = ["MassGrid", "MassFamily", "bump_profile", "make_family",
           "family_states", "superpose", "decay_scan", "spacetime_inner",
           "weak_mop_symmetry_check", "strong_mop_ratio",
           "distributional_products_check", "sobolev_growth_check"]


@dataclass(frozen=True)
class MassGrid:
    """Gauss-Legendre mass grid on (m_lo, m_hi) with quadrature weights."""
    m_lo: float
    m_hi: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def gauss(cls, m_lo: float, m_hi: float, n: int):
        if not 0 < m_lo < m_hi:
            raise ValueError("mass interval must satisfy 0 < m_lo < m_hi")
        x, w = gauss_legendre(m_lo, m_hi, n)
        return cls(m_lo, m_hi, x, w)

    @property
    def width(self):
        return self.m_hi - self.m_lo

    @property
    def center(self):
        return 0.5 * (self.m_lo + self.m_hi)

    def diff_matrix(self):
        """Barycentric spectral differentiation matrix on the nodes."""
        x = self.nodes
        n = len(x)
        # barycentric weights, rescaled for stability
        c = np.ones(n)
        for i in range(n):
            diffs = x[i] - np.delete(x, i)
            c[i] = np.prod(diffs / (0.5 * self.width))
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    d[i, j] = (c[j] / c[i]) / (x[i] - x[j])
        np.fill_diagonal(d, -np.sum(d, axis=1))
        return d


def bump_profile(m_lo: float, m_hi: float):
    """Smooth compactly supported bump exp(1 − 1/(1−u²)) on (m_lo, m_hi)."""
    mid, half = 0.5 * (m_lo + m_hi), 0.5 * (m_hi - m_lo)

    def eta(m):
        u = (np.asarray(m, dtype=float) - mid) / half
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out

    return eta


@dataclass
class MassFamily:
    """Family data at the anchor time, mass profile folded into ``data``.

    data has shape (n_m, n_k, d):  data[i, j] = η(m_i)·ψ⁰(m_i, k_j).
    """
    rep: SpinorRep
    grid: MassGrid
    k_points: np.ndarray
    k_weights: np.ndarray
    data: np.ndarray
    t_anchor: float = 0.0
    derivative_order: int = 0

    def __post_init__(self):
        self.k_points = np.atleast_2d(np.asarray(self.k_points, dtype=float))
        self.k_weights = np.atleast_1d(np.asarray(self.k_weights, dtype=float))
        self.data = np.asarray(self.data, dtype=complex)
        n_m, n_k = len(self.grid.nodes), self.k_points.shape[0]
        if self.data.shape != (n_m, n_k, self.rep.spinor_dim):
            raise ValueError(f"data shape {self.data.shape} does not match "
                             f"(n_m, n_k, d) = {(n_m, n_k, self.rep.spinor_dim)}")

    def apply_mass_operator(self, power: int = 1):
        """T^power: multiply the family member at node m_i by m_i^power."""
        scale = self.grid.nodes[:, None, None] ** power
        return replace(self, data=self.data * scale)

    def mass_norms(self):
        """‖ψ_m‖ per node: sqrt(Σ_j W_j ‖data[i,j]‖²)."""
        return np.sqrt(np.einsum("ijd,j->i", np.abs(self.data) ** 2,
                                 self.k_weights).real)

    @property
    def omegas(self):
        """ω(m_i, k_j) table, shape (n_m, n_k)."""
        ksq = np.sum(self.k_points ** 2, axis=-1)
        return np.sqrt(ksq[None, :] + self.grid.nodes[:, None] ** 2)


def make_family(rep, grid: MassGrid, profile, k_points, k_weights,
                amplitudes, t_anchor: float = 0.0):
    """Build a family from a mass profile and per-mode spinor amplitudes.

    amplitudes: (n_k, d), or (n_m, n_k, d) for mass-dependent data.
    """
    k_points = np.atleast_2d(np.asarray(k_points, dtype=float))
    amplitudes = np.asarray(amplitudes, dtype=complex)
    eta = profile(grid.nodes)
    if amplitudes.ndim == 2:
        data = eta[:, None, None] * amplitudes[None, :, :]
    else:
        data = eta[:, None, None] * amplitudes
    return MassFamily(rep, grid, k_points, np.asarray(k_weights, dtype=float),
                      data, t_anchor)


# ---------------------------------------------------------------------------
# Family evolution: closed form in the vacuum, propagator cache + free
# extension beyond the potential cutoff otherwise.
# ---------------------------------------------------------------------------

def _flatten_pairs(family):
    n_m, n_k = family.data.shape[:2]
    k_pairs = np.tile(family.k_points, (n_m, 1))
    m_pairs = np.repeat(family.grid.nodes, n_k)
    return k_pairs, m_pairs, family.data.reshape(n_m * n_k, -1)


def _closed_form_states(rep, k_pairs, m_pairs, anchor_data, anchor_t, times,
                        chunk=256):
    """Free states at the requested times from data at anchor_t, (n_t, P, d)."""
    pi_p, pi_m = frequency_projectors(rep, k_pairs, m_pairs)
    cp = np.einsum("pij,pj->pi", pi_p, anchor_data)
    cm = np.einsum("pij,pj->pi", pi_m, anchor_data)
    om = np.sqrt(np.sum(k_pairs ** 2, axis=-1) + m_pairs ** 2)
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times),) + anchor_data.shape, dtype=complex)
    for lo in range(0, len(times), chunk):
        tt = times[lo:lo + chunk, None] - anchor_t
        ph = np.exp(-1j * om[None, :] * tt)
        out[lo:lo + chunk] = ph[:, :, None] * cp[None] + \
            np.conj(ph)[:, :, None] * cm[None]
    return out


def family_states(family: MassFamily, pot, times, cfg: EvolutionConfig | None = None):
    """ψ_{m_i}(t, k_j) for every requested time: shape (n_t, n_m, n_k, d).

    With a potential, the interacting propagator is integrated once over the
    window |t| ≤ pot.t_max and extended by the closed-form free evolution
    outside (the potential is exactly zero there).
    """
    cfg = cfg or EvolutionConfig()
    times = np.asarray(times, dtype=float)
    n_m, n_k, d = family.data.shape
    k_pairs, m_pairs, data = _flatten_pairs(family)
    if pot is None or pot.amplitude == 0.0:
        out = _closed_form_states(family.rep, k_pairs, m_pairs, data,
                                  family.t_anchor, times)
        return out.reshape(len(times), n_m, n_k, d)

    t_edge = pot.t_max
    lo_edge, hi_edge = -t_edge, t_edge
    inside = (times >= lo_edge) & (times <= hi_edge)
    needed = [times[inside]]
    if np.any(times > hi_edge):
        needed.append([hi_edge])
    if np.any(times < lo_edge):
        needed.append([lo_edge])
    node_set = np.unique(np.concatenate(needed)) if needed else np.array([])
    u = propagate_modes(family.rep, k_pairs, m_pairs, pot, family.t_anchor,
                        node_set, cfg)
    cache = {t: u[i] for i, t in enumerate(node_set)}
    out = np.empty((len(times), n_m * n_k, d), dtype=complex)
    if np.any(inside):
        idx = np.searchsorted(node_set, times[inside])
        out[inside] = np.einsum("tpij,pj->tpi", u[idx], data)
    for edge, mask in ((hi_edge, times > hi_edge), (lo_edge, times < lo_edge)):
        if np.any(mask):
            edge_data = np.einsum("pij,pj->pi", cache[edge], data)
            out[mask] = _closed_form_states(family.rep, k_pairs, m_pairs,
                                            edge_data, edge, times[mask])
    return out.reshape(len(times), n_m, n_k, d)


def superpose(family: MassFamily, pot, t, cfg: EvolutionConfig | None = None,
              states=None, mass_power: int = 0):
    """(𝔭 T^p ψ)(t) = Σ_i w_i m_i^p ψ_{m_i}(t), shape (n_t, n_k, d)."""
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if states is None:
        states = family_states(family, pot, times, cfg)
    w = family.grid.weights * family.grid.nodes ** mass_power
    return np.einsum("i,tikd->tkd", w, states)


def _superposed_norms(family, states):
    """‖(𝔭ψ)|_t‖ for precomputed states: shape (n_t,)."""
    p = np.einsum("i,tikd->tkd", family.grid.weights, states)
    return np.sqrt(np.einsum("tkd,k->t", np.abs(p) ** 2, family.k_weights).real)


def decay_scan(family: MassFamily, pot, time_grid,
               fit_window=None, cfg: EvolutionConfig | None = None):
    """Norm table ‖(𝔭ψ)|_t‖ and a log-log slope fit over the tail window.

    fit_window defaults to the upper decade of the time grid.  Returns a
    dict with times, norms, slope, fit bounds.
    """
    times = np.asarray(time_grid, dtype=float)
    states = family_states(family, pot, times, cfg)
    norms = _superposed_norms(family, states)
    if fit_window is None:
        hi = float(np.max(np.abs(times)))
        fit_window = (hi / 10.0, hi)
    slope, _ = loglog_slope(np.abs(times), norms, *fit_window)
    return {"times": times, "norms": norms, "slope": slope,
            "fit_lo": fit_window[0], "fit_hi": fit_window[1]}


# ---------------------------------------------------------------------------
# Space-time inner products
# ---------------------------------------------------------------------------

def _inner_time_nodes(omega_max, t_window, points_per_period=8):
    # product phases reach 2ω; leave margin
    return oscillatory_nodes(-t_window, t_window, 2.0 * omega_max * 1.05,
                             points_per_period=points_per_period,
                             min_panels=24)


def _alias_time_limit(family):
    """Largest |t| at which the mass grid still resolves the ω(m)·t phases."""
    om = family.omegas
    spread = float(np.max(om.max(axis=0) - om.min(axis=0)))
    return 1.3 * len(family.grid.nodes) / max(spread, 1e-12)


def _estimate_window(family_a, family_b, pot, cfg, rtol):
    """Pick the half-window T from decay fits so the tail is below rtol.

    T is capped at the mass-grid aliasing limit (beyond it the quadrature
    sum of the family stops tracking the continuum superposition).
    """
    t_cap = min(_alias_time_limit(family_a), _alias_time_limit(family_b))
    probe = np.geomspace(2.0, max(4.0, t_cap), 28)
    sa = _superposed_norms(family_a, family_states(family_a, pot, probe, cfg))
    sb = _superposed_norms(family_b, family_states(family_b, pot, probe, cfg))
    prod = sa * sb
    slope, _ = loglog_slope(probe, prod, probe[-10], probe[-1])
    if slope >= -1.1:
        raise RuntimeError(f"non-convergent tail fit: product slope {slope:.2f}")
    coarse = np.trapezoid(prod, probe) if hasattr(np, "trapezoid") \
        else np.trapz(prod, probe)
    scale = max(coarse, prod[0] * probe[0], 1e-300)
    for i, t in enumerate(probe):
        tail = prod[i] * t / abs(slope + 1.0)
        if tail < rtol * scale:
            return float(t), float(tail)
    return float(probe[-1]), float(prod[-1] * probe[-1] / abs(slope + 1.0))


def spacetime_inner(family_a: MassFamily, family_b: MassFamily, pot,
                    t_window=None, cfg: EvolutionConfig | None = None,
                    rtol_tail: float = 1e-5, mass_power_a: int = 0,
                    mass_power_b: int = 0, points_per_period: int = 8,
                    return_details: bool = False):
    """⟨𝔭T^a ψ | 𝔭T^b φ⟩ = (1/2π) Σ_j W_j ∫dt (𝔭ψ)†γ⁰(𝔭φ).

    The time integral is truncated to [−T, T]; T comes from the decay fit
    when not supplied, and the recorded tail estimate is returned in the
    details.  Raises if the fitted tail does not converge.
    """
    if not np.array_equal(family_a.k_points, family_b.k_points):
        raise ValueError("families must share the momentum mode set")
    cfg = cfg or EvolutionConfig()
    tail_est = None
    if t_window is None:
        t_window, tail_est = _estimate_window(family_a, family_b, pot, cfg,
                                              rtol_tail)
    om_max = float(np.max(family_a.omegas.max()))
    om_max = max(om_max, float(family_b.omegas.max()))
    nodes, weights = _inner_time_nodes(om_max, t_window, points_per_period)
    sa = family_states(family_a, pot, nodes, cfg)
    sb = family_states(family_b, pot, nodes, cfg)
    pa = superpose(family_a, pot, nodes, states=sa, mass_power=mass_power_a)
    pb = superpose(family_b, pot, nodes, states=sb, mass_power=mass_power_b)
    g0 = family_a.rep.gamma0
    pag = np.conj(pa @ g0.T)        # (pa)†γ⁰ row-wise:  conj(pa)·γ⁰ᵀ
    integrand = np.einsum("tkd,tkd,k->t", pag, pb, family_a.k_weights)
    value = complex(np.sum(weights * integrand) / (2.0 * np.pi))
    if return_details:
        return value, {"t_window": t_window, "tail_estimate": tail_est,
                       "n_time_nodes": len(nodes)}
    return value


def weak_mop_symmetry_check(family_a, family_b, pot, t_window=None,
                            cfg: EvolutionConfig | None = None,
                            floor: float = 1e-30):
    """Relative residual of ⟨𝔭Tψ|𝔭φ⟩ = ⟨𝔭ψ|𝔭Tφ⟩."""
    lhs = spacetime_inner(family_a, family_b, pot, t_window, cfg,
                          mass_power_a=1)
    rhs = spacetime_inner(family_a, family_b, pot, t_window, cfg,
                          mass_power_b=1)
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + floor)


def strong_mop_ratio(family_a, family_b, pot, t_window=None,
                     cfg: EvolutionConfig | None = None):
    """|⟨𝔭ψ|𝔭φ⟩| / ∫ ‖ψ_m‖‖φ_m‖ dm   (≤ 2π in the vacuum)."""
    if not np.allclose(family_a.grid.nodes, family_b.grid.nodes):
        raise ValueError("families must share the mass grid")
    num = abs(spacetime_inner(family_a, family_b, pot, t_window, cfg))
    den = float(np.sum(family_a.grid.weights * family_a.mass_norms()
                       * family_b.mass_norms()))
    return num / max(den, 1e-300)


# ---------------------------------------------------------------------------
# Lemma-4.7-type distributional product identities, smeared in the masses
# and evaluated as matrix functions of a fixed timelike four-momentum p.
# ---------------------------------------------------------------------------

def _pole_refined_nodes(m_lo, m_hi, m_star, eps):
    """Composite GL nodes refined around m_star at scale eps."""
    lo = max(m_lo, m_star - 60.0 * eps)
    hi = min(m_hi, m_star + 60.0 * eps)
    xs, ws = [], []
    if lo > m_lo:
        x, w = composite_gauss(m_lo, lo, 40, 12)
        xs.append(x)
        ws.append(w)
    x, w = composite_gauss(lo, hi, 240, 12)
    xs.append(x)
    ws.append(w)
    if hi < m_hi:
        x, w = composite_gauss(hi, m_hi, 40, 12)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _minkowski_square(p4):
    p4 = np.asarray(p4, dtype=float)
    return float(p4[0] ** 2 - np.sum(p4[1:] ** 2))


def distributional_products_check(rep: SpinorRep, f_profile, g_profile,
                                  p_samples, m_lo: float, m_hi: float,
                                  guard: float = 0.05, sigma0: float = 0.01,
                                  eps0: float = 0.02, n_levels: int = 4):
    """Verify the three smeared fundamental-solution product identities.

    At each admissible four-momentum p (timelike, sqrt(p²) interior to the
    mass interval with a guard margin):

    (i)  ∬ f(m)g(m') k_m k_{m'} = ∫ f g p_m dm — Gaussian-regularized deltas
         with one σ-Richardson step against the exact on-shell right side;
         reported as a relative residual.
    (ii) k_m s_{m'} = PP/(m−m') k_m and (iii) s_m s_{m'} = PP/(m−m')(s_m −
         s_{m'}) + π² δ(m−m') p_m — all distributions carry their canonical
         Lorentzian iε regularization with a shared ε; the reported residual
         sequence is Richardson-extrapolated between consecutive ε levels
         and its fitted convergence order accompanies it.

    Returns {"results": [...], "excluded": [...]}.
    """
    eye = np.eye(rep.spinor_dim)
    results, excluded = [], []
    for p4 in p_samples:
        s = _minkowski_square(p4)
        if s <= 0:
            excluded.append({"p": list(np.asarray(p4, float)),
                             "reason": "not timelike"})
            continue
        m_star = np.sqrt(s)
        if not (m_lo + guard < m_star < m_hi - guard):
            excluded.append({"p": list(np.asarray(p4, float)),
                             "reason": "mass shell too close to interval edge"})
            continue
        ps = slash(rep, np.asarray(p4, dtype=float))
        sgn = 1.0 if p4[0] >= 0 else -1.0

        def pslash_m(x):
            return ps[None, :, :] + x[:, None, None] * eye

        # ---- identity (i): delta·delta against the on-shell reduction ----
        def delta_pair(sig):
            x, w = _pole_refined_nodes(m_lo, m_hi, m_star, sig)
            dd = np.exp(-(s - x ** 2) ** 2 / (2.0 * sig ** 2)) / \
                np.sqrt(2.0 * np.pi * sig ** 2)
            kf = np.einsum("n,nij->ij", w * f_profile(x) * dd, pslash_m(x))
            kg = np.einsum("n,nij->ij", w * g_profile(x) * dd, pslash_m(x))
            return kf @ kg            # ε(p⁰)² = 1

        lhs_i = (4.0 * delta_pair(sigma0 / 2) - delta_pair(sigma0)) / 3.0
        rhs_i = f_profile(m_star) * g_profile(m_star) * \
            (ps + m_star * eye) / (2.0 * m_star)
        res_i = float(np.max(np.abs(lhs_i - rhs_i))
                      / max(np.max(np.abs(rhs_i)), 1e-300))

        # ---- identities (ii) and (iii): shared-ε Lorentzian levels ----
        def level(eps):
            x, w = _pole_refined_nodes(m_lo, m_hi, m_star, eps)
            q = s - x ** 2
            lor = (eps / np.pi) / (q ** 2 + eps ** 2)
            pv = q / (q ** 2 + eps ** 2)
            mats = pslash_m(x)
            k_f = sgn * np.einsum("n,nij->ij", w * f_profile(x) * lor, mats)
            s_f = np.einsum("n,nij->ij", w * f_profile(x) * pv, mats)
            s_g = np.einsum("n,nij->ij", w * g_profile(x) * pv, mats)
            u = x[:, None] - x[None, :]
            pp = u / (u ** 2 + eps ** 2)
            inner_g = pp @ (w * g_profile(x))
            # (ii):  [∫f k_m][∫g s] vs ∫ f k_m ⟨PP g⟩
            lhs_ii = k_f @ s_g
            rhs_ii = sgn * np.einsum("n,nij->ij",
                                     w * f_profile(x) * lor * inner_g, mats)
            # (iii): [∫f s][∫g s] vs PP(s_m − s_m') + π²δ p_m
            lhs_iii = s_f @ s_g
            fg = (w * f_profile(x))[:, None] * (w * g_profile(x))[None, :] * pp
            t1 = np.einsum("nm,nij->ij", fg, pv[:, None, None] * mats)
            t2 = np.einsum("nm,mij->ij", fg, pv[:, None, None] * mats)
            dterm = np.pi ** 2 * f_profile(m_star) * g_profile(m_star) * \
                (ps + m_star * eye) / (2.0 * m_star)
            rhs_iii = t1 - t2 + dterm
            return lhs_ii, rhs_ii, lhs_iii, rhs_iii

        eps_levels = eps0 / 2.0 ** np.arange(n_levels + 1)
        vals = [level(e) for e in eps_levels]
        seq_ii, seq_iii = [], []
        for (l1, r1, l3, r3), (l2, r2, l4, r4) in zip(vals[:-1], vals[1:]):
            ext = lambda a, b: 2.0 * b - a
            seq_ii.append(float(np.max(np.abs(ext(l1, l2) - ext(r1, r2)))))
            seq_iii.append(float(np.max(np.abs(ext(l3, l4) - ext(r3, r4)))))
        ords = {}
        for name, seq in (("ii", seq_ii), ("iii", seq_iii)):
            order, _ = loglog_slope(eps_levels[1:], np.asarray(seq))
            ords[name] = order
        results.append({"p": list(np.asarray(p4, float)), "m_star": float(m_star),
                        "residual_i": res_i,
                        "residuals_ii": seq_ii, "order_ii": ords["ii"],
                        "residuals_iii": seq_iii, "order_iii": ords["iii"],
                        "eps_levels": list(eps_levels[1:])})
    return {"results": results, "excluded": excluded}


# ---------------------------------------------------------------------------
# Sobolev growth of mass derivatives (Appendix-type bound)
# ---------------------------------------------------------------------------

def sobolev_growth_check(family: MassFamily, pot, a: int, b: int, time_grid,
                         cfg: EvolutionConfig | None = None,
                         fit_t_min: float = 10.0, node_index=None):
    """Growth in t of ‖∂_m^b ψ_m|_t‖_{W^{a,2}} at a central mass node.

    Mass derivatives by spectral differentiation on the Gauss grid; the
    W^{a,2} weight is (1+|k|²)^a per mode.  Returns the fitted growth
    exponent, the constant C in
    ‖∂_m^b ψ|_t‖ ≤ C (1+|t|^b) Σ_{p≤b} ‖∂_m^p ψ|_0‖, and the norm table.
    """
    if not (0 <= a <= 2 and 0 <= b <= 2):
        raise ValueError("a and b up to 2 are supported")
    times = np.asarray(time_grid, dtype=float)
    states = family_states(family, pot, times, cfg)
    d_mat = family.grid.diff_matrix()
    if node_index is None:
        node_index = int(np.argmin(np.abs(family.grid.nodes
                                          - family.grid.center)))
    wgt = (1.0 + np.sum(family.k_points ** 2, axis=-1)) ** a * family.k_weights

    def w_norm(block):
        # block (..., n_k, d)
        return np.sqrt(np.einsum("...kd,k->...", np.abs(block) ** 2, wgt).real)

    db = np.linalg.matrix_power(d_mat, b)
    deriv = np.einsum("im,tmkd->tikd", db, states)[:, node_index]
    norms = w_norm(deriv)
    denom = 0.0
    anchor = family.data[None, ...]
    for p in range(b + 1):
        dp = np.linalg.matrix_power(d_mat, p)
        denom += w_norm(np.einsum("im,tmkd->tikd", dp, anchor)[0, node_index])
    rel = np.abs(times - family.t_anchor)
    c_fit = float(np.max(norms / ((1.0 + rel ** b) * max(denom, 1e-300))))
    mask = rel >= fit_t_min
    if b == 0:
        # constant norms: report the measured drift exponent (≈ 0)
        exponent, _ = loglog_slope(rel[mask], np.maximum(norms[mask], 1e-300))
    else:
        exponent, _ = loglog_slope(rel[mask], norms[mask])
    return {"a": a, "b": b, "times": times, "norms": norms,
            "exponent": float(exponent), "c_fit": c_fit,
            "node_mass": float(family.grid.nodes[node_index])}
