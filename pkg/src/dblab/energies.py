"""Conserved functionals and Fourier-defined modified energies.

Plain functionals (coefficient convention c_k = (1/L) Int u exp(-i xi_k x)):

    M(u)  = L sum |c_k|^2
    H(u)  = (1/2) L sum |omega(xi)/xi| |c_k|^2 + (1/3) Int u^3 dx

Modified energy at regularity s with cutoff N0 (nonhomogeneous ladder,
P_1 = P_{<=1}):

    E_N(u) = (1/2) ||P_N u||^2                    for N <= N0
           = (1/2) ||P_N u||^2 + E1_N(u)          for N >  N0   (c = 1)
    E^s(u, N0) = sum_{N >= 1} <N>^{2s} |E_N(u)|

with the cubic corrector (L^2-normalized triple sum, k1 = 0 excluded,
resonance guard |Omega_2| < 1e-10 |xi1| N^alpha counted and skipped)

    E1_N(u) = L^2 sum_{k1,k2} (chi1/Omega_2)(xi1,xi2) xi1
              u^{<<N}(xi1) u^{~N}(xi2) u^{~N}(-xi1-xi2).

Difference energy for w = u - v, z = u + v at regularity sigma
(homogeneous ladder, weight <1/N>^2 <N>^{2 sigma}, c~1 = c~2 = -1):

    E~_N = (1/2)||P_N w||^2 - E~1_N(z, w) - E~2_N(z, w)   for N > N0,
    chi~1 = -(1/2) <1/N>^2 chi1,     applied to  (z_<<N, w_~N, w_~N),
    chi~2 = <1/N>^2 (<N>/N)^{2 sigma} phi_N^2(xi1+xi2), weight (xi1+xi2),
            applied to  (w_<<N, z_~N, w_~N).

Both coercivity checks realize the lemmas' "N0 large enough" by a doubling
search with reported margins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dyadic import DyadicLadder, lessless_multiplier, phi_n, tilde_phi_n
from .errors import ConfigurationError
from .multipliers import chi1_kernel, corrector_weight
from .resonance import omega2
from .spectral import Field, dealiased_square, l2_inner
from .symbols import check_hyp2, lambda_half_multiplier, lwp_threshold

__all__ = [
    "mass",
    "hamiltonian",
    "band_energy",
    "corrector_term",
    "corrector_rate",
    "corrector_linear_rate",
    "modified_energy",
    "EnergyReport",
    "coercivity_check",
    "CoercivityResult",
    "difference_corrector1",
    "difference_corrector2",
    "difference_energy",
    "DifferenceEnergyReport",
    "difference_coercivity_check",
    "sigma_window",
    "check_sigma",
]


def mass(f: Field) -> float:
    """M(u) = Int u^2 dx = L sum |c_k|^2."""
    return float(f.grid.length * np.sum(np.abs(f.coeffs) ** 2))


def hamiltonian(f: Field, sym) -> float:
    """(1/2) Int |Lambda^{alpha/2} u|^2 + (1/3) Int u^3, cubic part dealiased."""
    sup = check_hyp2(sym)
    if not np.isfinite(sup):
        raise ConfigurationError(f"{sym.kind}: low-frequency bound fails, no Hamiltonian")
    if sym.kind == "pure_power":
        lam2 = lambda xi: np.abs(xi) ** sym.alpha
    else:
        lam_half = lambda_half_multiplier(sym)
        lam2 = lambda xi: lam_half(xi) ** 2
    xi = f.grid.frequencies
    quad = 0.5 * f.grid.length * float(np.sum(lam2(xi) * np.abs(f.coeffs) ** 2))
    cubic = l2_inner(f, dealiased_square(f)) / 3.0
    return quad + cubic


def band_energy(f: Field, N: float, ladder: DyadicLadder) -> float:
    """(1/2) ||P_N f||^2 with the ladder's weight at scale N."""
    w = ladder.weight(f.grid.frequencies, N)
    return 0.5 * f.grid.length * float(np.sum(np.abs(w * f.coeffs) ** 2))


# -- corrector triple sums -----------------------------------------------------

def _corrector_bands(grid, N: float):
    xi = grid.frequencies
    k = grid.wavenumbers
    mlow = lessless_multiplier(xi, N)
    tsim = tilde_phi_n(xi, N)
    i1 = np.where((mlow > 0.0) & (k != 0))[0]
    i2 = np.where(tsim > 0.0)[0]
    return xi, k, mlow, tsim, i1, i2


def _closing_coeffs(grid, coeffs, K3):
    """Coefficients at wavenumbers K3 (0 for modes beyond the grid band)."""
    n = grid.n
    inside = np.abs(K3) <= n // 2 - 1
    idx = np.where(K3 >= 0, K3, n + K3)
    out = np.zeros(K3.shape, dtype=complex)
    out[inside] = coeffs[idx[inside]]
    return out, inside


def _triple_sum(grid, N, weight_x1_factor, weight_fn, slot_mults, ca, cb, cc):
    """Generic guarded corrector sum

        L^2 sum_{k1 in <<N, k1 != 0; k2 in ~N} W(xi1, xi2) * factor(xi1, xi2)
            * m1(xi1) ca_{k1} * m2(xi2) cb_{k2} * m3(xi3) cc_{k3},  k3 = -k1-k2,

    where weight_fn returns (values, guard_mask).  Returns (value, guards).
    """
    xi, k, mlow, tsim, i1, i2 = _corrector_bands(grid, N)
    if len(i1) == 0 or len(i2) == 0:
        return 0.0, 0
    x1 = xi[i1]
    x2 = xi[i2]
    X1 = x1[:, None]
    X2 = x2[None, :]
    K3 = -(k[i1][:, None] + k[i2][None, :])
    C3, inside = _closing_coeffs(grid, cc, K3)
    X3 = 2.0 * np.pi * K3 / grid.length
    W, guard = weight_fn(X1, X2)
    m1, m2, m3 = slot_mults
    term = (
        W
        * weight_x1_factor(X1, X2)
        * (m1(x1) * ca[i1])[:, None]
        * (m2(x2) * cb[i2])[None, :]
        * (m3(X3) * C3)
    )
    total = complex(grid.length**2 * term.sum())
    return total, int(np.count_nonzero(guard & inside))


def corrector_term(f: Field, sym, N: float, s: float):
    """E1_N(u); returns (value, guard_skips).  Real for real fields."""
    grid = f.grid
    mlow = lambda x: lessless_multiplier(x, N)
    tsim = lambda x: tilde_phi_n(x, N)
    val, guards = _triple_sum(
        grid,
        N,
        lambda x1, x2: x1,
        lambda x1, x2: corrector_weight(sym, x1, x2, N, s),
        (mlow, tsim, tsim),
        f.coeffs,
        f.coeffs,
        f.coeffs,
    )
    return float(np.real(val)), guards


def corrector_rate(u: Field, dudt: Field, sym, N: float, s: float) -> float:
    """d/dt E1_N(u(t)) assembled by the product rule from du/dt."""
    grid = u.grid
    mlow = lambda x: lessless_multiplier(x, N)
    tsim = lambda x: tilde_phi_n(x, N)
    wfn = lambda x1, x2: corrector_weight(sym, x1, x2, N, s)
    xf = lambda x1, x2: x1
    slots = (mlow, tsim, tsim)
    total = 0.0 + 0.0j
    cu, cd = u.coeffs, dudt.coeffs
    for combo in ((cd, cu, cu), (cu, cd, cu), (cu, cu, cd)):
        val, _ = _triple_sum(grid, N, xf, wfn, slots, *combo)
        total += val
    return float(np.real(total))


def corrector_linear_rate(u: Field, sym, N: float, s: float) -> float:
    """Linear-flow part of d/dt E1_N via the exact resonance cancellation:
    i L^2 sum chi1(xi1,xi2) xi1 u^{<<N} u^{~N} u^{~N} (off the guard set)."""
    grid = u.grid
    mlow = lambda x: lessless_multiplier(x, N)
    tsim = lambda x: tilde_phi_n(x, N)

    def wfn(x1, x2):
        _, guard = corrector_weight(sym, x1, x2, N, s)
        vals = np.where(guard, 0.0, 1j * chi1_kernel(x1, x2, N, s))
        return vals, guard

    val, _ = _triple_sum(
        grid, N, lambda x1, x2: x1, wfn, (mlow, tsim, tsim),
        u.coeffs, u.coeffs, u.coeffs,
    )
    return float(np.real(val))


# -- modified energy -----------------------------------------------------------

@dataclass(frozen=True)
class EnergyReport:
    """Conserved quantities and the modified energy at one time."""

    t: float
    mass: float
    hamiltonian: float
    hs_norm: float
    modified: float
    s: float
    n0: float
    per_scale: dict = field(default_factory=dict)   # N -> <N>^{2s} |E_N|
    corrector_share: float = 0.0                    # sum <N>^{2s} |E1_N|
    guard_skips: int = 0

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "t": self.t,
                "mass": self.mass,
                "hamiltonian": self.hamiltonian,
                "hs_norm": self.hs_norm,
                "modified": self.modified,
                "s": self.s,
                "n0": self.n0,
                "per_scale": {f"{N:g}": v for N, v in self.per_scale.items()},
                "corrector_share": self.corrector_share,
                "guard_skips": self.guard_skips,
            }
        )


def modified_energy(f: Field, sym, s: float, N0: float, t: float = 0.0) -> EnergyReport:
    """E^s(u, N0) over the nonhomogeneous ladder, with per-scale breakdown."""
    if N0 < 2:
        raise ConfigurationError(f"N0 must be >= 2, got {N0}")
    from .spectral import sobolev_norm  # local import to avoid cycle at module load

    ladder = DyadicLadder.for_grid(f.grid, homogeneous=False)
    per_scale = {}
    corr_share = 0.0
    guards = 0
    total = 0.0
    for N in ladder.scales:
        bracket = (1.0 + N * N) ** s
        e_n = band_energy(f, N, ladder)
        if N > N0:
            corr, g = corrector_term(f, sym, N, s)
            guards += g
            corr_share += bracket * abs(corr)
            e_n = e_n + corr
        contribution = bracket * abs(e_n)
        per_scale[N] = contribution
        total += contribution
    return EnergyReport(
        t=t,
        mass=mass(f),
        hamiltonian=hamiltonian(f, sym),
        hs_norm=sobolev_norm(f, s),
        modified=total,
        s=s,
        n0=N0,
        per_scale=per_scale,
        corrector_share=corr_share,
        guard_skips=guards,
    )


@dataclass(frozen=True)
class CoercivityResult:
    passed: bool
    initial_n0: float
    passing_n0: float | None
    doublings: int
    lhs: float
    rhs: float
    history: tuple

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_json(self) -> str:
        return json.dumps(
            {
                "passed": self.passed,
                "initial_n0": self.initial_n0,
                "passing_n0": self.passing_n0,
                "doublings": self.doublings,
                "lhs": self.lhs,
                "rhs": self.rhs,
                "history": [list(h) for h in self.history],
            },
            indent=2,
        )


def _coercivity_sides(f, sym, s, N0):
    ladder = DyadicLadder.for_grid(f.grid, homogeneous=False)
    plain = 0.0
    tail = 0.0
    es = 0.0
    for N in ladder.scales:
        bracket = (1.0 + N * N) ** s
        e_n = band_energy(f, N, ladder)
        plain += bracket * e_n
        if N > N0:
            tail += 2.0 * bracket * e_n  # <N>^{2s} ||P_N u||^2
            corr, _ = corrector_term(f, sym, N, s)
            e_n = e_n + corr
        es += bracket * abs(e_n)
    return abs(es - plain), tail / 8.0


def coercivity_check(f: Field, sym, s: float, N0: float, max_doublings: int = 10) -> CoercivityResult:
    """|E^s - (1/2) sum <N>^{2s}||P_N u||^2| <= (1/8) sum_{N>N0} <N>^{2s}||P_N u||^2,
    doubling N0 until the inequality holds (at most `max_doublings` times)."""
    if not s > lwp_threshold(sym.alpha):
        raise ConfigurationError(
            f"coercivity check needs s > 3/2 - 5 alpha/4 = {lwp_threshold(sym.alpha)}, got s = {s}"
        )
    history = []
    n0 = float(N0)
    for d in range(max_doublings + 1):
        lhs, rhs = _coercivity_sides(f, sym, s, n0)
        history.append((n0, lhs, rhs))
        if lhs <= rhs or (lhs == 0.0 and rhs == 0.0):
            return CoercivityResult(True, float(N0), n0, d, lhs, rhs, tuple(history))
        n0 *= 2.0
    lhs, rhs = history[-1][1], history[-1][2]
    return CoercivityResult(False, float(N0), None, max_doublings, lhs, rhs, tuple(history))


# -- difference energy ---------------------------------------------------------

def sigma_window(alpha: float, s: float) -> tuple:
    """Admissible (lo, hi) for the difference regularity: lo open, hi closed."""
    return (-0.5 + alpha / 4.0, min(0.0, s - 2.0 + 1.5 * alpha))


def check_sigma(alpha: float, s: float, sigma: float):
    lo, hi = sigma_window(alpha, s)
    if not (lo < sigma <= hi):
        raise ConfigurationError(
            f"sigma = {sigma} outside the admissible window ({lo}, {hi}] "
            f"for alpha = {alpha}, s = {s}"
        )


def difference_corrector1(z: Field, w: Field, sym, N: float, sigma: float):
    """E~1_N(z, w) with chi~1 = -(1/2) <1/N>^2 chi1 in the low slot z."""
    pref = -0.5 * (1.0 + N**-2)
    mlow = lambda x: lessless_multiplier(x, N)
    tsim = lambda x: tilde_phi_n(x, N)
    val, guards = _triple_sum(
        z.grid,
        N,
        lambda x1, x2: x1,
        lambda x1, x2: corrector_weight(sym, x1, x2, N, sigma),
        (mlow, tsim, tsim),
        z.coeffs,
        w.coeffs,
        w.coeffs,
    )
    return pref * float(np.real(val)), guards


def difference_corrector2(z: Field, w: Field, sym, N: float, sigma: float):
    """E~2_N(z, w): chi~2 = <1/N>^2 (<N>/N)^{2 sigma} phi_N^2(xi1+xi2), weight
    (xi1+xi2), slots (w_<<N, z_~N, w_~N)."""
    pref = (1.0 + N**-2) * (np.sqrt(1.0 + N * N) / N) ** (2.0 * sigma)

    def wfn(x1, x2):
        om2 = omega2(sym, x1, x2)
        guard = (np.abs(om2) < 1e-10 * np.abs(x1) * N**sym.alpha) | (x1 == 0.0)
        safe = np.where(guard, 1.0, om2)
        vals = np.where(guard, 0.0, phi_n(x1 + x2, N) ** 2 / safe)
        return vals, guard

    mlow = lambda x: lessless_multiplier(x, N)
    tsim = lambda x: tilde_phi_n(x, N)
    val, guards = _triple_sum(
        w.grid,
        N,
        lambda x1, x2: x1 + x2,
        wfn,
        (mlow, tsim, tsim),
        w.coeffs,
        z.coeffs,
        w.coeffs,
    )
    return pref * float(np.real(val)), guards


@dataclass(frozen=True)
class DifferenceEnergyReport:
    t: float
    sigma: float
    n0: float
    weighted_norm: float       # sum <1/N>^2 <N>^{2 sigma} ||P_N w||^2
    modified: float            # E~^sigma(z, w, N0)
    per_scale: dict = field(default_factory=dict)
    corrector1_share: float = 0.0
    corrector2_share: float = 0.0
    guard_skips: int = 0

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "t": self.t,
                "sigma": self.sigma,
                "n0": self.n0,
                "weighted_norm": self.weighted_norm,
                "modified": self.modified,
                "per_scale": {f"{N:g}": v for N, v in self.per_scale.items()},
                "corrector1_share": self.corrector1_share,
                "corrector2_share": self.corrector2_share,
                "guard_skips": self.guard_skips,
            }
        )


def _bar_bracket(N: float, sigma: float) -> float:
    return (1.0 + N**-2) * (1.0 + N * N) ** sigma


def difference_energy(
    z: Field, w: Field, sym, sigma: float, N0: float, s: float | None = None, t: float = 0.0
) -> DifferenceEnergyReport:
    """E~^sigma(z, w, N0) over the homogeneous ladder with <1/N>^2 <N>^{2s} weights.

    When `s` is given the sigma window for (alpha, s) is enforced.
    """
    if s is not None:
        check_sigma(sym.alpha, s, sigma)
    ladder = DyadicLadder.for_grid(w.grid, homogeneous=True)
    per_scale = {}
    c1_share = 0.0
    c2_share = 0.0
    guards = 0
    total = 0.0
    wnorm = 0.0
    for N in ladder.scales:
        br = _bar_bracket(N, sigma)
        e_n = band_energy(w, N, ladder)
        wnorm += br * 2.0 * e_n
        if N > N0:
            c1, g1 = difference_corrector1(z, w, sym, N, sigma)
            c2, g2 = difference_corrector2(z, w, sym, N, sigma)
            guards += g1 + g2
            c1_share += br * abs(c1)
            c2_share += br * abs(c2)
            e_n = e_n - c1 - c2  # c~1 = c~2 = -1
        contribution = br * abs(e_n)
        per_scale[N] = contribution
        total += contribution
    return DifferenceEnergyReport(
        t=t,
        sigma=sigma,
        n0=N0,
        weighted_norm=wnorm,
        modified=total,
        per_scale=per_scale,
        corrector1_share=c1_share,
        corrector2_share=c2_share,
        guard_skips=guards,
    )


def difference_coercivity_check(
    z: Field, w: Field, sym, sigma: float, N0: float, max_doublings: int = 10
) -> CoercivityResult:
    """Difference-energy coercivity with the <1/N>^2 <N>^{2 sigma} weights."""
    ladder = DyadicLadder.for_grid(w.grid, homogeneous=True)

    def sides(n0):
        plain = 0.0
        tail = 0.0
        es = 0.0
        for N in ladder.scales:
            br = _bar_bracket(N, sigma)
            e_n = band_energy(w, N, ladder)
            plain += br * e_n
            if N > n0:
                tail += 2.0 * br * e_n
                c1, _ = difference_corrector1(z, w, sym, N, sigma)
                c2, _ = difference_corrector2(z, w, sym, N, sigma)
                e_n = e_n - c1 - c2
            es += br * abs(e_n)
        return abs(es - plain), tail / 8.0

    history = []
    n0 = float(N0)
    for d in range(max_doublings + 1):
        lhs, rhs = sides(n0)
        history.append((n0, lhs, rhs))
        if lhs <= rhs or (lhs == 0.0 and rhs == 0.0):
            return CoercivityResult(True, float(N0), n0, d, lhs, rhs, tuple(history))
        n0 *= 2.0
    lhs, rhs = history[-1][1], history[-1][2]
    return CoercivityResult(False, float(N0), None, max_doublings, lhs, rhs, tuple(history))
