"""Resonance functions of order 2 and 3 and their comparability laws.

Omega_2(xi1, xi2) = omega(xi1+xi2) - omega(xi1) - omega(xi2)
Omega_3(xi1, xi2, xi3) = omega(xi1+xi2+xi3) - omega(xi1) - omega(xi2) - omega(xi3)

Empirically verified laws (reported as [min, max] sample ratios, never with
asserted constants):

* |Omega_2| ~ |xi_min| |xi_max|^alpha   over {xi1, xi2, xi3 = -(xi1+xi2)};
* |Omega_3| ~ |xi_thd| |xi_max|^alpha   when |xi_min| << |xi_thd| over the
  four frequencies {xi1, xi2, xi3, xi4 = -(xi1+xi2+xi3)}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .symbols import DispersionSymbol

__all__ = [
    "omega2",
    "omega3",
    "ResonanceSample",
    "ComparabilityReport",
    "verify_res2",
    "verify_res3",
]


def omega2(sym: DispersionSymbol, xi1, xi2):
    # grouped so that swapping the arguments is bit-exact (float + commutes)
    return sym.omega(np.asarray(xi1) + np.asarray(xi2)) - (sym.omega(xi1) + sym.omega(xi2))


def omega3(sym: DispersionSymbol, xi1, xi2, xi3):
    # canonical (sorted) accumulation: exact symmetry under argument permutations
    xs = np.sort(np.stack(np.broadcast_arrays(
        np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float),
        np.asarray(xi3, dtype=float))), axis=0)
    total = (xs[0] + xs[1]) + xs[2]
    ws = np.sort(np.stack([sym.omega(xs[0]), sym.omega(xs[1]), sym.omega(xs[2])]), axis=0)
    return sym.omega(total) - ((ws[0] + ws[1]) + ws[2])


@dataclass(frozen=True)
class ResonanceSample:
    """One evaluated interaction with its comparator ratio."""

    frequencies: tuple
    closing: float
    magnitudes: tuple  # sorted ascending over all participating frequencies
    value: float
    ratio: float


@dataclass(frozen=True)
class ComparabilityReport:
    order: int
    kind: str
    alpha: float
    n_samples: int
    ratio_min: float
    ratio_max: float
    rejected: int
    seed: int
    scale_range: tuple
    separation: float | None = None

    @property
    def spread(self) -> float:
        return self.ratio_max / self.ratio_min

    def to_json(self) -> str:
        return json.dumps(
            {
                "order": self.order,
                "kind": self.kind,
                "alpha": self.alpha,
                "n_samples": self.n_samples,
                "ratio_min": self.ratio_min,
                "ratio_max": self.ratio_max,
                "rejected": self.rejected,
                "seed": self.seed,
                "scale_range": list(self.scale_range),
                "separation": self.separation,
            },
            indent=2,
        )


def _min_scale(sym: DispersionSymbol, scale_range) -> float:
    lo = float(scale_range[0])
    if sym.kind != "pure_power":
        lo = max(lo, sym.xi0)  # comparability only claimed above xi0
    return lo


def verify_res2(
    sym: DispersionSymbol,
    n_samples: int = 10**5,
    scale_range=(1.0, 1e3),
    seed: int = 0,
    signs: str = "mixed",
) -> ComparabilityReport:
    """Sample ratio |Omega_2| / (|xi_min| |xi_max|^alpha) over log-uniform draws.

    Draws with |xi1+xi2| below the admissible floor are resampled and counted.
    ``signs='same'`` restricts to same-sign pairs (closed-form regime for
    alpha = 1).
    """
    lo = _min_scale(sym, scale_range)
    hi = float(scale_range[1])
    if not (hi > lo > 0):
        raise ConfigurationError(f"bad scale range ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    ratios = []
    rejected = 0
    floor = sym.xi0 if sym.kind != "pure_power" else lo
    remaining = n_samples
    while remaining > 0:
        m = max(remaining, 1024)
        mag = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(m, 2)))
        if signs == "same":
            sgn = np.repeat(rng.choice([-1.0, 1.0], size=(m, 1)), 2, axis=1)
        else:
            sgn = rng.choice([-1.0, 1.0], size=(m, 2))
        xi = mag * sgn
        xi3 = -(xi[:, 0] + xi[:, 1])
        ok = np.abs(xi3) >= floor
        rejected += int((~ok).sum())
        x1, x2, x3 = xi[ok, 0], xi[ok, 1], xi3[ok]
        val = omega2(sym, x1, x2)
        mags = np.abs(np.stack([x1, x2, x3]))
        ratios.append(np.abs(val) / (mags.min(axis=0) * mags.max(axis=0) ** sym.alpha))
        remaining -= int(ok.sum())
    r = np.concatenate(ratios)[:n_samples]
    return ComparabilityReport(
        order=2,
        kind=sym.kind,
        alpha=sym.alpha,
        n_samples=n_samples,
        ratio_min=float(r.min()),
        ratio_max=float(r.max()),
        rejected=rejected,
        seed=seed,
        scale_range=(lo, hi),
    )


def verify_res3(
    sym: DispersionSymbol,
    n_samples: int = 10**5,
    scale_range=(1.0, 1e3),
    separation: float = 32.0,
    seed: int = 0,
) -> ComparabilityReport:
    """Sample ratio |Omega_3| / (|xi_thd| |xi_max|^alpha) under the separation
    constraint |xi_min| <= |xi_thd| / separation (min/thd over all four
    frequencies).  Construction draws two large and one small magnitude; draws
    violating the constraint after closing are rejected and counted.
    """
    if separation < 32.0:
        raise ConfigurationError(f"separation must be >= 32, got {separation}")
    lo = _min_scale(sym, scale_range)
    hi = float(scale_range[1])
    if hi <= lo * separation:
        raise ConfigurationError(
            f"scale range ({lo}, {hi}) cannot honor separation {separation}"
        )
    rng = np.random.default_rng(seed)
    ratios = []
    rejected = 0
    remaining = n_samples
    while remaining > 0:
        m = max(remaining, 1024)
        big = np.exp(rng.uniform(np.log(lo * separation), np.log(hi), size=(m, 2)))
        cap = big.min(axis=1) / separation
        small = np.exp(rng.uniform(np.log(lo), np.log(cap), size=m))
        mags = np.stack([small, big[:, 0], big[:, 1]], axis=1)
        perm = rng.permuted(np.tile(np.arange(3), (m, 1)), axis=1)
        mags = np.take_along_axis(mags, perm, axis=1)
        xi = mags * rng.choice([-1.0, 1.0], size=(m, 3))
        xi4 = -xi.sum(axis=1)
        all_mags = np.sort(np.abs(np.concatenate([xi, xi4[:, None]], axis=1)), axis=1)
        ok = (all_mags[:, 0] * separation <= all_mags[:, 1]) & (all_mags[:, 0] > 0)
        if sym.kind != "pure_power":
            ok &= all_mags[:, 0] >= sym.xi0
        rejected += int((~ok).sum())
        x = xi[ok]
        val = omega3(sym, x[:, 0], x[:, 1], x[:, 2])
        ratios.append(np.abs(val) / (all_mags[ok, 1] * all_mags[ok, 3] ** sym.alpha))
        remaining -= int(ok.sum())
    r = np.concatenate(ratios)[:n_samples]
    return ComparabilityReport(
        order=3,
        kind=sym.kind,
        alpha=sym.alpha,
        n_samples=n_samples,
        ratio_min=float(r.min()),
        ratio_max=float(r.max()),
        rejected=rejected,
        seed=seed,
        scale_range=(lo, hi),
        separation=separation,
    )
