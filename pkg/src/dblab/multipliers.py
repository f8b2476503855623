"""Multilinear Fourier multiplier operators Pi^n_chi (n = 2, 3).

On the periodic grid the bilinear operator acts at coefficient level as

    Pi^2_chi(f, g)_m = sum_{k1 + k2 = m} chi(xi_{k1}, xi_{k2}) a_{k1} b_{k2},

by direct O(n^2) summation (general symbols do not factor through FFTs);
the trilinear version is the O(n^3) analogue.  Output modes outside the grid
band are dropped, inputs are truncated to |k| <= 512 (n=2) / |k| <= 128
(n=3) retained modes.

Also here: the Marcinkiewicz-condition checker (per-variable normalized
derivative bounds, sampled over dyadic boxes) and the concrete symbols used
by the modified energies:

* the commutator symbol  chi(xi1, xi2) = -i Int_0^1 phi'((theta xi1 + xi2)/N) dtheta,
  which makes P_N(u_{<<N} u) = u_{<<N} u_N + N^{-1} Pi^2_chi(dx u_{<<N}, u) exact;
* the corrector symbol chi1 built from it;
* chi1 / Omega_2 with a guarded resonance denominator.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .dyadic import LESSLESS_FACTOR, phi_n, phi_prime, tilde_phi_n
from .errors import ConfigurationError, DomainError
from .resonance import omega2
from .spectral import Field

__all__ = [
    "MultiplierSymbol",
    "MarcinkiewiczReport",
    "constant_symbol",
    "tensor_cutoff_symbol",
    "symbol_product",
    "symbol_swap_last",
    "symbol_permute_inputs",
    "symbol_chi_commutator",
    "symbol_chi1",
    "symbol_chi1_over_omega2",
    "apply_pi2",
    "apply_pi3",
    "gt_functional",
    "check_marcinkiewicz",
    "fd_partial",
]

PI2_RETAINED = 512
PI3_RETAINED = 128
MARCINKIEWICZ_WINDOW = 1e3

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_GL_THETA = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


@dataclass(frozen=True)
class MultiplierSymbol:
    """A sampled or closed-form multiplier chi(xi_1, ..., xi_arity).

    ``evaluate`` maps broadcastable frequency arrays to complex values.
    ``derivative`` (optional) maps (beta, *xis) to the mixed partial; when
    absent the checker falls back to 4th-order centered differences.
    ``support`` (optional) maps frequency arrays to a boolean admissibility
    mask used for declared-band enforcement.
    """

    arity: int
    evaluate: callable = field(repr=False)
    name: str = "chi"
    derivative: callable | None = field(default=None, repr=False)
    support: callable | None = field(default=None, repr=False)

    def __call__(self, *xis):
        if len(xis) != self.arity:
            raise ConfigurationError(
                f"{self.name}: expected {self.arity} frequency arguments, got {len(xis)}"
            )
        return self.evaluate(*xis)


def constant_symbol(value=1.0, arity: int = 2, name: str = "const") -> MultiplierSymbol:
    def ev(*xis):
        return np.full(np.broadcast(*xis).shape, complex(value))

    return MultiplierSymbol(arity, ev, name)


def tensor_cutoff_symbol(scales, name: str | None = None) -> MultiplierSymbol:
    """phi_{N_1}(xi_1) * ... * phi_{N_n}(xi_n)."""
    scales = tuple(float(N) for N in scales)

    def ev(*xis):
        acc = np.ones(np.broadcast(*xis).shape)
        for x, N in zip(xis, scales):
            acc = acc * phi_n(x, N)
        return acc.astype(complex)

    return MultiplierSymbol(len(scales), ev, name or f"phi_tensor{scales}")


def symbol_product(a: MultiplierSymbol, b: MultiplierSymbol) -> MultiplierSymbol:
    if a.arity != b.arity:
        raise ConfigurationError("cannot multiply symbols of different arity")
    return MultiplierSymbol(
        a.arity, lambda *x: a.evaluate(*x) * b.evaluate(*x), f"{a.name}*{b.name}"
    )


def symbol_swap_last(chi: MultiplierSymbol) -> MultiplierSymbol:
    """Duality relabeling: chi~(xi_1,...,xi_n) = chi(-xi_1-...-xi_n, xi_2,...).

    Realizes Int Pi_chi(u1,...,un) u_{n+1} = Int Pi_chi~(u_{n+1},u2,...) u1.
    """

    def ev(*xis):
        first = -sum(np.asarray(x) for x in xis)
        return chi.evaluate(first, *xis[1:])

    return MultiplierSymbol(chi.arity, ev, chi.name + "~")


def symbol_permute_inputs(chi: MultiplierSymbol, perm) -> MultiplierSymbol:
    """chi_sigma(xi_1,...,xi_n) = chi(xi_{perm[0]}, ..., xi_{perm[n-1]})."""
    perm = tuple(perm)

    def ev(*xis):
        return chi.evaluate(*(xis[p] for p in perm))

    return MultiplierSymbol(chi.arity, ev, chi.name + f"_sigma{perm}")


# -- concrete symbols ----------------------------------------------------------

def commutator_kernel(x1, x2, N: float) -> np.ndarray:
    """-i Int_0^1 phi'((theta xi1 + xi2)/N) dtheta via 32-point Gauss-Legendre."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    acc = np.zeros(np.broadcast(x1, x2).shape)
    for t, w in zip(_GL_THETA, _GL_W):
        acc = acc + w * phi_prime((t * x1 + x2) / N)
    return -1j * acc


def symbol_chi_commutator(N: float) -> MultiplierSymbol:
    if N <= 0 or 2.0 ** round(np.log2(N)) != N:
        raise ConfigurationError(f"N must be dyadic, got {N}")
    return MultiplierSymbol(2, lambda x1, x2: commutator_kernel(x1, x2, N), f"chi_comm[N={N:g}]")


def chi1_kernel(x1, x2, N: float, s: float) -> np.ndarray:
    """(<N>/N)^{2s} (phi_N(xi2) + 2i ((xi1+xi2)/N) chi(xi1,xi2) phi_~N(xi2)) phi_N(xi1+xi2)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    pref = (np.sqrt(1.0 + N * N) / N) ** (2.0 * s)
    tot = x1 + x2
    inner = phi_n(x2, N) + 2j * (tot / N) * commutator_kernel(x1, x2, N) * tilde_phi_n(x2, N)
    return pref * inner * phi_n(tot, N)


def symbol_chi1(N: float, s: float) -> MultiplierSymbol:
    if N <= 0 or 2.0 ** round(np.log2(N)) != N:
        raise ConfigurationError(f"N must be dyadic, got {N}")

    def supp(x1, x2):
        tot = np.abs(np.asarray(x1) + np.asarray(x2))
        return (tot >= N / 2.0) & (tot <= 2.0 * N)

    return MultiplierSymbol(
        2, lambda x1, x2: chi1_kernel(x1, x2, N, s), f"chi1[N={N:g},s={s:g}]", support=supp
    )


OMEGA2_GUARD = 1e-10


def corrector_weight(sym, x1, x2, N: float, s: float):
    """(chi1/Omega_2)(xi1, xi2) with the guarded denominator.

    Returns (values, guard_mask); guarded entries (|Omega_2| below
    1e-10 |xi1| N^alpha, including xi1 = 0) are set to 0.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    om2 = omega2(sym, x1, x2)
    # xi1 = 0 is dropped by convention (the integrand carries a xi1 factor)
    guard = (np.abs(om2) < OMEGA2_GUARD * np.abs(x1) * N**sym.alpha) | (x1 == 0.0)
    safe = np.where(guard, 1.0, om2)
    vals = np.where(guard, 0.0, chi1_kernel(x1, x2, N, s) / safe)
    return vals, guard


def symbol_chi1_over_omega2(sym, N: float, s: float) -> MultiplierSymbol:
    """chi1 / Omega_2 restricted to the high-low band.

    Declared band: |xi1| <= N/16 (support of the << multiplier) and
    |xi2| in [N/4, 4N] (the ~N band); evaluation outside raises DomainError.
    """
    if N <= 0 or 2.0 ** round(np.log2(N)) != N:
        raise ConfigurationError(f"N must be dyadic, got {N}")
    lo_band = N / (LESSLESS_FACTOR / 2.0)  # support edge of eta(32 xi / N)

    def supp(x1, x2):
        a1 = np.abs(np.asarray(x1, dtype=float))
        a2 = np.abs(np.asarray(x2, dtype=float))
        return (a1 <= lo_band * (1 + 1e-12)) & (a2 >= N / 4.0) & (a2 <= 4.0 * N)

    def ev(x1, x2):
        ok = supp(x1, x2)
        if not np.all(ok):
            bad = np.argwhere(~np.atleast_1d(ok))
            raise DomainError(
                f"chi1/Omega2[N={N:g}] evaluated outside its declared band "
                f"(first offender index {tuple(bad[0])})"
            )
        vals, _ = corrector_weight(sym, x1, x2, N, s)
        return vals

    return MultiplierSymbol(2, ev, f"chi1_over_omega2[N={N:g},s={s:g}]", support=supp)


# -- Pi operators --------------------------------------------------------------

def _retained_indices(f: Field, cap: int) -> np.ndarray:
    k = f.grid.wavenumbers
    keep = np.abs(k) <= min(cap, f.grid.n // 2 - 1)
    return np.where(keep)[0]


def apply_pi2(chi: MultiplierSymbol, f: Field, g: Field) -> Field:
    """Bilinear multiplier operator by direct frequency-sum evaluation."""
    if chi.arity != 2:
        raise ConfigurationError(f"apply_pi2 needs an arity-2 symbol, got {chi.arity}")
    if f.grid.n != g.grid.n or f.grid.length != g.grid.length:
        raise ConfigurationError("fields live on different grids")
    grid = f.grid
    i1 = _retained_indices(f, PI2_RETAINED)
    i2 = _retained_indices(g, PI2_RETAINED)
    # zero coefficients contribute nothing; skipping them keeps band-limited
    # slots cheap (chi is finite on its support, so no 0 * inf issues)
    if np.any(f.coeffs[i1]):
        i1 = i1[np.abs(f.coeffs[i1]) > 0]
    if np.any(g.coeffs[i2]):
        i2 = i2[np.abs(g.coeffs[i2]) > 0]
    k = grid.wavenumbers
    k1 = k[i1]
    k2 = k[i2]
    x1 = grid.frequencies[i1][:, None]
    x2 = grid.frequencies[i2][None, :]
    weights = np.asarray(chi.evaluate(x1, x2), dtype=complex)
    prod = weights * f.coeffs[i1][:, None] * g.coeffs[i2][None, :]
    ksum = k1[:, None] + k2[None, :]
    keep = np.abs(ksum) <= grid.n // 2 - 1
    out = np.zeros(grid.n, dtype=complex)
    idx = np.where(ksum >= 0, ksum, grid.n + ksum)
    np.add.at(out, idx[keep], prod[keep])
    return Field(grid, out)


def apply_pi3(chi: MultiplierSymbol, f: Field, g: Field, h: Field) -> Field:
    """Trilinear multiplier operator; inputs truncated to |k| <= 128."""
    if chi.arity != 3:
        raise ConfigurationError(f"apply_pi3 needs an arity-3 symbol, got {chi.arity}")
    if not (f.grid.n == g.grid.n == h.grid.n) or not (
        f.grid.length == g.grid.length == h.grid.length
    ):
        raise ConfigurationError("fields live on different grids")
    grid = f.grid
    idx = [_retained_indices(u, PI3_RETAINED) for u in (f, g, h)]
    # keep only modes carrying coefficients; the sums are exact either way
    idx = [
        i[np.abs(u.coeffs[i]) > 0] if np.any(u.coeffs[i]) else i[:0]
        for i, u in zip(idx, (f, g, h))
    ]
    if any(len(i) == 0 for i in idx):
        return Field(grid, np.zeros(grid.n, dtype=complex))
    k = grid.wavenumbers
    xi = grid.frequencies
    K1, K2, K3 = np.meshgrid(k[idx[0]], k[idx[1]], k[idx[2]], indexing="ij")
    X1, X2, X3 = np.meshgrid(xi[idx[0]], xi[idx[1]], xi[idx[2]], indexing="ij")
    weights = np.asarray(chi.evaluate(X1, X2, X3), dtype=complex)
    prod = (
        weights
        * f.coeffs[idx[0]][:, None, None]
        * g.coeffs[idx[1]][None, :, None]
        * h.coeffs[idx[2]][None, None, :]
    )
    ksum = K1 + K2 + K3
    keep = np.abs(ksum) <= grid.n // 2 - 1
    out = np.zeros(grid.n, dtype=complex)
    pos = np.where(ksum >= 0, ksum, grid.n + ksum)
    np.add.at(out, pos[keep], prod[keep])
    return Field(grid, out)


def _spatial_pairing(pi_out: Field, last: Field) -> float:
    n = pi_out.grid.n
    rev = last.coeffs[(n - np.arange(n)) % n].copy()
    rev[n // 2] = 0.0
    return float(np.real(pi_out.grid.length * np.sum(pi_out.coeffs * rev)))


def gt_functional(chi: MultiplierSymbol, records, t: float) -> float:
    """Time-integrated pairing Int_0^t Int Pi^n_chi(u_1..u_n) u_{n+1} dx dt'.

    ``records`` is a sequence of n+1 TrajectoryRecords on one grid with one
    time sampling; trapezoidal quadrature up to the requested time.
    """
    if len(records) != chi.arity + 1:
        raise ConfigurationError(
            f"gt_functional needs {chi.arity + 1} records for arity {chi.arity}"
        )
    times = records[0].times
    for r in records[1:]:
        if len(r.times) != len(times) or np.any(r.times != times):
            raise ConfigurationError("records have mismatched time sampling")
        if r.grid.n != records[0].grid.n or r.grid.length != records[0].grid.length:
            raise ConfigurationError("records live on different grids")
    if not (times[0] <= t <= times[-1] + 1e-12):
        raise ConfigurationError(f"time {t} outside the record window")
    stop = int(np.searchsorted(times, t + 1e-12))
    if stop < 2:
        return 0.0
    apply_ = apply_pi2 if chi.arity == 2 else apply_pi3
    vals = []
    for j in range(stop):
        pi_out = apply_(chi, *(r.snapshots[j] for r in records[:-1]))
        vals.append(_spatial_pairing(pi_out, records[-1].snapshots[j]))
    trapz = getattr(np, "trapezoid", np.trapz)
    return float(trapz(vals, times[:stop]))


# -- Marcinkiewicz checker -----------------------------------------------------

def fd_partial(fn, beta, points, rel_step: float = 1e-3):
    """Mixed partial d^beta fn at `points` (tuple of arrays) by composing
    4th-order centered first-derivative stencils, one derivative at a time."""
    beta = tuple(int(b) for b in beta)
    if all(b == 0 for b in beta):
        return np.asarray(fn(*points), dtype=complex)
    i = next(j for j, b in enumerate(beta) if b > 0)
    lower = tuple(b - 1 if j == i else b for j, b in enumerate(beta))
    h = rel_step * np.maximum(np.abs(points[i]), 1e-6)

    def shifted(c):
        pts = tuple(p + c * h if j == i else p for j, p in enumerate(points))
        return fd_partial(fn, lower, pts, rel_step)

    return (-shifted(2.0) + 8.0 * shifted(1.0) - 8.0 * shifted(-1.0) + shifted(-2.0)) / (12.0 * h)


def dump_symbol_csv(chi: MultiplierSymbol, xi1, xi2, path):
    """Sample an arity-2 symbol on a (xi1, xi2) mesh to CSV for plotting."""
    if chi.arity != 2:
        raise ConfigurationError("CSV dumps are for arity-2 symbols")
    X1, X2 = np.meshgrid(np.asarray(xi1, float), np.asarray(xi2, float), indexing="ij")
    vals = np.asarray(chi.evaluate(X1, X2), dtype=complex)
    with open(path, "w") as fh:
        fh.write("xi1,xi2,re,im\n")
        for i in range(X1.shape[0]):
            for j in range(X1.shape[1]):
                fh.write(
                    f"{X1[i, j]:.17g},{X2[i, j]:.17g},"
                    f"{vals[i, j].real:.17g},{vals[i, j].imag:.17g}\n"
                )


@dataclass(frozen=True)
class MarcinkiewiczReport:
    """Max normalized derivatives |d^beta chi| * prod |xi_i|^{beta_i} per beta."""

    name: str
    boxes: tuple
    beta_max: int
    window: float
    table: dict  # beta tuple -> float

    @property
    def passes(self) -> bool:
        return all(np.isfinite(v) and v <= self.window for v in self.table.values())

    def to_json(self) -> str:
        return json.dumps(
            {
                "symbol": self.name,
                "boxes": [list(b) for b in self.boxes],
                "beta_max": self.beta_max,
                "window": self.window,
                "passes": self.passes,
                "table": {"_".join(map(str, b)): float(v) for b, v in self.table.items()},
            },
            indent=2,
        )


def _box_points(N: float, per_dim: int = 32) -> np.ndarray:
    mags = np.exp(np.linspace(np.log(N / 2.0), np.log(2.0 * N), per_dim // 2))
    return np.concatenate([-mags[::-1], mags])


def check_marcinkiewicz(
    chi: MultiplierSymbol, boxes, beta_max: int = 3, per_dim: int = 32
) -> MarcinkiewiczReport:
    """Sample normalized derivatives of chi over dyadic boxes.

    Each box is a tuple of dyadic scales (N_1, ..., N_arity); sampling uses
    `per_dim` points per dimension (half per sign, log-spaced magnitudes in
    [N_i/2, 2 N_i]).  Pass window: every entry <= 1e3.
    """
    boxes = tuple(tuple(float(N) for N in b) for b in boxes)
    for b in boxes:
        if len(b) != chi.arity:
            raise ConfigurationError(f"box {b} does not match arity {chi.arity}")
    table = {}
    betas = [
        b
        for b in itertools.product(range(beta_max + 1), repeat=chi.arity)
        if sum(b) <= beta_max
    ]
    for beta in betas:
        worst = 0.0
        for box in boxes:
            axes = [_box_points(N, per_dim) for N in box]
            mesh = np.meshgrid(*axes, indexing="ij")
            if chi.support is not None:
                # keep a dilation margin so FD stencil shifts stay in-band
                ok = (
                    chi.support(*mesh)
                    & chi.support(*(m * 0.98 for m in mesh))
                    & chi.support(*(m * 1.02 for m in mesh))
                )
                if not np.any(ok):
                    continue
                pts = tuple(m[ok] for m in mesh)
            else:
                pts = tuple(m.ravel() for m in mesh)
            d = fd_partial(chi.evaluate, beta, pts)
            norm = np.ones_like(pts[0])
            for p, b_i in zip(pts, beta):
                if b_i:
                    norm = norm * np.abs(p) ** b_i
            worst = max(worst, float(np.max(np.abs(d) * norm)))
        table[beta] = worst
    return MarcinkiewiczReport(chi.name, boxes, beta_max, MARCINKIEWICZ_WINDOW, table)
