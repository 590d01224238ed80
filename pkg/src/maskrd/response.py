"""Closed-form expected squared range-Doppler response of a masked stream.

For a trial delay l, a true delay k, and an integer Doppler mismatch nu (in
bins of the M-period coherent window), the expectation of the squared
correlator output splits into two branches:

  k != l:  M * R[k,l], independent of nu
  k == l:  |s_kmn(k, nu)|^2 + (mu4 - 1) * M * (w - a[k])

Both use one period's counting quantities only. Delay 0 is the blind range
and is rejected rather than reported as zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .masks import Mask
from . import spectra

__all__ = [
    "ScenarioParams",
    "ResponseGrid",
    "DopplerRegime",
    "classify_regime",
    "expected_response",
    "moderate_slice",
    "grating_lobes",
    "build_grid",
    "grid_rows",
    "GRID_HEADER_CLOSED",
    "GRID_HEADER_MC",
]

GRID_HEADER_CLOSED = ("k", "l", "nu", "value")
GRID_HEADER_MC = ("k", "l", "nu", "value", "se", "trials")


@dataclass(frozen=True)
class ScenarioParams:
    """Mask plus coherent-window length M and symbol kurtosis mu4."""

    mask: Mask
    M: int
    mu4: float

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")
        if self.mu4 < 1:
            raise ValueError(
                f"mu4 must be at least 1 for unit-energy symbols, got {self.mu4}")

    @property
    def total_bins(self) -> int:
        """Doppler bin count M*N of the coherent window."""
        return self.M * self.mask.n


class DopplerRegime(enum.Enum):
    MODERATE = "moderate"
    HIGH = "high"


def classify_regime(nu_values, m_pri: int) -> DopplerRegime:
    """MODERATE iff every Doppler mismatch of interest is below M."""
    if all(abs(int(v)) < m_pri for v in nu_values):
        return DopplerRegime.MODERATE
    return DopplerRegime.HIGH


def _check_delay(name: str, value: int, n: int) -> None:
    if value == 0:
        raise ValueError(f"{name}=0 is the blind range")
    if not 1 <= value <= n - 1:
        raise ValueError(f"{name} must be in 1..{n - 1}, got {value}")


def _check_nu(nu: int, total: int) -> None:
    if not 0 <= nu < total:
        raise ValueError(f"nu must be in 0..{total - 1}, got {nu}")


def expected_response(p: ScenarioParams, k: int, l: int, nu: int) -> float:
    """E{|r(k,l,nu)|^2} for one index triple."""
    n = p.mask.n
    _check_delay("k", k, n)
    _check_delay("l", l, n)
    _check_nu(nu, p.total_bins)
    if k != l:
        return float(p.M * spectra.cross_term(p.mask, k, l))
    a_k = int(spectra.autocorr(p.mask)[k])
    deficit = p.mask.weight - a_k
    s = spectra.s_kmn(p.mask, k, p.M, nu)
    return abs(s) ** 2 + (p.mu4 - 1) * p.M * deficit


def moderate_slice(p: ScenarioParams, k: int) -> np.ndarray:
    """Mainlobe response at nu = 0..M-1: peak at 0, a constant floor after.

    The floor is (mu4 - 1) M (w - a[k]); constant-modulus symbols (mu4 = 1)
    have exactly zero local Doppler sidelobes.
    """
    n = p.mask.n
    _check_delay("k", k, n)
    a_k = int(spectra.autocorr(p.mask)[k])
    deficit = p.mask.weight - a_k
    floor = (p.mu4 - 1) * p.M * deficit
    out = np.full(p.M, floor, dtype=np.float64)
    out[0] = float(p.M * deficit) ** 2 + floor
    return out


def grating_lobes(p: ScenarioParams, k: int) -> np.ndarray:
    """Mainlobe response at the bins nu = n*M for n = 0..N-1.

    These are the only bins where the deterministic part survives; value
    M^2 |S_kN(n)|^2 plus the constant mu4 floor.
    """
    n = p.mask.n
    _check_delay("k", k, n)
    a_k = int(spectra.autocorr(p.mask)[k])
    deficit = p.mask.weight - a_k
    floor = (p.mu4 - 1) * p.M * deficit
    s_all = spectra.s_kn_all(p.mask, k)
    return (p.M ** 2) * np.abs(s_all) ** 2 + floor


@dataclass(frozen=True)
class ResponseGrid:
    """Dense response values over a (k, l, nu) index box."""

    k_set: tuple
    l_set: tuple
    nu_set: tuple
    values: np.ndarray
    source: str
    se: np.ndarray | None = None
    trials: int | None = None

    def __post_init__(self):
        if self.source not in ("closed_form", "monte_carlo"):
            raise ValueError(f"unknown grid source {self.source!r}")
        expected_shape = (len(self.k_set), len(self.l_set), len(self.nu_set))
        if self.values.shape != expected_shape:
            raise ValueError(
                f"grid shape {self.values.shape} does not match index sets {expected_shape}")
        if self.se is not None and self.se.shape != expected_shape:
            raise ValueError("standard-error tensor shape mismatch")
        self.values.setflags(write=False)


def build_grid(p: ScenarioParams, k_set, l_set, nu_set) -> ResponseGrid:
    """Closed-form values over the cross product of the given index sets.

    Off-diagonal (k != l) entries are written once and broadcast along nu,
    so their Doppler invariance is exact by construction.
    """
    k_set = tuple(int(k) for k in k_set)
    l_set = tuple(int(l) for l in l_set)
    nu_set = tuple(int(v) for v in nu_set)
    if not k_set or not l_set or not nu_set:
        raise ValueError("index sets must be non-empty")
    n = p.mask.n
    for k in k_set:
        _check_delay("k", k, n)
    for l in l_set:
        _check_delay("l", l, n)
    for nu in nu_set:
        _check_nu(nu, p.total_bins)

    a = spectra.autocorr(p.mask)
    r_mat = spectra.cross_term_matrix(p.mask)
    w = p.mask.weight
    values = np.empty((len(k_set), len(l_set), len(nu_set)), dtype=np.float64)
    for i, k in enumerate(k_set):
        s_all = None
        for j, l in enumerate(l_set):
            if k != l:
                values[i, j, :] = float(p.M * r_mat[k, l])
                continue
            if s_all is None:
                s_all = spectra.s_kn_all(p.mask, k)
            deficit = w - int(a[k])
            floor = (p.mu4 - 1) * p.M * deficit
            for t, nu in enumerate(nu_set):
                if nu % p.M:
                    values[i, j, t] = floor
                else:
                    values[i, j, t] = (p.M ** 2) * abs(s_all[nu // p.M]) ** 2 + floor
    return ResponseGrid(k_set, l_set, nu_set, values, source="closed_form")


def grid_rows(grid: ResponseGrid):
    """Yield CSV-ready rows, one per grid point, in row-major order."""
    for i, k in enumerate(grid.k_set):
        for j, l in enumerate(grid.l_set):
            for t, nu in enumerate(grid.nu_set):
                if grid.source == "closed_form":
                    yield (k, l, nu, grid.values[i, j, t])
                else:
                    yield (k, l, nu, grid.values[i, j, t],
                           grid.se[i, j, t], grid.trials)
