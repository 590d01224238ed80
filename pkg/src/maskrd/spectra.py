"""Correlation structure and deterministic spectra of a transmission mask.

Counting quantities (autocorrelation, masked cross terms) stay in exact
integer arithmetic. Spectra are evaluated as direct complex sums; at desk
scale (periods up to a few thousand) nothing faster is needed.

Conventions, with m_t the mask, m_r = 1 - m_t, and all shifts cyclic mod N:

  a[k]        = sum_n m_t[n] m_t[n-k]              (periodic autocorrelation)
  R[k,l]      = sum_n m_r[n] m_t[n-k] m_t[n-l]     (masked cross term)
  gamma_k[n]  = m_r[n] m_t[n-k]                    (received-echo gate)
  S_kN(nu)    = sum_n gamma_k[n] e^(-2j pi nu n / N)

The length-MN spectrum of the M-fold tiled gate is nonzero only at
multiples of M, where it equals M times the length-N spectrum; s_kmn
evaluates that reduction instead of materializing MN-point sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .masks import Mask

__all__ = [
    "SpectralSummary",
    "GammaSequence",
    "autocorr",
    "cross_term",
    "cross_term_matrix",
    "gamma",
    "s_kn",
    "s_kn_all",
    "s_kmn",
    "doppler_energy_f",
    "doppler_energy_all",
    "summarize",
]


@dataclass(frozen=True)
class SpectralSummary:
    """Autocorrelation and masked cross terms of one mask."""

    n: int
    weight: int
    rho: Fraction
    a: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.a.setflags(write=False)
        self.r.setflags(write=False)


@dataclass(frozen=True)
class GammaSequence:
    """Receive gate for delay k: gamma_k[n] = m_r[n] m_t[n-k], one period."""

    k: int
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def total(self) -> int:
        """Number of gated slots, w - a[k]."""
        return int(self.values.sum())


def autocorr(mask: Mask) -> np.ndarray:
    """Periodic autocorrelation a[k] = sum_n m_t[n] m_t[n-k], exact ints."""
    bits = mask.as_array()
    return np.array([np.dot(np.roll(bits, k), bits) for k in range(mask.n)],
                    dtype=np.int64)


def cross_term(mask: Mask, k: int, l: int) -> int:
    """Masked cross term R[k,l]; the delays 0 are rejected as blind range."""
    n = mask.n
    if k % n == 0 or l % n == 0:
        raise ValueError("delay 0 is the blind range; R is undefined there")
    bits = mask.as_array()
    mr = 1 - bits
    return int(np.sum(mr * np.roll(bits, k % n) * np.roll(bits, l % n)))


def cross_term_matrix(mask: Mask) -> np.ndarray:
    """All R[k,l] as an N x N int matrix.

    Rows and columns at index 0 are structurally zero (the blind range):
    m_r[n] m_t[n] vanishes identically.
    """
    bits = mask.as_array()
    n = mask.n
    mr = 1 - bits
    shifted = np.empty((n, n), dtype=np.int64)
    for k in range(n):
        shifted[k] = np.roll(bits, k)
    gated = shifted * mr
    return gated @ shifted.T


def gamma(mask: Mask, k: int) -> GammaSequence:
    """Receive gate gamma_k over one period; k is reduced mod N."""
    bits = mask.as_array()
    values = (1 - bits) * np.roll(bits, k % mask.n)
    return GammaSequence(k=k, values=values)


def _dft_bin(g: np.ndarray, nu: int) -> complex:
    n = len(g)
    phase = np.exp(-2j * np.pi * nu * np.arange(n) / n)
    return complex(np.dot(g, phase))


def s_kn(mask: Mask, k: int, nu: int) -> complex:
    """Length-N spectrum of the receive gate at bin nu (reduced mod N)."""
    g = gamma(mask, k).values
    return _dft_bin(g, nu % mask.n)


def s_kn_all(mask: Mask, k: int) -> np.ndarray:
    """Length-N spectrum of the receive gate at every bin.

    Direct O(N^2) evaluation, bin by bin, bit-identical to s_kn per bin.
    """
    g = gamma(mask, k).values
    return np.array([_dft_bin(g, nu) for nu in range(mask.n)])


def s_kmn(mask: Mask, k: int, m_pri: int, nu: int) -> complex:
    """Length-MN spectrum of the M-fold tiled receive gate at bin nu.

    Evaluated through the periodicity reduction: exactly 0 off multiples of
    M, and M times the length-N spectrum on them. Never forms MN-point sums.
    """
    if m_pri < 1:
        raise ValueError(f"the PRI count must be positive, got {m_pri}")
    total = m_pri * mask.n
    nu = nu % total
    if nu % m_pri:
        return 0j
    return m_pri * s_kn(mask, k, nu // m_pri)


def doppler_energy_f(mask: Mask, k: int) -> int:
    """Total off-zero spectral energy of the receive gate, (w-a[k])(N-w+a[k]).

    Equals sum_(nu=1..N-1) |S_kN(nu)|^2 by Parseval; kept in integers.
    """
    a_k = int(autocorr(mask)[k % mask.n])
    return _f_from_autocorr(a_k, mask.n, mask.weight)


def doppler_energy_all(mask: Mask) -> np.ndarray:
    """doppler_energy_f for every k as an int vector (entry 0 is zero)."""
    a = autocorr(mask)
    return _f_from_autocorr(a, mask.n, mask.weight)


def _f_from_autocorr(a, n, w):
    return (w - a) * (n - w + a)


def summarize(mask: Mask) -> SpectralSummary:
    """Bundle a[k] and R[k,l] with the mask's basic parameters."""
    return SpectralSummary(
        n=mask.n,
        weight=mask.weight,
        rho=mask.rho,
        a=autocorr(mask),
        r=cross_term_matrix(mask),
    )
