"""Periodic 0/1 transmission masks and their reception complements.

A mask is one period of the transmit gate: bit 1 transmits, bit 0 listens.
All-zero and all-one masks are rejected everywhere (the former transmits
nothing, the latter never receives), so the duty cycle is always in (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import gf2

__all__ = [
    "Mask",
    "ReceptionMask",
    "CdsCheck",
    "singer_mask",
    "comb_mask",
    "random_mask",
    "custom_mask",
    "cyclic_shift",
    "reception_mask",
    "verify_cds",
    "comb_spacing",
    "parse_mask",
    "serialize_mask",
    "load_mask",
    "save_mask",
    "from_spec",
]

FAMILIES = ("singer", "comb", "random", "custom")


@dataclass(frozen=True)
class Mask:
    """One period of an N-periodic 0/1 transmission mask.

    Two masks compare equal iff their bit patterns agree; family and label
    are bookkeeping only.
    """

    bits: tuple
    family: str = field(default="custom", compare=False)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("mask bits must be 0 or 1")
        n = len(self.bits)
        w = sum(self.bits)
        if not 0 < w < n:
            raise ValueError(
                f"mask weight must satisfy 0 < w < N, got w={w}, N={n}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown mask family {self.family!r}")
        if not self.label:
            object.__setattr__(self, "label", f"custom:N={n},w={w}")

    @property
    def n(self) -> int:
        """Period length N."""
        return len(self.bits)

    @cached_property
    def weight(self) -> int:
        """Number of transmit slots per period."""
        return sum(self.bits)

    @cached_property
    def rho(self) -> Fraction:
        """Duty cycle w/N, kept exact."""
        return Fraction(self.weight, self.n)

    @cached_property
    def _array(self) -> np.ndarray:
        arr = np.array(self.bits, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def as_array(self) -> np.ndarray:
        """Read-only int64 view of one period."""
        return self._array

    @cached_property
    def support(self) -> tuple:
        """Indices of the transmit slots."""
        return tuple(i for i, b in enumerate(self.bits) if b)

    def __str__(self):
        return serialize_mask(self)


@dataclass(frozen=True)
class ReceptionMask:
    """Bitwise complement of a transmission mask (listen slots)."""

    bits: tuple

    @property
    def n(self) -> int:
        return len(self.bits)

    @cached_property
    def weight(self) -> int:
        return sum(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.int64)


class CdsCheck(NamedTuple):
    """Outcome of the constant-autocorrelation test."""

    is_cds: bool
    lam: int | None


def singer_mask(m: int) -> Mask:
    """Mask whose support is the trace-zero Singer difference set in Z_(2^m - 1).

    Bit i is set iff the trace of alpha^i vanishes, with alpha the canonical
    primitive element of GF(2^m). The period is N = 2^m - 1, the weight
    2^(m-1) - 1, and every nonzero cyclic difference is hit exactly
    2^(m-2) - 1 times.
    """
    if not 3 <= m <= 20:
        raise ValueError(f"singer mask degree must be in 3..20, got {m}")
    f = gf2.default_field(m)
    n = f.order - 1
    bits = [0] * n
    x = 1
    for i in range(n):
        if gf2.trace(x, f) == 0:
            bits[i] = 1
        x = gf2.field_mul(x, 0b10, f)
    return Mask(tuple(bits), family="singer", label=f"singer:m={m}")


def comb_mask(n: int, d: int) -> Mask:
    """Mask transmitting at every d-th slot: bit set iff the index is 0 mod d."""
    if d < 2:
        raise ValueError(f"comb spacing must be at least 2, got {d}")
    if n % d != 0:
        raise ValueError(f"comb spacing {d} does not divide the period {n}")
    bits = tuple(1 if i % d == 0 else 0 for i in range(n))
    return Mask(bits, family="comb", label=f"comb:N={n},d={d}")


def random_mask(n: int, w: int, seed: int) -> Mask:
    """Mask with w transmit slots placed uniformly at random.

    Uses a counter-based generator keyed by the seed, so the same
    (n, w, seed) gives the same mask on every platform.
    """
    if not 0 < w < n:
        raise ValueError(f"weight must satisfy 0 < w < N, got w={w}, N={n}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    support = rng.permutation(n)[:w]
    bits = [0] * n
    for i in support:
        bits[i] = 1
    return Mask(tuple(bits), family="random", label=f"random:N={n},w={w},seed={seed}")


def custom_mask(bits, label: str = "") -> Mask:
    """Mask from an explicit 0/1 sequence."""
    return Mask(tuple(int(b) for b in bits), family="custom", label=label)


def cyclic_shift(mask: Mask, s: int) -> Mask:
    """Mask rotated so slot n holds the old slot (n - s) mod N."""
    n = mask.n
    bits = tuple(mask.bits[(i - s) % n] for i in range(n))
    return Mask(bits, family=mask.family, label=f"{mask.label}<<{s % n}" if s % n else mask.label)


def reception_mask(mask: Mask) -> ReceptionMask:
    """Complementary listen-slot mask, 1 - bits."""
    return ReceptionMask(tuple(1 - b for b in mask.bits))


def comb_spacing(mask: Mask) -> int | None:
    """Spacing d if the mask is a (possibly shifted) comb, else None."""
    supp = mask.support
    n, w = mask.n, mask.weight
    if n % w != 0:
        return None
    d = n // w
    if w == 1:
        return d
    gaps = {(supp[(i + 1) % w] - supp[i]) % n for i in range(w)}
    return d if gaps == {d} else None


def verify_cds(mask: Mask) -> CdsCheck:
    """Check whether the off-zero autocorrelation is a single constant.

    Masks passing this test are cyclic difference sets; the constant is the
    set's lambda parameter.
    """
    from .spectra import autocorr

    a = autocorr(mask)
    off = set(int(v) for v in a[1:])
    if len(off) == 1:
        return CdsCheck(True, off.pop())
    return CdsCheck(False, None)


def parse_mask(text: str, label: str = "") -> Mask:
    """Mask from its text form: one line of 0/1 characters, '#' comments allowed."""
    bit_lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            continue
        if not stripped:
            raise ValueError("empty line in mask text")
        bit_lines.append(stripped)
    if len(bit_lines) != 1:
        raise ValueError(
            f"expected exactly one bit line, found {len(bit_lines)}")
    line = bit_lines[0]
    bad = set(line) - {"0", "1"}
    if bad:
        raise ValueError(f"illegal character {bad.pop()!r} in mask text")
    return Mask(tuple(int(c) for c in line), family="custom",
                label=label or f"custom:N={len(line)},w={line.count('1')}")


def serialize_mask(mask: Mask) -> str:
    """Canonical text form, the bit line without trailing newline."""
    return "".join(str(b) for b in mask.bits)


def load_mask(path) -> Mask:
    with open(path, "r", encoding="ascii") as fh:
        return parse_mask(fh.read(), label=str(path))


def save_mask(mask: Mask, path, header_lines=()) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(serialize_mask(mask) + "\n")


def _parse_kv(body: str, spec: str) -> dict:
    out = {}
    for part in body.split(","):
        if "=" not in part:
            raise ValueError(f"malformed mask spec {spec!r}")
        key, _, value = part.partition("=")
        try:
            out[key.strip().lower()] = int(value)
        except ValueError:
            raise ValueError(
                f"non-integer value {value!r} in mask spec {spec!r}") from None
    return out


def from_spec(spec: str) -> Mask:
    """Mask from a family spec string.

    Recognized forms: "singer:m=6", "comb:N=63,d=3", "random:N=63,w=31,seed=7".
    """
    head, _, body = spec.partition(":")
    head = head.strip().lower()
    required = {"singer": ("m",), "comb": ("n", "d"), "random": ("n", "w", "seed")}
    if head not in required:
        raise ValueError(f"unknown mask family in spec {spec!r}")
    kv = _parse_kv(body, spec)
    keys = required[head]
    missing = [k for k in keys if k not in kv]
    extra = [k for k in kv if k not in keys]
    if missing or extra:
        raise ValueError(
            f"mask spec {spec!r} needs keys {keys}, got {tuple(kv)}")
    if head == "singer":
        return singer_mask(kv["m"])
    if head == "comb":
        return comb_mask(kv["n"], kv["d"])
    return random_mask(kv["n"], kv["w"], kv["seed"])
