"""Symbol-level Monte Carlo oracle for the masked range-Doppler correlator.

Streams are synthesized from the definition: i.i.d. unit-energy symbols in
the transmit slots, zeros elsewhere, echo delayed by the true range bin and
rotated by the Doppler difference. Nothing here reuses the closed forms, so
estimates are an independent check of them.

Symbol indexing. The correlator touches x_(n-k) for n = 0..MN-1 and
k, l = 1..N-1, so a stream covers the index range -(N-1)..MN-1. Indices
below zero belong to the tail of the previous coherent window and are drawn
as fresh independent symbols; cyclic reuse would correlate the window edges.
Arrays store index i at position i + N - 1.

Randomness. Every trial draws from a counter-based generator keyed by
(seed, trial, stream id), so results do not depend on evaluation order and
are reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .masks import Mask
from . import response

__all__ = [
    "Constellation",
    "EchoScenario",
    "McEstimate",
    "McPoint",
    "ValidationReport",
    "McBudgetError",
    "DEFAULT_BUDGET",
    "CONSTELLATION_NAMES",
    "make_constellation",
    "custom_constellation",
    "draw_stream",
    "correlate",
    "estimate",
    "validate_grid",
    "mc_response_grid",
    "expectation_by_double_sum",
    "VALIDATION_HEADER",
]

MOMENT_TOL = 1e-12
DEFAULT_BUDGET = 2_000_000_000
CONSTELLATION_NAMES = ("qpsk", "qam16", "qam64")
VALIDATION_HEADER = ("k", "l", "nu", "mc_mean", "mc_se", "trials", "closed_form", "z")


class McBudgetError(RuntimeError):
    """Requested simulation exceeds the configured work budget."""


@dataclass(frozen=True)
class Constellation:
    """Finite symbol set with validated moments.

    Points have zero mean, zero pseudo-variance and unit average energy;
    mu4 is the normalized fourth moment (1 for constant modulus). For the
    built-in sets mu4_exact carries the rational value.
    """

    name: str
    points: np.ndarray
    mu4: float
    mu4_exact: Fraction | None = None

    def __post_init__(self):
        self.points.setflags(write=False)


def _moment(points: np.ndarray, p: int, q: int) -> complex:
    """Empirical E{x^p conj(x)^q} under the uniform symbol distribution."""
    return complex(np.mean(points ** p * np.conj(points) ** q))


def _validated(name: str, points: np.ndarray, mu4_exact: Fraction | None) -> Constellation:
    energy = float(np.mean(np.abs(points) ** 2))
    points = points / math.sqrt(energy)
    mean = _moment(points, 1, 0)
    pseudo = _moment(points, 2, 0)
    energy = _moment(points, 1, 1).real
    if abs(mean) > MOMENT_TOL:
        raise ValueError(f"constellation {name!r} has nonzero mean {mean}")
    if abs(pseudo) > MOMENT_TOL:
        raise ValueError(
            f"constellation {name!r} has nonzero pseudo-variance {pseudo}")
    if abs(energy - 1.0) > MOMENT_TOL:
        raise ValueError(
            f"constellation {name!r} failed unit-energy normalization")
    mu4 = float(mu4_exact) if mu4_exact is not None else float(
        _moment(points, 2, 2).real)
    if mu4 < 1.0:
        raise ValueError(f"constellation {name!r} has mu4 = {mu4} < 1")
    return Constellation(name=name, points=points, mu4=mu4, mu4_exact=mu4_exact)


def _square_qam(levels) -> tuple[np.ndarray, Fraction]:
    """Square grid over the given integer levels plus its exact mu4."""
    pts = np.array([complex(a, b) for a in levels for b in levels])
    sq = [a * a + b * b for a in levels for b in levels]
    energy = Fraction(sum(sq), len(sq))
    fourth = Fraction(sum(s * s for s in sq), len(sq))
    return pts, fourth / (energy * energy)


def make_constellation(name: str) -> Constellation:
    """Built-in unit-energy constellation by name: qpsk, qam16 or qam64."""
    key = name.strip().lower()
    if key == "qpsk":
        points = np.array([1, 1j, -1, -1j], dtype=complex)
        return _validated("qpsk", points, Fraction(1))
    if key == "qam16":
        points, mu4 = _square_qam((-3, -1, 1, 3))
        return _validated("qam16", points, mu4)
    if key == "qam64":
        points, mu4 = _square_qam(range(-7, 8, 2))
        return _validated("qam64", points, mu4)
    raise ValueError(f"unknown constellation {name!r}")


def custom_constellation(points, name: str = "custom") -> Constellation:
    """User-supplied point set, normalized to unit energy and validated."""
    arr = np.asarray(points, dtype=complex)
    if arr.ndim != 1 or len(arr) < 2:
        raise ValueError("a constellation needs at least two points")
    return _validated(name, arr, None)


@dataclass(frozen=True)
class EchoScenario:
    """Single-target echo setup: who transmitted what, and which shift."""

    mask: Mask
    M: int
    constellation: Constellation
    true_delay: int
    true_doppler: int
    trial_doppler: int

    def __post_init__(self):
        n = self.mask.n
        if self.M < 1:
            raise ValueError(f"M must be positive, got {self.M}")
        if not 1 <= self.true_delay <= n - 1:
            raise ValueError(
                f"true delay must be in 1..{n - 1}, got {self.true_delay}")
        total = self.M * n
        for label, v in (("true", self.true_doppler), ("trial", self.trial_doppler)):
            if not 0 <= v < total:
                raise ValueError(
                    f"{label} Doppler must be in 0..{total - 1}, got {v}")

    @property
    def doppler_difference(self) -> int:
        return self.trial_doppler - self.true_doppler


def _trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    """Counter-based per-trial generator; disjoint by (trial, stream)."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    counter = (int(stream) << 192) | (int(trial) << 128)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


class _TrialRngPool:
    """Reusable generator that rewinds to (trial, stream) counters.

    Produces streams bit-identical to _trial_rng without paying the
    bit-generator construction cost on every trial.
    """

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self._bg = np.random.Philox(key=seed)
        self.generator = np.random.Generator(self._bg)
        self._template = self._bg.state
        self._key = self._template["state"]["key"].copy()

    def rewind(self, trial: int, stream: int = 0) -> np.random.Generator:
        counter = np.zeros(4, dtype=np.uint64)
        counter[2] = np.uint64(trial)
        counter[3] = np.uint64(stream)
        state = dict(self._template)
        state["state"] = {"counter": counter, "key": self._key}
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        self._bg.state = state
        return self.generator


def draw_stream(mask: Mask, m_pri: int, constellation: Constellation,
                seed: int, trial: int = 0, stream: int = 0) -> np.ndarray:
    """Masked symbol stream over indices -(N-1)..MN-1.

    Position j of the result holds the symbol with index j - (N - 1).
    Transmit slots hold i.i.d. uniform constellation points, listen slots
    hold exact zeros. Deterministic in (seed, trial, stream).
    """
    rng = _trial_rng(seed, trial, stream)
    return _draw(mask, m_pri, constellation, rng)


def _gate_for_stream(mask: Mask, m_pri: int) -> np.ndarray:
    n = mask.n
    length = m_pri * n + n - 1
    idx = np.arange(length) - (n - 1)
    return mask.as_array()[idx % n].astype(np.complex128)


def _draw(mask: Mask, m_pri: int, constellation: Constellation,
          rng: np.random.Generator, gate: np.ndarray | None = None) -> np.ndarray:
    if gate is None:
        gate = _gate_for_stream(mask, m_pri)
    picks = rng.integers(0, len(constellation.points), size=len(gate))
    return constellation.points[picks] * gate


@dataclass(frozen=True)
class _PointKernel:
    """Precomputed gather indices and phases for one (k, l, nu) correlation."""

    idx_k: np.ndarray
    idx_l: np.ndarray
    phase: np.ndarray


def _kernel(mask: Mask, m_pri: int, k: int, l: int, nu: int) -> _PointKernel:
    n = mask.n
    total = m_pri * n
    bits = mask.as_array()
    ns = np.arange(total)
    active = ((1 - bits[ns % n]) * bits[(ns - k) % n] * bits[(ns - l) % n]).astype(bool)
    ns = ns[active]
    phase = np.exp(-2j * np.pi * nu * ns / total)
    return _PointKernel(idx_k=ns - k + n - 1, idx_l=ns - l + n - 1, phase=phase)


def correlate(scenario: EchoScenario, stream: np.ndarray, l: int) -> complex:
    """r(k0, l, nu_t - nu_0) evaluated directly from its defining sum."""
    n = scenario.mask.n
    if not 1 <= l <= n - 1:
        raise ValueError(f"trial delay must be in 1..{n - 1}, got {l}")
    kern = _kernel(scenario.mask, scenario.M, scenario.true_delay, l,
                   scenario.doppler_difference)
    return _correlate_kernel(kern, stream)


def _correlate_kernel(kern: _PointKernel, stream: np.ndarray) -> complex:
    if len(kern.phase) == 0:
        return 0j
    prod = stream[kern.idx_k] * np.conj(stream[kern.idx_l])
    return complex(np.dot(prod, kern.phase))


@dataclass(frozen=True)
class McEstimate:
    """Sample mean of |r|^2 with its standard error."""

    mean_sq: float
    se: float
    trials: int
    seed: int


def estimate(scenario: EchoScenario, l: int, trials: int, seed: int,
             stream: int = 0) -> McEstimate:
    """Estimate E{|r|^2} over independent trials.

    Trial t draws its own stream from (seed, t, stream), so any execution
    order or partition over workers yields the same per-trial values.
    """
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    n = scenario.mask.n
    if not 1 <= l <= n - 1:
        raise ValueError(f"trial delay must be in 1..{n - 1}, got {l}")
    kern = _kernel(scenario.mask, scenario.M, scenario.true_delay, l,
                   scenario.doppler_difference)
    gate = _gate_for_stream(scenario.mask, scenario.M)
    pool = _TrialRngPool(seed)
    vals = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        rng = pool.rewind(t, stream)
        data = _draw(scenario.mask, scenario.M, scenario.constellation, rng, gate)
        vals[t] = abs(_correlate_kernel(kern, data)) ** 2
    mean = float(np.mean(vals))
    se = float(math.sqrt(np.var(vals, ddof=1) / trials))
    return McEstimate(mean_sq=mean, se=se, trials=trials, seed=seed)


@dataclass(frozen=True)
class McPoint:
    """One validated grid point: estimate, closed form and z-score."""

    k: int
    l: int
    nu: int
    mc_mean: float
    mc_se: float
    trials: int
    closed_form: float
    z: float


@dataclass(frozen=True)
class ValidationReport:
    """Per-point z-scores of Monte Carlo against the closed form."""

    points: tuple
    z_threshold: float

    @property
    def n_flagged(self) -> int:
        return sum(1 for p in self.points if abs(p.z) > self.z_threshold)

    @property
    def passed(self) -> bool:
        return self.n_flagged == 0


def _z_score(mc_mean: float, se: float, closed: float) -> float:
    if se > 0.0:
        return (mc_mean - closed) / se
    # Deterministic point: the estimate must match the closed form outright.
    if abs(mc_mean - closed) <= 1e-9 * max(1.0, abs(closed)):
        return 0.0
    return math.inf


def mc_points(mask: Mask, m_pri: int, constellation: Constellation,
              triples, trials: int, seed: int,
              budget: int | None = DEFAULT_BUDGET):
    """Estimate and score an explicit list of (k, l, nu) triples.

    Point i uses the disjoint generator stream i, so the set of estimates is
    independent of the order in which points are processed.
    """
    triples = [(int(k), int(l), int(nu)) for k, l, nu in triples]
    total = m_pri * mask.n
    if budget is not None:
        cost = len(triples) * trials * total
        if cost > budget:
            raise McBudgetError(
                f"points x trials x MN = {cost} exceeds the budget {budget}")
    params = response.ScenarioParams(mask=mask, M=m_pri, mu4=constellation.mu4)
    out = []
    for i, (k, l, nu) in enumerate(triples):
        scen = EchoScenario(mask=mask, M=m_pri, constellation=constellation,
                            true_delay=k, true_doppler=0, trial_doppler=nu)
        est = estimate(scen, l, trials, seed, stream=i)
        closed = response.expected_response(params, k, l, nu)
        z = _z_score(est.mean_sq, est.se, closed)
        out.append(McPoint(k=k, l=l, nu=nu, mc_mean=est.mean_sq, mc_se=est.se,
                           trials=trials, closed_form=closed, z=z))
    return out


def validate_grid(mask: Mask, m_pri: int, constellation: Constellation,
                  k_set, l_set, nu_set, trials: int, seed: int,
                  z_threshold: float = 3.0,
                  budget: int | None = DEFAULT_BUDGET) -> ValidationReport:
    """Monte Carlo vs closed form over the cross product of the index sets."""
    triples = [(k, l, nu) for k in k_set for l in l_set for nu in nu_set]
    if not triples:
        raise ValueError("index sets must be non-empty")
    pts = mc_points(mask, m_pri, constellation, triples, trials, seed, budget)
    return ValidationReport(points=tuple(pts), z_threshold=z_threshold)


def mc_response_grid(mask: Mask, m_pri: int, constellation: Constellation,
                     k_set, l_set, nu_set, trials: int, seed: int,
                     budget: int | None = DEFAULT_BUDGET) -> response.ResponseGrid:
    """Estimated response grid with a standard-error tensor alongside."""
    k_set = tuple(int(k) for k in k_set)
    l_set = tuple(int(l) for l in l_set)
    nu_set = tuple(int(v) for v in nu_set)
    rep = validate_grid(mask, m_pri, constellation, k_set, l_set, nu_set,
                        trials, seed, budget=budget)
    shape = (len(k_set), len(l_set), len(nu_set))
    values = np.array([p.mc_mean for p in rep.points]).reshape(shape)
    se = np.array([p.mc_se for p in rep.points]).reshape(shape)
    return response.ResponseGrid(k_set, l_set, nu_set, values,
                                 source="monte_carlo", se=se, trials=trials)


def expectation_by_double_sum(mask: Mask, m_pri: int,
                              constellation: Constellation,
                              k: int, l: int, nu: int) -> float:
    """Brute-force E{|r(k,l,nu)|^2} from the full double sum.

    Expands |r|^2 over all index pairs (n, m) of the coherent window and
    evaluates each symbol expectation from the constellation's empirical
    moment table, with no independence shortcuts beyond distinct-index
    factorization. Intended as a desk-scale oracle for the closed forms.
    """
    n = mask.n
    if not (1 <= k <= n - 1 and 1 <= l <= n - 1):
        raise ValueError("delays must be in 1..N-1")
    total = m_pri * n
    bits = mask.as_array()
    ns = np.arange(total)
    u = (1 - bits[ns % n]) * bits[(ns - k) % n] * bits[(ns - l) % n]
    active = ns[u.astype(bool)]
    if len(active) == 0:
        return 0.0
    moments = {(p, q): _moment(constellation.points, p, q)
               for p in range(3) for q in range(3)}
    acc = 0.0 + 0.0j
    for na in active:
        for ma in active:
            powers = {}
            for idx, (dp, dq) in (
                (na - k, (1, 0)),
                (na - l, (0, 1)),
                (ma - k, (0, 1)),
                (ma - l, (1, 0)),
            ):
                p, q = powers.get(idx, (0, 0))
                powers[idx] = (p + dp, q + dq)
            e = 1.0 + 0.0j
            for p, q in powers.values():
                e *= moments[(p, q)]
            acc += e * np.exp(2j * np.pi * nu * (na - ma) / total)
    return float(acc.real)
