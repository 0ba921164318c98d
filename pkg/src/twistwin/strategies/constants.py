"""Constant ledgers for the two inductive strategies."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

from ..dynamics import MapSequence, UnsupportedAssumption, min_cylinder_length, min_expansion
from ..numeric import floor_log, parse_rational, to_text
from ..targets import TargetSequence
from .blockade import epsilon

DEFAULT_N_CAP = 512


class CertificateTooWeak(RuntimeError):
    """No admissible ``N`` was found below the search cap."""


def _smallest_power_below(gamma: Fraction, bound: Fraction, start: int = 1) -> int:
    """Least ``k >= start`` with ``γ^k < bound``."""
    k = start
    power = gamma**k
    while not power < bound:
        k += 1
        power *= gamma
    return k


def _expansion_lower_bounds(seq: MapSequence, cap: int):
    """Yield ``(N, lower bound of inf |T_{i,N}'|)`` for ``N = 1..cap``, incrementally."""
    period = seq.period
    prods = [Fraction(1)] * period
    cert = seq.certificate
    for depth in range(1, cap + 1):
        for i in range(period):
            prods[i] *= seq.at(i + 1 + depth - 1).min_derivative()
        yield depth, max(min(prods), cert.bound(depth))


def _ledger_json(obj) -> dict:
    out = {}
    for key, value in asdict(obj).items():
        if isinstance(value, Fraction):
            out[key] = to_text(value)
        elif isinstance(value, float):
            out[key] = value
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class StrategyAConstants:
    gamma: Fraction
    epsilon: Fraction
    M: Fraction
    C1: Fraction
    C2: Fraction
    N: int
    s1: int
    s2: int
    s: int
    ell: Fraction

    @property
    def wait_threshold(self) -> Fraction:
        """Diameter below which the strategy starts: ``ℓ · min(γ^s, 1/M)``."""
        return self.ell * min(self.gamma**self.s, 1 / self.M)

    def m_threshold(self, k: int) -> Fraction:
        """Derivative level defining ``m_k``: ``γ^{-(k+1)s} / M``."""
        return 1 / (self.M * self.gamma ** ((k + 1) * self.s))

    def to_json(self) -> dict:
        out = _ledger_json(self)
        out["assumption"] = "A"
        out["wait_threshold"] = to_text(self.wait_threshold)
        return out


@dataclass(frozen=True)
class StrategyBConstants:
    gamma: Fraction
    epsilon: Fraction
    C1: Fraction
    C2: Fraction
    C3: Fraction
    N: int
    s1: int
    s2: int
    s: int
    delta_factor: Fraction

    @property
    def wait_threshold(self) -> Fraction:
        """The strategy starts once the diameter drops below ``γ^{2s}``."""
        return self.gamma ** (2 * self.s)

    def delta(self, rho1) -> Fraction:
        """``δ = (ρ_1/2)(1/(2 C_2 γ^{s_2-1}) - C_1 γ^s)``."""
        return rho1 / 2 * self.delta_factor

    def class_bounds(self, k: int) -> tuple[Fraction, Fraction]:
        """``(γ^{ks}, γ^{(k-1)s}]``: the cylinder-length band of word class ``k``."""
        return self.gamma ** (k * self.s), self.gamma ** ((k - 1) * self.s)

    def to_json(self) -> dict:
        out = _ledger_json(self)
        out["assumption"] = "B"
        out["wait_threshold"] = to_text(self.wait_threshold)
        return out


def _check(seq: MapSequence, gamma, tag: str) -> Fraction:
    gamma = parse_rational(gamma)
    if not 0 < gamma < Fraction(1, 3):
        raise ValueError("gamma must lie in (0,1/3)")
    if tag not in seq.assumptions:
        raise UnsupportedAssumption(f"{seq.name} does not satisfy assumption {tag}'")
    return gamma


def constants_A(seq: MapSequence, gamma, targets: TargetSequence,
                n_cap: int = DEFAULT_N_CAP) -> StrategyAConstants:
    """Ledger for finitely many maps with finitely many branches each."""
    gamma = _check(seq, gamma, "A")
    eps = epsilon(gamma)
    M = seq.max_derivative()
    C1 = targets.lipschitz
    C2 = seq.distortion_bound()
    # the extra factor 2 makes the later-stage intervals short enough for the avoidance rounds
    s2 = _smallest_power_below(gamma, 1 / (2 * (2 * gamma + C1) * C2 * M))
    for N, lower in _expansion_lower_bounds(seq, n_cap):
        s1 = floor_log(1 / eps, Fraction(N + 1)) + 1
        s = 2 + s1 + s2
        if lower > C2 * M / gamma**s:
            assert min_expansion(seq, N) == lower
            ell = min_cylinder_length(seq, N)
            return StrategyAConstants(gamma, eps, M, C1, C2, N, s1, s2, s, ell)
    raise CertificateTooWeak(f"no N <= {n_cap} satisfies the expansion requirement")


def _s2_for_B(gamma: Fraction, C1: Fraction, C2: Fraction, s1: int) -> int:
    s2 = 1
    while True:
        first = C1 == 0 or gamma ** (2 * s2 - 1) * 2 * C1 * C2 * gamma**s1 < 1
        # keeps the stage-0 intervals within γ^{s_1}|B|/2
        second = C1 * C2 * gamma**s2 * (1 - gamma ** (s1 + s2)) <= (1 - gamma) / 2
        if first and second:
            return s2
        s2 += 1


def constants_B(seq: MapSequence, gamma, targets: TargetSequence,
                n_cap: int = DEFAULT_N_CAP) -> StrategyBConstants:
    """Ledger for full-branch sequences."""
    gamma = _check(seq, gamma, "B")
    eps = epsilon(gamma)
    C1 = targets.lipschitz
    C2 = seq.distortion_bound()
    C3 = C2**3
    for N, lower in _expansion_lower_bounds(seq, n_cap):
        s1 = floor_log(1 / eps, Fraction(2 * N)) + 1
        s2 = _s2_for_B(gamma, C1, C2, s1)
        s = s1 + s2
        if lower > C3 / gamma**s:
            factor = 1 / (2 * C2 * gamma ** (s2 - 1)) - C1 * gamma**s
            if not factor > 0:
                raise ArithmeticError("δ would not be positive; constants are inconsistent")
            return StrategyBConstants(gamma, eps, C1, C2, C3, N, s1, s2, s, factor)
    raise CertificateTooWeak(f"no N <= {n_cap} satisfies the expansion requirement")
