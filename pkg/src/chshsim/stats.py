"""Experimental CHSH statistics computed from transcripts.

Everything here is exact rational arithmetic; callers convert to float
only when presenting results.  The ratio statistic ``x_statistic`` is
``None`` (undefined) whenever some setting pair never occurred; it is
never conflated with a numeric sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .core import ALL_PAIRS, PairCounts, Round, SettingPair, Transcript
from .strategies import StochasticLHV


def round_score(rnd: Round) -> int:
    """1 if the round meets its CHSH target, else 0.

    The target is equal outcomes for (A1,B1), (A1,B2), (A2,B1) and
    unequal outcomes for (A2,B2).
    """
    if rnd.pair.index < 3:
        return int(rnd.a == rnd.b)
    return int(rnd.a != rnd.b)


def _scoring_counts(table: Mapping[SettingPair, PairCounts]) -> list[int]:
    """Per-pair counts of target-meeting rounds, canonical order."""
    out = []
    for i, pair in enumerate(ALL_PAIRS):
        counts = table[pair]
        out.append(counts.correlated if i < 3 else counts.anticorrelated)
    return out


def y_statistic(transcript: Transcript) -> Fraction:
    """The linear CHSH statistic, 4/N times the number of scoring rounds."""
    n = transcript.n_total
    if n == 0:
        raise ValueError("y statistic needs at least one round")
    return Fraction(4 * sum(_scoring_counts(transcript.counts())), n)


def x_statistic(transcript: Transcript) -> Fraction | None:
    """The ratio-form CHSH statistic; ``None`` if any pair was never measured."""
    if transcript.n_total == 0:
        raise ValueError("x statistic needs at least one round")
    table = transcript.counts()
    scoring = _scoring_counts(table)
    total = Fraction(0)
    for i, pair in enumerate(ALL_PAIRS):
        denom = table[pair].total
        if denom == 0:
            return None
        total += Fraction(scoring[i], denom)
    return total


def assignment_chsh(assignment) -> int:
    """Number of CHSH targets a deterministic assignment satisfies (0..3)."""
    return sum(assignment.satisfies(pair) for pair in ALL_PAIRS)


def chsh_value(lhv: StochasticLHV) -> Fraction:
    """The exact per-round CHSH sum of a stochastic mixture.

    Three correlation probabilities plus the (A2,B2) anticorrelation
    probability; at most 3 for any mixture.
    """
    return sum(
        (weight * assignment_chsh(assignment) for weight, assignment in lhv.support),
        Fraction(0),
    )


@dataclass(frozen=True)
class BatchStatistics:
    """Summary of one transcript: both CHSH statistics and the tallies."""

    n: int
    y_value: Fraction
    x_value: Fraction | None
    counts: Mapping[SettingPair, PairCounts]

    def __post_init__(self):
        if not 0 <= self.y_value <= 4:
            raise ValueError(f"y value {self.y_value} outside [0, 4]")
        if self.x_value is not None and not 0 <= self.x_value <= 4:
            raise ValueError(f"x value {self.x_value} outside [0, 4]")


def batch_statistics(transcript: Transcript) -> BatchStatistics:
    """Compute :class:`BatchStatistics` for a non-empty transcript."""
    n = transcript.n_total
    if n == 0:
        raise ValueError("batch statistics need at least one round")
    table = transcript.counts()
    scoring = _scoring_counts(table)
    y = Fraction(4 * sum(scoring), n)
    x: Fraction | None = Fraction(0)
    for i, pair in enumerate(ALL_PAIRS):
        denom = table[pair].total
        if denom == 0:
            x = None
            break
        x += Fraction(scoring[i], denom)
    return BatchStatistics(n=n, y_value=y, x_value=x, counts=table)
