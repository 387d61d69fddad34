"""Domain vocabulary for sequential CHSH experiments.

Settings, outcomes, rounds, transcripts, and the memory views that
control how much of the past history a responder is allowed to see.
All types here are immutable values once constructed.
"""

from __future__ import annotations

import csv
import enum
from typing import Iterable, Iterator, NamedTuple, Sequence, TextIO


class InvariantViolation(RuntimeError):
    """An internal consistency guarantee was broken during a computation."""


class AliceSetting(enum.IntEnum):
    """Alice's two measurement choices, ordered A1 < A2."""

    A1 = 0
    A2 = 1


class BobSetting(enum.IntEnum):
    """Bob's two measurement choices, ordered B1 < B2."""

    B1 = 0
    B2 = 1


PLUS = 1
MINUS = -1
OUTCOMES = (PLUS, MINUS)


class SettingPair(NamedTuple):
    alice: AliceSetting
    bob: BobSetting

    @property
    def index(self) -> int:
        """Position in the canonical order (A1,B1), (A1,B2), (A2,B1), (A2,B2)."""
        return 2 * self.alice + self.bob

    def __str__(self) -> str:
        return f"({self.alice.name},{self.bob.name})"


#: Canonical enumeration order; ALL_PAIRS[i].index == i.
ALL_PAIRS: tuple[SettingPair, ...] = tuple(
    SettingPair(a, b) for a in AliceSetting for b in BobSetting
)


class Round(NamedTuple):
    """One completed measurement round; ``index`` is 1-based."""

    index: int
    pair: SettingPair
    a: int
    b: int


class PairCounts(NamedTuple):
    """Tally for one setting pair: rounds played, correlated, anticorrelated."""

    total: int
    correlated: int
    anticorrelated: int


def _check_outcome(value, label: str) -> int:
    if value != PLUS and value != MINUS:
        raise ValueError(f"outcome {label}={value!r} must be +1 or -1")
    return int(value)


def _check_pair(pair) -> SettingPair:
    if (
        isinstance(pair, SettingPair)
        and isinstance(pair.alice, AliceSetting)
        and isinstance(pair.bob, BobSetting)
    ):
        return pair
    alice, bob = pair
    return SettingPair(AliceSetting(alice), BobSetting(bob))


class Transcript:
    """Append-only record of rounds with indices exactly 1..n_total."""

    __slots__ = ("rounds",)

    def __init__(self, rounds: Iterable[Round] = ()):
        rounds = tuple(rounds)
        for expected, rnd in enumerate(rounds, start=1):
            if rnd.index != expected:
                raise ValueError(
                    f"round indices must run 1..{len(rounds)} in order; "
                    f"found index {rnd.index} at position {expected}"
                )
        self.rounds = rounds

    @property
    def n_total(self) -> int:
        return len(self.rounds)

    def __len__(self) -> int:
        return len(self.rounds)

    def __iter__(self) -> Iterator[Round]:
        return iter(self.rounds)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Transcript):
            return NotImplemented
        return self.rounds == other.rounds

    def __hash__(self) -> int:
        return hash(self.rounds)

    def __repr__(self) -> str:
        return f"Transcript(n_total={self.n_total})"

    def record(self, pair, a, b) -> "Transcript":
        """A new transcript with one more round appended."""
        pair = _check_pair(pair)
        rnd = Round(len(self.rounds) + 1, pair, _check_outcome(a, "a"), _check_outcome(b, "b"))
        new = Transcript.__new__(Transcript)
        new.rounds = self.rounds + (rnd,)
        return new

    def counts(self) -> dict[SettingPair, PairCounts]:
        """Per-pair tallies; totals over all pairs sum to n_total."""
        totals = [0, 0, 0, 0]
        corr = [0, 0, 0, 0]
        for rnd in self.rounds:
            i = rnd.pair.index
            totals[i] += 1
            if rnd.a == rnd.b:
                corr[i] += 1
        return {
            p: PairCounts(totals[i], corr[i], totals[i] - corr[i])
            for i, p in enumerate(ALL_PAIRS)
        }


def record_round(transcript: Transcript, pair, a, b) -> Transcript:
    """Append one round; see :meth:`Transcript.record`."""
    return transcript.record(pair, a, b)


def counts(transcript: Transcript) -> dict[SettingPair, PairCounts]:
    """Per-pair tallies; see :meth:`Transcript.counts`."""
    return transcript.counts()


class MemoryClass(enum.Enum):
    NONE = "none"
    OWN_SIDE = "own-side"
    FULL = "full"


class Side(enum.Enum):
    ALICE = "alice"
    BOB = "bob"


class OwnSideEntry(NamedTuple):
    """What one wing remembers about one of its own past rounds."""

    setting: AliceSetting | BobSetting
    outcome: int


class MemoryView:
    """Bounded read-only window onto the history a responder may consult.

    FULL views expose whole rounds, OWN_SIDE views expose only that
    wing's (setting, outcome) entries, NONE views are empty.  A view of
    the first k rounds can never reveal anything from round k+1 onward,
    even when the backing sequence keeps growing behind it.
    """

    __slots__ = ("memory_class", "side", "_backing", "_length")

    def __init__(self, memory_class: MemoryClass, side, backing: Sequence, length: int):
        if not 0 <= length <= len(backing):
            raise ValueError("view length exceeds backing history")
        self.memory_class = memory_class
        self.side = side
        self._backing = backing
        self._length = length

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, i: int):
        if i < 0:
            i += self._length
        if not 0 <= i < self._length:
            raise IndexError("memory view index out of range")
        return self._backing[i]

    def __iter__(self):
        for i in range(self._length):
            yield self._backing[i]

    def entries(self) -> tuple:
        return tuple(self)

    def __repr__(self) -> str:
        who = self.side.value if self.side is not None else "shared"
        return f"MemoryView({self.memory_class.value}, {who}, {self.entries()!r})"


#: The view every memoryless responder receives.
EMPTY_VIEW = MemoryView(MemoryClass.NONE, None, (), 0)


def memory_view(
    transcript: Transcript, memory_class: MemoryClass, side, upto: int
) -> MemoryView:
    """The window onto ``transcript.rounds[:upto]`` permitted to ``side``.

    ``side`` is only consulted for OWN_SIDE views; FULL views carry the
    same content for both wings.
    """
    if not 0 <= upto <= transcript.n_total:
        raise ValueError(f"upto={upto} out of range 0..{transcript.n_total}")
    if memory_class is MemoryClass.NONE:
        return EMPTY_VIEW
    if memory_class is MemoryClass.FULL:
        return MemoryView(MemoryClass.FULL, None, transcript.rounds, upto)
    if memory_class is MemoryClass.OWN_SIDE:
        if side is Side.ALICE:
            entries = tuple(
                OwnSideEntry(r.pair.alice, r.a) for r in transcript.rounds[:upto]
            )
        elif side is Side.BOB:
            entries = tuple(
                OwnSideEntry(r.pair.bob, r.b) for r in transcript.rounds[:upto]
            )
        else:
            raise ValueError("own-side views need side=Side.ALICE or Side.BOB")
        return MemoryView(MemoryClass.OWN_SIDE, side, entries, upto)
    raise ValueError(f"unknown memory class {memory_class!r}")


TRANSCRIPT_CSV_HEADER = ("round", "alice_setting", "bob_setting", "a", "b")


def write_transcript_csv(transcript: Transcript, fp: TextIO) -> None:
    """Serialize as CSV rows ``round,alice_setting,bob_setting,a,b``."""
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(TRANSCRIPT_CSV_HEADER)
    for rnd in transcript:
        writer.writerow(
            (rnd.index, rnd.pair.alice.name, rnd.pair.bob.name, f"{rnd.a:+d}", f"{rnd.b:+d}")
        )


def read_transcript_csv(fp: TextIO) -> Transcript:
    """Parse the format written by :func:`write_transcript_csv`."""
    reader = csv.reader(fp)
    header = next(reader, None)
    if header is None or tuple(header) != TRANSCRIPT_CSV_HEADER:
        raise ValueError(f"expected header {','.join(TRANSCRIPT_CSV_HEADER)}")
    rounds = []
    for row in reader:
        if not row:
            continue
        if len(row) != 5:
            raise ValueError(f"malformed transcript row: {row!r}")
        index, alice, bob, a, b = row
        try:
            pair = SettingPair(AliceSetting[alice], BobSetting[bob])
        except KeyError as exc:
            raise ValueError(f"unknown setting label in row {row!r}") from exc
        rounds.append(
            Round(int(index), pair, _check_outcome(int(a), "a"), _check_outcome(int(b), "b"))
        )
    return Transcript(rounds)
