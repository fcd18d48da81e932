"""Digital-DNA core: action alphabets and timeline-to-sequence encoding.

An account's behavioral fingerprint is the string obtained by mapping each
timeline action to one symbol of a fixed alphabet, oldest action first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Optional

from .errors import UnknownActionKind

# Canonical action kinds of the default alphabet.
KIND_TWEET = "tweet"
KIND_REPLY = "reply"
KIND_RETWEET = "retweet"

# Source dumps sometimes carry richer kinds; quote-tweets and media posts
# collapse onto plain tweets rather than being rejected.
_KIND_ALIASES = {
    "tweet": KIND_TWEET,
    "reply": KIND_REPLY,
    "retweet": KIND_RETWEET,
    "quote": KIND_TWEET,
    "quoted": KIND_TWEET,
    "quote_tweet": KIND_TWEET,
    "media": KIND_TWEET,
}


def normalize_kind(raw: str) -> str:
    """Map a raw action-kind string to its canonical kind.

    Unknown kinds pass through unchanged; they surface later as
    ``UnknownActionKind`` when encoded against an alphabet.
    """
    return _KIND_ALIASES.get(raw.strip().lower(), raw)


@dataclass(frozen=True)
class Alphabet:
    """Ordered mapping of action kinds to single-character symbols."""

    symbols: tuple[tuple[str, str], ...]  # (symbol, action_kind) pairs
    alphabet_id: str = "custom"

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("alphabet needs at least one symbol")
        syms = [s for s, _ in self.symbols]
        kinds = [k for _, k in self.symbols]
        for s in syms:
            if len(s) != 1:
                raise ValueError(f"symbol {s!r} is not a single character")
        if len(set(syms)) != len(syms):
            raise ValueError("alphabet symbols must be pairwise distinct")
        if len(set(kinds)) != len(kinds):
            raise ValueError("each action kind must map to exactly one symbol")

    @property
    def chars(self) -> str:
        return "".join(s for s, _ in self.symbols)

    def symbol_for(self, kind: str) -> Optional[str]:
        for s, k in self.symbols:
            if k == kind:
                return s
        return None

    def kind_for(self, symbol: str) -> Optional[str]:
        for s, k in self.symbols:
            if s == symbol:
                return k
        return None

    def __contains__(self, symbol: str) -> bool:
        return any(s == symbol for s, _ in self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


#: Default three-action alphabet: A=tweet, C=reply, T=retweet.
DEFAULT_ALPHABET = Alphabet(
    symbols=(("A", KIND_TWEET), ("C", KIND_REPLY), ("T", KIND_RETWEET)),
    alphabet_id="act3",
)


@dataclass(frozen=True)
class TimelineEvent:
    timestamp: datetime
    kind: str
    text: Optional[str] = None
    url_count: Optional[int] = None
    mention_count: Optional[int] = None


@dataclass
class AccountTimeline:
    """Chronologically ordered account actions."""

    account_id: str
    events: list[TimelineEvent] = field(default_factory=list)

    def sorted_events(self) -> list[TimelineEvent]:
        """Events in canonical order (oldest first, stable)."""
        return sorted(self.events, key=lambda e: e.timestamp)


@dataclass(frozen=True)
class DnaSequence:
    """One account's digital-DNA string over a given alphabet."""

    account_id: str
    chars: str
    alphabet_id: str = DEFAULT_ALPHABET.alphabet_id

    def __len__(self) -> int:
        return len(self.chars)


def encode_timeline(timeline: AccountTimeline, alphabet: Alphabet = DEFAULT_ALPHABET) -> DnaSequence:
    """Encode a timeline into a DNA sequence, oldest action first.

    Raises ``UnknownActionKind`` (with the offending kind and event index)
    when an event kind has no symbol in the alphabet.
    """
    out = []
    for i, event in enumerate(timeline.sorted_events()):
        symbol = alphabet.symbol_for(normalize_kind(event.kind))
        if symbol is None:
            raise UnknownActionKind(event.kind, i, timeline.account_id)
        out.append(symbol)
    return DnaSequence(timeline.account_id, "".join(out), alphabet.alphabet_id)


@dataclass(frozen=True)
class ValidationReport:
    """Positions of characters outside the alphabet; empty means valid."""

    invalid_positions: tuple[int, ...]

    @property
    def valid(self) -> bool:
        return not self.invalid_positions


def validate_sequence(seq: DnaSequence, alphabet: Alphabet = DEFAULT_ALPHABET) -> ValidationReport:
    """Report every position whose character is not an alphabet member."""
    members = set(alphabet.chars)
    bad = tuple(i for i, c in enumerate(seq.chars) if c not in members)
    return ValidationReport(bad)


def max_sequence_length(sequences: Iterable[DnaSequence]) -> int:
    """Longest sequence length in a batch (0 for an empty batch)."""
    return max((len(s) for s in sequences), default=0)
