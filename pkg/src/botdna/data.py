"""Dataset ingestion, split assignment, and synthetic account generation.

Accounts are stored one-per-line as JSON (see ``load_dataset`` for the
schema) or in a flat CSV variant that keeps timeline timing and kinds but
drops tweet texts and per-tweet counts. Splitting is stratified by label;
synthetic populations give bots shared near-duplicate action sequences and
humans independent random behavior, so the two classes are separable by
sequence similarity alone.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .dna import (DEFAULT_ALPHABET, AccountTimeline, Alphabet, TimelineEvent)
from .errors import (ConfigError, EmptyClass, IoFailure, ParseError,
                     SchemaError)
from .features import AccountProfile
from .metrics import LABEL_BOT, LABEL_HUMAN

SPLIT_TRAIN = "train"
SPLIT_VAL = "val"
SPLIT_TEST = "test"
SPLITS = (SPLIT_TRAIN, SPLIT_VAL, SPLIT_TEST)

DEFAULT_RATIOS = (0.6, 0.3, 0.1)

#: Fixed "now" used when synthesizing account histories.
SYNTH_REFERENCE_TIME = datetime(2020, 1, 1, tzinfo=timezone.utc)

_PROFILE_COUNT_FIELDS = ("statuses_count", "followers_count", "friends_count",
                         "listed_count", "favourites_count")
_PROFILE_BOOL_FIELDS = ("default_profile", "profile_use_background_image",
                        "verified")
_PROFILE_TEXT_FIELDS = ("screen_name", "name", "description")


@dataclass
class LabeledAccount:
    profile: AccountProfile
    timeline: AccountTimeline
    label: Optional[str] = None  # "bot" | "human"; None when unknown
    provided_split: Optional[str] = None  # "train" | "val" | "test"

    @property
    def account_id(self) -> str:
        return self.timeline.account_id


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint, exhaustive account_id -> split mapping over labeled accounts."""

    by_account: dict[str, str]
    ratios: tuple[float, float, float]
    seed: int

    def split_of(self, account_id: str) -> str:
        return self.by_account[account_id]

    def ids_for(self, split: str) -> list[str]:
        return [a for a, s in self.by_account.items() if s == split]

    def counts(self) -> dict[str, int]:
        out = {s: 0 for s in SPLITS}
        for s in self.by_account.values():
            out[s] += 1
        return out


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------

def parse_timestamp(value, line: Optional[int] = None,
                    field_name: str = "created_at") -> datetime:
    """ISO-8601 to aware UTC datetime; accepts a trailing 'Z'."""
    if not isinstance(value, str):
        raise ParseError("timestamp must be an ISO-8601 string", line, field_name)
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ParseError(f"invalid ISO-8601 timestamp {value!r}", line,
                         field_name) from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat()


def _require(record: dict, key: str, line: int):
    if key not in record or record[key] is None:
        raise SchemaError(f"line {line}: missing required field '{key}'")
    return record[key]


def _opt_count(record: dict, key: str, line: int) -> Optional[int]:
    value = record.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ParseError("must be a nonnegative integer", line, key)
    return value


def _parse_label(value, line: int) -> Optional[str]:
    if value is None:
        return None
    if value not in (LABEL_BOT, LABEL_HUMAN):
        raise ParseError(f"label must be 'bot' or 'human', got {value!r}",
                         line, "label")
    return value


def _parse_split(value, line: int) -> Optional[str]:
    if value is None or value == "none":
        return None
    if value not in SPLITS:
        raise ParseError(f"split must be one of {SPLITS}, got {value!r}",
                         line, "split")
    return value


def _parse_profile(record: dict, line: int) -> AccountProfile:
    raw = record.get("profile") or {}
    if not isinstance(raw, dict):
        raise ParseError("profile must be an object", line, "profile")
    kwargs = {}
    for key in _PROFILE_COUNT_FIELDS:
        value = raw.get(key, 0)
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ParseError("must be a nonnegative integer", line, key)
        kwargs[key] = value
    for key in _PROFILE_BOOL_FIELDS:
        value = raw.get(key, False)
        if not isinstance(value, bool):
            raise ParseError("must be a boolean", line, key)
        kwargs[key] = value
    for key in _PROFILE_TEXT_FIELDS:
        value = raw.get(key, "")
        if not isinstance(value, str):
            raise ParseError("must be a string", line, key)
        kwargs[key] = value
    if "created_at" in raw:
        kwargs["created_at"] = parse_timestamp(raw["created_at"], line,
                                               "profile.created_at")
    return AccountProfile(**kwargs)


def _parse_tweets(record: dict, account_id: str, line: int) -> AccountTimeline:
    raw = record.get("tweets", [])
    if not isinstance(raw, list):
        raise ParseError("tweets must be an array", line, "tweets")
    events = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ParseError(f"tweet {i} must be an object", line, "tweets")
        ts = parse_timestamp(_require(item, "created_at", line), line,
                             f"tweets[{i}].created_at")
        kind = _require(item, "kind", line)
        if not isinstance(kind, str) or not kind:
            raise ParseError("kind must be a nonempty string", line,
                             f"tweets[{i}].kind")
        text = item.get("text")
        if text is not None and not isinstance(text, str):
            raise ParseError("text must be a string", line, f"tweets[{i}].text")
        events.append(TimelineEvent(
            timestamp=ts, kind=kind, text=text,
            url_count=_opt_count(item, "num_urls", line),
            mention_count=_opt_count(item, "num_mentions", line),
        ))
    timeline = AccountTimeline(account_id=account_id, events=events)
    timeline.events = timeline.sorted_events()
    return timeline


# ---------------------------------------------------------------------------
# Load / save
# ---------------------------------------------------------------------------

def _load_jsonl(path: Path) -> list[LabeledAccount]:
    accounts = []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    for lineno, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", lineno) from exc
        if not isinstance(record, dict):
            raise ParseError("record must be a JSON object", lineno)
        account_id = _require(record, "id", lineno)
        if not isinstance(account_id, str) or not account_id:
            raise ParseError("id must be a nonempty string", lineno, "id")
        accounts.append(LabeledAccount(
            profile=_parse_profile(record, lineno),
            timeline=_parse_tweets(record, account_id, lineno),
            label=_parse_label(record.get("label"), lineno),
            provided_split=_parse_split(record.get("split"), lineno),
        ))
    return accounts


_CSV_HEADER = ("id", "label", "split",
               *_PROFILE_COUNT_FIELDS, *_PROFILE_BOOL_FIELDS,
               *_PROFILE_TEXT_FIELDS, "created_at",
               "tweet_times", "tweet_kinds")


def _load_csv(path: Path) -> list[LabeledAccount]:
    """Flat variant: one account per row, timeline as joined time/kind lists.

    Tweet texts and per-tweet URL/mention counts are not representable in
    this format; use JSONL when they matter.
    """
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(_CSV_HEADER):
            raise SchemaError(
                f"line 1: expected CSV header {','.join(_CSV_HEADER)}"
            )
        accounts = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(_CSV_HEADER):
                raise ParseError(
                    f"expected {len(_CSV_HEADER)} columns, got {len(row)}",
                    lineno)
            record = dict(zip(_CSV_HEADER, row))
            account_id = record["id"]
            if not account_id:
                raise ParseError("id must be nonempty", lineno, "id")
            kwargs = {}
            for key in _PROFILE_COUNT_FIELDS:
                try:
                    kwargs[key] = int(record[key])
                except ValueError as exc:
                    raise ParseError("must be an integer", lineno, key) from exc
                if kwargs[key] < 0:
                    raise ParseError("must be a nonnegative integer", lineno, key)
            for key in _PROFILE_BOOL_FIELDS:
                if record[key] not in ("0", "1"):
                    raise ParseError("must be 0 or 1", lineno, key)
                kwargs[key] = record[key] == "1"
            for key in _PROFILE_TEXT_FIELDS:
                kwargs[key] = record[key]
            kwargs["created_at"] = parse_timestamp(record["created_at"],
                                                   lineno, "created_at")
            times = record["tweet_times"].split("|") if record["tweet_times"] else []
            kinds = record["tweet_kinds"].split("|") if record["tweet_kinds"] else []
            if len(times) != len(kinds):
                raise ParseError("tweet_times and tweet_kinds lengths differ",
                                 lineno, "tweet_kinds")
            events = [
                TimelineEvent(timestamp=parse_timestamp(t, lineno, "tweet_times"),
                              kind=k)
                for t, k in zip(times, kinds)
            ]
            timeline = AccountTimeline(account_id=account_id, events=events)
            timeline.events = timeline.sorted_events()
            accounts.append(LabeledAccount(
                profile=AccountProfile(**kwargs),
                timeline=timeline,
                label=_parse_label(record["label"] or None, lineno),
                provided_split=_parse_split(record["split"] or None, lineno),
            ))
        return accounts


def load_dataset(path, format: str = "jsonl") -> list[LabeledAccount]:
    """Read labeled accounts from disk.

    JSONL schema, one object per line:
      id (string, required); label ("bot"|"human", optional);
      split ("train"|"val"|"test", optional); profile (object with the
      AccountProfile fields, created_at as ISO-8601 UTC); tweets (array of
      {created_at: ISO-8601, kind, text?, num_urls?, num_mentions?}).
    Events come back sorted oldest-first. The "csv" format reads the flat
    variant written by ``save_dataset``.
    """
    path = Path(path)
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "csv":
        return _load_csv(path)
    raise ConfigError(f"unknown dataset format '{format}'")


def _account_record(account: LabeledAccount) -> dict:
    profile = account.profile
    record: dict = {"id": account.account_id}
    if account.label is not None:
        record["label"] = account.label
    if account.provided_split is not None:
        record["split"] = account.provided_split
    record["profile"] = {
        **{k: getattr(profile, k) for k in _PROFILE_COUNT_FIELDS},
        **{k: getattr(profile, k) for k in _PROFILE_BOOL_FIELDS},
        **{k: getattr(profile, k) for k in _PROFILE_TEXT_FIELDS},
        "created_at": format_timestamp(profile.created_at),
    }
    tweets = []
    for event in account.timeline.events:
        item: dict = {"created_at": format_timestamp(event.timestamp),
                      "kind": event.kind}
        if event.text is not None:
            item["text"] = event.text
        if event.url_count is not None:
            item["num_urls"] = event.url_count
        if event.mention_count is not None:
            item["num_mentions"] = event.mention_count
        tweets.append(item)
    record["tweets"] = tweets
    return record


def save_dataset(accounts: Iterable[LabeledAccount], path,
                 format: str = "jsonl") -> None:
    """Write accounts to disk; inverse of ``load_dataset`` for JSONL.

    The CSV variant flattens each account to one row and drops tweet texts
    and per-tweet counts (kinds and timestamps survive).
    """
    path = Path(path)
    if format == "jsonl":
        try:
            with path.open("w") as handle:
                for account in accounts:
                    handle.write(json.dumps(_account_record(account),
                                            sort_keys=True,
                                            separators=(",", ":")))
                    handle.write("\n")
        except OSError as exc:
            raise IoFailure(path, exc) from exc
        return
    if format == "csv":
        try:
            with path.open("w", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(_CSV_HEADER)
                for account in accounts:
                    p = account.profile
                    writer.writerow([
                        account.account_id,
                        account.label or "",
                        account.provided_split or "",
                        *[getattr(p, k) for k in _PROFILE_COUNT_FIELDS],
                        *[int(getattr(p, k)) for k in _PROFILE_BOOL_FIELDS],
                        *[getattr(p, k) for k in _PROFILE_TEXT_FIELDS],
                        format_timestamp(p.created_at),
                        "|".join(format_timestamp(e.timestamp)
                                 for e in account.timeline.events),
                        "|".join(e.kind for e in account.timeline.events),
                    ])
        except OSError as exc:
            raise IoFailure(path, exc) from exc
        return
    raise ConfigError(f"unknown dataset format '{format}'")


# ---------------------------------------------------------------------------
# Split assignment
# ---------------------------------------------------------------------------

def _apportion(n: int, ratios: tuple[float, float, float]) -> list[int]:
    """Largest-remainder split of n items into three integer buckets."""
    quotas = [n * r for r in ratios]
    base = [int(q) for q in quotas]
    leftover = n - sum(base)
    order = sorted(range(3), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def assign_splits(accounts: Iterable[LabeledAccount],
                  ratios: tuple[float, float, float] = DEFAULT_RATIOS,
                  seed: int = 0) -> SplitAssignment:
    """Partition labeled accounts into train/val/test.

    Accounts carrying a provided split keep it. The rest are split per
    label group (stratified) with a seeded shuffle, so class proportions
    carry over to every split. Unlabeled accounts are left out.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ConfigError(f"ratios must be three positive numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must sum to 1, got {sum(ratios)!r}")

    labeled = [a for a in accounts if a.label is not None]
    by_label: dict[str, list[LabeledAccount]] = {LABEL_BOT: [], LABEL_HUMAN: []}
    for account in labeled:
        by_label[account.label].append(account)
    for label, group in by_label.items():
        if not group:
            raise EmptyClass(f"no accounts labeled '{label}'")

    assignment: dict[str, str] = {}
    rng = np.random.default_rng(seed)
    for label in (LABEL_BOT, LABEL_HUMAN):
        group = by_label[label]
        fixed = [a for a in group if a.provided_split is not None]
        free = [a for a in group if a.provided_split is None]
        for account in fixed:
            assignment[account.account_id] = account.provided_split
        order = rng.permutation(len(free))
        counts = _apportion(len(free), ratios)
        bounds = (counts[0], counts[0] + counts[1])
        for rank, idx in enumerate(order):
            if rank < bounds[0]:
                split = SPLIT_TRAIN
            elif rank < bounds[1]:
                split = SPLIT_VAL
            else:
                split = SPLIT_TEST
            assignment[free[idx].account_id] = split
    return SplitAssignment(by_account=assignment, ratios=ratios, seed=seed)


# ---------------------------------------------------------------------------
# Synthetic generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    n_bots: int = 500
    n_humans: int = 500
    min_length: int = 200
    max_length: int = 1000
    n_templates: int = 5
    noise_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.n_bots < 0 or self.n_humans < 0:
            raise ConfigError("account counts must be nonnegative")
        if self.n_templates < 1:
            raise ConfigError("n_templates must be positive")
        if not (0.0 <= self.noise_rate < 0.5):
            raise ConfigError("noise_rate must lie in [0, 0.5)")
        if not (1 <= self.min_length <= self.max_length <= 3200):
            raise ConfigError("length range must satisfy 1 <= min <= max <= 3200")


def _synth_profile(rng: np.random.Generator, account_id: str, display: str,
                   n_events: int) -> tuple[AccountProfile, datetime]:
    """Profile with log-uniform counts; returns it plus the history start."""
    followers = int(10 ** rng.uniform(0, 5))
    friends = int(10 ** rng.uniform(0, 5))
    favourites = int(10 ** rng.uniform(0, 5))
    listed = int(10 ** rng.uniform(0, 3))
    default_profile = bool(rng.random() < 0.5)
    background = bool(rng.random() < 0.5)
    verified = bool(rng.random() < 0.05)
    age_days = int(rng.integers(30, 3651))
    created_at = SYNTH_REFERENCE_TIME - timedelta(days=age_days)
    profile = AccountProfile(
        statuses_count=n_events,
        followers_count=followers,
        friends_count=friends,
        listed_count=listed,
        favourites_count=favourites,
        default_profile=default_profile,
        profile_use_background_image=background,
        verified=verified,
        screen_name=account_id,
        name=display,
        description=f"synthetic account {account_id}",
        created_at=created_at,
    )
    return profile, created_at


def _events_from_states(states: np.ndarray, rng: np.random.Generator,
                        alphabet: Alphabet, created_at: datetime,
                        ) -> list[TimelineEvent]:
    n = len(states)
    span = SYNTH_REFERENCE_TIME - created_at
    step = span / (n + 1)
    urls = rng.integers(0, 3, size=n)
    mentions = rng.integers(0, 3, size=n)
    kinds = [alphabet.symbols[s][1] for s in states]
    return [
        TimelineEvent(timestamp=created_at + step * (i + 1), kind=kinds[i],
                      url_count=int(urls[i]), mention_count=int(mentions[i]))
        for i in range(n)
    ]


def generate_synthetic(cfg: SynthConfig = SynthConfig(),
                       alphabet: Alphabet = DEFAULT_ALPHABET,
                       ) -> list[LabeledAccount]:
    """Build a deterministic bot/human population for desk-scale runs.

    Bots: ``n_templates`` random template sequences are drawn first (each
    with its own length); each bot copies one template round-robin and
    flips every position to a different symbol with probability
    ``noise_rate``. Humans: each account walks its own first-order Markov
    chain with Dirichlet(1,..,1) transition rows. Profiles use log-uniform
    counts and ``statuses_count`` equal to the timeline length. All draws
    come from one generator seeded with ``cfg.seed``.
    """
    rng = np.random.default_rng(cfg.seed)
    k = len(alphabet)
    templates = []
    for _ in range(cfg.n_templates):
        length = int(rng.integers(cfg.min_length, cfg.max_length + 1))
        templates.append(rng.integers(0, k, size=length))

    accounts: list[LabeledAccount] = []
    for i in range(cfg.n_bots):
        template = templates[i % cfg.n_templates]
        states = template.copy()
        flips = rng.random(len(states)) < cfg.noise_rate
        n_flips = int(flips.sum())
        if n_flips:
            # Adding 1..k-1 modulo k always lands on a different symbol.
            offsets = rng.integers(1, k, size=n_flips)
            states[flips] = (states[flips] + offsets) % k
        account_id = f"bot_{i:04d}"
        profile, created_at = _synth_profile(rng, account_id, f"Bot {i}",
                                             len(states))
        events = _events_from_states(states, rng, alphabet, created_at)
        accounts.append(LabeledAccount(
            profile=profile,
            timeline=AccountTimeline(account_id=account_id, events=events),
            label=LABEL_BOT,
        ))

    for j in range(cfg.n_humans):
        length = int(rng.integers(cfg.min_length, cfg.max_length + 1))
        transitions = rng.dirichlet(np.ones(k), size=k)
        cumulative = np.cumsum(transitions, axis=1)
        state = int(rng.integers(0, k))
        uniform = rng.random(length)
        states = np.empty(length, dtype=np.int64)
        for t in range(length):
            states[t] = state
            state = int(np.searchsorted(cumulative[state], uniform[t],
                                        side="right"))
            state = min(state, k - 1)  # guard against u == 1.0 rounding
        account_id = f"human_{j:04d}"
        profile, created_at = _synth_profile(rng, account_id, f"Human {j}",
                                             length)
        events = _events_from_states(states, rng, alphabet, created_at)
        accounts.append(LabeledAccount(
            profile=profile,
            timeline=AccountTimeline(account_id=account_id, events=events),
            label=LABEL_HUMAN,
        ))
    return accounts
