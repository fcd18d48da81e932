"""Account features and SuperTML image composition.

The 26 features below describe the account profile and timeline; their
order is fixed and shared by the CSV export and the rendered text panel.
Rates use clamped denominators so every value stays finite, including for
brand-new or empty accounts. The SuperTML renderer stacks a "name: value"
text panel above a scaled copy of the account's DNA image on one square
canvas, so a plain image classifier can consume the tabular features too.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields as dc_fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import font
from .dna import AccountTimeline, DnaSequence
from .errors import IoFailure, LayoutOverflow
from .imaging import (
    DnaImage,
    Palette,
    DEFAULT_PALETTE,
    image_side,
    render_sequence,
)

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class AccountProfile:
    statuses_count: int = 0
    followers_count: int = 0
    friends_count: int = 0
    listed_count: int = 0
    favourites_count: int = 0
    default_profile: bool = False
    profile_use_background_image: bool = False
    verified: bool = False
    screen_name: str = ""
    name: str = ""
    description: str = ""
    created_at: datetime = EPOCH

    def __post_init__(self):
        for attr in ("statuses_count", "followers_count", "friends_count",
                     "listed_count", "favourites_count"):
            if getattr(self, attr) < 0:
                raise ValueError(f"{attr} must be nonnegative")


@dataclass(frozen=True)
class FeatureVector:
    """The 26 account features, in their canonical order."""

    statuses_count: float = 0.0
    followers_count: float = 0.0
    friends_count: float = 0.0
    listed_count: float = 0.0
    default_profile: float = 0.0
    favourites_count: float = 0.0
    profile_use_background_image: float = 0.0
    verified: float = 0.0
    followers_growth_rate: float = 0.0
    friends_growth_rate: float = 0.0
    favourites_growth_rate: float = 0.0
    listed_growth_rate: float = 0.0
    followers_friends_rate: float = 0.0
    screen_name_length: float = 0.0
    screen_name_digits_count: float = 0.0
    description_length: float = 0.0
    description_digits_count: float = 0.0
    name_length: float = 0.0
    name_digits_count: float = 0.0
    total_tweets_chars_count: float = 0.0
    total_urls_in_tweets: float = 0.0
    total_mentions_in_tweets: float = 0.0
    urls_tweets_rate: float = 0.0
    mentions_tweets_rate: float = 0.0
    chars_tweets_rate: float = 0.0
    account_age: float = 0.0

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)

    def as_array(self) -> np.ndarray:
        return np.array(self.values(), dtype=np.float64)


FEATURE_NAMES: tuple[str, ...] = tuple(f.name for f in dc_fields(FeatureVector))


def _digit_count(text: str) -> int:
    return sum(1 for c in text if "0" <= c <= "9")


def _whole_days(start: datetime, end: datetime) -> int:
    return max(0, int((end - start).total_seconds() // 86400))


def extract_features(profile: AccountProfile, timeline: AccountTimeline,
                     reference_time: datetime) -> FeatureVector:
    """Compute all 26 features for one account.

    Growth rates are per-day counts with the age clamped to at least one
    day; per-tweet rates clamp statuses_count the same way. URL and mention
    totals prefer the explicit per-event counts and fall back to counting
    "http" substrings and "@"-prefixed tokens in the text.
    """
    age_days = _whole_days(profile.created_at, reference_time)
    age_denom = max(age_days, 1)
    statuses_denom = max(profile.statuses_count, 1)

    total_chars = 0
    total_urls = 0
    total_mentions = 0
    for event in timeline.events:
        text = event.text or ""
        total_chars += len(text)
        if event.url_count is not None:
            total_urls += event.url_count
        else:
            total_urls += text.count("http")
        if event.mention_count is not None:
            total_mentions += event.mention_count
        else:
            total_mentions += sum(1 for tok in text.split() if tok.startswith("@"))

    return FeatureVector(
        statuses_count=float(profile.statuses_count),
        followers_count=float(profile.followers_count),
        friends_count=float(profile.friends_count),
        listed_count=float(profile.listed_count),
        default_profile=float(bool(profile.default_profile)),
        favourites_count=float(profile.favourites_count),
        profile_use_background_image=float(bool(profile.profile_use_background_image)),
        verified=float(bool(profile.verified)),
        followers_growth_rate=profile.followers_count / age_denom,
        friends_growth_rate=profile.friends_count / age_denom,
        favourites_growth_rate=profile.favourites_count / age_denom,
        listed_growth_rate=profile.listed_count / age_denom,
        followers_friends_rate=profile.followers_count / max(profile.friends_count, 1),
        screen_name_length=float(len(profile.screen_name)),
        screen_name_digits_count=float(_digit_count(profile.screen_name)),
        description_length=float(len(profile.description)),
        description_digits_count=float(_digit_count(profile.description)),
        name_length=float(len(profile.name)),
        name_digits_count=float(_digit_count(profile.name)),
        total_tweets_chars_count=float(total_chars),
        total_urls_in_tweets=float(total_urls),
        total_mentions_in_tweets=float(total_mentions),
        urls_tweets_rate=total_urls / statuses_denom,
        mentions_tweets_rate=total_mentions / statuses_denom,
        chars_tweets_rate=total_chars / statuses_denom,
        account_age=float(age_days),
    )


def format_value(value: float, precision: int = 4) -> str:
    """Compact numeric formatting: exact integers, else N significant digits."""
    if math.isfinite(value) and float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return f"{value:.{precision}g}"


# ---------------------------------------------------------------------------
# SuperTML composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupertmlLayout:
    """Geometry of the composite image: text panel above, DNA panel below."""

    canvas_side: int = 224
    panel_split: float = 0.6  # fraction of rows given to the text panel
    columns: int = 2
    glyph_scale: int = 1
    value_precision: int = 4

    def __post_init__(self):
        if not (0.0 < self.panel_split < 1.0):
            raise ValueError("panel_split must lie in (0, 1)")
        if self.canvas_side < 1 or self.columns < 1 or self.glyph_scale < 1:
            raise ValueError("canvas_side, columns and glyph_scale must be positive")

    @property
    def split_row(self) -> int:
        return int(self.canvas_side * self.panel_split)


DEFAULT_LAYOUT = SupertmlLayout()


def render_supertml(features: FeatureVector, seq: DnaSequence,
                    layout: SupertmlLayout = DEFAULT_LAYOUT,
                    palette: Palette = DEFAULT_PALETTE,
                    dna_side: Optional[int] = None) -> DnaImage:
    """Compose the feature text panel and the DNA image on one canvas.

    Text lines read "name: value" in feature order, white on black, filled
    column by column; lines wider than their column clip at the column edge.
    The DNA panel holds the row-major DNA image scaled by the largest
    integer factor that fits, centered; everything else stays black.
    ``dna_side`` overrides the per-account image side so a whole batch can
    share the side derived from its longest sequence.
    """
    canvas = np.zeros((layout.canvas_side, layout.canvas_side), dtype=np.uint8)
    split = layout.split_row

    lines = [
        f"{name}: {format_value(value, layout.value_precision)}"
        for name, value in zip(FEATURE_NAMES, features.values())
    ]
    lines_per_col = math.ceil(len(lines) / layout.columns)
    line_h = font.LINE_HEIGHT * layout.glyph_scale
    if lines_per_col * line_h > split:
        raise LayoutOverflow(
            f"{lines_per_col} lines of height {line_h} exceed the "
            f"{split}-row text panel"
        )
    col_w = layout.canvas_side // layout.columns
    for i, line in enumerate(lines):
        col, row = divmod(i, lines_per_col)
        x0 = col * col_w
        font.draw_text(canvas, line, x=x0, y=row * line_h,
                       scale=layout.glyph_scale, clip_x=x0 + col_w)

    if len(seq) > 0:
        side = dna_side if dna_side is not None else image_side(len(seq))
        sub = render_sequence(seq, side, palette)
        panel_h = layout.canvas_side - split
        factor = min(panel_h, layout.canvas_side) // side
        if factor < 1:
            raise LayoutOverflow(
                f"DNA image side {side} exceeds the {panel_h}-row DNA panel"
            )
        scaled = np.kron(sub.pixels, np.ones((factor, factor), dtype=np.uint8))
        y0 = split + (panel_h - side * factor) // 2
        x0 = (layout.canvas_side - side * factor) // 2
        canvas[y0 : y0 + side * factor, x0 : x0 + side * factor] = scaled

    return DnaImage(side=layout.canvas_side, pixels=canvas,
                    source_len=layout.canvas_side * layout.canvas_side)


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def write_features_csv(rows: Iterable[tuple[str, FeatureVector]], destination) -> None:
    """One account per row: id column followed by the 26 features in order."""
    path = Path(destination)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("id",) + FEATURE_NAMES)
            for account_id, vec in rows:
                writer.writerow([account_id] + [repr(v) for v in vec.values()])
    except OSError as exc:
        raise IoFailure(path, exc) from exc


def read_features_csv(source) -> dict[str, FeatureVector]:
    """Inverse of ``write_features_csv``; keyed by account id."""
    path = Path(source)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["id", *FEATURE_NAMES]:
                raise IoFailure(path, ValueError("unexpected features CSV header"))
            out = {}
            for row in reader:
                values = {n: float(v) for n, v in zip(FEATURE_NAMES, row[1:])}
                out[row[0]] = FeatureVector(**values)
            return out
    except OSError as exc:
        raise IoFailure(path, exc) from exc
