"""botdna: social-account timelines as DNA strings, grayscale images, and
a compact from-scratch CNN that separates bots from genuine accounts."""

__version__ = "0.1.0"

from .dna import (DEFAULT_ALPHABET, KIND_REPLY, KIND_RETWEET, KIND_TWEET,
                  AccountTimeline, Alphabet, DnaSequence, TimelineEvent,
                  ValidationReport, encode_timeline, max_sequence_length,
                  normalize_kind, validate_sequence)
from .errors import (BotDnaError, ConfigError, EmptyClass, EmptyMatrix,
                     EmptySplit, InputError, InvalidLength, IoFailure,
                     LayoutOverflow, LengthMismatch, NonFiniteGradient,
                     NonFiniteLoss, ParseError, SchemaError, SequenceTooLong,
                     ShapeMismatch, UnknownActionKind, UnknownSymbol,
                     UnmappableIntensity)
from .features import (DEFAULT_LAYOUT, FEATURE_NAMES, AccountProfile,
                       FeatureVector, SupertmlLayout, extract_features,
                       format_value, read_features_csv, render_supertml,
                       write_features_csv)
from .imaging import (DEFAULT_PALETTE, PADDING_INTENSITY, DnaImage, Palette,
                      decode_image, image_side, pgm_bytes, png_bytes,
                      read_image, read_pgm, read_png, render_sequence,
                      write_image)
from .metrics import (LABEL_BOT, LABEL_HUMAN, ConfusionMatrix, MetricsReport,
                      compute_metrics, confusion, metrics_csv, metrics_table)
from .data import (DEFAULT_RATIOS, LabeledAccount, SplitAssignment,
                   SynthConfig, assign_splits, generate_synthetic,
                   load_dataset, save_dataset)

__all__ = [
    "AccountProfile", "AccountTimeline", "Alphabet", "BotDnaError",
    "ConfigError", "ConfusionMatrix", "DEFAULT_ALPHABET", "DEFAULT_LAYOUT",
    "DEFAULT_PALETTE", "DEFAULT_RATIOS", "DnaImage", "DnaSequence",
    "EmptyClass", "EmptyMatrix", "EmptySplit", "FEATURE_NAMES",
    "FeatureVector", "InputError", "InvalidLength", "IoFailure",
    "KIND_REPLY", "KIND_RETWEET", "KIND_TWEET", "LABEL_BOT", "LABEL_HUMAN",
    "LabeledAccount", "LayoutOverflow", "LengthMismatch", "MetricsReport",
    "NonFiniteGradient", "NonFiniteLoss", "PADDING_INTENSITY", "Palette",
    "ParseError", "SchemaError", "SequenceTooLong", "ShapeMismatch",
    "SplitAssignment", "SupertmlLayout", "SynthConfig", "TimelineEvent",
    "UnknownActionKind", "UnknownSymbol", "UnmappableIntensity",
    "ValidationReport", "__version__", "assign_splits", "compute_metrics",
    "confusion", "decode_image", "encode_timeline", "extract_features",
    "format_value", "generate_synthetic", "image_side", "load_dataset",
    "max_sequence_length", "metrics_csv", "metrics_table", "normalize_kind",
    "pgm_bytes", "png_bytes", "read_features_csv", "read_image", "read_pgm",
    "read_png", "render_sequence", "render_supertml", "save_dataset",
    "validate_sequence", "write_features_csv", "write_image",
]
