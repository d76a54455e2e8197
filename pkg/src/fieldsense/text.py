"""Text normalization, per-channel vocabularies, and multi-hot feature encoding."""

from __future__ import annotations

import html
import re
from dataclasses import dataclass
from functools import cache, cached_property
from pathlib import Path
from urllib.parse import urlsplit

import numpy as np

from .errors import EmptyCorpusError
from .extractor import FieldFeatures

# Channel order is fixed; vectors concatenate channel encodings in this order.
CHANNELS = ("label", "name", "id", "type", "url")

_CAMEL_LOWER_UPPER = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_CAMEL_ACRONYM = re.compile(r"(?<=[A-Z])(?=[A-Z][a-z])")
# Letter runs (unicode) or digit runs; everything else is a separator.
_TOKEN = re.compile(r"[^\W\d_]+|\d+", re.UNICODE)


def load_stop_list(path: str | Path) -> frozenset[str]:
    """Load a stop list: plain text, one token per line, blanks ignored."""
    tokens = (line.strip().lower() for line in Path(path).read_text(encoding="utf-8").splitlines())
    return frozenset(t for t in tokens if t)


@cache
def default_stop_words() -> frozenset[str]:
    return load_stop_list(Path(__file__).parent / "data" / "stopwords.txt")


@cache
def default_url_stop_words() -> frozenset[str]:
    return load_stop_list(Path(__file__).parent / "data" / "stopwords_url.txt")


def _split_tokens(text: str) -> list[str]:
    text = _CAMEL_ACRONYM.sub(" ", _CAMEL_LOWER_UPPER.sub(" ", text))
    return [t for t in _TOKEN.findall(text.lower()) if not t.isdigit()]


def normalize(
    raw: str,
    channel: str,
    stop_words: frozenset[str] | None = None,
    url_stop_words: frozenset[str] | None = None,
) -> list[str]:
    """Normalize channel text into lowercase tokens.

    Splits on whitespace, punctuation, underscores, hyphens, digit and
    camelCase boundaries; drops pure-digit tokens and stop-list tokens.
    The `type` channel is categorical (one token, no splitting); the `url`
    channel drops the scheme and query, tokenizes host + path, and applies
    the URL stop list instead of the prose one.
    """
    if channel == "type":
        token = raw.strip().lower()
        return [token] if token else []

    raw = html.unescape(raw)
    if channel == "url":
        parts = urlsplit(raw)
        text = f"{parts.netloc} {parts.path}" if (parts.scheme or parts.netloc) else raw
        stops = url_stop_words if url_stop_words is not None else default_url_stop_words()
    else:
        text = raw
        stops = stop_words if stop_words is not None else default_stop_words()
    return [t for t in _split_tokens(text) if t not in stops]


def channel_value(f: FieldFeatures, channel: str) -> str:
    """Raw text of one feature channel."""
    return {
        "label": f.label_text,
        "name": f.name,
        "id": f.id,
        "type": f.control_type,
        "url": f.page_url,
    }[channel]


@dataclass(frozen=True)
class Vocabulary:
    """Per-channel token dictionaries, concatenated into one bit layout."""

    channels: tuple[tuple[str, tuple[str, ...]], ...]

    @cached_property
    def index(self) -> dict[str, dict[str, int]]:
        return {name: {tok: i for i, tok in enumerate(tokens)} for name, tokens in self.channels}

    @cached_property
    def spans(self) -> tuple[tuple[int, int], ...]:
        """Per-channel (offset, length), in channel order."""
        spans = []
        offset = 0
        for _, tokens in self.channels:
            spans.append((offset, len(tokens)))
            offset += len(tokens)
        return tuple(spans)

    @property
    def total_width(self) -> int:
        return sum(len(tokens) for _, tokens in self.channels)


@dataclass(eq=False)
class FeatureVector:
    """Concatenated multi-hot encoding of one field."""

    bits: np.ndarray  # uint8, length == vocabulary total_width
    spans: tuple[tuple[int, int], ...]


def build_vocabulary(
    corpus: list[FieldFeatures],
    min_frequency: int = 1,
    stop_words: frozenset[str] | None = None,
    url_stop_words: frozenset[str] | None = None,
) -> Vocabulary:
    """Build per-channel dictionaries from a corpus.

    Tokens with frequency >= min_frequency are kept, ordered by descending
    frequency then lexicographically, so construction is deterministic.
    """
    if not corpus:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    if min_frequency < 1:
        raise ValueError("min_frequency must be >= 1")

    channels = []
    for channel in CHANNELS:
        counts: dict[str, int] = {}
        for f in corpus:
            for token in normalize(channel_value(f, channel), channel, stop_words, url_stop_words):
                counts[token] = counts.get(token, 0) + 1
        kept = sorted(
            (tok for tok, n in counts.items() if n >= min_frequency),
            key=lambda tok: (-counts[tok], tok),
        )
        channels.append((channel, tuple(kept)))
    return Vocabulary(channels=tuple(channels))


def encode(
    f: FieldFeatures,
    vocabulary: Vocabulary,
    stop_words: frozenset[str] | None = None,
    url_stop_words: frozenset[str] | None = None,
) -> FeatureVector:
    """Encode a field as presence bits over the vocabulary.

    Out-of-vocabulary tokens contribute nothing; an all-zero vector is legal.
    """
    bits = np.zeros(vocabulary.total_width, dtype=np.uint8)
    for (channel, _), (offset, _) in zip(vocabulary.channels, vocabulary.spans):
        index = vocabulary.index[channel]
        for token in normalize(channel_value(f, channel), channel, stop_words, url_stop_words):
            pos = index.get(token)
            if pos is not None:
                bits[offset + pos] = 1
    return FeatureVector(bits=bits, spans=vocabulary.spans)
