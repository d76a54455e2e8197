"""Hybrid predictor: lookup table, regex rules, and forest behind one policy."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import forest as forest_mod
from . import rules as rules_mod
from .errors import FieldsenseError
from .extractor import FieldFeatures, FieldSignature, signature
from .forest import ForestModel
from .rules import RuleSet
from .text import encode

logger = logging.getLogger(__name__)

SOURCES = ("lookup", "rules", "forest")


@dataclass
class LookupTable:
    """Exact-match cache from field signature to class."""

    entries: dict[FieldSignature, str] = field(default_factory=dict)

    def put(self, sig: FieldSignature, class_name: str) -> None:
        self.entries[sig] = class_name

    def get(self, sig: FieldSignature) -> str | None:
        return self.entries.get(sig)

    def to_bytes(self) -> bytes:
        payload = {f"{sig.origin}\t{sig.key}": cls for sig, cls in self.entries.items()}
        return json.dumps(payload, sort_keys=True, indent=2).encode("utf-8")

    @classmethod
    def from_bytes(cls, data: bytes) -> "LookupTable":
        try:
            payload = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FieldsenseError(f"lookup file is not valid JSON: {exc}") from exc
        table = cls()
        for key, class_name in payload.items():
            origin, _, sig_key = key.partition("\t")
            if not _:
                raise FieldsenseError(f"lookup entry missing tab separator: {key!r}")
            table.entries[FieldSignature(origin=origin, key=sig_key)] = class_name
        return table

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "LookupTable":
        return cls.from_bytes(Path(path).read_bytes())


@dataclass(frozen=True)
class EnsemblePolicy:
    order: tuple[str, ...] = SOURCES
    forest_confidence_threshold: float = 0.5
    fallback_class: str = "unknown"

    def __post_init__(self) -> None:
        if sorted(self.order) != sorted(SOURCES):
            raise ValueError(f"order must be a permutation of {SOURCES}")
        if not 0.0 <= self.forest_confidence_threshold <= 1.0:
            raise ValueError("forest_confidence_threshold must be in [0, 1]")


@dataclass(frozen=True)
class EnsemblePrediction:
    class_name: str
    confidence: float
    source: str  # lookup | rules | forest | fallback
    detail: str | dict[str, float] | None = None  # rule id, or per-class scores


def ensemble_predict(
    f: FieldFeatures,
    lookup: LookupTable | None,
    ruleset: RuleSet | None,
    model: ForestModel | None,
    policy: EnsemblePolicy = EnsemblePolicy(),
) -> EnsemblePrediction:
    """Consult sources in policy order; the first decisive one wins.

    A source error is logged and treated as that source abstaining; if no
    source is decisive the fallback class is returned with confidence 0.
    """
    for source in policy.order:
        try:
            if source == "lookup" and lookup is not None:
                cls = lookup.get(signature(f))
                if cls is not None:
                    return EnsemblePrediction(cls, 1.0, "lookup")
            elif source == "rules" and ruleset is not None:
                hit = rules_mod.apply(ruleset, f)
                if hit is not None:
                    return EnsemblePrediction(hit[0], 1.0, "rules", detail=hit[1])
            elif source == "forest" and model is not None:
                pred = forest_mod.predict(model, encode(f, model.vocabulary))
                if pred.confidence >= policy.forest_confidence_threshold:
                    return EnsemblePrediction(
                        pred.class_name, pred.confidence, "forest", detail=pred.scores
                    )
        except Exception:
            logger.warning("ensemble source %r failed; skipping", source, exc_info=True)
    return EnsemblePrediction(policy.fallback_class, 0.0, "fallback")


def forest_predictor(model: ForestModel):
    """Adapter: plain class-name predictor backed by the forest alone."""

    def predictor(f: FieldFeatures) -> str:
        return forest_mod.predict(model, encode(f, model.vocabulary)).class_name

    return predictor


def rules_predictor(ruleset: RuleSet, fallback_class: str = "unknown"):
    """Adapter: plain class-name predictor backed by the rules alone."""

    def predictor(f: FieldFeatures) -> str:
        hit = rules_mod.apply(ruleset, f)
        return hit[0] if hit is not None else fallback_class

    return predictor


def ensemble_predictor(
    lookup: LookupTable | None,
    ruleset: RuleSet | None,
    model: ForestModel | None,
    policy: EnsemblePolicy = EnsemblePolicy(),
):
    """Adapter: plain class-name predictor backed by the full ensemble."""

    def predictor(f: FieldFeatures) -> str:
        return ensemble_predict(f, lookup, ruleset, model, policy).class_name

    return predictor
