"""Regex heuristics over raw field channels: the browsers-today baseline."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import RulesError
from .extractor import FieldFeatures

_ALLOWED_CHANNELS = ("name", "id", "label")


@dataclass(frozen=True)
class Rule:
    class_name: str
    channels: tuple[str, ...]
    pattern: re.Pattern
    priority: int
    rule_id: str


@dataclass(frozen=True)
class RuleSet:
    """Rules in evaluation order: ascending priority, then file order."""

    rules: tuple[Rule, ...]


def load_rules(source: bytes) -> RuleSet:
    """Parse the JSON rules format, compiling every pattern up front.

    Entries are {class, channels[], pattern, priority} with an optional
    "id"; omitted ids derive from class and position.
    """
    try:
        entries = json.loads(source.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RulesError(f"rules file is not valid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise RulesError("rules file must be a JSON array")

    rules = []
    seen_ids = set()
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise RulesError(f"rule {i}: expected an object")
        try:
            class_name = entry["class"]
            channels = tuple(entry["channels"])
            pattern_text = entry["pattern"]
            priority = int(entry["priority"])
        except (KeyError, TypeError, ValueError) as exc:
            raise RulesError(f"rule {i}: {exc}") from exc
        rule_id = entry.get("id", f"{class_name}-{i}")
        if rule_id in seen_ids:
            raise RulesError(f"duplicate rule id {rule_id!r}")
        seen_ids.add(rule_id)
        if not channels:
            raise RulesError(f"rule {rule_id}: channels must be non-empty")
        for channel in channels:
            if channel not in _ALLOWED_CHANNELS:
                raise RulesError(f"rule {rule_id}: unknown channel {channel!r}")
        try:
            pattern = re.compile(pattern_text, re.IGNORECASE)
        except re.error as exc:
            raise RulesError(
                f"rule {rule_id}: bad pattern {pattern_text!r} at position {exc.pos}: {exc.msg}"
            ) from exc
        rules.append(Rule(class_name, channels, pattern, priority, rule_id))

    rules.sort(key=lambda r: r.priority)  # stable: file order within a priority
    return RuleSet(rules=tuple(rules))


def load_rules_file(path: str | Path) -> RuleSet:
    return load_rules(Path(path).read_bytes())


def default_rules() -> RuleSet:
    """The rule set shipped with the package (original to this project)."""
    return load_rules_file(Path(__file__).parent / "data" / "rules.json")


def _channel_text(f: FieldFeatures, channel: str) -> str:
    return {"name": f.name, "id": f.id, "label": f.label_text}[channel]


def apply(rs: RuleSet, f: FieldFeatures) -> tuple[str, str] | None:
    """First rule whose pattern matches any of its declared channels wins."""
    for rule in rs.rules:
        for channel in rule.channels:
            if rule.pattern.search(_channel_text(f, channel)):
                return rule.class_name, rule.rule_id
    return None


def find_shadowed(rs: RuleSet, probe: list[FieldFeatures]) -> list[str]:
    """Rule ids that match at least one probe field but never win on any."""
    matched: set[str] = set()
    won: set[str] = set()
    for f in probe:
        first = None
        for rule in rs.rules:
            if any(rule.pattern.search(_channel_text(f, ch)) for ch in rule.channels):
                matched.add(rule.rule_id)
                if first is None:
                    first = rule.rule_id
        if first is not None:
            won.add(first)
    return [r.rule_id for r in rs.rules if r.rule_id in matched and r.rule_id not in won]
