"""Dataset CSV ingestion, stratified splitting, and evaluation metrics."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DatasetError
from .extractor import FieldFeatures

logger = logging.getLogger(__name__)

CSV_HEADER = ("label", "name", "id", "type", "url", "target")


@dataclass(frozen=True)
class DatasetRow:
    features: FieldFeatures
    target: str  # class name, or "0"/"1" for binary-column datasets


def load_csv(source: bytes) -> list[DatasetRow]:
    """Parse the dataset CSV schema (RFC-4180, UTF-8, fixed header)."""
    try:
        text = source.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DatasetError(f"dataset is not valid UTF-8: {exc}") from exc
    reader = csv.reader(io.StringIO(text), strict=True)
    try:
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError("dataset is empty: expected a header row") from None
        if tuple(header) != CSV_HEADER:
            raise DatasetError(
                f"header mismatch: expected {','.join(CSV_HEADER)}, got {','.join(header)}"
            )
        rows = []
        for record in reader:
            if not record:
                continue
            if len(record) != len(CSV_HEADER):
                raise DatasetError(f"line {reader.line_num}: expected {len(CSV_HEADER)} cells")
            label, name, field_id, ctype, url, target = record
            if not target:
                raise DatasetError(f"line {reader.line_num}: empty target")
            rows.append(
                DatasetRow(
                    features=FieldFeatures(
                        label_text=label,
                        name=name,
                        id=field_id,
                        control_type=ctype,
                        page_url=url,
                    ),
                    target=target,
                )
            )
    except csv.Error as exc:
        raise DatasetError(f"line {reader.line_num}: malformed CSV: {exc}") from exc
    return rows


def write_csv(rows: Sequence[DatasetRow]) -> bytes:
    """Canonical CSV writer: minimal quoting, \\n line endings."""
    out = io.StringIO()
    writer = csv.writer(out, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        f = row.features
        writer.writerow([f.label_text, f.name, f.id, f.control_type, f.page_url, row.target])
    return out.getvalue().encode("utf-8")


def to_binary(rows: Sequence[DatasetRow], positive_class: str) -> list[DatasetRow]:
    """Map targets onto {positive_class, "other"}.

    Accepts both binary-column datasets ("1"/"0") and multi-class targets.
    """
    out = []
    for row in rows:
        positive = row.target == "1" or row.target == positive_class
        out.append(DatasetRow(row.features, positive_class if positive else "other"))
    return out


def split(
    rows: Sequence[DatasetRow],
    train_fraction: float = 0.7,
    seed: int = 0,
    stratified: bool = True,
) -> tuple[list[DatasetRow], list[DatasetRow]]:
    """Deterministic seeded partition into (train, test).

    Stratified mode applies the ratio per class; test counts round to
    nearest (ties to even) computed in exact arithmetic, so a fixed seed
    always yields the identical partition.
    """
    if not rows:
        raise DatasetError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError("train_fraction must be strictly between 0 and 1")
    test_fraction = 1 - Fraction(str(train_fraction))
    rng = np.random.default_rng(seed)

    def partition(group: list[DatasetRow]) -> tuple[list[DatasetRow], list[DatasetRow]]:
        n_test = round(len(group) * test_fraction)
        order = rng.permutation(len(group))
        train = [group[i] for i in order[: len(group) - n_test]]
        test = [group[i] for i in order[len(group) - n_test :]]
        return train, test

    if not stratified:
        train, test = partition(list(rows))
        return train, test

    groups: dict[str, list[DatasetRow]] = {}
    for row in rows:
        groups.setdefault(row.target, []).append(row)
    train: list[DatasetRow] = []
    test: list[DatasetRow] = []
    for target in sorted(groups):
        group = groups[target]
        if len(group) == 1:
            logger.warning("class %r has a single row; assigning it to train", target)
        got_train, got_test = partition(group)
        train.extend(got_train)
        test.extend(got_test)
    return train, test


@dataclass
class Metrics:
    classes: tuple[str, ...]
    confusion: np.ndarray  # (C, C); rows = actual, columns = predicted
    per_class_precision: dict[str, float]  # absent where nothing was predicted as the class
    per_class_recall: dict[str, float]  # absent where the class has no support
    macro_precision: float
    micro_accuracy: float

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "confusion": self.confusion.tolist(),
            "precision": self.per_class_precision,
            "recall": self.per_class_recall,
            "macro_precision": self.macro_precision,
            "micro_accuracy": self.micro_accuracy,
        }

    def to_table(self) -> str:
        width = max((len(c) for c in self.classes), default=5) + 2
        lines = [f"{'class':<{width}} {'precision':>9} {'recall':>9} {'support':>8}"]
        for i, cls in enumerate(self.classes):
            support = int(self.confusion[i].sum())
            prec = self.per_class_precision.get(cls)
            rec = self.per_class_recall.get(cls)
            prec_s = f"{prec:.4f}" if prec is not None else "-"
            rec_s = f"{rec:.4f}" if rec is not None else "-"
            lines.append(f"{cls:<{width}} {prec_s:>9} {rec_s:>9} {support:>8}")
        lines.append(
            f"macro precision {self.macro_precision:.4f}  micro accuracy {self.micro_accuracy:.4f}"
        )
        return "\n".join(lines)


def evaluate(
    predictor: Callable[[FieldFeatures], str], test: Sequence[DatasetRow]
) -> Metrics:
    """Confusion matrix and derived metrics of a predictor over labeled rows."""
    if not test:
        raise DatasetError("cannot evaluate on an empty test set")
    pairs = [(row.target, predictor(row.features)) for row in test]
    classes = tuple(sorted({c for pair in pairs for c in pair}))
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for actual, predicted in pairs:
        confusion[index[actual], index[predicted]] += 1

    precision: dict[str, float] = {}
    recall: dict[str, float] = {}
    for c, i in index.items():
        tp = int(confusion[i, i])
        predicted_count = int(confusion[:, i].sum())
        support = int(confusion[i, :].sum())
        if predicted_count > 0:
            precision[c] = tp / predicted_count
        if support > 0:
            recall[c] = tp / support
    macro_precision = sum(precision.values()) / len(precision) if precision else 0.0
    micro_accuracy = float(np.trace(confusion)) / len(pairs)
    return Metrics(
        classes=classes,
        confusion=confusion,
        per_class_precision=precision,
        per_class_recall=recall,
        macro_precision=macro_precision,
        micro_accuracy=micro_accuracy,
    )
