"""Bagged randomized decision forest over binary feature vectors.

Trees are grown depth-first (left child before right), drawing all
randomness from a per-tree stream, so training is fully reproducible for a
given seed within this implementation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    EmptyTrainingSetError,
    ModelFormatError,
    UnknownClassError,
    VectorWidthError,
)
from .text import FeatureVector, Vocabulary

FORMAT_VERSION = 1

# Gains below this are treated as zero (floating noise on a no-information split).
_GAIN_EPS = 1e-12

_LEAF = -1


@dataclass(frozen=True)
class ForestParams:
    tree_count: int = 16
    max_depth: int = 100
    random_splits_per_node: int = 128
    min_samples_per_leaf: int = 1
    resampling: str = "bagging"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tree_count < 1:
            raise ValueError("tree_count must be >= 1")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.random_splits_per_node < 1:
            raise ValueError("random_splits_per_node must be >= 1")
        if self.min_samples_per_leaf < 1:
            raise ValueError("min_samples_per_leaf must be >= 1")
        if self.resampling != "bagging":
            raise ValueError(f"unsupported resampling method: {self.resampling!r}")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")


@dataclass
class Tree:
    """One tree, nodes in flat parallel arrays; root at index 0.

    Internal nodes carry a feature index and child links; leaves carry a
    per-class count histogram. Bit set routes right, bit clear routes left.
    """

    feature: list[int | None]
    left: list[int]
    right: list[int]
    histogram: list[list[int] | None]
    # Debug-training extras (not serialized): bootstrap row draw and, per
    # node, the subset of bootstrap positions that reached it.
    bootstrap: np.ndarray | None = None
    subsets: list[np.ndarray] | None = None

    def leaf_distributions(self) -> dict[int, np.ndarray]:
        out = {}
        for i, hist in enumerate(self.histogram):
            if hist is not None:
                counts = np.asarray(hist, dtype=np.float64)
                out[i] = counts / counts.sum()
        return out


@dataclass
class ForestModel:
    params: ForestParams
    vocabulary: Vocabulary
    class_names: tuple[str, ...]
    trees: list[Tree]
    mode: str = "multiclass"
    model_version: str = ""


@dataclass(frozen=True)
class Prediction:
    class_name: str
    confidence: float
    scores: dict[str, float] = field(compare=False)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Deterministic per-tree random stream, derived from (seed, tree index)."""
    return np.random.default_rng([seed, tree_index])


def bootstrap_indices(seed: int, tree_index: int, n: int) -> np.ndarray:
    """The bootstrap draw (size n, with replacement) tree `tree_index` trains on."""
    return tree_rng(seed, tree_index).integers(0, n, size=n)


def _entropy(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """Entropy in bits of count columns; empty columns have entropy 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / totals
        terms = np.where(counts > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=0)


def split_gains(X_cols: np.ndarray, y: np.ndarray, n_classes: int) -> np.ndarray:
    """Information gain of the bit==1 / bit==0 partition for each column."""
    k = X_cols.shape[0]
    class_rows = np.stack([(y == c) for c in range(n_classes)]).astype(np.float64)
    ones = class_rows @ X_cols.astype(np.float64)  # (C, m) counts on the bit==1 side
    totals = class_rows.sum(axis=1)  # (C,)
    zeros = totals[:, None] - ones
    n1 = ones.sum(axis=0)
    n0 = k - n1
    parent = _entropy(totals[:, None], np.array([[float(k)]]))[0]
    return parent - (n0 / k) * _entropy(zeros, n0) - (n1 / k) * _entropy(ones, n1)


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    params: ForestParams,
    rng: np.random.Generator,
    keep_subsets: bool,
) -> Tree:
    width = X.shape[1]
    n_candidates = min(params.random_splits_per_node, width)
    tree = Tree(feature=[], left=[], right=[], histogram=[], subsets=[] if keep_subsets else None)
    pending: list[np.ndarray] = []  # subset of row positions per created node

    def new_node(rows: np.ndarray) -> int:
        tree.feature.append(None)
        tree.left.append(_LEAF)
        tree.right.append(_LEAF)
        tree.histogram.append(None)
        pending.append(rows)
        if keep_subsets:
            tree.subsets.append(rows)
        return len(tree.feature) - 1

    def make_leaf(i: int, rows: np.ndarray) -> None:
        tree.histogram[i] = np.bincount(y[rows], minlength=n_classes).tolist()

    root = new_node(np.arange(X.shape[0]))
    stack = [(root, 0)]
    while stack:
        i, depth = stack.pop()
        rows = pending[i]
        labels = y[rows]
        if depth >= params.max_depth or (labels == labels[0]).all():
            make_leaf(i, rows)
            continue

        # Candidates are distinct features so that splits >= width examines
        # every feature; ascending order makes argmax break ties low.
        candidates = np.sort(rng.choice(width, size=n_candidates, replace=False))
        gains = split_gains(X[rows][:, candidates], labels, n_classes)
        best = int(np.argmax(gains))
        if gains[best] <= _GAIN_EPS:
            make_leaf(i, rows)
            continue
        feature = int(candidates[best])
        mask = X[rows, feature] == 1
        right_rows, left_rows = rows[mask], rows[~mask]
        if min(len(left_rows), len(right_rows)) < params.min_samples_per_leaf:
            make_leaf(i, rows)
            continue

        tree.feature[i] = feature
        left_child = new_node(left_rows)
        right_child = new_node(right_rows)
        tree.left[i] = left_child
        tree.right[i] = right_child
        # LIFO: left subtree is expanded before the right one.
        stack.append((right_child, depth + 1))
        stack.append((left_child, depth + 1))
    return tree


def train(
    rows: Sequence[tuple[FeatureVector, str]],
    params: ForestParams,
    class_names: Sequence[str],
    vocabulary: Vocabulary,
    mode: str = "multiclass",
    keep_training_subsets: bool = False,
) -> ForestModel:
    """Train a bagged forest. Fully determined by (rows, params, class_names)."""
    if not rows:
        raise EmptyTrainingSetError("training requires at least one row")
    class_names = tuple(class_names)
    if mode == "binary" and len(class_names) != 2:
        raise ValueError("binary mode requires exactly two class names")
    class_index = {c: i for i, c in enumerate(class_names)}

    width = rows[0][0].bits.shape[0]
    for fv, cls in rows:
        if fv.bits.shape[0] != width:
            raise VectorWidthError(f"vector width {fv.bits.shape[0]} != {width}")
        if cls not in class_index:
            raise UnknownClassError(f"class {cls!r} not in class_names")
    if width != vocabulary.total_width:
        raise VectorWidthError(
            f"vector width {width} != vocabulary width {vocabulary.total_width}"
        )

    X = np.stack([fv.bits for fv, _ in rows]).astype(np.uint8)
    y = np.array([class_index[cls] for _, cls in rows], dtype=np.int64)
    n = X.shape[0]

    trees = []
    for t in range(params.tree_count):
        rng = tree_rng(params.seed, t)
        boot = rng.integers(0, n, size=n)
        tree = _grow_tree(
            X[boot], y[boot], len(class_names), params, rng, keep_training_subsets
        )
        if keep_training_subsets:
            tree.bootstrap = boot
        trees.append(tree)

    model = ForestModel(
        params=params,
        vocabulary=vocabulary,
        class_names=class_names,
        trees=trees,
        mode=mode,
    )
    model.model_version = _content_version(model)
    return model


def predict(model: ForestModel, x: FeatureVector) -> Prediction:
    """Average the leaf distributions each tree routes x to; argmax wins."""
    if x.bits.shape[0] != model.vocabulary.total_width:
        raise VectorWidthError(
            f"vector width {x.bits.shape[0]} != model width {model.vocabulary.total_width}"
        )
    n_classes = len(model.class_names)
    total = np.zeros(n_classes, dtype=np.float64)
    for tree in model.trees:
        i = 0
        while tree.feature[i] is not None:
            i = tree.right[i] if x.bits[tree.feature[i]] else tree.left[i]
        counts = np.asarray(tree.histogram[i], dtype=np.float64)
        total += counts / counts.sum()
    scores = total / len(model.trees)
    best = int(np.argmax(scores))  # first max: ties break to the lowest class index
    return Prediction(
        class_name=model.class_names[best],
        confidence=float(scores[best]),
        scores={c: float(s) for c, s in zip(model.class_names, scores)},
    )


def _payload(model: ForestModel, model_version: str) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "mode": model.mode,
        "model_version": model_version,
        "params": {
            "tree_count": model.params.tree_count,
            "max_depth": model.params.max_depth,
            "random_splits_per_node": model.params.random_splits_per_node,
            "min_samples_per_leaf": model.params.min_samples_per_leaf,
            "resampling": model.params.resampling,
            "seed": model.params.seed,
        },
        "class_names": list(model.class_names),
        "vocabulary": {
            "channels": [
                {"name": name, "tokens": list(tokens)}
                for name, tokens in model.vocabulary.channels
            ]
        },
        "trees": [
            {
                "nodes": [
                    {
                        "feature": tree.feature[i],
                        "left": tree.left[i],
                        "right": tree.right[i],
                        "histogram": tree.histogram[i],
                    }
                    for i in range(len(tree.feature))
                ]
            }
            for tree in model.trees
        ],
    }


def _canonical_bytes(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _content_version(model: ForestModel) -> str:
    return hashlib.sha256(_canonical_bytes(_payload(model, ""))).hexdigest()[:16]


def save(model: ForestModel) -> bytes:
    """Canonical UTF-8 JSON serialization; byte-stable for a given model."""
    return _canonical_bytes(_payload(model, model.model_version))


def load(data: bytes) -> ForestModel:
    """Parse and validate a serialized model; lossless inverse of save."""
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError("model file must contain a JSON object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format_version {version!r} (expected {FORMAT_VERSION})"
        )
    try:
        params = ForestParams(**payload["params"])
        class_names = tuple(payload["class_names"])
        vocabulary = Vocabulary(
            channels=tuple(
                (ch["name"], tuple(ch["tokens"]))
                for ch in payload["vocabulary"]["channels"]
            )
        )
        mode = payload["mode"]
        model_version = payload["model_version"]
        trees = []
        for spec in payload["trees"]:
            nodes = spec["nodes"]
            tree = Tree(
                feature=[node["feature"] for node in nodes],
                left=[node["left"] for node in nodes],
                right=[node["right"] for node in nodes],
                histogram=[node["histogram"] for node in nodes],
            )
            trees.append(tree)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"model file failed schema validation: {exc}") from exc

    model = ForestModel(
        params=params,
        vocabulary=vocabulary,
        class_names=class_names,
        trees=trees,
        mode=mode,
        model_version=model_version,
    )
    _validate_structure(model)
    return model


def _validate_structure(model: ForestModel) -> None:
    if not model.class_names:
        raise ModelFormatError("class_names must be non-empty")
    if model.mode not in ("multiclass", "binary"):
        raise ModelFormatError(f"unknown mode {model.mode!r}")
    if model.mode == "binary" and len(model.class_names) != 2:
        raise ModelFormatError("binary mode requires exactly two class names")
    width = model.vocabulary.total_width
    n_classes = len(model.class_names)
    for t, tree in enumerate(model.trees):
        size = len(tree.feature)
        if not (size and len(tree.left) == len(tree.right) == len(tree.histogram) == size):
            raise ModelFormatError(f"tree {t}: inconsistent node arrays")
        for i in range(size):
            feature = tree.feature[i]
            if feature is None:
                hist = tree.histogram[i]
                if (
                    not isinstance(hist, list)
                    or len(hist) != n_classes
                    or any(not isinstance(c, int) or c < 0 for c in hist)
                    or sum(hist) <= 0
                ):
                    raise ModelFormatError(f"tree {t} node {i}: bad leaf histogram")
            else:
                if not isinstance(feature, int) or not 0 <= feature < width:
                    raise ModelFormatError(f"tree {t} node {i}: feature out of range")
                for child in (tree.left[i], tree.right[i]):
                    if not isinstance(child, int) or not 0 < child < size:
                        raise ModelFormatError(f"tree {t} node {i}: bad child link")


def audit(model: ForestModel) -> None:
    """Walk every tree asserting structural invariants.

    Checks the depth bound everywhere, and when debug training subsets were
    kept, that each stored split has strictly positive gain on its subset.
    """
    _validate_structure(model)
    for t, tree in enumerate(model.trees):
        depths = {0: 0}
        stack = [0]
        while stack:
            i = stack.pop()
            if tree.feature[i] is None:
                continue
            if depths[i] + 1 > model.params.max_depth:
                raise AssertionError(f"tree {t}: depth bound exceeded at node {i}")
            for child in (tree.left[i], tree.right[i]):
                depths[child] = depths[i] + 1
                stack.append(child)


def audit_split_gains(
    tree: Tree, X_bootstrap: np.ndarray, y_bootstrap: np.ndarray, n_classes: int
) -> None:
    """Recompute each stored split's gain on its training subset; must be > 0.

    Requires a tree trained with keep_training_subsets; X/y are the rows the
    tree saw (reconstructible via bootstrap_indices).
    """
    if tree.subsets is None:
        raise ValueError("tree was not trained with keep_training_subsets")
    for i, feature in enumerate(tree.feature):
        if feature is None:
            continue
        rows = tree.subsets[i]
        gain = split_gains(
            X_bootstrap[rows][:, [feature]], y_bootstrap[rows], n_classes
        )[0]
        if not gain > _GAIN_EPS:
            raise AssertionError(f"node {i}: stored split has non-positive gain {gain}")
