"""Form-field label prediction for browser autofill.

Extract features from HTML form fields, classify them with regex rules,
a bagged randomized decision forest, or a hybrid ensemble, and serve
predictions over HTTP.
"""

from .dataset import DatasetRow, Metrics, evaluate, load_csv, split, to_binary, write_csv
from .ensemble import (
    EnsemblePolicy,
    EnsemblePrediction,
    LookupTable,
    ensemble_predict,
    ensemble_predictor,
    forest_predictor,
    rules_predictor,
)
from .errors import FieldsenseError
from .extractor import FieldFeatures, FieldSignature, parse_document, signature
from .forest import ForestModel, ForestParams, Prediction, load, predict, save, train
from .rules import Rule, RuleSet, apply, default_rules, load_rules
from .synth import DEFAULT_CLASS_PROFILE, gen_synthetic
from .text import FeatureVector, Vocabulary, build_vocabulary, encode, normalize

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CLASS_PROFILE",
    "DatasetRow",
    "EnsemblePolicy",
    "EnsemblePrediction",
    "FeatureVector",
    "FieldFeatures",
    "FieldSignature",
    "FieldsenseError",
    "ForestModel",
    "ForestParams",
    "LookupTable",
    "Metrics",
    "Prediction",
    "Rule",
    "RuleSet",
    "Vocabulary",
    "apply",
    "build_vocabulary",
    "default_rules",
    "encode",
    "ensemble_predict",
    "ensemble_predictor",
    "evaluate",
    "forest_predictor",
    "gen_synthetic",
    "load",
    "load_csv",
    "load_rules",
    "normalize",
    "parse_document",
    "predict",
    "rules_predictor",
    "save",
    "signature",
    "split",
    "to_binary",
    "train",
    "write_csv",
]
