"""Command-line entry point: extract, train, eval, predict, serve, gen-corpus, rules-check.

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import dataset as ds
from . import ensemble as ens
from . import forest as fr
from . import rules as rl
from . import synth
from . import text as tx
from .errors import FieldsenseError
from .extractor import parse_document, read_url_map

_DEFAULT_RULES = Path(__file__).parent / "data" / "rules.json"


class UsageError(FieldsenseError):
    """Bad invocation or bad companion files; exits 2."""


def _env(key: str, fallback):
    return os.environ.get(f"FIELDSENSE_{key}", fallback)


def _read_config(argv: list[str]) -> dict:
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            return json.loads(Path(argv[i + 1]).read_text(encoding="utf-8"))
        if arg.startswith("--config="):
            return json.loads(Path(arg.split("=", 1)[1]).read_text(encoding="utf-8"))
    return {}


def _stop_lists(args) -> tuple[frozenset[str] | None, frozenset[str] | None]:
    stop = tx.load_stop_list(args.stopwords) if args.stopwords else None
    url_stop = tx.load_stop_list(args.url_stopwords) if args.url_stopwords else None
    return stop, url_stop


def _load_dataset(path: str) -> list[ds.DatasetRow]:
    return ds.load_csv(Path(path).read_bytes())


def _parse_mode(mode: str) -> tuple[str, str | None]:
    if mode == "multiclass":
        return "multiclass", None
    if mode.startswith("binary:") and len(mode) > len("binary:"):
        return "binary", mode.split(":", 1)[1]
    raise UsageError(f"invalid --mode {mode!r}: expected multiclass or binary:<class>")


def _train_model(rows, args) -> tuple[fr.ForestModel, list[ds.DatasetRow]]:
    mode, positive = _parse_mode(args.mode)
    if mode == "binary":
        rows = ds.to_binary(rows, positive)
        class_names = [positive, "other"]
    else:
        class_names = sorted({r.target for r in rows})
    train_rows, test_rows = ds.split(rows, args.split, seed=args.seed)
    stop, url_stop = _stop_lists(args)
    vocabulary = tx.build_vocabulary(
        [r.features for r in train_rows], args.min_freq, stop, url_stop
    )
    params = fr.ForestParams(
        tree_count=args.trees,
        max_depth=args.depth,
        random_splits_per_node=args.splits,
        min_samples_per_leaf=args.min_leaf,
        seed=args.seed,
    )
    encoded = [(tx.encode(r.features, vocabulary, stop, url_stop), r.target) for r in train_rows]
    model = fr.train(encoded, params, class_names, vocabulary, mode=mode)
    return model, test_rows


def cmd_extract(args) -> int:
    source = Path(args.html)
    if source.is_dir():
        files = sorted(p for p in source.iterdir() if p.suffix in (".html", ".htm"))
    elif source.exists():
        files = [source]
    else:
        raise FieldsenseError(f"no such file or directory: {source}")
    url_map = read_url_map(args.url_map)

    rows = []
    missing = [f.name for f in files if f.name not in url_map]
    if missing:
        for name in missing:
            print(f"error: no url-map entry for {name}", file=sys.stderr)
        raise UsageError(f"{len(missing)} file(s) missing from url map")
    for f in files:
        for record in parse_document(f.read_text(encoding="utf-8"), url_map[f.name]):
            rows.append(ds.DatasetRow(features=record, target=""))
    Path(args.out).write_bytes(ds.write_csv(rows))
    _emit(args, {"rows": len(rows), "files": len(files), "out": args.out})
    return 0


def cmd_train(args) -> int:
    rows = _load_dataset(args.data)
    model, test_rows = _train_model(rows, args)
    Path(args.out).write_bytes(fr.save(model))
    report: dict = {"out": args.out, "model_version": model.model_version}
    if test_rows:
        metrics = ds.evaluate(ens.forest_predictor(model), test_rows)
        report["holdout"] = metrics.to_dict()
    if args.report == "json":
        print(json.dumps(report, indent=2))
    else:
        print(f"model written to {args.out} (version {model.model_version})")
        if test_rows:
            print(metrics.to_table())
        else:
            print("holdout split is empty; no metrics")
    return 0


def _load_eval_rules(args) -> rl.RuleSet | None:
    if args.rules:
        return rl.load_rules_file(args.rules)
    if getattr(args, "ensemble", False):
        return rl.load_rules_file(_DEFAULT_RULES)
    return None


def cmd_eval(args) -> int:
    rows = _load_dataset(args.data)
    model = fr.load(Path(args.model).read_bytes())
    if model.mode == "binary":
        rows = ds.to_binary(rows, model.class_names[0])
    _, test_rows = ds.split(rows, args.split, seed=args.seed)
    ruleset = _load_eval_rules(args)
    lookup = ens.LookupTable.load(args.lookup) if args.lookup else None
    policy = ens.EnsemblePolicy(forest_confidence_threshold=args.threshold)

    sections: dict[str, ds.Metrics] = {}
    sections["forest"] = ds.evaluate(ens.forest_predictor(model), test_rows)
    if ruleset is not None:
        sections["rules"] = ds.evaluate(ens.rules_predictor(ruleset), test_rows)
    if args.ensemble:
        sections["ensemble"] = ds.evaluate(
            ens.ensemble_predictor(lookup, ruleset, model, policy), test_rows
        )

    if args.report == "json":
        print(json.dumps({name: m.to_dict() for name, m in sections.items()}, indent=2))
    else:
        for name, metrics in sections.items():
            print(f"== {name}")
            print(metrics.to_table())
    return 0


def _read_fields_file(path: str) -> list[dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(payload, dict) and "fields" in payload:
        payload = payload["fields"]
    if not isinstance(payload, list):
        raise FieldsenseError("fields file must be a JSON array or {\"fields\": [...]}")
    return payload


def cmd_predict(args) -> int:
    model = fr.load(Path(args.model).read_bytes()) if args.model else None
    ruleset = rl.load_rules_file(args.rules) if args.rules else rl.load_rules_file(_DEFAULT_RULES)
    lookup = ens.LookupTable.load(args.lookup) if args.lookup else None
    policy = ens.EnsemblePolicy(forest_confidence_threshold=args.threshold)

    results = []
    for i, entry in enumerate(_read_fields_file(args.fields)):
        features = _wire_to_features(entry)
        pred = ens.ensemble_predict(features, lookup, ruleset, model, policy)
        record = {
            "field_index": i,
            "class_name": pred.class_name,
            "confidence": pred.confidence,
            "source": pred.source,
        }
        if pred.detail is not None:
            record["detail"] = pred.detail
        results.append(record)
    print(json.dumps(results, indent=2))
    return 0


def _wire_to_features(entry: dict):
    from .extractor import FieldFeatures

    return FieldFeatures(
        label_text=str(entry.get("label", "")),
        name=str(entry.get("name", "")),
        id=str(entry.get("id", "")),
        control_type=str(entry.get("control_type", "")).strip().lower() or "text",
        page_url=str(entry.get("url", "")),
    )


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SnapshotStore, create_app

    store = SnapshotStore(
        model_path=args.model,
        rules_path=args.rules or _DEFAULT_RULES,
        lookup_path=args.lookup,
        threshold=args.threshold,
    )
    if args.model:
        store.reload()
    app = create_app(store, log_requests=args.log_requests)
    uvicorn.run(app, host=args.host, port=args.port, log_config=None)
    return 0


def cmd_gen_corpus(args) -> int:
    profile = None
    if args.profile:
        profile = json.loads(Path(args.profile).read_text(encoding="utf-8"))
    try:
        rows = synth.gen_synthetic(profile, n=args.n, noise=args.noise, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    Path(args.out).write_bytes(ds.write_csv(rows))
    _emit(args, {"rows": len(rows), "out": args.out})
    return 0


def cmd_rules_check(args) -> int:
    path = Path(args.rules) if args.rules else _DEFAULT_RULES
    ruleset = rl.load_rules_file(path)
    probe = [r.features for r in synth.gen_synthetic(n=args.probe_n, noise=0.1, seed=0)]
    shadowed = rl.find_shadowed(ruleset, probe)
    report = {"rules": len(ruleset.rules), "shadowed": shadowed}
    if args.report == "json":
        print(json.dumps(report, indent=2))
    else:
        print(f"{len(ruleset.rules)} rules compiled")
        for rule_id in shadowed:
            print(f"shadowed: {rule_id} never wins on the probe corpus")
        if not shadowed:
            print("no shadowed rules")
    return 1 if shadowed else 0


def _emit(args, payload: dict) -> None:
    if getattr(args, "report", "table") == "json":
        print(json.dumps(payload))
    else:
        print(" ".join(f"{k}={v}" for k, v in payload.items()))


def _add_report(p) -> None:
    p.add_argument("--report", choices=["table", "json"], default="table")


def build_parser(config: dict) -> argparse.ArgumentParser:
    def d(key: str, fallback, env: bool = False):
        """Resolution order: flag > env (when enabled) > config file > builtin."""
        value = config.get(key, fallback)
        return _env(key.upper(), value) if env else value

    parser = argparse.ArgumentParser(prog="fieldsense")
    parser.add_argument("--config", help="JSON config file; flags win over its keys")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract form fields from HTML files into CSV")
    p.add_argument("--html", required=True, help="HTML file or directory")
    p.add_argument("--url-map", required=True, help="filename<TAB>url per line")
    p.add_argument("--out", required=True)
    _add_report(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a decision forest on a labeled CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--mode", default=d("mode", "multiclass"))
    p.add_argument("--trees", type=int, default=d("trees", 16))
    p.add_argument("--depth", type=int, default=d("depth", 100))
    p.add_argument("--splits", type=int, default=d("splits", 128))
    p.add_argument("--min-leaf", type=int, default=d("min_leaf", 1))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--min-freq", type=int, default=d("min_freq", 1))
    p.add_argument("--split", type=float, default=d("split", 0.7))
    p.add_argument("--stopwords", default=d("stopwords", None))
    p.add_argument("--url-stopwords", default=d("url_stopwords", None))
    p.add_argument("--out", required=True)
    _add_report(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate forest / rules / ensemble on a holdout")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--rules", default=d("rules", None))
    p.add_argument("--lookup", default=d("lookup", None))
    p.add_argument("--ensemble", action="store_true")
    p.add_argument("--threshold", type=float, default=d("threshold", 0.5))
    p.add_argument("--split", type=float, default=d("split", 0.7))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    _add_report(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict classes for a JSON fields file")
    p.add_argument("--fields", required=True)
    p.add_argument("--model", default=d("model", None))
    p.add_argument("--rules", default=d("rules", None))
    p.add_argument("--lookup", default=d("lookup", None))
    p.add_argument("--threshold", type=float, default=d("threshold", 0.5))
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="serve predictions over HTTP")
    p.add_argument("--host", default=d("host", "127.0.0.1", env=True))
    p.add_argument("--port", type=int, default=d("port", 8080, env=True))
    p.add_argument("--model", default=d("model", None, env=True))
    p.add_argument("--rules", default=d("rules", None, env=True))
    p.add_argument("--lookup", default=d("lookup", None, env=True))
    p.add_argument("--threshold", type=float, default=d("threshold", 0.5, env=True))
    p.add_argument("--log-requests", action="store_true")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("gen-corpus", help="generate a synthetic labeled corpus")
    p.add_argument("--n", type=int, default=d("n", 1000))
    p.add_argument("--noise", type=float, default=d("noise", 0.1))
    p.add_argument("--seed", type=int, default=d("seed", 0))
    p.add_argument("--profile", default=d("profile", None))
    p.add_argument("--out", required=True)
    _add_report(p)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("rules-check", help="lint a rules file and report shadowed rules")
    p.add_argument("--rules", default=d("rules", None))
    p.add_argument("--probe-n", type=int, default=d("probe_n", 500))
    _add_report(p)
    p.set_defaults(func=cmd_rules_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = _read_config(argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    parser = build_parser(config)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FieldsenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
