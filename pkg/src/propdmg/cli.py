"""Command-line entry point.

Every subcommand reads an optional TOML config (``--config``); explicit flags
override it.  Artifacts are written atomically and carry a provenance block
(config hash, seed, versions) but no timestamps, so reruns are byte-identical.

Exit codes: 0 ok, 2 usage, 3 config, 4 data, 5 numeric failure.  Failures
print one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .errors import ConfigError, DataError, NumericError, PropDmgError

log = logging.getLogger("propdmg")

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4, 5

# Defaults follow the reference setup: 5 Hz bands, 1 s windows every 32
# cycles, Adadelta at lr 0.1 for 200 epochs, 32-8-4 hidden layers.
DEFAULTS = {
    "paths": {"corpus": "corpus", "out": "out"},
    "geometry": {"n_rotors": 4, "arm_length_m": 0.225, "torque_const": 0.02},
    "features": {"band_width": 5, "window": 222, "stride": 32},
    "train": {
        "seed": 0,
        "C": 1.0,
        "tol": 1e-4,
        "svm_max_iter": 2000,
        "epochs": 200,
        "lr": 0.1,
        "rho": 0.95,
        "eps": 1e-6,
        "batch_size": 32,
        "hidden": [32, 8, 4],
        "loc_target": 4000,
        "by_flight": False,
    },
    "synth": {"seed": 0, "augment": True, "duration_s": 0.0, "base_rotor_hz": 83.0, "vibration_amp": 0.6},
    "study": {
        "widths": [2, 3, 4, 5, 6, 7, 8, 10],
        "repeats": 5,
        "top": 15,
        "held_out": "20-20",
        "importance_target": "type",
        "ablation_localization": False,
    },
}

_RANGES = {
    ("features", "window"): (222, 222),
    ("features", "stride"): (1, 222),
    ("train", "C"): (1e-9, 1e9),
    ("train", "tol"): (1e-12, 1.0),
    ("train", "svm_max_iter"): (1, 10**7),
    ("train", "epochs"): (1, 10**6),
    ("train", "lr"): (1e-9, 10.0),
    ("train", "rho"): (0.0, 0.999999),
    ("train", "eps"): (1e-15, 1.0),
    ("train", "loc_target"): (1, 10**7),
    ("study", "repeats"): (1, 1000),
    ("study", "top"): (1, 10**6),
    ("synth", "duration_s"): (0.0, 86400.0),
}


# ---------------------------------------------------------------------------
# configuration


def _load_toml(path):
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None


def _merge(base, override, where=""):
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where}{key}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where}{key} must be a table")
            _merge(base[key], val, f"{where}{key}.")
        else:
            base[key] = val


def _check(cfg):
    for section, values in DEFAULTS.items():
        for key, default in values.items():
            v = cfg[section][key]
            if isinstance(default, bool):
                ok = isinstance(v, bool)
            elif isinstance(default, (int, float)) and not isinstance(default, bool):
                ok = isinstance(v, (int, float)) and not isinstance(v, bool)
            elif isinstance(default, list):
                ok = isinstance(v, list)
            else:
                ok = isinstance(v, str)
            if key == "batch_size":
                ok = v is None or (isinstance(v, int) and v >= 0)
            if not ok:
                raise ConfigError(f"config key {section}.{key} has the wrong type ({type(v).__name__})")
            lim = _RANGES.get((section, key))
            if lim and not lim[0] <= v <= lim[1]:
                raise ConfigError(f"config key {section}.{key}={v} outside [{lim[0]}, {lim[1]}]")
    from .spectral import SUPPORTED_WIDTHS

    if cfg["features"]["band_width"] not in SUPPORTED_WIDTHS:
        raise ConfigError(f"features.band_width must be one of {SUPPORTED_WIDTHS}")
    bad = [w for w in cfg["study"]["widths"] if w not in SUPPORTED_WIDTHS]
    if bad:
        raise ConfigError(f"study.widths contains unsupported widths {bad}")
    if not cfg["train"]["hidden"] or min(cfg["train"]["hidden"]) < 1:
        raise ConfigError("train.hidden needs positive layer widths")


def build_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if getattr(args, "config", None):
        _merge(cfg, _load_toml(args.config))
    for section, key, attr in _FLAG_MAP:
        v = getattr(args, attr, None)
        if v is not None:
            cfg[section][key] = v
    if getattr(args, "seed", None) is not None:
        cfg["train"]["seed"] = args.seed
        cfg["synth"]["seed"] = args.seed
    _check(cfg)
    return cfg


_FLAG_MAP = (
    ("features", "band_width", "bw"),
    ("features", "stride", "stride"),
    ("train", "C", "C"),
    ("train", "tol", "tol"),
    ("train", "epochs", "epochs"),
    ("train", "lr", "lr"),
    ("train", "batch_size", "batch_size"),
    ("train", "by_flight", "by_flight"),
    ("synth", "duration_s", "duration"),
    ("synth", "augment", "augment"),
    ("study", "repeats", "repeats"),
    ("study", "held_out", "held_out"),
    ("study", "widths", "widths"),
    ("study", "importance_target", "target"),
    ("study", "ablation_localization", "localization"),
)


def cascade_config(cfg):
    from .cascade import CascadeConfig

    t = cfg["train"]
    return CascadeConfig(
        C=float(t["C"]),
        tol=float(t["tol"]),
        svm_max_iter=int(t["svm_max_iter"]),
        epochs=int(t["epochs"]),
        lr=float(t["lr"]),
        rho=float(t["rho"]),
        eps=float(t["eps"]),
        batch_size=t["batch_size"] or None,
        hidden=tuple(int(h) for h in t["hidden"]),
        loc_target=int(t["loc_target"]),
        seed=int(t["seed"]),
        by_flight=bool(t["by_flight"]),
    )


def provenance(cfg, command):
    import scipy

    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return {
        "tool": "propdmg",
        "version": __version__,
        "command": command,
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "seed": cfg["train"]["seed"] if command != "synth" else cfg["synth"]["seed"],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": _kernels.numba.__version__ if _kernels.HAVE_NUMBA else None,
        "kernel_backend": _kernels.backend(),
    }


def _prov_comment(prov):
    return "provenance " + json.dumps(prov, sort_keys=True)


# ---------------------------------------------------------------------------
# helpers


def _need(path, what):
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} {p} does not exist")
    return p


def _geometry(cfg):
    from .geometry import VehicleGeometry

    g = cfg["geometry"]
    return VehicleGeometry(int(g["n_rotors"]), float(g["arm_length_m"]), float(g["torque_const"]))


def _write_table(table, out_dir, stem, prov):
    from .flightlog import atomic_write_text

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    table.to_csv(buf, header_comment=_prov_comment(prov))
    atomic_write_text(out_dir / f"{stem}.csv", buf.getvalue())
    atomic_write_text(out_dir / f"{stem}.txt", table.to_text())


def _write_json(path, doc):
    from .flightlog import atomic_write_text

    Path(path).parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load_features(path):
    from .dataset import read_features_csv

    with open(_need(path, "feature file"), encoding="utf-8") as fh:
        return read_features_csv(fh)


def _report(args, doc, text):
    if args.json:
        print(json.dumps(doc, sort_keys=True, default=_json_default))
    else:
        print(text.rstrip("\n"))


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args, cfg):
    from .augment import augment_corpus
    from .flightlog import write_log
    from .synthgen import SynthScenario, build_corpus

    s = cfg["synth"]
    template = SynthScenario(
        geom=_geometry(cfg), base_rotor_hz=float(s["base_rotor_hz"]), vibration_amp=float(s["vibration_amp"]), seed=int(s["seed"])
    )
    logs = build_corpus(template, duration_s=float(s["duration_s"]) or None)
    if s["augment"]:
        logs = augment_corpus(logs)
    out = Path(args.out or cfg["paths"]["corpus"])
    prov = provenance(cfg, "synth")
    for lg in logs:
        write_log(lg, out, {"provenance": prov, "geometry": _geometry(cfg).to_dict()})
    n = sum(len(lg) for lg in logs)
    _report(args, {"flights": len(logs), "records": n, "out": str(out)}, f"wrote {len(logs)} flights ({n} records) to {out}")


def cmd_ingest(args, cfg):
    from .flightlog import load_corpus, validate, write_log

    src = _need(args.src, "source directory")
    logs = load_corpus(src)
    prov = provenance(cfg, "ingest")
    report = {}
    bad = []
    for lg in logs:
        rep = validate(lg)
        report[lg.flight_id] = rep._asdict() | {"ok": rep.ok, "records": len(lg)}
        if not rep.ok:
            bad.append(lg.flight_id)
    if bad and not args.allow_invalid:
        raise DataError(f"{len(bad)} log(s) failed validation: {', '.join(bad[:5])}")
    out = Path(args.out)
    for lg in logs:
        write_log(lg, out, {"provenance": prov})
    _write_json(out / "validation.json", {"provenance": prov, "logs": report})
    _report(args, {"flights": len(logs), "invalid": bad}, f"ingested {len(logs)} flights into {out} ({len(bad)} invalid)")


def cmd_augment(args, cfg):
    from .augment import augment_corpus
    from .flightlog import load_corpus, write_log

    logs = load_corpus(_need(args.corpus or cfg["paths"]["corpus"], "corpus directory"))
    out = Path(args.out)
    prov = provenance(cfg, "augment")
    aug = augment_corpus(logs)
    for lg in aug:
        write_log(lg, out, {"provenance": prov})
    _report(args, {"flights_in": len(logs), "flights_out": len(aug)}, f"{len(logs)} flights -> {len(aug)} rotated flights in {out}")


def cmd_features(args, cfg):
    from .dataset import build_dataset, write_features_csv
    from .flightlog import atomic_write_text, load_corpus

    logs = load_corpus(_need(args.corpus or cfg["paths"]["corpus"], "corpus directory"))
    bw = cfg["features"]["band_width"]
    ds = build_dataset(logs, bw, cfg["features"]["stride"])
    buf = io.StringIO()
    write_features_csv(ds, buf, _prov_comment(provenance(cfg, "features")))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out, buf.getvalue())
    doc = {"rows": len(ds), "features": int(ds.features.shape[1]), "band_width_hz": bw, "out": str(out)}
    _report(args, doc, f"wrote {len(ds)} windows x {ds.features.shape[1]} features (bw={bw} Hz) to {out}")


def cmd_split(args, cfg):
    from .dataset import check_split_fractions, split_dataset, write_features_csv
    from .flightlog import atomic_write_text

    ds = _load_features(args.features)
    ds = split_dataset(replace(ds, split=None), cfg["train"]["seed"], cfg["train"]["by_flight"])
    buf = io.StringIO()
    write_features_csv(ds, buf, _prov_comment(provenance(cfg, "split")))
    out = Path(args.out or args.features)
    atomic_write_text(out, buf.getvalue())
    counts = check_split_fractions(ds)
    _report(args, counts, "split: " + ", ".join(f"{k}={v}" for k, v in counts.items()))


def cmd_train(args, cfg):
    from .cascade import train_cascade
    from .dataset import split_dataset
    from .plots import loss_svg

    ccfg = cascade_config(cfg)
    ds = _load_features(args.features)
    if ds.split is None:
        ds = split_dataset(ds, ccfg.seed, ccfg.by_flight)
    model = train_cascade(ds, ccfg)
    model.provenance = provenance(cfg, "train") | {"training": model.provenance}
    out = Path(args.out)
    path = model.save(out)
    if args.plots:
        loss_svg(out / "loss.svg", {"tip-cut": model.tipcut_nn.loss_history, "longitudinal": model.long_nn.loss_history})
    counts = model.provenance["training"]["type_train_counts"]
    _report(args, {"bundle": str(path), "type_train_counts": counts}, f"cascade saved to {path} (type classes balanced to {counts})")


def _model_and_data(args):
    from .cascade import CascadeModel
    from .dataset import split_dataset

    model = CascadeModel.load(_need(args.model, "model bundle"))
    ds = _load_features(args.features)
    if ds.split is None:
        ds = split_dataset(ds, model.provenance.get("seed", 0))
    if ds.band_width_hz != model.band_width_hz:
        raise DataError(f"feature file uses {ds.band_width_hz} Hz bands, model expects {model.band_width_hz} Hz")
    return model, ds


def cmd_eval(args, cfg):
    from . import evalkit

    model, ds = _model_and_data(args)
    prov = provenance(cfg, "eval")
    out = Path(args.out)
    metrics = evalkit.evaluate_cascade(model, ds)
    for pop in ("test", "all"):
        _write_table(evalkit.confusion_by_flight(model, ds, pop, "damage").table(), out, f"type_by_damage_{pop}", prov)
    _write_table(evalkit.type_confusion(model, ds).table("damage-type confusion (test)"), out, "type_confusion", prov)
    for branch in ("tipcut", "long"):
        cm = evalkit.localization_confusion(model, ds, branch)
        _write_table(cm.table(f"{branch} localization (test)"), out, f"{branch}_localization", prov)
        _write_table(evalkit.regression_summary(model, ds, branch).table(), out, f"{branch}_regression", prov)
    _write_json(out / "metrics.json", {"provenance": prov, "metrics": metrics})
    text = "\n".join(f"{k:32s} {v:.4f}" if isinstance(v, float) else f"{k:32s} {v}" for k, v in metrics.items())
    _report(args, metrics, text)


def cmd_infer(args, cfg):
    import csv

    from .cascade import CascadeModel, diagnosis_rows, infer_batch
    from .flightlog import atomic_write_text, read_log

    model = CascadeModel.load(_need(args.model, "model bundle"))
    lg = read_log(_need(args.log, "flight log"))
    stream = infer_batch(model, lg)
    rows = diagnosis_rows(stream, _geometry(cfg).n_rotors)
    buf = io.StringIO()
    buf.write(f"# {_prov_comment(provenance(cfg, 'infer'))}\n")
    csv.writer(buf, lineterminator="\n").writerows(rows)
    out = Path(args.out) if args.out else Path(f"{lg.flight_id}.diagnosis.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out, buf.getvalue())
    types = [d.type for d in stream.diagnoses]
    summary = {t: types.count(t) for t in ("C0", "C1", "C2")}
    doc = {"windows": len(stream), "types": summary, "out": str(out)}
    # throughput goes to the log only, so the report stays reproducible
    log.info("throughput %.1f windows/s", stream.windows_per_s)
    _report(args, doc, f"{len(stream)} diagnoses -> {out}; types {summary}")


def cmd_importance(args, cfg):
    from . import evalkit
    from .plots import importance_svg

    model, ds = _model_and_data(args)
    st = cfg["study"]
    imp = evalkit.cascade_importance(model, ds, st["importance_target"], int(st["repeats"]), cfg["train"]["seed"])
    out = Path(args.out)
    stem = f"importance_{st['importance_target']}"
    _write_table(imp.table(len(imp.names)), out, stem, provenance(cfg, "importance"))
    importance_svg(out / f"{stem}.svg", imp, st["top"])
    top = imp.top(st["top"])
    _report(args, {"baseline": imp.baseline, "top": [[n, float(m)] for n, m, _ in top]}, imp.table(st["top"]).to_text())


def cmd_bandstudy(args, cfg):
    from . import evalkit
    from .flightlog import load_corpus
    from .plots import bandstudy_svg

    logs = load_corpus(_need(args.corpus or cfg["paths"]["corpus"], "corpus directory"))
    table = evalkit.band_width_study(logs, tuple(cfg["study"]["widths"]), cfg["train"]["seed"], cascade_config(cfg))
    out = Path(args.out)
    _write_table(table, out, "bandstudy", provenance(cfg, "bandstudy"))
    bandstudy_svg(out / "bandstudy.svg", table)
    _report(args, table.to_dict(), table.to_text())


def cmd_ablate(args, cfg):
    from . import evalkit

    ds = _load_features(args.features)
    table = evalkit.ablation_study(ds, config=cascade_config(cfg), localization=cfg["study"]["ablation_localization"])
    _write_table(table, Path(args.out), "ablation", provenance(cfg, "ablate"))
    _report(args, table.to_dict(), table.to_text())


def cmd_loo(args, cfg):
    from . import evalkit

    ds = _load_features(args.features)
    res = evalkit.loo_baseline(ds, cfg["study"]["held_out"], cfg["train"]["seed"], cascade_config(cfg))
    table = res.table()
    _write_table(table, Path(args.out), f"loo_{res.held_out}", provenance(cfg, "loo"))
    doc = table.to_dict() | {"svm_test_accuracy": res.svm_test_accuracy, "svm_class_counts": res.svm_class_counts}
    _report(args, doc, table.to_text() + f"quadratic SVM test accuracy on the other classes: {res.svm_test_accuracy:.4f}\n")


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _d(section, key):
    return f"(default: {DEFAULTS[section][key]})"


def _bool_flag(p, name, dest, help_):
    p.add_argument(f"--{name}", dest=dest, action=argparse.BooleanOptionalAction, default=None, help=help_)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file; flags override it")
    common.add_argument("--seed", type=int, help=f"seed for every random step {_d('train', 'seed')}")
    common.add_argument("--json", action="store_true", help="print the report as one JSON document")
    common.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr (-vv for debug)")

    feat = argparse.ArgumentParser(add_help=False)
    feat.add_argument("--bw", type=int, help=f"band width in Hz, one of 2,3,4,5,6,7,8,10 {_d('features', 'band_width')}")
    feat.add_argument("--stride", type=int, help=f"window stride in control cycles {_d('features', 'stride')}")

    train = argparse.ArgumentParser(add_help=False)
    train.add_argument("--C", type=float, help=f"SVM soft-margin constant {_d('train', 'C')}")
    train.add_argument("--tol", type=float, help=f"SVM KKT tolerance {_d('train', 'tol')}")
    train.add_argument("--epochs", type=int, help=f"network training epochs {_d('train', 'epochs')}")
    train.add_argument("--lr", type=float, help=f"Adadelta learning rate {_d('train', 'lr')}")
    train.add_argument("--batch-size", dest="batch_size", type=int, help=f"mini-batch size, 0 for full batch {_d('train', 'batch_size')}")
    _bool_flag(train, "by-flight", "by_flight", f"split whole flights instead of rows {_d('train', 'by_flight')}")

    parser = _Parser(prog="propdmg", description="Propeller damage detection from flight logs.")
    parser.add_argument("--version", action="version", version=f"propdmg {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_, parents=()):
        p = sub.add_parser(name, help=help_, description=help_, parents=[common, *parents])
        p.set_defaults(func=fn)
        return p

    p = add("synth", cmd_synth, "generate the synthetic corpus (18 flights, x4 rotations)")
    p.add_argument("--out", help=f"output directory {_d('paths', 'corpus')}")
    p.add_argument("--duration", type=float, help="seconds per flight; 0 keeps the reference window counts (default: 0)")
    _bool_flag(p, "augment", "augment", f"write all rotations {_d('synth', 'augment')}")

    p = add("ingest", cmd_ingest, "validate flight CSVs with sidecars and copy them into a corpus")
    p.add_argument("--src", required=True, help="directory of <id>.csv + <id>.meta.json")
    p.add_argument("--out", required=True, help="corpus directory to write")
    p.add_argument("--allow-invalid", action="store_true", help="keep logs that fail validation")

    p = add("augment", cmd_augment, "rotate every flight onto every motor position")
    p.add_argument("--corpus", help=f"input corpus {_d('paths', 'corpus')}")
    p.add_argument("--out", required=True, help="output directory")

    p = add("features", cmd_features, "extract band-energy features of every window", [feat])
    p.add_argument("--corpus", help=f"input corpus {_d('paths', 'corpus')}")
    p.add_argument("--out", required=True, help="feature CSV to write")

    p = add("split", cmd_split, "tag rows train/val/test (40/30/30)", [train])
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--out", help="output CSV (default: rewrite the input path)")

    p = add("train", cmd_train, "train the cascade and save a model bundle", [train])
    p.add_argument("--features", required=True, help="feature CSV (split if untagged)")
    p.add_argument("--out", required=True, help="bundle directory")
    p.add_argument("--plots", action="store_true", help="also write loss.svg")

    p = add("eval", cmd_eval, "confusion tables, regression summaries and headline metrics")
    p.add_argument("--model", required=True, help="bundle directory or cascade.json")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--out", required=True, help="report directory")

    p = add("infer", cmd_infer, "diagnose every window of one flight log")
    p.add_argument("--model", required=True, help="bundle directory or cascade.json")
    p.add_argument("--log", required=True, help="flight CSV with sidecar")
    p.add_argument("--out", help="diagnosis CSV (default: <flight id>.diagnosis.csv in the working directory)")

    p = add("importance", cmd_importance, "permutation feature importance of one cascade stage")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--target",
        choices=("type", "tipcut_loc", "tipcut_nn", "long_loc", "long_nn"),
        help=f"stage to analyze {_d('study', 'importance_target')}",
    )
    p.add_argument("--repeats", type=int, help=f"shuffles per feature {_d('study', 'repeats')}")

    p = add("bandstudy", cmd_bandstudy, "damage-type accuracy for each band width", [train])
    p.add_argument("--corpus", help=f"input corpus {_d('paths', 'corpus')}")
    p.add_argument("--out", required=True)
    p.add_argument("--widths", type=int, nargs="+", help=f"band widths {_d('study', 'widths')}")

    p = add("ablate", cmd_ablate, "tip-cut network MSE for sensor subsets", [train])
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    _bool_flag(p, "localization", "localization", f"also retrain the localizer {_d('study', 'ablation_localization')}")

    p = add("loo", cmd_loo, "leave one tip-cut damage out: quadratic SVM vs network", [train])
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--held-out", dest="held_out", help=f"damage code such as 20-20 {_d('study', 'held_out')}")
    return parser


def _exit_code(exc):
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG, "config"
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC, "numeric"
    if isinstance(exc, (DataError, OSError, PropDmgError)):
        return EXIT_DATA, "data"
    if isinstance(exc, (FloatingPointError, ArithmeticError)):
        return EXIT_NUMERIC, "numeric"
    return None, None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = build_config(args)
        args.func(args, cfg)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes below
        code, kind = _exit_code(exc)
        if code is None:
            raise
        print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
