"""Command-line interface: ``srdcnn {train,eval,baseline,gradcheck,bench}``.

Settings come from, in increasing priority: built-in defaults, a JSON file
given with ``--config``, and command-line flags.
"""

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import gradcheck, report
from .data import load_model, load_ucr, save_model, znormalize_dataset
from .dtw import DtwConfig, baseline_evaluate
from .errors import SrdcnnError, UsageError
from .kernels import BACKEND
from .model import Hyperparameters, evaluate, train

log = logging.getLogger("srdcnn")

METRICS_HEADER = ["epoch", "data_loss", "l1_penalty", "l2_penalty",
                  "regularized_cost", "train_accuracy", "seconds"]

# flag name -> Hyperparameters field
HP_FLAGS = {"epochs": "epochs", "lr": "lr", "alpha1": "alpha1", "alpha2": "alpha2", "seed": "seed"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p):
    p.add_argument("--config", help="JSON file of settings (flags take precedence)")
    p.add_argument("--print-config", action="store_true", help="print the resolved settings first")
    p.add_argument("--json", action="store_true", help="report errors as a JSON object on stderr")
    p.add_argument("-v", "--verbose", action="store_true")


def _hp_flags(p):
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--seed", type=int)


def build_parser():
    parser = _Parser(prog="srdcnn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    _common(p)
    p.add_argument("--train", required=True, help="UCR-format training file")
    p.add_argument("--out", required=True, help="checkpoint path (JSON)")
    p.add_argument("--metrics", help="per-epoch CSV (default: <out stem>.metrics.csv)")
    _hp_flags(p)
    p.add_argument("--znormalize", action="store_true", default=None)
    p.add_argument("--timing", action="store_true", default=None,
                   help="record wall-clock seconds per epoch in the CSV")

    p = sub.add_parser("eval", help="accuracy of a checkpoint on a test file")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--report", help="JSON report to append the result to")
    p.add_argument("--dataset", help="dataset name recorded in the report")
    p.add_argument("--znormalize", action="store_true", default=None)

    p = sub.add_parser("baseline", help="DTW 1-NN accuracy")
    _common(p)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--window", type=float, help="warping window fraction (1 = unconstrained)")
    p.add_argument("--jobs", type=int)
    p.add_argument("--report")
    p.add_argument("--dataset")
    p.add_argument("--znormalize", action="store_true", default=None)

    p = sub.add_parser("gradcheck", help="finite-difference gradient certification")
    _common(p)
    p.add_argument("--tiny", action="store_true", default=None,
                   help="check each layer and a tiny two-layer network (the default)")
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--h", type=float)

    p = sub.add_parser("bench", help="train and score datasets next to published results")
    _common(p)
    p.add_argument("--dataset", action="append", help="dataset name (repeatable, or 'all')")
    p.add_argument("--data-dir", help="directory holding <Name>/<Name>_TRAIN.tsv files")
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--window", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--znormalize", action="store_true", default=None)
    p.add_argument("--skip-dtw", action="store_true", default=None)
    p.add_argument("--skip-srdcnn", action="store_true", default=None)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--text", help="aligned text table path")
    return parser


DEFAULTS = {
    "train": {"metrics": None, "znormalize": False, "timing": False},
    "eval": {"report": None, "dataset": None, "znormalize": False},
    "baseline": {"window": 1.0, "jobs": 1, "report": None, "dataset": None, "znormalize": False},
    "gradcheck": {"tiny": True, "seed": 0, "threshold": 1e-4, "h": 1e-5},
    "bench": {"dataset": None, "data_dir": os.environ.get("SRDCNN_DATA", "data/ucr"),
              "seeds": [0, 1, 2], "window": 1.0, "jobs": 1, "znormalize": False,
              "skip_dtw": False, "skip_srdcnn": False, "out": None, "text": None},
}
_META = {"command", "config", "print_config", "json", "verbose"}


def resolve(args):
    """Merge defaults, the ``--config`` file and explicit flags into one dict."""
    cfg = dict(DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in file_cfg.items()})
    for k, v in vars(args).items():
        if k not in _META and v is not None:
            cfg[k] = v
    cfg["command"] = args.command
    return cfg


def _hyperparameters(cfg):
    overrides = {field: cfg[flag] for flag, field in HP_FLAGS.items() if cfg.get(flag) is not None}
    base = Hyperparameters.from_dict(cfg["hyperparameters"]) if "hyperparameters" in cfg else Hyperparameters()
    return dataclasses.replace(base, **overrides)


def _load(path, znorm):
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    ds = load_ucr(path)
    return znormalize_dataset(ds) if znorm else ds


def _fmt(v):
    return repr(float(v))


def cmd_train(cfg):
    hp = _hyperparameters(cfg)
    ds = _load(cfg["train"], cfg["znormalize"])
    out = Path(cfg["out"])
    metrics = Path(cfg["metrics"]) if cfg.get("metrics") else out.with_name(out.stem + ".metrics.csv")
    timing = cfg["timing"]
    with open(metrics, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_HEADER)

        def record(r):
            writer.writerow([r.epoch, _fmt(r.data_loss), _fmt(r.l1_penalty), _fmt(r.l2_penalty),
                             _fmt(r.regularized_cost), _fmt(r.train_accuracy),
                             f"{r.seconds:.6f}" if timing else ""])
            fh.flush()

        model, history = train(ds, hp, callback=record)
    save_model(model, out)
    last = history[-1]
    print(f"trained {hp.epochs} epochs: J={last.data_loss:.6f} J_hat={last.regularized_cost:.6f} "
          f"train_accuracy={last.train_accuracy:.4f}")
    print(f"checkpoint: {out}\nmetrics: {metrics}")
    return 0


def _append_report(path, records):
    path = Path(path)
    existing = json.loads(path.read_text()) if path.exists() else []
    existing.extend(records)
    path.write_text(json.dumps(existing, indent=2) + "\n")


def cmd_eval(cfg):
    model = load_model(cfg["model"])
    test = _load(cfg["test"], cfg["znormalize"])
    acc = evaluate(model, test)
    print(f"accuracy: {acc:.6f}")
    if cfg.get("report"):
        name = cfg.get("dataset") or Path(cfg["test"]).stem.replace("_TEST", "")
        _append_report(cfg["report"], [report.measured_record(name, "SRDCNN", acc, str(cfg["model"]))])
    return 0


def cmd_baseline(cfg):
    train_ds = _load(cfg["train"], cfg["znormalize"])
    test_ds = _load(cfg["test"], cfg["znormalize"])
    dtw_cfg = DtwConfig(window=cfg["window"])
    acc = baseline_evaluate(train_ds, test_ds, dtw_cfg, n_jobs=cfg["jobs"])
    print(f"dtw-1nn accuracy: {acc:.6f}")
    if cfg.get("report"):
        name = cfg.get("dataset") or Path(cfg["test"]).stem.replace("_TEST", "")
        _append_report(cfg["report"], [report.measured_record(
            name, "DTW-R1-1NN", acc, f"squared-cost DTW, window={cfg['window']}")])
    return 0


def cmd_gradcheck(cfg):
    ok = True
    for name, rep in gradcheck.layer_checks(cfg["seed"], cfg["threshold"], cfg["h"]).items():
        print(f"{name:<18} max rel. error {rep.max_error:.3e}  {'PASS' if rep.passed else 'FAIL'}")
        ok &= rep.passed
    model, x, y = gradcheck.tiny_problem(cfg["seed"])
    rep = gradcheck.gradient_check(model, x, y, cfg["threshold"], cfg["h"])
    print("tiny network (C=2, T=8, B=4):")
    print(rep.render())
    ok &= rep.passed
    return 0 if ok else 1


def find_split(data_dir, name, split):
    data_dir = Path(data_dir)
    for folder in (data_dir / name, data_dir):
        for ext in (".tsv", ".txt", ".csv", ""):
            p = folder / f"{name}_{split}{ext}"
            if p.is_file():
                return p
    raise UsageError(f"no {split} file for {name} under {data_dir}")


def cmd_bench(cfg):
    names = cfg.get("dataset") or []
    if isinstance(names, str):
        names = [names]
    if not names:
        raise UsageError("bench needs at least one --dataset")
    if any(n.lower() == "all" for n in names):
        names = [row["dataset"] for row in report.published_table()["datasets"]]
    hp = _hyperparameters(cfg)
    results = []
    for raw in names:
        name = report.canonical_name(raw)
        tr = _load(find_split(cfg["data_dir"], name, "TRAIN"), cfg["znormalize"])
        te = _load(find_split(cfg["data_dir"], name, "TEST"), cfg["znormalize"])
        results.extend(report.published_records(name))
        if not cfg["skip_srdcnn"]:
            accs = []
            for seed in cfg["seeds"]:
                model, _ = train(tr, dataclasses.replace(hp, seed=seed))
                accs.append(evaluate(model, te))
                log.info("%s seed %d: %.4f", name, seed, accs[-1])
            results.append(report.measured_record(
                name, "SRDCNN", np.mean(accs),
                f"mean over seeds {list(cfg['seeds'])}, {hp.epochs} epochs"))
        if not cfg["skip_dtw"]:
            acc = baseline_evaluate(tr, te, DtwConfig(window=cfg["window"]), n_jobs=cfg["jobs"])
            results.append(report.measured_record(
                name, "DTW-R1-1NN", acc, f"squared-cost DTW, window={cfg['window']}"))
    records, text = report.render_report(results)
    print(text)
    if cfg.get("out"):
        Path(cfg["out"]).write_text(json.dumps(records, indent=2) + "\n")
    if cfg.get("text"):
        Path(cfg["text"]).write_text(text + "\n")
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "baseline": cmd_baseline,
            "gradcheck": cmd_gradcheck, "bench": cmd_bench}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    as_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = resolve(args)
        if args.print_config:
            print(json.dumps({**cfg, "backend": BACKEND}, indent=2, default=str))
        return COMMANDS[args.command](cfg)
    except (SrdcnnError, OSError, ValueError) as exc:
        if as_json:
            print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        else:
            print(f"srdcnn: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
