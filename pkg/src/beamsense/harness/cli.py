"""Command-line entry point.

Verbs: generate (dataset), train (single grid entry), grid, ablate,
saliency, plot. All verbs accept --config/--seed/--out overrides; the
defaults are printable with --dump-config.
"""

import argparse
import logging
import os
import sys

from . import config as config_mod
from . import runner, svgplot
from .. import saliency as saliency_mod
from ..classifier import build_model, train


def _add_common(parser):
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--epochs", type=int, help="epoch count override")
    parser.add_argument("--repeats", type=int, help="repeat count override")
    parser.add_argument("--desk-scale", action="store_true",
                        help="force the 2-subject x 2-sequence scene")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="beamsense",
        description="Sensing-airtime experiments on synthetic beam sweeps")
    parser.add_argument("--dump-config", action="store_true",
                        help="print the default config and exit")
    sub = parser.add_subparsers(dest="verb")
    for verb, help_text in (
            ("generate", "generate and store the synthetic dataset"),
            ("train", "train a single subsampling variant"),
            ("grid", "run the full subsampling grid"),
            ("ablate", "run the three ablations (needs a completed grid "
                       "baseline)"),
            ("saliency", "train a baseline model and export saliency maps"),
            ("plot", "emit SVG figures from results.csv")):
        p = sub.add_parser(verb, help=help_text)
        _add_common(p)
        if verb == "train":
            p.add_argument("--mode", default="none",
                           choices=("none", "time", "tx", "rx", "txrx"))
            p.add_argument("--factor", type=int, default=1)
        if verb == "plot":
            p.add_argument("--results", help="results.csv path "
                           "(default: <out>/results.csv)")
    return parser


def _load_config(args):
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.repeats is not None:
        overrides["repeats"] = args.repeats
    if args.desk_scale:
        overrides["subjects"] = 2
        overrides["sequences"] = 2
    return config_mod.load_config(args.config, **overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.dump_config:
        sys.stdout.write(config_mod.dump_config())
        return 0
    if args.verb is None:
        build_parser().print_help()
        return 2
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(levelname)s %(message)s")
    cfg = _load_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    log_handler = logging.FileHandler(os.path.join(cfg.out_dir, "run.log"))
    log_handler.setFormatter(logging.Formatter(
        "%(asctime)s %(levelname)s %(message)s"))
    logging.getLogger("beamsense.harness").addHandler(log_handler)
    with open(os.path.join(cfg.out_dir, "config.ini"), "w") as fh:
        fh.write(config_mod.dump_config(cfg))

    if args.verb == "generate":
        runner.ensure_dataset(cfg)
        return 0
    if args.verb == "train":
        session = runner.ensure_dataset(cfg)
        parts, stats = runner.build_splits(session, cfg.window_stride)
        entry = runner.run_single(cfg, args.mode, args.factor, parts, stats)
        print("mean accuracy %.4f +/- %.4f" % (entry["mean"], entry["stddev"]))
        return 0
    if args.verb == "grid":
        path = runner.run_grid(cfg)
        print(f"results written to {path}")
        return 0
    if args.verb == "ablate":
        report = runner.run_ablations(cfg)
        for name, row in report.items():
            print("%s: %.4f +/- %.4f" % (name, row["mean"], row["stddev"]))
        return 0
    if args.verb == "saliency":
        session = runner.ensure_dataset(cfg)
        parts, stats = runner.build_splits(session, cfg.window_stride)
        splits = runner._variant_splits(parts, stats, None)
        seed = runner.derive_seed(cfg.master_seed, "saliency", 1, 0)
        model = build_model(seed)
        train(model, splits, cfg.train_config(seed))
        smap = saliency_mod.compute_saliency(model, splits[2],
                                             seed=cfg.master_seed)
        for fmt in ("csv", "pgm"):
            out = os.path.join(cfg.out_dir, f"saliency.{fmt}")
            saliency_mod.export_saliency(smap, out, fmt=fmt)
            print(f"wrote {out}")
        print("central mass fraction %.3f"
              % saliency_mod.central_mass_fraction(smap))
        return 0
    if args.verb == "plot":
        results = args.results or os.path.join(cfg.out_dir, "results.csv")
        for path in svgplot.emit_plots(results, cfg.out_dir):
            print(f"wrote {path}")
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
