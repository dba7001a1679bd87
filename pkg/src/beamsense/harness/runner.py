"""Experiment runner: dataset generation, the subsampling grid, ablations.

Every grid entry is written atomically to its own json file plus a .done
marker, so an interrupted grid run resumes where it stopped and still
produces the same final CSVs.
"""

import hashlib
import json
import logging
import os
from fractions import Fraction

import numpy as np

from .. import airtime, dataset, saliency, sweepgen
from ..classifier import build_model, train
from ..errors import StateError

log = logging.getLogger("beamsense.harness")


def derive_seed(master_seed, mode, s, repeat):
    """Stable per-unit seed: sha256 over the unit's identity, folded to 31
    bits. Independent of process hash randomization."""
    key = f"{master_seed}:{mode}:{s}:{repeat}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:4], "little") & 0x7FFFFFFF


def _atomic_write(path, data):
    tmp = path + ".tmp"
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


# --- dataset and splits ---------------------------------------------------

def ensure_dataset(config):
    """Load the session from out_dir if present, else generate and save."""
    path = os.path.join(config.out_dir, "dataset.bin")
    if os.path.exists(path):
        log.info("loading dataset %s", path)
        return dataset.load_session(path)
    log.info("generating dataset (%d subjects x %d sequences)",
             config.subjects, config.sequences)
    session = sweepgen.generate_session(
        n_subjects=config.subjects, n_sequences=config.sequences,
        seconds_per_gesture=config.seconds_per_gesture,
        noise_std_db=config.noise_std_db, seed=config.master_seed)
    os.makedirs(config.out_dir, exist_ok=True)
    dataset.save_session(session, path)
    return session


def build_splits(session, stride):
    """Window, split, and return ((train,val,test), (mean,std))."""
    windows = dataset.window_stream(session, stride=stride)
    parts = dataset.split(windows)
    stats = parts[0].value_stats()
    return parts, stats


def _variant_splits(parts, stats, plan, upsampler=None):
    mean, std = stats
    transform = dataset.make_transform(plan, mean, std, upsampler=upsampler)
    return tuple(dataset.TransformedWindows(p, transform) for p in parts)


# --- grid entries ---------------------------------------------------------

def _entry_paths(out_dir, mode, s):
    stem = os.path.join(out_dir, f"entry_{mode}_s{s}")
    return stem + ".json", stem + ".done", stem + "_confusion.csv"


def run_single(config, mode, s, parts, stats, upsampler=None, tag=None,
               seed_key=None, epochs=None, keep_curves=False):
    """Train one grid entry (all repeats) and persist its result files.

    tag names the output files (defaults to mode); seed_key=(mode, s)
    selects the seed stream so ablations can reuse the baseline's seeds.
    """
    plan = None if mode == "none" else airtime.make_plan(mode, s)
    splits = _variant_splits(parts, stats, plan, upsampler=upsampler)
    seed_mode, seed_s = seed_key or (mode, s)
    n_epochs = epochs or config.epochs
    runs = []
    for i in range(config.repeats):
        seed = derive_seed(config.master_seed, seed_mode, seed_s, i)
        cfg = config.train_config(seed)
        cfg.epochs = n_epochs
        model = build_model(seed)
        metrics = train(model, splits, cfg)
        log.info("%s s=%d repeat %d/%d: test accuracy %.4f (best epoch %d)",
                 tag or mode, s, i + 1, config.repeats,
                 metrics.test_accuracy, metrics.best_epoch)
        runs.append(metrics)
    accs = np.array([r.test_accuracy for r in runs])
    actual = Fraction(1) if plan is None else plan.actual
    entry = {
        "mode": mode, "s": s,
        "s_prime": [actual.numerator, actual.denominator],
        "accuracies": [r.test_accuracy for r in runs],
        "best_epochs": [r.best_epoch for r in runs],
        "seeds": [r.seed for r in runs],
        "mean": float(accs.mean()), "stddev": float(accs.std()),
        "epochs": n_epochs, "repeats": config.repeats,
    }
    if keep_curves:
        entry["curves"] = [{"train_loss": r.train_loss,
                            "train_acc": r.train_acc,
                            "val_acc": r.val_acc} for r in runs]
    json_path, done_path, conf_path = _entry_paths(
        config.out_dir, tag or mode, s)
    confusion = sum(r.confusion for r in runs)
    _atomic_write(conf_path, "\n".join(
        ",".join(str(v) for v in row) for row in confusion) + "\n")
    _atomic_write(json_path, json.dumps(entry, indent=1))
    _atomic_write(done_path, "")
    return entry


def _result_row(entry):
    actual = Fraction(*entry["s_prime"])
    sensing = 1 / actual
    return (entry["mode"], str(entry["s"]),
            f"{actual.numerator}/{actual.denominator}",
            "%.10g" % float(actual),
            f"{sensing.numerator}/{sensing.denominator}",
            "%.10g" % float(sensing),
            "%.10g" % float(1 - sensing),
            "%.10g" % entry["mean"], "%.10g" % entry["stddev"],
            str(entry["repeats"]), str(entry["epochs"]))


RESULT_COLUMNS = ("mode", "s", "s_prime", "s_prime_decimal",
                  "sensing_fraction", "sensing_fraction_decimal",
                  "comms_fraction_decimal", "mean_accuracy", "stddev",
                  "n_repeats", "epochs")


def write_results(entries, path):
    """Target-factor table: one row per grid entry, in grid order."""
    lines = [",".join(RESULT_COLUMNS)]
    lines += [",".join(_result_row(e)) for e in entries]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_actual_results(entries, path):
    """Actual-factor table: entries sharing (mode, s') pool their runs."""
    groups = {}
    for e in entries:
        key = (e["mode"], tuple(e["s_prime"]))
        groups.setdefault(key, []).append(e)
    lines = ["mode,s_prime,s_prime_decimal,target_factors,"
             "mean_accuracy,stddev,n_runs"]
    for (mode, (num, den)), members in groups.items():
        pooled = np.concatenate([m["accuracies"] for m in members])
        targets = ";".join(str(m["s"]) for m in members)
        lines.append(",".join((
            mode, f"{num}/{den}", "%.10g" % (num / den), targets,
            "%.10g" % pooled.mean(), "%.10g" % pooled.std(),
            str(len(pooled)))))
    _atomic_write(path, "\n".join(lines) + "\n")


def run_grid(config):
    """Run every grid entry (resuming over .done markers) and write the
    target- and actual-factor result tables. Returns the results.csv path."""
    os.makedirs(config.out_dir, exist_ok=True)
    session = ensure_dataset(config)
    parts, stats = build_splits(session, config.window_stride)
    entries = []
    for mode, s in config.grid:
        json_path, done_path, _ = _entry_paths(config.out_dir, mode, s)
        if os.path.exists(done_path):
            log.info("skipping completed entry %s s=%d", mode, s)
            with open(json_path) as fh:
                entries.append(json.load(fh))
        else:
            entries.append(run_single(config, mode, s, parts, stats))
    results_path = os.path.join(config.out_dir, "results.csv")
    write_results(entries, results_path)
    write_actual_results(entries,
                         os.path.join(config.out_dir, "actual_results.csv"))
    return results_path


# --- ablations ------------------------------------------------------------

def run_ablations(config, tiled_entry=("txrx", 4), permutation_seed=None):
    """Three ablations against the completed baseline grid entry:
    tiled upsampling, beam-index permutation, and doubled epochs.

    permutation_seed=None keeps beam order (identity permutation);
    an integer seed shuffles tx and rx indices.
    """
    json_path, done_path, _ = _entry_paths(config.out_dir, "none", 1)
    if not os.path.exists(done_path):
        raise StateError("baseline grid entry must be run before ablations")
    with open(json_path) as fh:
        baseline = json.load(fh)
    session = ensure_dataset(config)
    parts, stats = build_splits(session, config.window_stride)

    rows = []
    mode, s = tiled_entry
    baseline_seeds = ("none", 1)
    rows.append(run_single(config, mode, s, parts, stats,
                           upsampler=airtime.upsample_tiled, tag="tiled",
                           seed_key=baseline_seeds))

    if permutation_seed is None:
        n_tx, n_rx = session.frames.shape[1:]
        permuted = saliency.apply_permutation(
            session, np.arange(n_tx), np.arange(n_rx))
    else:
        permuted, _, _ = saliency.permute_beams(session, seed=permutation_seed)
    p_parts, p_stats = build_splits(permuted, config.window_stride)
    rows.append(run_single(config, "none", 1, p_parts, p_stats,
                           tag="permuted", seed_key=baseline_seeds))

    double = run_single(config, "none", 1, parts, stats, tag="double",
                        seed_key=baseline_seeds,
                        epochs=2 * config.epochs, keep_curves=True)
    rows.append(double)
    curve_lines = ["repeat,epoch,train_loss,train_acc,val_acc"]
    for i, curve in enumerate(double["curves"]):
        for ep in range(len(curve["train_loss"])):
            curve_lines.append("%d,%d,%.10g,%.10g,%.10g" % (
                i, ep + 1, curve["train_loss"][ep],
                curve["train_acc"][ep], curve["val_acc"][ep]))
    _atomic_write(os.path.join(config.out_dir, "double_epochs_curves.csv"),
                  "\n".join(curve_lines) + "\n")

    names = ("tiled_upsampling", "beam_permutation", "double_epochs")
    lines = ["name,mean_accuracy,stddev,baseline_mean,delta"]
    for name, row in zip(names, rows):
        lines.append("%s,%.10g,%.10g,%.10g,%.10g" % (
            name, row["mean"], row["stddev"], baseline["mean"],
            row["mean"] - baseline["mean"]))
    path = os.path.join(config.out_dir, "ablations.csv")
    _atomic_write(path, "\n".join(lines) + "\n")
    return {name: row for name, row in zip(names, rows)}
