"""Command-line interface: ``coherent-sampling {density,sample,verify,sparsify}``.

Exit codes are 0 on success, 1 when a run or check fails, and 2 for usage or
model-parse errors.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .exceptions import BudgetExhausted, MaxAttemptsExceeded, SamplingError
from .experiments import bin_edges, density_in_histogram_coords, histogram_coords, normalized_histogram
from .gaussian import superposition_density, superposition_model
from .modelspec import LoadedModel, ModelSpecError, dump_superposition, load_model
from .povm import born_distribution, finite_model
from .rejection import sample_many, trial_budget
from .sparsify import Decomposition, sparsify_verified
from .verification import SUITES, check_finite_document, check_gaussian_model, run_suites

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

HET_NOTE = "# heterodyne outcomes: beta = (x + i p) / sqrt(2); density is per unit d^2 beta"


class UsageError(Exception):
    pass


def _grid(text: str):
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:STEP, got {text!r}") from None
    if not (step > 0 and hi > lo and all(map(math.isfinite, (lo, hi, step)))):
        raise argparse.ArgumentTypeError(f"need MIN < MAX and STEP > 0, got {text!r}")
    return lo, hi, step


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _unit_interval(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="coherent-sampling",
        description="Exact sampling of measurement outcomes of coherent superpositions.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def model_args(sp, required=True):
        sp.add_argument("--model", required=required, metavar="FILE", help="JSON model document")
        sp.add_argument("--measurement", choices=["het", "hom"], help="default: het, or hom for gkp")

    d = sub.add_parser("density", help="evaluate the outcome density on a grid")
    model_args(d)
    d.add_argument("--grid", type=_grid, default=(-4.0, 4.0, 0.1), metavar="MIN:MAX:STEP",
                   help="inclusive grid, default -4:4:0.1; write --grid=-3:3:0.06 when MIN is negative")
    d.add_argument("--out", metavar="PATH", help="CSV file (default: stdout)")

    s = sub.add_parser("sample", help="draw samples by rejection")
    model_args(s)
    s.add_argument("--samples", type=_positive_int, default=100_000, metavar="N")
    s.add_argument("--seed", type=_seed, default=0, metavar="S")
    s.add_argument("--delta", type=_unit_interval, default=0.01, metavar="D",
                   help="probability that any sample of the run fails (default 0.01)")
    s.add_argument("--budget", type=_positive_int, metavar="N", help="explicit per-sample trial budget")
    s.add_argument("--bin-width", type=_positive_float, metavar="W",
                   help="histogram bin width (default 0.25 het, 0.1 hom)")
    s.add_argument("--grid", type=_grid, metavar="MIN:MAX:STEP",
                   help="histogram range; STEP is ignored in favour of --bin-width")
    s.add_argument("--out", metavar="PATH", help="samples CSV; summary and histogram are written beside it")

    v = sub.add_parser("verify", help="run property sweeps")
    v.add_argument("suite", nargs="*", metavar="SUITE",
                   help=f"one or more of {', '.join([*SUITES, 'all'])} (default all)")
    model_args(v, required=False)
    v.add_argument("--seed", type=_seed, default=0, metavar="S")
    v.add_argument("--out", metavar="PATH", help="JSON report (default: stdout)")

    sp = sub.add_parser("sparsify", help="replace a long decomposition by a sparse one")
    model_args(sp)
    sp.add_argument("--epsilon", type=_positive_float, required=True, metavar="E")
    sp.add_argument("--seed", type=_seed, default=0, metavar="S")
    sp.add_argument("--out", metavar="PATH", help="sparsified model JSON (default: stdout)")
    return p


# -- output helpers -------------------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v)) if np.isfinite(v) else "nan"


def _write_csv(path, comments, header, rows):
    buf = io.StringIO(newline="")
    for c in comments:
        buf.write(c + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(r if isinstance(r, str) else _fmt(r) for r in row) + "\n")
    _emit(path, buf.getvalue())


def _emit(path, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _dump_json(path, obj):
    _emit(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load(path) -> LoadedModel:
    try:
        return load_model(path)
    except OSError as exc:
        raise UsageError(f"cannot read model {path}: {exc.strerror or exc}") from None
    except ModelSpecError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _measurement(model: LoadedModel, args):
    meas = model.measurement(args.measurement)
    if model.kind == "finite" and args.measurement:
        raise UsageError("--measurement does not apply to finite models")
    return meas


def _points(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


# -- commands ----------------------------------------------------------------------


def cmd_density(args) -> int:
    model = _load(args.model)
    meas = _measurement(model, args)
    if model.kind == "finite":
        sup, povm = model.finite
        p = born_distribution(sup.state, povm)
        _write_csv(args.out, [], ["outcome", "probability"], [(str(k), v) for k, v in enumerate(p)])
        return EXIT_OK
    sup = model.gaussian
    if sup.modes != 1:
        raise UsageError("density grids are supported for single-mode models only")
    axis = _points(*args.grid)
    if meas.kind == "homodyne":
        f = superposition_density(sup, meas, axis[:, None])
        _write_csv(args.out, ["# homodyne outcomes: x quadrature; density per unit dx"],
                   ["x", "density"], zip(axis, f))
        return EXIT_OK
    R, I = np.meshgrid(axis, axis, indexing="ij")
    beta = np.column_stack([R.ravel(), I.ravel()])
    f = density_in_histogram_coords(sup, meas)(beta)
    _write_csv(args.out, [HET_NOTE], ["re_beta", "im_beta", "density"],
               ((b[0], b[1], v) for b, v in zip(beta, f)))
    return EXIT_OK


def _sample_paths(out):
    if out is None:
        return None, None, None
    out = Path(out)
    stem = out.with_suffix("") if out.suffix == ".csv" else out
    return out, Path(f"{stem}.summary.json"), Path(f"{stem}.hist.csv")


def cmd_sample(args) -> int:
    model = _load(args.model)
    meas = _measurement(model, args)
    if model.kind == "finite":
        sm = finite_model(*model.finite)
    else:
        sm = superposition_model(model.gaussian, meas)
    K = sm.k_factor
    cap = args.budget or trial_budget(max(1.0, K), args.delta / args.samples)
    status = "ok"
    try:
        batch = sample_many(sm, args.samples, seed=args.seed, per_sample_cap=cap)
    except BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    ok = ~batch.failed
    if batch.n_failed:
        status = "failed"
        print(f"error: {batch.n_failed} of {args.samples} samples exhausted their budget of {cap} trials",
              file=sys.stderr)
    total = int(batch.trials_used.sum())
    summary = {
        "model": model.kind,
        "measurement": meas.kind if meas else None,
        "k_factor": K,
        "chi": sm.chi,
        "seed": args.seed,
        "n_samples": args.samples,
        "n_failed": batch.n_failed,
        "per_sample_budget": cap,
        "delta": None if args.budget else args.delta,
        "mean_trials": float(batch.trials_used[ok].mean()) if ok.any() else None,
        "acceptance_rate": int(ok.sum()) / total if total else None,
        "status": status,
    }
    samples_path, summary_path, hist_path = _sample_paths(args.out)
    if samples_path is not None:
        _write_samples(samples_path, model, meas, batch)
        hist = _write_histogram(hist_path, model, meas, batch.samples[ok], args)
        if hist:
            summary.update(hist)
        summary["files"] = {"samples": samples_path.name, "summary": summary_path.name}
        if hist:
            summary["files"]["histogram"] = hist_path.name
        _dump_json(summary_path, summary)
    else:
        _dump_json(None, summary)
    return EXIT_CHECK if batch.n_failed else EXIT_OK


def _write_samples(path, model, meas, batch):
    n = batch.samples.shape[0]
    if model.kind == "finite":
        cols, comments = ["outcome"], []
        vals = batch.samples.reshape(n, 1)
        fmt = lambda r: [str(int(v)) if v >= 0 else "nan" for v in r]
    else:
        modes = model.gaussian.modes
        if meas.kind == "homodyne":
            cols = [f"x{k + 1}" for k in range(modes)]
            comments = ["# homodyne outcomes: x quadrature per mode"]
        else:
            cols = [c for k in range(modes) for c in (f"x{k + 1}", f"p{k + 1}")]
            comments = ["# heterodyne outcomes as (x, p) quadrature pairs; beta = (x + i p) / sqrt(2)"]
        vals = batch.samples
        fmt = lambda r: [_fmt(v) for v in r]
    rows = (
        [str(i), str(int(t)), "1" if f else "0", *fmt(r)]
        for i, (t, f, r) in enumerate(zip(batch.trials_used, batch.failed, vals))
    )
    _write_csv(path, comments, ["index", "trials", "failed", *cols], rows)


def _write_histogram(path, model, meas, samples, args):
    if samples.shape[0] == 0:
        return None
    if model.kind == "finite":
        counts = np.bincount(samples.astype(int), minlength=len(model.finite[1]))
        p = born_distribution(model.finite[0].state, model.finite[1])
        _write_csv(path, [], ["outcome", "frequency", "probability"],
                   ((str(k), c / samples.shape[0], pk) for k, (c, pk) in enumerate(zip(counts, p))))
        return {"bin_width": None}
    sup = model.gaussian
    if sup.modes != 1:
        return None
    width = args.bin_width or (0.1 if meas.kind == "homodyne" else 0.25)
    coords = histogram_coords(samples, meas)
    if args.grid:
        lo, hi = args.grid[:2]
    else:
        hi = width * math.ceil(float(np.max(np.abs(coords))) / width + 1e-9)
        lo = -hi
    try:
        edges = bin_edges(lo, hi, width)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    hist = normalized_histogram(coords, edges)
    centers = (edges[:-1] + edges[1:]) / 2
    f = density_in_histogram_coords(sup, meas)
    if meas.kind == "homodyne":
        _write_csv(path, ["# normalized count = count / (total * bin width)"],
                   ["x_center", "normalized_count", "density"], zip(centers, hist, f(centers[:, None])))
    else:
        R, I = np.meshgrid(centers, centers, indexing="ij")
        dens = f(np.column_stack([R.ravel(), I.ravel()]))
        _write_csv(path, [HET_NOTE, "# normalized count = count / (total * bin area)"],
                   ["re_beta_center", "im_beta_center", "normalized_count", "density"],
                   zip(R.ravel(), I.ravel(), hist.ravel(), dens))
    return {"bin_width": width, "histogram_range": [lo, hi]}


def cmd_verify(args) -> int:
    unknown = sorted(set(args.suite) - {*SUITES, "all"})
    if unknown:
        raise UsageError(f"unknown suite {unknown[0]!r}; choose from {', '.join([*SUITES, 'all'])}")
    report = run_suites(args.suite or ["all"], seed=args.seed)
    if args.model:
        report["model"] = _verify_model(args)
        report["passed"] = report["passed"] and all(c["passed"] for c in report["model"]["checks"])
    _dump_json(args.out, report)
    for name, checks in report["suites"].items():
        for c in checks:
            if not c["passed"]:
                print(f"FAIL {c['name']}: min margin {c['min_margin']:.3g}", file=sys.stderr)
    for c in report.get("model", {}).get("checks", []):
        if not c["passed"]:
            print(f"FAIL model {c['name']}: {c['detail'] or c['min_margin']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_CHECK


def _verify_model(args) -> dict:
    try:
        doc = json.loads(Path(args.model).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read model {args.model}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.model}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict) and doc.get("type") == "finite":
        try:
            checks = check_finite_document(doc)
        except (KeyError, ModelSpecError) as exc:
            raise UsageError(f"{args.model}: {exc}") from None
        return {"type": "finite", "checks": checks}
    model = _load(args.model)
    meas = _measurement(model, args)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(len(SUITES),)))
    return {"type": model.kind, "measurement": meas.kind,
            "checks": check_gaussian_model(model.gaussian, meas, rng)}


def cmd_sparsify(args) -> int:
    model = _load(args.model)
    if model.gaussian is None:
        raise UsageError("sparsify needs a Gaussian model")
    if not args.epsilon < 0.5:
        raise UsageError(f"--epsilon must be below 0.5, got {args.epsilon}")
    rng = np.random.default_rng(args.seed)
    try:
        sp = sparsify_verified(Decomposition.from_superposition(model.gaussian), args.epsilon, rng)
    except MaxAttemptsExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    doc = dump_superposition(sp.result)
    doc["normalize"] = True
    _dump_json(args.out, doc)
    report = {
        "epsilon": sp.epsilon,
        "chi": sp.chi,
        "attempts": sp.attempts,
        "distance": sp.distance,
        "coeff_norm": sp.coeff_norm,
        "source_chi": model.gaussian.chi,
        "source_l1_sq": float(np.sum(np.abs(model.gaussian.coeffs))) ** 2,
        "seed": args.seed,
    }
    if args.out:
        _dump_json(Path(f"{Path(args.out).with_suffix('')}.report.json"), report)
    else:
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
    return EXIT_OK


COMMANDS = {"density": cmd_density, "sample": cmd_sample, "verify": cmd_verify, "sparsify": cmd_sparsify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SamplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
