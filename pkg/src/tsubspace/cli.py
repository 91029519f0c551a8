"""Command-line driver: fit, grid, predict, simulate, evaluate.

Exit codes: 0 success, 1 usage/parse/IO errors, 2 numerical failure
(fit failed, whole grid failed). Machine-readable artifacts are written only
under explicit --out paths; human-readable summaries go to stdout.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .data_io import Dataset, SimSpec, read_csv, save_model, load_model, simulate_study, standardize, write_csv
from .engine import FitConfig, fit, predict
from .errors import (
    CsvParseError,
    DegenerateComponentError,
    FitFailedError,
    GridFailedError,
    SingularMatrixError,
    TsubspaceError,
)
from .evaluation import ari, confusion, rand_index
from .models import MODEL_CODES, parse_model
from .selection import GridRequest, grid_search

_NUMERICAL_ERRORS = (FitFailedError, GridFailedError, DegenerateComponentError, SingularMatrixError)


class _Parser(argparse.ArgumentParser):
    # usage errors are exit code 1 in this tool, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._status_message(message))

    def _status_message(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return 1


def _parse_label_column(text):
    if text is None:
        return None
    try:
        return int(text)
    except ValueError:
        return text


def _parse_g_values(text):
    values = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if ".." in chunk:
            lo, hi = chunk.split("..", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif chunk:
            values.append(int(chunk))
    if not values or any(g < 1 for g in values):
        raise ValueError(f"invalid G specification {text!r}")
    return values


def _parse_models(text):
    if text.strip().lower() == "all":
        return list(MODEL_CODES)
    codes = [c.strip().upper() for c in text.split(",") if c.strip()]
    if not codes:
        raise ValueError(f"no model codes in {text!r}")
    for code in codes:
        parse_model(code)
    return codes


def _load_dataset(args):
    ds = read_csv(args.data, has_header=not args.no_header,
                  label_column=_parse_label_column(args.labels))
    if args.standardize:
        ds = standardize(ds)
    return ds


def _fit_config(args, gaussian=False):
    return FitConfig(
        init=args.init,
        n_init=args.n_init,
        max_iter=args.max_iter,
        epsilon=args.epsilon,
        dim_method=args.dim_method,
        scree_threshold=args.scree_threshold,
        gaussian_mode=gaussian,
        seed=args.seed,
    )


def _add_common_fit_flags(parser):
    parser.add_argument("--data", required=True, help="input CSV path")
    parser.add_argument("--labels", default=None, help="label column name or 0-based index")
    parser.add_argument("--no-header", action="store_true", help="CSV has no header row")
    parser.add_argument("--init", choices=("kmeans", "random"), default="kmeans")
    parser.add_argument("--n-init", type=int, default=None, help="restarts (default 1 kmeans / 10 random)")
    parser.add_argument("--epsilon", type=float, default=1e-2, help="Aitken threshold")
    parser.add_argument("--max-iter", type=int, default=200)
    parser.add_argument("--dim-method", choices=("bic", "scree"), default="scree")
    parser.add_argument("--scree-threshold", type=float, default=0.2)
    parser.add_argument("--standardize", action="store_true", help="center/scale columns first")
    parser.add_argument("--gaussian", action="store_true", help="Gaussian (robustness-off) mode")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="output path prefix")


def _warn_gaussian_nu(codes):
    print(
        "warning: --gaussian ignores the degrees-of-freedom letter of "
        f"{', '.join(sorted(set(codes)))}",
        file=sys.stderr,
    )


def _write_labels_csv(path, labels):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("label\n")
        for v in labels:
            handle.write(f"{v}\n")


def cmd_fit(args):
    ds = _load_dataset(args)
    g_values = _parse_g_values(args.G)
    if len(g_values) != 1:
        print("fit takes a single -G value; use the grid subcommand for ranges", file=sys.stderr)
        return 1
    if args.gaussian:
        _warn_gaussian_nu([args.model])
    config = _fit_config(args, gaussian=args.gaussian)
    result = fit(ds.x, args.model.strip().upper(), g_values[0], config)
    print(f"model {result.spec.code}  G={result.G}  loglik={result.loglik:.6f}  "
          f"bic={result.bic:.6f}  iterations={result.iterations}  converged={result.converged}")
    if ds.labels is not None:
        print(f"ARI={ari(ds.labels, result.labels):.6f}")
    if args.out:
        save_model(result, f"{args.out}.model.json")
        _write_labels_csv(f"{args.out}.labels.csv", result.labels)
        print(f"wrote {args.out}.model.json and {args.out}.labels.csv")
    return 0


def cmd_grid(args):
    ds = _load_dataset(args)
    codes = _parse_models(args.models)
    if args.gaussian:
        _warn_gaussian_nu(codes)
    g_values = _parse_g_values(args.G)
    config = _fit_config(args, gaussian=args.gaussian)
    request = GridRequest(specs=codes, g_values=g_values, config=config)
    result = grid_search(ds.x, request, truth=ds.labels, jobs=args.jobs)
    header = "model     G        bic      ari  conv  iters" + ("  seconds" if args.timing else "")
    print(header)
    for entry in result.entries:
        if entry.ok:
            ari_txt = f"{entry.ari:8.4f}" if entry.ari is not None else "       -"
            line = (f"{entry.model_code}  {entry.G}  {entry.bic:12.3f}  {ari_txt}"
                    f"  {str(entry.converged).lower():5s}  {entry.iterations:5d}")
        else:
            line = f"{entry.model_code}  {entry.G}  failed: {entry.error}"
        if args.timing:
            line += f"  {entry.seconds:7.3f}"
        print(line)
    best = result.best_entry
    print(f"best: model {best.model_code} G={best.G} bic={best.bic:.6f}"
          + (f" ari={best.ari:.6f}" if best.ari is not None else ""))
    if args.out:
        with open(f"{args.out}.grid.csv", "w", encoding="utf-8") as handle:
            handle.write(result.to_csv_text(include_timing=args.timing))
        save_model(result.best_fit, f"{args.out}.best.json")
        print(f"wrote {args.out}.grid.csv and {args.out}.best.json")
    return 0


def cmd_predict(args):
    result = load_model(args.model_file)
    ds = read_csv(args.data, has_header=not args.no_header,
                  label_column=_parse_label_column(args.labels))
    x = ds.x
    if args.standardize:
        x = standardize(ds).x
    labels, _ = predict(result, x)
    if args.out:
        _write_labels_csv(args.out, labels)
        print(f"wrote {args.out}")
    else:
        print("label")
        for v in labels:
            print(v)
    return 0


def cmd_simulate(args):
    nus = tuple(float(v) for v in args.nu.split(","))
    pis = tuple(float(v) for v in args.pi.split(","))
    if len(nus) != len(pis):
        print("--nu and --pi must have the same number of entries", file=sys.stderr)
        return 1
    G = len(nus)
    mus = []
    for g in range(G):
        mu = np.zeros(args.p)
        mu[0] = args.sep * g
        mus.append(mu)
    spec = SimSpec(G=G, p=args.p, n=args.n, proportions=pis, mus=tuple(mus),
                   nus=nus, n_datasets=args.n_datasets, seed=args.seed)
    datasets = simulate_study(spec)
    files = []
    for i, ds in enumerate(datasets):
        path = f"{args.out}-{i + 1:02d}.csv"
        write_csv(ds, path)
        files.append(path)
    manifest = {
        "seed": args.seed,
        "n_datasets": args.n_datasets,
        "n": args.n,
        "p": args.p,
        "proportions": list(pis),
        "nus": list(nus),
        "separation": args.sep,
        "files": files,
    }
    with open(f"{args.out}.manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=1)
        handle.write("\n")
    print(f"wrote {len(files)} datasets and {args.out}.manifest.json")
    return 0


def _read_label_file(path, column):
    """Pull one column of text labels out of any headed CSV file."""
    import csv

    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = [r for r in csv.reader(handle) if r]
    if len(rows) < 2:
        raise CsvParseError(f"{path}: need a header row and at least one label")
    header = [c.strip() for c in rows[0]]
    if column is None:
        if "label" in header:
            column = "label"
        elif len(header) == 1:
            column = header[0]
        else:
            raise CsvParseError(f"{path}: specify the label column (columns: {header})")
    if isinstance(column, int):
        idx = column
    else:
        if column not in header:
            raise CsvParseError(f"{path}: no column {column!r} in header {header}")
        idx = header.index(column)
    if not 0 <= idx < len(header):
        raise CsvParseError(f"{path}: label column index {idx} out of range")
    return np.asarray([r[idx].strip() for r in rows[1:]])


def cmd_evaluate(args):
    truth = _read_label_file(args.truth, _parse_label_column(args.truth_column))
    pred = _read_label_file(args.pred, _parse_label_column(args.pred_column))
    print(f"ARI={ari(truth, pred):.6f}")
    print(f"Rand={rand_index(truth, pred):.6f}")
    print(confusion(truth, pred).to_text())
    return 0


def build_parser():
    parser = _Parser(prog="tsubspace",
                     description="Robust subspace clustering with multivariate-t mixtures")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one model/G pair", parents=[], add_help=True)
    _add_common_fit_flags(p_fit)
    p_fit.add_argument("--model", required=True, help="five-letter model code")
    p_fit.add_argument("-G", required=True, help="number of components")
    p_fit.set_defaults(func=cmd_fit)

    p_grid = sub.add_parser("grid", help="model x G grid search ranked by BIC")
    _add_common_fit_flags(p_grid)
    p_grid.add_argument("--models", required=True, help="'all' or comma-separated codes")
    p_grid.add_argument("-G", required=True, help="component counts, e.g. 3 or 1..4 or 2,4")
    p_grid.add_argument("--jobs", type=int, default=1, help="concurrent grid cells")
    p_grid.add_argument("--timing", action="store_true",
                        help="include wall-clock seconds in output (not reproducible)")
    p_grid.set_defaults(func=cmd_grid)

    p_pred = sub.add_parser("predict", help="classify rows with a saved model")
    p_pred.add_argument("--model-file", required=True, help="model JSON from fit/grid")
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--labels", default=None, help="label column to ignore in the data")
    p_pred.add_argument("--no-header", action="store_true")
    p_pred.add_argument("--standardize", action="store_true")
    p_pred.add_argument("--out", default=None, help="labels CSV path")
    p_pred.set_defaults(func=cmd_predict)

    p_sim = sub.add_parser("simulate", help="generate synthetic heavy-tail datasets")
    p_sim.add_argument("--n-datasets", type=int, default=10)
    p_sim.add_argument("--n", type=int, default=500)
    p_sim.add_argument("--p", type=int, default=10)
    p_sim.add_argument("--nu", default="2,3", help="per-component degrees of freedom")
    p_sim.add_argument("--pi", default="0.5,0.5", help="mixing proportions")
    p_sim.add_argument("--sep", type=float, default=12.0, help="mean separation along axis 1")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="output path prefix")
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("evaluate", help="compare two label files")
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--truth-column", default=None)
    p_eval.add_argument("--pred-column", default=None)
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        raise SystemExit(0 if code == 0 else 1 if code is None else code)
    try:
        return args.func(args)
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TsubspaceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
