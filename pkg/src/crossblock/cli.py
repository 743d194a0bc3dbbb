"""Command-line interface.

Subcommands cover every pipeline: ``simulate`` (null | subspace), ``fit``
(full-sample analysis), ``permute``, ``bootstrap``, ``reproduce``
(train/test + split-half, optionally null-calibrated), ``sweep``
(detectability | fpr | reproducibility by sample size), ``pca``
(fit | scores | stability), and ``plot-data`` (plot-ready CSV extraction
from a report).

Options may come from a JSON config file (--config) mirroring the
experiment configuration; explicit flags override it, and the effective
configuration is echoed into every report. With a fixed --seed every run
writes byte-identical files.

Exit codes: 0 success, 2 input or validation error, 3 numerical failure,
4 I/O error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .datagen import SimulationSpec, generate_null, generate_relevant_subspace
from .decomposition import CCA, PLS
from .errors import (
    CrossBlockError,
    InfeasibleR2,
    MissingOmega,
    NotPositiveDefinite,
    ParseError,
    RankDeficient,
    ResamplingError,
)
from .harness import (
    ExperimentConfig,
    run_detectability,
    run_false_positive_sweep,
    run_full_sample,
    run_reproducibility_by_n,
)
from .inference import bootstrap_ci, permutation_test
from .io import (
    PLOT_KINDS,
    ReportDocument,
    bootstrap_section,
    emit_plot_data,
    full_sample_section,
    load_csv,
    pca_section,
    pca_stability_section,
    permutation_section,
    split_half_section,
    subsample_section,
    train_test_section,
    write_block_csv,
    write_matrix_csv,
    write_report,
)
from .parallel import default_threads
from .pca import component_scores, fit_pca, pca_stability
from .reproducibility import null_calibration, split_half, train_test

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_NUMERICAL_ERRORS = (RankDeficient, NotPositiveDefinite, MissingOmega, ResamplingError)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _groups(text: str) -> tuple[tuple[int, ...], ...]:
    """Parse '1,2;3,4,6' into ((1, 2), (3, 4, 6))."""
    return tuple(_int_list(group) for group in text.split(";") if group.strip())


def _add_common(parser):
    parser.add_argument("--config", help="JSON config file; flags override its keys")
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    parser.add_argument("--out-dir", default=None, help="output directory (default .)")
    parser.add_argument("--format", choices=("json", "csv"), default=None,
                        help="report format (default json)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads; never affects results")


def _add_analysis(parser, need_y=True):
    parser.add_argument("--x", required=True, help="X block CSV")
    if need_y:
        parser.add_argument("--y", required=True, help="Y block CSV")
    parser.add_argument("--method", choices=(PLS, CCA, "both"), default=None,
                        help="analysis method (default both)")


_DEFAULTS = {
    "seed": 0,
    "out_dir": ".",
    "format": "json",
    "threads": None,        # resolved via CROSSBLOCK_THREADS
    "method": "both",
    "permutations": 1000,
    "bootstraps": 1000,
    "splits": 500,
    "iterations": 500,
    "sample_sizes": (500, 250, 100, 50, 20),
    "alpha": 0.05,
    "pca_components": None,
}


def _resolve(args, key):
    """Flag > config file > default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    cfg = getattr(args, "_config_data", {})
    if key in cfg:
        value = cfg[key]
        if key == "sample_sizes" and isinstance(value, (list, tuple)):
            return tuple(int(v) for v in value)
        return value
    return _DEFAULTS.get(key)


def _effective(args, keys) -> dict:
    out = {k: _resolve(args, k) for k in keys}
    if out.get("threads") is None:
        out["threads"] = default_threads()
    return out


def _methods(method: str) -> tuple[str, ...]:
    return (PLS, CCA) if method == "both" else (method,)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossblock",
        description="Cross-block latent variable analysis (PLS and CCA) with "
                    "resampling significance, reliability, and reproducibility.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate synthetic datasets")
    sim_sub = sim.add_subparsers(dest="generator", required=True)
    null_p = sim_sub.add_parser("null", help="independent standard-normal blocks")
    null_p.add_argument("--n", type=int, default=10000)
    null_p.add_argument("--p", type=int, default=10)
    null_p.add_argument("--q", type=int, default=5)
    _add_common(null_p)
    sub_p = sim_sub.add_parser("subspace", help="relevant-subspace structured blocks")
    sub_p.add_argument("--n", type=int, default=10000)
    sub_p.add_argument("--p", type=int, default=50)
    sub_p.add_argument("--relevant-counts", type=_int_list, default=(15, 10),
                       help="designated predictors per component, e.g. 15,10")
    sub_p.add_argument("--relpos", type=_groups, default=((1, 2), (3, 4, 6)),
                       help="relevant X directions per component, e.g. '1,2;3,4,6'")
    sub_p.add_argument("--gamma", type=float, default=0.6)
    sub_p.add_argument("--m", type=int, default=4)
    sub_p.add_argument("--ypos", type=_groups, default=((1, 3), (2, 4)),
                       help="Y variable groups per component, e.g. '1,3;2,4'")
    sub_p.add_argument("--eta", type=float, default=0.0)
    sub_p.add_argument("--r2", type=_float_list, default=(0.2, 0.1))
    _add_common(sub_p)

    fit = sub.add_parser("fit", help="full-sample analysis")
    _add_analysis(fit)
    fit.add_argument("--permutations", type=int, default=None)
    fit.add_argument("--bootstraps", type=int, default=None)
    fit.add_argument("--splits", type=int, default=None)
    fit.add_argument("--pca-components", default=None,
                     help="pre-analysis X reduction: an int, a variance "
                          "fraction in (0,1), or 'auto' for the 98%% rule")
    _add_common(fit)

    perm = sub.add_parser("permute", help="permutation test of the singular values")
    _add_analysis(perm)
    perm.add_argument("--permutations", type=int, default=None)
    _add_common(perm)

    boot = sub.add_parser("bootstrap", help="bootstrap intervals for scaled weights")
    _add_analysis(boot)
    boot.add_argument("--bootstraps", type=int, default=None)
    _add_common(boot)

    rep = sub.add_parser("reproduce", help="train/test and split-half assessment")
    _add_analysis(rep)
    rep.add_argument("--splits", type=int, default=None)
    rep.add_argument("--null-calibrate", action="store_true",
                     help="also compute the permuted-Y null distributions")
    _add_common(rep)

    sweep = sub.add_parser("sweep", help="subsampling studies by sample size")
    sweep.add_argument("--kind", choices=("detectability", "fpr", "reproducibility"),
                       required=True)
    sweep.add_argument("--x", help="X block CSV (not needed for fpr)")
    sweep.add_argument("--y", help="Y block CSV (not needed for fpr)")
    sweep.add_argument("--method", choices=(PLS, CCA, "both"), default=None)
    sweep.add_argument("--sample-sizes", type=_int_list, default=None)
    sweep.add_argument("--iterations", type=int, default=None)
    sweep.add_argument("--permutations", type=int, default=None)
    sweep.add_argument("--splits", type=int, default=None)
    sweep.add_argument("--alpha", type=float, default=None)
    sweep.add_argument("--pca-components", default=None)
    sweep.add_argument("--fpr-n", type=int, default=10000)
    sweep.add_argument("--fpr-p", type=int, default=10)
    sweep.add_argument("--fpr-q", type=int, default=5)
    _add_common(sweep)

    pca = sub.add_parser("pca", help="principal components of one block")
    pca_sub = pca.add_subparsers(dest="task", required=True)
    pca_fit = pca_sub.add_parser("fit", help="eigenspectrum report")
    pca_fit.add_argument("--x", required=True)
    _add_common(pca_fit)
    pca_scores = pca_sub.add_parser("scores", help="write component scores as CSV")
    pca_scores.add_argument("--x", required=True)
    pca_scores.add_argument("--pca-components", default=None)
    pca_scores.add_argument("--scores-out", default=None, help="output CSV path")
    _add_common(pca_scores)
    pca_stab = pca_sub.add_parser("stability", help="component stability by sample size")
    pca_stab.add_argument("--x", required=True)
    pca_stab.add_argument("--sample-sizes", type=_int_list, default=None)
    pca_stab.add_argument("--iterations", type=int, default=None)
    pca_stab.add_argument("--pca-components", default=None,
                          help="number of components to track (default 2)")
    align = pca_stab.add_mutually_exclusive_group()
    align.add_argument("--align", dest="align", action="store_true", default=True)
    align.add_argument("--no-align", dest="align", action="store_false")
    _add_common(pca_stab)

    plot = sub.add_parser("plot-data", help="extract plot-ready CSV from a report")
    plot.add_argument("--report", required=True, help="report JSON file")
    plot.add_argument("--kind", choices=PLOT_KINDS, required=True)
    plot.add_argument("--out-dir", default=None)
    plot.add_argument("--config")
    return parser


def _load_config_file(args):
    data = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must contain a JSON object")
    args._config_data = data


def _pca_pre(raw):
    if raw is None:
        return None
    if raw == "auto":
        return 0.98
    value = float(raw)
    if value != int(value) or value < 1:
        if not 0 < value < 1:
            raise ValueError("--pca-components must be an int >= 1, a fraction "
                             "in (0,1), or 'auto'")
        return value
    return int(value)


def _emit(report: ReportDocument, eff: dict, stem: str) -> list[Path]:
    paths = write_report(report, eff["out_dir"], stem=stem, format=eff["format"])
    for p in paths:
        print(p)
    return paths


def _cmd_simulate(args) -> int:
    eff = _effective(args, ("seed", "out_dir", "format", "threads"))
    out_dir = Path(eff["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.generator == "null":
        dataset = generate_null(args.n, args.p, args.q, seed=eff["seed"])
        config = {"generator": "null", "n": args.n, "p": args.p, "q": args.q}
    else:
        spec = SimulationSpec(
            n=args.n, p=args.p, q_per_component=args.relevant_counts,
            relpos=args.relpos, gamma=args.gamma, m=args.m, ypos=args.ypos,
            eta=args.eta, r2=args.r2, seed=eff["seed"],
        )
        dataset = generate_relevant_subspace(spec)
        config = {
            "generator": "subspace", "n": spec.n, "p": spec.p,
            "q_per_component": spec.q_per_component, "relpos": spec.relpos,
            "gamma": spec.gamma, "m": spec.m, "ypos": spec.ypos,
            "eta": spec.eta, "r2": spec.r2,
        }
    x_path = write_block_csv(dataset.x, out_dir / "x.csv")
    y_path = write_block_csv(dataset.y, out_dir / "y.csv")
    print(x_path)
    print(y_path)
    truth = dataset.truth
    for name, matrix in (("cov_xx", truth.cov_xx), ("cov_xy", truth.cov_xy),
                         ("cov_yy", truth.cov_yy)):
        print(write_matrix_csv(matrix, out_dir / f"truth_{name}.csv"))
    report = ReportDocument.build(
        kind="simulate", seed=eff["seed"], config=config,
        sections={
            "truth": {
                "x_eigenvalues": truth.x_eigenvalues,
                "y_eigenvalues": truth.y_eigenvalues,
                "latent_cross_cov": truth.latent_cross_cov,
                "informative_y": truth.informative_y,
                "relevant_predictors": truth.relevant_predictors,
                "x_mixing": truth.x_mixing,
                "y_mixing": truth.y_mixing,
            }
        },
    )
    _emit(report, eff, "truth")
    return EXIT_OK


def _cmd_fit(args) -> int:
    eff = _effective(args, ("seed", "out_dir", "format", "threads", "method",
                            "permutations", "bootstraps", "splits", "pca_components"))
    x = load_csv(args.x)
    y = load_csv(args.y)
    config = ExperimentConfig(
        n_perm=eff["permutations"], n_boot=eff["bootstraps"], n_split=eff["splits"],
        methods=_methods(eff["method"]), pca_pre=_pca_pre(eff["pca_components"]),
        seed=eff["seed"], threads=eff["threads"],
    )
    result = run_full_sample(x, y, config)
    report = ReportDocument.build(
        kind="fit", seed=eff["seed"],
        config={k: eff[k] for k in ("method", "permutations", "bootstraps", "splits",
                                    "pca_components", "threads")},
        sections={"full_sample": full_sample_section(result)},
    )
    _emit(report, eff, "fit")
    return EXIT_OK


def _cmd_permute(args) -> int:
    eff = _effective(args, ("seed", "out_dir", "format", "threads", "method",
                            "permutations"))
    x = load_csv(args.x)
    y = load_csv(args.y)
    sections = {}
    for method in _methods(eff["method"]):
        res = permutation_test(x, y, method, n_perm=eff["permutations"], seed=eff["seed"])
        sections[f"permutation_{method}"] = permutation_section(res, include_draws=True)
    report = ReportDocument.build(
        kind="permute", seed=eff["seed"],
        config={"method": eff["method"], "permutations": eff["permutations"]},
        sections=sections,
    )
    _emit(report, eff, "permute")
    return EXIT_OK


def _cmd_bootstrap(args) -> int:
    eff = _effective(args, ("seed", "out_dir", "format", "threads", "method",
                            "bootstraps"))
    x = load_csv(args.x)
    y = load_csv(args.y)
    sections = {}
    for method in _methods(eff["method"]):
        res = bootstrap_ci(x, y, method, n_boot=eff["bootstraps"], seed=eff["seed"],
                           threads=eff["threads"])
        sections[f"bootstrap_{method}"] = bootstrap_section(res, x.labels, y.labels)
    report = ReportDocument.build(
        kind="bootstrap", seed=eff["seed"],
        config={"method": eff["method"], "bootstraps": eff["bootstraps"],
                "threads": eff["threads"]},
        sections=sections,
    )
    _emit(report, eff, "bootstrap")
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    eff = _effective(args, ("seed", "out_dir", "format", "threads", "method", "splits"))
    x = load_csv(args.x)
    y = load_csv(args.y)
    sections = {}
    for method in _methods(eff["method"]):
        tt = train_test(x, y, method, n_split=eff["splits"], seed=eff["seed"],
                        threads=eff["threads"])
        sh = split_half(x, y, method, n_split=eff["splits"], seed=eff["seed"],
                        threads=eff["threads"])
        body = {
            "train_test": train_test_section(tt),
            "split_half": split_half_section(sh),
        }
        if args.null_calibrate:
            ntt, nsh = null_calibration(x, y, method, n_split=eff["splits"],
                                        seed=eff["seed"], threads=eff["threads"])
            body["null_train_test"] = train_test_section(ntt)
            body["null_split_half"] = split_half_section(nsh)
        sections[f"reproducibility_{method}"] = body
    report = ReportDocument.build(
        kind="reproduce", seed=eff["seed"],
        config={"method": eff["method"], "splits": eff["splits"],
                "null_calibrate": bool(args.null_calibrate)},
        sections=sections,
    )
    _emit(report, eff, "reproduce")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    eff = _effective(args, ("seed", "out_dir", "format", "threads", "method",
                            "permutations", "splits", "iterations", "sample_sizes",
                            "alpha", "pca_components"))
    config = ExperimentConfig(
        sample_sizes=eff["sample_sizes"], n_iterations=eff["iterations"],
        n_perm=eff["permutations"], n_split=eff["splits"],
        methods=_methods(eff["method"]), pca_pre=_pca_pre(eff["pca_components"]),
        alpha=eff["alpha"], seed=eff["seed"], threads=eff["threads"],
    )
    if args.kind == "fpr":
        report_data = run_false_positive_sweep(config, n=args.fpr_n, p=args.fpr_p,
                                               q=args.fpr_q)
    else:
        if not args.x or not args.y:
            raise ValueError("--x and --y are required for this sweep kind")
        x = load_csv(args.x)
        y = load_csv(args.y)
        if args.kind == "detectability":
            report_data = run_detectability(x, y, config)
        else:
            report_data = run_reproducibility_by_n(x, y, config)
    report = ReportDocument.build(
        kind=f"sweep-{args.kind}", seed=eff["seed"],
        config={k: eff[k] for k in ("method", "permutations", "splits", "iterations",
                                    "sample_sizes", "alpha", "pca_components",
                                    "threads")},
        sections={"subsample": subsample_section(report_data)},
    )
    _emit(report, eff, f"sweep_{args.kind}")
    return EXIT_OK


def _cmd_pca(args) -> int:
    if args.task == "fit":
        eff = _effective(args, ("seed", "out_dir", "format", "threads"))
        x = load_csv(args.x)
        model = fit_pca(x)
        report = ReportDocument.build(
            kind="pca-fit", seed=eff["seed"], config={"x": str(args.x)},
            sections={"pca": pca_section(model)},
        )
        _emit(report, eff, "pca_fit")
        return EXIT_OK
    if args.task == "scores":
        eff = _effective(args, ("seed", "out_dir", "format", "threads",
                                "pca_components"))
        x = load_csv(args.x)
        model = fit_pca(x)
        pre = _pca_pre(eff["pca_components"])
        if pre is None or isinstance(pre, float):
            n_keep = model.n_kept if pre is None else int(
                np.searchsorted(model.variance_fraction, pre - 1e-12) + 1)
        else:
            n_keep = pre
        scores = component_scores(x, model, n_keep)
        out = Path(args.scores_out) if args.scores_out else Path(eff["out_dir"]) / "scores.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        print(write_block_csv(scores, out))
        return EXIT_OK
    eff = _effective(args, ("seed", "out_dir", "format", "threads", "sample_sizes",
                            "iterations", "pca_components"))
    x = load_csv(args.x)
    n_pc = eff["pca_components"]
    n_pc = 2 if n_pc is None else int(n_pc)
    result = pca_stability(
        x, sample_sizes=eff["sample_sizes"], n_iter=eff["iterations"], n_pc=n_pc,
        with_alignment=args.align, seed=eff["seed"], threads=eff["threads"],
    )
    report = ReportDocument.build(
        kind="pca-stability", seed=eff["seed"],
        config={"sample_sizes": eff["sample_sizes"], "iterations": eff["iterations"],
                "n_pc": n_pc, "align": bool(args.align)},
        sections={"pca_stability": pca_stability_section(result)},
    )
    _emit(report, eff, "pca_stability")
    return EXIT_OK


def _cmd_plot_data(args) -> int:
    out_dir = args.out_dir if args.out_dir is not None else "."
    report = ReportDocument.from_json(Path(args.report).read_text(encoding="utf-8"))
    for path in emit_plot_data(report, args.kind, out_dir):
        print(path)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "permute": _cmd_permute,
    "bootstrap": _cmd_bootstrap,
    "reproduce": _cmd_reproduce,
    "sweep": _cmd_sweep,
    "pca": _cmd_pca,
    "plot-data": _cmd_plot_data,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _load_config_file(args)
        return _COMMANDS[args.command](args)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParseError, InfeasibleR2, ValueError, CrossBlockError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
