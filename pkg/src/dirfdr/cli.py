"""Command-line interface: fit / precision / infer / two-sample / simulate.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
failure.  Every run echoes its resolved configuration (defaults and
seeds included) to standard error, so outputs are reproducible from
the log alone.  Output files are written atomically; a failing command
leaves no partial files behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data_io import load_dataset, read_numeric_csv, write_csv, write_matrix
from .exceptions import DataError, DirfdrError, DomainError, NumericalError
from .families import GlmFamily, neg_hessian
from .inference import (
    debias,
    fdv_select,
    gmt2_fdv_select,
    gmt2_select,
    gmt_select,
    two_sample_statistics,
)
from .lasso import cv_lasso, fit_lasso
from .precision import DEFAULT_CLIME_GRID, clime, cv_clime
from .rng import ROLE_CLIME_CV, ROLE_LASSO_CV, derive_seed
from .simulation import SimConfig, run_experiment

__all__ = ["CommandOutcome", "dispatch", "main"]

# Full-size study geometry selected by `simulate --full-scale`.
FULL_SCALE_OVERRIDES = dict(
    family="logistic", p=600, s0=50, signal_a=0.5,
    design_low=-1.0, design_high=1.0, alpha=0.2, trials=100, mode="fdr",
)


@dataclass(frozen=True)
class CommandOutcome:
    """Process exit code plus the diagnostic lines that were emitted."""

    exit_code: int
    messages: tuple[str, ...] = ()


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dirfdr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p, suffix=""):
        p.add_argument(f"--design{suffix}", required=True)
        p.add_argument(f"--response{suffix}")
        p.add_argument(f"--response-col{suffix}")

    def add_mode_flags(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--alpha", type=float, help="target FDR level")
        group.add_argument("--fdv", type=float, help="tolerated wrong-sign count")
        group.add_argument("--fwer", type=float, help="family-wise error level")

    fit = sub.add_parser("fit", help="penalized GLM fit")
    add_data_flags(fit)
    fit.add_argument("--family", required=True)
    fit.add_argument("--lambda", dest="lam", type=float)
    fit.add_argument("--cv-folds", type=int, default=5)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True)

    prec = sub.add_parser("precision", help="inverse-curvature estimate")
    add_data_flags(prec)
    prec.add_argument("--family", required=True)
    prec.add_argument("--beta", required=True, help="fit.csv from `dirfdr fit`")
    prec.add_argument("--lambda-n", dest="lambda_n", type=float)
    prec.add_argument("--cv", action="store_true")
    prec.add_argument("--seed", type=int, default=0)
    prec.add_argument("--out", required=True)

    infer = sub.add_parser("infer", help="debiased fit and selection")
    add_data_flags(infer)
    infer.add_argument("--family", required=True)
    add_mode_flags(infer)
    infer.add_argument("--seed", type=int, default=0)
    infer.add_argument("--out", required=True)

    two = sub.add_parser("two-sample", help="two-model difference selection")
    add_data_flags(two, "1")
    add_data_flags(two, "2")
    two.add_argument("--family", required=True)
    add_mode_flags(two)
    two.add_argument("--seed", type=int, default=0)
    two.add_argument("--out", required=True)

    sim = sub.add_parser("simulate", help="Monte-Carlo experiment")
    sim.add_argument("--config", required=True, help="JSON file mirroring SimConfig")
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--full-scale", action="store_true",
                     help="switch to the full-size logistic study geometry")
    sim.add_argument("--out-dir", required=True)
    return parser


def _load(args, suffix=""):
    design = getattr(args, f"design{suffix}")
    response = getattr(args, f"response{suffix}")
    column = getattr(args, f"response_col{suffix}")
    if (response is None) == (column is None):
        raise _UsageError(
            f"give exactly one of --response{suffix} / --response-col{suffix}"
        )
    family = GlmFamily.from_name(args.family)
    data = load_dataset(design, response, response_col=column, family=family)
    return data, family


def _read_beta(path, p):
    mat, _ = read_numeric_csv(path)
    if mat.shape[1] == 1:
        beta = mat[:, 0]
    elif mat.shape[1] == 2:
        beta = mat[np.argsort(mat[:, 0]), 1]
    else:
        raise DataError(f"{path}: expected 1 or 2 columns, got {mat.shape[1]}")
    if beta.shape[0] != p:
        raise DataError(f"{path}: {beta.shape[0]} coefficients for p={p} design")
    return beta


def _selection_mode(args):
    if args.alpha is not None:
        return "fdr", args.alpha
    if args.fdv is not None:
        return "fdv", args.fdv
    return "fwer", args.fwer


def _echo_config(args, log):
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    log(f"dirfdr {args.command} resolved config: "
        + json.dumps(resolved, default=str, sort_keys=True))


def _run_fit(args, log):
    data, family = _load(args)
    if args.lam is not None:
        fit = fit_lasso(data, family, args.lam)
        log(f"fit at lambda={args.lam:g}: kkt={fit.kkt_violation:.3g} "
            f"converged={fit.converged}")
    else:
        cv, fit = cv_lasso(data, family, folds=args.cv_folds, seed=args.seed)
        log(f"cross-validation selected lambda={cv.selected_lambda:.6g}")
    write_csv(args.out, ["index", "beta_hat"], list(enumerate(fit.beta_hat)))


def _run_precision(args, log):
    if (args.lambda_n is None) == (not args.cv):
        raise _UsageError("give exactly one of --lambda-n / --cv")
    data, family = _load(args)
    beta = _read_beta(args.beta, data.p)
    if args.cv:
        lam_n, est = cv_clime(data, family, beta, DEFAULT_CLIME_GRID,
                              seed=derive_seed(args.seed, 0, ROLE_CLIME_CV))
        log(f"cross-validation selected lambda_n={lam_n:.6g}")
    else:
        est = clime(neg_hessian(data, beta, family), args.lambda_n)
    log(f"max constraint violation: {est.max_constraint_violation:.3g}")
    write_matrix(args.out, est.theta_hat)


def _pipeline(data, family, seed, trial):
    _, fit = cv_lasso(data, family, seed=derive_seed(seed, trial, ROLE_LASSO_CV))
    _, theta = cv_clime(data, family, fit.beta_hat, DEFAULT_CLIME_GRID,
                        seed=derive_seed(seed, trial, ROLE_CLIME_CV))
    return fit, debias(fit, theta, data, family)


def _run_infer(args, log):
    data, family = _load(args)
    mode, level = _selection_mode(args)
    fit, debiased = _pipeline(data, family, args.seed, 0)
    sel = gmt_select(debiased, level) if mode == "fdr" else fdv_select(debiased, level)
    log(f"threshold={sel.threshold:.6g} fallback={sel.fallback_used} "
        f"rejections={sel.selected.size}")
    chosen = set(int(j) for j in sel.selected)
    rows = []
    for j in range(data.p):
        in_sel = j in chosen
        rows.append([
            j, fit.beta_hat[j], debiased.beta_debiased[j], debiased.theta_diag[j],
            debiased.statistics[j], 1 if in_sel else 0,
            f"{sel.signs[j]:+d}" if in_sel else "",
        ])
    write_csv(args.out, ["index", "beta_hat", "beta_debiased", "theta_jj",
                         "statistic", "selected", "sign"], rows)


def _run_two_sample(args, log):
    data1, family = _load(args, "1")
    data2, family2 = _load(args, "2")
    if family is not family2:
        raise _UsageError("both samples use the same --family")
    mode, level = _selection_mode(args)
    _, deb1 = _pipeline(data1, family, args.seed, 0)
    _, deb2 = _pipeline(data2, family, args.seed, 1)
    m = two_sample_statistics(deb1, deb2)
    sel = gmt2_select(m, level) if mode == "fdr" else gmt2_fdv_select(m, level)
    log(f"threshold={sel.threshold:.6g} fallback={sel.fallback_used} "
        f"rejections={sel.selected.size}")
    chosen = set(int(j) for j in sel.selected)
    rows = []
    for j in range(data1.p):
        in_sel = j in chosen
        rows.append([
            j, deb1.beta_debiased[j], deb2.beta_debiased[j],
            deb1.theta_diag[j], deb2.theta_diag[j], m.m_statistics[j],
            1 if in_sel else 0, f"{sel.signs[j]:+d}" if in_sel else "",
        ])
    write_csv(args.out, ["index", "beta_debiased_1", "beta_debiased_2",
                         "theta_jj_1", "theta_jj_2", "m_statistic",
                         "selected", "sign"], rows)


def load_sim_config(path, full_scale: bool = False) -> SimConfig:
    """Parse a JSON experiment config, optionally at full-size geometry."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such config file: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})")
    if not isinstance(raw, dict):
        raise DataError(f"{path}: config must be a JSON object")
    if full_scale:
        raw.update(FULL_SCALE_OVERRIDES)
    try:
        family = GlmFamily.from_name(raw.pop("family"))
        return SimConfig(family=family, **{
            k: tuple(v) if k == "clime_grid" else v for k, v in raw.items()
        })
    except (KeyError, TypeError) as exc:
        raise DataError(f"{path}: bad config ({exc})")


def _run_simulate(args, log):
    config = load_sim_config(args.config, args.full_scale)
    if args.full_scale:
        log("full-scale geometry enabled; expect hours-long runs")
    log(f"simulate resolved: {config}")
    summary = run_experiment(config, jobs=args.jobs, out_dir=args.out_dir)
    log(f"mean_fdr_d={summary.mean_fdr_d:.4f} (se {summary.se_fdr_d:.4f}) "
        f"mean_power_d={summary.mean_power_d:.4f} "
        f"mean_fdv={summary.mean_fdv:.4f} "
        f"trials={summary.trials_completed}")


_RUNNERS = {
    "fit": _run_fit,
    "precision": _run_precision,
    "infer": _run_infer,
    "two-sample": _run_two_sample,
    "simulate": _run_simulate,
}


def dispatch(argv) -> CommandOutcome:
    """Parse argv, run the subcommand, and map failures to exit codes."""
    messages: list[str] = []

    def log(msg: str) -> None:
        messages.append(msg)
        print(msg, file=sys.stderr)

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        log(f"usage error: {exc}")
        return CommandOutcome(1, tuple(messages))
    except SystemExit as exc:  # --help exits 0 through here
        return CommandOutcome(int(exc.code or 0), tuple(messages))

    _echo_config(args, log)
    try:
        _RUNNERS[args.command](args, log)
    except _UsageError as exc:
        log(f"usage error: {exc}")
        return CommandOutcome(1, tuple(messages))
    except DomainError as exc:
        log(f"usage error: {exc}")
        return CommandOutcome(1, tuple(messages))
    except DataError as exc:
        log(f"data error: {exc}")
        return CommandOutcome(2, tuple(messages))
    except NumericalError as exc:
        log(f"numerical failure: {exc}")
        return CommandOutcome(3, tuple(messages))
    except DirfdrError as exc:
        log(f"error: {exc}")
        return CommandOutcome(3, tuple(messages))
    return CommandOutcome(0, tuple(messages))


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]).exit_code)


if __name__ == "__main__":
    main()
