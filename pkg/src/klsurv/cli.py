"""Command-line interface: fit, predict, simulate, validate.

Exit codes: 0 success, 2 input/validation error, 3 non-convergence
(the model file is still written, flagged), 4 study failure (partial
results preserved).  Every command writes a manifest beside its outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import DataFileError, KlsurvError
from .fitting import FitOptions, evaluate, fit_kl, fit_local, predict_hazard, predict_survival
from .io import (
    load_model_or_prior,
    read_covariates_csv,
    read_dataset_csv,
    read_model_json,
    read_prior_json,
    scenario_from_dict,
    scenario_to_dict,
    write_cv_curve_csv,
    write_manifest,
    write_model_json,
    write_study_tables,
)
from .links import LINK_KINDS, get_link
from .simulate import SETTINGS, ScenarioConfig, run_study
from .tuning import CvConfig, cv_select_lambda

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NONCONVERGED = 3
EXIT_STUDY = 4

JOBS_ENV_VAR = "KLSURV_JOBS"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized steps")


def _parse_cv_spec(spec: str, default_seed: int) -> CvConfig:
    """Parse the --cv value, e.g. '' or 'folds=5' or 'folds=5,seed=3'."""
    kwargs: dict[str, int] = {"folds": 5, "seed": default_seed}
    if spec:
        for item in spec.split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in ("folds", "seed"):
                raise DataFileError(f"bad --cv option {item!r}; use folds=K[,seed=S]")
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise DataFileError(f"bad --cv value {item!r}: expected an integer") from None
    return CvConfig(folds=kwargs["folds"], seed=kwargs["seed"])


def cmd_fit(args: argparse.Namespace) -> int:
    link = get_link(args.link)
    data = read_dataset_csv(args.data, tau=args.tau)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    opts = FitOptions(max_iter=args.max_iter)
    inputs = [args.data]
    cv_requested = args.cv is not None
    best_lambda = None
    if args.prior:
        prior = read_prior_json(args.prior)
        inputs.append(args.prior)
        if not cv_requested and args.lam is None:
            print("error: --prior requires --lambda or --cv", file=sys.stderr)
            return EXIT_INPUT
        if cv_requested:
            cv_cfg = _parse_cv_spec(args.cv, args.seed)
            cv_res = cv_select_lambda(data, prior, link, cv_cfg, opts)
            write_cv_curve_csv(out / "cv_curve.csv", cv_res)
            best_lambda = cv_res.best_lambda
            lam = best_lambda
        else:
            lam = float(args.lam)
        model = fit_kl(data, prior, lam, link, opts)
    else:
        if args.lam is not None or cv_requested:
            print("error: --lambda and --cv require --prior", file=sys.stderr)
            return EXIT_INPUT
        model = fit_local(data, link, opts)
    write_model_json(out / "model.json", model)
    report = {
        "link": model.link.kind,
        "tau": int(model.tau),
        "n_subjects": len(data),
        "n_events": data.n_events,
        "lambda_used": float(model.lambda_used),
        "cv_best_lambda": best_lambda,
        "final_objective": float(model.final_objective),
        "n_iter": int(model.n_iter),
        "converged": bool(model.converged),
    }
    with (out / "fit_report.json").open("w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    config = {
        "data": str(args.data),
        "link": args.link,
        "tau": args.tau,
        "prior": str(args.prior) if args.prior else None,
        "lambda": None if args.lam is None else float(args.lam),
        "cv": args.cv,
        "max_iter": args.max_iter,
    }
    write_manifest(out, "fit", config, args.seed, inputs)
    status = "converged" if model.converged else "NOT converged"
    print(
        f"fit: wrote {out / 'model.json'} "
        f"(objective {model.final_objective:.6f}, {model.n_iter} iterations, {status})"
    )
    return EXIT_OK if model.converged else EXIT_NONCONVERGED


def cmd_predict(args: argparse.Namespace) -> int:
    model = read_model_json(args.model)
    ids, X = read_covariates_csv(args.data, model.schema)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / "predictions.csv"
    with target.open("w", newline="") as fh:
        fh.write("id,period,hazard,survival\n")
        for sid, x in zip(ids, X):
            hazard = predict_hazard(model, x)
            survival = predict_survival(model, x)
            for k in range(model.tau):
                fh.write(f"{sid},{k + 1},{float(hazard[k])!r},{float(survival[k])!r}\n")
    write_manifest(
        out,
        "predict",
        {"model": str(args.model), "data": str(args.data)},
        args.seed,
        [args.model, args.data],
    )
    print(f"predict: wrote {target} ({len(ids)} subjects x {model.tau} periods)")
    return EXIT_OK


def _scenario_from_args(args: argparse.Namespace) -> ScenarioConfig:
    if args.config:
        with Path(args.config).open() as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataFileError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise DataFileError(f"{args.config}: expected a JSON object")
        doc.setdefault("seed", args.seed)
        if args.replications is not None:
            doc["replications"] = args.replications
        elif args.fast:
            doc["replications"] = 20
        return scenario_from_dict(doc, source=str(args.config))
    if args.setting is None:
        raise DataFileError("simulate needs --setting or --config")
    replications = args.replications
    if replications is None:
        replications = 20 if args.fast else 100
    kwargs = dict(
        setting=args.setting,
        n_local=args.n_local,
        n_validation=args.n_validation,
        replications=replications,
        seed=args.seed,
    )
    if args.tau is not None:
        kwargs["tau"] = args.tau
    return ScenarioConfig(**kwargs)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _scenario_from_args(args)
    jobs = args.jobs if args.jobs is not None else int(os.environ.get(JOBS_ENV_VAR, "1"))
    result = run_study(cfg, jobs=max(1, jobs))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = write_study_tables(out, result)
    inputs = [args.config] if args.config else []
    write_manifest(out, "simulate", scenario_to_dict(cfg), cfg.seed, inputs)
    summary = result.summary()
    print(f"simulate: setting {cfg.setting}, {cfg.replications} replicates -> {out}")
    for arm in ("kl", "prior", "local"):
        print(f"  mean validation loglik [{arm}]: {summary[f'mean_loglik_{arm}']:.3f}")
    print(f"  median selected lambda: {summary['lambda_median']:.4g}")
    failed = [r.replicate for r in result.records if r.error is not None]
    if failed:
        print(f"  FAILED replicates: {failed} (see {paths['replicates']})", file=sys.stderr)
        return EXIT_STUDY
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    data = read_dataset_csv(args.data, tau=args.tau)
    rows = []
    for model_path in args.model:
        model = load_model_or_prior(model_path)
        rows.append((Path(model_path).name, evaluate(model, data)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / "validation.csv"
    with target.open("w", newline="") as fh:
        fh.write("model,loglik\n")
        for name, value in rows:
            fh.write(f"{name},{float(value)!r}\n")
    write_manifest(
        out,
        "validate",
        {"models": [str(m) for m in args.model], "data": str(args.data), "tau": args.tau},
        args.seed,
        list(args.model) + [args.data],
    )
    width = max(len(name) for name, _ in rows)
    print(f"{'model'.ljust(width)}  loglik")
    for name, value in rows:
        print(f"{name.ljust(width)}  {value:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klsurv",
        description="Discrete-time survival fitting with weighted integration of prior models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a local or prior-weighted model")
    p_fit.add_argument("--data", required=True, help="subject CSV (id,time,event,covariates...)")
    p_fit.add_argument("--link", choices=LINK_KINDS, default="logit")
    p_fit.add_argument("--tau", type=int, default=None, help="horizon (default: max time in data)")
    p_fit.add_argument("--prior", default=None, help="prior model JSON file")
    p_fit.add_argument("--lambda", dest="lam", type=float, default=None, help="prior weight")
    p_fit.add_argument(
        "--cv",
        nargs="?",
        const="",
        default=None,
        metavar="folds=K[,seed=S]",
        help="select the prior weight by cross-validation",
    )
    p_fit.add_argument("--max-iter", type=int, default=100)
    _add_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="hazard and survival curves per subject")
    p_pred.add_argument("--model", required=True, help="fitted-model JSON file")
    p_pred.add_argument("--data", required=True, help="covariate CSV (id + covariates)")
    _add_common(p_pred)
    p_pred.set_defaults(func=cmd_predict)

    p_sim = sub.add_parser("simulate", help="run the replication study for one setting")
    p_sim.add_argument("--setting", choices=SETTINGS, default=None)
    p_sim.add_argument("--config", default=None, help="scenario config JSON file")
    p_sim.add_argument("--replications", type=int, default=None)
    p_sim.add_argument("--fast", action="store_true", help="20 replicates instead of 100")
    p_sim.add_argument("--n-local", type=int, default=300)
    p_sim.add_argument("--n-validation", type=int, default=1000)
    p_sim.add_argument("--tau", type=int, default=None)
    p_sim.add_argument(
        "--jobs",
        type=int,
        default=None,
        help=f"parallel replicate workers (default: ${JOBS_ENV_VAR} or 1); never changes results",
    )
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser("validate", help="score model files on a dataset")
    p_val.add_argument("--model", nargs="+", required=True, help="model or prior JSON files")
    p_val.add_argument("--data", required=True, help="subject CSV to score on")
    p_val.add_argument("--tau", type=int, default=None)
    _add_common(p_val)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (KlsurvError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
