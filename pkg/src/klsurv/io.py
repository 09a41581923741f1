"""File formats: data CSV, prior and fitted-model JSON, manifests, study tables.

All writers emit deterministic bytes for identical inputs, with one
exception: the run manifest carries a wall-clock timestamp.  Floats are
written with shortest round-trip precision so a write/read cycle
reproduces them exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ._version import __version__
from .data import CovariateSchema, SurvivalDataset
from .errors import DataFileError
from .fitting import FittedModel
from .likelihood import ParamVector
from .links import LINK_KINDS, get_link
from .prior import PriorModel
from .simulate import ScenarioConfig, StudyResult
from .tuning import CvResult

FORMAT_VERSION = 1
_DATA_COLUMNS = ("id", "time", "event")


def _parse_int(text: str, line: int, column: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise DataFileError(f"expected an integer, got {text!r}", line=line, column=column) from None


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise DataFileError(f"expected a number, got {text!r}", line=line, column=column) from None
    if not np.isfinite(value):
        raise DataFileError(f"non-finite value {text!r}", line=line, column=column)
    return value


def _parse_event(text: str, line: int) -> bool:
    value = text.strip()
    if value not in ("0", "1"):
        raise DataFileError(f"event must be 0 or 1, got {text!r}", line=line, column="event")
    return value == "1"


def read_dataset_csv(path, tau: int | None = None) -> SurvivalDataset:
    """Load subject records from CSV: columns id, time, event, then covariates.

    Rejects non-finite values, duplicate ids and times outside ``1..tau``
    (``tau`` defaults to the largest time present) with line diagnostics.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFileError(f"{path}: file is empty", line=1) from None
        if tuple(header[:3]) != _DATA_COLUMNS:
            raise DataFileError(
                f"{path}: header must start with id,time,event; got {header[:3]}", line=1
            )
        cov_names = header[3:]
        ids: list[str] = []
        times: list[int] = []
        events: list[bool] = []
        rows: list[list[float]] = []
        lines: list[int] = []
        seen: dict[str, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFileError(
                    f"{path}: expected {len(header)} fields, got {len(row)}", line=lineno
                )
            sid = row[0].strip()
            if sid in seen:
                raise DataFileError(
                    f"{path}: duplicate subject id {sid!r} (first on line {seen[sid]})",
                    line=lineno,
                    column="id",
                )
            seen[sid] = lineno
            ids.append(sid)
            times.append(_parse_int(row[1], lineno, "time"))
            events.append(_parse_event(row[2], lineno))
            rows.append([_parse_float(v, lineno, name) for v, name in zip(row[3:], cov_names)])
            lines.append(lineno)
    if not ids:
        raise DataFileError(f"{path}: no data rows", line=2)
    horizon = int(tau) if tau is not None else max(times)
    for t, lineno in zip(times, lines):
        if not 1 <= t <= horizon:
            raise DataFileError(
                f"{path}: time {t} outside 1..{horizon}", line=lineno, column="time"
            )
    X = np.asarray(rows, dtype=float).reshape(len(ids), len(cov_names))
    return SurvivalDataset.from_arrays(times, events, X, names=cov_names, ids=ids, tau=horizon)


def write_dataset_csv(path, data: SurvivalDataset) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(_DATA_COLUMNS) + list(data.schema.names))
        for rec in data.subjects:
            writer.writerow(
                [rec.id, rec.observed_time, int(rec.event)]
                + [repr(float(v)) for v in rec.covariates]
            )


def read_covariates_csv(path, schema: CovariateSchema) -> tuple[list[str], np.ndarray]:
    """Covariate rows for prediction; requires an id column plus every schema name."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFileError(f"{path}: file is empty", line=1) from None
        if "id" not in header:
            raise DataFileError(f"{path}: missing covariate column 'id'", line=1, column="id")
        for name in schema.names:
            if name not in header:
                raise DataFileError(
                    f"{path}: missing covariate column {name!r}", line=1, column=name
                )
        id_pos = header.index("id")
        positions = [header.index(name) for name in schema.names]
        ids: list[str] = []
        rows: list[list[float]] = []
        seen: dict[str, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFileError(
                    f"{path}: expected {len(header)} fields, got {len(row)}", line=lineno
                )
            sid = row[id_pos].strip()
            if sid in seen:
                raise DataFileError(
                    f"{path}: duplicate subject id {sid!r}", line=lineno, column="id"
                )
            seen[sid] = lineno
            ids.append(sid)
            rows.append(
                [_parse_float(row[j], lineno, name) for j, name in zip(positions, schema.names)]
            )
    if not ids:
        raise DataFileError(f"{path}: no data rows", line=2)
    return ids, np.asarray(rows, dtype=float).reshape(len(ids), schema.p)


def _dump_json(path, doc: dict) -> None:
    path = Path(path)
    with path.open("w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path) -> dict:
    path = Path(path)
    try:
        with path.open() as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFileError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise DataFileError(f"{path}: expected a JSON object at top level")
    return doc


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise DataFileError(f"{path}: missing mandatory field {key!r}")
    return doc[key]


def _read_link(doc: dict, path):
    kind = str(_require(doc, "link", path))
    if kind not in LINK_KINDS:
        raise DataFileError(f"{path}: unknown link {kind!r}")
    return get_link(kind)


def _read_eta(doc: dict, tau: int, path) -> np.ndarray:
    eta = np.asarray(_require(doc, "eta", path), dtype=float)
    if eta.shape != (tau,):
        raise DataFileError(f"{path}: eta must list exactly tau={tau} values")
    if not np.all(np.isfinite(eta)):
        raise DataFileError(f"{path}: eta has non-finite entries")
    return eta


def write_prior_json(path, prior: PriorModel) -> None:
    doc = {
        "version": FORMAT_VERSION,
        "label": prior.label,
        "link": prior.link.kind,
        "tau": int(prior.tau),
        "eta": [float(v) for v in prior.eta_hat],
        "coefficients": {name: float(v) for name, v in prior.coefficients.items()},
    }
    _dump_json(path, doc)


def read_prior_json(path) -> PriorModel:
    path = Path(path)
    doc = _load_json(path)
    _require(doc, "version", path)
    tau = int(_require(doc, "tau", path))
    link = _read_link(doc, path)
    eta = _read_eta(doc, tau, path)
    raw = _require(doc, "coefficients", path)
    if not isinstance(raw, dict):
        raise DataFileError(f"{path}: coefficients must be a name->value map")
    try:
        coef = {str(k): float(v) for k, v in raw.items()}
    except (TypeError, ValueError):
        raise DataFileError(f"{path}: coefficients must be numeric") from None
    try:
        return PriorModel(link, tau, eta, coef, label=str(doc.get("label", "")))
    except ValueError as exc:
        raise DataFileError(f"{path}: {exc}") from None


def write_model_json(path, model: FittedModel) -> None:
    doc = {
        "version": FORMAT_VERSION,
        "link": model.link.kind,
        "tau": int(model.tau),
        "eta": [float(v) for v in model.params.eta],
        "beta": {name: float(v) for name, v in zip(model.schema.names, model.params.beta)},
        "lambda_used": float(model.lambda_used),
        "convergence": {
            "converged": bool(model.converged),
            "n_iter": int(model.n_iter),
            "final_objective": float(model.final_objective),
        },
    }
    if not model.estimable.all():
        doc["unestimable_periods"] = (np.flatnonzero(~model.estimable) + 1).tolist()
    _dump_json(path, doc)


def read_model_json(path) -> FittedModel:
    path = Path(path)
    doc = _load_json(path)
    _require(doc, "version", path)
    if "beta" not in doc:
        raise DataFileError(f"{path}: not a fitted-model file (no 'beta' field)")
    tau = int(_require(doc, "tau", path))
    link = _read_link(doc, path)
    eta = _read_eta(doc, tau, path)
    beta_map = doc["beta"]
    if not isinstance(beta_map, dict):
        raise DataFileError(f"{path}: beta must be a name->value map")
    schema = CovariateSchema(tuple(str(k) for k in beta_map))
    beta = np.array([float(v) for v in beta_map.values()], dtype=float)
    conv = _require(doc, "convergence", path)
    estimable = np.ones(tau, dtype=bool)
    for k in doc.get("unestimable_periods", []):
        k = int(k)
        if not 1 <= k <= tau:
            raise DataFileError(f"{path}: unestimable period {k} outside 1..{tau}")
        estimable[k - 1] = False
    return FittedModel(
        params=ParamVector(eta, beta),
        link=link,
        schema=schema,
        tau=tau,
        converged=bool(conv.get("converged", False)),
        n_iter=int(conv.get("n_iter", 0)),
        final_objective=float(conv.get("final_objective", float("nan"))),
        lambda_used=float(_require(doc, "lambda_used", path)),
        estimable=estimable,
    )


def load_model_or_prior(path):
    """Sniff a JSON file: 'beta' marks a fitted model, 'coefficients' a prior."""
    doc = _load_json(path)
    if "beta" in doc:
        return read_model_json(path)
    if "coefficients" in doc:
        return read_prior_json(path)
    raise DataFileError(f"{path}: neither a fitted-model nor a prior-model file")


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, command: str, config: dict, seed, inputs=()) -> Path:
    """Sidecar manifest making each command's outputs auditable."""
    out_dir = Path(out_dir)
    doc = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "input_digests": {str(p): file_digest(p) for p in inputs},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    target = out_dir / "manifest.json"
    _dump_json(target, doc)
    return target


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "setting": cfg.setting,
        "beta0": [float(v) for v in cfg.beta0],
        "n_local": int(cfg.n_local),
        "n_validation": int(cfg.n_validation),
        "tau": int(cfg.tau),
        "eta": [float(v) for v in cfg.eta],
        "rho": float(cfg.rho),
        "censor_max": int(cfg.censor_max),
        "admin_censor": int(cfg.admin_censor),
        "replications": int(cfg.replications),
        "seed": int(cfg.seed),
    }


def scenario_from_dict(doc: dict, source="config") -> ScenarioConfig:
    known = set(scenario_to_dict(ScenarioConfig()))
    extra = sorted(set(doc) - known)
    if extra:
        raise DataFileError(f"{source}: unknown scenario fields {extra}")
    kwargs = dict(doc)
    for key in ("beta0", "eta"):
        if key in kwargs and kwargs[key] is not None:
            kwargs[key] = np.asarray(kwargs[key], dtype=float)
    try:
        return ScenarioConfig(**kwargs)
    except ValueError as exc:
        raise DataFileError(f"{source}: {exc}") from None


def write_cv_curve_csv(path, result: CvResult) -> None:
    folds = result.fold_heldout.shape[1]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "mean_heldout_loglik"] + [f"fold_{k}" for k in range(folds)])
        for lam, mean, row in zip(result.lambdas, result.mean_heldout, result.fold_heldout):
            writer.writerow([repr(float(lam)), repr(float(mean))] + [repr(float(v)) for v in row])


def write_study_tables(out_dir, result: StudyResult) -> dict[str, Path]:
    """Per-replicate table, summary table, and the two plot-data files."""
    out_dir = Path(out_dir)
    paths = {
        "replicates": out_dir / "replicates.csv",
        "summary": out_dir / "summary.csv",
        "plot_validation": out_dir / "plot_validation.csv",
        "plot_lambda": out_dir / "plot_lambda.csv",
    }
    with paths["replicates"].open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["replicate", "arm", "validation_loglik", "selected_lambda", "converged", "error"]
        )
        for rec in result.records:
            for arm in sorted(rec.val_loglik) if rec.val_loglik else []:
                writer.writerow(
                    [
                        rec.replicate,
                        arm,
                        repr(float(rec.val_loglik[arm])),
                        repr(float(rec.selected_lambda)),
                        int(rec.converged.get(arm, False)),
                        rec.error or "",
                    ]
                )
    with paths["summary"].open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "value"])
        for key, value in result.summary().items():
            writer.writerow([key, repr(float(value)) if isinstance(value, float) else value])
    with paths["plot_validation"].open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replicate", "arm", "validation_loglik"])
        for rec in result.ok_records():
            for arm in sorted(rec.val_loglik):
                writer.writerow([rec.replicate, arm, repr(float(rec.val_loglik[arm]))])
    with paths["plot_lambda"].open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replicate", "selected_lambda"])
        for rec in result.ok_records():
            writer.writerow([rec.replicate, repr(float(rec.selected_lambda))])
    return paths
