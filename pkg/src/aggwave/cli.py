"""Command-line front end.

Subcommands: ``testfuncs``, ``simulate``, ``estimate``, ``rulecurve`` and
``replay``. Every run writes a JSON manifest next to its outputs holding the
fully resolved configuration; ``replay`` re-executes a manifest.

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or validation
error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, testfuncs
from .dwt import DEFAULT_J0
from .errors import AggwaveError, RankError
from .shrinkage import DEFAULT_TAU, ShrinkageParams, shrink_vector
from .sim import (
    SCALINGS,
    STUDIES,
    ReplicateError,
    StudyConfig,
    run_table,
    study_config,
    table_rows,
)
from .unmix import AggregatedData, EstimatorConfig, MixingMatrix, estimate_components

log = logging.getLogger("aggwave")

WEIGHT_SCALES = {"percent": 100.0, "fraction": 1.0}


class UsageError(AggwaveError):
    """Invalid command-line input; maps to exit code 2."""


# --------------------------------------------------------------------------
# I/O helpers
# --------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_numeric_csv(path: Path) -> np.ndarray:
    """Numeric matrix from a CSV file; a non-numeric first row is taken as a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise UsageError(f"{path} is empty")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        out = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric entry ({exc})") from exc
    if out.ndim != 2:
        raise UsageError(f"{path}: rows have unequal lengths")
    return out


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path: Path, subcommand: str, config: dict, inputs, outputs, extra=None):
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "inputs": {str(p): sha256(p) for p in inputs},
        "seed": config.get("seed"),
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_config_file(path: Path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_testfuncs(cfg: dict) -> dict:
    tags = [testfuncs.normalize_tag(t) for t in cfg["tags"]]
    M = int(cfg["m"])
    if M < 2 or M & (M - 1):
        raise UsageError(f"M must be a power of two >= 2, got {M}")
    t = testfuncs.grid(M)
    cols = [testfuncs.evaluate(tag, t) for tag in tags]
    out = Path(cfg["out"])
    write_csv(out, ["t"] + tags, zip(t, *cols))
    return {"outputs": [out], "inputs": []}


def _estimator_from(cfg: dict) -> EstimatorConfig:
    p = None if cfg.get("p") in (None, "level") else float(cfg["p"])
    return EstimatorConfig(
        filter_n=int(cfg["filter_n"]), J0=int(cfg["j0"]), tau=float(cfg["tau"]), p=p
    )


def cmd_simulate(cfg: dict) -> dict:
    study = int(cfg["study"])
    if study not in STUDIES:
        raise UsageError(f"unknown study {study}; choose from {sorted(STUDIES)}")
    est = _estimator_from(cfg)
    Ms = [int(m) for m in cfg["m"]]
    snrs = [float(s) for s in cfg["snr"]]
    base = study_config(
        study,
        M=Ms[0],
        I=int(cfg["samples"]),
        snr=snrs[0],
        replicates=int(cfg["replicates"]),
        seed=int(cfg["seed"]),
        filter_n=est.filter_n,
        J0=est.J0,
        tau=est.tau,
        p=est.p,
        spline_order=int(cfg["spline_order"]),
        spline_knots=int(cfg["spline_knots"]),
        scaling=str(cfg["scaling"]),
    )
    for m in Ms:  # validate every scenario before any work
        StudyConfig(**{**base.__dict__, "M": m})
    results = run_table(base, Ms, snrs, n_jobs=int(cfg["jobs"]))

    out_dir = Path(cfg["out_dir"])
    header, rows = table_rows(results)
    csv_path = out_dir / f"study{study}.csv"
    json_path = out_dir / f"study{study}.json"
    write_csv(csv_path, header, rows)
    payload = {"header": header, "rows": rows, "scenarios": [r.to_dict() for r in results]}
    for sc in payload["scenarios"]:
        sc.pop("runtime_s")
    json_path.write_text(json.dumps(payload, indent=2) + "\n")
    runtime = {f"M={r.config.M},snr={r.config.snr:g}": r.runtime_s for r in results}
    return {"outputs": [csv_path, json_path], "inputs": [], "extra": {"runtime_s": runtime}}


def cmd_estimate(cfg: dict) -> dict:
    data_path, weights_path = Path(cfg["data"]), Path(cfg["weights"])
    A = read_numeric_csv(data_path)
    y = read_numeric_csv(weights_path)
    if cfg.get("transpose_data"):
        A = A.T
    if cfg.get("transpose_weights"):
        y = y.T
    y = y / WEIGHT_SCALES[cfg["weights_scale"]]

    M, I = A.shape
    if M < 2 or M & (M - 1):
        lo = 1 << (M.bit_length() - 1)
        raise UsageError(
            f"data has M={M} grid points; a power of two is required. "
            f"Truncate to {lo} points or zero/edge-pad to {2 * lo} before estimating."
        )
    if y.shape[1] != I:
        raise UsageError(f"weights have {y.shape[1]} columns but data has {I} samples")
    if y.shape[0] > I:
        raise UsageError(f"more components (L={y.shape[0]}) than samples (I={I})")

    if cfg.get("grid_range"):
        a, b = (float(v) for v in cfg["grid_range"])
        grid = np.linspace(a, b, M)
    else:
        grid = testfuncs.grid(M)
    data = AggregatedData(A, grid)
    result = estimate_components(data, MixingMatrix(y), _estimator_from(cfg))

    out_dir = Path(cfg["out_dir"])
    L = result.curves.shape[1]
    names = cfg.get("names") or [f"component{l + 1}" for l in range(L)]
    if len(names) != L:
        raise UsageError(f"{len(names)} component names given for L={L} components")
    curves_path = out_dir / "curves.csv"
    coef_path = out_dir / "coefficients.csv"
    write_csv(curves_path, ["t"] + list(names), zip(grid, *result.curves.T))
    write_csv(coef_path, ["index"] + list(names), zip(range(M), *result.gamma.T))
    extra = {
        "sigma_hat": result.sigma_hat,
        "level_p": {str(j): prm.p for j, prm in result.params.items()},
    }
    return {"outputs": [curves_path, coef_path], "inputs": [data_path, weights_path], "extra": extra}


def cmd_rulecurve(cfg: dict) -> dict:
    params = ShrinkageParams(float(cfg["p"]), float(cfg["tau"]), float(cfg["sigma"]))
    steps = int(cfg["steps"])
    if steps < 1:
        raise UsageError("steps must be >= 1")
    d = np.linspace(float(cfg["d_min"]), float(cfg["d_max"]), steps)
    delta = shrink_vector(d, params)
    out = Path(cfg["out"])
    write_csv(out, ["d", "delta"], zip(d, delta))
    return {"outputs": [out], "inputs": []}


COMMANDS = {
    "testfuncs": cmd_testfuncs,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "rulecurve": cmd_rulecurve,
}


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _p_value(text: str):
    """``--p`` accepts a number or the word ``level``."""
    if text.strip().lower() == "level":
        return "level"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'level', got {text!r}") from None


def _add_estimator_flags(p: argparse.ArgumentParser, p_default) -> None:
    p.add_argument("--filter-n", type=int, default=10, help="Daubechies vanishing moments (1-10)")
    p.add_argument("--j0", type=int, default=DEFAULT_J0, help="primary resolution level")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="logistic prior scale")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument(
        "--p", type=_p_value, default=p_default, help="fixed point-mass weight, or 'level'"
    )
    grp.add_argument(
        "--p-level-dependent",
        dest="p",
        action="store_const",
        const="level",
        help="p(j) = 1 - 1/(j - J0 + 1)^2",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aggwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("testfuncs", help="tabulate test functions on t_m = m/M")
    p.add_argument("--tags", nargs="+", default=list(testfuncs.TAGS))
    p.add_argument("--m", type=int, default=1024)
    p.add_argument("--out", default="testfuncs.csv")

    p = sub.add_parser("simulate", help="run a Monte Carlo study")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--study", type=int, default=1)
    p.add_argument("--m", type=int, nargs="+", default=[512, 1024])
    p.add_argument("--samples", type=int, default=50, help="samples I per dataset")
    p.add_argument("--snr", type=float, nargs="+", default=[3.0, 9.0])
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spline-order", type=int, default=4)
    p.add_argument("--spline-knots", type=int, default=35, help="interior knots K")
    p.add_argument(
        "--scaling",
        choices=SCALINGS,
        default="dj",
        help="true-component scaling: dj (Donoho-Johnstone signals to sd 7), none, unit",
    )
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out-dir", default="results")
    _add_estimator_flags(p, 0.9)

    p = sub.add_parser("estimate", help="estimate component curves from a data set")
    p.add_argument("data", help="M x I CSV of aggregated curves (one column per sample)")
    p.add_argument("weights", help="L x I CSV of mixing weights")
    p.add_argument("--transpose-data", action="store_true", help="data CSV is I x M")
    p.add_argument("--transpose-weights", action="store_true", help="weights CSV is I x L")
    p.add_argument("--weights-scale", choices=sorted(WEIGHT_SCALES), default="percent")
    p.add_argument("--grid-range", nargs=2, type=float, metavar=("A", "B"))
    p.add_argument("--names", nargs="+", help="component names for the output header")
    p.add_argument("--out-dir", default="estimate")
    _add_estimator_flags(p, "level")

    p = sub.add_parser("rulecurve", help="tabulate the shrinkage rule delta(d)")
    p.add_argument("--p", type=float, default=0.9)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--d-min", type=float, default=-10.0)
    p.add_argument("--d-max", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=401)
    p.add_argument("--out", default="rulecurve.csv")

    p = sub.add_parser("replay", help="re-run the configuration stored in a manifest")
    p.add_argument("manifest")
    return parser


_FLAG_KEYS = {"transpose_data", "transpose_weights"}


def _config_tokens(path: Path, known: dict, user_argv: list[str]) -> list[str]:
    """Turn a config file into flag tokens, skipping flags the user passed."""
    tokens = []
    for key, raw in read_config_file(path).items():
        if key not in known or key in ("subcommand", "config"):
            raise UsageError(f"unknown config key {key!r} in {path}")
        flag = "--" + key.replace("_", "-")
        given = {a.split("=", 1)[0] for a in user_argv}
        if flag in given or (key == "p" and "--p-level-dependent" in given):
            continue
        if key in _FLAG_KEYS:
            if raw.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
        elif key == "p" and raw.strip().lower() == "level":
            tokens.append("--p-level-dependent")
        else:
            tokens += [flag] + raw.replace(",", " ").split()
    return tokens


def parse_config(argv=None) -> dict:
    """Parse flags, folding in a ``--config`` file; explicit flags win."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    ns = parser.parse_args(argv)
    path = getattr(ns, "config", None)
    if path:
        at = argv.index(ns.subcommand) + 1
        tokens = _config_tokens(Path(path), vars(ns), argv[at:])
        ns = parser.parse_args(argv[:at] + tokens + argv[at:])
    cfg = vars(ns)
    cfg.pop("config", None)
    return cfg


def run(cfg: dict) -> int:
    """Execute a resolved configuration and write its manifest."""
    name = cfg["subcommand"]
    info = COMMANDS[name](cfg)
    outputs = info["outputs"]
    if "out_dir" in cfg:
        manifest_path = Path(cfg["out_dir"]) / "manifest.json"
    else:
        manifest_path = Path(str(outputs[0]) + ".manifest.json")
    resolved = {k: v for k, v in cfg.items() if k not in ("verbose",)}
    write_manifest(manifest_path, name, resolved, info["inputs"], outputs, info.get("extra"))
    for path in outputs + [manifest_path]:
        log.info("wrote %s", path)
    return 0


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"aggwave: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.INFO if cfg["verbose"] else logging.WARNING, format="%(message)s"
    )
    try:
        if cfg["subcommand"] == "replay":
            manifest = json.loads(Path(cfg["manifest"]).read_text())
            cfg = dict(manifest["config"])
            for path, digest in manifest.get("inputs", {}).items():
                if Path(path).exists() and sha256(Path(path)) != digest:
                    log.warning("input %s changed since the manifest was written", path)
            return run(cfg)
        return run(cfg)
    except (RankError, ReplicateError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"aggwave: error: {exc}", file=sys.stderr)
        return 1
    except (AggwaveError, ValueError, KeyError, OSError) as exc:
        print(f"aggwave: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
