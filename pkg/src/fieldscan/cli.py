"""Command-line interface: simulate, scan, critical-value, calibrate,
detect, covariance.

Conventions shared by all subcommands:

- Settings may come from a JSON config file (``--config``); flags override
  config values, and every JSON output embeds the fully resolved settings
  it ran with.
- All randomness comes from an explicit ``--seed``.
- Output files are written atomically (temp file + rename).
- Printed numbers carry 6 significant digits; full precision lives in the
  JSON outputs.
- Exit codes: 0 success (detect: not rejected), 2 detect rejected,
  1 any error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from .bounds import ModelParams, critical_value
from .calibrate import (
    CalibrationConfig,
    empirical_critical_value,
    resolve_threads,
)
from .detect import global_test
from .errors import DomainError, FieldScanError
from .field import AnomalySpec, Box, FieldDims
from .fieldio import atomic_write_bytes, load_field, save_field
from .scan import (
    AllWindows,
    CubicWindows,
    ScanSpace,
    active_backend,
    dump_per_window_csv,
    enumerate_windows,
    scan,
)
from .simulate import SimConfig, covariance_diagnostic, generate

__all__ = ["run", "entry_point"]

_CONFIG_KEYS = {
    "dims",
    "components",
    "m",
    "sigma",
    "H",
    "variant",
    "alpha",
    "gamma",
    "windows",
    "norm",
    "reps",
    "seed",
    "threads",
    "anomaly",
}


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _parse_ints(text: str, what: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise DomainError(f"{what} must be comma-separated integers, got {text!r}")
    if not values:
        raise DomainError(f"{what} must be non-empty")
    return values


def _parse_floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise DomainError(f"{what} must be comma-separated numbers, got {text!r}")


def _parse_gamma(text: str) -> tuple[float, float]:
    values = _parse_floats(text, "--gamma")
    if len(values) != 2:
        raise DomainError(f"--gamma needs exactly two values, got {text!r}")
    return values  # type: ignore[return-value]


def _parse_norm(text) -> float:
    if isinstance(text, (int, float)):
        p = float(text)
    elif text.strip().lower() == "inf":
        p = math.inf
    else:
        try:
            p = float(text)
        except ValueError:
            raise DomainError(f"--norm must be 'inf' or a number >= 1, got {text!r}")
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"--norm must be 'inf' or a number >= 1, got {text!r}")
    return p


def _parse_windows(text: str):
    spec = text.strip().lower()
    if spec == "all":
        return AllWindows()
    if spec.startswith("cubic:"):
        try:
            side = int(spec.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"--windows cubic needs an integer side, got {text!r}")
        return CubicWindows(side)
    raise DomainError(f"--windows must be 'cubic:K' or 'all', got {text!r}")


def _parse_anomaly(text: str) -> dict:
    parts = text.split(";")
    if len(parts) != 3:
        raise DomainError(
            f"--anomaly must be 'origin;size;shift' with comma-separated "
            f"entries, got {text!r}"
        )
    return {
        "origin": list(_parse_ints(parts[0], "anomaly origin")),
        "size": list(_parse_ints(parts[1], "anomaly size")),
        "shift": list(_parse_floats(parts[2], "anomaly shift")),
    }


def _load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"malformed config {path}: {exc}")
    if not isinstance(raw, dict):
        raise DomainError(f"config {path} must be a JSON object")
    cfg: dict = {}
    for key, value in raw.items():
        name = {"n": "components", "p": "norm"}.get(key, key)
        if name == "gamma0":
            cfg.setdefault("gamma", [0.05, 0.5])
            cfg["gamma"] = [float(value), cfg["gamma"][1]]
            continue
        if name == "gamma1":
            cfg.setdefault("gamma", [0.05, 0.5])
            cfg["gamma"] = [cfg["gamma"][0], float(value)]
            continue
        if name not in _CONFIG_KEYS:
            raise DomainError(f"config {path} has unknown key {key!r}")
        cfg[name] = value
    return cfg


def _resolve(args, flag_map: dict) -> dict:
    """Merge config-file settings with flags; flags win when given."""
    cfg = _load_config(args.config) if getattr(args, "config", None) else {}
    for key, value in flag_map.items():
        if value is not None:
            cfg[key] = value
    return cfg


def _require(cfg: dict, key: str, flag: str):
    if key not in cfg or cfg[key] is None:
        raise DomainError(f"missing required setting {key!r} (flag {flag} or config)")
    return cfg[key]


def _norm_token(p: float):
    return "inf" if math.isinf(p) else p


def _echo_config(cfg: dict, **extra) -> dict:
    echo = dict(cfg)
    echo.update({k: v for k, v in extra.items() if v is not None})
    if "dims" in echo:
        echo["dims"] = list(echo["dims"])
    if "gamma" in echo:
        echo["gamma"] = [float(echo["gamma"][0]), float(echo["gamma"][1])]
    if "norm" in echo:
        echo["norm"] = _norm_token(_parse_norm(echo["norm"]))
    return echo


def _write_json(path: str, payload: dict) -> None:
    data = json.dumps(payload, indent=2).encode("utf-8") + b"\n"
    atomic_write_bytes(path, data)


def _space_from_cfg(dims: FieldDims, cfg: dict) -> ScanSpace:
    windows = _require(cfg, "windows", "--windows")
    gamma = cfg.get("gamma", (0.05, 0.5))
    return ScanSpace(
        dims=dims,
        generator=_parse_windows(windows),
        gamma0=float(gamma[0]),
        gamma1=float(gamma[1]),
    )


def _anomaly_from_cfg(cfg: dict, n: int) -> Optional[AnomalySpec]:
    raw = cfg.get("anomaly")
    if raw is None:
        return None
    if isinstance(raw, str):
        raw = _parse_anomaly(raw)
    box = Box(tuple(int(v) for v in raw["origin"]), tuple(int(v) for v in raw["size"]))
    shift = tuple(float(v) for v in raw["shift"])
    if len(shift) != n:
        raise DomainError(
            f"anomaly shift has {len(shift)} components, field has {n}"
        )
    return AnomalySpec(box=box, shift=shift)


def _box_str(box: Box) -> str:
    origin = ",".join(str(v) for v in box.origin)
    size = ",".join(str(v) for v in box.size)
    return f"origin={origin} size={size}"


def _cmd_simulate(args) -> int:
    cfg = _resolve(
        args,
        {
            "dims": _parse_ints(args.dims, "--dims") if args.dims else None,
            "components": args.components,
            "m": args.m,
            "sigma": args.sigma,
            "seed": args.seed,
            "anomaly": _parse_anomaly(args.anomaly) if args.anomaly else None,
        },
    )
    dims = FieldDims(
        tuple(_require(cfg, "dims", "--dims")),
        int(_require(cfg, "components", "--components")),
    )
    sim = SimConfig(
        dims=dims,
        m=int(_require(cfg, "m", "--m")),
        sigma=float(_require(cfg, "sigma", "--sigma")),
        anomaly=_anomaly_from_cfg(cfg, dims.n),
    )
    seed = int(_require(cfg, "seed", "--seed"))
    field = generate(sim, seed)
    save_field(field, args.out)
    print(
        f"wrote {args.out}: dims={','.join(map(str, dims.dims))} "
        f"components={dims.n} m={sim.m} sigma={_fmt(sim.sigma)} seed={seed}"
    )
    return 0


def _cmd_scan(args) -> int:
    cfg = _resolve(
        args,
        {
            "windows": args.windows,
            "gamma": _parse_gamma(args.gamma) if args.gamma else None,
            "norm": args.norm,
        },
    )
    field = load_field(args.input)
    space = _space_from_cfg(field.dims, cfg)
    p = _parse_norm(cfg.get("norm", "inf"))
    result = scan(field, space, p, want_per_window=bool(args.dump))
    print(f"scan statistic = {_fmt(result.statistic)} (norm p={_norm_token(p)})")
    print(f"argmax: {_box_str(result.argmax)}")
    if args.dump:
        dump_per_window_csv(result, args.dump)
        print(f"wrote per-window contrasts to {args.dump}")
    if args.out:
        _write_json(
            args.out,
            {
                "statistic": result.statistic,
                "argmax": {
                    "origin": list(result.argmax.origin),
                    "size": list(result.argmax.size),
                },
                "norm": _norm_token(p),
                "backend": active_backend(),
                "config": _echo_config(
                    cfg, dims=field.dims.dims, components=field.dims.n
                ),
            },
        )
    return 0


def _cmd_critical_value(args) -> int:
    cfg = _resolve(
        args,
        {
            "dims": _parse_ints(args.dims, "--dims") if args.dims else None,
            "components": args.components,
            "m": args.m,
            "sigma": args.sigma,
            "H": args.H,
            "variant": args.variant,
            "alpha": args.alpha,
            "windows": args.windows,
            "gamma": _parse_gamma(args.gamma) if args.gamma else None,
        },
    )
    dims = FieldDims(
        tuple(_require(cfg, "dims", "--dims")),
        int(_require(cfg, "components", "--components")),
    )
    sigma = float(_require(cfg, "sigma", "--sigma"))
    params = ModelParams(
        m=int(_require(cfg, "m", "--m")),
        d=dims.d,
        n=dims.n,
        sigma=sigma,
        H=float(cfg.get("H", sigma)),
        variant=str(cfg.get("variant", "eq1")),
    )
    alpha = float(cfg.get("alpha", 0.05))
    space = _space_from_cfg(dims, cfg)
    boxes = enumerate_windows(space)
    result = critical_value(alpha, boxes, params, total=dims.total_sites)
    print(
        f"critical value y = {_fmt(result.y)} "
        f"(alpha={_fmt(alpha)}, windows={len(boxes)}, variant={params.variant})"
    )
    if result.degenerate:
        print("bound already below alpha at y = 0 (degenerate)")
    if args.out:
        _write_json(
            args.out,
            {
                "y": result.y,
                "alpha": alpha,
                "log_bound": result.log_bound,
                "rel_width": result.rel_width,
                "degenerate": result.degenerate,
                "windows": len(boxes),
                "config": _echo_config(
                    cfg,
                    H=params.H,
                    variant=params.variant,
                    alpha=alpha,
                ),
            },
        )
    return 0


def _cmd_calibrate(args) -> int:
    cfg = _resolve(
        args,
        {
            "dims": _parse_ints(args.dims, "--dims") if args.dims else None,
            "components": args.components,
            "m": args.m,
            "sigma": args.sigma,
            "alpha": args.alpha,
            "reps": args.reps,
            "seed": args.seed,
            "windows": args.windows,
            "gamma": _parse_gamma(args.gamma) if args.gamma else None,
            "norm": args.norm,
            "threads": args.threads,
        },
    )
    dims = FieldDims(
        tuple(_require(cfg, "dims", "--dims")),
        int(_require(cfg, "components", "--components")),
    )
    sim = SimConfig(
        dims=dims,
        m=int(_require(cfg, "m", "--m")),
        sigma=float(_require(cfg, "sigma", "--sigma")),
    )
    space = _space_from_cfg(dims, cfg)
    p = _parse_norm(cfg.get("norm", "inf"))
    alpha = float(cfg.get("alpha", 0.05))
    reps = int(_require(cfg, "reps", "--reps"))
    seed = int(_require(cfg, "seed", "--seed"))
    threads = int(cfg["threads"]) if cfg.get("threads") is not None else None
    calib = CalibrationConfig(sim=sim, space=space, p=p, alpha=alpha, reps=reps)
    result = empirical_critical_value(calib, seed, threads)
    print(
        f"empirical critical value y_hat = {_fmt(result.y_hat)} "
        f"(alpha={_fmt(alpha)}, reps={reps}, rank={result.rank})"
    )
    if result.at_sample_max:
        print("warning: quantile rank equals reps; estimate is the sample max")
    if args.out:
        _write_json(
            args.out,
            {
                "y_hat": result.y_hat,
                "alpha": alpha,
                "reps": reps,
                "rank": result.rank,
                "at_sample_max": result.at_sample_max,
                "sample": result.sample.tolist(),
                "seed": seed,
                "config": _echo_config(cfg, alpha=alpha, norm=_norm_token(p)),
            },
        )
    return 0


def _cmd_detect(args) -> int:
    cfg = _resolve(
        args,
        {
            "windows": args.windows,
            "gamma": _parse_gamma(args.gamma) if args.gamma else None,
            "norm": args.norm,
            "alpha": args.alpha,
        },
    )
    field = load_field(args.input)
    space = _space_from_cfg(field.dims, cfg)
    p = _parse_norm(cfg.get("norm", "inf"))
    report = global_test(
        field,
        space,
        threshold=args.threshold,
        p=p,
        alpha=cfg.get("alpha"),
        threshold_source=args.threshold_source,
    )
    verdict = "rejected" if report.reject_global else "not rejected"
    print(
        f"statistic = {_fmt(report.statistic)}, "
        f"threshold = {_fmt(report.threshold)} ({report.threshold_source}): "
        f"{verdict}"
    )
    print(f"argmax: {_box_str(report.argmax)}")
    if report.reject_global:
        print(f"windows at or above threshold: {len(report.rejected_windows)}")
    if args.out:
        payload = report.to_dict()
        payload["config"] = _echo_config(
            cfg, dims=field.dims.dims, components=field.dims.n
        )
        _write_json(args.out, payload)
    return 2 if report.reject_global else 0


def _cmd_covariance(args) -> int:
    field = load_field(args.input)
    diag = covariance_diagnostic(field, args.max_lag)
    if diag.degenerate:
        print("field is constant; covariances degenerate to 0")
    for axis in range(field.dims.d):
        row = " ".join(_fmt(v) for v in diag.cov[axis])
        print(f"axis {axis} lags 0..{args.max_lag}: {row}")
    if args.out:
        _write_json(
            args.out,
            {
                "max_lag": diag.max_lag,
                "cov": diag.cov.tolist(),
                "counts": diag.counts.tolist(),
                "degenerate": diag.degenerate,
                "config": {
                    "input": args.input,
                    "dims": list(field.dims.dims),
                    "components": field.dims.n,
                },
            },
        )
    return 0


def _add_common(sub, config=True, threads=False):
    if config:
        sub.add_argument("--config", help="JSON config file; flags override it")
    if threads:
        sub.add_argument(
            "--threads",
            type=int,
            help="worker threads (default: FIELDSCAN_THREADS, else CPU count)",
        )


def _add_space_flags(sub):
    sub.add_argument("--windows", help="window family: 'cubic:K' or 'all'")
    sub.add_argument("--gamma", help="volume-fraction bounds, e.g. 0.05,0.5")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldscan",
        description="Mean-shift anomaly scanning for lattice random fields.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="generate a synthetic field file")
    sim.add_argument("--dims", help="site extents, e.g. 50,50,50")
    sim.add_argument("--components", type=int, help="values per site")
    sim.add_argument("--m", type=int, help="dependence range")
    sim.add_argument("--sigma", type=float, help="block standard deviation")
    sim.add_argument("--seed", type=int, help="RNG seed")
    sim.add_argument("--anomaly", help="'origin;size;shift', comma-separated each")
    sim.add_argument("--out", required=True, help="output field file")
    _add_common(sim)
    sim.set_defaults(handler=_cmd_simulate)

    sc = subs.add_parser("scan", help="scan a field file for mean shifts")
    sc.add_argument("--input", required=True, help="field file to scan")
    _add_space_flags(sc)
    sc.add_argument("--norm", help="contrast norm order: 'inf' or p >= 1")
    sc.add_argument("--out", help="write scan summary JSON here")
    sc.add_argument("--dump", help="write per-window contrast CSV here")
    _add_common(sc)
    sc.set_defaults(handler=_cmd_scan)

    cv = subs.add_parser(
        "critical-value", help="solve the analytic bound for a threshold"
    )
    cv.add_argument("--dims", help="site extents, e.g. 50,50,50")
    cv.add_argument("--components", type=int, help="values per site")
    cv.add_argument("--m", type=int, help="dependence range")
    cv.add_argument("--sigma", type=float, help="dispersion scale")
    cv.add_argument("--H", type=float, help="envelope constant (default: sigma)")
    cv.add_argument("--variant", choices=["eq1", "theorem1"], help="branch rule")
    cv.add_argument("--alpha", type=float, help="target level (default 0.05)")
    _add_space_flags(cv)
    cv.add_argument("--out", help="write solver result JSON here")
    _add_common(cv)
    cv.set_defaults(handler=_cmd_critical_value)

    cal = subs.add_parser(
        "calibrate", help="Monte Carlo critical value from null simulations"
    )
    cal.add_argument("--dims", help="site extents, e.g. 50,50,50")
    cal.add_argument("--components", type=int, help="values per site")
    cal.add_argument("--m", type=int, help="dependence range")
    cal.add_argument("--sigma", type=float, help="block standard deviation")
    cal.add_argument("--alpha", type=float, help="target level (default 0.05)")
    cal.add_argument("--reps", type=int, help="null replications")
    cal.add_argument("--seed", type=int, help="master seed")
    _add_space_flags(cal)
    cal.add_argument("--norm", help="contrast norm order: 'inf' or p >= 1")
    cal.add_argument("--out", help="write calibration JSON here")
    _add_common(cal, threads=True)
    cal.set_defaults(handler=_cmd_calibrate)

    det = subs.add_parser("detect", help="test a field against a threshold")
    det.add_argument("--input", required=True, help="field file to test")
    det.add_argument("--threshold", type=float, required=True, help="critical value")
    det.add_argument(
        "--threshold-source",
        choices=["theoretical", "empirical", "user"],
        default="user",
        help="where the threshold came from (for the report)",
    )
    det.add_argument("--alpha", type=float, help="level the threshold targets")
    _add_space_flags(det)
    det.add_argument("--norm", help="contrast norm order: 'inf' or p >= 1")
    det.add_argument("--out", help="write detection report JSON here")
    _add_common(det)
    det.set_defaults(handler=_cmd_detect)

    cov = subs.add_parser(
        "covariance", help="empirical covariance by axis lag (diagnostic)"
    )
    cov.add_argument("--input", required=True, help="field file to analyze")
    cov.add_argument("--max-lag", type=int, default=10, help="largest lag")
    cov.add_argument("--out", help="write diagnostic JSON here")
    cov.set_defaults(handler=_cmd_covariance)

    return parser


def run(argv=None) -> int:
    """Parse argv and execute one subcommand, returning the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        return args.handler(args)
    except FieldScanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry_point()
