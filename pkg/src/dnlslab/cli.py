"""
Command line front end::

    dnlslab <command> --config <path> [--set key=value]...

Commands are ``simulate``, ``smoothing``, ``growth``, ``verify`` and
``falsify``.  Configuration is a JSON object with flat dotted keys; ``--set``
overrides individual keys (values are parsed as JSON when possible).  Each run
writes a directory under ``output.root`` (default ``$DNLSLAB_OUTPUT`` or
``./runs``) atomically: files go to a temporary sibling that is renamed once
the manifest has been written.

Exit status: 0 success, 1 invalid input or failed verification, 2 numerical
abort.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as dio
from .diagnostics import (DEFAULT_SUITE, ESTIMATES, GrowthParams, freq_split_series,
                          growth_series, growth_verdict, inequality_trial,
                          smoothing_experiment)
from .evolution import NumericalAbort, StepperConfig, evolve
from .gauge import GaugeState, compute_mu, gauge_chain
from .spectral import (Spectrum, TorusField, analyze, random_hs, smooth_data,
                       sobolev_norm)
from .terms import ComparisonRule, duhamel_residual, gauge_rhs

log = logging.getLogger("dnlslab")

COMMANDS = ("simulate", "smoothing", "growth", "verify", "falsify")
OUTPUT_ENV = "DNLSLAB_OUTPUT"

DEFAULTS: dict = {
    "grid.N": 64,
    "stepper.dt": 1e-3,
    "stepper.T": 1.0,
    "stepper.store_every": 10,
    "stepper.max_halvings": 3,
    "equation": "dnls",
    "data.generator": "smooth",
    "data.seed": 0,
    "data.amplitude": 1.0,
    "data.k": 1,
    "data.s": 1.0,
    "data.margin": 0.5,
    "data.l2": 0.4,
    "data.width": 3.0,
    "data.file": "",
    "rule.lambda": 4.0,
    "smoothing.s": 0.75,
    "smoothing.a": 0.2,
    "smoothing.epsilon": 0.01,
    "smoothing.margin": 0.01,
    "smoothing.T": 0.5,
    "smoothing.Ns": [32, 64, 128],
    "smoothing.amplitude": 0.25,
    "smoothing.seed": 0,
    "growth.s": 2.0,
    "growth.epsilon": 0.01,
    "growth.T_block": 1.0,
    "verify.N_oracle": 16,
    "falsify.estimates": "default",
    "falsify.trials": 200,
    "falsify.seed": 0,
    "output.root": "",
    "output.name": "",
    "output.overwrite": False,
}

GENERATORS = ("plane_wave", "random_hs", "smooth", "zero", "file")

CONVENTIONS = {
    "fourier": "f_hat(xi) = (2 pi)^(-1/2) int exp(-i xi x) f dx; band -N/2..N/2-1",
    "propagator": "exp(i t d_x^2) multiplies f_hat(xi) by exp(-i xi^2 t)",
    "product_constants": "cubic sums carry 1/(2 pi), quintic sums 1/(2 pi)^2",
    "comparison": "a << b iff lambda (1 + a) <= b; lambda configurable (rule.lambda)",
    "nonresonant_set": "xi2 not in {xi1, xi3}; |xi1| >= |xi3| with weight 2 off the tie",
    "mu_term_sign": "-i mu NR(|z|^2 z)",
    "gauged_rhs": "four standard terms plus the resonant correction (exact flow)",
    "duhamel_integrand": "no propagator factor on the time-integrated normal-form term",
    "window": "eta = 1 on [-1,1], exp(1 - 1/(1 - (|t|-1)^2)) on 1<|t|<2, 0 beyond",
    "z_norm_extension": "windowed extension; Z-type values are upper bounds for the restriction norm",
    "integrator": "integrating-factor RK4 (Lawson); g(t) by trapezoid on accepted steps",
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration

def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _coerce(key: str, value, default):
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key}: expected true/false, got {value!r}")
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{key}: expected a list, got {value!r}")
        return value
    if key == "falsify.estimates" and isinstance(value, list):
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value


def load_config(path: str | None, overrides: list[str]) -> dict:
    """Merge defaults, the JSON file and ``key=value`` overrides."""
    cfg = dict(DEFAULTS)
    items: list[tuple[str, object]] = []
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        items += list(raw.items())
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"--set expects key=value, got {ov!r}")
        k, v = ov.split("=", 1)
        items.append((k.strip(), _parse_value(v)))
    for k, v in items:
        if k not in DEFAULTS:
            raise ConfigError(f"unknown config key {k!r}")
        cfg[k] = _coerce(k, v, DEFAULTS[k])
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    N = cfg["grid.N"]
    if N < 8 or N & (N - 1):
        raise ConfigError(f"grid.N: must be a power of two >= 8, got {N}")
    if cfg["equation"] not in ("dnls", "gauge"):
        raise ConfigError(f"equation: must be 'dnls' or 'gauge', got {cfg['equation']!r}")
    if cfg["data.generator"] not in GENERATORS:
        raise ConfigError(f"data.generator: must be one of {GENERATORS}")
    if cfg["data.generator"] == "file" and not cfg["data.file"]:
        raise ConfigError("data.file: required when data.generator is 'file'")
    if not cfg["stepper.dt"] > 0:
        raise ConfigError("stepper.dt: must be positive")
    if cfg["stepper.T"] < 0:
        raise ConfigError("stepper.T: must be non-negative")
    if cfg["stepper.store_every"] < 1:
        raise ConfigError("stepper.store_every: must be >= 1")
    if not cfg["rule.lambda"] > 1:
        raise ConfigError("rule.lambda: must exceed 1")
    est = cfg["falsify.estimates"]
    if est != "default":
        names = est if isinstance(est, list) else [est]
        for name in names:
            if name not in ESTIMATES:
                raise ConfigError(f"falsify.estimates: unknown estimate {name!r}")
    if cfg["falsify.trials"] < 30:
        raise ConfigError("falsify.trials: must be >= 30")


def initial_data(cfg: dict) -> Spectrum:
    """Initial u0 described by the ``data.*`` keys."""
    N, gen = cfg["grid.N"], cfg["data.generator"]
    if gen == "plane_wave":
        A, k = cfg["data.amplitude"], cfg["data.k"]
        if not -N // 2 <= k < N // 2:
            raise ConfigError(f"data.k: mode {k} outside the band of N={N}")
        return analyze(TorusField.from_function(lambda x: A * np.exp(1j * k * x), N))
    if gen == "random_hs":
        z = random_hs(cfg["data.seed"], cfg["data.s"], N, cfg["data.margin"])
        return z * cfg["data.amplitude"]
    if gen == "smooth":
        return smooth_data(cfg["data.seed"], N, l2=cfg["data.l2"], width=cfg["data.width"])
    if gen == "zero":
        return Spectrum.zeros(N)
    text = Path(cfg["data.file"]).read_text()
    spec = dio.read_spectrum_csv(text)
    if spec.N != N:
        raise ConfigError(f"data.file: spectrum has N={spec.N}, config has grid.N={N}")
    return spec


def _stepper(cfg: dict, equation: str | None = None, **kw) -> StepperConfig:
    T = kw.pop("T", cfg["stepper.T"])
    return StepperConfig(dt=min(cfg["stepper.dt"], T) if T > 0 else cfg["stepper.dt"], T=T,
                         store_every=kw.pop("store_every", cfg["stepper.store_every"]),
                         equation=equation or cfg["equation"],
                         rule=ComparisonRule(cfg["rule.lambda"]),
                         max_halvings=cfg["stepper.max_halvings"], **kw)


# ---------------------------------------------------------------------------
# commands; each returns {relative path: text}, a report dict and a status

def _cmd_simulate(cfg: dict):
    u0 = initial_data(cfg)
    files: dict[str, str] = {}
    report: dict = {"equation": cfg["equation"]}
    if cfg["stepper.T"] == 0:
        files["monitors.csv"] = dio.monitors_csv([], [])
        files["times.csv"] = dio.series_csv("index,t", [])
        report["stored"] = 0
        return files, report, 0
    if cfg["equation"] == "dnls":
        traj = evolve(u0, _stepper(cfg))
    else:
        mu = compute_mu(u0)
        z0 = analyze(gauge_chain(u0, GaugeState.initial(mu), "u_to_z"))
        traj = evolve(z0, _stepper(cfg), mu)
        report["mu"] = mu
        files["gauge.csv"] = dio.series_csv(
            "t,g,l4_integral", ((s.t, s.g_accum, s.l4_integral) for s in traj.gauge_states))
    files["monitors.csv"] = dio.monitors_csv(traj.times, traj.monitors)
    files["times.csv"] = dio.series_csv("index,t", ((i, t) for i, t in enumerate(traj.times)))
    label = "u" if cfg["equation"] == "dnls" else "z"
    for i, spec in enumerate(traj.spectra):
        files[f"spectra/{label}_{i:05d}.csv"] = dio.spectrum_csv(spec)
    m = np.array([mon.as_tuple() for mon in traj.monitors])
    scale = np.maximum(np.abs(m[0]), 1e-300)
    report.update(stored=len(traj), dt_used=traj.dt,
                  relative_drift=dict(zip(("mass", "momentum", "energy"),
                                          (np.abs(m - m[0]).max(axis=0) / scale).tolist())))
    return files, report, 0


def _cmd_smoothing(cfg: dict):
    res = smoothing_experiment(Ns=tuple(cfg["smoothing.Ns"]), s=cfg["smoothing.s"],
                               a=cfg["smoothing.a"], margin=cfg["smoothing.margin"],
                               T=cfg["smoothing.T"], seed=cfg["smoothing.seed"],
                               amplitude=cfg["smoothing.amplitude"], dt=cfg["stepper.dt"],
                               epsilon=cfg["smoothing.epsilon"])
    files = {"smoothing.csv": dio.series_csv(
        "N,residual,data_norm", zip(res["N"], res["residual"], res["data_norm"]))}
    res["note"] = "threshold a/2 is a conservative finite-grid choice"
    return files, res, 0


def _cmd_growth(cfg: dict):
    u0 = initial_data(cfg)
    gp = GrowthParams(cfg["growth.s"], cfg["growth.epsilon"], cfg["growth.T_block"])
    traj = evolve(u0, _stepper(cfg, "dnls"))
    series = growth_series(traj, gp)
    files = {"growth.csv": dio.series_csv("t,norm,envelope", series)}
    report = growth_verdict(series) if len(series) else {"bounded": True}
    report["exponent"] = gp.exponent
    try:
        split = freq_split_series(traj, gp.s, gp.T_block)
        files["freq_split.csv"] = dio.series_csv(
            "n,low_norm,high_norm", ((int(n), lo, hi) for n, lo, hi in split))
    except ValueError as exc:
        report["freq_split"] = f"skipped: {exc}"
    return files, report, 0


def _cmd_verify(cfg: dict):
    """Consistency checks on the configured data."""
    u0 = initial_data(cfg)
    rule = ComparisonRule(cfg["rule.lambda"])
    checks = {}
    T = cfg["stepper.T"] if cfg["stepper.T"] > 0 else 0.5
    dnls = evolve(u0, _stepper(cfg, "dnls", T=T))
    m = np.array([mon.as_tuple() for mon in dnls.monitors])
    drift = np.abs(m - m[0]).max(axis=0)
    rel = drift / np.where(np.abs(m[0]) > 0, np.abs(m[0]), 1.0)
    checks["mass_drift"] = {"value": float(drift[0]), "tol": 1e-10}
    checks["momentum_drift"] = {"value": float(rel[1]), "tol": 1e-8}
    checks["energy_drift"] = {"value": float(rel[2]), "tol": 1e-8}

    mu = compute_mu(u0)
    z0 = analyze(gauge_chain(u0, GaugeState.initial(mu), "u_to_z"))
    gtraj = evolve(z0, _stepper(cfg, "gauge", T=T), mu)
    err = max(sobolev_norm(gtraj.physical(i) - dnls.spectra[i], 1.0)
              for i in range(min(len(gtraj), len(dnls))))
    checks["gauge_consistency_h1"] = {"value": float(err), "tol": 1e-6}

    # oracle checks on a coarse band-limited copy of z0
    n = cfg["verify.N_oracle"]
    zc = Spectrum(z0.coeffs[z0.N // 2 - n // 2: z0.N // 2 + n // 2]) if z0.N >= n else z0
    muc = compute_mu(zc)
    diff = np.abs(gauge_rhs(zc, muc, rule, "fast").coeffs
                  - gauge_rhs(zc, muc, rule, "oracle").coeffs).max()
    checks["rhs_fast_vs_oracle"] = {"value": float(diff), "tol": 1e-11}
    Td = min(T, 0.5)
    small = evolve(zc, StepperConfig(dt=5e-4, T=Td, equation="gauge", rule=rule), muc)
    res = duhamel_residual(small, zc, muc, rule)
    checks["duhamel_residual"] = {"value": float(res.max()), "tol": 1e-6}
    for c in checks.values():
        c["passed"] = bool(c["value"] <= c["tol"])
    ok = all(c["passed"] for c in checks.values())
    files = {}
    files["verify.csv"] = "check,value,tol,passed\n" + "".join(
        f"{k},{dio.fmt(c['value'])},{dio.fmt(c['tol'])},{int(c['passed'])}\n"
        for k, c in checks.items())
    return files, {"checks": checks, "all_passed": ok}, 0 if ok else 1


def _cmd_falsify(cfg: dict):
    est = cfg["falsify.estimates"]
    if est == "default":
        suite = DEFAULT_SUITE
    else:
        suite = tuple((name, {}) for name in (est if isinstance(est, list) else [est]))
    reports = [inequality_trial(name, params, cfg["falsify.trials"], cfg["falsify.seed"])
               for name, params in suite]
    lines = ["estimate,params,N,max_ratio,median_ratio,verdict"]
    for r in reports:
        ptxt = ";".join(f"{k}={v}" for k, v in sorted(r["params"].items()))
        for row in r["table"]:
            lines.append(f"{r['estimate']},{ptxt},{row['N']},{dio.fmt(row['max'])},"
                         f"{dio.fmt(row['median'])},{r['verdict']}")
    files = {"falsify.csv": "\n".join(lines) + "\n"}
    falsified = [r["estimate"] for r in reports if r["verdict"] == "FALSIFIED"]
    return files, {"reports": reports, "falsified": falsified}, 0


_DISPATCH = {"simulate": _cmd_simulate, "smoothing": _cmd_smoothing, "growth": _cmd_growth,
             "verify": _cmd_verify, "falsify": _cmd_falsify}


# ---------------------------------------------------------------------------
# persistence

def _config_digest(cfg: dict) -> str:
    echo = {k: v for k, v in cfg.items() if not k.startswith("output.")}
    return hashlib.sha256(dio.json_text(echo).encode()).hexdigest()[:12]


def write_report(run_dir: Path, files: dict[str, str], report: dict, manifest: dict) -> Path:
    """Write ``files``, ``report.json`` and ``manifest.json`` into ``run_dir``.

    Files are staged in a temporary sibling directory and renamed into place
    once the manifest (which lists every file with its SHA-256) is written.
    """
    run_dir = Path(run_dir)
    parent = run_dir.parent
    parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{run_dir.name}.", dir=parent))
    try:
        all_files = dict(files)
        all_files["report.json"] = dio.json_text(report)
        for rel, text in all_files.items():
            p = tmp / rel
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text)
        manifest = dict(manifest)
        manifest["files"] = {rel: dio.sha256_file(tmp / rel) for rel in sorted(all_files)}
        (tmp / "manifest.json").write_text(dio.json_text(manifest))
        if run_dir.exists():
            shutil.rmtree(run_dir)
        os.rename(tmp, run_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return run_dir


def run_command(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="dnlslab", description=__doc__.split("\n\n")[0])
    parser.add_argument("command")
    parser.add_argument("--config", default=None, help="JSON file with dotted keys")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key")
    parser.add_argument("-v", "--verbose", action="store_true")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command not in COMMANDS:
        print(f"dnlslab: unknown command {args.command!r}; choose from {', '.join(COMMANDS)}",
              file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config, args.overrides)
        root = Path(cfg["output.root"] or os.environ.get(OUTPUT_ENV) or "runs")
        name = cfg["output.name"] or f"{args.command}-{_config_digest(cfg)}"
        run_dir = root / name
        if run_dir.exists() and not cfg["output.overwrite"]:
            raise ConfigError(f"output.name: run directory {run_dir} exists "
                              "(set output.overwrite=true to replace it)")
        t0 = time.perf_counter()
        files, report, status = _DISPATCH[args.command](cfg)
        manifest = {"command": args.command, "config": cfg, "code_version": __version__,
                    "wall_time_s": round(time.perf_counter() - t0, 3),
                    "conventions": CONVENTIONS, "status": status}
        write_report(run_dir, files, report, manifest)
    except ConfigError as exc:
        print(f"dnlslab: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except NumericalAbort as exc:
        print(f"dnlslab: numerical abort: {exc} (last valid t={exc.t_last})", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"dnlslab: {exc}", file=sys.stderr)
        return 1
    print(run_dir)
    if status:
        print("dnlslab: verification failed", file=sys.stderr)
    return status


def main() -> None:
    sys.exit(run_command())
