"""Command-line harness for reproducible stability experiments.

Subcommands: sweep-ip1, mode, prolate, bounds, simulate, reconstruct,
verify.  Every run writes ``manifest.json`` into the output directory
before any result file; identical configurations (including seeds) yield
bitwise identical CSV and field outputs.  Exit codes: 0 success, 1
verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, bounds, ctf, fieldio, fresnel, phantoms, recon, spectral, verify
from .fields import SupportSpec, make_grid

SWEEP_CSV_COLUMNS = ("fbar", "sigma_min_numeric", "c_ip1_numeric", "ip1_bound", "ratio", "status")
PROLATE_CSV_COLUMNS = ("f", "c", "j", "lambda", "one_minus_lambda", "asymptotic_one_minus_lambda", "modal_constant")

DESK_GRID_N = 16384
DESK_SUPPORT_N = 64
PAPER_GRID_N = 262144
PAPER_SUPPORT_N = 512


def _worker_count() -> int:
    raw = os.environ.get("HOLOSTAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    return cfg


def _resolve(args: argparse.Namespace, overrides: dict) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    for key, val in overrides.items():
        if key in cfg:
            cfg[key] = val
    return cfg


def _start_manifest(out: Path, command: str, cfg: dict) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": {k: v for k, v in sorted(cfg.items()) if k != "out"},
        "versions": {
            "holostab": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "status": "running",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _finish_manifest(out: Path, manifest: dict, t0: float) -> None:
    manifest["status"] = "done"
    manifest["elapsed_seconds"] = time.time() - t0
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _sweep_grid(cfg: dict):
    if cfg.get("paper_scale"):
        n, nsup = PAPER_GRID_N, PAPER_SUPPORT_N
    else:
        n, nsup = cfg["grid_n"], cfg["support_n"]
    return make_grid(1, n, n / nsup)


def _sweep_point(fbar: float, grid, compute_sigma: bool) -> list:
    f = 2.0 * np.pi * fbar
    sup = SupportSpec("stripe", 1.0)
    status = "ok"
    sigma = ""
    c_val = ""
    try:
        rep = spectral.stability_constant(f, sup, grid, method="auto")
        c_val = rep.value
        if compute_sigma:
            srep = spectral.smallest_singular_value(f, sup, grid, method="auto")
            sigma = srep.value
    except (spectral.ConvergenceError, spectral.SamplingError) as exc:
        status = f"error:{type(exc).__name__}"
    bound = bounds.ip1_bound(f)
    ratio = (c_val / bound) if isinstance(c_val, float) else ""
    return [fbar, sigma, c_val, bound, ratio, status]


def cmd_sweep_ip1(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _load_config(args.config))
    out = Path(cfg["out"])
    t0 = time.time()
    manifest = _start_manifest(out, "sweep-ip1", cfg)
    grid = _sweep_grid(cfg)
    fbars = np.linspace(cfg["fbar_min"], cfg["fbar_max"], cfg["fbar_steps"])
    compute_sigma = not cfg.get("skip_sigma", False)
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda fb: _sweep_point(fb, grid, compute_sigma), fbars))
    else:
        rows = [_sweep_point(fb, grid, compute_sigma) for fb in fbars]
    fieldio.write_csv(rows, out / "sweep_ip1.csv", SWEEP_CSV_COLUMNS)
    _finish_manifest(out, manifest, t0)
    return 0


def cmd_mode(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _load_config(args.config))
    out = Path(cfg["out"])
    t0 = time.time()
    manifest = _start_manifest(out, "mode", cfg)
    grid = _sweep_grid(cfg)
    f = 2.0 * np.pi * cfg["fbar"]
    comparison = spectral.least_stable_mode(f, SupportSpec("stripe", 1.0), grid)
    fieldio.write_field(comparison.mode, out / "mode_phi0.fld")
    fieldio.write_field(comparison.chirp_corrected, out / "mode_phi0_chirp_corrected.fld")
    report = {
        "fbar": cfg["fbar"],
        "sigma_min": comparison.sigma_min,
        "correlation_with_concentration_mode": comparison.correlation,
        "mode_norm": 1.0,
    }
    (out / "mode_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _finish_manifest(out, manifest, t0)
    return 0


def cmd_prolate(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _load_config(args.config))
    out = Path(cfg["out"])
    t0 = time.time()
    manifest = _start_manifest(out, "prolate", cfg)
    rows = []
    n_modes = cfg["modes"]
    for fbar in np.linspace(cfg["fbar_min"], cfg["fbar_max"], cfg["fbar_steps"]):
        f = 2.0 * np.pi * fbar
        system = spectral.prolate_eigs(f / 8.0, n_modes, grid_n=cfg["grid_n"])
        consts = spectral.modal_constants([(j,) for j in range(n_modes)], system)
        for j in range(n_modes):
            lam = system.eigenvalues[j]
            rows.append(
                [f, f / 8.0, j, lam, 1.0 - lam, bounds.prolate_asymptotic(f, j), consts[j]]
            )
    fieldio.write_csv(rows, out / "prolate.csv", PROLATE_CSV_COLUMNS)
    _finish_manifest(out, manifest, t0)
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _load_config(args.config))
    out = Path(cfg["out"])
    t0 = time.time()
    manifest = _start_manifest(out, "bounds", cfg)
    rows = []
    alphas = [float(a) for a in cfg["alpha"]]
    dims = [int(m) for m in cfg["dims"]]
    for fbar in np.linspace(cfg["fbar_min"], cfg["fbar_max"], cfg["fbar_steps"]):
        f = 2.0 * np.pi * fbar
        for m in dims:
            rows.append(
                bounds.BoundReport(
                    problem="IP1", f=f, alpha=0.0, m=m, value=bounds.ip1_bound(f), regime="two-term"
                ).csv_row()
            )
            for alpha in alphas:
                rows.append(bounds.ip2_bound(f, alpha, m).csv_row())
            spec2 = ctf.TwoDistanceSpec(
                fresnel.FresnelNumber(f), fresnel.FresnelNumber(cfg["f2_factor"] * f)
            )
            rows.append(bounds.ip3_bound(spec2, m).csv_row())
    fieldio.write_csv(rows, out / "bounds.csv", bounds.BOUND_CSV_COLUMNS)
    _finish_manifest(out, manifest, t0)
    return 0


def _simulation_pieces(cfg: dict):
    grid = make_grid(1, cfg["grid_n"], cfg["grid_n"] / cfg["support_n"])
    sup = SupportSpec("ball", 1.0)
    f1 = fresnel.FresnelNumber(2.0 * np.pi * cfg["fbar1"])
    f2 = fresnel.FresnelNumber(2.0 * np.pi * cfg["fbar2"])
    return grid, sup, ctf.TwoDistanceSpec(f1, f2)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _load_config(args.config))
    out = Path(cfg["out"])
    t0 = time.time()
    manifest = _start_manifest(out, "simulate", cfg)
    grid, sup, spec2 = _simulation_pieces(cfg)
    scale = cfg["amplitude"]
    phi = phantoms.make_phantom(
        phantoms.PhantomSpec("gauss_blobs", "phi", sup, {"seed": cfg["seed"]}), grid
    )
    mu = phantoms.make_phantom(
        phantoms.PhantomSpec("gauss_blobs", "mu", sup, {"seed": cfg["seed"] + 1}), grid
    )
    phi = phi.with_values(scale * phi.values)
    mu = mu.with_values(0.25 * scale * mu.values)
    c1, c2 = ctf.two_distance_forward(phi, mu, spec2)
    h = phi.with_values(-1j * phi.values - mu.values)
    nl1 = ctf.nonlinear_intensity(h, spec2.f1)
    nl2 = ctf.nonlinear_intensity(h, spec2.f2)
    level = cfg["noise"]
    if level > 0:
        c1 = phantoms.add_noise(c1, level, cfg["seed"] + 10)
        c2 = phantoms.add_noise(c2, level, cfg["seed"] + 11)
    for name, fld in (
        ("phi_true", phi),
        ("mu_true", mu),
        ("contrast_f1", c1),
        ("contrast_f2", c2),
        ("intensity_nl_f1", nl1),
        ("intensity_nl_f2", nl2),
    ):
        fieldio.write_field(fld, out / f"{name}.fld")
    _finish_manifest(out, manifest, t0)
    return 0


def cmd_reconstruct(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _load_config(args.config))
    out = Path(cfg["out"])
    src = Path(cfg["data"])
    t0 = time.time()
    manifest = _start_manifest(out, "reconstruct", cfg)
    needed = ["contrast_f1", "contrast_f2", "phi_true", "mu_true"]
    missing = [n for n in needed if not (src / f"{n}.fld").exists()]
    if missing:
        print(f"missing inputs in {src}: {', '.join(missing)}", file=sys.stderr)
        return 2
    c1 = fieldio.read_field(src / "contrast_f1.fld")
    c2 = fieldio.read_field(src / "contrast_f2.fld")
    phi_true = fieldio.read_field(src / "phi_true.fld")
    mu_true = fieldio.read_field(src / "mu_true.fld")
    f1 = fresnel.FresnelNumber(2.0 * np.pi * cfg["fbar1"])
    f2 = fresnel.FresnelNumber(2.0 * np.pi * cfg["fbar2"])
    spec2 = ctf.TwoDistanceSpec(f1, f2)
    config = recon.ReconConfig(spec=spec2, reg=cfg["reg"])
    phi_est, mu_est = recon.invert_two_distance(c1, c2, config)
    fieldio.write_field(phi_est, out / "phi_est.fld")
    fieldio.write_field(mu_est, out / "mu_est.fld")
    sup = SupportSpec("ball", 1.0)
    metrics = {
        "phi": recon.recon_metrics(phi_true, phi_est, sup),
        "mu": recon.recon_metrics(mu_true, mu_est, sup),
    }
    metrics["phi"]["l2_error_masked"] = recon.masked_spectral_error(phi_true, phi_est, spec2)
    metrics["mu"]["l2_error_masked"] = recon.masked_spectral_error(mu_true, mu_est, spec2)
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    _finish_manifest(out, manifest, t0)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _resolve(args, _load_config(args.config))
    out = Path(cfg["out"])
    t0 = time.time()
    manifest = _start_manifest(out, "verify", cfg)
    with tempfile.TemporaryDirectory() as tmp:
        checks = verify.run_all(Path(tmp))
    failures = [c for c in checks if not c.passed]
    for c in checks:
        print(c.line())
    print(f"{len(checks) - len(failures)}/{len(checks)} property checks passed "
          f"across {verify.SUITE_COUNT} suites")
    report = [c.__dict__ for c in checks]
    (out / "verify_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _finish_manifest(out, manifest, t0)
    return 1 if failures else 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file overriding the flags")
    p.add_argument("--out", default="holostab-out", help="output directory")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holostab",
        description="Stability constants and reconstruction for near-field "
        "phase contrast imaging (CTF model)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-ip1", help="stability constant sweep over fbar")
    _add_common(p)
    p.add_argument("--fbar-min", dest="fbar_min", type=float, default=1.0)
    p.add_argument("--fbar-max", dest="fbar_max", type=float, default=10.0)
    p.add_argument("--fbar-steps", dest="fbar_steps", type=int, default=19)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=DESK_GRID_N)
    p.add_argument("--support-n", dest="support_n", type=int, default=DESK_SUPPORT_N)
    p.add_argument("--paper-scale", dest="paper_scale", action="store_true",
                   help=f"use the full {PAPER_GRID_N}-point grid with {PAPER_SUPPORT_N}-sample support")
    p.add_argument("--skip-sigma", dest="skip_sigma", action="store_true",
                   help="skip the forward-map smallest singular value column")
    p.set_defaults(func=cmd_sweep_ip1)

    p = sub.add_parser("mode", help="least stable mode at one fbar")
    _add_common(p)
    p.add_argument("--fbar", type=float, default=10.0)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=DESK_GRID_N)
    p.add_argument("--support-n", dest="support_n", type=int, default=DESK_SUPPORT_N)
    p.add_argument("--paper-scale", dest="paper_scale", action="store_true")
    p.set_defaults(func=cmd_mode)

    p = sub.add_parser("prolate", help="concentration eigenvalue tables")
    _add_common(p)
    p.add_argument("--fbar-min", dest="fbar_min", type=float, default=2.0)
    p.add_argument("--fbar-max", dest="fbar_max", type=float, default=12.0)
    p.add_argument("--fbar-steps", dest="fbar_steps", type=int, default=6)
    p.add_argument("--modes", type=int, default=6)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=1024)
    p.set_defaults(func=cmd_prolate)

    p = sub.add_parser("bounds", help="analytic bound tables over (fbar, alpha, m)")
    _add_common(p)
    p.add_argument("--fbar-min", dest="fbar_min", type=float, default=1.0)
    p.add_argument("--fbar-max", dest="fbar_max", type=float, default=100.0)
    p.add_argument("--fbar-steps", dest="fbar_steps", type=int, default=25)
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0, 0.1, np.pi / 2])
    p.add_argument("--dims", type=int, nargs="+", default=[1, 2])
    p.add_argument("--f2-factor", dest="f2_factor", type=float, default=3.0,
                   help="second Fresnel number as a multiple of the first")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="synthetic two-distance holograms")
    _add_common(p)
    p.add_argument("--fbar1", type=float, default=10.0)
    p.add_argument("--fbar2", type=float, default=30.0)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=512)
    p.add_argument("--support-n", dest="support_n", type=int, default=64)
    p.add_argument("--amplitude", type=float, default=0.01)
    p.add_argument("--noise", type=float, default=0.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="invert simulated holograms")
    _add_common(p)
    p.add_argument("--data", required=True, help="directory produced by simulate")
    p.add_argument("--fbar1", type=float, default=10.0)
    p.add_argument("--fbar2", type=float, default=30.0)
    p.add_argument("--reg", type=float, default=1e-10)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify", help="run the property suites")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors already
        return int(exc.code) if exc.code is not None else 2
    try:
        return args.func(args)
    except (ValueError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
