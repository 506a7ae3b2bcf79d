"""Experiment-runner CLI.

Subcommands: verify-operators, covariance, diffuse, bound-check, sliced-w.
Exit codes: 0 success / all checks pass, 1 usage error, 2 numerical-check
failure, 3 runtime abort (non-finite paths).

Every run is determined by (config, seed); outputs carry no timestamps and
JSON keys are sorted, so re-runs are byte-identical.  Option precedence:
built-in defaults < command-line flags < JSON config file.  The environment
variable SPHEREDIFF_OUT_DIR sets the directory used when an output path is
not given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, chart, lossmap, metrics, noise, sde, transform

ENV_OUT_DIR = "SPHEREDIFF_OUT_DIR"


class UsageError(ValueError):
    pass


class NumericalCheckFailure(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _out_dir() -> Path:
    return Path(os.environ.get(ENV_OUT_DIR, "."))


def _out_path(given, default_name: str) -> Path:
    path = Path(given) if given else _out_dir() / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _canonical(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def _provenance(config: dict) -> dict:
    return {
        "tool_version": __version__,
        "config_hash": hashlib.sha256(_canonical(config).encode()).hexdigest(),
        "seed": config.get("seed"),
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# verify-operators
# ---------------------------------------------------------------------------

def cmd_verify_operators(args) -> int:
    if args.L < 1:
        raise UsageError("--L must be >= 1")
    config = {"command": "verify-operators", "L": args.L, "tol": args.tol, "seed": args.seed}
    ops = transform.build_operators(args.L)
    cov = noise.build_covariance(args.L)
    T = chart.chart_linear_map(ops)
    bops = lossmap.build_bound_operators(ops, cov.Sigma)
    rng = np.random.default_rng(args.seed)
    L2 = ops.d_spectral

    UY = ops.U @ ops.Y
    P = ops.projector()
    checks = {
        "uy_minus_identity": float(np.linalg.norm(UY - np.eye(L2))),
        "projector_idempotence": float(np.linalg.norm(P @ P - P)),
        "tt_transpose_minus_sigma": float(np.max(np.abs(T @ T.T - cov.Sigma))),
        "t_z": float(np.max(np.abs(bops.T @ bops.Z))),
        "t_tplus_minus_identity": float(np.max(np.abs(bops.T @ bops.Tplus - np.eye(L2)))),
    }

    iso_err = 0.0
    for _ in range(100):
        z1 = rng.standard_normal(L2)
        z2 = rng.standard_normal(L2)
        x1 = transform.synthesis(ops, chart.from_chart(z1, args.L))
        x2 = transform.synthesis(ops, chart.from_chart(z2, args.L))
        lhs = transform.q_inner(ops, x1, x2)
        rhs = float(np.vdot(transform.analysis(ops, x1), transform.analysis(ops, x2)).real)
        iso_err = max(iso_err, abs(lhs - rhs) / max(1.0, abs(lhs)))
    checks["isometry_relative"] = iso_err

    rt = 0.0
    for _ in range(20):
        a = chart.from_chart(rng.standard_normal(L2), args.L)
        rt = max(rt, float(np.max(np.abs(transform.analysis(ops, transform.synthesis(ops, a)) - a))))
    checks["analysis_synthesis_round_trip"] = rt

    failures = sorted(k for k, v in checks.items() if not v < args.tol)
    report = {
        "L": args.L,
        "tol": args.tol,
        "residuals": checks,
        "failures": failures,
        "pass": not failures,
        "provenance": _provenance(config),
    }
    _write_json(_out_path(args.out, f"verify_operators_L{args.L}.json"), report)
    if failures:
        print(f"verify-operators: FAILED {failures}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# covariance
# ---------------------------------------------------------------------------

def cmd_covariance(args) -> int:
    if args.L < 1:
        raise UsageError("--L must be >= 1")
    if args.samples < 2:
        raise UsageError("--samples must be >= 2 (cannot estimate a covariance otherwise)")
    if args.t <= 0:
        raise UsageError("--t must be > 0")
    config = {
        "command": "covariance", "L": args.L, "samples": args.samples,
        "t": args.t, "seed": args.seed,
    }
    cov = noise.build_covariance(args.L)
    Z = noise.sample_mirrored_bm(cov.Lambda, args.t, args.samples, args.seed)
    emp = noise.empirical_covariance(Z)
    theo = args.t * cov.Sigma

    out_dir = Path(args.out_dir) if args.out_dir else _out_dir() / f"covariance_L{args.L}"
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "covariance_empirical.csv").write_text(noise.sigma_to_csv(emp, args.L))
    (out_dir / "covariance_theoretical.csv").write_text(noise.sigma_to_csv(theo, args.L))
    summary = {
        "L": args.L,
        "samples": args.samples,
        "t": args.t,
        "rel_frobenius_error": float(np.linalg.norm(emp - theo) / np.linalg.norm(theo)),
        "max_abs_entry_error": float(np.max(np.abs(emp - theo))),
        "provenance": _provenance(config),
    }
    _write_json(out_dir / "summary.json", summary)
    return 0


# ---------------------------------------------------------------------------
# diffuse
# ---------------------------------------------------------------------------

_DIFFUSE_DEFAULTS = {
    "L": 4, "beta_min": 0.1, "beta_max": 10.0, "T": 1.0, "steps": 1000,
    "n": 1000, "seed": 0, "domain": "frequency", "direction": "forward",
    "score": "none", "raw": False,
    "data_seed": None, "data_mean_scale": 0.25, "data_cov_scale": 0.04,
}


def _resolve_diffuse_config(args) -> dict:
    cfg = dict(_DIFFUSE_DEFAULTS)
    flags = {k: v for k, v in {
        "direction": args.direction, "domain": args.domain, "score": args.score,
        "L": args.L, "n": args.n, "steps": args.steps, "seed": args.seed,
    }.items() if v is not None}
    cfg.update(flags)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}")
        section = loaded.pop("diffuse", {})
        cfg.update(loaded)
        cfg.update(section)
    return cfg


def _surrogate_gaussian(L: int, mean_scale: float, cov_scale: float, seed):
    """Seeded data Gaussian N(mu, S) in chart coordinates, S symmetric PD."""
    d = L * L
    rng = np.random.default_rng(seed)
    mu = rng.normal(0.0, mean_scale, d)
    A = rng.normal(0.0, np.sqrt(cov_scale) / np.sqrt(d), (d, d))
    S = A @ A.T + cov_scale * np.eye(d)
    return mu, S


def cmd_diffuse(args) -> int:
    cfg = _resolve_diffuse_config(args)
    if cfg["direction"] not in ("forward", "reverse"):
        raise UsageError(f"unknown direction {cfg['direction']!r}")
    if cfg["domain"] not in ("spatial", "frequency"):
        raise UsageError(f"unknown domain {cfg['domain']!r}")
    if cfg["score"] not in ("none", "gaussian-analytic"):
        raise UsageError(f"unknown score {cfg['score']!r}")
    if cfg["direction"] == "reverse" and cfg["score"] == "none":
        raise UsageError("reverse integration requires --score gaussian-analytic")
    if int(cfg["steps"]) < 1:
        raise UsageError("steps must be >= 1")
    if int(cfg["n"]) < 0:
        raise UsageError("n must be >= 0")
    if int(cfg["L"]) < 1:
        raise UsageError("L must be >= 1")

    L, n = int(cfg["L"]), int(cfg["n"])
    schedule = sde.VpSchedule(
        beta_min=float(cfg["beta_min"]), beta_max=float(cfg["beta_max"]),
        T=float(cfg["T"]), steps=int(cfg["steps"]),
    )
    seed = cfg["seed"]
    data_seed = cfg["data_seed"] if cfg["data_seed"] is not None else (
        None if seed is None else int(seed) + 1
    )
    ops = transform.build_operators(L)
    cov = noise.build_covariance(L)
    M = chart.synthesis_matrix(ops)
    domain = "chart" if cfg["domain"] == "frequency" else "spatial"
    d = L * L if domain == "chart" else ops.d_spatial

    use_gaussian = cfg["score"] == "gaussian-analytic"
    mu = S = None
    if use_gaussian:
        mu, S = _surrogate_gaussian(
            L, float(cfg["data_mean_scale"]), float(cfg["data_cov_scale"]), data_seed
        )
        z0 = np.random.default_rng(data_seed).multivariate_normal(mu, S, size=n, method="eigh")
        start = z0 if domain == "chart" else z0 @ M.T
    else:
        start = np.zeros((n, d))

    state = sde.DiffusionState(time=0.0, values=start, domain=domain)
    if domain == "chart":
        fwd = sde.frequency_forward_stepper(schedule, cov.Lambda)
    else:
        fwd = sde.spatial_forward_stepper(schedule)

    aborted = []
    if cfg["direction"] == "forward":
        state, ab, _ = sde.integrate(state, schedule, "forward", fwd, seed)
        aborted += ab
    else:
        state, ab, _ = sde.integrate(state, schedule, "forward", fwd, seed)
        aborted += ab
        if domain == "chart":
            score = sde.gaussian_chart_score(mu, S, cov.Sigma, schedule)
            rev = sde.frequency_reverse_stepper(schedule, cov.Sigma, cov.Lambda, score)
        else:
            score = sde.gaussian_spatial_score(M @ mu, M @ S @ M.T, schedule)
            rev = sde.spatial_reverse_stepper(schedule, score)
        state, ab, _ = sde.integrate(
            state, schedule, "reverse", rev, None if seed is None else int(seed) + 2
        )
        aborted += ab

    out = _out_path(args.out, f"diffuse_{cfg['direction']}_{cfg['domain']}_L{L}.csv")
    meta = {
        "L": L, "t": state.time, "n": n, "seed": seed,
        "domain": cfg["domain"], "direction": cfg["direction"],
        "provenance": _provenance(cfg),
    }
    noise.save_samples(out, state.values, meta, raw=bool(cfg["raw"]))

    if use_gaussian and cfg["direction"] == "reverse" and n > 1:
        target_mu = mu if domain == "chart" else M @ mu
        target_cov = S if domain == "chart" else M @ S @ M.T
        rec_mu = state.values.mean(axis=0)
        rec_cov = noise.empirical_covariance(state.values)
        diag = {
            "mean_rel_error": float(
                np.linalg.norm(rec_mu - target_mu) / np.linalg.norm(target_mu)
            ),
            "cov_rel_frobenius_error": float(
                np.linalg.norm(rec_cov - target_cov) / np.linalg.norm(target_cov)
            ),
            "aborted_paths": aborted,
            "provenance": _provenance(cfg),
        }
        _write_json(Path(str(out) + ".diagnostics.json"), diag)

    if aborted:
        print(f"diffuse: {len(aborted)} path(s) aborted (non-finite): "
              f"{aborted[:10]}", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# bound-check
# ---------------------------------------------------------------------------

def cmd_bound_check(args) -> int:
    if args.L < 1:
        raise UsageError("--L must be >= 1")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    config = {"command": "bound-check", "L": args.L, "trials": args.trials, "seed": args.seed}
    ops = transform.build_operators(args.L)
    cov = noise.build_covariance(args.L)
    report = lossmap.check_theorem2_bound(
        ops, cov.Sigma, sde.VpSchedule(), args.trials, args.seed
    )
    bops = lossmap.build_bound_operators(ops, cov.Sigma)
    L2 = ops.d_spectral
    report["identity_residuals"] = {
        "t_tplus_minus_identity": float(np.max(np.abs(bops.T @ bops.Tplus - np.eye(L2)))),
        "t_z": float(np.max(np.abs(bops.T @ bops.Z))),
        "m_minus_tplus_plus_z": float(np.max(np.abs(bops.M - (bops.Tplus + bops.Z)))),
        "sigma_condition_number": bops.sigma_cond,
    }
    report["provenance"] = _provenance(config)
    _write_json(_out_path(args.out, f"bound_check_L{args.L}.json"), report)
    if report["violations"]:
        print(f"bound-check: {report['violations']} violation(s), "
              f"min slack {report['min_slack']:.3e}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# sliced-w
# ---------------------------------------------------------------------------

def cmd_sliced_w(args) -> int:
    if args.n_proj < 1:
        raise UsageError("--n-proj must be >= 1")
    if args.p < 1:
        raise UsageError("--p must be >= 1")
    config = {
        "command": "sliced-w", "a": str(args.a), "b": str(args.b),
        "n_proj": args.n_proj, "p": args.p, "seed": args.seed,
    }
    try:
        A, meta_a = noise.load_samples(args.a)
        B, meta_b = noise.load_samples(args.b)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load sample files: {exc}")
    if A.shape[1] != B.shape[1]:
        raise UsageError(
            f"sample sets are not comparable: d={A.shape[1]} vs d={B.shape[1]} "
            f"(domains {meta_a.get('domain')!r} vs {meta_b.get('domain')!r})"
        )
    res = metrics.sliced_wasserstein(A, B, p=args.p, n_proj=args.n_proj, seed=args.seed)
    payload = {
        "sw": res.value,
        "se": res.se,
        "ci2se": list(res.ci2se),
        "n_proj": res.n_proj,
        "p": res.p,
        "seed": args.seed,
        "provenance": _provenance(config),
    }
    _write_json(_out_path(args.out, "sliced_w.json"), payload)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spherediff", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-operators", help="operator identity residual suite")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_verify_operators)

    p = sub.add_parser("covariance", help="empirical vs theoretical chart covariance")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--samples", type=int, default=50_000)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_covariance)

    p = sub.add_parser("diffuse", help="forward/reverse diffusion sampling")
    p.add_argument("--config", help="JSON config; overrides flags")
    p.add_argument("--direction", choices=["forward", "reverse"])
    p.add_argument("--domain", choices=["spatial", "frequency"])
    p.add_argument("--score", choices=["none", "gaussian-analytic"])
    p.add_argument("--L", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_diffuse)

    p = sub.add_parser("bound-check", help="frequency-vs-spatial loss bound trials")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bound_check)

    p = sub.add_parser("sliced-w", help="sliced Wasserstein distance between sample files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--n-proj", type=int, default=1000)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sliced_w)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"spherediff {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except sde.BlowUpError as exc:
        print(f"spherediff {args.command}: aborted: {exc}", file=sys.stderr)
        return 3
    except NumericalCheckFailure as exc:
        print(f"spherediff {args.command}: check failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
