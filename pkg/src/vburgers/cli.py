"""Batch experiment runner.

Reads a strict JSON configuration, runs the requested checks, and writes
deterministic CSV/JSON artifacts (plus optional field snapshots) to the
output directory.  No interactive steering; exit status reports the
overall verdict.

Exit codes: 0 all checks pass, 1 at least one check fails (reports are
still written), 2 configuration error, 3 numerical divergence.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import ConfigError, DivergenceError, ResolutionError, WindowError
from .fields import GridSpec, ScalarField, Trajectory, VectorField, gradient, make_trig_field, write_snapshot
from .forcing import GradientForcing, TrigForcing, ZeroForcing
from .heat import heat_apply, holder_scaling_probe, lacunary_field
from .norms import compute_k_constants, interpolation_gap, sup_norm
from .oracle import COLE_HOPF_LAMBDA, cole_hopf, residual
from .scheme import SchemeConfig, compute_t_init, records_to_csv, run_picard, run_summary_json
from .transport import TransportProblem
from .verify import ParabolicBall, check_gronwall, check_schauder_instance, check_short_time, check_uniform

# registry: check name -> (one-line description, implementing operation)
REGISTRY = {
    "uniform_estimates": (
        "iterate-uniform sup bounds on u, its gradient and its second derivatives against the reference constants",
        "verify.check_uniform",
    ),
    "short_time": (
        "per-iterate contraction of the updates inside the short-time window, with fitted decay exponents",
        "verify.check_short_time",
    ),
    "gronwall": (
        "stability of transport solutions under coefficient perturbations via the exponential amplification bound",
        "verify.check_gronwall",
    ),
    "schauder": (
        "local gradient estimates on parabolic balls; implied constants probed across scales",
        "verify.check_schauder_instance",
    ),
    "interpolation": (
        "sup-gradient interpolation control of Hoelder seminorms on randomized fields",
        "norms.interpolation_gap",
    ),
    "heat_scaling": (
        "smoothing rate of the heat semigroup on a rough lacunary datum (log-log slope fit)",
        "heat.holder_scaling_probe",
    ),
    "oracle_compare": (
        "fixed point of the iteration against the exact logarithmic-gradient solution",
        "oracle.cole_hopf",
    ),
}

_GRID_KEYS = {"d", "n", "L"}
_SCHEME_KEYS = {"nu", "c", "alpha", "beta", "T", "dt", "m_max", "tol_fp", "seed"}
_DATA_KINDS = {
    "zero": set(),
    "constant": {"value"},
    "trig": {"seed", "kmax", "amplitude"},
    "cole_hopf": {"epsilon"},
    "lacunary": {"alpha", "seed"},
}
_FORCING_KINDS = {
    "zero": set(),
    "trig": {"seed", "kmax", "amplitude", "omega", "mod"},
    "gradient": {"seed", "kmax", "amplitude", "omega", "mod"},
}
_TOP_KEYS = {"name", "grid", "scheme", "data", "forcing", "checks", "out_dir", "snapshots"}


def _require_keys(section: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {sorted(missing)}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _require_keys(raw, _TOP_KEYS, {"name", "grid", "scheme", "checks"}, "config")
    _require_keys(raw["grid"], _GRID_KEYS, _GRID_KEYS, "grid")
    _require_keys(raw["scheme"], _SCHEME_KEYS, {"T", "dt"}, "scheme")
    data = raw.get("data", {"kind": "zero"})
    if "kind" not in data or data["kind"] not in _DATA_KINDS:
        raise ConfigError(f"data.kind must be one of {sorted(_DATA_KINDS)}")
    _require_keys({k: v for k, v in data.items() if k != "kind"}, _DATA_KINDS[data["kind"]], _DATA_KINDS[data["kind"]], f"data({data['kind']})")
    forcing = raw.get("forcing", {"kind": "zero"})
    if "kind" not in forcing or forcing["kind"] not in _FORCING_KINDS:
        raise ConfigError(f"forcing.kind must be one of {sorted(_FORCING_KINDS)}")
    allowed_f = _FORCING_KINDS[forcing["kind"]]
    _require_keys({k: v for k, v in forcing.items() if k != "kind"}, allowed_f, allowed_f - {"omega", "mod"}, f"forcing({forcing['kind']})")
    for chk in raw["checks"]:
        if chk not in REGISTRY:
            raise ConfigError(f"unknown check {chk!r}; see the registry ('list' verb)")
    raw.setdefault("data", data)
    raw.setdefault("forcing", forcing)
    return raw


def _build_grid(section: dict) -> GridSpec:
    try:
        return GridSpec(int(section["d"]), int(section["n"]), float(section["L"]))
    except ValueError as e:
        raise ConfigError(str(e))


def _build_scheme(section: dict, grid: GridSpec) -> SchemeConfig:
    try:
        return SchemeConfig(grid=grid, **{k: section[k] for k in _SCHEME_KEYS if k in section})
    except ValueError as e:
        raise ConfigError(str(e))


def _cole_hopf_potential(grid: GridSpec, epsilon: float) -> ScalarField:
    if not 0 < epsilon < 1:
        raise ConfigError("epsilon must be in (0, 1) to keep the potential positive")
    mesh = grid.mesh()
    vals = 1.0 + epsilon * np.cos(2 * np.pi / grid.L * mesh[0])
    for ax in range(1, grid.d):
        vals = vals + epsilon / (ax + 1) * np.cos(2 * np.pi / grid.L * mesh[ax])
    return ScalarField(grid, vals)


def _build_data(section: dict, grid: GridSpec):
    """Returns (u0, exact_phi0 or None)."""
    kind = section["kind"]
    if kind == "zero":
        return VectorField.zero(grid), None
    if kind == "constant":
        return VectorField.constant(grid, section["value"]), None
    if kind == "trig":
        try:
            return make_trig_field(grid, int(section["seed"]), int(section["kmax"]), float(section["amplitude"])), None
        except ResolutionError as e:
            raise ConfigError(str(e))
    if kind == "cole_hopf":
        phi0 = _cole_hopf_potential(grid, float(section["epsilon"]))
        return gradient(ScalarField(grid, np.log(phi0.values))) * COLE_HOPF_LAMBDA, phi0
    # lacunary: rough scalar profile placed in the first component
    f = lacunary_field(grid, float(section["alpha"]), int(section["seed"]))
    comps = [f.values] + [np.zeros(grid.shape) for _ in range(grid.d - 1)]
    return VectorField.from_arrays(grid, comps), None


def _build_forcing(section: dict, grid: GridSpec):
    kind = section["kind"]
    if kind == "zero":
        return ZeroForcing(grid)
    kw = dict(omega=float(section.get("omega", 1.0)), mod=float(section.get("mod", 0.5)))
    if kind == "trig":
        return TrigForcing(grid, int(section["seed"]), int(section["kmax"]), float(section["amplitude"]), **kw)
    pot_vec = make_trig_field(grid, int(section["seed"]), int(section["kmax"]), float(section["amplitude"]))
    return GradientForcing(pot_vec.components[0], **kw)


# ---------------------------------------------------------------------------
# artifact emission


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_report(out_dir: str, stem: str, report) -> None:
    _atomic_write(os.path.join(out_dir, stem + ".json"), report.to_json())
    _atomic_write(os.path.join(out_dir, stem + ".csv"), report.to_csv())


# ---------------------------------------------------------------------------
# experiment execution


def _run_checks(cfg: dict, out_dir: str) -> bool:
    grid = _build_grid(cfg["grid"])
    scheme_cfg = _build_scheme(cfg["scheme"], grid)
    u0, phi0 = _build_data(cfg["data"], grid)
    g = _build_forcing(cfg["forcing"], grid)
    checks = list(cfg["checks"])
    all_pass = True

    needs_picard = bool({"uniform_estimates", "short_time", "oracle_compare", "gronwall"} & set(checks))
    records = fixed_point = None
    if needs_picard:
        holder = "uniform_estimates" in checks
        records, fixed_point, converged = run_picard(scheme_cfg, u0, g, record_holder=holder)
        _atomic_write(os.path.join(out_dir, "records.csv"), records_to_csv(records))
        t_init = compute_t_init(u0, g, c=scheme_cfg.c, alpha=scheme_cfg.alpha)
        kc = compute_k_constants(u0, g, scheme_cfg.T, c=scheme_cfg.c, alpha=scheme_cfg.alpha, nu=scheme_cfg.nu)
        res = residual(fixed_point, g).max if len(fixed_point) >= 3 else math.nan
        _atomic_write(os.path.join(out_dir, "summary.json"), run_summary_json(t_init, converged, res, kc))
        _atomic_write(os.path.join(out_dir, "kconstants.json"), kc.to_json())
        if cfg.get("snapshots"):
            write_snapshot(u0, os.path.join(out_dir, "u0.bfld"))
            write_snapshot(fixed_point.frame(len(fixed_point) - 1), os.path.join(out_dir, "u_final.bfld"))

    def kfn(t):
        return compute_k_constants(u0, g, t, c=1.0, alpha=scheme_cfg.alpha, seed=scheme_cfg.seed)

    for chk in checks:
        if chk == "uniform_estimates":
            reports = check_uniform(records, kfn, c=scheme_cfg.c, alpha=scheme_cfg.alpha)
            for key, rep in reports.items():
                _emit_report(out_dir, f"uniform_{key}", rep)
                all_pass &= rep.passed
        elif chk == "short_time":
            try:
                reports = check_short_time(records, kfn, c=scheme_cfg.c, beta=scheme_cfg.beta)
            except WindowError as e:
                raise ConfigError(str(e))
            for key, rep in reports.items():
                _emit_report(out_dir, f"short_time_{key}", rep)
                all_pass &= rep.passed
        elif chk == "gronwall":
            rep = _gronwall_pair(scheme_cfg, u0, g)
            _emit_report(out_dir, "gronwall", rep)
            all_pass &= rep.passed
        elif chk == "schauder":
            ok = _schauder_sweep(scheme_cfg, u0, out_dir)
            all_pass &= ok
        elif chk == "interpolation":
            ok = _interpolation_battery(scheme_cfg, grid, out_dir)
            all_pass &= ok
        elif chk == "heat_scaling":
            ok = _heat_scaling(scheme_cfg, grid, out_dir)
            all_pass &= ok
        elif chk == "oracle_compare":
            if phi0 is None:
                raise ConfigError("oracle_compare requires the cole_hopf data scenario")
            exact = cole_hopf(phi0, None, scheme_cfg.T, scheme_cfg.dt)
            diff = max(sup_norm(a - b) for a, b in zip(fixed_point.frames, exact.frames))
            passed = diff <= 1e-5
            _atomic_write(
                os.path.join(out_dir, "oracle_compare.json"),
                json.dumps({"sup_difference": diff, "tolerance": 1e-5, "verdict": "pass" if passed else "fail"}),
            )
            all_pass &= passed
    return all_pass


def _gronwall_pair(scheme_cfg: SchemeConfig, u0: VectorField, g):
    """Deterministic perturbed coefficient pair derived from the config seed."""
    grid = scheme_cfg.grid
    rng = np.random.default_rng(scheme_cfg.seed)
    eps = 0.05 * (1.0 + rng.random())
    b = u0
    b_bar = u0 + VectorField.constant(grid, [eps] * grid.d)
    C_bar = eps * np.eye(grid.d)
    f_bar = TrigForcing(grid, scheme_cfg.seed + 1, 2, eps)
    p = TransportProblem(u0=u0, b=b, C=None, f=g, T=scheme_cfg.T, dt=scheme_cfg.dt)
    p_bar = TransportProblem(u0=u0, b=b_bar, C=C_bar, f=f_bar, T=scheme_cfg.T, dt=scheme_cfg.dt)
    return check_gronwall(p, p_bar)


def _schauder_sweep(scheme_cfg: SchemeConfig, u0: VectorField, out_dir: str) -> bool:
    """Implied constant of the gradient bound across ball scales on pure heat flow."""
    grid = scheme_cfg.grid
    T, dt = scheme_cfg.T, scheme_cfg.dt
    n_frames = int(round(T / dt)) + 1
    frames = tuple(heat_apply(u0, k * dt) for k in range(n_frames))
    traj = Trajectory(grid, 0.0, dt, frames)
    M = 2.0
    js = [j for j in range(0, -5, -1) if M**j <= T and M ** (j / 2.0) <= grid.L / 2]
    if not js:
        raise ConfigError("no parabolic ball fits the configured horizon and torus")
    center = tuple(0.0 for _ in range(grid.d))
    constants = []
    for j in js:
        rep = check_schauder_instance(traj, None, None, None, ParabolicBall(T, center, j, M), scheme_cfg.alpha, "grad_sup")
        _emit_report(out_dir, f"schauder_j{abs(j)}", rep)
        constants.append(rep.c_star)
    pos = [c for c in constants if c > 0]
    passed = bool(pos) and max(pos) / min(pos) < 2.0
    _atomic_write(
        os.path.join(out_dir, "schauder_sweep.json"),
        json.dumps({"j": js, "implied_constants": constants, "verdict": "pass" if passed else "fail"}),
    )
    return passed


def _interpolation_battery(scheme_cfg: SchemeConfig, grid: GridSpec, out_dir: str, n_fields: int = 50) -> bool:
    gaps_space, gaps_time = [], []
    for i in range(n_fields):
        u = make_trig_field(grid, scheme_cfg.seed + i, max(2, grid.n // 8), 1.0)
        gaps_space.append(interpolation_gap(u, scheme_cfg.alpha, "space", seed=scheme_cfg.seed))
        frames = tuple(heat_apply(u, 0.01 * k) for k in range(5))
        traj = Trajectory(grid, 0.0, 0.01, frames)
        gaps_time.append(interpolation_gap(traj, scheme_cfg.alpha, "spacetime", seed=scheme_cfg.seed))
    worst = min(min(gaps_space), min(gaps_time))
    passed = worst >= -1e-10
    _atomic_write(
        os.path.join(out_dir, "interpolation.json"),
        json.dumps(
            {
                "n_fields": n_fields,
                "worst_gap_space": min(gaps_space),
                "worst_gap_spacetime": min(gaps_time),
                "verdict": "pass" if passed else "fail",
            }
        ),
    )
    return passed


def _heat_scaling(scheme_cfg: SchemeConfig, grid: GridSpec, out_dir: str) -> bool:
    t_list = np.geomspace(1e-4, 1e-2, 9)
    ok = True
    for kappa in (1, 2):
        rep = holder_scaling_probe(scheme_cfg.alpha, kappa, t_list, grid, scheme_cfg.seed)
        _atomic_write(os.path.join(out_dir, f"heat_scaling_k{kappa}.json"), rep.to_json())
        ok &= abs(rep.slope - rep.predicted_slope) <= 0.05
    return ok


# ---------------------------------------------------------------------------
# entry points


def cmd_run(path: str) -> int:
    try:
        cfg = load_config(path)
        out_dir = os.environ.get("BURGERS_OUT_DIR") or cfg.get("out_dir") or "."
        os.makedirs(out_dir, exist_ok=True)
        ok = _run_checks(cfg, out_dir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (DivergenceError, ResolutionError) as e:
        print(f"divergence: {e}", file=sys.stderr)
        return 3
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_list() -> int:
    for name in sorted(REGISTRY):
        desc, op = REGISTRY[name]
        print(f"{name}: {desc} [{op}]")
    return 0


def registry_targets_exist() -> bool:
    """Every registry entry must name an importable operation (self-test hook)."""
    import importlib

    for _, (_, op) in REGISTRY.items():
        mod_name, attr = op.rsplit(".", 1)
        mod = importlib.import_module(f".{mod_name}", package=__package__)
        if not hasattr(mod, attr):
            return False
    return True


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vburgers", description="verification experiment runner")
    sub = parser.add_subparsers(dest="verb", required=True)
    p_run = sub.add_parser("run", help="run the experiments in a JSON config")
    p_run.add_argument("config", help="path to the configuration file")
    sub.add_parser("list", help="print the experiment registry")
    sub.add_parser("version", help="print the package version")
    args = parser.parse_args(argv)
    if args.verb == "run":
        return cmd_run(args.config)
    if args.verb == "list":
        return cmd_list()
    print(__version__)
    return 0


if __name__ == "__main__":
    sys.exit(main())
