"""Config-driven batch front door.

Subcommands: ``lift`` (integrate the path-lifting equation and write the
trace CSV plus a summary report), ``check`` (sampling-based hypothesis
falsification), ``validate`` (oracle identity suite), ``list-problems``.

Config files are INI-style sectioned key/value text; unknown keys are
rejected.  Exit codes: 0 success / Reached, 1 configuration or setup
error, 2 singular terminal lift, 3 other lift termination, 4 a checked
condition was falsified on the sample, 5 validation failure.

Artifacts are written to a temporary file and atomically renamed, so a
failed run never leaves a partial file behind.
"""

import argparse
import configparser
import logging
import os
import sys
import tempfile

import numpy as np

from . import endpoint, hypotheses, maps, oracle_checks, paths, solver
from .errors import ConfigurationError, InvalidXi

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SINGULAR_TERMINAL = 2
EXIT_OTHER_TERMINATION = 3
EXIT_FALSIFIED = 4
EXIT_VALIDATE_FAIL = 5


def _fmt(x):
    """Shortest-ish round-trip decimal at 17 significant digits."""
    return format(float(x), ".17g")


# --------------------------------------------------------------------------
# config parsing


def _parse_vector(text, key):
    try:
        parts = [p for p in text.replace(",", " ").split() if p]
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigurationError(f"{key}: expected a list of numbers, "
                                 f"got {text!r}") from None


def _parse_matrix(text, key):
    rows = [r.strip() for r in text.split(";") if r.strip()]
    if not rows:
        raise ConfigurationError(f"{key}: empty matrix")
    parsed = [_parse_vector(r, key) for r in rows]
    width = len(parsed[0])
    if any(len(r) != width for r in parsed):
        raise ConfigurationError(f"{key}: ragged matrix rows")
    return np.vstack(parsed)


def _parse_bool(text, key):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got {text!r}")


_PARSERS = {
    "float": lambda t, k: float(t),
    "int": lambda t, k: int(t),
    "str": lambda t, k: t.strip(),
    "bool": _parse_bool,
    "vector": _parse_vector,
    "matrix": _parse_matrix,
}

# section -> key -> (type, default); REQUIRED means no default
REQUIRED = object()

_SCHEMA = {
    "problem": {
        "kind": ("str", REQUIRED),
        "map": ("str", None),
        "dim": ("int", None),
        "weights": ("vector", None),
        "matrix": ("matrix", None),
        "system": ("str", None),
        "state_dim": ("int", None),
        "lti_a": ("matrix", None),
        "lti_b": ("matrix", None),
        "x0": ("vector", None),
        "horizon": ("float", None),
        "segments": ("int", None),
        "substeps": ("int", 8),
        "u0": ("vector", None),
        "u0_constant": ("vector", None),
    },
    "path": {
        "kind": ("str", "line"),
        "target": ("vector", None),
        "waypoints": ("matrix", None),
    },
    "solver": {
        "ds_init": ("float", 1e-2),
        "ds_min": ("float", 1e-12),
        "ds_event": ("float", 1e-6),
        "tol_ode": ("float", 1e-8),
        "tol_ode_abs": ("float", 1e-10),
        "tol_residual": ("float", 1e-10),
        "tol_init": ("float", 1e-6),
        "correction": ("bool", True),
        "terminal_window": ("float", 1e-3),
        "max_steps": ("int", 200_000),
    },
    "check": {
        "radii": ("vector", None),
        "per_radius": ("int", 8),
        "z_samples": ("int", 8),
        "seed": ("int", 0),
        "lambda0": ("float", 1e-6),
        "r_min": ("float", None),
        "xi_c": ("float", None),
        "xi_p": ("float", None),
    },
    "output": {
        "csv": ("str", "trace.csv"),
        "report": ("str", "report.txt"),
        "shells_csv": ("str", "shells.csv"),
    },
}

_POSITIVE_KEYS = {
    ("solver", "ds_init"), ("solver", "ds_min"), ("solver", "ds_event"),
    ("solver", "tol_ode"), ("solver", "tol_ode_abs"),
    ("solver", "tol_residual"), ("solver", "tol_init"),
    ("solver", "terminal_window"), ("problem", "horizon"),
    ("check", "lambda0"),
}


def parse_config(text):
    """Parse and validate sectioned key/value config text."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    cfg = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigurationError(
                    f"unknown config key {section}.{key}")
    for section, keys in _SCHEMA.items():
        cfg[section] = {}
        for key, (kind, default) in keys.items():
            if cp.has_option(section, key):
                raw = cp.get(section, key)
                value = _PARSERS[kind](raw, f"{section}.{key}")
            elif default is REQUIRED:
                raise ConfigurationError(
                    f"missing required config key {section}.{key}")
            else:
                value = default
            cfg[section][key] = value
    for section, key in _POSITIVE_KEYS:
        value = cfg[section][key]
        if value is not None and value <= 0:
            raise ConfigurationError(f"{section}.{key} must be positive")
    if cfg["problem"]["segments"] is not None \
            and cfg["problem"]["segments"] < 1:
        raise ConfigurationError("problem.segments must be >= 1")
    xi_p = cfg["check"]["xi_p"]
    if xi_p is not None and xi_p > 1.0:
        raise ConfigurationError(
            f"check.xi_p = {xi_p}: the reciprocal integral of xi must "
            "diverge, which requires p <= 1")
    return cfg


def _require(cfg, section, key):
    value = cfg[section][key]
    if value is None:
        raise ConfigurationError(
            f"missing required config key {section}.{key} for this problem")
    return value


def build_problem(cfg):
    """Build (oracle, u0 or None) from the problem section."""
    prob = cfg["problem"]
    kind = prob["kind"]
    if kind == "linear":
        oracle = maps.LinearMap(_require(cfg, "problem", "matrix"),
                                weights=prob["weights"])
    elif kind == "builtin-map":
        name = _require(cfg, "problem", "map")
        if name == "sphere":
            oracle = maps.SphereMap(_require(cfg, "problem", "dim"),
                                    weights=prob["weights"])
        elif name == "fold":
            oracle = maps.FoldMap(weights=prob["weights"])
        elif name == "linear":
            oracle = maps.LinearMap(_require(cfg, "problem", "matrix"),
                                    weights=prob["weights"])
        else:
            raise ConfigurationError(
                f"problem.map: unknown builtin map {name!r}")
    elif kind == "endpoint":
        name = _require(cfg, "problem", "system")
        params = {}
        if name == "lti":
            params = {"A": _require(cfg, "problem", "lti_a"),
                      "B": _require(cfg, "problem", "lti_b")}
        elif name == "single-integrator" and prob["state_dim"] is not None:
            params = {"dim": prob["state_dim"]}
        oracle = endpoint.endpoint_problem(
            name, _require(cfg, "problem", "x0"),
            _require(cfg, "problem", "horizon"),
            _require(cfg, "problem", "segments"),
            system_params=params, substeps=prob["substeps"])
    else:
        raise ConfigurationError(
            f"problem.kind must be one of builtin-map | linear | endpoint, "
            f"got {kind!r}")
    u0 = prob["u0"]
    if u0 is None and prob["u0_constant"] is not None:
        if kind != "endpoint":
            raise ConfigurationError(
                "problem.u0_constant only applies to endpoint problems")
        u0 = oracle.grid.constant(prob["u0_constant"])
    if u0 is not None and len(u0) != oracle.dim_domain:
        raise ConfigurationError(
            f"problem.u0 must have length {oracle.dim_domain}, "
            f"got {len(u0)}")
    return oracle, u0


def build_path(cfg, oracle, u0):
    sec = cfg["path"]
    kind = sec["kind"]
    if kind == "line":
        target = _require(cfg, "path", "target")
        if len(target) != oracle.dim_codomain:
            raise ConfigurationError(
                f"path.target must have length {oracle.dim_codomain}")
        return paths.line_to_target(oracle, u0, target)
    if kind == "polyline":
        waypoints = _require(cfg, "path", "waypoints")
        if waypoints.shape[1] != oracle.dim_codomain:
            raise ConfigurationError(
                f"path.waypoints columns must equal {oracle.dim_codomain}")
        return paths.PolylinePath(waypoints)
    raise ConfigurationError(
        f"path.kind must be line or polyline, got {kind!r}")


def build_options(cfg):
    sec = cfg["solver"]
    return solver.SolverOptions(
        ds_init=sec["ds_init"], ds_min=sec["ds_min"],
        ds_event=sec["ds_event"], tol_ode=sec["tol_ode"],
        tol_ode_abs=sec["tol_ode_abs"], tol_residual=sec["tol_residual"],
        tol_init=sec["tol_init"], correction=sec["correction"],
        terminal_window=sec["terminal_window"],
        max_steps=sec["max_steps"])


def build_plan(cfg, seed_override=None):
    sec = cfg["check"]
    radii = sec["radii"]
    if radii is None:
        radii = np.array([1.0, 2.0, 4.0, 8.0])
    r_min = sec["r_min"]
    if r_min is not None and np.any(radii < r_min):
        raise ConfigurationError(
            "check.radii must all be >= check.r_min")
    seed = sec["seed"] if seed_override is None else seed_override
    plan = hypotheses.SamplingPlan(
        radii=tuple(float(r) for r in radii),
        per_radius=sec["per_radius"], z_samples=sec["z_samples"],
        seed=int(seed))
    xi = None
    if sec["xi_c"] is not None or sec["xi_p"] is not None:
        c = sec["xi_c"] if sec["xi_c"] is not None else 1.0
        p = sec["xi_p"] if sec["xi_p"] is not None else 1.0
        xi = hypotheses.PowerLawXi(c=c, p=p)
    return plan, xi, sec["lambda0"]


# --------------------------------------------------------------------------
# artifact writers


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_csv_text(report, oracle):
    """Render the trace with the fixed column schema."""
    n = oracle.dim_codomain
    header = (["s"] + [f"lambda_{i + 1}" for i in range(n)]
              + ["a_1", "h", "f", "g", "norm_u", "norm_dudS", "residual",
                 "step_size", "flags"])
    lines = [",".join(header)]
    for st in report.trace:
        row = [_fmt(st.s)]
        row += [_fmt(lam) for lam in st.spectrum.lambdas]
        row.append(_fmt(st.diag.a[0]))
        row.append(_fmt(st.diag.h))
        row.append(_fmt(st.diag.f))
        row.append("" if not np.isfinite(st.diag.g) else _fmt(st.diag.g))
        row.append(_fmt(oracle.norm(st.u)))
        row.append(_fmt(st.udot_norm))
        row.append(_fmt(st.residual))
        row.append(_fmt(st.step_size))
        row.append(st.flags.replace(",", " "))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def lift_report_text(report):
    bound = report.bound_check_max
    return (
        "lift summary\n"
        f"status = {report.status}\n"
        f"message = {report.message}\n"
        f"accepted states = {len(report.trace)}\n"
        f"final s = {_fmt(report.trace[-1].s)}\n"
        f"final residual = {_fmt(report.final_residual)}\n"
        f"g integral (trapezoid of |g|) = {_fmt(report.g_integral)}\n"
        f"total variation of norm_u = {_fmt(report.u_norm_variation)}\n"
        f"velocity bound check max = {_fmt(bound)}\n"
        f"lambda0 measured = {_fmt(report.lambda0_measured)}\n"
        f"max path speed = {_fmt(report.max_gamma_dot)}\n")


def shells_csv_text(hyp_report):
    header, rows = hyp_report.shell_rows()
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            str(v) if isinstance(v, int) else _fmt(v) for v in row))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# subcommands


def run_lift(cfg, out_dir):
    oracle, u0 = build_problem(cfg)
    if u0 is None:
        raise ConfigurationError(
            "problem.u0 (or u0_constant) is required for lift")
    path = build_path(cfg, oracle, u0)
    opts = build_options(cfg)
    report = solver.lift(oracle, path, u0, opts)
    _atomic_write(os.path.join(out_dir, cfg["output"]["csv"]),
                  trace_csv_text(report, oracle))
    _atomic_write(os.path.join(out_dir, cfg["output"]["report"]),
                  lift_report_text(report))
    if report.status == solver.REACHED:
        return EXIT_OK
    if report.status == solver.SINGULAR_TERMINAL:
        return EXIT_SINGULAR_TERMINAL
    return EXIT_OTHER_TERMINATION


def run_check(cfg, out_dir, seed_override=None):
    oracle, _ = build_problem(cfg)
    plan, xi, lambda0 = build_plan(cfg, seed_override)
    report = hypotheses.check_report(oracle, plan, lambda0=lambda0, xi=xi)
    _atomic_write(os.path.join(out_dir, cfg["output"]["report"]),
                  report.to_text())
    _atomic_write(os.path.join(out_dir, cfg["output"]["shells_csv"]),
                  shells_csv_text(report))
    return EXIT_FALSIFIED if report.falsified else EXIT_OK


def run_validate(cfg, seed_override=None):
    oracle, _ = build_problem(cfg)
    seed = 0 if seed_override is None else seed_override
    results = oracle_checks.validate_oracle(oracle, seed=seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(r.line())
    if failed:
        print(f"first violated identity: {failed[0].name}")
        return EXIT_VALIDATE_FAIL
    return EXIT_OK


def run_list_problems():
    print("builtin maps:")
    for name in maps.MAP_NAMES:
        print(f"  {name}")
    print("control systems (problem.kind = endpoint):")
    for name in endpoint.SYSTEM_NAMES:
        print(f"  {name}")
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


def _setup_logging():
    level_name = os.environ.get("TOOL_LOG", "error").lower()
    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(level_name, logging.ERROR)
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _setup_logging()
    parser = argparse.ArgumentParser(
        prog="pathlift",
        description="path-lifting continuation runner")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("lift", "check", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out-dir", default=".")
        p.add_argument("--seed", type=int, default=None)
    sub.add_parser("list-problems")
    args = parser.parse_args(argv)

    if args.command == "list-problems":
        return run_list_problems()

    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if args.command == "lift":
            return run_lift(cfg, args.out_dir)
        if args.command == "check":
            return run_check(cfg, args.out_dir, args.seed)
        return run_validate(cfg, args.seed)
    except (ConfigurationError, InvalidXi, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
