"""Command line interface.

Subcommands::

    beamqubit coupling        --config cfg.yaml --out DIR
    beamqubit discriminate    --config cfg.yaml --out DIR [--shots N --seed K]
    beamqubit recover         --config cfg.yaml --out DIR
    beamqubit project         --config cfg.yaml --out DIR
    beamqubit validate-config --config cfg.yaml

Configs are YAML with a top-level ``experiment`` key naming the
subcommand they are for. Physics inputs are SI; frequencies accept
either a bare number in rad/s or a tagged mapping
``{value: ..., unit: hz | rad/s}`` with ``hz`` converted by 2*pi at
parse time. Unknown keys are rejected rather than ignored, so a typo
cannot silently fall back to a default.

Every run command validates the whole config and finishes the entire
computation before the first byte is written; a failing run leaves the
output directory untouched. Outputs are deterministic: floats are
written with repr (shortest round-trip), JSON keys are sorted, CSV
column order is fixed, and the manifest timestamp honours
SOURCE_DATE_EPOCH so that two runs of the same config can be compared
byte for byte.

Exit codes: 0 success, 2 config error, 3 invalid physics (coupling
regime check with ``strict: true``, or parameters outside their domain),
4 numerical failure (a solver did not converge).
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np
import yaml

from . import __version__
from .constants import CONSTANTS_VERSION
from .couplings import (
    CavityParams,
    FreeSpaceGeometry,
    coupling_phase,
    effective_phi_multipass,
    phi_free_space,
    validate_dispersive_regime,
)
from .distributions import (
    floored,
    fock,
    kl_divergence,
    load_distribution,
    poisson,
    thermal_bsv_proxy,
)
from .protocols import (
    BINARY_ANGLE_CONVENTION,
    PhiGrid,
    binary_schedule,
    characteristic_function,
    discrimination_readout,
    monte_carlo_readout,
    readout_curve,
    recover_exact,
    recover_limited,
    run_projection,
    uniform_schedule,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVALID = 3
EXIT_NUMERIC = 4

EXPERIMENTS = ("coupling", "discriminate", "recover", "project")


class ConfigError(Exception):
    """Structural or schema problem in the config file."""


class ValidityError(Exception):
    """The config is well-formed but describes invalid physics."""


class ConvergenceError(Exception):
    """A solver failed to converge."""


# -- config plumbing ---------------------------------------------------------


def _load_yaml(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config must be a YAML mapping at the top level")
    return data


def _check_keys(node, allowed, context):
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        raise ConfigError(
            f"unknown key(s) in {context}: {', '.join(unknown)}; "
            f"allowed: {', '.join(sorted(allowed))}"
        )


def _section(cfg, key, context="config", required=True):
    node = cfg.get(key)
    if node is None:
        if required:
            raise ConfigError(f"{context} is missing required section '{key}'")
        return None
    if not isinstance(node, dict):
        raise ConfigError(f"'{key}' must be a mapping")
    return node


def _as_float(node, key, context, default=None, required=True):
    if key not in node:
        if required:
            raise ConfigError(f"{context} is missing required field '{key}'")
        return default
    try:
        return float(node[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{context}.{key} must be a number, got {node[key]!r}")


def _as_int(node, key, context, default=None, required=True):
    if key not in node:
        if required:
            raise ConfigError(f"{context} is missing required field '{key}'")
        return default
    value = node[key]
    if isinstance(value, bool) or (
        not isinstance(value, int) and not (isinstance(value, str) and value.isdigit())
    ):
        raise ConfigError(f"{context}.{key} must be an integer, got {value!r}")
    return int(value)


def _as_bool(node, key, context, default):
    value = node.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{context}.{key} must be a boolean, got {value!r}")
    return value


def _angular_rate(node, key, context, default=None, required=True):
    """Frequency field: bare rad/s number or {value, unit: hz|rad/s}."""
    if key not in node:
        if required:
            raise ConfigError(f"{context} is missing required field '{key}'")
        return default
    value = node[key]
    if isinstance(value, dict):
        _check_keys(value, ("value", "unit"), f"{context}.{key}")
        mag = _as_float(value, "value", f"{context}.{key}")
        unit = value.get("unit", "rad/s")
        if unit == "hz":
            return 2.0 * math.pi * mag
        if unit == "rad/s":
            return mag
        raise ConfigError(
            f"{context}.{key}.unit must be 'hz' or 'rad/s', got {unit!r}"
        )
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(
            f"{context}.{key} must be a number or {{value, unit}}, got {value!r}"
        )


def _build_distribution(node, context="distribution"):
    _check_keys(
        node, ("kind", "n", "n_max", "mean", "truncation_tol", "path"), context
    )
    kind = node.get("kind")
    if kind == "fock":
        n = _as_int(node, "n", context)
        n_max = _as_int(node, "n_max", context, default=None, required=False)
        try:
            return fock(n, n_max)
        except ValueError as exc:
            raise ConfigError(f"{context}: {exc}")
    if kind in ("poisson", "thermal_bsv"):
        mean = _as_float(node, "mean", context)
        n_max = _as_int(node, "n_max", context)
        tol = _as_float(node, "truncation_tol", context, default=1e-9, required=False)
        build = poisson if kind == "poisson" else thermal_bsv_proxy
        try:
            return build(mean, n_max, truncation_tol=tol)
        except ValueError as exc:
            raise ValidityError(str(exc))
    if kind == "file":
        path = node.get("path")
        if not isinstance(path, str):
            raise ConfigError(f"{context}.path must be a file path string")
        try:
            return load_distribution(path)
        except FileNotFoundError:
            raise ConfigError(f"{context}.path not found: {path}")
        except ValueError as exc:
            raise ConfigError(f"{context}: {exc}")
    raise ConfigError(
        f"{context}.kind must be one of fock, poisson, thermal_bsv, file; got {kind!r}"
    )


def _build_grid(node, context="grid", default_count=None):
    _check_keys(node, ("kind", "n_max", "phi_max", "count"), context)
    kind = node.get("kind")
    try:
        if kind == "exact":
            return PhiGrid.exact(_as_int(node, "n_max", context))
        if kind == "uniform":
            count = _as_int(
                node,
                "count",
                context,
                default=default_count,
                required=default_count is None,
            )
            return PhiGrid.uniform(_as_float(node, "phi_max", context), count)
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}")
    raise ConfigError(f"{context}.kind must be 'exact' or 'uniform', got {kind!r}")


def _build_schedule(node, context="schedule"):
    _check_keys(node, ("kind", "n_max", "n_star", "phi", "steps"), context)
    kind = node.get("kind")
    try:
        if kind == "binary":
            return binary_schedule(
                _as_int(node, "n_star", context), _as_int(node, "n_max", context)
            )
        if kind == "uniform":
            return uniform_schedule(
                _as_float(node, "phi", context),
                _as_int(node, "n_star", context),
                _as_int(node, "steps", context),
            )
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}")
    raise ConfigError(f"{context}.kind must be 'binary' or 'uniform', got {kind!r}")


def _sweep_means(node, context):
    means = node.get("means")
    if isinstance(means, dict):
        _check_keys(means, ("start", "stop", "count"), f"{context}.means")
        start = _as_float(means, "start", f"{context}.means")
        stop = _as_float(means, "stop", f"{context}.means")
        count = _as_int(means, "count", f"{context}.means")
        if count < 2:
            raise ConfigError(f"{context}.means.count must be >= 2, got {count}")
        if not stop > start:
            raise ConfigError(f"{context}.means needs stop > start")
        return np.linspace(start, stop, count)
    if isinstance(means, (list, tuple)) and means:
        try:
            return np.array([float(m) for m in means])
        except (TypeError, ValueError):
            raise ConfigError(f"{context}.means must contain numbers")
    raise ConfigError(
        f"{context}.means must be a list of means or {{start, stop, count}}"
    )


def _sweep_distributions(node, context="sweep"):
    """One distribution per swept mean, all from the same family."""
    _check_keys(node, ("family", "means", "n_max", "truncation_tol"), context)
    family = node.get("family")
    if family not in ("fock", "poisson", "thermal_bsv"):
        raise ConfigError(
            f"{context}.family must be fock, poisson, or thermal_bsv; got {family!r}"
        )
    means = _sweep_means(node, context)
    tol = _as_float(node, "truncation_tol", context, default=1e-9, required=False)
    n_max = _as_int(
        node, "n_max", context, default=None, required=family != "fock"
    )
    dists = []
    for mu in means:
        if family == "fock":
            if abs(mu - round(mu)) > 1e-9 or mu < 0:
                raise ConfigError(
                    f"{context}: fock sweep means must be integers >= 0, got {mu}"
                )
            dists.append(fock(int(round(mu)), n_max))
        else:
            build = poisson if family == "poisson" else thermal_bsv_proxy
            try:
                dists.append(build(float(mu), n_max, truncation_tol=tol))
            except ValueError as exc:
                raise ValidityError(str(exc))
    return dists


# -- deterministic output helpers --------------------------------------------


def _json_ready(obj):
    """Make a structure JSON-serializable with deterministic text.

    Non-finite floats become their repr strings; numpy scalars/arrays
    become plain Python.
    """
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _json_text(obj):
    return json.dumps(_json_ready(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(repr(float(cell)))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _jsonl_text(rows):
    return "".join(json.dumps(_json_ready(r), sort_keys=True) + "\n" for r in rows)


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = int(epoch) if epoch else int(time.time())
    return datetime.fromtimestamp(moment, timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _write_outputs(out_dir, files, command, cfg, config_path, derived=None, extra=None):
    """Write all output files plus manifest.json.

    ``files`` maps filename to full text content; everything is already
    computed by the time we get here, so a failure before this call
    leaves no partial outputs behind.
    """
    os.makedirs(out_dir, exist_ok=True)
    with open(config_path, "rb") as fh:
        config_sha = hashlib.sha256(fh.read()).hexdigest()
    manifest = {
        "command": command,
        "config": cfg,
        "config_sha256": config_sha,
        "constants_version": CONSTANTS_VERSION,
        "created_utc": _timestamp(),
        "derived": derived or {},
        "outputs": {
            name: hashlib.sha256(text.encode()).hexdigest()
            for name, text in files.items()
        },
        "tool": {"name": "beamqubit", "version": __version__},
    }
    if extra:
        manifest.update(extra)
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w", newline="") as fh:
            fh.write(text)
    with open(os.path.join(out_dir, "manifest.json"), "w", newline="") as fh:
        fh.write(_json_text(manifest))
    return sorted(files) + ["manifest.json"]


# -- experiment preparation (shared with validate-config) ---------------------


def _prepare_coupling(cfg):
    _check_keys(
        cfg,
        ("experiment", "free_space", "cavity", "regime_threshold", "strict"),
        "config",
    )
    free_node = _section(cfg, "free_space", required=False)
    cavity_node = _section(cfg, "cavity", required=False)
    if free_node is None and cavity_node is None:
        raise ConfigError("coupling config needs a 'free_space' or 'cavity' section")
    geom = None
    if free_node is not None:
        _check_keys(
            free_node, ("r_perp", "speed", "qubit_frequency", "alpha"), "free_space"
        )
        try:
            geom = FreeSpaceGeometry(
                r_perp=_as_float(free_node, "r_perp", "free_space"),
                v=_as_float(free_node, "speed", "free_space"),
                omega_0=_angular_rate(
                    free_node, "qubit_frequency", "free_space", default=0.0, required=False
                ),
                alpha=_as_float(free_node, "alpha", "free_space", default=0.0, required=False),
            )
        except ValueError as exc:
            raise ConfigError(f"free_space: {exc}")
    cav = None
    passes = None
    if cavity_node is not None:
        _check_keys(
            cavity_node,
            ("g", "g_el", "delta", "gamma", "T_int", "gamma_sp",
             "g_phase", "g_el_phase", "passes"),
            "cavity",
        )
        try:
            cav = CavityParams(
                g_mag=_angular_rate(cavity_node, "g", "cavity"),
                g_el_mag=_angular_rate(cavity_node, "g_el", "cavity"),
                delta=_angular_rate(cavity_node, "delta", "cavity"),
                gamma=_angular_rate(cavity_node, "gamma", "cavity"),
                T_int=_as_float(cavity_node, "T_int", "cavity"),
                gamma_sp=_angular_rate(
                    cavity_node, "gamma_sp", "cavity", default=0.0, required=False
                ),
                g_phase=_as_float(
                    cavity_node, "g_phase", "cavity", default=0.0, required=False
                ),
                g_el_phase=_as_float(
                    cavity_node, "g_el_phase", "cavity", default=0.0, required=False
                ),
            )
        except ValueError as exc:
            raise ConfigError(f"cavity: {exc}")
        passes = _as_int(cavity_node, "passes", "cavity", default=None, required=False)
        if passes is not None and passes < 1:
            raise ConfigError(f"cavity.passes must be >= 1, got {passes}")
    threshold = _as_float(cfg, "regime_threshold", "config", default=10.0, required=False)
    strict = _as_bool(cfg, "strict", "config", default=False)
    return geom, cav, passes, threshold, strict


def _prepare_discriminate(cfg):
    _check_keys(cfg, ("experiment", "distribution", "grid", "sweep", "phi"), "config")
    sweep_node = _section(cfg, "sweep", required=False)
    if sweep_node is not None:
        if "distribution" in cfg or "grid" in cfg:
            raise ConfigError(
                "sweep mode takes 'sweep' + 'phi' only; drop 'distribution'/'grid'"
            )
        phi = _as_float(cfg, "phi", "config")
        if not (math.isfinite(phi) and phi >= 0.0):
            raise ConfigError(f"phi must be a finite number >= 0, got {phi}")
        return "sweep", _sweep_distributions(sweep_node), phi
    if "phi" in cfg:
        raise ConfigError("top-level 'phi' is only used with 'sweep'")
    dist = _build_distribution(_section(cfg, "distribution"))
    grid = _build_grid(_section(cfg, "grid"))
    return "grid", dist, grid


def _prepare_recover(cfg):
    _check_keys(cfg, ("experiment", "distribution", "grid", "n_max", "method"), "config")
    dist = _build_distribution(_section(cfg, "distribution"))
    n_max = _as_int(cfg, "n_max", "config", default=dist.n_max, required=False)
    if n_max < 0:
        raise ConfigError(f"n_max must be >= 0, got {n_max}")
    grid_node = _section(cfg, "grid")
    # Uniform grids default to n_max + 1 points: as many samples as unknowns.
    grid = _build_grid(grid_node, default_count=n_max + 1)
    method = cfg.get("method", "auto")
    if method not in ("auto", "fourier", "nnls"):
        raise ConfigError(
            f"method must be auto, fourier, or nnls; got {method!r}"
        )
    grid_is_exact = grid_node.get("kind") == "exact" and len(grid) == n_max + 1
    if method == "auto":
        method = "fourier" if grid_is_exact else "nnls"
    if method == "fourier" and not grid_is_exact:
        raise ConfigError(
            "method 'fourier' needs grid {kind: exact, n_max} matching n_max"
        )
    return dist, grid, n_max, method


def _prepare_project(cfg):
    _check_keys(
        cfg,
        ("experiment", "distribution", "schedule", "post_select_all_down",
         "target_fidelity"),
        "config",
    )
    dist = _build_distribution(_section(cfg, "distribution"))
    schedule_node = _section(cfg, "schedule")
    schedule = _build_schedule(schedule_node)
    post_select = _as_bool(cfg, "post_select_all_down", "config", default=True)
    target = _as_float(cfg, "target_fidelity", "config", default=None, required=False)
    if target is not None and not 0.0 < target <= 1.0:
        raise ConfigError(f"target_fidelity must be in (0, 1], got {target}")
    return dist, schedule, schedule_node.get("kind"), post_select, target


_PREPARERS = {
    "coupling": _prepare_coupling,
    "discriminate": _prepare_discriminate,
    "recover": _prepare_recover,
    "project": _prepare_project,
}


def _load_config(path, expected=None):
    cfg = _load_yaml(path)
    experiment = cfg.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"config must set experiment to one of {', '.join(EXPERIMENTS)}; "
            f"got {experiment!r}"
        )
    if expected is not None and experiment != expected:
        raise ConfigError(
            f"config is for experiment '{experiment}', but the "
            f"'{expected}' command was invoked"
        )
    return cfg


def _fano_or_nan(dist):
    try:
        return dist.fano()
    except ValueError:  # mean zero: Fano undefined
        return math.nan


# -- command handlers ---------------------------------------------------------


def _cmd_coupling(args):
    cfg = _load_config(args.config, "coupling")
    geom, cav, passes, threshold, strict = _prepare_coupling(cfg)
    report = {"constants_version": CONSTANTS_VERSION}
    derived = {}
    if geom is not None:
        x = geom.omega_0 * geom.r_perp / geom.v
        report["free_space"] = {
            "phi_0": phi_free_space(geom),
            "x": x,
            "alpha": geom.alpha,
        }
        derived["phi_0"] = report["free_space"]["phi_0"]
    if cav is not None:
        regime = validate_dispersive_regime(cav, threshold=threshold)
        entry = {
            "phi_cav": regime.phi_cav,
            "g_q_mag": regime.g_q_mag,
            "gamma_qu": regime.gamma_qu,
            "gamma_el": regime.gamma_el,
            "regime": {
                "threshold": regime.threshold,
                "valid": regime.valid,
                "margins": dict(regime.margins),
            },
        }
        if cav.g_mag > 0.0 and cav.g_el_mag > 0.0:
            entry["coupling_phase"] = coupling_phase(cav)
        if passes is not None:
            entry["passes"] = passes
            entry["phi_multipass"] = effective_phi_multipass(regime.phi_cav, passes)
        report["cavity"] = entry
        derived["phi_cav"] = regime.phi_cav
        derived["regime_valid"] = regime.valid
        if strict and not regime.valid:
            failing = {k: v for k, v in regime.margins.items() if v < threshold}
            raise ValidityError(
                "dispersive-regime check failed; margins below "
                f"{threshold}: {failing}"
            )
    files = {"coupling_report.json": _json_text(report)}
    written = _write_outputs(args.out, files, "coupling", cfg, args.config, derived)
    print(f"coupling: wrote {', '.join(written)} to {args.out}")
    return EXIT_OK


def _cmd_discriminate(args):
    cfg = _load_config(args.config, "discriminate")
    mode, *plan = _prepare_discriminate(cfg)
    if args.shots is not None and args.shots < 1:
        raise ConfigError(f"--shots must be >= 1, got {args.shots}")
    rng = np.random.default_rng(args.seed) if args.shots is not None else None
    header = ("mu", "fano", "phi", "z", "y")
    if args.shots is not None:
        header = header + ("z_stderr", "y_stderr")

    def readout_row(dist, phi):
        mu, f = dist.mean(), _fano_or_nan(dist)
        if rng is not None:
            mc = monte_carlo_readout(dist, phi, args.shots, rng=rng)
            return (mu, f, phi, mc.z, mc.y, mc.z_stderr, mc.y_stderr)
        r = discrimination_readout(dist, phi)
        return (mu, f, phi, r.z, r.y)

    if mode == "sweep":
        dists, phi = plan
        rows = [readout_row(dist, phi) for dist in dists]
        derived = {"mode": "sweep", "phi": phi, "points": len(rows)}
    else:
        dist, grid = plan
        if rng is not None:
            rows = [readout_row(dist, float(phi)) for phi in grid]
        else:
            mu, f = dist.mean(), _fano_or_nan(dist)
            curve = readout_curve(dist, grid)
            rows = list(zip([mu] * len(grid), [f] * len(grid),
                            curve.phis, curve.z, curve.y))
        derived = {"mode": "grid", "phi_values": list(grid.values),
                   "points": len(rows)}
    if args.format == "jsonl":
        files = {"discriminate.jsonl": _jsonl_text(
            [dict(zip(header, row)) for row in rows])}
    else:
        files = {"discriminate.csv": _csv_text(header, rows)}
    written = _write_outputs(
        args.out, files, "discriminate", cfg, args.config, derived,
        extra={"seed": args.seed if args.shots is not None else None,
               "shots": args.shots},
    )
    print(f"discriminate: wrote {', '.join(written)} to {args.out}")
    return EXIT_OK


def _cmd_recover(args):
    cfg = _load_config(args.config, "recover")
    source, grid, n_max, method = _prepare_recover(cfg)
    samples = characteristic_function(source, grid)
    if method == "fourier":
        result = recover_exact(samples, n_max=n_max)
    else:
        result = recover_limited(samples, grid, n_max)
    if not result.converged:
        raise ConvergenceError(
            f"recovery did not converge in {result.iterations} iterations "
            f"(residual {result.residual:.3g})"
        )
    recovered = result.distribution
    # Raw KL is +inf as soon as the solver zeroes one rung that carries
    # true mass; the floored value stays finite and comparable.
    kl_floor = 1e-12
    kl = kl_raw = None
    if source.n_max == recovered.n_max:
        kl_raw = kl_divergence(source, recovered)
        kl = kl_divergence(source, floored(recovered, kl_floor))
    report = {
        "method": result.method,
        "residual": result.residual,
        "converged": result.converged,
        "iterations": result.iterations,
        "clipped_mass": result.clipped_mass,
        "n_max": n_max,
        "grid_points": len(grid),
        "kl_from_source": kl,
        "kl_from_source_raw": kl_raw,
        "kl_floor": kl_floor,
    }
    files = {
        "recovered.json": _json_text(
            {
                "n_max": recovered.n_max,
                "truncation_mass": recovered.truncation_mass,
                "weights": list(recovered.weights),
            }
        ),
        "recovery_report.json": _json_text(report),
    }
    derived = {"phi_values": list(grid.values), "method": method}
    written = _write_outputs(args.out, files, "recover", cfg, args.config, derived)
    print(f"recover: wrote {', '.join(written)} to {args.out}")
    return EXIT_OK


def _cmd_project(args):
    cfg = _load_config(args.config, "project")
    dist, schedule, schedule_kind, post_select, target = _prepare_project(cfg)
    try:
        trajectory = run_projection(
            dist,
            schedule,
            post_select_all_down=post_select,
            target_fidelity=target,
        )
    except ValueError as exc:
        raise ValidityError(str(exc))
    header = ("step", "phi", "theta", "p_down", "fidelity", "cumulative_success")
    rows = [
        (r.step, r.phi, r.theta, r.p_down, r.fidelity, r.cumulative_success)
        for r in trajectory.records
    ]
    report = {
        "steps_run": len(trajectory.records),
        "cumulative_success": trajectory.cumulative_success,
        "expected_attempts": trajectory.expected_attempts,
        "final_fidelity": trajectory.records[-1].fidelity,
        "n_star": schedule.n_star,
        "post_select_all_down": post_select,
    }
    derived = {"schedule": [(s.phi, s.theta) for s in schedule]}
    if schedule_kind == "binary":
        derived["angle_convention"] = BINARY_ANGLE_CONVENTION
    if args.format == "jsonl":
        traj_files = {
            "trajectory.jsonl": _jsonl_text([dict(zip(header, row)) for row in rows])
        }
    else:
        traj_files = {"trajectory.csv": _csv_text(header, rows)}
    files = {**traj_files, "projection_report.json": _json_text(report)}
    written = _write_outputs(args.out, files, "project", cfg, args.config, derived)
    print(f"project: wrote {', '.join(written)} to {args.out}")
    return EXIT_OK


def _cmd_validate(args):
    cfg = _load_config(args.config)
    experiment = cfg["experiment"]
    _PREPARERS[experiment](cfg)
    print(f"config OK (experiment: {experiment})")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="beamqubit",
        description="Simulate qubit readout, number-distribution recovery, and "
        "number-state projection with a pulsed electron beam.",
        epilog="Exit codes: 0 success, 2 config error, 3 invalid physics, "
        "4 numerical failure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out=True):
        p.add_argument("--config", required=True, help="YAML config file")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("coupling", help="interaction-strength and regime report")
    add_common(p)
    p.set_defaults(func=_cmd_coupling)

    p = sub.add_parser("discriminate", help="readout table over a strength grid "
                       "or a mean sweep")
    add_common(p)
    p.add_argument("--shots", type=int, default=None,
                   help="sample with shot noise instead of exact expectations")
    p.add_argument("--seed", type=int, default=0,
                   help="RNG seed for --shots (default 0)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=_cmd_discriminate)

    p = sub.add_parser("recover", help="reconstruct number statistics from readout")
    add_common(p)
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("project", help="run a conditioned projection schedule")
    add_common(p)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("validate-config", help="check a config without running")
    add_common(p, needs_out=False)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidityError as exc:
        print(f"invalid physics: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
