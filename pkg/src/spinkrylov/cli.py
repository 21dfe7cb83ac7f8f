"""Experiment runner.

Each subcommand reads a JSON config (schema-validated, unknown keys rejected),
runs one experiment, and writes CSV tables plus a single summary.json into the
output directory.  Tables are byte-identical across reruns of the same config
on the same machine: there is no randomness anywhere in the code paths, and
threads=1 is the serial determinism reference.  The summary carries the
resolved config, package versions, the figure tag the run maps to, units for
every table column, and the wall time (the one field that varies between
reruns).

Exit codes: 0 success, 2 config/validation error, 3 runtime or identity-check
failure.  Both failure modes leave a machine-readable error.json behind.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from importlib import metadata

import numpy as np

from .basis import build_sector_basis
from .dynamics import (domain_sweep, evolve, rung_domain_patterns,
                       window_average)
from .fermion import (column_filled_initial, correlation_evolve, densities,
                      dispersion_formula, dispersion_spectrum, hopping_matrix,
                      occupied_sites_initial)
from .krylov import (chain_zero_mode, default_fit_window, double_linear_fit,
                     lanczos_tridiagonalize, power_law_fit)
from .lattice import build_lattice
from .operator import (apply_hamiltonian, build_hamiltonian,
                       build_product_state, domain_wall_pattern)
from .scars import ra_states, rf_schmidt, rf_state
from .spectral import (chiral_kernel_certificate, diagonalize,
                       eigenstate_entropies, page_value, thermal_entropy)
from .witten import brute_force_trace, tr_chiral_formula, tr_sublattice_formula


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------- schemas
#
# Each field: (type tag, default) -- REQUIRED means no default.  Type tags:
# int / number / bool / str / list; "?" suffix also admits null.  Nested
# dicts carry their own schema.

REQUIRED = object()

_LATTICE = {
    "nx": ("int", REQUIRED),
    "ny": ("int", REQUIRED),
    "j_par": ("number", 1.0),
    "j_perp": ("number", 1.0),
    "delta_par": ("number", 0.0),
    "delta_perp": ("number", 0.0),
    "shell_perturbations": ("list", []),
}

_TIMES = {
    "start": ("number", 0.0),
    "stop": ("number", REQUIRED),
    "step": ("number", REQUIRED),
}

SCHEMAS = {
    "spectrum": {
        "lattice": (_LATTICE, REQUIRED),
        "n_down": ("int?", None),
        "strategy": ("str", "auto"),
        "entropies": ("bool", False),
        "cut": ("int?", None),
        "thermal_points": ("int", 0),
        "zero_tol": ("number?", None),
        "threads": ("int", 1),
    },
    "evolve": {
        "lattice": (_LATTICE, REQUIRED),
        "n_down": ("int?", None),
        "pattern": ("str", "domain_wall"),
        "times": (_TIMES, REQUIRED),
        "method": ("str", "auto"),
        "cut": ("int?", None),
        "subspace": ("int", 30),
        "step_tol": ("number", 1e-9),
        "window": ("list?", None),
        "threads": ("int", 1),
    },
    "lanczos": {
        "lattice": (_LATTICE, REQUIRED),
        "n_down": ("int?", None),
        "pattern": ("str", "domain_wall"),
        "max_steps": ("int", 100),
        "reorthogonalize": ("bool", True),
        "window": ("list?", None),
        "threads": ("int", 1),
    },
    "witten": {
        "nx": ("int", REQUIRED),
        "ny": ("int", REQUIRED),
        "sectors": ("list?", None),
        "operators": ("list", ["sublattice", "chiral"]),
        "cap": ("int", 10_000_000),
        "threads": ("int", 1),
    },
    "scars": {
        "nx": ("int", REQUIRED),
        "n_values": ("list?", None),
        "j_par": ("number", 1.0),
        "j_perp": ("number", 1.0),
        "delta_perp": ("number", 0.5),
        "delta_par_broken": ("number", 0.3),
        "shell_strength": ("number", 0.1),
        "threads": ("int", 1),
    },
    "fermion": {
        "nx": ("int", REQUIRED),
        "ny": ("int", REQUIRED),
        "j_par": ("number", 1.0),
        "j_perp": ("number", 1.0),
        "pattern": ("str?", None),
        "columns": ("list?", None),
        "times": (_TIMES, REQUIRED),
        "compare_j_perp": ("number?", None),
        "threads": ("int", 1),
    },
    "sweep": {
        "lattice": (_LATTICE, REQUIRED),
        "longest": ("list?", None),
        "window": ("list", [100.0, 1000.0]),
        "dt": ("number", 1.0),
        "edge_column": ("int", 0),
        "pattern_cap": ("int", 512),
        "threads": ("int", 1),
    },
}

_FIGURES = {
    "spectrum": "Fig. 4 / Fig. 5",
    "evolve": "Figs. 1-2",
    "lanczos": "Fig. 3 / Fig. S8",
    "witten": "SM §1 trace identities",
    "scars": "SM §4 scar tables",
    "fermion": "SM §6 free-fermion contrast",
    "sweep": "Fig. 2(d)",
}


def _type_ok(tag, value):
    base = tag.rstrip("?")
    if tag.endswith("?") and value is None:
        return True
    if base == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if base == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if base == "bool":
        return isinstance(value, bool)
    if base == "str":
        return isinstance(value, str)
    if base == "list":
        return isinstance(value, list)
    raise AssertionError(tag)


def validate_config(config, schema, path=""):
    """Fill defaults, reject unknown keys, check types.  Returns a new dict."""
    if not isinstance(config, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    unknown = sorted(set(config) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key{'s' if len(unknown) > 1 else ''} "
                          f"{', '.join(repr(path + k) for k in unknown)}")
    out = {}
    for key, (tag, default) in schema.items():
        here = f"{path}{key}"
        if isinstance(tag, dict):
            if key not in config:
                if default is REQUIRED:
                    raise ConfigError(f"missing required key {here!r}")
                out[key] = validate_config({}, tag, here + ".")
            else:
                out[key] = validate_config(config[key], tag, here + ".")
            continue
        if key not in config:
            if default is REQUIRED:
                raise ConfigError(f"missing required key {here!r}")
            out[key] = default
            continue
        value = config[key]
        if not _type_ok(tag, value):
            raise ConfigError(f"{here!r} must be {tag}, got {value!r}")
        out[key] = float(value) if tag.rstrip("?") == "number" and isinstance(
            value, int) and not isinstance(value, bool) else value
    return out


def apply_overrides(config, assignments):
    """--set key=value with dotted paths; values parsed as JSON literals."""
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot descend into {part!r} in {key!r}")
        node[parts[-1]] = value
    return config


def _resolve_threads(config):
    env = os.environ.get("SPINKRYLOV_THREADS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"SPINKRYLOV_THREADS must be an integer, got {env!r}")
    return config["threads"]


# ------------------------------------------------------------------ output

def _write_csv(out_dir, name, header, rows):
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return name


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (np.floating, float)):
        return str(float(v))
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return v


def _write_summary(out_dir, payload):
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def _versions():
    try:
        own = metadata.version("spinkrylov")
    except metadata.PackageNotFoundError:
        own = "unknown"
    import numba
    import scipy
    return {"spinkrylov": own, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__,
            "python": ".".join(map(str, sys.version_info[:3]))}


def _lattice_from(cfg):
    shells = tuple((int(n), float(dj)) for n, dj in cfg["shell_perturbations"])
    return build_lattice(cfg["nx"], cfg["ny"], j_par=cfg["j_par"],
                         j_perp=cfg["j_perp"], delta_par=cfg["delta_par"],
                         delta_perp=cfg["delta_perp"], shell_perturbations=shells)


def _pattern_string(pattern, nx, ny):
    if pattern == "domain_wall":
        return domain_wall_pattern(nx, ny)
    if set(pattern) - {"u", "d"}:
        raise ConfigError(f"pattern must use only 'u'/'d', got {pattern!r}")
    if len(pattern) == nx * ny:
        return pattern
    if len(pattern) == nx:
        return "".join(ch * ny for ch in pattern)
    raise ConfigError(f"pattern length {len(pattern)} matches neither "
                      f"site count {nx * ny} nor column count {nx}")


# ------------------------------------------------------------- subcommands

def run_spectrum(cfg, out_dir, threads):
    lat = _lattice_from(cfg["lattice"])
    n_down = cfg["n_down"] if cfg["n_down"] is not None else lat.n_sites // 2
    basis = build_sector_basis(lat.n_sites, n_down)
    h = build_hamiltonian(lat)
    outputs, results = [], {"dim": basis.size, "n_down": n_down}
    units = {}

    if cfg["strategy"] == "certificate":
        cert = chiral_kernel_certificate(h, basis)
        results["certificate"] = {
            "n_plus": cert.n_plus, "n_minus": cert.n_minus,
            "rank_gf2": cert.rank_gf2, "kernel_upper_bound": cert.kernel_upper_bound,
            "kernel_exact": cert.kernel_exact, "method": cert.method}
        results["zero_count"] = cert.kernel_exact
    else:
        report = diagonalize(h, basis, want_vectors=cfg["entropies"],
                             strategy=cfg["strategy"], zero_tol=cfg["zero_tol"])
        results["zero_count"] = report.zero_count
        results["zero_tol"] = report.zero_tol
        results["max_abs_energy"] = report.max_abs_e
        results["strategy"] = report.strategy
        outputs.append(_write_csv(out_dir, "spectrum.csv", ["index", "energy"],
                                  enumerate(report.eigenvalues)))
        units["spectrum.csv"] = {"index": "1", "energy": "J"}
        if cfg["entropies"]:
            ent = eigenstate_entropies(report, basis, cut=cfg["cut"])
            outputs.append(_write_csv(
                out_dir, "entropy.csv", ["index", "energy", "entropy_vn"],
                ((i, e, s) for i, (e, s) in
                 enumerate(zip(report.eigenvalues, ent.entropies)))))
            units["entropy.csv"] = {"index": "1", "energy": "J", "entropy_vn": "nat"}
            results["page_value"] = page_value(lat.n_sites)
            if cfg["thermal_points"] > 1:
                lo, hi = report.eigenvalues[0], report.eigenvalues[-1]
                grid = np.linspace(lo, hi, cfg["thermal_points"] + 2)[1:-1]
                rows = []
                for e in grid:
                    try:
                        beta, s_th = thermal_entropy(report, e)
                    except ValueError:
                        continue
                    rows.append((e, beta, s_th))
                outputs.append(_write_csv(
                    out_dir, "thermal.csv",
                    ["energy", "beta", "entropy_thermal"], rows))
                units["thermal.csv"] = {"energy": "J", "beta": "1/J",
                                        "entropy_thermal": "nat"}
    return results, outputs, units


def run_evolve(cfg, out_dir, threads):
    lat = _lattice_from(cfg["lattice"])
    n_down_cfg = cfg["n_down"]
    pattern = _pattern_string(cfg["pattern"], lat.nx, lat.ny)
    n_down = pattern.count("d") if n_down_cfg is None else n_down_cfg
    if pattern.count("d") != n_down:
        raise ConfigError("pattern magnetization disagrees with n_down")
    basis = build_sector_basis(lat.n_sites, n_down)
    h = build_hamiltonian(lat)
    psi0 = build_product_state(pattern, basis)
    t = cfg["times"]
    grid = np.arange(t["start"], t["stop"] + 0.5 * t["step"], t["step"])
    run = evolve(h, basis, psi0, grid, method=cfg["method"], cut=cfg["cut"],
                 subspace=cfg["subspace"], step_tol=cfg["step_tol"], threads=threads)

    header = (["t"] + [f"mz_x{x}" for x in range(lat.nx)]
              + [f"czz_x{x}" for x in range(lat.nx)] + ["svn", "energy", "norm"])
    rows = ([run.times[i], *run.mz[i], *run.czz[i], run.svn[i],
             run.energy[i], run.norm[i]] for i in range(grid.size))
    outputs = [_write_csv(out_dir, "observables.csv", header, rows)]
    units = {"observables.csv": {"t": "1/J", "mz_x*": "hbar", "czz_x*": "1",
                                 "svn": "nat", "energy": "J", "norm": "1"}}
    results = {"dim": basis.size, "method": run.method, "cut": run.cut,
               "pattern": pattern,
               "norm_drift": float(np.max(np.abs(run.norm - 1.0))),
               "energy_drift": float(np.ptp(run.energy))}
    if cfg["window"] is not None:
        w0, w1 = cfg["window"]
        avg = window_average(run, w0, w1)
        outputs.append(_write_csv(out_dir, "window_averages.csv",
                                  ["x", "mz_avg", "czz_avg"],
                                  zip(range(lat.nx), avg.mz, avg.czz)))
        units["window_averages.csv"] = {"x": "1", "mz_avg": "hbar", "czz_avg": "1"}
        results["window"] = list(avg.window)
        results["svn_avg"] = avg.svn
        results["energy_avg"] = avg.energy
    return results, outputs, units


def run_lanczos(cfg, out_dir, threads):
    lat = _lattice_from(cfg["lattice"])
    pattern = _pattern_string(cfg["pattern"], lat.nx, lat.ny)
    n_down = pattern.count("d") if cfg["n_down"] is None else cfg["n_down"]
    basis = build_sector_basis(lat.n_sites, n_down)
    h = build_hamiltonian(lat)
    start = build_product_state(pattern, basis)
    tri = lanczos_tridiagonalize(h, basis, start, max_steps=cfg["max_steps"],
                                 reorthogonalize=cfg["reorthogonalize"],
                                 threads=threads)
    results = {"dim": basis.size, "n_steps": tri.n_steps, "pattern": pattern,
               "breakdown": tri.breakdown,
               "max_abs_alpha": float(np.max(np.abs(tri.alphas)))}
    try:
        mode = chain_zero_mode(tri)
        coeffs = mode.coefficients
        results["chain_zero_mode_truncated"] = mode.truncated
    except ValueError:
        coeffs = np.zeros(tri.n_steps)
        results["chain_zero_mode_truncated"] = None

    rows = []
    for j in range(1, tri.n_steps + 1):
        beta_sq = tri.beta(j) ** 2 if j >= 2 else 0.0
        rows.append((j, beta_sq, tri.alphas[j - 1], coeffs[j - 1] ** 2))
    outputs = [_write_csv(out_dir, "lanczos.csv",
                          ["j", "beta_sq", "alpha", "c_sq"], rows)]
    units = {"lanczos.csv": {"j": "1", "beta_sq": "J^2", "alpha": "J", "c_sq": "1"}}

    window = tuple(cfg["window"]) if cfg["window"] else default_fit_window(tri)
    results["fit_window"] = list(window)
    try:
        a, b_odd, b_even, gamma = double_linear_fit(tri.betas, window)
        results["double_linear_fit"] = {"a": a, "b_odd": b_odd,
                                        "b_even": b_even, "gamma": gamma}
    except ValueError as exc:
        results["double_linear_fit"] = {"error": str(exc)}
    if np.any(coeffs != 0):
        try:
            results["power_law_exponent"] = power_law_fit(coeffs, window)
        except ValueError:
            results["power_law_exponent"] = None
    return results, outputs, units


def run_witten(cfg, out_dir, threads):
    nx, ny = cfg["nx"], cfg["ny"]
    n = nx * ny
    sectors = cfg["sectors"] if cfg["sectors"] is not None else list(range(n + 1))
    bad = [op for op in cfg["operators"] if op not in ("sublattice", "chiral")]
    if bad:
        raise ConfigError(f"unknown operator(s) {bad}; use sublattice/chiral")
    rows, mismatches = [], 0
    for n_down in sectors:
        for op in cfg["operators"]:
            if op == "sublattice":
                formula = tr_sublattice_formula(nx, ny, n_down)
            else:
                # C maps n_down -> N - n_down: only S^z = 0 can contribute
                formula = tr_chiral_formula(nx, ny) if 2 * n_down == n else 0
            brute = brute_force_trace(op, nx, ny, n_down, cap=cfg["cap"])
            match = formula == brute
            mismatches += 0 if match else 1
            rows.append((nx, ny, n_down, op, formula, brute, match))
    outputs = [_write_csv(out_dir, "witten.csv",
                          ["nx", "ny", "n_down", "operator", "formula",
                           "brute_force", "match"], rows)]
    units = {"witten.csv": {"nx": "1", "ny": "1", "n_down": "1", "formula": "1",
                            "brute_force": "1"}}
    results = {"sectors": len(sectors), "rows": len(rows), "mismatches": mismatches}
    if mismatches:
        raise RuntimeError(f"{mismatches} trace identities failed; see witten.csv")
    return results, outputs, units


def run_scars(cfg, out_dir, threads):
    nx = cfg["nx"]
    if nx > 14:
        raise ConfigError("scar checks are capped at nx = 14 (sector size)")
    n_values = cfg["n_values"] if cfg["n_values"] is not None else list(range(nx + 1))
    jp, jr = cfg["j_par"], cfg["j_perp"]
    dp = cfg["delta_perp"]
    lat_xx = build_lattice(nx, 2, j_par=jp, j_perp=jr)
    lat_shell = build_lattice(nx, 2, j_par=jp, j_perp=jr,
                              shell_perturbations=((2, cfg["shell_strength"]),))
    lat_zz = build_lattice(nx, 2, j_par=jp, j_perp=jr, delta_perp=dp)
    lat_broken = build_lattice(nx, 2, j_par=jp, j_perp=jr,
                               delta_par=cfg["delta_par_broken"])
    hams = [build_hamiltonian(lat) for lat in (lat_xx, lat_shell, lat_zz, lat_broken)]

    def residual(h, state, energy):
        w = apply_hamiltonian(h, state.basis, state)
        return float(np.linalg.norm(w.amps - energy * state.amps))

    rf_rows, schmidt_rows = [], []
    for n in n_values:
        scar = rf_state(nx, n)
        e_zz = nx * dp * jr / 4
        rf_rows.append((n, scar.sector, e_zz,
                        residual(hams[0], scar.state, 0.0),
                        residual(hams[1], scar.state, 0.0),
                        residual(hams[2], scar.state, e_zz),
                        residual(hams[3], scar.state,
                                 float(scar.state.amps @ apply_hamiltonian(
                                     hams[3], scar.state.basis, scar.state).amps))))
        if nx % 2 == 0:
            lambdas, svn, asym = rf_schmidt(nx, n)
            schmidt_rows.extend((n, l, lam) for l, lam in enumerate(lambdas))

    ra_rows = []
    e_ra = -nx * dp * jr / 4
    for scar in ra_states(nx):
        ra_rows.append((scar.kind, scar.sector, e_ra,
                        residual(hams[0], scar.state, 0.0),
                        residual(hams[2], scar.state, e_ra)))

    outputs = [
        _write_csv(out_dir, "rf_residuals.csv",
                   ["n", "n_down", "energy_zz", "residual_xx", "residual_shell2",
                    "residual_zz", "residual_delta_par"], rf_rows),
        _write_csv(out_dir, "ra_residuals.csv",
                   ["kind", "n_down", "energy_zz", "residual_xx", "residual_zz"],
                   ra_rows),
    ]
    units = {"rf_residuals.csv": {"n": "1", "n_down": "1", "energy_zz": "J",
                                  "residual_*": "J"},
             "ra_residuals.csv": {"n_down": "1", "energy_zz": "J",
                                  "residual_*": "J"}}
    if schmidt_rows:
        outputs.append(_write_csv(out_dir, "schmidt.csv", ["n", "l", "lambda"],
                                  schmidt_rows))
        units["schmidt.csv"] = {"n": "1", "l": "1", "lambda": "1"}
    results = {"n_values": list(n_values), "worst_rf_xx_residual":
               float(max(r[3] for r in rf_rows)) if rf_rows else None}
    if nx % 2 == 0:
        _, svn, asym = rf_schmidt(nx, nx // 2)
        results["half_filling_svn"] = svn
        results["asymptote"] = asym
    return results, outputs, units


def run_fermion(cfg, out_dir, threads):
    nx, ny = cfg["nx"], cfg["ny"]
    lat = build_lattice(nx, ny, j_par=cfg["j_par"], j_perp=cfg["j_perp"])
    system = hopping_matrix(lat)
    eig = dispersion_spectrum(nx, ny, cfg["j_par"], cfg["j_perp"])
    formula = dispersion_formula(nx, ny, cfg["j_par"], cfg["j_perp"])
    outputs = [_write_csv(out_dir, "dispersion.csv",
                          ["index", "energy", "energy_formula"],
                          ((i, a, b) for i, (a, b) in enumerate(zip(eig, formula))))]
    units = {"dispersion.csv": {"index": "1", "energy": "J", "energy_formula": "J"}}

    if cfg["pattern"] is not None:
        c0 = occupied_sites_initial(lat, _pattern_string(cfg["pattern"], nx, ny))
    else:
        cols = cfg["columns"] if cfg["columns"] is not None else list(range(nx // 2))
        c0 = column_filled_initial(lat, cols)
    t = cfg["times"]
    grid = np.arange(t["start"], t["stop"] + 0.5 * t["step"], t["step"])
    dens = np.array([densities(correlation_evolve(system, c0, tt)) for tt in grid])
    header = ["t"] + [f"n_site{i}" for i in range(lat.n_sites)]
    outputs.append(_write_csv(out_dir, "densities.csv", header,
                              ([grid[i], *dens[i]] for i in range(grid.size))))
    units["densities.csv"] = {"t": "1/J", "n_site*": "1"}
    results = {"dispersion_max_dev": float(np.max(np.abs(eig - formula))),
               "particle_number": c0.particle_number()}
    if cfg["compare_j_perp"] is not None:
        lat2 = build_lattice(nx, ny, j_par=cfg["j_par"], j_perp=cfg["compare_j_perp"])
        sys2 = hopping_matrix(lat2)
        dens2 = np.array([densities(correlation_evolve(sys2, c0, tt)) for tt in grid])
        results["compare_j_perp"] = cfg["compare_j_perp"]
        results["density_max_dev_vs_compare"] = float(np.max(np.abs(dens - dens2)))
    return results, outputs, units


def run_sweep(cfg, out_dir, threads):
    lat = _lattice_from(cfg["lattice"])
    if lat.nx % 2:
        raise ConfigError("sweep needs even nx (S^z = 0 rung patterns)")
    longest = cfg["longest"] if cfg["longest"] is not None \
        else list(range(1, lat.nx // 2 + 1))
    basis = build_sector_basis(lat.n_sites, lat.n_sites // 2)
    h = build_hamiltonian(lat)
    report = None
    if basis.size <= 4096:
        report = diagonalize(h, basis, want_vectors=True)
    rows, pattern_rows = [], []
    for length in longest:
        res = domain_sweep(lat.nx, lat.ny, length, window=tuple(cfg["window"]),
                           dt=cfg["dt"], pattern_cap=cfg["pattern_cap"],
                           edge_column=cfg["edge_column"], threads=threads,
                           h=h, basis=basis, report=report)
        rows.append((length, len(res.patterns), res.mean, res.std))
        pattern_rows.extend((length, pat, val)
                            for pat, val in zip(res.patterns, res.edge_averages))
    outputs = [
        _write_csv(out_dir, "sweep.csv",
                   ["longest", "n_patterns", "mz_edge_mean", "mz_edge_std"], rows),
        _write_csv(out_dir, "patterns.csv",
                   ["longest", "pattern", "mz_edge_avg"], pattern_rows),
    ]
    units = {"sweep.csv": {"longest": "1", "n_patterns": "1", "mz_edge_mean": "hbar",
                           "mz_edge_std": "hbar"},
             "patterns.csv": {"longest": "1", "mz_edge_avg": "hbar"}}
    results = {"dim": basis.size, "window": list(cfg["window"]),
               "edge_column": cfg["edge_column"]}
    return results, outputs, units


_RUNNERS = {
    "spectrum": run_spectrum,
    "evolve": run_evolve,
    "lanczos": run_lanczos,
    "witten": run_witten,
    "scars": run_scars,
    "fermion": run_fermion,
    "sweep": run_sweep,
}


# --------------------------------------------------------------- entry point

def _error_record(out_dir, stage, exc):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "error.json"), "w", encoding="utf-8") as f:
        json.dump({"error": {"stage": stage, "type": type(exc).__name__,
                             "message": str(exc)}}, f, indent=2, sort_keys=True)
        f.write("\n")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="spinkrylov",
        description="XX/XXZ ladder experiments: spectra, dynamics, Krylov "
                    "localization, trace identities, scar states, and the "
                    "free-fermion contrast model.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (dotted path, JSON value)")
        p.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)

    out_dir = args.out or os.path.join("spinkrylov_out", args.subcommand)
    started = time.perf_counter()
    try:
        with open(args.config, encoding="utf-8") as f:
            raw = json.load(f)
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        raw = apply_overrides(raw, args.set)
        cfg = validate_config(raw, SCHEMAS[args.subcommand])
        threads = _resolve_threads(cfg)
        if threads < 0:
            raise ConfigError("threads must be >= 0")
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        _error_record(out_dir, "validation", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(out_dir, exist_ok=True)
    try:
        results, outputs, units = _RUNNERS[args.subcommand](cfg, out_dir, threads)
    except ConfigError as exc:
        _error_record(out_dir, "validation", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        _error_record(out_dir, "runtime", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 3

    _write_summary(out_dir, {
        "subcommand": args.subcommand,
        "figure": _FIGURES[args.subcommand],
        "config": cfg,
        "threads": threads,
        "results": results,
        "outputs": outputs,
        "units": units,
        "versions": _versions(),
        "deterministic": "no RNG in any code path; threads=1 is the serial "
                         "reference; tables are byte-identical across reruns",
        "wall_time_s": time.perf_counter() - started,
    })
    print(f"{args.subcommand}: wrote {', '.join(outputs + ['summary.json'])} "
          f"to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
