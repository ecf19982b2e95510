"""Command-line driver: plain-text configs in, bit-stable artifacts out.

Every run is deterministic: randomness flows only through --seed, floats are
rendered at 17 significant digits, JSON keys are sorted, and nothing emits a
timestamp, so identical invocations produce byte-identical files.  Data
files are written atomically (temp file + rename) into the output directory.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
failure (blow-up, node formation, non-convergence).  Failures print one
machine-parsable line `ERROR <code>: <message>` on stderr.
"""

from __future__ import annotations

import os
import sys
import warnings

import numpy as np

from .dynamics import (QUANTUM, BlowupError, evolve_hydro, evolve_schrodinger,
                       stability_dt_max)
from .fields import (HydroState, NodeError, PhysParams, WaveFunction,
                     madelung_forward, normalize)
from .grid import DIRICHLET, PERIODIC, Field, Grid, GridError, integrate
from .info import fisher_information, fisher_matrix, verify_quadratic_expansion
from .kahler import (canonical_constancy, canonical_deviation,
                     canonical_transform, check_kahler_conditions,
                     dirac_product, kahler_family)
from .potential import ParseError, parse_potential
from .variation import (minimize_ground_state, schrodinger_spectrum,
                        second_variation, stationarity_residual)

USAGE = """\
usage: fisherhydro <subcommand> [options]

subcommands:
  evolve           integrate the density-phase system (or the linear wave
                   equation) and write a sampled trajectory
  equivalence      run the quantum-mode hydrodynamics and the wave equation
                   side by side and report the density discrepancy
  fisher           information quantities of the configured density, with
                   the shifted-copy divergence check
  kahler-check     residuals of the compatible-structure family and the
                   canonical-form constants on random samples
  ground-state     variational minimum of the frozen-phase energy
  variation-check  second-order energy change around the ground state
                   against its closed form

options:
  --config PATH     key = value configuration file (dotted section keys,
                    # comments); flags override file values
  --SECTION.KEY V   override any configuration value, e.g. --grid.n 512
  --output DIR      shorthand for --output.dir
  --potential EXPR  shorthand for --physics.potential
  --hbar X          shorthand for --physics.hbar
  --dt X            shorthand for --evolve.dt
  --steps N         shorthand for --evolve.steps
  --mode M          shorthand for --evolve.mode
  --seed N          random seed for sampling subcommands (default 0)
  --samples N       sample count for kahler-check / variation-check
  --delta X         shift size for fisher (default 0.1)
  --force           run even when dt exceeds the stability heuristic
  -h, --help        this text
"""

_SCHEMA = {
    "grid": {"min": float, "max": float, "n": int, "bc": str},
    "physics": {"mass": float, "hbar": float, "lambda_mode": str,
                "lambda": float, "potential": str},
    "evolve": {"dt": float, "steps": int, "sample_every": int, "mode": str},
    "init": {"kind": str, "center": float, "sigma": float,
             "momentum": float, "path": str},
    "output": {"dir": str, "formats": str},
}

_DEFAULTS = {
    "grid": {"min": -8.0, "max": 8.0, "n": 512, "bc": "dirichlet"},
    "physics": {"mass": 1.0, "hbar": 1.0, "lambda_mode": "paper",
                "lambda": 0.25, "potential": "0.5*x^2"},
    "evolve": {"dt": 5e-4, "steps": 2000, "sample_every": 100,
               "mode": "quantum"},
    "init": {"kind": "gaussian", "center": 0.0, "sigma": 1.0,
             "momentum": 0.0, "path": ""},
    "output": {"dir": "out", "formats": "csv,json"},
}

# Time evolution needs resolved (not floor-clamped) tails: a hard wall next
# to clamped density is a curvature spike that the quantum force amplifies
# by 1/dx^2.  The evolving subcommands therefore default to a periodic box
# with a coherent packet whose tails stay alive at the seam, and a dt under
# the stability heuristic; the static subcommands keep the Dirichlet box.
_EVOLVE_DEFAULTS = {
    "grid.min": -10.5, "grid.max": 10.5, "grid.bc": "periodic",
    "physics.potential": "x^2/128",
    "init.center": 1.0, "init.sigma": 2.0,
    "evolve.dt": 4e-4, "evolve.steps": 2500,
}

_ALIASES = {
    "output": ("output", "dir"),
    "potential": ("physics", "potential"),
    "hbar": ("physics", "hbar"),
    "dt": ("evolve", "dt"),
    "steps": ("evolve", "steps"),
    "mode": ("evolve", "mode"),
}

SUBCOMMANDS = ("evolve", "equivalence", "fisher", "kahler-check",
               "ground-state", "variation-check")


class CliError(Exception):
    """Carries the exit code and the machine-parsable error code."""

    def __init__(self, exit_code: int, code: str, message: str):
        super().__init__(message)
        self.exit_code = exit_code
        self.code = code


# ---------------------------------------------------------------------------
# configuration

def _parse_config_lines(text: str, source: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(1, "config",
                           f"{source}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _set_config(cfg: dict, dotted: str, value: str, origin: str) -> None:
    if "." not in dotted:
        raise CliError(1, "config", f"{origin}: key {dotted!r} needs a "
                                    "section, like grid.n")
    section, key = dotted.split(".", 1)
    if section not in _SCHEMA or key not in _SCHEMA[section]:
        raise CliError(1, "config", f"{origin}: unknown key {dotted!r}")
    want = _SCHEMA[section][key]
    if want is str:
        cfg[section][key] = value
        return
    try:
        cfg[section][key] = want(value)
    except ValueError:
        raise CliError(1, "config", f"{origin}: {dotted} expects "
                                    f"{want.__name__}, got {value!r}") from None


def load_config(path: str | None, overrides: list,
                subcommand: str | None = None) -> dict:
    """Defaults (plus the subcommand's patch), then the file, then flags."""
    cfg = {sect: dict(vals) for sect, vals in _DEFAULTS.items()}
    if subcommand in ("evolve", "equivalence"):
        for dotted, value in _EVOLVE_DEFAULTS.items():
            section, key = dotted.split(".", 1)
            cfg[section][key] = value
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as err:
            raise CliError(1, "config", f"cannot read {path}: {err}") from None
        for dotted, value in _parse_config_lines(text, path).items():
            _set_config(cfg, dotted, value, path)
    for dotted, value in overrides:
        _set_config(cfg, dotted, value, f"--{dotted}")
    return cfg


def _build_grid(cfg: dict) -> Grid:
    bc_map = {"dirichlet": DIRICHLET, "periodic": PERIODIC}
    bc = cfg["grid"]["bc"]
    if bc not in bc_map:
        raise CliError(1, "config", f"grid.bc must be dirichlet or periodic, "
                                    f"got {bc!r}")
    return Grid.line(cfg["grid"]["min"], cfg["grid"]["max"],
                     cfg["grid"]["n"], bc_map[bc])


def _build_params(cfg: dict) -> PhysParams:
    phys = cfg["physics"]
    mode = phys["lambda_mode"]
    if mode == "paper":
        lam = None
    elif mode == "explicit":
        lam = phys["lambda"]
        if lam < 0:
            raise CliError(1, "config", "physics.lambda must be >= 0")
    else:
        raise CliError(1, "config", "physics.lambda_mode must be paper or "
                                    f"explicit, got {mode!r}")
    node = parse_potential(phys["potential"]) if phys["potential"] else None
    return PhysParams(m=phys["mass"], hbar=phys["hbar"], lam=lam,
                      potential=node)


def _build_init(cfg: dict, grid: Grid) -> HydroState:
    init = cfg["init"]
    kind = init["kind"]
    x = grid.axis(0)
    if kind == "gaussian":
        sigma = init["sigma"]
        if sigma <= 0:
            raise CliError(1, "config", "init.sigma must be positive")
        P = np.exp(-0.5 * ((x - init["center"]) / sigma) ** 2)
        if grid.bc == PERIODIC:
            # wrap in the nearest images so the profile closes smoothly
            # over the seam instead of jumping by the tail ratio
            L = cfg["grid"]["max"] - cfg["grid"]["min"]
            for k in (-2, -1, 1, 2):
                P = P + np.exp(-0.5 * ((x - init["center"] + k * L)
                                       / sigma) ** 2)
        S = init["momentum"] * x
    elif kind == "plane_wave":
        P = np.ones_like(x)
        S = init["momentum"] * x
    elif kind == "file":
        path = init["path"]
        if not path:
            raise CliError(1, "config", "init.kind = file needs init.path")
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2)
        except OSError as err:
            raise CliError(1, "config", f"cannot read {path}: {err}") from None
        except ValueError as err:
            raise CliError(1, "config", f"{path}: {err}") from None
        if data.shape[0] != grid.ns[0] or data.shape[1] not in (1, 2):
            raise CliError(1, "config",
                           f"{path}: expected {grid.ns[0]} rows of P or P,S, "
                           f"got shape {data.shape}")
        P = data[:, 0]
        S = data[:, 1] if data.shape[1] == 2 else np.zeros_like(P)
        if P.min() < 0:
            raise CliError(1, "config", f"{path}: density must be >= 0")
    else:
        raise CliError(1, "config", "init.kind must be gaussian, plane_wave "
                                    f"or file, got {kind!r}")
    if grid.bc == PERIODIC and init["momentum"] != 0.0 and kind != "file":
        raise CliError(1, "validation",
                       "a linear phase winds across the periodic seam; use a "
                       "wall-bounded grid or momentum = 0")
    # clamp tails two decades above the admissibility floor so a state whose
    # tails still want to drain does not start life on the abort threshold
    Pn = normalize(Field(grid, P), 1e-10)
    return HydroState(Pn, Field(grid, S),
                      p_floor=1e-12 * float(Pn.values.max()))


# ---------------------------------------------------------------------------
# deterministic formatting

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if not np.isfinite(v):
        raise CliError(2, "numeric", "non-finite value reached the output")
    return f"{v:.17g}"


def _json_text(obj, indent: int = 0) -> str:
    """Sorted-key JSON with floats at fixed 17-significant-digit width.

    The stdlib encoder renders floats via repr, whose width varies by
    value; this keeps every number the same shape run over run."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError("JSON object keys must be strings")
            items.append(f'{pad}  "{key}": {_json_text(obj[key], indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_json_text(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{out}"'
    return _fmt(obj)


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(cfg: dict, name: str, payload: dict) -> None:
    if "json" not in _formats(cfg):
        return
    out_dir = cfg["output"]["dir"]
    os.makedirs(out_dir, exist_ok=True)
    _write_atomic(os.path.join(out_dir, name), _json_text(payload) + "\n")


def _write_csv(cfg: dict, name: str, header: list, rows) -> None:
    if "csv" not in _formats(cfg):
        return
    out_dir = cfg["output"]["dir"]
    os.makedirs(out_dir, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write_atomic(os.path.join(out_dir, name), "\n".join(lines) + "\n")


def _formats(cfg: dict) -> set:
    names = {part.strip() for part in cfg["output"]["formats"].split(",")
             if part.strip()}
    bad = names - {"csv", "json"}
    if bad:
        raise CliError(1, "config", f"unknown output format {sorted(bad)}")
    return names


# ---------------------------------------------------------------------------
# subcommands

def _check_dt(cfg: dict, grid: Grid, params: PhysParams, force: bool) -> None:
    dt = cfg["evolve"]["dt"]
    bound = stability_dt_max(grid, params)
    if dt > bound and not force:
        print(f"warning: dt = {_fmt(dt)} exceeds the stability heuristic "
              f"{_fmt(bound)}; the run may abort (pass --force to silence)",
              file=sys.stderr)


def _hydro_rows(traj):
    for i in range(len(traj)):
        yield (traj.times[i], traj.norms[i], traj.energies[i],
               traj.P[i].min(), traj.P[i].max())


def _wave_rows(traj):
    for i in range(len(traj)):
        dens = np.abs(traj.psi[i]) ** 2
        yield (traj.times[i], traj.norms[i], traj.energies[i],
               dens.min(), dens.max())


def _drifts(traj) -> tuple:
    norm_drift = float(np.abs(traj.norms - traj.norms[0]).max())
    e0 = traj.energies[0]
    scale = max(abs(e0), np.finfo(float).tiny)
    energy_drift = float(np.abs(traj.energies - e0).max() / scale)
    return norm_drift, energy_drift


def cmd_evolve(cfg: dict, opts: dict) -> int:
    grid = _build_grid(cfg)
    params = _build_params(cfg)
    state = _build_init(cfg, grid)
    ev = cfg["evolve"]
    mode = ev["mode"]
    if mode not in ("classical", "quantum", "schrodinger"):
        raise CliError(1, "config", "evolve.mode must be classical, quantum "
                                    f"or schrodinger, got {mode!r}")
    if mode != "schrodinger":
        _check_dt(cfg, grid, params, opts["force"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if mode == "schrodinger":
            wf = madelung_forward(state, params.hbar)
            traj = evolve_schrodinger(wf, params, ev["dt"], ev["steps"],
                                      store_every=ev["sample_every"])
            rows = list(_wave_rows(traj))
        else:
            traj = evolve_hydro(state, params, ev["dt"], ev["steps"],
                                mode=mode, store_every=ev["sample_every"])
            rows = list(_hydro_rows(traj))
    norm_drift, energy_drift = _drifts(traj)
    _write_csv(cfg, "trajectory.csv",
               ["time", "norm", "energy", "density_min", "density_max"], rows)
    _write_json(cfg, "summary.json", {
        "subcommand": "evolve",
        "mode": mode,
        "dt": ev["dt"],
        "steps": ev["steps"],
        "n_samples": len(traj),
        "t_final": float(traj.times[-1]),
        "norm_initial": float(traj.norms[0]),
        "norm_final": float(traj.norms[-1]),
        "norm_drift": norm_drift,
        "energy_initial": float(traj.energies[0]),
        "energy_final": float(traj.energies[-1]),
        "energy_drift_rel": energy_drift,
        "density_min_overall": float(min(r[3] for r in rows)),
    })
    return 0


def cmd_equivalence(cfg: dict, opts: dict) -> int:
    grid = _build_grid(cfg)
    params = _build_params(cfg)
    state = _build_init(cfg, grid)
    ev = cfg["evolve"]
    _check_dt(cfg, grid, params, opts["force"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        hydro = evolve_hydro(state, params, ev["dt"], ev["steps"],
                             mode=QUANTUM, store_every=ev["sample_every"])
        wave = evolve_schrodinger(madelung_forward(state, params.hbar),
                                  params, ev["dt"], ev["steps"],
                                  store_every=ev["sample_every"])
    diffs = np.abs(hydro.P - np.abs(wave.psi) ** 2).max(
        axis=tuple(range(1, hydro.P.ndim)))
    _write_csv(cfg, "equivalence.csv", ["time", "max_density_difference"],
               zip(hydro.times, diffs))
    _write_json(cfg, "equivalence.json", {
        "subcommand": "equivalence",
        "dt": ev["dt"],
        "steps": ev["steps"],
        "n_samples": len(hydro),
        "t_final": float(hydro.times[-1]),
        "max_density_difference": float(diffs.max()),
    })
    return 0


def cmd_fisher(cfg: dict, opts: dict) -> int:
    grid = _build_grid(cfg)
    params = _build_params(cfg)
    state = _build_init(cfg, grid)
    delta = opts["delta"]
    info = fisher_information(state.P, params.m)
    matrix = fisher_matrix(state.P)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        check = verify_quadratic_expansion(
            state.P, [[delta] + [0.0] * (grid.dim - 1)])
    kl = float(check.kl[0])
    quad = float(check.quadratic[0])
    _write_json(cfg, "fisher.json", {
        "subcommand": "fisher",
        "mass": params.m,
        "delta": delta,
        "fisher_information": info,
        "location_fisher": float(matrix.matrix[0, 0]),
        "kl_divergence": kl,
        "quadratic_prediction": quad,
        "residual_rel": abs(kl - quad) / max(quad, np.finfo(float).tiny),
    })
    return 0


def cmd_kahler_check(cfg: dict, opts: dict) -> int:
    params = _build_params(cfg)
    hbar = params.hbar
    samples = opts["samples"]
    if samples < 1:
        raise CliError(1, "validation", "--samples must be >= 1")
    rng = np.random.default_rng(opts["seed"])
    grid = Grid.line(-1.0, 1.0, 64)
    worst = np.zeros(3)
    for _ in range(samples):
        P = Field(grid, rng.uniform(0.1, 10.0, grid.shape))
        A = Field(grid, rng.uniform(-2.0, 2.0, grid.shape))
        res = check_kahler_conditions(kahler_family(P, A, hbar))
        worst = np.maximum(worst, [res.r1, res.r2, res.r3])

    x = grid.axis(0)
    P_ref = Field(grid, np.exp(-x * x))
    state = HydroState.normalized(P_ref, Field(grid, 0.3 * x))
    blocks = kahler_family(state.P, 0.0, hbar)
    cb = canonical_transform(blocks, state, hbar)
    canonical_dev = max(canonical_deviation(cb), canonical_constancy(cb))

    dirac_err = 0.0
    for _ in range(min(100, samples)):
        phi = WaveFunction.normalized(Field(grid, rng.standard_normal(
            grid.shape) + 1j * rng.standard_normal(grid.shape)))
        chi = WaveFunction.normalized(Field(grid, rng.standard_normal(
            grid.shape) + 1j * rng.standard_normal(grid.shape)))
        plain = integrate(Field(grid, np.conj(phi.psi.values) * chi.psi.values))
        fancy = dirac_product(phi, chi, hbar)
        dirac_err = max(dirac_err, abs(fancy - plain) / abs(plain))

    _write_json(cfg, "kahler.json", {
        "subcommand": "kahler-check",
        "hbar": hbar,
        "samples": samples,
        "seed": opts["seed"],
        "r1": float(worst[0]),
        "r2": float(worst[1]),
        "r3": float(worst[2]),
        "canonical_max_dev": canonical_dev,
        "dirac_rel_err": dirac_err,
    })
    return 0


def cmd_ground_state(cfg: dict, opts: dict) -> int:
    grid = _build_grid(cfg)
    params = _build_params(cfg)
    state = _build_init(cfg, grid)
    # a notch below the library default so the reported stationarity
    # residual sits clearly inside its documented 1e-4 envelope
    result = minimize_ground_state(params, grid, state.P, tol=1e-14)
    _write_csv(cfg, "ground_state.csv", ["x", "density"],
               zip(grid.axis(0), result.P.values))
    _write_json(cfg, "ground_state.json", {
        "subcommand": "ground-state",
        "n": grid.ns[0],
        "energy": result.energy,
        "iterations": result.iterations,
        "converged": result.converged,
        "stationarity_residual": stationarity_residual(result, params, grid),
    })
    if not result.converged:
        raise CliError(2, "no_convergence",
                       f"minimizer hit the iteration budget; best energy "
                       f"{_fmt(result.energy)} written to the output dir")
    return 0


def _random_mean_free(rng, grid: Grid, P0: np.ndarray) -> Field:
    """Sum of narrow bumps minus its mass times P0: mean-free by design,
    with tails decaying faster than the reference density."""
    x = grid.axis(0)
    b = np.zeros_like(x)
    for _ in range(int(rng.integers(2, 5))):
        center = rng.uniform(-1.5, 1.5)
        width = rng.uniform(0.35, 0.55)
        b += rng.uniform(-1.0, 1.0) * np.exp(-((x - center) / width) ** 2 / 2)
    b *= 0.05
    b -= integrate(Field(grid, b)) * P0
    return Field(grid, b)


def cmd_variation_check(cfg: dict, opts: dict) -> int:
    grid = _build_grid(cfg)
    params = _build_params(cfg)
    # the reference state must be stationary to machine precision or a
    # leftover linear term pollutes the epsilon^3 remainder, so take the
    # spectral ground state rather than a gradient-descent iterate
    energies, amplitudes = schrodinger_spectrum(params, grid, 1)
    a0 = np.abs(amplitudes[0])
    P0 = np.maximum(a0 * a0, 1e-30 * float((a0 * a0).max()))
    ground = HydroState(normalize(Field(grid, P0), 1e-30),
                        Field(grid, np.zeros(grid.shape)),
                        p_floor=np.finfo(float).tiny)

    rng = np.random.default_rng(opts["seed"])
    probe = _random_mean_free(rng, grid, ground.P.values)
    rows = []
    resids = []
    eps_sweep = (1e-2, 5e-3, 2.5e-3, 1e-3)
    for eps in eps_sweep:
        rep = second_variation(ground, probe, eps, params)
        rows.append({"epsilon": eps,
                     "measured": rep.delta_L_measured,
                     "closed_form": rep.delta_L_closed_form,
                     "residual": rep.residual})
        resids.append(rep.residual)
    order = float(np.polyfit(np.log(eps_sweep[:3]), np.log(resids[:3]), 1)[0])

    n_dirs = opts["samples"]
    if n_dirs < 1:
        raise CliError(1, "validation", "--samples must be >= 1")
    n_positive = 0
    for _ in range(n_dirs):
        rep = second_variation(ground, _random_mean_free(
            rng, grid, ground.P.values), 1e-3, params)
        n_positive += rep.delta_L_measured > 0
    _write_json(cfg, "variation.json", {
        "subcommand": "variation-check",
        "seed": opts["seed"],
        "ground_energy": float(energies[0]),
        "rows": rows,
        "residual_order": order,
        "n_directions": n_dirs,
        "n_positive": n_positive,
    })
    if n_positive != n_dirs:
        raise CliError(2, "not_minimal",
                       f"only {n_positive} of {n_dirs} directions increased "
                       "the energy")
    return 0


_HANDLERS = {
    "evolve": cmd_evolve,
    "equivalence": cmd_equivalence,
    "fisher": cmd_fisher,
    "kahler-check": cmd_kahler_check,
    "ground-state": cmd_ground_state,
    "variation-check": cmd_variation_check,
}


# ---------------------------------------------------------------------------
# argument handling

def _parse_argv(argv: list) -> tuple:
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE, end="")
        return None, None, None
    sub = argv[0]
    if sub not in SUBCOMMANDS:
        raise CliError(1, "usage", f"unknown subcommand {sub!r}; expected one "
                                   f"of {', '.join(SUBCOMMANDS)}")
    opts = {"config": None, "force": False, "seed": 0, "samples": None,
            "delta": 0.1}
    overrides = []
    i = 1
    while i < len(argv):
        tok = argv[i]
        if tok in ("-h", "--help"):
            print(USAGE, end="")
            return None, None, None
        if not tok.startswith("--"):
            raise CliError(1, "usage", f"unexpected argument {tok!r}")
        name = tok[2:]
        if name == "force":
            opts["force"] = True
            i += 1
            continue
        if i + 1 >= len(argv):
            raise CliError(1, "usage", f"flag --{name} needs a value")
        value = argv[i + 1]
        i += 2
        if name == "config":
            opts["config"] = value
        elif name in ("seed", "samples"):
            try:
                opts[name] = int(value)
            except ValueError:
                raise CliError(1, "usage",
                               f"--{name} expects an integer, got "
                               f"{value!r}") from None
        elif name == "delta":
            try:
                opts["delta"] = float(value)
            except ValueError:
                raise CliError(1, "usage", f"--delta expects a number, got "
                                           f"{value!r}") from None
        elif name in _ALIASES:
            overrides.append((".".join(_ALIASES[name]), value))
        elif "." in name:
            overrides.append((name, value))
        else:
            raise CliError(1, "usage", f"unknown flag --{name}")
    if opts["samples"] is None:
        opts["samples"] = 1000 if sub == "kahler-check" else 20
    return sub, opts, overrides


def main(argv=None) -> int:
    args = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        sub, opts, overrides = _parse_argv(args)
        if sub is None:
            return 0
        cfg = load_config(opts["config"], overrides, subcommand=sub)
        return _HANDLERS[sub](cfg, opts)
    except CliError as err:
        print(f"ERROR {err.code}: {err}", file=sys.stderr)
        return err.exit_code
    except ParseError as err:
        print(f"ERROR potential: {err}", file=sys.stderr)
        return 1
    except BlowupError as err:
        print(f"ERROR blowup: {err}; last good step {err.step - 1}",
              file=sys.stderr)
        return 2
    except NodeError as err:
        print(f"ERROR nodes: {err}", file=sys.stderr)
        return 2
    except (GridError, ValueError) as err:
        print(f"ERROR validation: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
