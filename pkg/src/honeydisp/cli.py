"""Command-line entry point: classification maps, decay scans, simulations and the acceptance suite.

Every subcommand resolves its parameters from built-in defaults, an optional
JSON config file (``--config``) and explicit flags, in increasing priority.
The resolved values and the source of each one are embedded in every output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, acceptance, nls, oscillatory, propagator, spectral
from .lattice import CELL_AREA, GEOMETRY, LatticeField, lebesgue_norm, load_field, save_field, wrap_to_rhombic

log = logging.getLogger("honeydisp")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONTRACT = 2


class ConfigError(ValueError):
    """A configuration value failed validation; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# -- parameter schema -----------------------------------------------------------


@dataclass(frozen=True)
class Param:
    default: object
    kind: str  # "int", "float", "str", "vec2", "floats", "bool"
    check: str = ""  # "pos", "nonneg", "sign", "pow2", "gt1", "ge2", ""
    help: str = ""


def _common_outputs(out: str) -> dict:
    return {
        "out": Param(out, "str", help="output file"),
        "figure": Param("", "str", help="optional PNG figure path"),
    }


SCHEMAS: dict[str, dict[str, Param]] = {
    "classify-map": {
        "grid": Param(512, "int", "pos", "samples per side of the rhombic cell"),
        "tol": Param(1e-8, "float", "pos", "threshold for a vanishing curve residual"),
        **_common_outputs("classify_map.csv"),
    },
    "rate-scan": {
        "K": Param([0.3, 0.2], "vec2", "", "frequency in Cartesian coordinates, 'kx,ky'"),
        "delta": Param(0.5, "float", "pos", "localisation radius"),
        "tmin": Param(64.0, "float", "pow2", "first dyadic time"),
        "tmax": Param(8192.0, "float", "pow2", "last dyadic time"),
        "grid_radius": Param(2.0, "float", "pos", "velocity search radius"),
        "workers": Param(0, "int", "nonneg", "worker processes (0: HONEY_WORKERS or all cores)"),
        **_common_outputs("rate_scan.json"),
    },
    "dirac-directional": {
        "theta": Param(math.pi / 6, "float", "", "velocity direction angle"),
        "eps": Param(0.3, "float", "pos", "minimal angular distance from multiples of pi/3"),
        "delta": Param(0.4, "float", "pos", "localisation radius"),
        "tmin": Param(64.0, "float", "pow2", "first dyadic time"),
        "tmax": Param(8192.0, "float", "pow2", "last dyadic time"),
        "grid_radius": Param(2.0, "float", "pos", "velocity search radius"),
        "allow_excluded": Param(False, "bool", "", "permit directions within eps of a multiple of pi/3"),
        "workers": Param(0, "int", "nonneg", "worker processes (0: HONEY_WORKERS or all cores)"),
        **_common_outputs("dirac_directional.json"),
    },
    "simulate-linear": {
        "n": Param(384, "int", "pos", "supercell side"),
        "tmin": Param(4.0, "float", "pos", "first sample time"),
        "tmax": Param(40.0, "float", "pos", "last sample time"),
        "samples": Param(200, "int", "pos", "number of geometrically spaced times"),
        "sub": Param("black", "str", "", "sub-lattice of the initial delta"),
        **_common_outputs("linear.csv"),
    },
    "simulate-nls": {
        "n1": Param(64, "int", "pos", "supercell size along v1"),
        "n2": Param(64, "int", "pos", "supercell size along v2"),
        "p": Param(3.0, "float", "gt1", "nonlinearity power"),
        "sign": Param(1, "int", "sign", "+1 defocusing, -1 focusing"),
        "dt": Param(0.01, "float", "pos", "time step"),
        "r": Param(4.0, "float", "ge2", "decay norm index"),
        "t_final": Param(10.0, "float", "nonneg", "final time"),
        "sample_every": Param(0.5, "float", "pos", "statistics spacing"),
        "init": Param("delta", "str", "", "initial datum: delta, gaussian, random or a field file path"),
        "amplitude": Param(0.1, "float", "", "initial amplitude"),
        "seed": Param(0, "int", "nonneg", "RNG seed for random data"),
        "guard": Param(True, "bool", "", "refuse times beyond the wraparound horizon"),
        "save_field": Param("", "str", "", "optional path for the final field"),
        **_common_outputs("nls.csv"),
    },
    "scatter": {
        "n": Param(384, "int", "pos", "supercell side"),
        "p": Param(3.5, "float", "gt1", "nonlinearity power"),
        "r": Param(4.0, "float", "ge2", "decay norm index"),
        "dt": Param(0.01, "float", "pos", "time step"),
        "norm": Param(0.02, "float", "pos", "L^{r'} norm of the single-site datum"),
        "checkpoints": Param([], "floats", "", "checkpoint times (default: dyadic up to the horizon)"),
        "smallness": Param(0.05, "float", "pos", "smallness threshold for the datum"),
        **_common_outputs("scatter.json"),
    },
    "verify": {
        "suite": Param("primary", "str", "", "criteria suite"),
        "only": Param([], "strs", "", "criterion keys to run, e.g. 1,4/K2"),
        "workers": Param(0, "int", "nonneg", "worker processes (0: HONEY_WORKERS or all cores)"),
        "out": Param("", "str", help="optional JSON report"),
    },
}


def _coerce(name: str, param: Param, value):
    try:
        if param.kind == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if param.kind == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if param.kind == "bool":
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes"):
                    return True
                if value.lower() in ("0", "false", "no"):
                    return False
                raise TypeError
            if not isinstance(value, bool):
                raise TypeError
            return value
        if param.kind == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if param.kind == "vec2":
            vals = [float(x) for x in (value.split(",") if isinstance(value, str) else value)]
            if len(vals) != 2:
                raise TypeError
            return vals
        if param.kind == "floats":
            items = value.split(",") if isinstance(value, str) else value
            return [float(x) for x in items if str(x).strip() != ""]
        if param.kind == "strs":
            items = value.split(",") if isinstance(value, str) else value
            return [str(x).strip() for x in items if str(x).strip()]
    except (TypeError, ValueError):
        pass
    raise ConfigError(name, f"expected {param.kind}, got {value!r}")


def _validate(name: str, param: Param, value) -> None:
    bad = {
        "pos": lambda v: not (v > 0 and math.isfinite(v)),
        "nonneg": lambda v: not (v >= 0 and math.isfinite(v)),
        "sign": lambda v: v not in (1, -1),
        "gt1": lambda v: not v > 1,
        "ge2": lambda v: not v >= 2,
        "pow2": lambda v: not (v > 0 and math.log2(v).is_integer()),
    }
    messages = {
        "pos": "must be positive",
        "nonneg": "must be non-negative",
        "sign": "must be +1 or -1",
        "gt1": "must exceed 1",
        "ge2": "must be at least 2",
        "pow2": "must be a power of two",
    }
    if param.check and bad[param.check](value):
        raise ConfigError(name, f"{messages[param.check]}, got {value!r}")


@dataclass
class RunConfig:
    """Resolved parameters of one subcommand with the source of each value."""

    command: str
    values: dict
    sources: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError as exc:
            raise AttributeError(name) from exc

    def manifest(self) -> dict:
        return {
            "artifact": "honeydisp",
            "version": __version__,
            "command": self.command,
            "config": self.values,
            "config_sources": self.sources,
        }


def load_config(path, command: str = "rate-scan", overrides: dict | None = None) -> RunConfig:
    """Resolve a subcommand configuration from defaults, a JSON file and overrides.

    Parameters
    ----------
    path : str, Path or None
        JSON object with parameter values; unknown keys are logged and ignored.
    command : str
        Subcommand whose schema applies.
    overrides : dict, optional
        Values given explicitly on the command line.

    Raises
    ------
    ConfigError
        A value fails type or range validation; the error names the field.
    """
    if command not in SCHEMAS:
        raise ConfigError("command", f"unknown subcommand {command!r}")
    schema = SCHEMAS[command]
    raw = {}
    if path:
        p = Path(path)
        if not p.is_file():
            raise ConfigError("config", f"file not found: {p}")
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be a JSON object")
    values, sources = {}, {}
    for key in sorted(raw):
        if key.replace("-", "_") not in schema:
            log.warning("ignoring unknown config key %r for %s", key, command)
    for name, param in schema.items():
        if overrides and overrides.get(name) is not None:
            value, src = overrides[name], "flag"
        elif name in raw or name.replace("_", "-") in raw:
            value, src = raw.get(name, raw.get(name.replace("_", "-"))), "file"
        else:
            value, src = param.default, "default"
        value = _coerce(name, param, value)
        _validate(name, param, value)
        values[name], sources[name] = value, src
    cfg = RunConfig(command, values, sources)
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: RunConfig) -> None:
    v = cfg.values
    if "tmin" in v and "tmax" in v and not v["tmax"] > v["tmin"]:
        raise ConfigError("tmax", f"must exceed tmin={v['tmin']}")
    if cfg.command == "verify" and v["suite"] != "primary":
        raise ConfigError("suite", f"unknown suite {v['suite']!r}; only 'primary' exists")
    if cfg.command == "verify" and v["only"]:
        known = list(acceptance.registry())
        for key in v["only"]:
            if not any(k == key or k.startswith(key + "/") for k in known):
                raise ConfigError("only", f"unknown criterion {key!r}")


def resolve_workers(requested: int) -> int:
    """``--workers`` if positive, else ``HONEY_WORKERS``, else the logical core count."""
    if requested > 0:
        return requested
    env = os.environ.get("HONEY_WORKERS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError("HONEY_WORKERS", f"expected a positive integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError("HONEY_WORKERS", f"expected a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


# -- output helpers -------------------------------------------------------------


def _clean(obj):
    return acceptance._jsonable(obj)


def write_json(path, payload: dict) -> None:
    text = json.dumps(_clean(payload), sort_keys=True, indent=2, allow_nan=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_csv(path, header: list[str], rows, manifest: dict) -> None:
    """CSV with a single leading ``#`` line carrying the JSON manifest."""
    buf = io.StringIO(newline="")
    buf.write("# " + json.dumps(_clean(manifest), sort_keys=True) + "\r\n")
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def _figure(path: str, draw) -> None:
    if not path:
        return
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    draw(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def _loglog(ts, ys, slope: float, intercept: float, ylabel: str):
    def draw(ax):
        ax.loglog(ts, ys, "o-", label="measured")
        ax.loglog(ts, np.exp(intercept) * np.asarray(ts) ** slope, "--", label=f"fit slope {slope:.3f}")
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)
        ax.legend()

    return draw


# -- subcommands ----------------------------------------------------------------


def cmd_classify_map(cfg: RunConfig) -> int:
    kx, ky = spectral.rhombic_grid(cfg.grid)
    cls, ph, (a1, a2, a12), det = spectral.classify_grid(kx, ky, cfg.tol)
    n = cfg.grid
    s = (np.arange(n) - n // 2 + (0 if n % 2 else 1)) / n
    S1, S2 = np.meshgrid(s, s, indexing="ij")
    cols = [S1, S2, kx, ky, ph, a1, a2, a12, det]
    flat = [c.reshape(-1) for c in cols]
    labels = np.char.add("K", cls.reshape(-1).astype(str))
    rows = (tuple(float(c[i]) for c in flat) + (labels[i],) for i in range(n * n))
    header = ["s1", "s2", "kx", "ky", "phi", "alpha1", "alpha2", "alpha12", "det_hessian", "class"]
    manifest = cfg.manifest()
    manifest["counts"] = {f"K{j}": int(np.sum(cls == j)) for j in range(4)}
    write_csv(cfg.out, header, rows, manifest)

    def draw(ax):
        im = ax.pcolormesh(kx, ky, cls, shading="auto", cmap="viridis", vmin=0, vmax=3)
        ax.set_aspect("equal")
        ax.set_xlabel("kx")
        ax.set_ylabel("ky")
        ax.figure.colorbar(im, ax=ax, label="class j")

    _figure(cfg.figure, draw)
    log.info("wrote %s (%s)", cfg.out, manifest["counts"])
    return EXIT_OK


def _write_scan(cfg: RunConfig, scan: oscillatory.RateScan, summary: dict) -> Path:
    """Per-time CSV next to the summary JSON written at ``cfg.out``; returns the CSV path."""
    out = Path(cfg.out)
    csv_path = out.with_suffix(".csv") if out.suffix != ".csv" else out.with_name(out.stem + "_samples.csv")
    payload = cfg.manifest()
    payload.update(summary)
    payload.update(
        {
            "exponent": scan.fit.exponent,
            "intercept": scan.fit.intercept,
            "residual": scan.fit.max_residual,
            "t_range": list(scan.fit.t_range),
            "samples_csv": csv_path.name,
        }
    )
    rows = [(float(t), s.sup, float(s.argmax_v[0]), float(s.argmax_v[1]), s.quad_err) for t, s in zip(scan.ts, scan.sups)]
    write_csv(csv_path, ["t", "sup_abs_I", "argmax_vx", "argmax_vy", "quad_err"], rows, cfg.manifest())
    write_json(out, payload)
    return csv_path


def cmd_rate_scan(cfg: RunConfig) -> int:
    K = wrap_to_rhombic(GEOMETRY, cfg.K)
    label = spectral.classify(K).label
    search = oscillatory.SearchConfig(grid_radius=cfg.grid_radius)
    workers = resolve_workers(cfg.workers)
    t0 = time.perf_counter()
    scan = oscillatory.rate_scan(K, cfg.delta, oscillatory.dyadic_times(cfg.tmin, cfg.tmax), search, workers)
    expected = oscillatory.EXPECTED_EXPONENT[label]
    summary = {"K": list(map(float, K)), "class": label, "delta": cfg.delta, "expected_exponent": expected}
    _write_scan(cfg, scan, summary)
    _figure(cfg.figure, _loglog(scan.ts, [s.sup for s in scan.sups], scan.fit.exponent, scan.fit.intercept, "sup_v |I(t, v)|"))
    print(f"{label} at ({K[0]:.6g}, {K[1]:.6g}): fitted exponent {scan.fit.exponent:.4f} (expected {expected:.4f})")
    log.info("rate scan done in %.1fs with %d workers", time.perf_counter() - t0, workers)
    return EXIT_OK


def cmd_dirac_directional(cfg: RunConfig) -> int:
    search = oscillatory.SearchConfig(grid_radius=cfg.grid_radius)
    workers = resolve_workers(cfg.workers)
    scan = oscillatory.dirac_directional_decay(
        cfg.delta, oscillatory.dyadic_times(cfg.tmin, cfg.tmax), cfg.theta, cfg.eps, search, workers, check=not cfg.allow_excluded
    )
    summary = {"K": list(map(float, spectral.DIRAC_POINT)), "class": "K3", "delta": cfg.delta, "theta": cfg.theta}
    _write_scan(cfg, scan, summary)
    _figure(cfg.figure, _loglog(scan.ts, [s.sup for s in scan.sups], scan.fit.exponent, scan.fit.intercept, "sup_s |I(t, s e_theta)|"))
    print(f"theta={cfg.theta:.6g}: fitted exponent {scan.fit.exponent:.4f}")
    return EXIT_OK


def cmd_simulate_linear(cfg: RunConfig) -> int:
    horizon = propagator.wraparound_horizon(cfg.n, cfg.n)
    if cfg.tmax > horizon:
        raise ConfigError("tmax", f"{cfg.tmax} exceeds the wraparound horizon {horizon:.3f} of an {cfg.n}x{cfg.n} grid")
    ts = np.geomspace(cfg.tmin, cfg.tmax, cfg.samples)
    sups = propagator.sup_norm_series(cfg.n, ts, cfg.sub)
    slope, intercept = np.polyfit(np.log(ts), np.log(sups), 1)
    manifest = cfg.manifest()
    manifest.update({"fitted_slope": float(slope), "horizon": horizon})
    write_csv(cfg.out, ["t", "sup_norm"], zip(ts, sups), manifest)
    _figure(cfg.figure, _loglog(ts, sups, float(slope), float(intercept), "||u(t)||_inf"))
    print(f"sup-norm slope {slope:.4f} over t in [{cfg.tmin}, {cfg.tmax}]")
    return EXIT_OK


def _initial_field(cfg: RunConfig) -> LatticeField:
    n1, n2, amp = cfg.n1, cfg.n2, cfg.amplitude
    if cfg.init == "delta":
        return LatticeField.delta(n1, n2, site=(n1 // 2, n2 // 2), amplitude=amp)
    if cfg.init == "gaussian":
        x1, x2 = np.arange(n1)[:, None] - n1 / 2, np.arange(n2)[None, :] - n2 / 2
        g = np.exp(-(x1**2 + x2**2) / 20)
        return LatticeField(amp * np.stack([g, g], axis=-1))
    if cfg.init == "random":
        return LatticeField.random(n1, n2, np.random.default_rng(cfg.seed)) * amp
    path = Path(cfg.init)
    if not path.is_file():
        raise ConfigError("init", f"expected delta, gaussian, random or an existing field file, got {cfg.init!r}")
    f = load_field(path)
    if f.shape != (n1, n2):
        raise ConfigError("init", f"field file has shape {f.shape}, config asks for {(n1, n2)}")
    return f


def cmd_simulate_nls(cfg: RunConfig) -> int:
    try:
        run = nls.NlsConfig(cfg.p, cfg.sign, cfg.dt, cfg.r, cfg.t_final, cfg.sample_every)
    except ValueError as exc:
        raise ConfigError("nls", str(exc)) from exc
    f0 = _initial_field(cfg)
    try:
        u, st = nls.evolve_nls(f0, run, guard=cfg.guard)
    except ValueError as exc:
        raise ConfigError("t_final", str(exc)) from exc
    manifest = cfg.manifest()
    m = np.asarray(st.mass)
    manifest.update(
        {
            "thresholds": {"mass_drift": 1e-10},
            "mass_drift": float(np.abs(m / m[0] - 1).max()) if m[0] > 0 else 0.0,
            "weighted_sup": nls.weighted_decay_sup(st, cfg.r) if cfg.r > 2 else None,
        }
    )
    write_csv(cfg.out, ["t", "mass", "l2", "lr", "weighted_lr", "scattering_diff"], st.rows(), manifest)
    manifest_path = Path(cfg.out).with_suffix(".json")
    write_json(manifest_path, manifest)
    if cfg.save_field:
        save_field(u, cfg.save_field)

    def draw(ax):
        ax.plot(st.times, st.weighted_lr, label="weighted L^r")
        ax.plot(st.times, st.lr_norms, label="L^r")
        ax.set_xlabel("t")
        ax.legend()

    _figure(cfg.figure, draw)
    print(f"mass drift {manifest['mass_drift']:.3e}, weighted sup {manifest['weighted_sup']}")
    return EXIT_OK


def cmd_scatter(cfg: RunConfig) -> int:
    rprime = cfg.r / (cfg.r - 1)
    f0 = LatticeField.delta(cfg.n, cfg.n, amplitude=cfg.norm / CELL_AREA ** (1 / rprime))
    horizon = propagator.wraparound_horizon(cfg.n, cfg.n)
    cps = cfg.checkpoints or [2.0**j for j in range(12) if 2.0**j <= horizon]
    if max(cps) > horizon:
        raise ConfigError("checkpoints", f"last checkpoint {max(cps)} exceeds the wraparound horizon {horizon:.3f}")
    run = nls.NlsConfig(p=cfg.p, sign=1, dt=cfg.dt, r=cfg.r, t_final=max(cps), sample_every=cfg.dt)
    res = nls.extract_scattering_state(f0, run, cps, cfg.smallness)
    if res.warning:
        log.warning(res.warning)
    payload = cfg.manifest()
    payload.update(
        {
            "checkpoints": res.checkpoints,
            "differences": res.differences,
            "initial_norm": res.initial_norm,
            "sigma": nls.sigma_exponent(cfg.r, cfg.p),
            "u_plus_l2": lebesgue_norm(res.u_plus, 2),
            "u0_l2": lebesgue_norm(f0, 2),
            "warning": res.warning,
        }
    )
    write_json(cfg.out, payload)

    def draw(ax):
        ax.loglog(res.checkpoints[1:], res.differences, "o-")
        ax.set_xlabel("checkpoint t")
        ax.set_ylabel("pullback difference")

    _figure(cfg.figure, draw)
    print("pullback differences: " + ", ".join(f"{d:.3e}" for d in res.differences))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    workers = resolve_workers(cfg.workers)
    results = acceptance.run_suite(cfg.only or None, workers=workers)
    if cfg.out:
        payload = cfg.manifest()
        payload["results"] = [r.to_dict() for r in results]
        write_json(cfg.out, payload)
    failed = [r.key for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return EXIT_CONTRACT if failed else EXIT_OK


COMMANDS = {
    "classify-map": (cmd_classify_map, "degeneracy class of every frequency on a rhombic grid"),
    "rate-scan": (cmd_rate_scan, "decay exponent of the localized oscillatory integral at one frequency"),
    "dirac-directional": (cmd_dirac_directional, "decay along one velocity direction at the Dirac point"),
    "simulate-linear": (cmd_simulate_linear, "sup-norm decay of the linear flow from a single site"),
    "simulate-nls": (cmd_simulate_nls, "Strang-split nonlinear evolution with trajectory statistics"),
    "scatter": (cmd_scatter, "pullback differences for small single-site data"),
    "verify": (cmd_verify, "run the acceptance criteria"),
}


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="honeydisp", description="Dispersion and NLS experiments on the honeycomb lattice.")
    parser.add_argument("--version", action="version", version=f"honeydisp {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("--config", help="JSON file with parameter values")
        for key, param in SCHEMAS[name].items():
            flag = "--" + key.replace("_", "-")
            if param.kind == "bool":
                p.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None, help=param.help)
            else:
                p.add_argument(flag, dest=key, default=None, help=f"{param.help} (default: {param.default})")
    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {k: getattr(args, k) for k in SCHEMAS[args.command]}
    try:
        cfg = load_config(args.config, args.command, overrides)
        return COMMANDS[args.command][0](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (spectral.ClassificationError, spectral.SingularPointError, propagator.SingularSymbolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FloatingPointError, spectral.ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


def main() -> None:
    sys.exit(run())
