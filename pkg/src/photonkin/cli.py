"""Command-line experiments.

Each command writes CSV/JSON artifacts plus ``manifest.json`` into ``--out``.
Parameters come from built-in defaults, then an INI-style ``--config`` file,
then command-line flags, later sources overriding earlier ones.
"""

import argparse
import configparser
import hashlib
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, fock, geometry, io, stats, wavepacket
from .errors import ConfigError, PhotonkinError
from .kernels import BACKEND_NAME

# command -> {param: (type, default, help)}
PARAMS = {
    "photon-dist": {
        "z_re": (float, 7.0, "real part of the displacement"),
        "z_im": (float, 0.0, "imaginary part of the displacement"),
        "m": (int, 0, "number state being displaced"),
        "dim": (int, 256, "basis size; P(n) is written for n < dim"),
    },
    "drive": {
        "z_abs": (float, 3.0, "target |z| of the Gaussian pulse"),
        "tau": (float, 1.0, "pulse width"),
        "omega": (float, 1.0, "mode frequency"),
        "m": (int, 0, "initial number state"),
        "dim": (int, 128, "basis size"),
    },
    "g2": {
        "source": (str, "fock", "fock, coherent or thermal"),
        "n": (int, 1, "photon number of a Fock source"),
        "mean": (float, 3.0, "mean photon number"),
        "n_max": (int, 400, "truncation of analytic distributions"),
        "samples": (int, 0, "Monte Carlo samples (0 for analytic)"),
    },
    "hbt": {
        "source": (str, "chaotic_gaussian", "chaotic_gaussian or coherent"),
        "radius": (float, 1.0, "rms source radius"),
        "q_max": (float, 3.0, "largest relative momentum"),
        "n_q": (int, 31, "number of scan points"),
        "samples": (int, 1_000_000, "Monte Carlo pairs per point"),
    },
    "berry-loop": {
        "loop": (str, "octant", "octant or latitude"),
        "segments": (int, 900, "total number of segments"),
        "theta": (float, 1.0, "polar angle of a latitude loop"),
        "helicity": (float, 1.0, "helicity lambda"),
    },
    "holonomy": {
        "loop": (str, "octant", "octant, latitude or sphere"),
        "segments": (int, 3000, "total number of segments"),
        "theta": (float, 1.0, "polar angle of a latitude loop"),
    },
    "wavepacket": {
        "n_points": (int, 4096, "grid points (power of two)"),
        "x_min": (float, -40.0, "left end of the periodic domain"),
        "x_max": (float, 40.0, "right end of the periodic domain"),
        "a": (float, 1.0, "initial width"),
        "k0": (float, 0.5, "mean wavenumber"),
        "t": (float, 10.0, "final time"),
        "peak_fraction": (float, wavepacket.PEAK_FRACTION, "peak threshold relative to the maximum"),
    },
    "reproduce-fig1": {
        "z": (float, 7.0, "displacement (real)"),
        "n_max": (int, 120, "largest photon number"),
    },
    "reproduce-fig2": {
        "n_points": (int, 4096, "grid points (power of two)"),
        "x_min": (float, -40.0, "left end of the periodic domain"),
        "x_max": (float, 40.0, "right end of the periodic domain"),
        "k0": (float, 0.5, "mean wavenumber (a = 1)"),
        "t": (float, 10.0, "final time"),
    },
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    output_dir: Path = Path("out")
    seed: int = 0

    def resolved(self):
        """Typed parameters with defaults filled in; raises ConfigError."""
        if self.command not in PARAMS:
            raise ConfigError(f"unknown command {self.command!r}", key="command")
        table = PARAMS[self.command]
        out = {}
        for key, value in self.params.items():
            if key not in table:
                raise ConfigError(f"unknown parameter {key!r} for {self.command}", key=key)
        for key, (typ, default, _) in table.items():
            raw = self.params.get(key, default)
            try:
                out[key] = _coerce(typ, raw)
            except (TypeError, ValueError):
                raise ConfigError(f"parameter {key!r} expects {typ.__name__}, got {raw!r}", key=key) from None
        return out

    def to_dict(self):
        return {"command": self.command, "params": self.resolved(), "seed": self.seed}


def _coerce(typ, raw):
    if typ is int and isinstance(raw, str):
        v = float(raw)
        if v != int(v):
            raise ValueError(raw)
        return int(v)
    if typ is int and isinstance(raw, float):
        if raw != int(raw):
            raise ValueError(raw)
        return int(raw)
    return typ(raw)


@dataclass
class Diagnostic:
    code: str
    message: str
    key: str = None

    def __str__(self):
        key = f" key={self.key}" if self.key else ""
        return f"{self.code}{key}: {self.message}"


@dataclass
class RunManifest:
    config: dict
    artifacts: list
    wall_time: float
    version: str = __version__
    status: str = "ok"
    error: dict = None

    def to_dict(self):
        return {
            "config": self.config,
            "artifacts": self.artifacts,
            "wall_time_s": self.wall_time,
            "version": self.version,
            "backend": BACKEND_NAME,
            "status": self.status,
            "error": self.error,
        }


# -- preconditions ----------------------------------------------------------

def _check(cfg, p):
    """Raise the core-module error a run would hit, without doing the work."""
    c = cfg.command
    if c == "photon-dist":
        if p["dim"] < 1:
            raise ConfigError("dim must be >= 1", key="dim")
        if p["m"] < 0 or p["m"] >= p["dim"]:
            raise ConfigError("m must satisfy 0 <= m < dim", key="m")
        fock._truncation_guard(complex(p["z_re"], p["z_im"]), p["dim"])
    elif c == "drive":
        if p["m"] < 0 or p["m"] >= p["dim"]:
            raise ConfigError("m must satisfy 0 <= m < dim", key="m")
        if p["tau"] <= 0:
            raise ConfigError("tau must be positive", key="tau")
        fock._truncation_guard(p["z_abs"], p["dim"])
    elif c == "g2":
        src = p["source"]
        if src == "fock":
            stats.SourceModel.fock(p["n"])
        elif src in ("coherent", "thermal"):
            stats.SourceModel(src, mean=p["mean"])
        else:
            raise ConfigError(f"unknown source {src!r}", key="source")
        if p["samples"] < 0:
            raise ConfigError("samples must be >= 0", key="samples")
    elif c == "hbt":
        if p["source"] not in ("chaotic_gaussian", "coherent"):
            raise ConfigError(f"unknown source {p['source']!r}", key="source")
        if p["radius"] <= 0:
            raise ConfigError("radius must be positive", key="radius")
        if p["n_q"] < 1:
            raise ConfigError("n_q must be >= 1", key="n_q")
        if p["samples"] < 10_000:
            raise ConfigError("samples must be at least 1e4", key="samples")
    elif c in ("berry-loop", "holonomy"):
        allowed = ("octant", "latitude", "sphere") if c == "holonomy" else ("octant", "latitude")
        if p["loop"] not in allowed:
            raise ConfigError(f"loop must be one of {', '.join(allowed)}", key="loop")
        if p["segments"] < 12:
            raise ConfigError("segments must be >= 12", key="segments")
        if c == "berry-loop":
            try:
                geometry.Helicity(p["helicity"])
            except ValueError as exc:
                raise ConfigError(str(exc), key="helicity") from None
    elif c in ("wavepacket", "reproduce-fig2"):
        try:
            grid = wavepacket.Grid1D(p["n_points"], p["x_min"], p["x_max"])
        except ValueError as exc:
            raise ConfigError(str(exc), key="n_points") from None
        wp = wavepacket.init_gaussian(grid, p.get("a", 1.0), p["k0"])
        wavepacket._wrap_guard(wp, p["t"])
    elif c == "reproduce-fig1":
        if p["n_max"] < 1:
            raise ConfigError("n_max must be >= 1", key="n_max")


def validate(cfg):
    """Dry-run precondition check; an empty list means the config is runnable."""
    try:
        p = cfg.resolved()
    except ConfigError as exc:
        return [Diagnostic(exc.code, str(exc), exc.key)]
    try:
        _check(cfg, p)
    except ConfigError as exc:
        return [Diagnostic(exc.code, str(exc), exc.key)]
    except PhotonkinError as exc:
        return [Diagnostic(exc.code, str(exc))]
    except ValueError as exc:
        return [Diagnostic("ConfigError", str(exc))]
    return []


# -- experiments ------------------------------------------------------------

def _photon_dist(p, out, seed):
    z = complex(p["z_re"], p["z_im"])
    dist = fock.distribution(z, p["m"], p["dim"] - 1)
    io.write_distribution(out / "distribution.csv", dist)
    io.write_json(out / "distribution.json", io.distribution_metadata(dist))
    return ["distribution.csv", "distribution.json"]


def _drive(p, out, seed):
    drive = fock.DriveSignal.gaussian_for_z(p["z_abs"], tau=p["tau"], omega=p["omega"])
    psi0 = fock.FockVector.number_state(p["m"], p["dim"])
    psi, (t, mean_a) = fock.propagate_driven(psi0, drive, return_mean_a=True)
    exact = fock.closed_form_state(psi0, drive)
    disp = fock.drive_displacement(drive)
    io.write_json(out / "state.json", io.state_to_dict(psi, z=disp.z, phase=disp.phase, m=p["m"]))
    stride = max(1, t.size // 2000)
    io.write_csv(out / "mean_a.csv", ["t", "re_a", "im_a"],
                 zip(t[::stride], mean_a.real[::stride], mean_a.imag[::stride]))
    io.write_json(out / "drive.json", {
        "z": disp.z, "phase": disp.phase,
        "fidelity": abs(exact.overlap(psi)) ** 2,
        "norm": psi.norm(),
    })
    return ["state.json", "mean_a.csv", "drive.json"]


def _g2(p, out, seed):
    src = p["source"]
    if p["samples"] > 0 and src != "fock":
        counts = stats.sample_counts(stats.SourceModel(src, mean=p["mean"]), p["samples"], seed)
        res = stats.g2_from_counts(counts)
    elif src == "fock":
        res = stats.g2_fock(p["n"])
    elif src == "coherent":
        res = stats.g2_from_distribution(stats.poisson_distribution(p["mean"], p["n_max"]))
    else:
        res = stats.g2_from_distribution(stats.thermal_distribution(p["mean"], p["n_max"]))
    body = res.to_dict()
    body["source"] = src
    io.write_json(out / "g2.json", body)
    return ["g2.json"]


def _hbt(p, out, seed):
    if p["source"] == "coherent":
        source = stats.SourceModel.coherent(radius=p["radius"])
    else:
        source = stats.SourceModel.chaotic_gaussian(p["radius"])
    q = np.linspace(0.0, p["q_max"], p["n_q"])
    rows = stats.c2_scan(source, q, n_samples=p["samples"], seed=seed)
    io.write_c2_scan(out / "c2_scan.csv", rows)
    summary = {"source": source.kind.value, "radius": source.radius}
    if source.kind is stats.SourceKind.CHAOTIC_GAUSSIAN:
        summary["halfwidth"] = stats.c2_halfwidth(source)
    io.write_json(out / "hbt.json", summary)
    return ["c2_scan.csv", "hbt.json"]


def _loop(p):
    if p["loop"] == "octant":
        return geometry.octant_loop(max(1, p["segments"] // 3))
    if p["loop"] == "latitude":
        return geometry.latitude_loop(p["theta"], p["segments"])
    return geometry.full_sphere_sweep(max(1, p["segments"] // 8))


def _berry_loop(p, out, seed):
    path = _loop(p)
    phase = geometry.loop_phase_from_cocycles(path, p["helicity"])
    omega = geometry.solid_angle(path)
    io.write_path(out / "path.csv", path)
    io.write_json(out / "berry.json", {
        "phase": phase, "phase_reduced": float(geometry.reduce_phase(phase)),
        "solid_angle": omega, "helicity": p["helicity"], "segments": path.n_segments,
    })
    return ["path.csv", "berry.json"]


def _holonomy(p, out, seed):
    path = _loop(p)
    H = geometry.holonomy(path)
    io.write_path(out / "path.csv", path)
    io.write_json(out / "holonomy.json", io.holonomy_to_dict(H, geometry.solid_angle(path)))
    return ["path.csv", "holonomy.json"]


def _packet_run(out, grid, a, k0, t, fraction, tag):
    wp0 = wavepacket.init_gaussian(grid, a, k0)
    wpt = wavepacket.evolve(wp0, t)
    files = []
    for wp, name in ((wp0, "t0"), (wpt, f"t{t:g}")):
        c, j = f"{tag}_{name}.csv", f"{tag}_{name}.json"
        io.write_snapshot(out / c, out / j, wp)
        files += [c, j]
    peaks = wavepacket.peak_report(wpt, fraction)
    io.write_json(out / f"{tag}_peaks.json", {
        "t": t, "a": a, "k0": k0,
        "peaks": [pk.to_dict() for pk in peaks],
        "forward_fraction": wavepacket.forward_fraction(wp0),
    })
    return files + [f"{tag}_peaks.json"]


def _wavepacket(p, out, seed):
    grid = wavepacket.Grid1D(p["n_points"], p["x_min"], p["x_max"])
    return _packet_run(out, grid, p["a"], p["k0"], p["t"], p["peak_fraction"], "wavepacket")


def _fig1(p, out, seed):
    files = []
    for m in (0, 1):
        dist = fock.distribution(p["z"], m, p["n_max"])
        name = f"fig1_m{m}.csv"
        io.write_distribution(out / name, dist)
        files.append(name)
    return files


def _fig2(p, out, seed):
    grid = wavepacket.Grid1D(p["n_points"], p["x_min"], p["x_max"])
    return _packet_run(out, grid, 1.0, p["k0"], p["t"], wavepacket.PEAK_FRACTION, "fig2")


RUNNERS = {
    "photon-dist": _photon_dist,
    "drive": _drive,
    "g2": _g2,
    "hbt": _hbt,
    "berry-loop": _berry_loop,
    "holonomy": _holonomy,
    "wavepacket": _wavepacket,
    "reproduce-fig1": _fig1,
    "reproduce-fig2": _fig2,
}


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run(cfg):
    """Execute ``cfg``; ``manifest.json`` is written whether or not it succeeds."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    files, error = [], None
    try:
        echo = cfg.to_dict()
    except ConfigError as exc:
        echo = {"command": cfg.command, "params": dict(cfg.params), "seed": cfg.seed}
        error = exc
    if error is None:
        try:
            params = echo["params"]
            _check(cfg, params)
            files = RUNNERS[cfg.command](params, out, cfg.seed)
        except Exception as exc:  # recorded in the manifest, then re-raised
            error = exc
    manifest = RunManifest(
        config=echo,
        artifacts=[{"file": f, "sha256": _sha256(out / f), "bytes": (out / f).stat().st_size} for f in files],
        wall_time=time.perf_counter() - start,
    )
    if error is not None:
        manifest.status = "error"
        manifest.error = {"code": _code(error), "message": str(error),
                          "key": getattr(error, "key", None)}
    io.write_json(out / "manifest.json", manifest.to_dict())
    if error is not None:
        raise error
    return manifest


# -- argument parsing --------------------------------------------------------

def read_config_file(path):
    """Flat ``key = value`` file; an optional section header is ignored."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None)
    if not text.lstrip().startswith("["):
        text = "[config]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file: {exc}".replace("\n", " ")) from None
    values = {}
    for section in parser.sections():
        values.update(parser[section])
    return {k.replace("-", "_"): v for k, v in values.items()}


def build_parser():
    ap = argparse.ArgumentParser(prog="photonkin", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, table in PARAMS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="INI-style key = value file")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--dry-run", action="store_true", help="only validate and print diagnostics")
        for key, (typ, default, text) in table.items():
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=str, default=None,
                            help=f"{text} (default {default})")
    return ap


def config_from_args(args):
    file_vals = read_config_file(args.config) if args.config else {}
    file_vals.pop("command", None)
    out = args.out or file_vals.pop("out", None) or "out"
    file_vals.pop("out", None)
    seed_raw = args.seed if args.seed is not None else file_vals.pop("seed", 0)
    file_vals.pop("seed", None)
    try:
        seed = _coerce(int, seed_raw)
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {seed_raw!r}", key="seed") from None
    params = dict(file_vals)
    for key in PARAMS[args.command]:
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    return ExperimentConfig(args.command, params, Path(out), seed)


def _code(exc):
    return getattr(exc, "code", type(exc).__name__)


def _fail(exc):
    key = getattr(exc, "key", None)
    tag = f" key={key}" if key else ""
    msg = str(exc).replace("\n", " ")
    print(f"photonkin: error code={_code(exc)}{tag}: {msg}", file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except PhotonkinError as exc:
        _fail(exc)
        return 2
    if args.dry_run:
        diags = validate(cfg)
        for d in diags:
            print(d)
        return 1 if diags else 0
    try:
        manifest = run(cfg)
    except ConfigError as exc:
        _fail(exc)
        return 2
    except (PhotonkinError, ValueError, OSError) as exc:
        _fail(exc)
        return 1
    for a in manifest.artifacts:
        print(cfg.output_dir / a["file"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
