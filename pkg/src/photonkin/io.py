"""CSV and JSON serialisation of results.

Numbers are written with 17 significant digits so files round-trip exactly
and checksums are stable across runs.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .fock import FockVector, PhotonDistribution
from .geometry import MomentumPath


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, np.array(rows)


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_distribution(path, dist: PhotonDistribution):
    return write_csv(path, ["n", "prob"], zip(range(dist.dim), dist.probs))


def distribution_metadata(dist: PhotonDistribution):
    return {"z": dist.z, "m": dist.m, "dim": dist.dim, "deficit": dist.deficit, "mean": dist.mean}


def state_to_dict(state: FockVector, **meta):
    out = {"amps": [[float(a.real), float(a.imag)] for a in state.amps], "dim": state.dim}
    out.update(meta)
    return out


def state_from_dict(d):
    amps = np.array([complex(re, im) for re, im in d["amps"]])
    return FockVector(amps)


def write_path(path, mpath: MomentumPath):
    return write_csv(path, ["px", "py", "pz"], mpath.points)


def read_path(path):
    _, data = read_csv(path)
    return MomentumPath(data.reshape(-1, 3))


def holonomy_to_dict(H, solid_angle=None):
    return {
        "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in H.entries],
        "eigenphases": H.eigenphases(),
        "solid_angle": solid_angle,
        "base_point": H.base_point,
    }


def write_c2_scan(path, rows):
    return write_csv(path, ["q", "c2", "mc_err"], rows)


def write_snapshot(csv_path, json_path, wp):
    from .wavepacket import probability_density

    rho = probability_density(wp)
    write_csv(csv_path, ["x", "re_psi", "im_psi", "density"],
              zip(wp.grid.x, wp.psi.real, wp.psi.imag, rho))
    meta = {
        "a": wp.a,
        "k0": wp.k0,
        "t": wp.t,
        "grid": wp.grid.to_dict(),
        "norm_deficit": 1.0 - wp.norm2(),
        "normalised": True,
    }
    write_json(json_path, meta)
    return csv_path, json_path
