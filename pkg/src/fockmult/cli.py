"""Command-line front end: ``fockmult {density,interp,sample,reduce,scan}``.

Configuration is a flat ``key = value`` file (``--config``) with optional
``--param key=value`` overrides. Exit status: 0 success, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericError
from .geometry import MultiSet, ScanGrid, density_profile, square_lattice
from .interp import build_local_interpolant, global_interpolate_ls, verify_interpolant
from .io import read_interp_data, read_points, write_points
from .sampling import frame_bounds, phase_scan
from .transform import preservation_report, reduce_set
from .weights import weight_from_config

log = logging.getLogger("fockmult")


def _floats(s: str) -> list:
    return [float(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _ints(s: str) -> list:
    return [int(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# key -> (parser, default)
KEYS = {
    "weight": (str, "classical"),
    "alpha": (float, float(np.pi)),
    "beta": (float, 0.0),
    "mollify_radius": (float, None),
    "order": (int, 16),
    "spacing": (float, 1.0),
    "extent": (float, 30.0),
    "mult": (int, 1),
    "radii": (_floats, [10.0, 15.0, 20.0]),
    "scan_region": (str, "interior"),
    "step_factor": (float, 0.25),
    "N": (int, None),
    "N2": (int, None),
    "R": (float, None),
    "eps": (float, None),
    "rule": (str, "fixed"),
    "rounds": (int, 1),
    "spacings": (_floats, None),
    "s_min": (float, 0.8),
    "s_max": (float, 1.3),
    "s_step": (float, 0.05),
    "Ns": (_ints, [15, 25]),
    "threshold": (float, 0.05),
    "margin": (float, 2.5),
    "workers": (int, 1),
    "local_radius": (float, 0.5),
    "trunc_order": (int, 20),
    "global_solve": (_bool, False),
    "density_radii": (_floats, [3.0, 4.0]),
    "seed": (int, 0),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @classmethod
    def load(cls, path=None, overrides=(), seed=None) -> "RunConfig":
        raw = {}
        if path:
            cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
            cp.optionxform = str
            try:
                text = Path(path).read_text()
            except OSError as exc:
                raise DomainError(f"cannot read config {path}: {exc}") from exc
            try:
                cp.read_string("[run]\n" + text)
            except configparser.Error as exc:
                raise DomainError(f"config {path}: {exc}") from exc
            raw.update(cp["run"])
        for item in overrides:
            if "=" not in item:
                raise DomainError(f"--param expects key=value, got {item!r}")
            k, v = item.split("=", 1)
            raw[k.strip()] = v.strip()
        unknown = sorted(set(raw) - set(KEYS))
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(unknown)}")
        vals = {k: d for k, (_, d) in KEYS.items()}
        for k, v in raw.items():
            try:
                vals[k] = KEYS[k][0](v)
            except ValueError as exc:
                raise DomainError(f"config key {k}: {exc}") from exc
        if seed is not None:
            vals["seed"] = seed
        cfg = cls(vals)
        cfg.validate()
        return cfg

    def validate(self):
        v = self.values
        for k in ("alpha", "spacing", "extent", "step_factor", "local_radius", "threshold"):
            if not v[k] > 0:
                raise DomainError(f"{k} must be positive")
        for k in ("mult", "rounds", "workers"):
            if v[k] < 1:
                raise DomainError(f"{k} must be >= 1")
        if (v["N"] is not None and v["N"] < 0) or (v["N2"] is not None and v["N2"] < 0):
            raise DomainError("N must be nonnegative")
        if v["R"] is not None and not v["R"] > 0:
            raise DomainError("R must be positive")
        if v["eps"] is not None and not v["eps"] > 0:
            raise DomainError("eps must be positive")
        if any(r <= 0 for r in v["radii"]):
            raise DomainError("radii must be positive")

    def weight(self):
        v = self.values
        return weight_from_config(v["weight"], v["alpha"], v["beta"], v["mollify_radius"], v["order"])


def _n(cfg: RunConfig, default: int) -> int:
    return cfg["N"] if cfg["N"] is not None else default


def _load_set(args, cfg: RunConfig) -> MultiSet:
    if args.set:
        try:
            return read_points(args.set)
        except OSError as exc:
            raise DomainError(f"cannot read {args.set}: {exc}") from exc
    return square_lattice(cfg["spacing"], half_width=cfg["extent"], mult=cfg["mult"])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x)}")


def cmd_density(args, cfg, out: Path) -> dict:
    ms = _load_set(args, cfg)
    if len(ms) == 0:
        log.warning("empty point set: reporting zero density")
    rep = density_profile(ms, cfg.weight(), cfg["radii"], ScanGrid(cfg["scan_region"], cfg["step_factor"]))
    with open(out / "density.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "lower", "upper"])
        for r, lo, up in zip(rep.radii, rep.lower, rep.upper):
            w.writerow([repr(float(r)), repr(float(lo)), repr(float(up))])
    summary = rep.to_dict()
    summary["n_points"] = len(ms)
    _write_json(out / "density.json", summary)
    return summary


def cmd_interp(args, cfg, out: Path) -> dict:
    if not args.data:
        raise DomainError("interp needs --data FILE")
    weight = cfg.weight()
    ms = read_points(args.set) if args.set else None
    try:
        data = read_interp_data(args.data, ms)
    except OSError as exc:
        raise DomainError(f"cannot read {args.data}: {exc}") from exc
    points = []
    worst = 0.0
    for i, lam in enumerate(data.set.points):
        c = data.at(i)
        f = build_local_interpolant(lam, cfg["local_radius"], c, weight)
        ver = verify_interpolant(f, weight, cfg["trunc_order"])
        worst = max(worst, ver.max_residual)
        points.append({"re": lam.real, "im": lam.imag, "residuals": ver.residuals.tolist(),
                       "truncation_bound": ver.truncation_bound, "inconclusive": ver.inconclusive,
                       "bound_ratio": f.bound_ratio(weight)})
    summary = {"local": points, "max_local_residual": worst, "data_norm": data.norm(weight)}
    if cfg["global_solve"]:
        summary["global"] = global_interpolate_ls(data, weight, _n(cfg, 20), cfg["R"]).to_dict()
    _write_json(out / "interp.json", summary)
    return summary


def cmd_sample(args, cfg, out: Path) -> dict:
    ms = _load_set(args, cfg)
    N = _n(cfg, 15)
    N2 = cfg["N2"] if cfg["N2"] is not None else N + 5
    rep = frame_bounds(ms, cfg.weight(), N, cfg["R"], N2=N2)
    summary = rep.to_dict()
    summary["n_points"] = len(ms)
    _write_json(out / "sample.json", summary)
    return summary


def cmd_reduce(args, cfg, out: Path) -> dict:
    ms = _load_set(args, cfg)
    weight = cfg.weight()
    plan = reduce_set(ms, cfg["eps"], cfg["rule"], seed=cfg["seed"])
    write_points(out / "reduced.csv", plan.reduced)
    rep = preservation_report(plan, weight, cfg["density_radii"], _n(cfg, 20), cfg["R"])
    summary = {"plan": plan.to_dict(), "preservation": rep}
    _write_json(out / "reduce.json", summary)
    return summary


def cmd_scan(args, cfg, out: Path) -> dict:
    s = cfg["spacings"]
    if s is None:
        s = list(np.round(np.arange(cfg["s_min"], cfg["s_max"] + 0.5 * cfg["s_step"], cfg["s_step"]), 12))
    res = phase_scan(s, cfg["mult"], cfg["alpha"], tuple(cfg["Ns"]), cfg["R"], cfg["threshold"],
                     cfg["margin"], cfg["workers"])
    with open(out / "phase.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "density", "A", "B", "N", "R"])
        for row in res.to_csv_rows():
            w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), repr(float(row[3])),
                        int(row[4]), repr(float(row[5]))])
    summary = res.to_dict()
    _write_json(out / "scan.json", summary)
    return summary


COMMANDS = {
    "density": (cmd_density, "finite-radius density profile of a point set"),
    "interp": (cmd_interp, "local interpolants (and optional global solve) for target data"),
    "sample": (cmd_sample, "finite-section sampling bounds A_N, B_N"),
    "reduce": (cmd_reduce, "multiplicity reduction with preservation report"),
    "scan": (cmd_scan, "lattice-spacing sweep of A_N/B_N"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fockmult", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--set", help="point-set CSV (re,im[,mult]); default: lattice from config")
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="random seed")
        if name == "interp":
            sp.add_argument("--data", help="interpolation data CSV (re,im,j,c_re,c_im)")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.param, args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command][0](args, cfg, out)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    print(json.dumps({"command": args.command, "out": str(out), "ok": True,
                      "keys": sorted(summary)}, default=_jsonable))
    return 0


if __name__ == "__main__":
    sys.exit(main())
