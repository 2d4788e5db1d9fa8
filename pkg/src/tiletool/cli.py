"""Command-line front end wiring constructions to verifications.

Every run resolves its configuration (config file, then flag overrides),
embeds the resolved config and seed in each JSON output, and writes all
files atomically.  Identical config and seed produce byte-identical
outputs.  Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import os

# honor the thread cap before numpy initializes its backends
_threads = os.environ.get("TILETOOL_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import sys

import numpy as np

from . import fixed_point, interpolation, verify
from .core import (
    BandlimitedFunction,
    PeriodicStructure,
    PointSet,
    bump,
    make_bandlimited,
    write_atomic,
)

USAGE_EXIT = 2
DOMAIN_EXIT = 1


class UsageError(Exception):
    pass


def _write_json(path: str, payload: dict, config: dict) -> None:
    payload = dict(payload)
    payload["config"] = {k: config[k] for k in sorted(config)}
    payload["seed"] = config.get("seed")
    write_atomic(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: str, rows) -> None:
    write_atomic(path, "".join(",".join(f"{v:.17g}" for v in row) + "\n" for row in rows))


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return cfg


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """File config overridden by explicitly passed flags."""
    cfg = dict(defaults)
    cfg.update(_load_config_file(getattr(args, "config", None)))
    for key, val in vars(args).items():
        if key in ("config", "func", "command") or val is None:
            continue
        cfg[key] = val
    for key in defaults:
        cfg.setdefault(key, defaults[key])
    return cfg


def _sibling(path: str, name: str) -> str:
    return os.path.join(os.path.dirname(os.path.abspath(path)), name)


def _parse_progressions(text: str) -> PeriodicStructure:
    progs = []
    try:
        for part in text.split(","):
            a, b = part.split(":")
            progs.append((float(a), float(b)))
    except ValueError as exc:
        raise UsageError(f"bad progression spec {text!r}; expected 'a:b,a:b,...'") from exc
    return PeriodicStructure(tuple(progs))


def _parse_intervals(text: str) -> interpolation.OmegaSpec:
    ivs = []
    try:
        for part in text.split(","):
            lo, hi = part.split(":")
            ivs.append((float(lo), float(hi)))
    except ValueError as exc:
        raise UsageError(f"bad interval spec {text!r}; expected 'lo:hi,lo:hi,...'") from exc
    return interpolation.OmegaSpec(tuple(ivs))


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip() != ""]


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


# ----------------------------------------------------------------------
# Subcommand handlers


def _cmd_construct_lambda(args):
    defaults = {
        "r": None, "n": 32, "tol": 1e-12, "eps": 0.5, "max_iter": 60,
        "seed": None, "out": "lambda.csv", "report": None,
    }
    cfg = _resolve(args, defaults)
    if cfg["r"] is None:
        report = fixed_point.solve_displacements_auto(
            cfg["n"], tol=cfg["tol"], max_iter=cfg["max_iter"], eps=cfg["eps"]
        )
    else:
        report = fixed_point.solve_displacements(
            cfg["r"], cfg["n"], tol=cfg["tol"], max_iter=cfg["max_iter"], eps=cfg["eps"]
        )
    lam = fixed_point.build_translation_set(report.alpha)
    lam.to_csv(cfg["out"])
    report_path = cfg["report"] or _sibling(cfg["out"], "solve_report.json")
    _write_json(report_path, report.to_json(), cfg)
    print(f"wrote {cfg['out']} ({len(lam)} points) and {report_path}")
    return 0


def _cmd_build_tiler(args):
    defaults = {
        "w": 1.0, "a": 0.4, "grid_size": 4097,
        "flatness": fixed_point.TILER_FLATNESS, "seed": None, "out": "tiler.json",
    }
    cfg = _resolve(args, defaults)
    f = fixed_point.build_schwartz_tiler(
        cfg["w"], cfg["a"], grid_size=cfg["grid_size"], flatness=cfg["flatness"]
    )
    payload = f.to_json()
    _write_json(cfg["out"], payload, cfg)
    print(f"wrote {cfg['out']}")
    return 0


def _cmd_verify_tiling(args):
    defaults = {
        "lam": "lambda.csv", "tiler": "tiler.json", "xmin": -4.0, "xmax": 4.0,
        "samples": 129, "margin": None, "seed": None,
        "out": "sum.csv", "verdict": None,
    }
    cfg = _resolve(args, defaults)
    lam = PointSet.from_csv(cfg["lam"])
    with open(cfg["tiler"]) as fh:
        f = BandlimitedFunction.from_json(json.load(fh))
    xs = np.linspace(cfg["xmin"], cfg["xmax"], cfg["samples"])
    result = verify.tiling_sum(f, lam, xs, tail_margin=cfg["margin"])
    _write_csv(cfg["out"], zip(xs, result.grid.samples.real))
    verdict_path = cfg["verdict"] or _sibling(cfg["out"], "verdict.json")
    _write_json(
        verdict_path,
        {
            "levelRe": result.level.real,
            "levelIm": result.level.imag,
            "maxDeviation": result.max_deviation,
            "tailBound": result.tail_bound,
            "reportedDeviation": result.reported_deviation,
            "points": len(lam),
        },
        cfg,
    )
    print(
        f"level {result.level.real:.6g}, deviation {result.max_deviation:.3g} "
        f"(+ tail bound {result.tail_bound:.3g}); wrote {cfg['out']} and {verdict_path}"
    )
    return 0


def _cmd_interpolate(args):
    defaults = {
        "nodes": None, "omega": "0:1000", "eps": 0.5, "p": 4,
        "values": None, "seed": 0, "out": "system.json",
    }
    cfg = _resolve(args, defaults)
    if cfg["nodes"] is None:
        raise UsageError("interpolate requires --nodes (comma-separated or CSV path)")
    if os.path.exists(cfg["nodes"]):
        with open(cfg["nodes"]) as fh:
            nodes = [float(line) for line in fh if line.strip()]
    else:
        nodes = _parse_floats(cfg["nodes"])
    nodes = np.sort(np.asarray(nodes, dtype=float))
    omega = _parse_intervals(cfg["omega"])
    if cfg["values"] is not None:
        values = np.asarray(_parse_floats(cfg["values"]), dtype=complex)
        if values.size != nodes.size:
            raise UsageError("need one target value per node")
    else:
        rng = np.random.default_rng(cfg["seed"])
        decay = 2.0 ** -np.arange(nodes.size)
        values = (rng.standard_normal(nodes.size) + 1j * rng.standard_normal(nodes.size)) * decay
    system = interpolation.build_system(
        nodes, values, omega, eps=cfg["eps"], p=cfg["p"]
    )
    solution = interpolation.solve_coeffs(system)
    payload = interpolation.system_to_json(system, solution)
    interpolant = interpolation.synthesize_interpolant(system, solution.coefficients)
    payload["nodeResidual"] = interpolant.node_residual()
    _write_json(cfg["out"], payload, cfg)
    print(
        f"wrote {cfg['out']} (M = {system.row_sum_bound:.4g}, "
        f"node residual {payload['nodeResidual']:.3g})"
    )
    return 0


def _cmd_density(args):
    defaults = {"lam": "lambda.csv", "seed": None, "out": "density.json"}
    cfg = _resolve(args, defaults)
    lam = PointSet.from_csv(cfg["lam"])
    report = verify.density_report(lam)
    _write_json(cfg["out"], report.to_json(), cfg)
    print(
        f"maxPerUnit {report.max_per_unit}, D {report.uniform_density:.6g}, "
        f"maxGap {report.max_gap:.6g}, growth {report.growth_exponent:.3g}; wrote {cfg['out']}"
    )
    return 0


_PROFILES = {
    "bump": lambda t, radius: bump(t / radius, flatness=3),
    "xsq-bump": lambda t, radius: (t / radius) ** 2 * bump(t / radius, flatness=3),
    "bump-sq": lambda t, radius: bump(t / radius, flatness=3) ** 2,
}


def _cmd_pair_test(args):
    defaults = {
        "lam": "lambda.csv", "radius": 0.35, "profile": "bump",
        "grid_size": 2049, "seed": None, "out": "pairing.json",
    }
    cfg = _resolve(args, defaults)
    if cfg["profile"] not in _PROFILES:
        raise UsageError(f"unknown profile {cfg['profile']!r}; pick from {sorted(_PROFILES)}")
    if not 0 < cfg["radius"] < 0.5:
        raise UsageError("radius must lie in (0, 1/2)")
    lam = PointSet.from_csv(cfg["lam"])
    shape = _PROFILES[cfg["profile"]]
    psi = make_bandlimited(
        lambda t: shape(t, cfg["radius"]), cfg["radius"], grid_size=cfg["grid_size"]
    )
    pairing = verify.pair_with_test_function(lam, psi)
    # reference value psi(0) - psi''(0)/(4 pi^2) via a five-point stencil
    h = 1e-3
    stencil = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    weights = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    vals = shape(stencil, cfg["radius"])
    psi0 = float(shape(np.zeros(1), cfg["radius"])[0])
    psi2 = float(np.dot(weights, vals))
    expected = psi0 - psi2 / (4 * np.pi**2)
    _write_json(
        cfg["out"],
        {
            "pairing": pairing.value,
            "tailBound": pairing.tail_bound,
            "expected": expected,
            "absError": abs(pairing.value - expected),
        },
        cfg,
    )
    print(
        f"pairing {pairing.value:.8g} vs expected {expected:.8g} "
        f"(|err| {abs(pairing.value - expected):.3g}); wrote {cfg['out']}"
    )
    return 0


def _cmd_spectrum(args):
    defaults = {"progressions": "1:0", "tmax": 5.0, "seed": None, "out": "spectrum.json"}
    cfg = _resolve(args, defaults)
    ps = _parse_progressions(cfg["progressions"])
    spec = verify.periodic_spectrum(ps, cfg["tmax"])
    _write_json(
        cfg["out"],
        {
            "atoms": [
                {"location": a.location, "weightRe": a.weight.real, "weightIm": a.weight.imag}
                for a in spec.atoms
            ]
        },
        cfg,
    )
    print(f"{len(spec.atoms)} atoms up to |t| <= {cfg['tmax']}; wrote {cfg['out']}")
    return 0


def _cmd_detect_structure(args):
    defaults = {
        "lam": "lambda.csv", "max_progressions": 4, "tol": 1e-9,
        "seed": None, "out": "structure.json",
    }
    cfg = _resolve(args, defaults)
    lam = PointSet.from_csv(cfg["lam"])
    found = verify.detect_periodic_structure(lam, cfg["max_progressions"], cfg["tol"])
    payload = {
        "found": found is not None,
        "progressions": None
        if found is None
        else [[a, b] for a, b in found.progressions],
    }
    _write_json(cfg["out"], payload, cfg)
    if found is None:
        print(f"no periodic structure up to {cfg['max_progressions']} progressions; wrote {cfg['out']}")
    else:
        print(f"found {len(found.progressions)} progression(s); wrote {cfg['out']}")
    return 0


def _cmd_cyclic_check(args):
    defaults = {
        "n": 12, "exhaustive": False, "max_f": 3, "max_l": 4,
        "f": None, "lam": None, "seed": None, "out": None,
    }
    cfg = _resolve(args, defaults)
    if cfg["exhaustive"]:
        out = cfg["out"] or "census.json"
        census = verify.cyclic_census(cfg["n"], cfg["max_f"], cfg["max_l"])
        _write_json(out, census.to_json(), cfg)
        agree = census.total - len(census.disagreements)
        print(f"census: {agree}/{census.total} agreements; wrote {out}")
        return 0 if not census.disagreements else 1
    if cfg["f"] is None or cfg["lam"] is None:
        raise UsageError("cyclic-check needs either --exhaustive or both --f and --lam")
    out = cfg["out"] or "check.json"
    f = np.zeros(cfg["n"], dtype=complex)
    vals = _parse_floats(cfg["f"])
    if len(vals) > cfg["n"]:
        raise UsageError("--f holds more entries than the modulus")
    f[: len(vals)] = vals
    inst = verify.CyclicInstance(cfg["n"], f, tuple(_parse_ints(cfg["lam"])))
    result = verify.cyclic_tiling_check(inst)
    _write_json(out, result.to_json(), cfg)
    print(
        f"direct {'tiles' if result.direct_tiles else 'no'}, "
        f"spectral {'tiles' if result.spectral_tiles else 'no'}; wrote {out}"
    )
    return 0


# ----------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tiletool",
        description="Construct and verify translational tilings of the line.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.set_defaults(func=func)
        return p

    p = add("construct-lambda", _cmd_construct_lambda,
            "solve the displacement sequence and write the scattered set")
    p.add_argument("--r", type=float, help="displacement scale (omit to auto-select)")
    p.add_argument("--N", dest="n", type=int, help="index window half-width")
    p.add_argument("--tol", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("-o", "--out")
    p.add_argument("--report", help="solve report path (default: solve_report.json)")

    p = add("build-tiler", _cmd_build_tiler, "write a band-limited zero-integral tiler")
    p.add_argument("--w", type=float, help="tiling level")
    p.add_argument("--a", type=float, help="band radius in (0, 1/2)")
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("--flatness", type=int)
    p.add_argument("-o", "--out")

    p = add("verify-tiling", _cmd_verify_tiling, "sample a tiling sum and report the level")
    p.add_argument("--lambda", dest="lam", help="point set CSV")
    p.add_argument("--tiler", help="tiler JSON")
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--margin", type=float)
    p.add_argument("-o", "--out")
    p.add_argument("--verdict")

    p = add("interpolate", _cmd_interpolate, "sparse-spectrum interpolation pipeline")
    p.add_argument("--nodes", help="CSV path or comma-separated node list")
    p.add_argument("--omega", help="host intervals 'lo:hi,lo:hi,...'")
    p.add_argument("--eps", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--values", help="comma-separated real target values")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--out")

    p = add("density", _cmd_density, "density statistics of a point set")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("-o", "--out")

    p = add("pair-test", _cmd_pair_test, "pair a point set with a test function")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--radius", type=float)
    p.add_argument("--profile", choices=sorted(_PROFILES))
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("-o", "--out")

    p = add("spectrum", _cmd_spectrum, "pure point spectrum of a periodic structure")
    p.add_argument("--progressions", help="'a:b,a:b,...'")
    p.add_argument("--tmax", type=float)
    p.add_argument("-o", "--out")

    p = add("detect-structure", _cmd_detect_structure,
            "search for an arithmetic-progression representation")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--max-progressions", dest="max_progressions", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("-o", "--out")

    p = add("cyclic-check", _cmd_cyclic_check, "cyclic-group tiling verdicts")
    p.add_argument("--N", dest="n", type=int, help="modulus")
    p.add_argument("--exhaustive", action="store_true", default=None)
    p.add_argument("--maxF", dest="max_f", type=int)
    p.add_argument("--maxL", dest="max_l", type=int)
    p.add_argument("--f", help="comma-separated function values")
    p.add_argument("--lam", help="comma-separated translation subset")
    p.add_argument("-o", "--out")

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DOMAIN_EXIT


if __name__ == "__main__":
    sys.exit(main())
