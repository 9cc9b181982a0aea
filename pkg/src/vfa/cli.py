"""Command line harness: ``vfa <subcommand> [flags]``.

Every subcommand resolves its configuration from built-in defaults, an
optional preset, an optional JSON ``--config`` file and explicit flags (in
that order of precedence) and records the resolved configuration in the
``#`` header of each CSV it writes.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, List, Optional

import numpy as np

from . import __version__, acceptance, experiments, shaping
from .errors import VFAError
from .fpe import PhaseDistribution, default_grid
from .io import companion_path, write_csv, write_pgm
from .apps import image as img

DEFAULTS: Dict[str, dict] = {
    "kernel": {"dist": "uniform", "family": "hadamard", "n": "1024", "trials": 100, "seed": 0, "grid": "5:0.05"},
    "kernel2d": {"mode": "cartesian", "family": "hadamard", "n": "1024", "trials": 10, "seed": 0, "grid": "8:0.25"},
    "decode": {"mode": "point", "n": "64,128,256", "snr_list": "-10,0,10,20", "terms": "1,2,3,4,5,6,7,8",
               "trials": 100, "seed": 0, "beta": 1.6, "k_max": 20, "refine": False},
    "density": {"k": "81", "n": "32,64,128,256,512", "trials": 100, "seed": 0, "f_c": 0.4, "exact": True},
    "regress": {"k": "150", "n": "64,256,1024,4096", "trials": 100, "seed": 0, "method": "tikhonov,empirical",
                "c_empirical": 20.0, "c_tikhonov": 30.0, "lam": 0.01, "noise_var": 0.01, "exact": True},
    "image": {"text": "A", "n": "4096", "seed": 0, "dx": 12, "dy": 6, "input": None},
    "selftest": {"seed": acceptance.DEFAULT_SEED, "only": None},
}

PRESETS: Dict[str, Dict[str, dict]] = {
    "density-demo": {"density": {"k": "81", "n": "32,64,128,256,512", "f_c": 0.4, "trials": 100}},
    "regression-demo": {"regress": {"k": "150", "n": "64,256,1024,4096", "c_empirical": 20.0, "c_tikhonov": 30.0,
                          "lam": 0.01, "noise_var": 0.01, "trials": 100}},
    "image-demo": {"image": {"text": "A", "n": "4096", "dx": 12, "dy": 6}},
}

# short aliases accepted by --preset
PRESET_ALIASES = {"fig10": "density-demo", "fig11": "regression-demo"}

QUICK_TRIALS = 10


class UsageError(Exception):
    """Invalid flag value; reported with exit status 2."""


# parsing helpers -----------------------------------------------------------------


def int_list(text, name: str) -> List[int]:
    try:
        vals = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated integers, got {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise UsageError(f"--{name} values must be positive integers")
    return vals


def float_list(text, name: str) -> List[float]:
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"--{name} needs at least one value")
    return vals


def str_list(text) -> List[str]:
    # ';' separates entries that themselves contain ':' arguments, ',' works otherwise
    sep = ";" if ";" in str(text) else ","
    return [v.strip() for v in str(text).split(sep) if v.strip()]


def parse_grid(text) -> np.ndarray:
    """``half_width:step`` to a symmetric grid."""
    try:
        hw, step = (float(v) for v in str(text).split(":"))
    except ValueError:
        raise UsageError(f"--grid expects HALF_WIDTH:STEP, got {text!r}") from None
    if hw <= 0 or step <= 0:
        raise UsageError("--grid values must be positive")
    return default_grid(hw, step)


def positive(value, name: str):
    if value is None or value <= 0:
        raise UsageError(f"--{name} must be positive")
    return value


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def resolve(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults, preset, config file and explicit flags."""
    cfg = dict(DEFAULTS[command])
    if args.preset:
        preset = PRESETS[PRESET_ALIASES.get(args.preset, args.preset)].get(command)
        if preset is None:
            raise UsageError(f"preset {args.preset!r} does not apply to {command!r}")
        cfg.update(preset)
    from_file = load_config(args.config)
    unknown = set(from_file) - set(cfg) - {"quick", "out"}
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
    cfg.update(from_file)
    for key in list(cfg) + ["quick", "out"]:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg.setdefault("quick", False)
    cfg.setdefault("out", None)
    if cfg["quick"] and "trials" in cfg:
        cfg["trials"] = min(int(cfg["trials"]), QUICK_TRIALS)
    if "trials" in cfg:
        cfg["trials"] = int(positive(int(cfg["trials"]), "trials"))
    return cfg


def header(command: str, cfg: dict) -> dict:
    shown = {k: v for k, v in cfg.items() if k != "out"}
    return {"vfa": __version__, "command": command, "seed": cfg.get("seed"), "config": shown}


# subcommands ---------------------------------------------------------------------


def cmd_kernel(cfg: dict) -> int:
    dists = str_list(cfg["dist"])
    for d in dists:
        PhaseDistribution.parse(d)
    families = str_list(cfg["family"])
    ns = int_list(cfg["n"], "n")
    grid = parse_grid(cfg["grid"])
    estimates, rmse_rows = experiments.kernel_sweep(dists, families, ns, grid, cfg["trials"], int(cfg["seed"]))
    meta = header("kernel", cfg)
    rows = [row for est in estimates for row in est.rows()]
    write_csv(cfg["out"], ("d", "mean", "std", "n", "trials", "family", "dist"), rows, meta)
    side = companion_path(cfg["out"], "rmse")
    if side is not None:
        write_csv(side, ("dist", "family", "n", "trials", "rmse"), rmse_rows, meta)
    return 0


def cmd_kernel2d(cfg: dict) -> int:
    mode = cfg["mode"]
    if mode not in shaping.MODES and not str(mode).startswith("lattice:"):
        raise UsageError(f"--mode must be one of {', '.join(shaping.MODES)} or lattice:<name>")
    (n,) = int_list(cfg["n"], "n")[:1]
    grid = parse_grid(cfg["grid"])
    est, summary = experiments.kernel_2d(mode, n, cfg["trials"], int(cfg["seed"]), grid, cfg["family"])
    meta = header("kernel2d", cfg)
    meta["summary"] = summary
    write_csv(cfg["out"], est.kernel_columns, est.kernel_rows(), meta)
    side = companion_path(cfg["out"], "spectrum")
    if side is not None:
        write_csv(side, est.spectrum_columns, est.spectrum_rows(), meta)
    return 0


def cmd_decode(cfg: dict) -> int:
    ns = int_list(cfg["n"], "n")
    seed = int(cfg["seed"])
    beta = positive(float(cfg["beta"]), "beta")
    k_max = int(positive(int(cfg["k_max"]), "k-max"))
    meta = header("decode", cfg)
    if cfg["mode"] == "point":
        snrs = float_list(cfg["snr_list"], "snr-list")
        rows = experiments.decode_point_sweep(ns, snrs, cfg["trials"], seed, beta, k_max)
        write_csv(cfg["out"], ("snr_db", "n", "rmse"), rows, meta)
    elif cfg["mode"] == "function":
        terms = int_list(cfg["terms"], "terms")
        rows = experiments.decode_function_sweep(ns, terms, cfg["trials"], seed, beta, k_max, bool(cfg["refine"]))
        write_csv(cfg["out"], ("terms", "n", "cosine_sim"), rows, meta)
    else:
        raise UsageError("--mode for decode must be 'point' or 'function'")
    return 0


def _with_exact(ns: List[int], exact: bool) -> List[Optional[int]]:
    return ([None] if exact else []) + list(ns)


def cmd_density(cfg: dict) -> int:
    ks = int_list(cfg["k"], "k")
    ns = int_list(cfg["n"], "n")
    f_c = positive(float(cfg["f_c"]), "f-c")
    rows = []
    for k in ks:
        for n in _with_exact(ns, bool(cfg["exact"])):
            m = experiments.density_mise(n, k, cfg["trials"], int(cfg["seed"]), f_c)
            rows.append((k, "exact" if n is None else n, m, "numeric" if n is None else "vfa"))
    write_csv(cfg["out"], ("k", "n", "mise", "method"), rows, header("density", cfg))
    return 0


def cmd_regress(cfg: dict) -> int:
    ks = int_list(cfg["k"], "k")
    ns = int_list(cfg["n"], "n")
    methods = str_list(cfg["method"])
    if not methods or any(m not in ("tikhonov", "empirical") for m in methods):
        raise UsageError("--method takes tikhonov and/or empirical")
    lam = float(cfg["lam"])
    if lam < 0:
        raise UsageError("--lam must be >= 0")
    rows = []
    for method in methods:
        c = positive(float(cfg["c_" + method]), "c-" + method)
        for k in ks:
            for n in _with_exact(ns, bool(cfg["exact"])):
                r = experiments.regression_rmse(method, n, k, cfg["trials"], int(cfg["seed"]), c, lam,
                                                 float(cfg["noise_var"]))
                rows.append((k, "exact" if n is None else n, r, method))
    write_csv(cfg["out"], ("k", "n", "rmse", "method"), rows, header("regress", cfg))
    return 0


def _display(a: np.ndarray) -> np.ndarray:
    lo, hi = float(a.min()), float(a.max())
    return np.zeros_like(a) if hi <= lo else (a - lo) / (hi - lo)


def cmd_image(cfg: dict) -> int:
    from .io import read_pgm

    (n,) = int_list(cfg["n"], "n")[:1]
    if cfg["input"]:
        original = read_pgm(cfg["input"])
    else:
        text = str(cfg["text"])
        if not text:
            raise UsageError("--text must not be empty")
        original = np.zeros((img.HEIGHT, img.WIDTH))
        width = img.WIDTH // len(text)
        scale = max(1, min(8, width // 5))
        for i, ch in enumerate(text):
            x0 = i * width + (width - 5 * scale) // 2
            original = np.maximum(original, img.render_glyph(ch, scale=scale, x0=x0))
    h, w = original.shape
    ex, ey = img.image_encoders(n, int(cfg["seed"]), w, h)
    scene = img.image_encode(original, ex, ey)
    decoded = img.image_decode(scene)
    moved = img.image_decode(img.image_translate(scene, int(cfg["dx"]), int(cfg["dy"])))
    prefix = cfg["out"] or "image"
    if prefix == "-":
        raise UsageError("image output needs a file prefix")
    for tag, picture in (("original", original), ("scene", _display(decoded)), ("translated", _display(moved))):
        write_pgm(f"{prefix}_{tag}.pgm", picture)
    corr = img.correlation(decoded, original)
    rows = [("scene", corr), ("translated", img.correlation(moved, np.roll(original, (int(cfg["dy"]), int(cfg["dx"])), (0, 1))))]
    write_csv(f"{prefix}_summary.csv", ("panel", "correlation"), rows, header("image", cfg))
    return 0


def cmd_selftest(cfg: dict) -> int:
    ids = None
    if cfg["only"]:
        ids = int_list(cfg["only"], "only")
        valid = {c[0] for c in acceptance.CRITERIA}
        if set(ids) - valid:
            raise UsageError(f"--only accepts criteria {sorted(valid)}")
    out = acceptance.run(ids, bool(cfg["quick"]), int(cfg["seed"]), stream=sys.stdout)
    passed = sum(o.passed for o in out)
    print(f"{passed}/{len(out)} criteria passed")
    return 0 if passed == len(out) else 1


COMMANDS = {
    "kernel": cmd_kernel,
    "kernel2d": cmd_kernel2d,
    "decode": cmd_decode,
    "density": cmd_density,
    "regress": cmd_regress,
    "image": cmd_image,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vfa", description="Vector function architecture experiments.")
    parser.add_argument("--version", action="version", version=f"vfa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=True):
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output CSV path or prefix ('-' for stdout)")
        p.add_argument("--preset", choices=sorted(PRESETS) + sorted(PRESET_ALIASES))
        p.add_argument("--config", help="JSON file with flag values")
        p.add_argument("--quick", action="store_true", default=None, help="reduced trial counts")
        if trials:
            p.add_argument("--trials", "--runs", dest="trials", type=int)

    p = sub.add_parser("kernel", help="1-D kernel estimates and RMSE against the limit kernel")
    common(p)
    p.add_argument("--dist", help="phase distributions, e.g. uniform,gaussian:1")
    p.add_argument("--family", help="binding families, e.g. hadamard,circular,block:32")
    p.add_argument("--n", help="dimensions, comma separated")
    p.add_argument("--grid", help="HALF_WIDTH:STEP of the displacement grid")

    p = sub.add_parser("kernel2d", help="2-D kernel and its power spectrum")
    common(p)
    p.add_argument("--mode", help="cartesian, tensor, hex_joint, hex_concat, hex_cc or lattice:<name>")
    p.add_argument("--family")
    p.add_argument("--n")
    p.add_argument("--grid")

    p = sub.add_parser("decode", help="point decoding under noise or function peeling")
    common(p)
    p.add_argument("--mode", choices=("point", "function"))
    p.add_argument("--n")
    p.add_argument("--snr-list", dest="snr_list")
    p.add_argument("--terms")
    p.add_argument("--beta", type=float)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--refine", action="store_true", default=None)

    p = sub.add_parser("density", help="band-limited density estimation MISE sweep")
    common(p)
    p.add_argument("--k")
    p.add_argument("--n")
    p.add_argument("--f-c", dest="f_c", type=float)
    p.add_argument("--no-exact", dest="exact", action="store_false", default=None)

    p = sub.add_parser("regress", help="kernel regression RMSE sweep")
    common(p)
    p.add_argument("--k")
    p.add_argument("--n")
    p.add_argument("--method")
    p.add_argument("--c-empirical", dest="c_empirical", type=float)
    p.add_argument("--c-tikhonov", dest="c_tikhonov", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--noise-var", dest="noise_var", type=float)
    p.add_argument("--no-exact", dest="exact", action="store_false", default=None)

    p = sub.add_parser("image", help="encode, decode and translate a 56x56 image")
    common(p, trials=False)
    p.add_argument("--text")
    p.add_argument("--input", help="PGM image to encode instead of rendered text")
    p.add_argument("--n")
    p.add_argument("--dx", type=int)
    p.add_argument("--dy", type=int)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    common(p, trials=False)
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except (UsageError, VFAError) as exc:
        print(f"vfa {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"vfa {args.command}: error: invalid value: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
