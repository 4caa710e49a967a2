"""``timeslit`` command line.

Exit codes: 0 success, 1 configuration or input error, 2 engine failure,
3 convergence failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .classical import classical_support
from .config import PRESETS, ConfigError, load_config, load_preset, preset_text
from .pulse import PulseParams

EXIT_OK, EXIT_CONFIG, EXIT_ENGINE, EXIT_CONVERGENCE = 0, 1, 2, 3


def _add_common(sp):
    sp.add_argument("--config", metavar="PATH", help="run configuration (INI)")
    sp.add_argument("--preset", choices=PRESETS, help="use a bundled configuration instead of --config")
    sp.add_argument("--out", metavar="DIR", help="output directory")
    sp.add_argument("--deterministic", action="store_true", help="fixed-order reductions (single BLAS thread)")
    sp.add_argument("--threads", type=int, metavar="N", help="limit BLAS/LAPACK threads")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="timeslit", description="Time double-slit ionization of hydrogen.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the engines selected by a configuration")
    _add_common(r)

    c = sub.add_parser("compare", help="compare the peaks of two 1-D distribution files")
    c.add_argument("a", help="reference CSV (e.g. an sfa spectrum)")
    c.add_argument("b", help="CSV compared against the reference")
    c.add_argument("--window", type=float, default=None, help="matching window (default 0.15 or from --config)")
    c.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"), help="only peaks inside [LO, HI]")
    c.add_argument("--prominence", type=float, default=None)
    _add_common(c)

    b = sub.add_parser("classical-bounds", help="print classical momentum and energy support")
    b.add_argument("--omega", type=float, default=0.05)
    b.add_argument("--f0", type=float, default=0.075)
    _add_common(b)

    p = sub.add_parser("presets", help="list bundled presets or print one")
    p.add_argument("name", nargs="?", choices=PRESETS)
    p.add_argument("--out", metavar="DIR", help="write the preset file(s) into DIR")
    return ap


def _config(args):
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.preset:
        return load_preset(args.preset)
    if args.config:
        return load_config(args.config)
    return None


def _cmd_run(args) -> int:
    from .runner import ConvergenceFailure, EngineFailure, run

    cfg = _config(args)
    if cfg is None:
        raise ConfigError("run needs --config PATH or --preset NAME")
    out = Path(args.out or f"runs/{cfg.name}")
    try:
        manifest = run(cfg, out, deterministic=args.deterministic, threads=args.threads)
    except ConvergenceFailure as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except EngineFailure as exc:
        print(f"engine failure: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    for w in manifest["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {len(manifest['files'])} files and manifest.json to {out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    from .runner import compare_files

    cfg = _config(args)
    window = args.window if args.window is not None else (cfg.analysis["window"] if cfg else 0.15)
    prom = args.prominence if args.prominence is not None else (cfg.analysis["min_prominence"] if cfg else 0.02)
    lo, hi = args.range if args.range else (None, None)
    try:
        text = compare_files(args.a, args.b, window, lo, hi, prom)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    cfg = _config(args)
    pulses = cfg.pulses if cfg else [PulseParams.from_cycles(args.omega, args.f0, 1.0)]
    for p in pulses:
        print(f"omega = {p.omega:g}, f0 = {p.f0:g}, quiver momentum f0/omega = {p.quiver_momentum:g}")
        for n in (1, 2):
            s = classical_support(PulseParams.from_cycles(p.omega, p.f0, 1.0), n)
            print(f"  after {n} half cycle(s): kz in [{s.p_min:g}, {s.p_max:g}]")
        print(f"  E_max = {s.e_max:g}")
    return EXIT_OK


def _cmd_presets(args) -> int:
    names = [args.name] if args.name else list(PRESETS)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for n in names:
            (out / f"{n}.ini").write_text(preset_text(n))
        print(f"wrote {len(names)} preset(s) to {out}")
    elif args.name:
        print(preset_text(args.name), end="")
    else:
        for n in names:
            first = preset_text(n).splitlines()[0].lstrip("# ")
            print(f"{n}: {first}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": _cmd_run, "compare": _cmd_compare, "classical-bounds": _cmd_bounds,
                "presets": _cmd_presets}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
