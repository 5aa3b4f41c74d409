"""Command-line interface: ``qmargulis {search,build,simulate,diagnose,info}``.

Exit status: 0 success, 2 usage error, 3 search budget exhausted, 4 I/O or
file-format failure. Each command writes its primary outputs
deterministically; run details that vary between runs (timestamps) go to a
``<output>.manifest.json`` sidecar.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import secrets
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channel_sim import SimConfig, config_echo, points_to_csv, run_curve
from .code_builder import (
    CodeFileError,
    GeneratorSets,
    build_2bga,
    dumps,
    export_alist,
    load,
    margulis_generators,
)
from .decoder import VARIANTS, DecoderConfig
from .diagnostics import StabilizerExperiment, half_weight_injections, run_stabilizer_experiment
from .finite_group import GroupSpec
from .girth_search import SearchConfig, SearchExhausted, get_generators, progress_printer
from .tanner_graph import (
    TannerGraph,
    census_signature,
    code_girth,
    girth,
    is_automorphism,
    natural_right_action,
    neighborhood_cycle_census,
    neighborhood_dot,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EXHAUSTED = 3
EXIT_IO = 4

DIAGNOSE_MODES = ("girth", "census", "automorphism", "stab-experiment", "entropy-trace")

log = logging.getLogger("qmargulis")


class UsageError(Exception):
    pass


# -- helpers -------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _pairs(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        m, sep, q = item.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"pairs are written m:q, got {item!r}")
        out.append((int(m), int(q)))
    return out


def _group(text: str) -> GroupSpec:
    try:
        return GroupSpec.from_text(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(32)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _manifest(path: Path, command: str, config: dict, seed: int | None, code_file: Path | None = None) -> None:
    doc = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "code_file_sha256": _sha256(code_file) if code_file is not None else None,
        "output": path.name,
        "output_sha256": _sha256(path) if path.is_file() else None,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    Path(str(path) + ".manifest.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _load_code(path: str):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such code file: {path}")
    return load(p), p


def _decoder_cfg(args) -> DecoderConfig:
    try:
        return DecoderConfig(variant=args.variant, beta=args.beta, max_iters=args.max_iters, osd0=args.osd0)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- commands ------------------------------------------------------------------


def cmd_search(args) -> int:
    seed = _seed(args)
    try:
        cfg = SearchConfig(
            target_girth=args.girth,
            r=args.r,
            max_restarts=args.max_restarts,
            max_replacements_per_restart=args.max_replacements,
            rng_seed=seed,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    progress = progress_printer(sys.stderr) if args.progress else None
    try:
        code, stats = get_generators(args.group, cfg, progress)
    except SearchExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.stats, sort_keys=True), file=sys.stderr)
        return EXIT_EXHAUSTED
    out = Path(args.out)
    _write(out, dumps(code))
    if args.alist:
        export_alist(code, args.alist)
    echo = {"group": args.group.to_text(), "r": args.r, "girth": args.girth,
            "max_restarts": args.max_restarts, "max_replacements": args.max_replacements}
    _manifest(out, "search", echo, seed)
    print(json.dumps(code.summary(), sort_keys=False))
    return EXIT_OK


def cmd_build(args) -> int:
    group = args.group
    if args.margulis is not None:
        if group.kind != "sl2":
            raise UsageError("--margulis needs an sl2 group")
        if not args.pairs_a or not args.pairs_b:
            raise UsageError("--margulis needs --pairs-a and --pairs-b")
        try:
            a = [e.index for e in margulis_generators(group.params[0], args.margulis, args.pairs_a)]
            b = [e.index for e in margulis_generators(group.params[0], args.margulis, args.pairs_b)]
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        if args.A is None or args.B is None:
            raise UsageError("give --A and --B, or --margulis with pairs")
        a, b = args.A, args.B
    try:
        code = build_2bga(group, GeneratorSets(a, b), strict=not args.allow_unbalanced)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    code.girth_certificate = code_girth(code)
    out = Path(args.out)
    _write(out, dumps(code))
    if args.alist:
        export_alist(code, args.alist)
    _manifest(out, "build", {"group": group.to_text(), "A": list(code.gens.A), "B": list(code.gens.B)}, None)
    if code.k == 0:
        print("warning: code has trivial dimension (k = 0)", file=sys.stderr)
    print(json.dumps(code.summary(), sort_keys=False))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if not args.eps:
        raise UsageError("--eps needs at least one value")
    seed = _seed(args)
    code, path = _load_code(args.code)
    dcfg = _decoder_cfg(args)
    try:
        cfg = SimConfig(
            eps=tuple(args.eps),
            min_samples=args.min_samples,
            min_failures=args.min_failures,
            max_trials=args.max_trials,
            rng_seed=seed,
            workers=args.workers,
            batch_size=args.batch_size,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if cfg.max_trials < cfg.min_samples:
        raise UsageError("--max-trials must be at least --min-samples")
    progress = progress_printer(sys.stderr) if args.progress else None
    points = run_curve(code, cfg, dcfg, progress)
    out = Path(args.out)
    _write(out, points_to_csv(points))
    _manifest(out, "simulate", config_echo(cfg, dcfg), seed, path)
    for p in points:
        flag = " (censored)" if p.censored else ""
        print(f"eps={p.eps:g} trials={p.trials} failures={p.failures} ler={p.ler:.4g}{flag}")
    return EXIT_OK


def _diag_girth(code, out_dir: Path, args) -> list[Path]:
    rows = ["side,girth"]
    values = {}
    for side in ("X", "Z"):
        values[side] = girth(TannerGraph.from_code(code, side))
        rows.append(f"{side},{values[side] if values[side] is not None else ''}")
    known = [v for v in values.values() if v is not None]
    overall = min(known) if known else None
    rows.append(f"code,{overall if overall is not None else ''}")
    path = out_dir / "girth.csv"
    _write(path, "\n".join(rows) + "\n")
    print(f"girth: {overall}")
    if code.girth_certificate is not None and code.girth_certificate != overall:
        print(f"warning: stored certificate {code.girth_certificate} differs", file=sys.stderr)
    return [path]


def _diag_census(code, out_dir: Path, args) -> list[Path]:
    t = TannerGraph.from_code(code, args.side)
    lines = ["check,signature"]
    first_with: dict[str, int] = {}
    for i in range(t.m):
        sig = census_signature(neighborhood_cycle_census(t, i, args.depth))
        text = " ".join(f"{length}:{count}" for length, count in sig)
        lines.append(f"{i},{text}")
        first_with.setdefault(text, i)
    paths = [out_dir / "census.csv"]
    _write(paths[0], "\n".join(lines) + "\n")
    for num, (text, i) in enumerate(sorted(first_with.items(), key=lambda kv: kv[1])[: args.dot_limit]):
        p = out_dir / f"neighborhood_check{i}.dot"
        _write(p, neighborhood_dot(t, i, args.depth, name=f"check{i}"))
        paths.append(p)
    print(f"distinct signatures: {len(first_with)}")
    return paths


def _diag_automorphism(code, out_dir: Path, args) -> list[Path]:
    group = code.group.build()
    tx = TannerGraph.from_code(code, "X")
    tz = TannerGraph.from_code(code, "Z")
    lines = ["h,automorphism_x,automorphism_z,normalizes_a"]
    count = 0
    for h in range(group.order):
        pi = natural_right_action(code, h, group)
        ax, az = is_automorphism(tx, pi), is_automorphism(tz, pi)
        count += ax and az
        lines.append(f"{h},{int(ax)},{int(az)},{int(group.normalizes(h, code.gens.A))}")
    path = out_dir / "automorphism.csv"
    _write(path, "\n".join(lines) + "\n")
    if count == group.order:
        print(f"all {group.order} actions are automorphisms")
    else:
        print(f"{count} of {group.order} actions are automorphisms")
    return [path]


def _injections(code, args):
    inj = list(half_weight_injections(code))
    if not inj:
        raise UsageError("code has no symmetric single-row stabilizer")
    return inj


def _diag_stab(code, out_dir: Path, args) -> list[Path]:
    dcfg = _decoder_cfg(args)
    lines = ["injection,support,error,iterations,converged,reached_zero,final_W"]
    inj = _injections(code, args)
    limit = len(inj) if args.limit is None else min(args.limit, len(inj))
    hits = 0
    for idx in range(limit):
        s, e = inj[idx]
        tr = run_stabilizer_experiment(code, StabilizerExperiment(s, e, dcfg, args.eps))
        hits += tr.reached_zero
        supp = " ".join(map(str, np.flatnonzero(s)))
        err = " ".join(map(str, np.flatnonzero(e)))
        lines.append(f"{idx},{supp},{err},{tr.iterations},{int(tr.converged)},{int(tr.reached_zero)},{tr.weights[-1]}")
    path = out_dir / "stab_experiment.csv"
    _write(path, "\n".join(lines) + "\n")
    print(f"{hits} of {limit} injections reach W = 0")
    return [path]


def _diag_entropy(code, out_dir: Path, args) -> list[Path]:
    dcfg = _decoder_cfg(args)
    inj = _injections(code, args)
    if args.injection is not None:
        if not 0 <= args.injection < len(inj):
            raise UsageError(f"--injection must be in [0, {len(inj)})")
        order = [args.injection]
    else:
        order = range(len(inj))
    trace = None
    for idx in order:
        s, e = inj[idx]
        trace = run_stabilizer_experiment(code, StabilizerExperiment(s, e, dcfg, args.eps))
        if args.injection is not None or trace.reached_zero:
            break
    trace_path = out_dir / "entropy_trace.csv"
    phase_path = out_dir / "phase_portrait.csv"
    _write(trace_path, trace.series_csv())
    _write(phase_path, trace.phase_portrait_csv())
    print(f"injection {idx}: {trace.iterations} iterations, reached W = 0: {trace.reached_zero}")
    return [trace_path, phase_path]


_DIAGNOSE = {
    "girth": _diag_girth,
    "census": _diag_census,
    "automorphism": _diag_automorphism,
    "stab-experiment": _diag_stab,
    "entropy-trace": _diag_entropy,
}


def cmd_diagnose(args) -> int:
    code, path = _load_code(args.code)
    out_dir = Path(args.out_dir)
    paths = _DIAGNOSE[args.mode](code, out_dir, args)
    echo = {"mode": args.mode, "side": args.side, "depth": args.depth, "variant": args.variant,
            "beta": args.beta, "max_iters": args.max_iters, "eps": args.eps}
    for p in paths:
        _manifest(p, "diagnose", echo, None, path)
    return EXIT_OK


def cmd_info(args) -> int:
    code, _ = _load_code(args.code)
    summary = code.summary()
    for key in ("n", "k", "d_v", "d_c", "girth", "group", "A", "B"):
        print(f"{key}: {summary[key]}")
    if code.k == 0:
        print("warning: code has trivial dimension (k = 0)", file=sys.stderr)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _add_decoder_flags(p: argparse.ArgumentParser, default_iters: int = 300) -> None:
    p.add_argument("--variant", choices=VARIANTS, default="nMS")
    p.add_argument("--beta", type=float, default=0.875)
    p.add_argument("--max-iters", type=int, default=default_iters)
    p.add_argument("--osd0", action="store_true", help="OSD-0 post-processing when message passing fails")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmargulis", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of option defaults; command-line flags take precedence")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="randomised search for generators meeting a girth target")
    p.add_argument("--group", type=_group, required=True, help="e.g. sl2:5, cyclic:12, product:6,6")
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--girth", type=int, default=6)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-restarts", type=int, default=50)
    p.add_argument("--max-replacements", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--alist", help="also write <prefix>_hx.alist and <prefix>_hz.alist")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("build", help="build a code from explicit generators")
    p.add_argument("--group", type=_group, required=True)
    p.add_argument("--A", type=_int_list)
    p.add_argument("--B", type=_int_list)
    p.add_argument("--margulis", type=int, metavar="ETA", help="conjugated unipotent generators with this eta")
    p.add_argument("--pairs-a", type=_pairs)
    p.add_argument("--pairs-b", type=_pairs)
    p.add_argument("--allow-unbalanced", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--alist")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("simulate", help="Monte Carlo logical error rate under depolarizing noise")
    p.add_argument("code")
    p.add_argument("--eps", type=_float_list, required=True)
    _add_decoder_flags(p)
    p.add_argument("--min-samples", type=int, default=100_000)
    p.add_argument("--min-failures", type=int, default=20)
    p.add_argument("--max-trials", type=int, default=10_000_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=512)
    p.add_argument("--out", required=True)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diagnose", help="structural and decoder diagnostics")
    p.add_argument("code")
    p.add_argument("--mode", choices=DIAGNOSE_MODES, required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--side", choices=("X", "Z"), default="X")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--dot-limit", type=int, default=3)
    p.add_argument("--eps", type=float, default=0.05, help="sets the decoder prior")
    p.add_argument("--limit", type=int, help="number of injections for stab-experiment")
    p.add_argument("--injection", type=int, help="injection index for entropy-trace")
    _add_decoder_flags(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("info", help="print code parameters")
    p.add_argument("code")
    p.set_defaults(func=cmd_info)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    path = Path(known.config)
    try:
        config = json.loads(path.read_text())
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise UsageError("config file must hold a JSON object")
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((tok for tok in rest if tok in sub.choices), None)
    if command is None:
        return parser.parse_args(argv)
    # top-level scalars apply to every command, a nested object to its command only
    section = config.get(command, {})
    if not isinstance(section, dict):
        raise UsageError(f"config entry {command!r} must be an object")
    shared = {k: v for k, v in config.items() if k not in sub.choices}
    subparser = sub.choices[command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in {**shared, **section}.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or not action.option_strings:
            raise UsageError(f"unknown option {key!r} for {command} in config file")
        if isinstance(value, list) and action.type in (_int_list, _float_list):
            value = action.type(",".join(str(x) for x in value))
        elif isinstance(value, str) and action.type not in (None, str):
            try:
                value = action.type(value)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config option {key!r}: {exc}") from exc
        defaults[dest] = value
        action.required = False
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CodeFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
