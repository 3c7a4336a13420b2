"""Command-line experiment runner.

Subcommands: decode-sweep, diagnostics, statmech, verify, dump-lattice.
Exit codes: 0 success, 1 validation error, 2 verification failure, 3 budget exceeded.

Every flag may also be given in a JSON config file (``--config``); flags on the
command line win.  CSV goes to stdout or ``--csv``; the JSON summary goes to
``--json`` or stderr.  Both start from a header carrying the config hash.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Sequence

import numpy as np

from . import __version__
from . import oracle as oracle_mod
from . import statmech
from .channel import effective_rate, invert_effective_rate
from .decoder import class_probabilities_exact, class_probabilities_rbim, ml_decode_color, ml_fidelity
from .diagnostics import DiagnosticsRequest, evaluate
from .lattice import COLORS, build_lattice, superlattice

THREADS_ENV = "FLOQUET_MEMORY_THREADS"
SCHEMA_VERSION = 1
RNG_SCHEME = "numpy PCG64 via SeedSequence(seed, spawn_key=task key)"
VERIFY_TOLERANCE = 1e-9

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH, EXIT_BUDGET = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# --- parsing helpers ----------------------------------------------------------

def parse_size(text: str):
    try:
        a, b = text.lower().split("x")
        size = (int(a), int(b))
    except ValueError:
        raise ConfigError(f"size must look like 2x2, got {text!r}")
    if min(size) < 1:
        raise ConfigError(f"size must be positive, got {text!r}")
    return size


def parse_sizes(text) -> List[tuple]:
    if isinstance(text, (list, tuple)):
        return [tuple(s) if not isinstance(s, str) else parse_size(s) for s in text]
    return [parse_size(s) for s in str(text).split(",") if s]


def parse_grid(text) -> List[float]:
    """Either a comma list or lo:hi:count (inclusive, evenly spaced)."""
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text)
    try:
        if ":" in text:
            lo, hi, count = text.split(":")
            return [round(float(x), 12) for x in np.linspace(float(lo), float(hi), int(count))]
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}")


def parse_ints(text) -> List[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    try:
        return [int(x) for x in str(text).split(",") if x]
    except ValueError:
        raise ConfigError(f"cannot parse integer list {text!r}")


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")


def _check_rates(grid, upper=0.5, lower=0.0, name="p"):
    if not grid:
        raise ConfigError(f"{name} grid is empty")
    for p in grid:
        if not (lower <= p <= upper):
            raise ConfigError(f"{name}={p} outside [{lower}, {upper}]")


# --- output -------------------------------------------------------------------

def config_hash(config: Dict) -> str:
    keep = {k: v for k, v in config.items() if k not in ("csv", "json", "config", "workers", "func")}
    blob = json.dumps(keep, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def header_lines(config: Dict) -> List[str]:
    return [f"floquet-memory {__version__}", f"config-hash {config_hash(config)}", f"rng {RNG_SCHEME}",
            f"schema {SCHEMA_VERSION}", f"command {config.get('command')}"]


def write_csv(config: Dict, columns: Sequence[str], rows: List[Sequence]) -> None:
    buf = io.StringIO()
    for line in header_lines(config):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in sorted(rows, key=lambda r: tuple(str(x) for x in r)):
        w.writerow([_fmt(x) for x in r])
    _emit(config.get("csv"), buf.getvalue(), sys.stdout)


def write_json(config: Dict, summary: Dict) -> None:
    doc = {"header": dict(zip(("version", "config_hash", "rng", "schema", "command"),
                              [line.split(" ", 1)[1] for line in header_lines(config)])),
           "schema_version": SCHEMA_VERSION, **summary}
    _emit(config.get("json"), json.dumps(doc, indent=1, sort_keys=True, default=_json_default) + "\n", sys.stderr)


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    return str(x)


def _emit(path, text, stream):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        stream.write(text)


def _map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


# --- decode-sweep -------------------------------------------------------------

def _task_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1)[0])


def _fidelity_point(size, p, trials, seed, color):
    est = ml_fidelity(build_lattice(*size), p, trials, seed, color)
    return est.fidelity, est.ci, est.success_rate, est.success_ci


def cmd_decode_sweep(config: Dict) -> int:
    sizes = parse_sizes(config["sizes"])
    grid = parse_grid(config["p"])
    _check_rates(grid)
    trials = int(config["trials"])
    if trials < 2:
        raise ConfigError("trials must be >= 2")
    if config.get("seed") is None:
        raise ConfigError("seed is mandatory for stochastic runs")
    seed = int(config["seed"])
    color = config.get("color", "B")
    if color not in COLORS:
        raise ConfigError(f"color must be one of {COLORS}")
    tasks = [(s, p, trials, _task_seed(seed, s[0], s[1], k), color) for s in sizes for k, p in enumerate(grid)]
    results = _map(_fidelity_point, tasks, int(config["workers"]))
    rows, curves = [], {}
    for (s, p, _, _, _), (fid, ci, rate, rate_ci) in zip(tasks, results):
        rows.append((p, f"{s[0]}x{s[1]}", trials, fid, ci[0], ci[1], rate, rate_ci[0], rate_ci[1]))
        curves.setdefault(s, []).append(fid)
    write_csv(config, ["p", "size", "trials", "fidelity", "ci_low", "ci_high", "success_rate",
                       "success_low", "success_high"], rows)
    summary = {"sizes": [list(s) for s in sizes], "grid": grid}
    if len(sizes) >= 2:
        try:
            ordered = {k: np.array(curves[s]) for k, s in enumerate(sorted(sizes, key=lambda s: s[0] * s[1]))}
            value, pairs = statmech.crossing_estimate(grid, ordered)
            summary["crossing"] = {"p": value, "pairs": pairs}
        except statmech.NoCrossing as exc:
            summary["crossing"] = {"p": None, "reason": str(exc)}
    if config.get("replay"):
        summary["replay"] = replay_dumps(config["replay"], float(grid[0]) if grid else 0.0)
    write_json(config, summary)
    return EXIT_OK


def replay_dumps(path: str, p: float) -> Dict:
    """Decode every trial in a circuit dump (one JSON object per line) and count class agreements."""
    agree = total = 0
    p_eff = effective_rate(p) if p > 0 else 1e-12
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            lat = build_lattice(*doc["size"])
            for c in COLORS:
                defects = set()
                for period in doc["changes"]:
                    defects ^= {k for k, bit in enumerate(period[c]) if bit}
                kappa, _, _ = ml_decode_color(lat, c, defects, p_eff)
                agree += list(kappa) == list(doc["true_class"][c])
                total += 1
    return {"file": path, "p": p, "decoded": total, "agreeing": agree}


# --- diagnostics --------------------------------------------------------------

def _diagnostics_point(n, p, size, variant, steady):
    res = evaluate(DiagnosticsRequest(n, p, size, variant, steady))
    return res.d_em, res.i_c, res.defect_free_energies


def cmd_diagnostics(config: Dict) -> int:
    ns = parse_ints(config["n"])
    grid = parse_grid(config["p"])
    _check_rates(grid)
    size = parse_sizes(config["size"])[0]
    variants = [v for v in str(config["variant"]).split(",") if v]
    for v in variants:
        if v not in ("floquet", "toric"):
            raise ConfigError(f"unknown variant {v!r}")
    for n in ns:
        if n < 2:
            raise ConfigError("n must be >= 2")
    steady = bool(config.get("steady_state", False))
    tasks = [(n, p, size, v, steady) for v in variants for n in ns for p in grid]
    results = _map(_diagnostics_point, tasks, int(config["workers"]))
    rows = []
    for (n, p, _, v, _), (d, i, dfs) in zip(tasks, results):
        rows.append((p, n, v, f"{size[0]}x{size[1]}", d, i, json.dumps(dfs, sort_keys=True)))
    write_csv(config, ["p", "n", "variant", "size", "D_em", "I_c", "delta_f"], rows)
    write_json(config, {"points": len(rows), "size": list(size), "steady_state": steady})
    return EXIT_OK


# --- statmech -----------------------------------------------------------------

def _flavor_point(size, n, p, steady):
    res = evaluate(DiagnosticsRequest(n, p, size, "floquet", steady))
    return {k: v for k, v in res.defect_free_energies.items() if k.startswith("em:")}


def cmd_statmech(config: Dict) -> int:
    mode = config.get("mode", "rbim")
    if mode == "rbim":
        widths = parse_ints(config["widths"])
        grid = parse_grid(config["p"])
        _check_rates(grid, lower=1e-12, name="p_eff")
        if len(widths) < 2:
            raise ConfigError("need at least two widths")
        if config.get("seed") is None:
            raise ConfigError("seed is mandatory for stochastic runs")
        samples = int(config["samples"])
        if samples < 2:
            raise ConfigError("samples must be >= 2")
        aspect = float(config.get("aspect", 1.0))
        seed = int(config["seed"])
        tables = statmech._delta_f_tables(sorted(widths), grid, samples, seed, aspect, int(config["workers"]))
        rows = []
        for w in sorted(widths):
            t = tables[w]
            for k, p in enumerate(grid):
                rows.append((w, p, "", "seam", float(t[:, k].mean()), float(t[:, k].std(ddof=1) / math.sqrt(samples))))
        write_csv(config, ["size", "p", "n", "d", "delta_f", "err"], rows)
        try:
            est = statmech.locate_rbim_threshold(widths, grid, samples, seed, aspect, tables=tables)
            summary = {"crossing": {"p_eff": est.value, "ci": list(est.ci), "pairs": est.pair_crossings,
                                    "physical_p": invert_effective_rate(est.value)}}
        except statmech.NoCrossing as exc:
            summary = {"crossing": None, "reason": str(exc)}
            print(f"no crossing: {exc}", file=sys.stderr)
        write_json(config, {"mode": mode, "widths": widths, "samples": samples, **summary})
        return EXIT_OK
    if mode == "flavor":
        sizes = parse_sizes(config["sizes"])
        grid = parse_grid(config["p"])
        _check_rates(grid)
        ns = parse_ints(config["n"])
        steady = bool(config.get("steady_state", False))
        tasks = [(s, n, p, steady) for s in sizes for n in ns for p in grid]
        results = _map(_flavor_point, tasks, int(config["workers"]))
        rows = []
        for (s, n, p, _), dfs in zip(tasks, results):
            for key, df in dfs.items():
                rows.append((f"{s[0]}x{s[1]}", p, n, key.split(":", 1)[1], df, 0.0))
        write_csv(config, ["size", "p", "n", "d", "delta_f", "err"], rows)
        write_json(config, {"mode": mode, "points": len(tasks)})
        return EXIT_OK
    raise ConfigError(f"unknown statmech mode {mode!r}")


# --- verify -------------------------------------------------------------------

def verify_diagnostics(sizes, grid, ns, perturb: float = 0.0):
    """Oracle against closed-form diagnostics; returns (rows, skipped)."""
    rows, skipped = [], []
    for size in sizes:
        lat = build_lattice(*size)
        for p in grid:
            p_stat = min(0.5, p + perturb) if perturb else p
            try:
                states = oracle_mod.build_states_for_diagnostics(lat, oracle_mod.SimpleErrorModel(p))
            except oracle_mod.BudgetExceeded as exc:
                skipped.append((size, p, str(exc)))
                continue
            for n in ns:
                try:
                    o_d = oracle_mod.renyi_relative_entropy(states.rho2, states.rho1, n)
                    o_i = oracle_mod.renyi_coherent_info(states.rho_qm, states.rho_qmr, n)
                except oracle_mod.BudgetExceeded as exc:
                    skipped.append((size, p, str(exc)))
                    continue
                res = evaluate(DiagnosticsRequest(n, p_stat, size))
                rows.append((f"D_em n={n}", size, p, o_d, res.d_em))
                rows.append((f"I_c n={n}", size, p, o_i, res.i_c))
    return rows, skipped


def verify_rbim(size, rates, syndromes, seed):
    """Class probabilities by string enumeration against RBIM spin enumeration."""
    lat = build_lattice(*size)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x5EED,)))
    rows = []
    for pt in rates:
        for k in range(syndromes):
            color = COLORS[k % 3]
            n_super = superlattice(lat, color).n_vertices
            picks = rng.choice(n_super, size=2 * int(rng.integers(0, n_super // 2 + 1)), replace=False)
            defects = set(int(x) for x in picks)
            a = class_probabilities_exact(lat, color, defects, pt).ratios()
            b = class_probabilities_rbim(lat, color, defects, pt).ratios()
            for kappa in a:
                rows.append((f"class {kappa} {color}", size, pt, a[kappa], b[kappa]))
    return rows


def cmd_verify(config: Dict) -> int:
    sizes = parse_sizes(config["sizes"])
    grid = parse_grid(config["p"])
    _check_rates(grid)
    ns = parse_ints(config["n"])
    perturb = float(config.get("perturb", 0.0))
    rows, skipped = verify_diagnostics(sizes, grid, ns, perturb)
    rows += verify_rbim((2, 2), [0.01, 0.05, 0.1, 0.2, 0.5], int(config.get("syndromes", 4)), int(config.get("seed", 0)))
    out, failures = [], 0
    for name, size, p, a, b in rows:
        diff = abs(a - b)
        ok = diff <= VERIFY_TOLERANCE
        failures += not ok
        out.append((name, f"{size[0]}x{size[1]}", p, a, b, diff, "pass" if ok else "FAIL"))
    write_csv(config, ["check", "size", "p", "reference", "candidate", "abs_diff", "status"], out)
    write_json(config, {"checks": len(out), "failures": failures,
                        "skipped": [{"size": list(s), "p": p, "reason": r} for s, p, r in skipped]})
    return EXIT_MISMATCH if failures else EXIT_OK


# --- dump-lattice -------------------------------------------------------------

def cmd_dump_lattice(config: Dict) -> int:
    size = parse_sizes(config["size"])[0]
    lat = build_lattice(*size)
    doc = json.loads(lat.to_json())
    doc["superlattices"] = {}
    for c in COLORS:
        sl = superlattice(lat, c)
        doc["superlattices"][c] = {"vertices": list(sl.supervertices), "edges": list(sl.superedges),
                                   "edge_ends": [list(e) for e in sl.superedge_ends]}
    doc["header"] = header_lines(config)
    _emit(config.get("json"), json.dumps(doc, indent=1) + "\n", sys.stdout)
    return EXIT_OK


# --- entry point --------------------------------------------------------------

DEFAULTS = {
    "decode-sweep": {"sizes": "2x2,3x3", "p": "0.005:0.03:6", "trials": 200, "seed": None, "color": "B",
                     "replay": None},
    "diagnostics": {"n": "2", "p": "0,0.02,0.1,0.5", "size": "2x2", "variant": "floquet", "steady_state": False},
    "statmech": {"mode": "rbim", "widths": "6,8,10,12", "p": "0.045:0.095:11", "samples": 200, "seed": None,
                 "aspect": 1.0, "sizes": "2x2", "n": "2", "steady_state": False},
    "verify": {"sizes": "1x1,2x2", "p": "0,0.02,0.1,0.3,0.5", "n": "2,3", "perturb": 0.0, "syndromes": 4,
               "seed": 0},
    "dump-lattice": {"size": "2x2"},
}
COMMANDS = {"decode-sweep": cmd_decode_sweep, "diagnostics": cmd_diagnostics, "statmech": cmd_statmech,
            "verify": cmd_verify, "dump-lattice": cmd_dump_lattice}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floquet-memory", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, defaults in DEFAULTS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with default values for any flag")
        sp.add_argument("--csv", help="CSV output path (default stdout)")
        sp.add_argument("--json", help="JSON summary path (default stderr)")
        sp.add_argument("--workers", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")
        for key, value in defaults.items():
            flag = "--" + key.replace("_", "-")
            if isinstance(value, bool):
                sp.add_argument(flag, action="store_true", default=None)
            else:
                sp.add_argument(flag, default=None, help=f"default {value}")
    return parser


def resolve_config(args: argparse.Namespace) -> Dict:
    config = dict(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        unknown = set(loaded) - set(config) - {"workers", "csv", "json"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for key, value in vars(args).items():
        if value is not None and key != "config":
            config[key] = value
    config["command"] = args.command
    if config.get("workers") is None:
        config["workers"] = default_workers()
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](config)
    except (statmech.BudgetExceeded, oracle_mod.BudgetExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
