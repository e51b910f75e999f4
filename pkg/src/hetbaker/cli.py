"""Command-line front end.

Exit status: 0 on success, 1 when a report has a failing check, 2 on
usage, configuration or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import dyck, experiments, maps, measures
from .dyck import Alphabet, Window
from .maps import Params, as_fraction, fraction_str

COMMANDS = ("reduce", "count", "enumerate", "graph", "map", "cylinder", "periodic", "sample",
            "stats", "verify-a", "growth", "mme", "approach", "lebesgue")

# config key -> built-in default; every key is also a --flag
DEFAULTS = {
    "m": 2,
    "units": 0,
    "a": "1/4",
    "b": "1/8",
    "seed": 20240101,
    "n": None,
    "n_max": None,
    "depth": None,
    "out": None,
    "threads": 1,
    "word": None,
    "point": None,
    "start": 0,
    "side": "alpha",
    "k": None,
    "prefixes": None,
    "j": None,
    "tol": None,
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("shared options")
    g.add_argument("--config", metavar="JSON", help="JSON file of option values; flags override it")
    g.add_argument("--m", type=int, help="bracket pairs (default 2)")
    g.add_argument("--units", type=int, help="Motzkin unit symbols (default 0)")
    g.add_argument("--a", help="map parameter a as 'p/q' (default 1/4)")
    g.add_argument("--b", help="map parameter b as 'p/q' (default 1/8)")
    g.add_argument("--seed", type=int, help="random seed")
    g.add_argument("--n", type=int, help="length / sample size / word length bound")
    g.add_argument("--n-max", dest="n_max", type=int, help="largest length for growth")
    g.add_argument("--depth", type=int, help="graph depth or cylinder half-width")
    g.add_argument("--out", help="output directory for CSV/JSON/DOT/figures")
    g.add_argument("--threads", type=int, help="worker processes (default 1)")
    g.add_argument("--word", help="word as 'a1,b2' or branch indices '1,4'")
    g.add_argument("--point", help="point as comma-separated 'p/q' coordinates")
    g.add_argument("--start", type=int, help="sequence index of the word's first symbol")
    g.add_argument("--side", choices=("alpha", "beta"), help="which maximal-entropy measure")
    g.add_argument("--k", type=int, help="block length for entropy estimates")
    g.add_argument("--prefixes", help="comma-separated prefix lengths (approach)")
    g.add_argument("--j", type=int, help="largest repetition count (approach)")
    g.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="override a tolerance from defaults.json (repeatable)")
    p = argparse.ArgumentParser(prog="hetbaker", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "reduce": "reduce a word in the bracket monoid",
        "count": "number of admissible words of length --n",
        "enumerate": "list admissible words of length --n",
        "graph": "follower-set graph to --depth as DOT",
        "map": "iterate the cube (or square) map from --point for --n steps",
        "cylinder": "exact cylinder box of --word starting at --start",
        "periodic": "periodic orbit following --word",
        "sample": "sample a window of a maximal-entropy measure",
        "stats": "Lyapunov and entropy statistics of a sample",
        "verify-a": "finite check of cylinders vs Dyck admissibility up to length --n",
        "growth": "word-count growth table up to --n-max",
        "mme": "statistics of both maximal-entropy measures",
        "approach": "periodic approximants and the entropy gap",
        "lebesgue": "volume preservation and Lebesgue orbits at (a, b) = (c2, c1)",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return p


def _resolve(ns) -> dict:
    cfg = {}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        unknown = sorted(set(cfg) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    opts = {}
    for key, default in DEFAULTS.items():
        flag = getattr(ns, key, None)
        opts[key] = flag if flag is not None else cfg.get(key, default)
    tols = {}
    raw = opts["tol"] or []
    if isinstance(raw, dict):
        tols.update(raw)
    else:
        for item in raw:
            name, sep, value = item.partition("=")
            if not sep:
                raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
            tols[name] = json.loads(value)
    known = experiments.load_defaults()["tolerances"]
    for name in tols:
        if name not in known:
            raise UsageError(f"unknown tolerance {name!r}")
    opts["tol"] = tols
    return opts


def _params(o) -> Params:
    try:
        return Params(int(o["m"]), as_fraction(str(o["a"])), as_fraction(str(o["b"])))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None


def _need(o, key):
    if o[key] is None:
        raise UsageError(f"--{key.replace('_', '-')} is required for this command")
    return o[key]


def _out_dir(o) -> Path | None:
    if o["out"] is None:
        return None
    out = Path(o["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_report(report, out: Path) -> list[Path]:
    from .plotting import render

    paths = [out / f"{report.name}.csv", out / f"{report.name}.json"]
    _write(paths[0], report.checks_csv())
    _write(paths[1], report.summary_json())
    for table in sorted(report.tables):
        p = out / f"{report.name}_{table}.csv"
        _write(p, report.table_csv(table))
        paths.append(p)
    return paths + render(report, out)


def _emit_report(report, o) -> int:
    for line in report.lines():
        print(line)
    out = _out_dir(o)
    if out is not None:
        write_report(report, out)
    return 0 if report.passed else 1


def default_block_k(n: int, m: int) -> int:
    """Block length used when --k is not given: floor(log N / (2 log 2m)), at least 1."""
    return max(1, int(math.log(n) // (2 * math.log(2 * m))))


def _point(text: str):
    try:
        return tuple(as_fraction(t) for t in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad point {text!r}: {exc}") from None


def run(command: str, o: dict) -> int:
    alphabet = Alphabet(int(o["m"]), int(o["units"]))
    if command == "reduce":
        r = dyck.reduce(alphabet.parse_word(_need(o, "word")), alphabet)
        print(r)
        return 0
    if command == "count":
        print(dyck.count_words(alphabet, _need(o, "n")))
        return 0
    if command == "enumerate":
        for w in dyck.enumerate_words(alphabet, _need(o, "n")):
            print(",".join(map(str, w)))
        return 0
    if command == "graph":
        depth = _need(o, "depth")
        text = dyck.follower_graph_dot(dyck.build_follower_graph(alphabet, depth))
        out = _out_dir(o)
        if out is None:
            sys.stdout.write(text)
        else:
            _write(out / f"follower_m{alphabet.m}_u{alphabet.units}_d{depth}.dot", text)
        return 0
    if command == "map":
        params = _params(o)
        p = _point(_need(o, "point"))
        if len(p) not in (2, 3):
            raise UsageError("--point needs 2 or 3 coordinates")
        step = maps.apply_f2 if len(p) == 2 else maps.apply_f3
        print("k,branch," + ",".join("xyz"[: len(p)]))
        for k in range(_need(o, "n") + 1):
            i = maps.region_index(params, p)
            print(f"{k},{i}," + ",".join(fraction_str(c) for c in p))
            p = step(params, p)
        return 0
    if command == "cylinder":
        params = _params(o)
        w = Window(alphabet.parse_word(_need(o, "word")), int(o["start"]))
        box = maps.cylinder_box(params, w)
        print(json.dumps({"window": w.to_json(), "box": box.to_json()}, sort_keys=True))
        return 0
    if command == "periodic":
        params = _params(o)
        word = alphabet.parse_word(_need(o, "word"))
        try:
            orbit, boundary = maps.periodic_orbit_from_word(params, word), False
        except maps.BoundaryOrbitError as exc:
            orbit, boundary = exc.orbit, True
        print(json.dumps({**orbit.to_json(), "boundary": boundary}, sort_keys=True))
        return 0
    if command == "sample":
        word = measures.sample_nu(o["side"], _need(o, "n"), alphabet.m, int(o["seed"]))
        text = ",".join(str(int(s)) for s in word) + "\n"
        out = _out_dir(o)
        if out is None:
            sys.stdout.write(text)
        else:
            _write(out / f"sample_{o['side']}_{o['seed']}.txt", text)
        return 0
    if command == "stats":
        params = _params(o)
        n = _need(o, "n")
        word = measures.sample_nu(o["side"], n, params.m, int(o["seed"]))
        st = measures.empirical_stats(word, params)
        k = o["k"] or default_block_k(n, params.m)
        try:
            h_k = measures.block_entropy(word, k)
        except measures.UndersampledError as exc:
            print(f"hetbaker: warning: block entropy omitted: {exc}", file=sys.stderr)
            h_k = None
        row = {"side": o["side"], "n": st.n, "freq_alpha": st.freq_alpha, "chi_u": st.chi_u,
               "chi_c": st.chi_c, "bias": st.bias, "block_entropy": h_k,
               "k": k, "ruelle_bound": measures.ruelle_bound(st),
               "H_a": measures.entropy_bound_H(params.a, params.m),
               "biased_bound": measures.biased_bound(params, st.bias), "seed": o["seed"]}
        rep = experiments.Report("stats", params.to_json(), o["seed"], tables={"stats": [row]})
        text = rep.table_csv("stats")
        out = _out_dir(o)
        if out is None:
            sys.stdout.write(text)
        else:
            _write(out / "stats.csv", text)
        return 0
    tol = o["tol"]
    if command == "verify-a":
        L = o["n"] or experiments.setting("coding_check_length")
        return _emit_report(experiments.verify_theorem_a(_params(o), L, int(o["threads"])), o)
    if command == "growth":
        n_max = o["n_max"] or o["n"] or experiments.setting("growth_n_max")
        return _emit_report(experiments.growth_report(alphabet, n_max, tol), o)
    if command == "mme":
        N = o["n"] or experiments.setting("mme_samples")
        k = o["k"] or default_block_k(N, int(o["m"]))
        return _emit_report(experiments.mme_report(_params(o), N, int(o["seed"]), k, tol), o)
    if command == "approach":
        prefixes = o["prefixes"] or experiments.setting("approach_prefixes")
        if isinstance(prefixes, str):
            prefixes = [int(t) for t in prefixes.split(",")]
        j = o["j"] or experiments.setting("approach_j")
        rep = experiments.approachability_report(_params(o), prefixes, j, int(o["seed"]), tol)
        return _emit_report(rep, o)
    if command == "lebesgue":
        N = o["n"] or experiments.setting("lebesgue_samples")
        return _emit_report(experiments.lebesgue_report(int(o["m"]), N, int(o["seed"]), tol), o)
    raise UsageError(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        opts = _resolve(ns)
        return run(ns.command, opts)
    except (UsageError, ValueError) as exc:
        print(f"hetbaker: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
