"""Reproducible desk-scale experiments with pass/fail checks.

Every experiment returns a :class:`Report`.  Tolerances and default sizes
come from the versioned ``defaults.json`` shipped with the package.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import product

import networkx as nx
import numpy as np

from . import dyck
from .dyck import Alphabet, count_words, is_admissible, make_periodic_word
from .maps import (
    Params,
    branch_affine,
    branch_cell,
    cylinder_box,
    fraction_str,
    jacobian_det,
)
from .measures import (
    SIDES,
    Seed,
    UndersampledError,
    biased_bound,
    block_entropy,
    conditional_block_entropy,
    empirical_stats,
    entropy_bound_H,
    expected_chi_c,
    expected_chi_u,
    ruelle_bound,
    sample_nu,
)

SCHEMA = "# hetbaker-schema v1"


@lru_cache(maxsize=None)
def load_defaults() -> dict:
    text = resources.files("hetbaker").joinpath("defaults.json").read_text()
    return json.loads(text)


def tolerance(name: str, overrides: dict | None = None):
    if overrides and name in overrides:
        return overrides[name]
    return load_defaults()["tolerances"][name]


def setting(name: str):
    return load_defaults()["settings"][name]


@dataclass
class Check:
    """One pass/fail row.

    ``kind`` is how measured is compared with target: "abs" (within
    +-tolerance), "max" (at most target + tolerance), "min" (at least
    target - tolerance), "range" (target <= measured <= target + tolerance)
    or "exact" (equal, tolerance 0).
    """

    name: str
    measured: float | int
    target: float | int
    tolerance: float
    kind: str
    source: str

    @property
    def passed(self) -> bool:
        x, t, tol = self.measured, self.target, self.tolerance
        if self.kind == "abs":
            return abs(x - t) <= tol
        if self.kind == "max":
            return x <= t + tol
        if self.kind == "min":
            return x >= t - tol
        if self.kind == "range":
            return t <= x <= t + tol
        if self.kind == "exact":
            return x == t
        raise ValueError(f"unknown check kind {self.kind!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return fraction_str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class Report:
    name: str
    params: dict
    seed: int | None = None
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, list[dict]] = field(default_factory=dict)

    def check(self, name, measured, target, tolerance, kind, source) -> Check:
        c = Check(name, measured, target, tolerance, kind, source)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def checks_csv(self) -> str:
        buf = io.StringIO()
        buf.write(SCHEMA + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "check", "measured", "target", "tolerance", "kind",
                    "passed", "source", "seed"])
        for c in self.checks:
            w.writerow([self.name, c.name, _fmt(c.measured), _fmt(c.target), _fmt(c.tolerance),
                        c.kind, _fmt(c.passed), c.source, _fmt(self.seed)])
        return buf.getvalue()

    def table_csv(self, table: str) -> str:
        rows = self.tables[table]
        buf = io.StringIO()
        buf.write(SCHEMA + "\n")
        w = csv.writer(buf, lineterminator="\n")
        cols = list(rows[0].keys()) if rows else []
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "schema": "hetbaker-schema v1",
            "experiment": self.name,
            "params": self.params,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "measured": _fmt(c.measured), "target": _fmt(c.target),
                 "tolerance": _fmt(c.tolerance), "kind": c.kind, "passed": c.passed,
                 "source": c.source}
                for c in self.checks
            ],
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'}  {self.name}: {c.name}  measured={_fmt(c.measured)}"
                f"  target={_fmt(c.target)}  tol={_fmt(c.tolerance)} ({c.kind})"
                for c in self.checks]


def _count_nonempty(args):
    params, n, first = args
    alphabet = params.alphabet
    adm = nonempty = mismatch = 0
    for rest in product(alphabet.symbols, repeat=n - 1):
        w = (first,) + rest
        a = is_admissible(w, alphabet)
        c = not cylinder_box(params, w).is_empty
        adm += a
        nonempty += c
        mismatch += a != c
    return adm, nonempty, mismatch


def map_follower_graph(params: Params, depth: int):
    """Follower graph read off the square map itself.

    A vertex is the y-interval of the image of a forward cylinder; its
    depth ``h`` is defined by the interval length ``m**-h``.  Edges deeper
    than ``depth`` are dropped, mirroring the truncated Dyck graph.
    """
    m = params.m
    G = nx.MultiDiGraph()
    root = (Fraction(0), Fraction(1))

    def level(J):
        length, h = J[1] - J[0], 0
        while length < 1:
            length *= m
            h += 1
        return h

    G.add_node(root, truncated=(depth == 0))
    frontier = [root]
    while frontier:
        nxt = []
        for J in frontier:
            for i in range(1, 2 * m + 1):
                K = _step_state(params, J, i)
                if K is None or level(K) > depth:
                    continue
                if K not in G:
                    G.add_node(K, truncated=(level(K) == depth))
                    nxt.append(K)
                G.add_edge(J, K, label=i)
        frontier = nxt
    return G, root


def _step_state(params, J, i):
    (_, (ylo, yhi), _) = branch_cell(params, i)
    lo, hi = max(J[0], ylo), min(J[1], yhi)
    if lo >= hi:
        return None
    s, t = branch_affine(params, i)[1]
    return (s * lo + t, s * hi + t)


def rooted_label_isomorphic(G1, r1, G2, r2) -> tuple[bool, str]:
    """Compare two deterministic labelled graphs by walking both from their roots."""
    pair = {r1: r2}
    back = {r2: r1}
    queue = [r1]
    while queue:
        u = queue.pop()
        v = pair[u]
        if bool(G1.nodes[u].get("truncated")) != bool(G2.nodes[v].get("truncated")):
            return False, f"truncation flag differs at {u} / {v}"
        out1 = {lab: t for _, t, lab in G1.out_edges(u, data="label")}
        out2 = {lab: t for _, t, lab in G2.out_edges(v, data="label")}
        if set(out1) != set(out2):
            return False, f"labels {sorted(out1)} vs {sorted(out2)} at {u} / {v}"
        for lab, t1 in out1.items():
            t2 = out2[lab]
            if t1 in pair:
                if pair[t1] != t2:
                    return False, f"label {lab} from {u} leads to inconsistent vertices"
            else:
                if t2 in back:
                    return False, f"two vertices map onto {t2}"
                pair[t1] = t2
                back[t2] = t1
                queue.append(t1)
    if len(pair) != G1.number_of_nodes() or len(back) != G2.number_of_nodes():
        return False, "unreachable vertices"
    if G1.number_of_edges() != G2.number_of_edges():
        return False, "edge counts differ"
    return True, "isomorphic"


def verify_theorem_a(params: Params, L: int, threads: int = 1) -> Report:
    """Exhaustive finite check that map cylinders and Dyck admissibility agree."""
    alphabet = params.alphabet
    rep = Report("verify-a", {**params.to_json(), "L": L})
    tasks = [(params, n, first) for n in range(1, L + 1) for first in alphabet.symbols]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_count_nonempty, tasks))
    else:
        results = [_count_nonempty(t) for t in tasks]
    per_len: dict[int, list[int]] = {}
    for (_, n, _), (a, c, mm) in zip(tasks, results):
        acc = per_len.setdefault(n, [0, 0, 0])
        acc[0] += a
        acc[1] += c
        acc[2] += mm
    rows = []
    total_mismatch = 0
    for n in range(1, L + 1):
        adm, nonempty, mm = per_len[n]
        dp = count_words(alphabet, n)
        total_mismatch += mm
        rows.append({"n": n, "words": alphabet.size**n, "admissible": adm,
                     "nonempty_cylinders": nonempty, "mismatches": mm, "count_words": dp})
        rep.check(f"admissible count n={n} equals count_words", adm, dp, 0, "exact",
                  "oracle: DP count vs enumeration")
    rep.tables["lengths"] = rows
    rep.check("cylinder/admissibility mismatches", total_mismatch, 0, 0, "exact",
              "cylinder nonempty iff Dyck-admissible")
    G_map, root = map_follower_graph(params, L)
    G_dyck = dyck.build_follower_graph(alphabet, L)
    iso, why = rooted_label_isomorphic(G_map, root, G_dyck, ())
    rep.check(f"map follower graph equals Dyck follower graph to depth {L} ({why})",
              int(iso), 1, 0, "exact", "map and Dyck follower graphs agree")
    rep.tables["graph"] = [{"vertices_map": G_map.number_of_nodes(),
                            "vertices_dyck": G_dyck.number_of_nodes(),
                            "edges_map": G_map.number_of_edges(),
                            "edges_dyck": G_dyck.number_of_edges()}]
    return rep


def growth_report(alphabet: Alphabet, n_max: int, overrides: dict | None = None) -> Report:
    """Word counts, successive ratios and the exponential growth floor."""
    rep = Report("growth", {"m": alphabet.m, "units": alphabet.units, "n_max": n_max})
    base = alphabet.m + alphabet.units + 1
    rows = []
    prev = None
    floor_ok = True
    for n in range(0, n_max + 1):
        c = count_words(alphabet, n)
        ratio = c / prev if prev else float("nan")
        rate = math.log(c) / n if n else float("nan")
        rows.append({"n": n, "count": c, "ratio": ratio, "log_rate": rate,
                     "floor": base**n})
        floor_ok &= c >= base**n
        prev = c
    rep.tables["growth"] = rows
    rep.check(f"count(n) >= {base}^n for all n <= {n_max}", int(floor_ok), 1, 0, "exact",
              "entropy log(m+units+1)")
    min_rate = min(r["log_rate"] for r in rows[1:]) if n_max >= 1 else float("nan")
    rep.check("min_n (1/n) log count(n) >= log(m+units+1)", min_rate, math.log(base), 0.0, "min",
              "entropy log(m+units+1)")
    if n_max >= 2:
        bands = tolerance("growth.ratio_band", overrides)
        key = f"{alphabet.m},{alphabet.units}"
        if key in bands:
            lo, hi = bands[key]
        else:
            lo, hi = base, base * (1 + tolerance("growth.ratio_band_default_rel", overrides))
        rep.check(f"count({n_max})/count({n_max - 1}) in [{lo}, {hi}]", rows[-1]["ratio"], lo,
                  hi - lo, "range", "entropy log(m+units+1)")
    return rep


def _running_freq(word, m, points=60):
    w = np.asarray(word)
    is_a = (w <= m).astype(np.int64)
    csum = np.cumsum(is_a)
    ns = np.unique(np.geomspace(10, w.size, points).astype(np.int64))
    return [(int(n), float(csum[n - 1] / n)) for n in ns]


def mme_report(params: Params, N: int, seed: int, k: int | None = None,
               overrides: dict | None = None) -> Report:
    """Statistics of samples from the two maximal-entropy measures against their targets."""
    k = setting("block_k") if k is None else k
    m = params.m
    rep = Report("mme", {**params.to_json(), "N": N, "k": k}, seed)
    rows, conv = [], []
    tol = lambda name: tolerance(name, overrides)  # noqa: E731
    for stream, side in enumerate(SIDES):
        word = sample_nu(side, N, m, Seed(seed, stream))
        st = empirical_stats(word, params)
        try:
            h = block_entropy(word, k)
            h_cond = conditional_block_entropy(word, k)
        except UndersampledError:
            h = h_cond = float("nan")  # fails the entropy checks below
        bound = ruelle_bound(st)
        dominant = st.freq_alpha if side == "alpha" else st.freq_beta
        rows.append({"side": side, "n": st.n, "freq_alpha": st.freq_alpha, "chi_u": st.chi_u,
                     "chi_c": st.chi_c, "bias": st.bias, "block_entropy": h,
                     "conditional_entropy": h_cond, "ruelle_bound": bound,
                     "H_a": entropy_bound_H(params.a, m), "seed": seed, "stream": stream})
        for n, f in _running_freq(word, m):
            conv.append({"side": side, "n": n, "freq_alpha": f})
        target_f = m / (m + 1)
        rep.check(f"nu_{side} dominant-group frequency", dominant, target_f, tol("mme.freq"), "abs",
                  "dominant group weight m/(m+1)")
        rep.check(f"nu_{side} central exponent", st.chi_c, expected_chi_c(m, side), tol("mme.chi_c"),
                  "abs", "chi^c = -+(m-1)/(m+1) log m")
        rep.check(f"nu_{side} unstable exponent", st.chi_u, expected_chi_u(params, side),
                  tol("mme.chi_u"), "abs", "derived: mean of -log a, -log(1-ma) under group weights")
        rep.check(f"nu_{side} block entropy (k={k})", h, math.log(m + 1), tol("mme.block_entropy"),
                  "abs", "maximal entropy log(m+1)")
        rep.check(f"nu_{side} block entropy <= Ruelle bound", h, bound, tol("mme.ruelle_slack"),
                  "max", "entropy <= chi_u + max(chi_c, 0)")
    rep.tables["mme"] = rows
    rep.tables["convergence"] = conv
    return rep


def approachability_report(params: Params, prefix_lens, j_max: int, seed: int,
                           overrides: dict | None = None) -> Report:
    """Periodic words built from a nu_alpha prefix and its mirror, and the entropy gap."""
    m = params.m
    alphabet = params.alphabet
    rep = Report("approach", {**params.to_json(), "prefixes": list(prefix_lens), "j": j_max}, seed)
    tol = lambda name: tolerance(name, overrides)  # noqa: E731
    base = sample_nu("alpha", max(prefix_lens), m, Seed(seed, 0))
    rows = []
    for L in prefix_lens:
        lam = tuple(int(s) for s in base[:L])
        zero_c = admissible = True
        for j in range(1, j_max + 1):
            zeta = make_periodic_word(lam, j, alphabet)
            st = empirical_stats(zeta, params)
            admissible &= is_admissible(zeta + zeta, alphabet)
            zero_c &= st.count_alpha == st.count_beta
        zeta = np.asarray(make_periodic_word(lam, 1, alphabet))
        st = empirical_stats(zeta, params)
        sym_freq = np.bincount(zeta, minlength=2 * m + 1)[1:] / zeta.size
        row = {"prefix_len": L, "period": zeta.size, "freq_alpha": st.freq_alpha,
               "chi_c": st.chi_c, "bias": st.bias}
        for s in range(1, 2 * m + 1):
            row[f"freq_{alphabet.format_symbol(s)}"] = float(sym_freq[s - 1])
        rows.append(row)
        rep.check(f"prefix {L}: zeta admissible as a periodic sequence for j<={j_max}", int(admissible),
                  1, 0, "exact", "periodic approximant construction")
        rep.check(f"prefix {L}: central exponent of zeta is exactly 0 for j<={j_max}", int(zero_c), 1, 0,
                  "exact", "periodic approximant construction")
        if L >= tol("approach.freq_min_prefix"):
            rep.check(f"prefix {L}: alpha-group frequency", st.freq_alpha, 0.5, tol("approach.freq"),
                      "abs", "1/2 (nu_alpha + nu_beta)")
            # half-sum of the two measures gives every symbol weight 1/(2m)
            worst = float(np.max(np.abs(sym_freq - 1 / (2 * m))))
            rep.check(f"prefix {L}: max per-symbol deviation from 1/(2m)", worst, 0.0,
                      tol("approach.freq"), "max", "derived: 1/2 (nu_alpha + nu_beta) symbol weights")
    rep.tables["approach"] = rows
    delta = max(r["bias"] for r in rows)
    bb = biased_bound(params, delta)
    gap = math.log(m + 1) - bb
    closed_form = math.log(m + 1) + 0.5 * math.log(float(params.a * (1 - m * params.a)))
    rep.tables["gap"] = [{"delta": delta, "biased_bound": bb, "log_m_plus_1": math.log(m + 1),
                          "gap": gap}]
    in_window = params.c1 < params.a < params.c2
    rep.check("a lies strictly between c1 and c2", int(in_window), 1, 0, "exact",
              "non-approachability hypothesis")
    rep.check("entropy gap log(m+1) - biased bound", gap, closed_form, tol("approach.gap"), "abs",
              "derived: log(m+1) + log sqrt(a(1-ma))")
    if m == 2 and params.a == Fraction(1, 4):
        rep.check("entropy gap at m=2, a=1/4", gap, tol("approach.gap_m2_a1_4"), tol("approach.gap"),
                  "abs", "derived: log 3 - (3/2) log 2")
    rep.check("entropy gap is nonnegative", gap, 0.0, 0.0, "min", "non-approachability")
    return rep


def lebesgue_orbit(params: Params, N: int, seed: int) -> tuple[np.ndarray, tuple]:
    """Float orbit of the cube map from a uniformly random start; returns branch indices."""
    rng = Seed(seed, 0).rng(0)
    x, y, z = (float(v) for v in rng.random(3))
    start = (x, y, z)
    m = params.m
    a, b = float(params.a), float(params.b)
    ma = m * a
    sx_r, tx_r = 1 / (1 - ma), -ma / (1 - ma)
    cz = 1 - m * b
    out = np.empty(N, dtype=np.int64)
    for n in range(N):
        if x < ma:
            i = min(int(x / a), m - 1) + 1
            x = (x - (i - 1) * a) / a
            y = (y + i - 1) / m
            z = cz * z
        else:
            k = min(int(y * m), m - 1)
            i = m + 1 + k
            x = sx_r * x + tx_r
            y = m * y - k
            z = b * z + cz + b * k
        out[n] = i
    return out, start


def lebesgue_report(m: int, N: int, seed: int, overrides: dict | None = None) -> Report:
    """At (a, b) = (c2, c1) the cube map preserves volume and Lebesgue measure is alpha-biased."""
    params = Params(m, Fraction(1, m + 1), Fraction(1, m * (m + 1)))
    rep = Report("lebesgue", {**params.to_json(), "N": N}, seed)
    tol = lambda name: tolerance(name, overrides)  # noqa: E731
    dets = [jacobian_det(params, i) for i in range(1, 2 * m + 1)]
    rep.tables["jacobian"] = [{"branch": i, "det": d} for i, d in enumerate(dets, 1)]
    rep.check("every branch Jacobian determinant is exactly 1", int(all(d == 1 for d in dets)), 1, 0,
              "exact", "derived: rational algebra at (c2, c1)")
    word, start = lebesgue_orbit(params, N, seed)
    st = empirical_stats(word, params)
    rep.tables["orbit"] = [{"n": N, "x0": start[0], "y0": start[1], "z0": start[2],
                            "freq_alpha": st.freq_alpha, "chi_u": st.chi_u, "chi_c": st.chi_c,
                            "seed": seed}]
    rep.tables["convergence"] = [{"side": "lebesgue", "n": n, "freq_alpha": f}
                                 for n, f in _running_freq(word, m)]
    rep.check("alpha-group frequency along a Lebesgue-random orbit", st.freq_alpha, m / (m + 1),
              tol("lebesgue.freq"), "abs", "dominant group weight m/(m+1)")
    rep.check("central exponent along a Lebesgue-random orbit", st.chi_c, expected_chi_c(m, "alpha"),
              tol("lebesgue.chi_c"), "abs", "chi^c(nu_alpha) = -(m-1)/(m+1) log m")
    return rep


def H_report(m: int = 2, overrides: dict | None = None) -> Report:
    """The balanced unstable exponent at the ends and middle of (c1, c2)."""
    rep = Report("H", {"m": m})
    c1, c2 = Fraction(1, m * (m + 1)), Fraction(1, m + 1)
    target = math.log(m + 1)
    ident = tolerance("H.identity", overrides)
    rep.check("|H(c1) - log(m+1)|", entropy_bound_H(c1, m), target, ident, "abs", "H(c1)=log(m+1)")
    rep.check("|H(c2) - log(m+1)|", entropy_bound_H(c2, m), target, ident, "abs", "H(c2)=log(m+1)")
    mid = (c1 + c2) / 2
    rep.check(f"H({fraction_str(mid)}) < log(m+1) - margin", entropy_bound_H(mid, m),
              target - tolerance("H.margin", overrides), 0.0, "max", "H(a) < log(m+1) on (c1, c2)")
    return rep
