import json
import math
from fractions import Fraction as F

import pytest

from hetbaker import dyck
from hetbaker.dyck import Alphabet, count_words
from hetbaker.experiments import (
    SCHEMA,
    Check,
    H_report,
    Report,
    approachability_report,
    growth_report,
    lebesgue_report,
    load_defaults,
    map_follower_graph,
    mme_report,
    rooted_label_isomorphic,
    tolerance,
    verify_theorem_a,
)
from hetbaker.maps import Params

P = Params(2, F(1, 4), F(1, 8))


@pytest.mark.parametrize("kind,measured,target,tol,ok", [
    ("abs", 1.04, 1.0, 0.05, True),
    ("abs", 1.06, 1.0, 0.05, False),
    ("max", 1.04, 1.0, 0.05, True),
    ("max", 1.2, 1.0, 0.05, False),
    ("min", 0.96, 1.0, 0.05, True),
    ("min", 0.9, 1.0, 0.05, False),
    ("range", 3.1, 3.0, 0.2, True),
    ("range", 2.9, 3.0, 0.2, False),
    ("exact", 0, 0, 0, True),
    ("exact", 1, 0, 0, False),
    ("abs", float("nan"), 1.0, 0.05, False),
])
def test_check_kinds(kind, measured, target, tol, ok):
    assert Check("c", measured, target, tol, kind, "test").passed is ok


def test_unknown_check_kind():
    with pytest.raises(ValueError):
        Check("c", 1, 1, 0, "fuzzy", "test").passed


def test_defaults_and_overrides():
    d = load_defaults()
    assert d["version"] == 1
    assert tolerance("mme.freq") == 0.005
    assert tolerance("mme.freq", {"mme.freq": 0.1}) == 0.1
    with pytest.raises(KeyError):
        tolerance("no.such.tolerance")


def test_report_serialization():
    rep = Report("demo", {"m": 2, "a": "1/4"}, seed=7)
    rep.check("one", 1.5, 1.5, 0.0, "abs", "unit")
    rep.tables["t"] = [{"n": 1, "x": F(1, 3), "flag": True, "miss": None}]
    csv_text = rep.checks_csv()
    assert csv_text.splitlines()[0] == SCHEMA
    assert csv_text.splitlines()[1].startswith("experiment,check,measured,target")
    assert rep.table_csv("t").splitlines()[1:] == ["n,x,flag,miss", "1,1/3,true,"]
    summary = json.loads(rep.summary_json())
    assert summary["passed"] and summary["seed"] == 7
    assert rep.lines() == ["PASS  demo: one  measured=1.5  target=1.5  tol=0.0 (abs)"]


def test_verify_small_lengths():
    rep = verify_theorem_a(P, 1)
    assert rep.passed
    assert rep.tables["lengths"][0]["nonempty_cylinders"] == 4
    rep = verify_theorem_a(P, 5)
    assert rep.passed
    for row in rep.tables["lengths"]:
        assert row["admissible"] == row["nonempty_cylinders"] == count_words(P.alphabet, row["n"])


def test_verify_threads_agree():
    a = verify_theorem_a(P, 4, threads=1)
    b = verify_theorem_a(P, 4, threads=2)
    assert a.checks_csv() == b.checks_csv()


@pytest.mark.parametrize("m,a,depth", [(2, F(1, 8), 4), (3, F(1, 5), 3)])
def test_map_follower_graph_matches_dyck(m, a, depth):
    params = Params(m, a)
    G, root = map_follower_graph(params, depth)
    ok, why = rooted_label_isomorphic(G, root, dyck.build_follower_graph(params.alphabet, depth), ())
    assert ok, why
    assert G.number_of_nodes() == sum(m**h for h in range(depth + 1))


def test_isomorphism_detects_difference():
    G2 = dyck.build_follower_graph(Alphabet(2), 2)
    G3 = dyck.build_follower_graph(Alphabet(2), 3)
    ok, _ = rooted_label_isomorphic(G2, (), G3, ())
    assert not ok


def test_growth_reports():
    rep = growth_report(Alphabet(2), 12)
    assert rep.passed
    assert rep.tables["growth"][2]["count"] == 14
    rep = growth_report(Alphabet(2, 1), 10)
    assert rep.passed
    assert 4.0 <= rep.tables["growth"][10]["ratio"] <= 4.3


def test_growth_default_band_for_other_alphabets():
    rep = growth_report(Alphabet(3), 10)
    assert rep.passed


def test_mme_report_small_is_deterministic():
    a = mme_report(P, 20_000, 3, k=3)
    b = mme_report(P, 20_000, 3, k=3)
    assert a.checks_csv() == b.checks_csv()
    assert a.table_csv("mme") == b.table_csv("mme")
    assert {r["side"] for r in a.tables["mme"]} == {"alpha", "beta"}


def test_mme_report_undersampled_fails_entropy_rows():
    rep = mme_report(P, 2000, 3, k=8)
    entropy_rows = [c for c in rep.checks if "entropy" in c.name]
    assert len(entropy_rows) == 4
    assert all(math.isnan(c.measured) and not c.passed for c in entropy_rows)


def test_approach_report_small():
    rep = approachability_report(P, [100, 1000], 3, seed=1)
    assert rep.passed
    gap = rep.tables["gap"][0]
    assert gap["delta"] == 0
    assert gap["gap"] == pytest.approx(math.log(3) - 1.5 * math.log(2))


def test_approach_gap_closes_outside_window():
    rep = approachability_report(Params(2, F(1, 8)), [100], 1, seed=1)
    names = {c.name: c.passed for c in rep.checks}
    assert names["a lies strictly between c1 and c2"] is False
    assert names["entropy gap is nonnegative"] is False


def test_lebesgue_report_small():
    rep = lebesgue_report(2, 50_000, 4)
    assert rep.checks[0].passed
    assert all(r["det"] == 1 for r in rep.tables["jacobian"])


@pytest.mark.parametrize("m", [2, 3, 4])
def test_H_report(m):
    assert H_report(m).passed
