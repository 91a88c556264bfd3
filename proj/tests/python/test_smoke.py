"""Smoke tests for the python bindings."""

import _hpstems as hp


def test_module_arithmetic():
    assert hp.snf(2, [[12]]) == ["4"]
    assert hp.snf(2, [[3]]) == ["1"]
    assert hp.quotient_presentation(2, 2, []) == "Z(2)^2"
    assert hp.p_component(0, [12], 2) == "Z/4"
    assert hp.p_component(0, [12], 3) == "Z/3"
    assert hp.stable_range_bound(15) == 9
    assert hp.stable_range_bound(0, sphere=True, sphere_dim=0) == 2


def test_extension_classification():
    assert sorted(hp.classify_extensions(2, "Z/2", "Z/2")) == ["Z/2 + Z/2", "Z/4"]
    assert sorted(hp.classify_extensions(2, "Z/2", "Z/2")) == sorted(
        hp.brute_force_oracle(2, "Z/2", "Z/2")
    )
    assert hp.solve_with_order_at_least(2, "Z/8+Z(2)", "Z/16", 128) == ["Z(2) + Z/128"]


def test_derivations():
    s = hp.Session()
    d = s.derive(11, 1, 2)
    assert d["status"] == "unique"
    assert d["result"] == "Z/8"  # pi_12(Sigma HP2) at p=2
    d = s.derive(15, 8, 2)
    assert d["result"] == "Z(2) + Z/128"  # pi_23(Sigma^8 HP2)
    d = s.derive(15, 5, 3)
    assert d["result"] == "Z/27"
    assert "| rule |" not in d["trace"]  # line format: id | rule | in | out | cite
    assert d["trace"].count("|") >= 4


def test_table_reproduction():
    s = hp.Session()
    rep = s.table_compare()
    assert rep["exit_code"] == 0
    assert all(row["status"] == "match" for row in rep["rows"])
    assert len(rep["rows"]) == 63


def test_applications():
    rep = hp.smash_report("HP2", 3)
    assert rep["plus"] == "S^13"
    assert rep["minus"] == "Sigma^5 HP^3"
    assert rep["minus_degrees"] == [9, 13, 17]

    s = hp.Session()
    res = s.classify(1)
    assert len(res["sporadic"]) == 7
    res = s.classify(4)
    assert len(res["sporadic"]) == 7 and len(res["families"]) == 3

    assert hp.skeleton_of_pinch_fibre(2, 2) == "S^6 u_{2 nubar6} e^15"
    assert hp.skeleton_of_pinch_fibre(5, 3) == "S^9 v S^21"


def test_extended_ambiguity():
    s = hp.Session(extended=True)
    d = s.derive(36, 11, 2)
    assert d["status"] == "ambiguous"
    labels = {b["label"] for b in d["branches"]}
    assert labels == {"nu16C2=0", "nu16C2=P(eps33)"}
