import csv
import itertools
import os
from fractions import Fraction
from pathlib import Path

import pytest

import matchsim

GOLDEN = Path(os.environ.get("MATCHSIM_GOLDEN_DIR", Path(__file__).parent.parent / "golden")) / "max-n-8"


def test_counts_and_pair_law():
    assert [matchsim.perfect_matching_count(n) for n in (2, 4, 6, 8)] == [1, 3, 15, 105]
    assert len(matchsim.enumerate_full_matchings(6)) == 15
    assert matchsim.exact_pair_probability(6, 0, 3) == Fraction(1, 5)
    assert matchsim.exact_joint_probability(6, 0, 1, 2, 3) == Fraction(1, 15)
    assert matchsim.exact_set_probability(6, 0, [0, 1, 2]) == Fraction(2, 5)


def test_partial_space_example():
    law = matchsim.partial_space([4, 4], [1, 1])
    assert law["sample_points"] == 240
    assert law["marginals"][0] == [Fraction(3, 10), Fraction(9, 20), Fraction(1, 4)]
    assert law["defect"] > 0


def test_errors_surface_as_value_errors():
    with pytest.raises(matchsim.MatchsimError, match="OddPopulation"):
        matchsim.sample_full_matching(5, 0)
    with pytest.raises(ValueError, match=r"b\[1\]"):
        matchsim.ModelParams([0.5, 0.5], [[0.5, 0.6], [0, 1]], [0, 0],
                             [[[1, 0], [0, 1]], [[1, 0], [0, 1]]])


def test_samplers():
    partner = matchsim.sample_full_matching(10, 3)
    assert all(partner[partner[i]] == i and partner[i] != i for i in range(10))
    assert partner == matchsim.sample_full_matching(10, 3)
    types = [0] * 4 + [1] * 4
    assert matchsim.plan_partial_matching(types, [0.25, 0.5]) == ([4, 4], [2, 2])
    partial = matchsim.sample_partial_matching(types, [0.25, 0.5], 1)
    assert sum(p is None for p in partial) == 4


def test_dynamics_and_analytic():
    hw = matchsim.hardy_weinberg_params(0.6)
    assert hw.K == 2
    for p in matchsim.evolve(hw, 10):
        assert p == pytest.approx([0.6, 0.4], abs=1e-12)
    gamma = matchsim.period_transition(hw, [0.6, 0.4])
    assert gamma[0][0] == pytest.approx(0.8)
    runs = matchsim.simulate(hw, 20000, 5, seed=1, replications=2)
    assert len(runs) == 2 and len(runs[0]) == 6
    assert runs == matchsim.simulate(hw, 20000, 5, seed=1, replications=2)
    dist, iterations, residual = matchsim.steady_state(hw, [0.3, 0.7])
    assert dist == pytest.approx([0.3, 0.7])


def test_reports():
    hw = matchsim.hardy_weinberg_params(0.6)
    rep = matchsim.pairwise_independence_test(hw, 200, 500, pairs=5, seed=2)
    assert rep["test"] == "pairwise_independence" and len(rep["records"]) == 5
    assert rep["tsv"].startswith("test\tdigest\t")
    assert matchsim.cross_section_product_test(1000, 5)["status"] == "pass"


def test_cli_entry_point():
    code, out, err = matchsim.run_cli(["demo-hw", "--agents", "2000", "--periods", "2"])
    assert out.startswith("period,type,empirical_freq,analytic_freq,replication")
    assert code in (0, 1)


# Independent re-derivation of the committed golden files.

def involutions(agents, allow_fixed=False):
    for perm in itertools.permutations(agents):
        sigma = dict(zip(agents, perm))
        if all(sigma[sigma[a]] == a and (allow_fixed or sigma[a] != a) for a in agents):
            yield sigma


def read_golden(name):
    with open(GOLDEN / name, newline="") as f:
        rows = [r for r in csv.reader(f, delimiter="\t") if not r[0].startswith("#")]
    return [(r[0], r[1], Fraction(int(r[2]), int(r[3]))) for r in rows]


def parse(fields):
    out = {}
    for item in fields.split():
        key, value = item.split("=", 1)
        out[key] = value
    return out


def test_golden_full_matching_files():
    space = {n: list(involutions(range(1, n + 1))) for n in (2, 4, 6, 8)}
    for inp, _, value in read_golden("full_matchings.tsv"):
        assert value == len(space[int(parse(inp)["N"])])
    for inp, _, value in read_golden("pair_probabilities.tsv"):
        f = parse(inp)
        s = space[int(f["N"])]
        i, j = int(f["i"]), int(f["j"])
        assert value == Fraction(sum(m[i] == j for m in s), len(s))
    for inp, _, value in read_golden("joint_probabilities.tsv"):
        f = parse(inp)
        s = space[int(f["N"])]
        i, j, a, b = int(f["i"]), int(f["j"]), int(f["i'"]), int(f["j'"])
        assert value == Fraction(sum(m[i] == a and m[j] == b for m in s), len(s))
    for inp, _, value in read_golden("set_probabilities.tsv"):
        f = parse(inp)
        s = space[int(f["N"])]
        lo, hi = f["C"].strip("{}").split("..")
        subset = set(range(int(lo), int(hi) + 1))
        assert value == Fraction(sum(m[int(f["i"])] in subset for m in s), len(s))


def partial_law(counts, unmatched):
    types = [k for k, c in enumerate(counts) for _ in range(c)]
    agents = list(range(len(types)))
    points = []
    for sigma in involutions(agents, allow_fixed=True):
        fixed = [0] * len(counts)
        for a in agents:
            fixed[types[a]] += sigma[a] == a
        if fixed == list(unmatched):
            points.append([None if sigma[a] == a else types[sigma[a]] for a in agents])
    return points


def test_golden_partial_space_file():
    rows = read_golden("partial_space.tsv")
    cases = {}
    for inp, outcome, value in rows:
        key = " ".join(inp.split()[:2])
        cases.setdefault(key, []).append((parse(inp), outcome, value))
    assert len(cases) == 6
    for key, entries in cases.items():
        f = parse(key)
        counts = [int(x) for x in f["M"].split(",")]
        unmatched = [int(x) for x in f["m"].split(",")]
        points = partial_law(counts, unmatched)
        n = len(points)

        def label(x):
            return "J" if x is None else str(x + 1)

        def prob(pred):
            return Fraction(sum(pred(p) for p in points), n)

        agents = range(sum(counts))
        outcomes = [str(k + 1) for k in range(len(counts))] + ["J"]
        defect = max(
            (abs(prob(lambda p: label(p[i]) == c and label(p[j]) == d)
                 - prob(lambda p: label(p[i]) == c) * prob(lambda p: label(p[j]) == d))
             for i in agents for j in agents if i != j for c in outcomes for d in outcomes),
            default=Fraction(0))
        for fields, outcome, value in entries:
            if outcome == "sample_points":
                assert value == n
            elif outcome == "independence_defect":
                assert value == defect, key
            elif "j" in fields:
                i, j = int(fields["i"]) - 1, int(fields["j"]) - 1
                c, d = (x.split("=")[1] for x in outcome.split(","))
                assert value == prob(lambda p: label(p[i]) == c and label(p[j]) == d)
            else:
                i = int(fields["i"]) - 1
                c = outcome.split("=")[1]
                assert value == prob(lambda p: label(p[i]) == c)
