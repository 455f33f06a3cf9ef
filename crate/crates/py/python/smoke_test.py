"""Quick end-to-end check of the Python bindings.

    maturin develop -m crates/py/Cargo.toml --release
    python crates/py/python/smoke_test.py
"""

from fractions import Fraction

import ballast


def main():
    run = ballast.simulate_run("greedy", 4096, seed=1)
    loads = run["final_loads"]
    assert sum(loads) == 4096
    assert run["max_load"] == ballast.max_load(loads) <= 5
    hist = ballast.load_histogram(loads)
    assert sum(hist.values()) == 4096

    b = ballast.theoretical_bounds(1 << 16, 0.5)
    assert (b["lower_l"], b["upper_t"], b["epsilon"]) == (1.0, 4.0, 0.5)

    tail = ballast.poisson_upper_tail(2.0, 3)
    assert abs(tail["tail"] - 0.3233235838169366) < 1e-12

    toy = ballast.Policy("max-index", 2)
    probs = ballast.exact_placement_probs(toy)
    assert probs == [Fraction(1, 4), Fraction(3, 4)]
    assert ballast.forbidden_set(probs, Fraction(3, 5)) == [0]
    assert ballast.forbidden_set(probs, 0.4) == []
    rep = ballast.check_claim1(probs, Fraction(3, 5), [0])
    assert rep["part1_ok"] and rep["part2_ok"]

    advice = ballast.build_advice([0, 3, 1, 4], 3)
    assert advice["entries"] == [[1, 3], [3, 4]]

    phases = ballast.phase_report("greedy", 1 << 12, phases=2, seed=3)
    assert [row["phase"] for row in phases["rows"]] == [0, 1, 2]

    rows = ballast.run_experiment('n_values = [64]\ntrials = 3\npolicies = ["one-choice"]\n')
    assert [r["trial"] for r in rows] == [0, 1, 2]

    assert ballast.verify("one-choice", 8)["ok"]
    assert not ballast.verify("illegal-zero", 8)["ok"]

    clustered = ballast.Policy("clustered", 16)
    for a, b in [(0, 5), (2, 9), (15, 15)]:
        assert clustered.step(a, b, seed=0) in (a, b)
    assert sum(ballast.exact_placement_probs(clustered)) == 1

    try:
        ballast.Policy("three-choice", 8)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown policy accepted")

    print("smoke test ok:", ballast.POLICIES)


if __name__ == "__main__":
    main()
