"""Smoke test for the `scott` extension module.

Build and install it first, e.g. `pip install --no-build-isolation ./crates/py`,
then run `python crates/py/python/smoke_test.py`.
"""

import json

import scott


def main():
    path3 = scott.MetricSpace.fixture("path3")
    assert len(path3) == 3
    assert path3.labels == ["A", "B", "C"]
    assert path3.distance(0, 2) == "2"

    assert scott.scott_rank_pair(path3, [0], [1]) == "1"
    assert scott.scott_rank_pair(path3, [0], [2]) == "inf"
    assert scott.brute_scott_rank_pair(path3, [0], [1]) == "1"
    assert scott.metric_rank_upper(path3, [0], [1]) == "1"
    assert json.loads(scott.scott_rank_space(path3))["rank"] == "2"

    outcome = json.loads(scott.solve_ef_game(path3, [0], [1], "1"))
    assert outcome["winner"] == "player1"
    report = json.loads(scott.check_strategy(path3, json.dumps(outcome["strategy"])))
    assert report["losing"] == 0

    strategy = json.loads(scott.solve_ef_game(path3, [0], [2], "omega"))["strategy"]
    system = scott.strategy_to_k_system(path3, json.dumps(strategy), 3)
    assert json.loads(scott.verify_k_system(path3, system)) == []
    assert scott.system_to_isometry(path3, system) == [2, 1, 0]

    search = json.loads(scott.search_k_system(path3, [0], [1], 3))
    assert search["status"] == "exhausted"

    square = scott.MetricSpace.fixture("square")
    assert len(scott.autoisometries(square)) == 8
    line = scott.MetricSpace.fixture("line")
    assert scott.autoisometries(line) == [[0, 1, 2, 3]]

    bad = '{"labels": ["x", "y", "z"], "dist": [["0","1","5"],["1","0","1"],["5","1","0"]]}'
    assert json.loads(scott.validate(bad))
    try:
        scott.MetricSpace(bad)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid metric accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
