"""Smoke tests for the python bindings."""

import pytest

import stabforge


def test_instances_listed():
    names = stabforge.instances()
    assert set(names) == {"leader", "bfs", "color3", "cluster-front"}


def test_generate_and_inspect_graph():
    g = stabforge.generate_graph("random-connected", 12, seed=7)
    assert g.n == 12
    assert g.diameter >= 1
    assert len(g.node_ids) == 12
    j = g.to_json()
    assert len(j["nodes"]) == 12

    g2 = stabforge.load_graph(__import__("json").dumps(j))
    assert g2.diameter == g.diameter


def test_oracle_leader_within_diameter():
    g = stabforge.generate_graph("random-connected", 20, seed=3)
    result = stabforge.oracle(g, "leader", seed=5)
    assert result["stability_time"] <= g.diameter
    assert result["stable_valid"]


def test_corrupted_run_recovers_silently():
    g = stabforge.generate_graph("random-connected", 15, seed=11, instance="bfs")
    summary = stabforge.run(
        g, "bfs", mode="lazy", bound=2 * g.diameter + 4,
        daemon="central-random", seed=4, corrupt=True,
    )
    assert summary["terminated"]
    assert summary["ok"]
    assert summary["bounds"]["all_pass"]
    assert summary["invariant_violations"] == []


def test_greedy_unbounded_keeps_running():
    g = stabforge.generate_graph("star", 6, seed=2)
    summary = stabforge.run(
        g, "leader", mode="greedy", bound=None, daemon="central-random",
        seed=9, corrupt=False, max_steps=2000, row_cap=4000,
    )
    assert not summary["terminated"]
    assert summary["ok"]


def test_fuzz_campaign_all_ok():
    g = stabforge.generate_graph("random-connected", 10, seed=5)
    report = stabforge.fuzz(
        g, "leader", 50, mode="lazy", bound=2 * g.diameter + 4,
        daemon="dist-random", seed=13,
    )
    assert report["runs"] == 50
    assert report["all_ok"]


def test_ring_coloring_oracle():
    g = stabforge.generate_graph("oriented-ring", 16, seed=1, instance="color3")
    result = stabforge.oracle(g, "color3", seed=8)
    assert result["stable_valid"]
    colors = {node["color"] for node in result["final"].values()}
    assert colors <= {0, 1, 2}


def test_rollback_lower_bound():
    result = stabforge.rollback_lower_bound(4, contrast=False)
    assert result["steps"] >= 15
    assert result["pass"]
    assert result["exit_code"] == 0


def test_oracle_rejects_invalid_input():
    g = stabforge.generate_graph("path", 5, seed=1)
    with pytest.raises(Exception):
        stabforge.oracle(g, "color3")  # needs an oriented ring
