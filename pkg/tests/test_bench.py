import csv
import json

import numpy as np
import pytest
from scipy.stats import spearmanr

from qbafx import ConfigError, EmptyExperiment, check_validity, parse_qbaf, serialize_qbaf
from qbafx.bench import (
    RUNTIME_COLUMNS,
    ExperimentReport,
    RobustnessReport,
    load_config,
    parse_config,
    rankdata,
    run_config,
    run_effectiveness,
    run_robustness,
    run_scalability,
    spearman,
    write_csv,
)
from qbafx.counterfactual import VARIANTS
from qbafx.generators import CyclicSpec, TreeSpec, gen_cyclic, gen_tree


def test_tree_sizes():
    q = gen_tree(TreeSpec(2, 1, seed=3))
    assert len(q) == 3 and len(q.attacks | q.supports) == 2
    assert TreeSpec(4, 8).n_args == (4**9 - 1) // 3 == 87381
    assert TreeSpec(4, 8).n_args_node_levels == (4**8 - 1) // 3 == 21845
    assert TreeSpec(4, 7).n_args_node_levels == 5461


def test_tree_structure():
    spec = TreeSpec(3, 3, seed=11)
    q = gen_tree(spec)
    assert len(q) == spec.n_args == 40
    root = spec.topic
    assert root == q.arguments[0]
    out_deg = {a: 0 for a in q.arguments}
    for s, t in q.attacks | q.supports:
        out_deg[s] += 1
    # every non-root argument feeds exactly one parent; the root feeds nobody
    assert out_deg[root] == 0 and all(d == 1 for a, d in out_deg.items() if a != root)
    assert len(q.attackers(root) + q.supporters(root)) == 3
    assert q.index.acyclic


def test_generators_are_deterministic():
    assert gen_tree(TreeSpec(2, 4, 5)) == gen_tree(TreeSpec(2, 4, 5))
    assert gen_tree(TreeSpec(2, 4, 5)) != gen_tree(TreeSpec(2, 4, 6))
    assert gen_cyclic(CyclicSpec(30, seed=2)) == gen_cyclic(CyclicSpec(30, seed=2))


def test_cyclic_examples():
    q, topic = gen_cyclic(CyclicSpec(2, 2, seed=9))
    assert q.attacks | q.supports == {("a0", "a1"), ("a1", "a0")}
    q, topic = gen_cyclic(CyclicSpec(100, 100, seed=1))
    assert len(q) == 100 and len(q.attacks) + len(q.supports) == 100
    assert not (q.attacks & q.supports)
    assert all(s != t for s, t in q.attacks | q.supports)
    assert topic in q.base_scores
    # generated documents pass full validation
    assert parse_qbaf(serialize_qbaf(q)) == q


def test_spec_validation():
    for bad in (lambda: TreeSpec(5, 2), lambda: TreeSpec(2, 0), lambda: TreeSpec(2, 9)):
        with pytest.raises(ValueError):
            bad()
    with pytest.raises(ValueError):
        CyclicSpec(3, 7)
    with pytest.raises(ValueError):
        CyclicSpec(1)


def test_rank_helpers_match_scipy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.integers(0, 5, size=8).astype(float)
        y = rng.normal(size=8)
        assert np.allclose(rankdata(x), __import__("scipy.stats").stats.rankdata(x))
        ref = spearmanr(x, y).statistic
        got = spearman(x, y)
        assert (np.isnan(ref) and np.isnan(got)) or got == pytest.approx(ref, abs=1e-12)


def test_effectiveness_report_shape():
    rep = run_effectiveness("qe", [TreeSpec(2, 3)], n_instances=5, seed=4)
    assert [r.variant for r in rep.rows] == list(VARIANTS)
    for r in rep.rows:
        assert 0.0 <= r.validity_rate <= 1.0 and r.n_instances == 5
        assert r.mean_l1 >= r.mean_l2 >= 0
        assert r.n_args == 15 and r.n_args_node_levels == 7
    assert rep.row("tree(w=2,d=3)", "BL").variant == "BL"


def test_zero_instances_rejected():
    with pytest.raises(EmptyExperiment):
        run_effectiveness("qe", [TreeSpec(2, 3)], n_instances=0)
    with pytest.raises(EmptyExperiment):
        run_robustness("qe", TreeSpec(2, 3), [0.1], n_instances=0)
    with pytest.raises(ValueError):
        run_effectiveness("qe", [TreeSpec(2, 3)], variants=["nope"], n_instances=1)


def test_cyclic_effectiveness_ordering():
    rep = run_effectiveness("qe", [CyclicSpec(50)], n_instances=20, seed=0)
    ce = rep.row("cyclic(n=50,r=50)", "CE-QArg")
    pol = rep.row("cyclic(n=50,r=50)", "BL+pol")
    assert ce.validity_rate == 1.0
    assert ce.mean_l1 < pol.mean_l1


def test_valid_outputs_reverify():
    from qbafx import CexQuery, solve
    from qbafx.bench import instance_seed, sample_desired, with_seed
    from qbafx.generators import generate
    from qbafx.semantics import topic_strength

    for i in range(10):
        spec = with_seed(CyclicSpec(20), instance_seed(1, 0, i))
        q, topic = generate(spec)
        s = sample_desired(np.random.default_rng([spec.seed, 1]), topic_strength(q, "qe", topic))
        query = CexQuery(topic, s)
        res = solve(q, "qe", query)
        assert res.valid and check_validity(q, "qe", query, res.counterfactual)


def test_scalability_trend():
    specs = [TreeSpec(2, d) for d in range(1, 6)]
    rep = run_scalability("qe", specs, n_instances=6, seed=2)
    assert len(rep.rows) == 5
    assert all(r.validity_rate == 1.0 for r in rep.rows)
    assert spearman([r.n_args for r in rep.rows], [r.median_runtime_s for r in rep.rows]) > 0
    single = run_scalability("qe", [TreeSpec(2, 2)], n_instances=2)
    assert len(single.rows) == 1 and single.rows[0].variant == "CE-QArg"


def test_robustness_zero_perturbation():
    rep = run_robustness("qe", TreeSpec(2, 3), [0.0, 0.1], n_instances=4)
    assert rep.rows[0].metric1_mean == 0.0 and rep.rows[0].metric2_mean == 0.0
    assert rep.rows[1].metric2_mean > 0
    with pytest.raises(ValueError):
        run_robustness("qe", TreeSpec(2, 3), [-0.1], n_instances=1)


def _read(path):
    return path.read_text(encoding="utf-8").splitlines()


def test_write_csv_shapes(tmp_path):
    write_csv(ExperimentReport(), tmp_path / "empty.csv")
    assert len(_read(tmp_path / "empty.csv")) == 1
    rep = run_effectiveness("qe", [TreeSpec(2, 2)], n_instances=2)
    one = ExperimentReport(rows=rep.rows[:1])
    write_csv(one, tmp_path / "one.csv")
    assert len(_read(tmp_path / "one.csv")) == 2
    write_csv(rep, tmp_path / "table.csv")
    rows = list(csv.DictReader(open(tmp_path / "table.csv", encoding="utf-8")))
    assert [r["variant"] for r in rows] == list(VARIANTS)
    for r in rows:
        for col in ("validity_rate", "mean_l1", "mean_l2", "mean_runtime_s"):
            float(r[col])
    raw = (tmp_path / "table.csv").read_bytes()
    assert raw.endswith(b"\n") and b"\r" not in raw


def test_write_csv_six_significant_digits(tmp_path):
    rep = RobustnessReport()
    from qbafx.bench import RobustnessRow

    rep.rows.append(RobustnessRow("x", 1e-8, 1.0, 0.123456789, 2.0, 3))
    write_csv(rep, tmp_path / "r.csv")
    assert _read(tmp_path / "r.csv")[1] == "x,1e-08,1,0.123457,2,3"


def test_write_csv_reports_path(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        write_csv(ExperimentReport(), target)


def _strip_runtime(path):
    rows = list(csv.DictReader(open(path, encoding="utf-8")))
    return [{k: v for k, v in r.items() if k not in RUNTIME_COLUMNS} for r in rows]


CONFIG = {
    "seed": 7,
    "experiments": [
        {"name": "eff", "type": "effectiveness", "semantics": "qe", "n_instances": 3,
         "specs": [{"kind": "tree", "width": 2, "depth": 3}, {"kind": "cyclic", "n_args": 15}]},
        {"name": "scal", "type": "scalability", "n_instances": 2,
         "specs": [{"kind": "tree", "width": 2, "depth": 2}]},
        {"name": "rob", "type": "robustness", "n_instances": 2,
         "spec": {"kind": "tree", "width": 2, "depth": 3}, "e_grid": [1e-3, 1e-2, 1e-1]},
    ],
}


def test_config_runs_are_reproducible(tmp_path):
    cfg = parse_config(CONFIG)
    a = run_config(cfg, tmp_path / "a", jobs=1)
    b = run_config(cfg, tmp_path / "b", jobs=2)
    assert [p.rsplit("/", 1)[1] for p in a] == ["eff.csv", "scal.csv", "rob.csv"]
    for pa, pb in zip(a, b):
        assert _strip_runtime(pa) == _strip_runtime(pb)
    rob_a = open(a[2], encoding="utf-8").read()
    assert rob_a == open(b[2], encoding="utf-8").read()
    assert len(rob_a.splitlines()) == 4


@pytest.mark.parametrize(
    "doc",
    [
        {"experiments": []},
        {},
        [],
        {"experiments": [{"type": "mystery"}]},
        {"experiments": [{"type": "effectiveness"}]},
        {"experiments": [{"type": "effectiveness", "specs": [{"kind": "tree", "width": 9, "depth": 2}]}]},
        {"experiments": [{"type": "effectiveness", "specs": [{"kind": "tree", "width": 2}]}]},
        {"experiments": [{"type": "effectiveness", "bogus": 1, "specs": [{"kind": "tree", "width": 2, "depth": 2}]}]},
        {"experiments": [{"type": "robustness", "spec": {"kind": "tree", "width": 2, "depth": 2}}]},
        {"experiments": [{"type": "effectiveness", "semantics": "xx",
                          "specs": [{"kind": "tree", "width": 2, "depth": 2}]}]},
        {"seed": "x", "experiments": [{"type": "scalability", "specs": [{"kind": "tree", "width": 2, "depth": 2}]}]},
    ],
)
def test_config_errors(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="nope.json"):
        load_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(CONFIG), encoding="utf-8")
    assert len(load_config(good).experiments) == 3
