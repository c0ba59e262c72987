import numpy as np
import pytest

from driftstream.model import (
    Adaptive,
    ClusterModel,
    EngineConfig,
    Fixed,
    MicroCluster,
    Sample,
    validate_model,
)

CFG = EngineConfig.adaptive(t_w=10, d=2, k=2)


def mc(cid, center, r=1.0, label=0, density=3, edges=()):
    return MicroCluster(cid, np.asarray(center, float), r, r / 2, density=density,
                        kernel_count=1, edges=set(edges), label=label)


def build(*clusters, next_label=None):
    m = ClusterModel()
    for c in clusters:
        m.add(c)
    m.next_id = max(c.id for c in clusters) + 1 if clusters else 0
    m.next_label = next_label or max([c.label for c in clusters] + [0]) + 1
    return m


def test_fresh_model_is_valid():
    assert validate_model(ClusterModel(), CFG) == []


def test_asymmetric_edge_reported():
    m = build(mc(0, [0, 0], edges=[1], label=1), mc(1, [1, 0], label=1))
    assert "asymmetric edge (0,1)" in validate_model(m, CFG)


def test_linked_macros_with_different_labels():
    m = build(mc(0, [0, 0], label=3, edges=[1]), mc(1, [1, 0], label=5, edges=[0]))
    assert validate_model(m, CFG) == ["component label mismatch"]


def test_same_label_on_separate_components():
    m = build(mc(0, [0, 0], label=3), mc(1, [5, 0], label=3))
    assert validate_model(m, CFG) == ["label 3 shared by distinct components"]


def test_field_invariants():
    bad = mc(0, [0, 0], label=1, density=1)
    bad.kernel_count = 2
    bad.edges.add(0)
    problems = validate_model(build(bad), CFG)
    assert "cluster 0: macro label with density below d" in problems
    assert "cluster 0: kernel_count outside [0, density]" in problems
    assert "cluster 0: self edge" in problems


def test_kernel_radius_must_match_k():
    c = mc(0, [0, 0])
    c.kernel_radius = 0.3
    assert "cluster 0: kernel_radius != radius / k" in validate_model(build(c), CFG)


def test_next_label_must_exceed_labels():
    m = build(mc(0, [0, 0], label=4), next_label=2)
    assert any("not below next_label" in p for p in validate_model(m, CFG))


@pytest.mark.parametrize("kwargs", [
    dict(radius_policy=Adaptive(0)),
    dict(radius_policy=Fixed(0.0)),
    dict(radius_policy=Fixed(0.1), k=1.0),
    dict(radius_policy=Fixed(0.1), d=0),
    dict(radius_policy=Fixed(0.1), t_max=0),
    dict(radius_policy=Fixed(0.1), r_min=0.0),
])
def test_config_rejects_non_positive(kwargs):
    with pytest.raises(ValueError):
        EngineConfig(**kwargs)


def test_config_dict_round_trip():
    for cfg in (EngineConfig.adaptive(600, d=5, k=5), EngineConfig.fixed(0.4, d=5, t_max=50)):
        assert EngineConfig.from_dict(cfg.to_dict()) == cfg


def test_config_unknown_key():
    with pytest.raises(ValueError, match="unknown"):
        EngineConfig.from_dict({"mode": "fixed", "r": 0.1, "alpha": 1})


def test_sample_requires_vector():
    assert Sample([1, 2], 0).dim == 2
    with pytest.raises(ValueError):
        Sample([], 0)
