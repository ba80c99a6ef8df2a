import numpy as np
import pytest

import oracles
from lacd import synth
from lacd.errors import ConfigError
from lacd.synth import GenConfig, generate


def _pair_arrays(sn):
    n = sn.net.n
    A = oracles.dense_adjacency(n, sn.net.edges.tolist())
    iu, ju = np.triu_indices(n, 1)
    return iu, ju, A[iu, ju]


def _within(observed, mean_p, var, k):
    return abs(observed - mean_p) <= k * np.sqrt(var)


def test_table1_config_values():
    cfg = synth.scenario_table1(0.15, -1)
    assert (cfg.n, cfg.K) == (500, 2)
    assert cfg.beta == (-1.0, 4.0)
    assert cfg.pi == (0.5, 0.5)
    P = cfg.P_within
    assert P[0, 0] == P[1, 1] == 0.15
    assert P[0, 1] == 0.05
    assert P[0, 2] == P[1, 2] == P[2, 2] == 0.10
    assert not cfg.heterogeneous
    cfg = synth.scenario_table1(0.25, 0)
    assert cfg.P_within[0, 0] == 0.25 and cfg.beta == (0.0, 4.0)


def test_table2_config_values():
    cfg = synth.scenario_table2(0.25, -1)
    assert cfg.heterogeneous and cfg.u_max == 0.2
    cfg = synth.scenario_table2(0.15, 1)
    assert cfg.P_within[0, 0] == 0.15 and cfg.P_within[0, 1] == 0.05


@pytest.mark.parametrize("fn,args", [
    (synth.scenario_table1, (0.50, 0)),
    (synth.scenario_table2, (0.25, 5)),
    (synth.scenario_table1, (0.10, 0)),
    (synth.scenario_table3, (3,)),
])
def test_off_grid_rejected(fn, args):
    with pytest.raises(ConfigError):
        fn(*args)


def test_table3_configs():
    cfg = synth.scenario_table3(2)
    assert (cfg.n, cfg.K, cfg.beta) == (500, 2, (0.0, 4.0)) and cfg.heterogeneous
    cfg = synth.scenario_table3(5)
    assert (cfg.n, cfg.K, cfg.beta) == (1000, 5, (1.0, 4.0))
    assert np.allclose(cfg.pi, 0.2) and cfg.P_within.shape == (6, 6)


@pytest.mark.parametrize("kwargs", [
    dict(pi=(0.7, 0.7)),
    dict(pi=(-0.5, 1.5)),
    dict(P_within=np.array([[0.2, 0.1, 0.1], [0.0, 0.2, 0.1], [0.1, 0.1, 0.1]])),
    dict(P_within=np.full((3, 3), 1.5)),
    dict(P_within=np.full((2, 2), 0.1)),
    dict(u_max=0.0),
    dict(u_max=1.5),
    dict(background_link="other"),
    dict(beta=(np.nan, 1.0)),
])
def test_invalid_config(kwargs):
    base = dict(n=10, K=2, beta=(0.0, 1.0), pi=(0.5, 0.5), P_within=np.full((3, 3), 0.1), seed=1)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        generate(GenConfig(**base))


def test_seed_required():
    with pytest.raises(ConfigError):
        generate(synth.scenario_table1(0.2, 0))


def test_same_seed_same_network():
    for cfg in (synth.scenario_table1(0.2, 0, seed=5), synth.scenario_table2(0.2, 1, seed=5)):
        a, b = generate(cfg), generate(cfg)
        assert np.array_equal(a.c_true, b.c_true)
        assert np.array_equal(a.net.edges, b.net.edges)
        assert np.array_equal(a.X, b.X)
    other = generate(synth.scenario_table1(0.2, 0, seed=6))
    assert not np.array_equal(other.c_true, generate(synth.scenario_table1(0.2, 0, seed=5)).c_true)


def test_u_present_iff_heterogeneous():
    a = generate(synth.scenario_table1(0.2, 0, seed=1))
    b = generate(synth.scenario_table2(0.2, 0, seed=1))
    assert a.u is None
    assert b.u.shape == (500,)
    bg = b.c_true == 3
    assert np.all(b.u[~bg] == 0) and np.all((b.u[bg] >= 0) & (b.u[bg] < 0.2))
    assert a.X.shape == (500, 1) and a.c_true.shape == (500,)
    assert np.all((a.X >= -1) & (a.X < 1))


@pytest.mark.parametrize("beta0,rounded_pct", [(-1, 62), (0, 50), (1, 38)])
def test_background_fraction(beta0, rounded_pct):
    expected = oracles.background_fraction(beta0, 4.0)
    assert round(100 * expected) == rounded_pct
    cfg = synth.scenario_table1(0.2, beta0)
    rng = np.random.default_rng(100 + beta0)
    fracs = [np.mean(generate(cfg, rng).c_true == 3) for _ in range(200)]
    se = np.sqrt(expected * (1 - expected) / (200 * 500))
    assert abs(np.mean(fracs) - expected) <= 3 * se


def test_erdos_renyi_density():
    p = 0.1
    cfg = GenConfig(n=1000, K=2, beta=(0.0, 1.0), pi=(0.5, 0.5), P_within=np.full((3, 3), p), seed=3)
    sn = generate(cfg)
    pairs = 1000 * 999 / 2
    assert _within(sn.net.n_edges / pairs, p, p * (1 - p) / pairs, 3)


def test_block_frequencies_large_draw():
    P = np.array([[0.3, 0.02, 0.1], [0.02, 0.2, 0.05], [0.1, 0.05, 0.15]])
    cfg = GenConfig(n=2000, K=2, beta=(0.5, 2.0), pi=(0.4, 0.6), P_within=P, seed=9)
    sn = generate(cfg)
    iu, ju, a = _pair_arrays(sn)
    ci, cj = sn.c_true[iu] - 1, sn.c_true[ju] - 1
    for k in range(3):
        for l in range(k, 3):
            sel = ((ci == k) & (cj == l)) | ((ci == l) & (cj == k))
            m = sel.sum()
            assert m > 1000
            assert _within(a[sel].mean(), P[k, l], P[k, l] * (1 - P[k, l]) / m, 4)


def _heterogeneous_rates(link):
    cfg = synth.scenario_table2(0.2, -1, background_link=link)
    rng = np.random.default_rng(17)
    sums = {"bb": [0, 0.0, 0.0, 0], "bc": [0, 0.0, 0.0, 0], "cc": [0, 0.0, 0.0, 0]}
    for _ in range(4):
        sn = generate(cfg, rng)
        iu, ju, a = _pair_arrays(sn)
        bi, bj = sn.c_true[iu] == 3, sn.c_true[ju] == 3
        if link == "intensity":
            p_bc = np.where(bi, sn.u[iu], sn.u[ju])
        else:
            p_bc = np.full(iu.size, 0.10)
        groups = {
            "bb": (bi & bj, np.sqrt(sn.u[iu] * sn.u[ju])),
            "bc": (bi ^ bj, p_bc),
            "cc": (~bi & ~bj, cfg.P_within[sn.c_true[iu] - 1, sn.c_true[ju] - 1]),
        }
        for key, (sel, p) in groups.items():
            s = sums[key]
            s[0] += int(a[sel].sum())
            s[1] += float(p[sel].sum())
            s[2] += float((p[sel] * (1 - p[sel])).sum())
            s[3] += int(sel.sum())
    return sums


@pytest.mark.parametrize("link", ["constant", "intensity"])
def test_heterogeneous_pair_rates(link):
    # conditional on the drawn u, edge counts are sums of independent Bernoullis
    for key, (edges, mean, var, m) in _heterogeneous_rates(link).items():
        assert m > 0
        assert abs(edges - mean) <= 3 * np.sqrt(var), key


def test_background_mean_probability():
    # E sqrt(u_i u_j) = (E sqrt u)^2 = (2/3 sqrt(0.2))^2 for independent U(0, 0.2)
    s = _heterogeneous_rates("constant")["bb"]
    assert s[1] / s[3] == pytest.approx((2 / 3) ** 2 * 0.2, rel=0.02)


def test_pluggable_covariates():
    def normal(rng, n, p):
        return rng.normal(size=(n, p))

    cfg = GenConfig(n=300, K=1, beta=(0.0, 1.0, -1.0), pi=(1.0,), P_within=np.full((2, 2), 0.1),
                    covariates=normal, seed=2)
    sn = generate(cfg)
    assert sn.X.shape == (300, 2)
    assert np.any(np.abs(sn.X) > 1)
