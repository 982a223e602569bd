import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secmimo.config import (ConfigError, SystemConfig, config_to_dict,
                            load_config, order_powers, default_config,
                            validate_config)


def _cfg(**kw):
    base = dict(L=3, K=5, N_t=128, N_e=4, T=1024, tau=5, P0=3.0, P_l=(3.0,) * 3,
                Pe=450.0, P=3.0, N0=1.0, N0d=1.0,
                beta=np.full((4, 5, 4), 0.2), beta_e=np.ones(4))
    base.update(kw)
    return SystemConfig(**base)


def test_default_point_dimension():
    cfg = validate_config(_cfg())
    assert cfg.M == 24
    assert cfg.data_length == 1019


@pytest.mark.parametrize("kw, msg", [
    (dict(tau=4), "orthogonal"),
    (dict(T=5), "empty data phase"),
    (dict(N_t=23), "smaller than M"),
    (dict(P=0.0), "P must be positive"),
    (dict(P_l=(3.0, 3.0)), "P_l"),
    (dict(beta=np.ones((4, 5, 3))), "beta"),
])
def test_invalid_configs(kw, msg):
    with pytest.raises(ConfigError, match=msg):
        validate_config(_cfg(**kw))


def test_derived_ratios():
    cfg = default_config(rho=30, snr_db=5)
    assert cfg.rho == pytest.approx(30)
    assert cfg.snr == pytest.approx(10 ** 0.5)
    assert cfg.N0e == cfg.N0
    assert cfg.power_separated


def test_default_point_desired_positions():
    prof = order_powers(default_config())
    # 15 interferers below, then the 5 own users, then 4 eavesdropper antennas
    assert list(prof.desired_indices) == [15, 16, 17, 18, 19]
    assert prof.labels[:15] == ("interferer",) * 15
    assert prof.labels[20:] == ("eavesdropper",) * 4
    assert np.all(np.diff(prof.theta) >= 0)


def test_single_user_single_antenna():
    cfg = _cfg(L=0, K=1, N_e=1, N_t=4, tau=1, T=8, P_l=(), P0=2.0, Pe=10.0,
               beta=np.ones((1, 1, 1)), beta_e=np.array([0.5]))
    prof = order_powers(validate_config(cfg))
    np.testing.assert_array_equal(prof.theta, [2.0, 5.0])
    assert list(prof.desired_indices) == [0]


def _oracle_positions(levels, classes):
    rank = {"interferer": 0, "desired": 1, "eavesdropper": 2}
    order = sorted(range(len(levels)), key=lambda i: (levels[i], rank[classes[i]], i))
    return [pos for pos, i in enumerate(order) if classes[i] == "desired"]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 3), st.integers(1, 4), st.integers(1, 3), st.data())
def test_ordering_matches_sort_oracle(L, K, Ne, data):
    lvl = st.sampled_from([0.1, 0.5, 1.0, 2.0, 7.5])
    P = [data.draw(lvl) for _ in range(L + 1)]
    beta = np.array([[[data.draw(lvl) for _ in range(L + 1)] for _ in range(K)]
                     for _ in range(L + 1)])
    be = np.array([data.draw(lvl) for _ in range(L + 1)])
    Pe = data.draw(lvl)
    bs = data.draw(st.integers(0, L))
    cfg = _cfg(L=L, K=K, N_e=Ne, P0=P[0], P_l=tuple(P[1:]), Pe=Pe,
               beta=beta, beta_e=be)
    levels, classes = [], []
    for l in range(L + 1):
        for k in range(K):
            levels.append(P[l] * beta[l, k, bs])
            classes.append("desired" if l == bs else "interferer")
    levels += [Pe * be[bs]] * Ne
    classes += ["eavesdropper"] * Ne
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        prof = order_powers(cfg, bs)
    assert list(prof.desired_indices) == _oracle_positions(levels, classes)
    np.testing.assert_array_equal(prof.theta, np.sort(levels))


def test_tie_warns():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        order_powers(default_config())
    tied = _cfg()                     # flat gains: interferers at the desired level
    with pytest.warns(RuntimeWarning, match="ambiguous"):
        order_powers(tied)


def test_ordering_is_pure():
    cfg = default_config()
    a, b = order_powers(cfg), order_powers(cfg)
    np.testing.assert_array_equal(a.theta, b.theta)
    assert a.labels == b.labels


def test_load_config_db_keys(tmp_path):
    raw = {"L": 1, "K": 2, "N_t": 16, "N_e": 2, "T": 64, "P0_db": 10,
           "P_l_db": 0, "rho": 30, "snr_db": 5, "N0": 1.0}
    cfg = load_config(raw)
    assert cfg.P0 == pytest.approx(10.0)
    assert cfg.P_l == pytest.approx((1.0,))
    assert cfg.Pe == pytest.approx(30 * 10.0 * 2)
    assert cfg.P == pytest.approx(10 ** 0.5)
    assert cfg.tau == 2
    path = tmp_path / "c.json"
    path.write_text(json.dumps(config_to_dict(cfg)))
    back = load_config(path)
    for name in ("L", "K", "N_t", "N_e", "T", "tau", "P0", "Pe", "P", "N0e"):
        assert getattr(back, name) == pytest.approx(getattr(cfg, name))
    np.testing.assert_array_equal(back.beta, cfg.beta)


def test_load_config_rejects_unknown_and_missing():
    with pytest.raises(ConfigError, match="unknown"):
        load_config({"L": 0, "K": 1, "N_t": 8, "N_e": 1, "T": 8, "P0": 1,
                     "Pe": 1, "P": 1, "N0": 1, "bogus": 1})
    with pytest.raises(ConfigError, match="missing"):
        load_config({"L": 0, "K": 1, "N_t": 8, "N_e": 1, "T": 8, "P0": 1,
                     "Pe": 1, "N0": 1})
