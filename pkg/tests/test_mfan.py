import numpy as np
import pytest

from secmimo import default_config
from secmimo.mfan import (SCHEME_LABEL, MfanConfig, an_basis,
                          conventional_estimate, mfan_precode_and_rate)
from secmimo.signals import (ChannelSet, assemble_uplink, build_attack,
                             build_pilots, complex_normal, sample_channels,
                             trial_seed)

rng = np.random.default_rng(8)


def _uplink(cfg, seed, trial, bs=0, terms=None):
    ss = trial_seed(seed, trial)
    ch = sample_channels(cfg, ss)
    pil = build_pilots(cfg.K, cfg.tau)
    kw = {} if terms is None else {"terms": terms}
    obs = assemble_uplink(cfg, ch, pil, build_attack(cfg, pil, ss), ss, bs=bs, **kw)
    return ch, pil, obs


def test_label():
    assert "reconstructed" in SCHEME_LABEL


def test_clean_pilot_estimate():
    cfg = default_config(L=0, K=3, N_t=16, T=32)
    ch, pil, obs = _uplink(cfg, 1, 0, terms=("desired",))
    est = conventional_estimate(obs.Yp, pil, cfg.P0)
    np.testing.assert_allclose(est, ch.h[0, :, 0], atol=1e-12)


def test_contamination_only():
    cfg = default_config(L=0, K=3, N_t=16, T=32)
    ch, pil, obs = _uplink(cfg, 1, 0, terms=("attack",))
    est = conventional_estimate(obs.Yp, pil, cfg.P0)
    K, Ne, tau = cfg.K, cfg.N_e, cfg.tau
    # despreading the attack gives tau * He 1, divided by sqrt(P0) tau
    term = np.sqrt(cfg.Pe / (K * Ne)) * tau * ch.He[0] @ np.ones(Ne) / \
        (np.sqrt(cfg.P0) * tau)
    for k in range(K):
        np.testing.assert_allclose(est[k], term, atol=1e-12)


def test_estimate_pulled_toward_eavesdropper():
    cfg = default_config(rho=30)
    frac = []
    for i in range(50):
        ch, pil, obs = _uplink(cfg, 2, i)
        est = conventional_estimate(obs.Yp, pil, cfg.P0)
        Q, _ = np.linalg.qr(ch.He[0])
        p = Q.conj().T @ est.T
        frac.append(np.sum(np.abs(p) ** 2, axis=0) / np.sum(np.abs(est) ** 2, axis=1))
    assert np.mean(frac) > 0.5


def test_an_basis_orthogonal():
    h = complex_normal(rng, (5, 40))
    Z = an_basis(h)
    assert Z.shape == (40, 35)
    np.testing.assert_allclose(Z.conj().T @ h.T, 0, atol=1e-10)
    np.testing.assert_allclose(Z.conj().T @ Z, np.eye(35), atol=1e-10)
    with pytest.raises(ValueError):
        an_basis(complex_normal(rng, (4, 4)))


@pytest.mark.parametrize("phi", [0.0, -0.1, 1.01])
def test_phi_range(phi):
    with pytest.raises(ValueError):
        MfanConfig(phi)


def _conventional_all(cfg, seed, n, terms=None):
    chans, ests = [], []
    for i in range(n):
        per_bs = []
        for bs in range(cfg.L + 1):
            ch, pil, obs = _uplink(cfg, seed, i, bs, terms)
            per_bs.append(conventional_estimate(obs.Yp, pil, cfg.cell_powers[bs]))
        chans.append(ch)
        ests.append(per_bs)
    return chans, ests


def test_no_attack_positive_secrecy():
    cfg = default_config(L=0, N_t=64, T=128)
    chans, ests = _conventional_all(cfg, 4, 30, terms=("desired",))
    rep = mfan_precode_and_rate(chans, ests, 1.0, cfg.P, cfg.N0d, cfg.N0e)
    assert rep.sum_secrecy > 0
    assert rep.scheme == "mfan" and rep.params["phi"] == 1.0


def test_no_eavesdropper_channel():
    cfg = default_config(L=1, N_t=32, T=64)
    chans, ests = _conventional_all(cfg, 4, 10)
    chans = [ChannelSet(h=c.h, He=np.zeros_like(c.He)) for c in chans]
    rep = mfan_precode_and_rate(chans, ests, 1.0, cfg.P, cfg.N0d, cfg.N0e)
    np.testing.assert_array_equal(rep.c_eve, 0)
    np.testing.assert_allclose(rep.secrecy, rep.rate)


@pytest.mark.slow
def test_eavesdropper_capacity_grows_with_attack_power(batches):
    from secmimo.mfan import mfan_report
    caps = []
    for rho in (1, 10, 100):
        cfg, b = batches(200, mfan=True, rho=rho)
        caps.append(mfan_report(b.mfan, 0.5, cfg.P, cfg.N0d, cfg.N0e).c_eve)
    assert np.all(caps[1] >= caps[0]) and np.all(caps[2] >= caps[1])
