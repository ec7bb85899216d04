from __future__ import annotations

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffma import epcode, modem
from ffma.gf import FfVector


def test_3ask_mapping():
    assert modem.f_f2c_3ask(FfVector([1, 0, 2], 3)).tolist() == [1.0, 0.0, -1.0]
    assert not modem.f_f2c_3ask(FfVector.zeros(5, 3)).any()
    v2 = FfVector.from_str("2121121221210000", 3)
    want = [-1, 1, -1, 1, 1, -1, 1, -1, -1, 1, -1, 1, 0, 0, 0, 0]
    assert modem.f_f2c_3ask(v2).tolist() == want
    with pytest.raises(ValueError):
        modem.f_f2c_3ask([3])


@given(st.lists(st.integers(0, 2), min_size=1, max_size=20))
def test_3ask_is_odd(vals):
    v = FfVector(vals, 3)
    assert np.array_equal(modem.f_f2c_3ask(-v), -modem.f_f2c_3ask(v))


def test_bpsk_of_ternary_orthogonal():
    assert modem.f_f2c_bpsk(epcode.ternary_orthogonal(1)).tolist() == [[1, 1], [-1, 1]]
    w4 = modem.f_f2c_bpsk(epcode.ternary_orthogonal(2))
    assert w4.tolist() == [[1, 1, 1, 1], [-1, 1, -1, 1], [-1, -1, 1, 1], [1, -1, -1, 1]]
    assert modem.f_f2c_bpsk(FfVector([1, 1, 1, 1], 3)).tolist() == [1, 1, 1, 1]
    with pytest.raises(ValueError):
        modem.f_f2c_bpsk(FfVector([1, 0], 3))


@pytest.mark.parametrize("kappa", range(1, 6))
def test_double_orthogonality(kappa):
    t = epcode.ternary_orthogonal(kappa)
    w = modem.f_f2c_bpsk(t)
    n = 2**kappa
    assert np.array_equal(w @ w.T, n * np.eye(n))


def test_gf2_and_dispatch():
    assert modem.f_f2c(FfVector([0, 1], 2), 2).tolist() == [-1.0, 1.0]
    assert modem.f_f2c([2, 0], 3).tolist() == [-1.0, 0.0]
    with pytest.raises(ValueError):
        modem.f_f2c([1], 7)
    with pytest.raises(ValueError):
        modem.f_f2c_gf2([2])


@pytest.mark.parametrize(
    "mode,kw,want",
    [
        ("td", dict(M=300, K=10, Q=100, m=400), (30.0, 1.0)),
        ("cc_mip_parallel", dict(M=300, K=10, Q=100, m=400, K_gc=8400, R=1600, N=10000), (830.0, 1.0, 1.0)),
        ("cc_mbip_parallel", dict(M=300, K=10, Q=100, m=400, K_gc=8400, R=1600, N=10000), (630.0, 21.0, 1.0)),
    ],
)
def test_pav_published_instances(mode, kw, want):
    pav = modem.pav_regular(mode, **kw)
    assert pav.as_tuple() == pytest.approx(want, abs=1e-9)
    assert pav.factor == 1.0


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from(modem.PAV_MODES),
    st.integers(1, 8),
    st.integers(1, 4),
    st.integers(1, 6),
    st.integers(1, 5),
)
def test_pav_meets_power_constraint(mode, M, K, T, R):
    K = min(K, M)
    m = M + 1
    Q = m - K
    K_gc = m * T
    N = K_gc + R
    try:
        pav = modem.pav_regular(mode, M=M, K=K, Q=Q, m=m, K_gc=K_gc, R=R, N=N)
    except ValueError:
        # only an allocation that is nonpositive before rescaling may be rejected
        assert mode.startswith("cc_mip")
        return
    mu = pav.as_tuple()
    if mode == "td":
        assert K * mu[0] + Q * mu[1] == pytest.approx(m, rel=1e-12)
    else:
        assert K * mu[0] + Q * mu[1] + R * mu[2] == pytest.approx(N, rel=1e-12)
    assert min(mu) > 0


def test_pav_rescale_is_logged(caplog):
    with caplog.at_level(logging.INFO, logger="ffma.modem"):
        pav = modem.pav_regular("cc_mip_serial", M=4, K=2, Q=2, m=4, K_gc=12, R=4, N=16)
    assert pav.factor != 1.0
    assert "rescaled" in caplog.text


def test_pav_errors():
    with pytest.raises(ValueError):
        modem.pav_regular("bogus", M=1, K=1)
    with pytest.raises(ValueError):
        modem.pav_regular("td", M=2, K=3, m=2)
    with pytest.raises(ValueError):
        modem.pav_regular("cc_mip_parallel", M=4, K=1, Q=50, m=4, K_gc=12, R=4, N=16)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=12), st.floats(0.1, 50))
def test_expand_conserves_total(classes, total):
    if not any(classes):
        return
    reg = modem.RegularPav(3.0, 1.0, 0.5)
    pav, k = reg.expand(np.array(classes), total)
    assert pav.mu.sum() == pytest.approx(total, rel=1e-12)
    assert (pav.mu[np.array(classes) == 0] == 0).all()


def test_apply_pav():
    x = np.array([1.0, -1.0, 0.0, 1.0])
    assert np.array_equal(modem.apply_pav(x, modem.Pav(np.ones(4))), x)
    assert modem.apply_pav(x, modem.Pav(np.array([4.0, 1, 1, 1])))[0] == 2.0
    rng = np.random.default_rng(0)
    mu = rng.uniform(0, 3, 4)
    out = modem.apply_pav(x, modem.Pav(mu, 2.5))
    assert np.sum(out**2) == pytest.approx(np.sum(mu * 2.5 * x**2))
    with pytest.raises(ValueError):
        modem.apply_pav(x, modem.Pav(np.ones(3)))
    with pytest.raises(ValueError):
        modem.Pav(np.array([-1.0]))


def test_gmac_noiseless_example():
    sigs = [modem.f_f2c_3ask(FfVector.from_str(s, 3)) for s in ("1111111122221111", "2121121221210000", "1122112222110102")]
    r = modem.gmac(sigs, 0.0)
    assert r.tolist() == [1, 3, -1, 1, 3, 1, 1, -1, -3, -1, -1, 1, 1, 2, 1, 0]
    assert np.array_equal(modem.gmac([sigs[0]], 0.0), sigs[0])
    with pytest.raises(ValueError):
        modem.gmac([], 1.0)
    with pytest.raises(ValueError):
        modem.gmac([np.ones(2), np.ones(3)], 1.0)


def test_gmac_noise_variance_and_reproducibility():
    x = np.zeros(10**6)
    y = modem.gmac([x], 0.8, rng_seed=4)
    assert np.var(y) == pytest.approx(0.4, rel=0.01)
    assert np.array_equal(y, modem.gmac([x], 0.8, rng_seed=4))
    assert np.array_equal(modem.gmac([x[:10]], 0.8, np.random.default_rng(9)),
                          modem.gmac([x[:10]], 0.8, np.random.SeedSequence(9)))


def test_signal_to_csv(tmp_path):
    path = tmp_path / "x.csv"
    modem.signal_to_csv([1.0, -0.5], path)
    assert np.loadtxt(path, delimiter=",").tolist() == [1.0, -0.5]
