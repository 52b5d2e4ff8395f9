import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavedge.cwt import PSI_NORM, angle_field, angle_of, cwt1d, cwt1d_rows, cwt2d, smoothing_kernel, wavelet_kernel

from conftest import step_signal

# Step response integral int_{-d}^inf s**-0.5 psi(t/s) dt, by adaptive quadrature.
STEP_QUAD = {
    (4, 0): 2.1245038640543945,
    (4, 3): 1.6036596511669268,
    (8, 0): 3.0045021778597705,
    (8, 3): 2.80050396828272,
    (16, 0): 4.249007728108789,
    (16, 3): 4.1749707610522355,
    (32, 0): 6.009004355719542,
    (32, 3): 5.982655536056462,
}


def closed_form(d, s):
    return math.sqrt(2 * s) * math.pi ** -0.25 * math.exp(-d * d / (2 * s * s))


def test_closed_form_matches_quadrature():
    for (s, d), v in STEP_QUAD.items():
        assert closed_form(d, s) == pytest.approx(v, rel=1e-12)


@pytest.mark.parametrize("s", [4, 8, 16, 32])
def test_step_response(s):
    c = cwt1d(step_signal(), s).coeffs
    assert int(np.argmax(np.abs(c))) == 512
    assert c[512] == pytest.approx(STEP_QUAD[(s, 0)], rel=1e-6)
    assert c[509] == pytest.approx(STEP_QUAD[(s, 3)], rel=1e-6)
    u = np.arange(512 - 3 * s, 512 + 3 * s)
    # the zero-sum correction of the truncated taps shifts values by ~1e-8 of the peak
    np.testing.assert_allclose(c[u], [closed_form(x - 512, s) for x in u], rtol=0, atol=1e-7 * c[512])


def test_constant_and_linearity(rng):
    assert np.abs(cwt1d(np.full(300, 3.7), 8).coeffs).max() < 1e-10
    f, g = rng.normal(size=256), rng.normal(size=256)
    lhs = cwt1d(2.5 * f - 0.75 * g, 4).coeffs
    rhs = 2.5 * cwt1d(f, 4).coeffs - 0.75 * cwt1d(g, 4).coeffs
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_scale_errors():
    with pytest.raises(ValueError):
        cwt1d(np.zeros(64), 0.5)
    with pytest.raises(ValueError):
        cwt1d(np.zeros(64), 32)


def test_kernels():
    for s in (1, 2.5, 4, 32):
        k = wavelet_kernel(s)
        assert abs(k.sum()) < 1e-8
        assert len(k) == 2 * math.ceil(6 * s)
    sk = smoothing_kernel(4)
    # integral of s**-0.5 theta(t/s) is sqrt(s) pi**-0.25 sqrt(2 pi)
    assert sk.sum() == pytest.approx(2 * math.pi ** 0.25 * math.sqrt(2), rel=1e-6)


def test_fft_and_direct_paths_agree(rng):
    f = rng.normal(size=200)
    small = cwt1d(f, 5).coeffs  # 60 taps, direct
    big = cwt1d(f, 6).coeffs  # 72 taps, FFT
    assert np.isfinite(small).all() and np.isfinite(big).all()
    from wavedge import cwt as mod

    old = mod.DIRECT_BELOW
    try:
        mod.DIRECT_BELOW = 1000
        direct = mod._correlate_axis(f, wavelet_kernel(6), 0)
    finally:
        mod.DIRECT_BELOW = old
    np.testing.assert_allclose(direct, big, atol=1e-10)


@pytest.mark.parametrize("s", [4, 8, 16])
def test_decay_law_1d(s):
    f = step_signal()
    r = math.log(abs(cwt1d(f, 2 * s).coeffs[512])) - math.log(abs(cwt1d(f, s).coeffs[512]))
    assert r == pytest.approx(0.5 * math.log(2), abs=0.02)


def test_decay_law_2d():
    img = np.zeros((256, 256))
    img[:, 128:] = 1
    for s in (4, 8, 16):
        r = math.log(cwt2d(img, 2 * s).wx[128, 128]) - math.log(cwt2d(img, s).wx[128, 128])
        assert r == pytest.approx(math.log(2), abs=0.05)


def test_shift_covariance(rng):
    f = rng.normal(size=400)
    k = 7
    a = cwt1d(f, 4).coeffs
    b = cwt1d(np.roll(f, k), 4).coeffs
    np.testing.assert_allclose(b[100 + k : 300 + k], a[100:300], atol=1e-12)


def test_vertical_step_2d():
    img = np.zeros((128, 128))
    img[:, 64:] = 1.0
    s = 4
    p = cwt2d(img, s)
    assert np.abs(p.wy).max() < 1e-12
    # separable closed form: s * sqrt(2) * exp(-x**2 / (2 s**2)) per row
    x = np.arange(64 - 12, 64 + 12)
    expect = s * math.sqrt(2) * np.exp(-((x - 64) ** 2) / (2 * s * s))
    np.testing.assert_allclose(p.wx[40, x], expect, rtol=0, atol=1e-7 * expect.max())
    # each row has the profile of the 1-D response
    row = cwt1d(img[40], s).coeffs[x]
    np.testing.assert_allclose(p.wx[40, x] / p.wx[40, 64], row / row[12], atol=1e-7)


def test_rows_transform(rng):
    img = rng.normal(size=(6, 80))
    out = cwt1d_rows(img, 3)
    for r in range(6):
        np.testing.assert_allclose(out[r], cwt1d(img[r], 3).coeffs, atol=1e-12)


def test_transpose_and_constant(rng):
    img = rng.normal(size=(40, 50))
    a, b = cwt2d(img, 3), cwt2d(img.T, 3)
    np.testing.assert_allclose(b.wx, a.wy.T, atol=1e-12)
    c = cwt2d(np.full((32, 32), 2.0), 2)
    assert np.abs(c.wx).max() < 1e-10 and np.abs(c.wy).max() < 1e-10


def test_angle_of():
    assert angle_of(1, 0) == 0
    assert angle_of(-1, 0) == pytest.approx(math.pi)
    assert angle_of(1, 1) == pytest.approx(math.pi / 4)
    assert angle_of(0, 1) == pytest.approx(math.pi / 2)
    assert angle_of(0, -1) == pytest.approx(3 * math.pi / 2) or angle_of(0, -1) == pytest.approx(-math.pi / 2)
    with pytest.raises(ValueError):
        angle_of(0, 0)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_angle_range_and_branches(wx, wy):
    if wx == 0 and wy == 0:
        return
    a = angle_of(wx, wy)
    assert -math.pi / 2 < a <= 3 * math.pi / 2
    assert math.cos(a) * math.hypot(wx, wy) == pytest.approx(wx, abs=1e-9)
    assert math.sin(a) * math.hypot(wx, wy) == pytest.approx(wy, abs=1e-9)
    assert angle_field(np.array([wx]), np.array([wy]))[0] == pytest.approx(a)


def test_modulus_nonnegative(rng):
    p = cwt2d(rng.normal(size=(48, 48)), 2)
    assert (p.modulus >= 0).all()
    np.testing.assert_allclose(p.modulus, np.hypot(p.wx, p.wy))
