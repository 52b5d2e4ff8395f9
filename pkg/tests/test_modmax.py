import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import ndimage

from wavedge.cwt import cwt1d, cwt2d
from wavedge.evaluation import disk_region_image
from wavedge.modmax import (
    MaximaSet,
    ModMax,
    chain_curves,
    chain_indices,
    detect1d,
    detect2d,
    maxima_mask_1d,
    maxima_set_2d,
    maxima_set_rows,
)
from wavedge.patterns import PatternSpec, synthesize

from conftest import step_signal


def test_step_single_modmax():
    mm = detect1d(cwt1d(step_signal(), 8))
    assert len(mm) == 1
    assert mm[0].pos == 512 and mm[0].sign == 1 and mm[0].scale == 8


def test_constant_no_modmax():
    assert detect1d(cwt1d(np.full(256, 0.3), 4)) == []
    assert detect2d(cwt2d(np.full((32, 32), 0.3), 2)) == []


def test_impulse_two_lines():
    f = synthesize(PatternSpec(2, B=1.0, beta=1.0, unit=64), 1024, 400.0)
    for s in (4, 8, 16):
        mm = detect1d(cwt1d(f, s))
        assert len(mm) == 2
        assert mm[0].sign == 1 and mm[1].sign == -1
        assert [m.pos for m in mm] == [400, 464]


def test_plateau_keeps_leftmost():
    mask = maxima_mask_1d(np.array([0.0, 1.0, 3.0, 3.0, 3.0, 1.0, 0.0]))
    assert np.flatnonzero(mask).tolist() == [2]


def test_modmax_invariants():
    with pytest.raises(ValueError):
        ModMax(3, 4.0, 0.0)
    with pytest.raises(ValueError):
        ModMax(3, 4.0, 1.0, sign=-1)
    with pytest.raises(ValueError):
        ModMax((1, 1), 4.0, -1.0, angle=0.0)
    assert ModMax(3, 4.0, -2.0).sign == -1


@given(st.integers(0, 2**32 - 1))
def test_strict_local_maxima(seed):
    f = np.random.default_rng(seed).normal(size=128)
    c = np.abs(cwt1d(f, 2).coeffs)
    for m in detect1d(cwt1d(f, 2)):
        u = m.pos
        assert c[u] > c[u - 1] and c[u] >= c[u + 1]


def test_rows_batch_matches_single(rng):
    img = rng.normal(size=(5, 90))
    from wavedge.cwt import cwt1d_rows

    ms = maxima_set_rows(cwt1d_rows(img, 2), 2)
    for r in range(5):
        single = [m.pos for m in detect1d(cwt1d(img[r], 2))]
        assert ms.pos[ms.row == r].astype(int).tolist() == single


def test_vertical_step_one_per_row():
    img = np.zeros((64, 64))
    img[:, 30:] = 1
    mm = detect2d(cwt2d(img, 4))
    assert len(mm) == 64
    assert {m.pos[1] for m in mm} == {30}
    assert all(abs(m.angle) < 1e-9 for m in mm)


def test_disk_count_and_dominant_curve():
    r = 60
    img = disk_region_image((256, 256), r, 1.0, 0.0)
    ms = maxima_set_2d(cwt2d(img, 4))
    assert abs(len(ms) - 2 * math.pi * r) <= 0.15 * 2 * math.pi * r
    curves = chain_indices(ms)
    assert max(len(c) for c in curves) >= 0.8 * len(ms)
    # brute-force geometric oracle: every mod-max lies near the circle
    d = np.hypot(ms.pos[:, 0] - 128, ms.pos[:, 1] - 128)
    assert np.abs(d - r).max() <= 3


def test_quantized_nms_option():
    img = disk_region_image((128, 128), 30, 1.0, 0.0)
    plane = cwt2d(img, 2)
    a = maxima_set_2d(plane, interpolate=True)
    b = maxima_set_2d(plane, interpolate=False)
    assert abs(len(a) - len(b)) <= 0.2 * len(a)


def test_chain_empty_and_two_edges():
    assert chain_curves([]) == []
    img = np.zeros((96, 128))
    img[:, 40:90] = 1
    curves = chain_curves(detect2d(cwt2d(img, 2)))
    assert len(curves) == 2
    cols = sorted({p.pos[1] for p in c.points}.pop() for c in curves)
    assert cols == [40, 90]


def _check_partition(ms: MaximaSet, curves):
    seen = np.concatenate(curves)
    assert sorted(seen.tolist()) == list(range(len(ms)))
    for c in curves:
        p = ms.pos[c].astype(int)
        if len(c) > 1:
            assert np.abs(np.diff(p, axis=0)).max() <= 1
        turn = np.abs((np.diff(ms.angle[c]) + np.pi) % (2 * np.pi) - np.pi)
        assert (turn < np.pi / 2).all()


@given(st.integers(0, 2**32 - 1))
def test_chains_partition_random(seed):
    img = ndimage.gaussian_filter(np.random.default_rng(seed).normal(size=(48, 48)), 2)
    ms = maxima_set_2d(cwt2d(img, 2))
    if len(ms):
        _check_partition(ms, chain_indices(ms))


def test_chain_curves_deterministic(rng):
    img = ndimage.gaussian_filter(rng.normal(size=(64, 64)), 2)
    mm = detect2d(cwt2d(img, 2))
    a = [[p.pos for p in c.points] for c in chain_curves(mm)]
    b = [[p.pos for p in c.points] for c in chain_curves(list(reversed(mm)))]
    assert a == b
