import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from macshaping.channel import ChannelSpec, build_grid, likelihood
from macshaping.constellation import InvalidArgument, make_pam, build_xor_classes


def test_likelihood_peak_and_decay():
    ch = ChannelSpec(1.0)
    assert likelihood(0.3 + 0.2j, 0.3 + 0.2j, ch) == pytest.approx(1 / (2 * math.pi))
    # |y - x|^2 = 2 sigma^2
    ch = ChannelSpec(0.7)
    y = 1.0 + math.sqrt(2 * 0.7) * 1j
    assert likelihood(y, 1.0, ch) == pytest.approx(likelihood(1.0, 1.0, ch) * math.exp(-1))


def test_channel_spec_rejects_nonpositive():
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(InvalidArgument):
            ChannelSpec(bad)


def test_grid_16pam_box(x16):
    g = build_grid(x16, ChannelSpec(1.0), 0.25, 10)
    assert g.box == (-25.0, 25.0, -25.0, 25.0)
    assert g.shape == (201, 201)
    assert g.weights.sum() == pytest.approx(50.0 ** 2)


def test_grid_rejects_bad_parameters(x16):
    ch = ChannelSpec(1.0)
    with pytest.raises(InvalidArgument):
        build_grid(x16, ch, 0.3, 10)
    with pytest.raises(InvalidArgument):
        build_grid(x16, ch, 0.125, 7)


def test_single_bump_integrates_to_one(x16):
    ch = ChannelSpec(1.3)
    g = build_grid(x16, ch)
    dens = likelihood(g.nodes, x16.x_ab[37], ch)
    assert abs((dens * g.weights).sum() - 1.0) < 1e-9


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.05, 4.0))
def test_any_bump_inside_extent_integrates_to_one(u, v, sigma2):
    x = build_xor_classes(make_pam(2))
    ch = ChannelSpec(sigma2)
    g = build_grid(x, ch, 0.125, 10)
    lo_re, hi_re, lo_im, hi_im = g.box
    s = math.sqrt(sigma2)
    # centre anywhere up to 2 sigma outside the constellation hull
    cr = 0.5 * (lo_re + hi_re) + u * (0.5 * (hi_re - lo_re) - 8 * s)
    ci = 0.5 * (lo_im + hi_im) + v * (0.5 * (hi_im - lo_im) - 8 * s)
    dens = likelihood(g.nodes, complex(cr, ci), ch)
    assert abs((dens * g.weights).sum() - 1.0) < 1e-9


def test_from_snr_db():
    ch = ChannelSpec.from_snr_db(10.0, power=85.0, dims=1)
    assert ch.sigma2 == pytest.approx(8.5)
    ch = ChannelSpec.from_snr_db(0.0, power=10.0, dims=2)
    assert ch.snr(10.0, 2) == pytest.approx(1.0)
