import math

import numpy as np
import pytest
from scipy import special

from cvde import Box, DataError, KernelSpec, kernel_eval, log_radial_mass, reg_lower_incomplete_gamma
from cvde import sample_line_truncated
from cvde.kernels import log_radial_mass_interval


def test_kernel_eval_examples():
    g = KernelSpec.gaussian(1.0, 2)
    assert kernel_eval(g, [0.3, 0.1], [0.3, 0.1]) == 1.0
    assert kernel_eval(g, [0, 0], [1, 0]) == pytest.approx(math.exp(-0.5), abs=1e-12)
    b = KernelSpec.box_indicator(Box.cube(-3.5, 3.5, 2))
    assert kernel_eval(b, [0, 0], [4, 0]) == 0.0
    assert kernel_eval(b, [0, 0], [3, 0]) == 1.0


def test_kernel_spec_validation():
    with pytest.raises(DataError):
        KernelSpec.gaussian(0.0, 2)
    with pytest.raises(DataError):
        KernelSpec.uniform_ball(-1.0, 2)


def test_kernel_idents():
    box = Box.cube(-1, 1, 2)
    assert KernelSpec.gaussian(1, 2).ident == "gaussian"
    assert KernelSpec.gaussian(1, 2, box).ident == "gaussian-box"
    assert KernelSpec.box_indicator(box).ident == "vde-box"
    assert not KernelSpec.box_indicator(Box([-np.inf] * 2, [np.inf] * 2)).compact


def test_log_radial_mass_examples():
    g = KernelSpec.gaussian(1.0, 2)
    assert log_radial_mass(g, np.inf) == pytest.approx(0.0, abs=1e-14)
    assert log_radial_mass(g, math.sqrt(2 * math.log(2))) == pytest.approx(-math.log(2), abs=1e-13)
    u = KernelSpec.uniform_ball(2.0, 3)
    assert log_radial_mass(u, 1.0) == pytest.approx(math.log(1 / 3), abs=1e-14)
    assert log_radial_mass(u, 5.0) == pytest.approx(math.log(8 / 3), abs=1e-14)
    assert log_radial_mass(g, 0.0) == -math.inf


def test_log_radial_mass_interval():
    g = KernelSpec.gaussian(0.7, 3)
    a, b = 0.4, 1.9
    want = math.log(math.exp(log_radial_mass(g, b)) - math.exp(log_radial_mass(g, a)))
    assert float(log_radial_mass_interval(g, a, b)) == pytest.approx(want, rel=1e-12)
    assert float(log_radial_mass_interval(g, 1.0, 1.0)) == -math.inf
    assert float(log_radial_mass_interval(g, 0.0, 2.0)) == pytest.approx(log_radial_mass(g, 2.0))


def test_gamma_examples():
    assert reg_lower_incomplete_gamma(1.0, math.log(2)) == pytest.approx(0.5, abs=1e-15)
    assert reg_lower_incomplete_gamma(0.5, 1.0) == pytest.approx(math.erf(1.0), abs=1e-14)
    for a in (0.5, 1.0, 7.5):
        assert reg_lower_incomplete_gamma(a, 0.0) == 0.0
        assert reg_lower_incomplete_gamma(a, np.inf) == 1.0


def test_gamma_errors():
    with pytest.raises(DataError):
        reg_lower_incomplete_gamma(0.0, 1.0)
    with pytest.raises(DataError):
        reg_lower_incomplete_gamma(1.0, -1.0)


def test_gamma_against_scipy():
    a = np.array([0.5, 1, 2.5, 5, 10.5, 50])
    z = np.geomspace(1e-6, 200, 300)
    got = reg_lower_incomplete_gamma_grid(a, z)
    want = special.gammainc(a[:, None], z[None, :])
    assert np.max(np.abs(got - want)) <= 1e-12


def reg_lower_incomplete_gamma_grid(a, z):
    return np.array([reg_lower_incomplete_gamma(float(ai), z) for ai in a])


def test_gamma_monotone():
    z = np.linspace(0, 30, 2001)
    v = reg_lower_incomplete_gamma(5.0, z)
    assert np.all(np.diff(v) >= 0)


def test_truncated_untruncated_mean(rng):
    g = KernelSpec.gaussian(1.0, 1)
    draws = np.array([sample_line_truncated(g, 0.0, -np.inf, np.inf, rng) for _ in range(20000)])
    assert abs(draws.mean()) < 0.03


def test_truncated_half_normal_mean():
    from cvde.accel import backend
    rng = np.random.default_rng(5)
    u = rng.random(100000) + 2.0 ** -54
    t = backend.truncnorm(np.zeros_like(u), 1.0, np.zeros_like(u), np.full_like(u, np.inf), u)
    assert t.mean() == pytest.approx(math.sqrt(2 / math.pi), abs=0.01)
    assert t.min() >= 0


def test_truncated_narrow_interval(rng):
    g = KernelSpec.gaussian(1.0, 1)
    lo, hi = 0.3, 0.3 + 1e-12
    for mu in (0.0, 40.0, -40.0):
        t = sample_line_truncated(g, mu, lo, hi, rng)
        assert lo <= t <= hi


def test_truncated_far_tail(rng):
    g = KernelSpec.gaussian(0.1, 1)
    t = np.array([sample_line_truncated(g, 0.0, 5.0, 6.0, rng) for _ in range(2000)])
    assert np.all((t >= 5.0) & (t <= 6.0))
    # N(0, 0.1^2) given t > 5 sits just above 5, mean ~ 5 + h^2/5
    assert t.mean() == pytest.approx(5.002, abs=5e-4)


def test_uniform_line_draw(rng):
    u = KernelSpec.uniform_ball(1.0, 2)
    t = np.array([sample_line_truncated(u, 0.5, -2.0, 1.0, rng, half_chord=0.8) for _ in range(4000)])
    assert t.min() >= -0.3 and t.max() <= 1.0
    assert t.mean() == pytest.approx(0.35, abs=0.02)
    with pytest.raises(DataError):
        sample_line_truncated(u, 0.0, -np.inf, np.inf, rng)
    with pytest.raises(DataError):
        sample_line_truncated(u, 0.0, 1.0, 0.0, rng)
