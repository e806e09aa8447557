import math

import numpy as np
import pytest
from scipy import stats

from cvde import (Box, DataError, DirectionSet, KernelSpec, build_generator_table, fit, init_chains,
                  nearest_generator, sample, sample_direction_set, step)


def pair_model(kernel=None, s=2000):
    t = build_generator_table([[-1, 0], [1, 0]])
    k = kernel or KernelSpec.gaussian(0.7, 2)
    d = sample_direction_set(s, 2, 0)
    return fit(t, k, d), d


def test_init_home_split():
    m, _ = pair_model()
    ch = init_chains(m, 100000, 1)
    assert abs(np.mean(ch.home == 0) - 0.5) < 0.01


def test_init_single_chain_at_generator():
    m, _ = pair_model()
    ch = init_chains(m, 1, 2)
    assert np.array_equal(ch.z[0], m.table.points[ch.home[0]])
    assert np.array_equal(ch.z_gram[0], m.table.gram[ch.home[0]])


def test_init_deterministic():
    m, _ = pair_model()
    a, b = init_chains(m, 50, 3), init_chains(m, 50, 3)
    assert np.array_equal(a.home, b.home) and np.array_equal(a.z, b.z)


def test_init_skips_zero_mass_cells():
    t = build_generator_table([[0, 0], [10, 0]])
    m = fit(t, KernelSpec.box_indicator(Box.cube(-1, 1, 2)), sample_direction_set(500, 2, 0))
    assert np.all(init_chains(m, 200, 0).home == 0)


def test_init_rejects_unbounded_vde():
    t = build_generator_table([[0, 0], [1, 0]])
    k = KernelSpec.box_indicator(Box([-np.inf, -np.inf], [np.inf, np.inf]))
    from cvde import DensityModel
    m = DensityModel(t, k, np.zeros(2), None)
    with pytest.raises(DataError):
        init_chains(m, 5, 0)


def test_left_cell_containment():
    m, d = pair_model()
    ch = init_chains(m, 200, 4)
    left = ch.home == 0
    for _ in range(200):
        step(ch, m, d)
        assert np.all(ch.z[left, 0] < 0)
        assert np.all(ch.z[~left, 0] > 0)


def test_containment_many_cells(rng):
    t = build_generator_table(rng.normal(size=(40, 4)))
    k = KernelSpec.gaussian(1.0, 4)
    d = sample_direction_set(500, 4, 1)
    m = fit(t, k, d)
    ch = init_chains(m, 300, 5)
    for _ in range(100):
        step(ch, m, d)
        assert np.array_equal(nearest_generator(ch.z, t), ch.home)
    drift = np.abs(ch.z_gram - ch.z @ t.points.T).max()
    assert drift < 1e-9


def test_zero_steps_returns_generators():
    m, d = pair_model()
    z = sample(m, d, 30, 0, seed=6)
    assert all(any(np.array_equal(r, p) for p in m.table.points) for r in z)


def test_cell_choice_fraction():
    m, d = pair_model()
    z = sample(m, d, 10000, 1000, seed=7)
    assert abs(np.mean(z[:, 0] < 0) - 0.5) < 0.02


def test_single_cell_marginals_normal():
    p = np.array([0.3, -0.2])
    t = build_generator_table(p[None])
    h = 0.7
    d = sample_direction_set(2000, 2, 3)
    m = fit(t, KernelSpec.gaussian(h, 2), d)
    z = sample(m, d, 5000, 300, seed=8)
    for j in range(2):
        assert stats.kstest((z[:, j] - p[j]) / h, "norm").pvalue > 0.01


def test_non_spanning_directions_rejected():
    m, _ = pair_model()
    with pytest.raises(DataError):
        sample(m, DirectionSet([[1.0, 0.0]]), 5, 5, seed=0)


def test_sample_deterministic():
    m, d = pair_model()
    assert np.array_equal(sample(m, d, 64, 50, seed=9), sample(m, d, 64, 50, seed=9))


def test_fresh_directions():
    m, d = pair_model()
    z = sample(m, None, 2000, 200, seed=10, fresh=True)
    assert abs(np.mean(z[:, 0] < 0) - 0.5) < 0.05
    assert np.all(np.sign(z[:, 0]) != 0)


def test_box_vde_samples_stay_in_box():
    t = build_generator_table([[-0.5, 0.2], [0.5, -0.1], [0.0, 0.7]])
    box = Box.cube(-1, 1, 2)
    d = sample_direction_set(1000, 2, 0)
    m = fit(t, KernelSpec.box_indicator(box), d)
    z = sample(m, d, 3000, 100, seed=11)
    assert np.all(box.contains(z))
    vols = np.exp(m.log_vols)
    # VDE is uniform on the box: each cell holds 1/m of the samples
    own = nearest_generator(z, t)
    assert np.bincount(own, minlength=3) / 3000 == pytest.approx([1 / 3] * 3, abs=0.03)
    assert vols.sum() == pytest.approx(4.0, rel=0.02)


def test_generator_outside_box_chain_starts_inside():
    t = build_generator_table([[0, 0], [1.8, 0]])
    box = Box.cube(-1, 1, 2)
    d = sample_direction_set(1000, 2, 0)
    m = fit(t, KernelSpec.box_indicator(box), d)
    ch = init_chains(m, 400, 3, d)
    out = ch.home == 1
    assert out.any()
    assert np.all(box.contains(ch.z))
    assert np.array_equal(nearest_generator(ch.z, t), ch.home)
    for _ in range(50):
        step(ch, m, d)
    assert np.all(box.contains(ch.z))
    assert np.all(ch.z[out, 0] > 0.9)


def test_uniform_ball_kernel_samples_in_ball():
    t = build_generator_table([[0, 0], [1.5, 0]])
    k = KernelSpec.uniform_ball(1.0, 2)
    d = sample_direction_set(1000, 2, 0)
    m = fit(t, k, d)
    z = sample(m, d, 1000, 100, seed=12)
    own = nearest_generator(z, t)
    assert np.all(np.linalg.norm(z - t.points[own], axis=1) <= 1.0 + 1e-12)
