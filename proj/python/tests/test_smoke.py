import math

import numpy as np
import pytest

import kinkflux as kf


def test_version():
    assert kf.__version__ == "0.1.0"


def test_kernel_values():
    assert kf.phi(0.0) == pytest.approx(0.3431063138, rel=1e-9)
    assert kf.green_G(0.0, 0.0, 16.0) == pytest.approx(0.3431063138 / 2.0, rel=1e-9)
    assert kf.kstar(0.7, 0.0, 5.0) == 0.0
    with pytest.raises(ValueError):
        kf.green_G(0.0, 0.0, 0.0)


def test_covariances():
    assert kf.cov_r(2.0, 1.0) == pytest.approx(math.sqrt(3.0) - 1.0)
    assert kf.h2_covariance(1.0, 1.0) == pytest.approx(0.282094792, abs=1e-9)
    assert kf.cov_y(0.0, 1.0, 0.0, 1.0) == pytest.approx(kf.y_variance_coefficient(), rel=1e-4)


def test_limit_sampler():
    times = [0.5, 1.0, 2.0]
    x = kf.sample_limit("cholesky", times, 4000, seed=3)
    assert x.shape == (4000, 3)
    emp = x.T @ x / x.shape[0]
    ref = np.array([[kf.cov_r(t, s) for s in times] for t in times])
    assert np.max(np.abs(emp - ref)) < 0.1
    y = kf.sample_limit("cholesky", times, 4000, seed=3)
    assert np.array_equal(x, y)
    with pytest.raises(ValueError):
        kf.sample_limit("nope", times, 10)
