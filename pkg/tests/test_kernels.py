import numpy as np
import pytest

from rieszlab.kernels import KernelSpec, eval_scalar, eval_vector, stable_norm


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(1, 0.5, 1)
    with pytest.raises(ValueError):
        KernelSpec(2, 0.0, 1)
    with pytest.raises(ValueError):
        KernelSpec(2, 2.0, 1)  # alpha must stay below dim
    with pytest.raises(ValueError):
        KernelSpec(2, 1.0, 3)
    with pytest.raises(ValueError):
        KernelSpec(2, 1.0, "first")
    assert KernelSpec(3, 2.5, "vector").is_vector


def test_scalar_examples():
    assert eval_scalar(KernelSpec(2, 1.0, 1), [1.0, 0.0]) == 1.0
    assert eval_scalar(KernelSpec(2, 1.0, 1), [0.0, 1.0]) == 0.0
    # 1/|x|^{3/2} with |x| = sqrt(3)
    got = eval_scalar(KernelSpec(3, 0.5, 2), [1.0, 1.0, 1.0])
    assert got == pytest.approx(3.0 ** (-0.75), rel=1e-14)


def test_vector_examples():
    np.testing.assert_allclose(eval_vector(KernelSpec(2, 1.0), [3.0, 4.0]), [0.12, 0.16])
    np.testing.assert_allclose(eval_vector(KernelSpec(2, 1.0), [-3.0, -4.0]), [-0.12, -0.16])
    np.testing.assert_allclose(eval_vector(KernelSpec(3, 2.0), [1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])


def test_singularity_is_an_error():
    with pytest.raises(ValueError):
        eval_scalar(KernelSpec(2, 1.0, 1), [0.0, 0.0])
    with pytest.raises(ValueError):
        eval_vector(KernelSpec(3, 1.5), [0.0, 0.0, 0.0])


def test_oddness_and_homogeneity():
    rng = np.random.default_rng(11)
    for dim in (2, 3, 5):
        spec = KernelSpec(dim, 0.7, dim)
        vspec = KernelSpec(dim, 0.7)
        for _ in range(200):
            x = rng.standard_normal(dim)
            lam = float(rng.uniform(0.1, 10.0))
            assert eval_scalar(spec, -x) == -eval_scalar(spec, x)
            np.testing.assert_allclose(eval_vector(vspec, -x), -eval_vector(vspec, x))
            assert eval_scalar(spec, lam * x) == pytest.approx(
                lam ** (-0.7) * eval_scalar(spec, x), rel=1e-12)


def test_component_consistency_bitwise():
    rng = np.random.default_rng(5)
    for dim in (2, 4):
        vspec = KernelSpec(dim, 1.0)
        for _ in range(50):
            x = rng.standard_normal(dim)
            v = eval_vector(vspec, x)
            for i in range(1, dim + 1):
                assert v[i - 1] == eval_scalar(KernelSpec(dim, 1.0, i), x)


def test_extreme_scales_do_not_overflow():
    # naive sum-of-squares would overflow at 1e200
    assert stable_norm(np.array([3e200, 4e200])) == pytest.approx(5e200)
    spec = KernelSpec(2, 1.0, 1)
    assert eval_scalar(spec, [1e200, 0.0]) == pytest.approx(1e-200)
    assert np.isfinite(eval_scalar(spec, [1e-200, 0.0]))
