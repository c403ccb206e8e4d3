import math

import numpy as np
import pytest

from horolab import algebra
from horolab.errors import InvalidDimensionError


def test_diagonal_flow_identity_at_zero():
    assert np.allclose(algebra.diagonal_flow(0.0, 3), np.eye(3))


def test_diagonal_flow_substitution():
    assert np.allclose(np.diag(algebra.diagonal_flow(math.log(2), 2)), [0.5, 2.0])
    assert np.allclose(np.diag(algebra.diagonal_flow(math.log(2), 3)), [0.5, 0.5, 4.0])


def test_diagonal_flow_rejects_low_dimension():
    with pytest.raises(InvalidDimensionError):
        algebra.diagonal_flow(1.0, 1)


def test_flow_group_law_and_determinant(rng):
    for _ in range(100):
        d = int(rng.integers(2, 6))
        t, s = rng.normal(size=2)
        lhs = algebra.diagonal_flow(t, d) @ algebra.diagonal_flow(s, d)
        rhs = algebra.diagonal_flow(t + s, d)
        assert algebra.mat_close(lhs, rhs, tol=1e-12)
        assert abs(np.linalg.det(algebra.diagonal_flow(t, d)) - 1.0) <= 1e-12 * math.exp(2 * abs(t) * d)


def test_unipotent_shapes():
    assert np.allclose(algebra.unipotent_stable([0.0]), np.eye(2))
    assert np.allclose(algebra.unipotent_unstable([3.0]), [[1, 3], [0, 1]])
    n = algebra.unipotent_stable([1.0, 2.0])
    assert np.allclose(n[2, :2], [1, 2]) and np.allclose(np.diag(n), 1)


def test_unipotent_abelian_law(rng):
    x, y = np.array([1.0, 2.0]), np.array([-1.0, 5.0])
    assert np.allclose(
        algebra.unipotent_stable(x) @ algebra.unipotent_stable(y), algebra.unipotent_stable(x + y)
    )
    for _ in range(20):
        a, b = rng.normal(size=(2, 3))
        assert algebra.mat_close(
            algebra.unipotent_unstable(a) @ algebra.unipotent_unstable(b),
            algebra.unipotent_unstable(a + b),
            tol=1e-13,
        )


def test_conjugate_flow_identity_trivial():
    lhs, rhs = algebra.conjugate_flow_identity(1.0, 1.0, [1.0])
    assert np.allclose(lhs, rhs)
    assert np.allclose(lhs, algebra.unipotent_stable([1.0]))


def test_conjugate_flow_identity_explicit():
    # multiply out the right side by hand as the oracle
    for T, T0, xt in ((4.0, 1.0, [1.0]), (9.0, 3.0, [1.0, 1.0])):
        lhs, rhs = algebra.conjugate_flow_identity(T, T0, xt)
        d = len(xt) + 1
        r = math.log(T / T0) / d
        phi = np.diag([math.exp(-r)] * (d - 1) + [math.exp((d - 1) * r)])
        inner = np.eye(d)
        inner[d - 1, : d - 1] = np.asarray(xt) * (T0 / T)
        manual = phi @ inner @ np.linalg.inv(phi)
        assert np.abs(lhs - rhs).max() <= 1e-12
        assert np.abs(rhs - manual).max() <= 1e-12


def test_conjugate_flow_random_scaling(rng):
    # stable conjugation relation over random (t, xt)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        t = rng.uniform(-1.5, 1.5)
        xt = rng.normal(size=d - 1)
        lhs = algebra.diagonal_flow(-t, d) @ algebra.unipotent_stable(xt) @ algebra.diagonal_flow(t, d)
        rhs = algebra.unipotent_stable(math.exp(-d * t) * xt)
        assert algebra.mat_close(lhs, rhs, tol=1e-11)


def test_conjugate_flow_rejects_nonpositive():
    with pytest.raises(ValueError):
        algebra.conjugate_flow_identity(-1.0, 1.0, [0.0])


def test_zeta_analytic_values():
    assert abs(algebra.zeta(2) - math.pi**2 / 6) <= 1e-12
    assert abs(algebra.zeta(4) - math.pi**4 / 90) <= 1e-12


def test_zeta_partial_sum_bracket():
    # brute-force oracle: compensated partial sum plus proven integral tail
    # bracket (the bracket itself is ~n^-3 wide, so allow float headroom)
    n = 1_000_000
    s = math.fsum(k ** (-3.0) for k in range(1, n + 1))
    lo = s + (n + 1) ** (-2.0) / 2.0
    hi = s + n ** (-2.0) / 2.0
    assert lo - 1e-13 <= algebra.zeta(3) <= hi + 1e-13
    assert abs(algebra.zeta(3) - 1.2020569032) <= 1e-9


def test_zeta_rejects_low():
    with pytest.raises(InvalidDimensionError):
        algebra.zeta(1)


def test_constants():
    c2 = algebra.Constants.for_dim(2)
    assert c2.h0 == 1.0 and c2.cd_lower == 1.0 and c2.zeta_d > 1
    c3 = algebra.Constants.for_dim(3)
    assert abs(c3.h0 - math.sqrt(3) * (4 / 3)) <= 1e-12
    assert abs(c3.cd_lower - (3 / 4) / math.sqrt(3)) <= 1e-12


def test_swap_element_examples():
    assert np.array_equal(algebra.swap_element(3, 3), np.eye(3, dtype=np.int64))
    s12 = algebra.swap_element(1, 2)
    assert np.array_equal(s12, [[0, 1], [-1, 0]])
    assert algebra.integer_det(s12) == 1
    s23 = algebra.swap_element(2, 3)
    assert algebra.integer_det(s23) == 1
    m = np.arange(9).reshape(3, 3)
    sm = algebra.swap_element(2, 3) @ m
    assert np.array_equal(sm[1], m[2]) and np.array_equal(sm[2], -m[1])


def test_swap_element_range():
    with pytest.raises(IndexError):
        algebra.swap_element(0, 3)


def test_integer_det_exact(rng):
    for _ in range(30):
        m = rng.integers(-9, 10, size=(4, 4))
        assert algebra.integer_det(m) == round(float(np.linalg.det(m.astype(float))))


def test_fraction_matrix_paths():
    m = algebra.as_fraction_matrix([[1, "1/2"], [0, 1]])
    inv = algebra.fraction_matrix_inverse(m)
    prod = m @ inv
    assert prod[0, 0] == 1 and prod[0, 1] == 0 and prod[1, 1] == 1
    with pytest.raises(TypeError):
        algebra.as_fraction_matrix([[1.5, 0], [0, 1]])
