import math

import numpy as np
import pytest
from hypothesis import given, settings

from jointmeas.bloch import (
    X_HAT,
    Z_HAT,
    BlochVector,
    DensityMatrix,
    angle_between,
    born_probabilities,
    fidelity,
    rotation_from_z,
    spin_effect,
    to_density_matrix,
)
from jointmeas.errors import InvalidDirectionError, InvalidStateError

from .conftest import ball_vectors, random_rotation, unit_vectors


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (Z_HAT, Z_HAT, 0.0),
        (Z_HAT, X_HAT, math.pi / 2),
        (Z_HAT, (math.sin(math.radians(50)), 0.0, math.cos(math.radians(50))), math.radians(50)),
        (Z_HAT, -Z_HAT, math.pi),
    ],
)
def test_angle_between_examples(a, b, expected):
    assert angle_between(a, b) == pytest.approx(expected, abs=1e-12)


def test_angle_between_rejects_non_unit():
    with pytest.raises(InvalidDirectionError):
        angle_between((0, 0, 1.01), X_HAT)
    with pytest.raises(InvalidDirectionError):
        angle_between(Z_HAT, (0, 0, 0))


@settings(max_examples=200, deadline=None)
@given(unit_vectors(), unit_vectors())
def test_angle_between_symmetric_and_rotation_invariant(a, b):
    rng = np.random.default_rng(abs(hash((tuple(a), tuple(b)))) % 2**32)
    R = random_rotation(rng)
    ang = angle_between(a, b)
    assert angle_between(b, a) == pytest.approx(ang, abs=1e-9)
    assert angle_between(R @ a, R @ b) == pytest.approx(ang, abs=1e-9)


@pytest.mark.parametrize(
    "state, axis, expected",
    [
        (Z_HAT, Z_HAT, (1.0, 0.0)),
        (Z_HAT, X_HAT, (0.5, 0.5)),
        (Z_HAT, (math.sin(math.pi / 3), 0.0, math.cos(math.pi / 3)), (0.75, 0.25)),
    ],
)
def test_born_examples(state, axis, expected):
    pp, pm = born_probabilities(state, axis)
    assert (pp, pm) == pytest.approx(expected, abs=1e-12)
    assert pp + pm == 1.0


def test_born_rejects_bad_inputs():
    with pytest.raises(InvalidDirectionError):
        born_probabilities(Z_HAT, (0.5, 0, 0))
    with pytest.raises(InvalidStateError):
        born_probabilities((0, 0, 1.1), Z_HAT)


@settings(max_examples=300, deadline=None)
@given(ball_vectors(), unit_vectors())
def test_born_matches_trace_oracle(r, n):
    rho = to_density_matrix(r).matrix
    pp, pm = born_probabilities(r, n)
    assert pp == pytest.approx(np.trace(rho @ spin_effect(n, +1)).real, abs=1e-12)
    assert pm == pytest.approx(np.trace(rho @ spin_effect(n, -1)).real, abs=1e-12)


def test_density_matrix_examples():
    np.testing.assert_allclose(to_density_matrix(Z_HAT).matrix, np.diag([1, 0]), atol=1e-15)
    np.testing.assert_allclose(to_density_matrix((0, 0, 0)).matrix, 0.5 * np.eye(2), atol=1e-15)
    np.testing.assert_allclose(to_density_matrix(X_HAT).matrix, 0.5 * np.ones((2, 2)), atol=1e-15)


def test_density_matrix_rejects_outside_ball():
    with pytest.raises(InvalidStateError):
        to_density_matrix((0, 0, 1 + 1e-6))
    # within tolerance is accepted without renormalising
    rho = to_density_matrix((0, 0, 1 + 1e-10))
    assert rho.matrix[0, 0].real > 1.0
    assert np.linalg.eigvalsh(rho.matrix).min() >= -1e-9


@settings(max_examples=100, deadline=None)
@given(ball_vectors())
def test_density_matrix_invariants(r):
    rho = to_density_matrix(r)
    m = rho.matrix
    assert np.allclose(m, m.conj().T, atol=1e-12)
    assert abs(np.trace(m) - 1) < 1e-12
    assert np.linalg.eigvalsh(m).min() >= -1e-12
    np.testing.assert_allclose(rho.bloch_vector().as_array(), r, atol=1e-12)
    assert not m.flags.writeable


def test_density_matrix_validation():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.array([[1, 1], [0, 0]]))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([1.5, -0.5]))


@pytest.mark.parametrize(
    "r1, r2, expected", [(Z_HAT, Z_HAT, 1.0), (Z_HAT, -Z_HAT, 0.0), (Z_HAT, X_HAT, 0.5)]
)
def test_fidelity_examples(r1, r2, expected):
    assert fidelity(r1, r2) == pytest.approx(expected, abs=1e-15)


def test_fidelity_requires_pure():
    with pytest.raises(InvalidStateError):
        fidelity((0, 0, 0.5), Z_HAT)


@settings(max_examples=200, deadline=None)
@given(unit_vectors(), unit_vectors())
def test_fidelity_matches_eigenvector_overlap(r1, r2):
    def ket(r):
        w, v = np.linalg.eigh(to_density_matrix(r).matrix)
        return v[:, np.argmax(w)]

    overlap = abs(np.vdot(ket(r1), ket(r2))) ** 2
    assert fidelity(r1, r2) == pytest.approx(overlap, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(unit_vectors())
def test_rotation_from_z(n):
    R = rotation_from_z(n)
    np.testing.assert_allclose(R @ [0, 0, 1], n, atol=1e-12)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0)


def test_bloch_vector_helpers():
    v = BlochVector.from_angles(math.pi / 2, math.pi / 2)
    assert v.as_array() == pytest.approx([0, 1, 0], abs=1e-15)
    assert (-v).y == -1.0
    assert BlochVector.of([1, 0, 0]) == X_HAT
    with pytest.raises(ValueError):
        BlochVector.of([1, 0])
