"""Bloch-vector algebra, Born-rule probabilities and a 2x2 matrix oracle.

Vector-form formulas are used everywhere on the hot path. The matrix
representation (``to_density_matrix``, ``spin_effect``) exists so that those
formulas can be cross-checked against plain linear algebra.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDirectionError, InvalidStateError

UNIT_TOL = 1e-9
MATRIX_TOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


@dataclass(frozen=True)
class BlochVector:
    """Real 3-vector: a spin direction or a qubit state."""

    x: float
    y: float
    z: float

    @classmethod
    def of(cls, v):
        """Coerce a BlochVector or any length-3 sequence."""
        if isinstance(v, cls):
            return v
        arr = np.asarray(v, dtype=float).reshape(-1)
        if arr.shape != (3,):
            raise ValueError(f"expected 3 components, got shape {arr.shape}")
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    @classmethod
    def from_angles(cls, polar, azimuth=0.0):
        """Unit vector with polar angle from +z and azimuth from +x (radians)."""
        s = np.sin(polar)
        return cls(float(s * np.cos(azimuth)), float(s * np.sin(azimuth)), float(np.cos(polar)))

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)

    def norm(self):
        return float(np.linalg.norm(self.as_array()))

    def dot(self, other):
        return float(np.dot(self.as_array(), BlochVector.of(other).as_array()))

    def __neg__(self):
        return BlochVector(-self.x, -self.y, -self.z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))


X_HAT = BlochVector(1.0, 0.0, 0.0)
Y_HAT = BlochVector(0.0, 1.0, 0.0)
Z_HAT = BlochVector(0.0, 0.0, 1.0)


def _array(v):
    if isinstance(v, BlochVector):
        return v.as_array()
    return BlochVector.of(v).as_array()


def require_unit(v, name="vector", tol=UNIT_TOL):
    """Return ``v`` as an array, raising if it is not unit-norm."""
    arr = _array(v)
    n = np.linalg.norm(arr)
    if not abs(n - 1.0) <= tol:
        raise InvalidDirectionError(f"{name} must be unit-norm, |{name}| = {n!r}")
    return arr


def require_state(v, name="state", pure=False, tol=UNIT_TOL):
    """Return ``v`` as an array, raising if it is not a valid (pure) state."""
    arr = _array(v)
    n = np.linalg.norm(arr)
    if n > 1.0 + tol:
        raise InvalidStateError(f"{name} lies outside the Bloch ball, |{name}| = {n!r}")
    if pure and abs(n - 1.0) > tol:
        raise InvalidStateError(f"{name} must be pure, |{name}| = {n!r}")
    return arr


def angle_between(a, b):
    """Angle (radians, in [0, pi]) between two unit Bloch vectors.

    This is the angle 2*theta between the observables; theta is the angle
    between the corresponding state vectors in Hilbert space.
    """
    u = require_unit(a, "a")
    v = require_unit(b, "b")
    # atan2 keeps full precision near 0 and pi where arccos does not
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))


def born_probabilities(state, axis):
    """Probabilities of the +1 and -1 outcomes of a projective measurement along ``axis``."""
    n = require_unit(axis, "axis")
    r = require_state(state)
    p_plus = 0.5 * (1.0 + float(np.dot(n, r)))
    return p_plus, 1.0 - p_plus


def pauli_dot(v):
    """The 2x2 matrix v . sigma."""
    return np.tensordot(_array(v), PAULI, axes=1)


def spin_effect(axis, sign=1, sharpness=1.0):
    """Matrix of the effect (1 + sign * sharpness * axis . sigma) / 2."""
    return 0.5 * (IDENTITY + sign * sharpness * pauli_dot(axis))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A 2x2 qubit density matrix; validated and read-only.

    ``eig_tol`` bounds how negative an eigenvalue may be; ``to_density_matrix``
    widens it to the state-norm tolerance so that states accepted there build.
    """

    matrix: np.ndarray
    eig_tol: float = MATRIX_TOL

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidStateError(f"density matrix must be 2x2, got {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0, atol=MATRIX_TOL):
            raise InvalidStateError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > MATRIX_TOL:
            raise InvalidStateError(f"density matrix trace is {np.trace(m)!r}")
        if np.linalg.eigvalsh(m).min() < -self.eig_tol:
            raise InvalidStateError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def expectation(self, operator):
        return complex(np.trace(self.matrix @ operator))

    def bloch_vector(self):
        return BlochVector.of([self.expectation(s).real for s in PAULI])


def to_density_matrix(r):
    """rho = (1 + r . sigma) / 2."""
    arr = require_state(r)
    return DensityMatrix(0.5 * (IDENTITY + pauli_dot(arr)), eig_tol=max(MATRIX_TOL, UNIT_TOL))


def fidelity(r1, r2):
    """Fidelity of two pure states given by their Bloch vectors."""
    u = require_state(r1, "r1", pure=True)
    v = require_state(r2, "r2", pure=True)
    return float(min(1.0, max(0.0, 0.5 * (1.0 + np.dot(u, v)))))


def rotation_from_z(axis):
    """Rotation matrix taking +z onto the unit vector ``axis``."""
    n = require_unit(axis, "axis")
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, n))
    k = np.cross(z, n)
    s = np.linalg.norm(k)
    if s < 1e-15:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    k = k / s
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * K + (1 - c) * (K @ K)
