"""Grover oracles, diffusion and the closed-form Grover rotation.

The step kernels work on flat amplitude arrays in O(N) (diffusion) and
O(K) (oracle) time, so evolution never materializes an N x N matrix.
Dense matrices are available separately for verification at small N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .statevec import StateVector


@dataclass(frozen=True)
class GroverParams:
    """Rotation geometry of a K-out-of-N search.

    ``omega`` is the rotation angle per step, with cos(omega) = 1 - 2K/N,
    and ``m0`` the (real) number of steps at which (2*m0 + 1)*omega = pi.
    """

    N: int
    K: int
    omega: float
    m0: float

    @property
    def half_turn(self) -> float:
        """Step count m0 + 1/2, where m*omega reaches pi/2."""
        return self.m0 + 0.5


@dataclass(frozen=True)
class MarkedSet:
    """Sorted marked basis indices. An empty set makes the oracle the identity."""

    dim: int
    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("marked indices must be strictly increasing")
        if idx and (idx[0] < 0 or idx[-1] >= self.dim):
            raise ValueError(f"marked index out of range for dim {self.dim}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, dim: int, indices: Sequence[int]) -> "MarkedSet":
        """Build from indices in any order; duplicates are dropped."""
        return cls(dim, tuple(sorted(set(int(i) for i in indices))))

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        return i in self.indices

    def mask(self) -> np.ndarray:
        m = np.zeros(self.dim, dtype=bool)
        m[list(self.indices)] = True
        return m


def params(N: int, K: int = 1) -> GroverParams:
    if N < 2:
        raise ValueError(f"need N >= 2, got {N}")
    if not 1 <= K < N:
        raise ValueError(f"need 1 <= K < N, got K={K}, N={N}")
    omega = math.acos(1.0 - 2.0 * K / N)
    return GroverParams(N, K, omega, math.pi / (2.0 * omega) - 0.5)


def optimal_steps(p: GroverParams) -> int:
    """Nearest integer to m0, ties toward the smaller."""
    return max(0, math.ceil(p.m0 - 0.5))


def _check_dim(marked: MarkedSet, s: StateVector):
    if marked.dim != s.dim:
        raise ValueError(f"dimension mismatch: marked set over {marked.dim}, state {s.dim}")


def _oracle_inplace(a: np.ndarray, idx) -> None:
    a[idx] *= -1


def _diffusion_inplace(a: np.ndarray) -> None:
    # 2|y><y| - I  ==  a -> 2*mean(a) - a
    np.subtract(2.0 * a.mean(), a, out=a)


def oracle_apply(marked: MarkedSet, s: StateVector) -> StateVector:
    """Phase oracle I - 2 sum_x |x><x| over the marked indices."""
    _check_dim(marked, s)
    a = s.amps.copy()
    _oracle_inplace(a, list(marked.indices))
    return StateVector(a)


def standard_oracle_apply(marked: MarkedSet, joint: StateVector) -> StateVector:
    """Bit-flip oracle |y>|k> -> |y>|k xor f(y)>, ancilla least significant."""
    if joint.dim % 2 or joint.dim != 2 * marked.dim:
        raise ValueError(f"joint state of dim {joint.dim} does not match register dim {marked.dim} x 2")
    a = joint.amps.copy().reshape(marked.dim, 2)
    idx = list(marked.indices)
    a[idx] = a[idx, ::-1]
    return StateVector(a.ravel())


def minus_state() -> StateVector:
    return StateVector(np.array([1.0, -1.0]) / math.sqrt(2.0))


def diffusion_apply(s: StateVector) -> StateVector:
    """Inversion about the average amplitude."""
    a = s.amps.copy()
    _diffusion_inplace(a)
    return StateVector(a)


def step_apply(marked: MarkedSet, s: StateVector) -> StateVector:
    """One Grover step: oracle, then diffusion."""
    return diffusion_apply(oracle_apply(marked, s))


def evolve(marked: MarkedSet, m_max: int) -> Iterator[StateVector]:
    """Yield the iterated states for m = 0, 1, ..., m_max from the uniform state."""
    a = np.full(marked.dim, 1.0 / math.sqrt(marked.dim), dtype=complex)
    idx = np.array(marked.indices)
    yield StateVector(a)
    for _ in range(m_max):
        _oracle_inplace(a, idx)
        _diffusion_inplace(a)
        yield StateVector(a)


def run(p: GroverParams, marked: MarkedSet, m: int) -> StateVector:
    """Apply ``m`` Grover steps to the uniform state by gate iteration."""
    if int(m) != m or m < 0:
        raise ValueError(f"gate iteration needs a nonnegative integer step count, got {m}")
    if marked.dim != p.N or len(marked) != p.K:
        raise ValueError("marked set does not match the Grover parameters")
    a = np.full(p.N, 1.0 / math.sqrt(p.N), dtype=complex)
    idx = np.array(marked.indices)
    for _ in range(int(m)):
        _oracle_inplace(a, idx)
        _diffusion_inplace(a)
    return StateVector(a)


def _rotation(p: GroverParams, m: float) -> tuple[float, float]:
    theta = (2.0 * m + 1.0) * p.omega / 2.0
    return math.sin(theta), math.cos(theta)


def grover_state(p: GroverParams, marked: MarkedSet, m: float) -> StateVector:
    """Closed-form state after ``m`` (possibly fractional) steps."""
    if marked.dim != p.N or len(marked) != p.K:
        raise ValueError("marked set does not match the Grover parameters")
    s, c = _rotation(p, m)
    a = np.full(p.N, c / math.sqrt(p.N - p.K), dtype=complex)
    a[list(marked.indices)] = s / math.sqrt(p.K)
    return StateVector(a)


def success_prob(p: GroverParams, m: float) -> float:
    return _rotation(p, m)[0] ** 2


def marked_probability(marked: MarkedSet, s: StateVector) -> float:
    """Squared norm of the projection of ``s`` onto the marked subspace."""
    _check_dim(marked, s)
    return float(np.sum(np.abs(s.amps[list(marked.indices)]) ** 2))


# Dense reference matrices, for verification at small N.

def oracle_matrix(marked: MarkedSet) -> np.ndarray:
    return np.diag(np.where(marked.mask(), -1.0, 1.0))


def diffusion_matrix(N: int) -> np.ndarray:
    return np.full((N, N), 2.0 / N) - np.eye(N)


def step_matrix(marked: MarkedSet) -> np.ndarray:
    return diffusion_matrix(marked.dim) @ oracle_matrix(marked)


def standard_oracle_matrix(marked: MarkedSet) -> np.ndarray:
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    blocks = [flip if y in marked else np.eye(2) for y in range(marked.dim)]
    out = np.zeros((2 * marked.dim, 2 * marked.dim))
    for y, b in enumerate(blocks):
        out[2 * y:2 * y + 2, 2 * y:2 * y + 2] = b
    return out
