"""Dense state vectors, Hermitian operators and measurement sampling.

Everything here is a thin layer over numpy arrays. Values are immutable:
the underlying arrays are flagged read-only at construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12
STATE_TOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex amplitude vector over a computational basis."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a nonempty 1-d sequence")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        object.__setattr__(self, "amps", _frozen(amps))

    @classmethod
    def raw(cls, amps) -> "StateVector":
        """Wrap ``amps`` without the normalization check."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "amps", _frozen(np.array(amps, dtype=complex)))
        return obj

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for dim {dim}")
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def uniform(cls, dim: int) -> "StateVector":
        return cls(np.full(dim, 1.0 / np.sqrt(dim), dtype=complex))

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def tensor(self, other: "StateVector") -> "StateVector":
        """Kronecker product, ``self`` as the more significant factor."""
        return StateVector.raw(np.kron(self.amps, other.amps))

    def allclose(self, other: "StateVector", tol: float = STATE_TOL) -> bool:
        # Componentwise comparison, no global phase quotient.
        if self.dim != other.dim:
            return False
        return bool(np.max(np.abs(self.amps - other.amps)) <= tol)

    def __repr__(self):
        return f"StateVector(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be a square matrix")
        dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if dev > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(m)))):
            raise ValueError(f"operator is not Hermitian (deviation {dev:.3g})")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class Povm:
    """Measurement whose effects sum to the projector ``support``.

    ``support`` defaults to the identity. Sub-normalized measurements, such
    as the square-root measurement of a rank-deficient ensemble, complete
    to the identity only on the span of the ensemble.

    Rank-one measurements are best built with :meth:`rank_one`, which keeps
    only the effect vectors; dense effect matrices are then produced on
    demand by :attr:`effects`.
    """

    def __init__(self, effects, support=None, *, _vectors=None):
        if _vectors is None:
            effects = tuple(
                e if isinstance(e, HermitianOperator) else HermitianOperator(e)
                for e in effects
            )
            if not effects:
                raise ValueError("a POVM needs at least one effect")
            dim = effects[0].dim
            if any(e.dim != dim for e in effects):
                raise ValueError("POVM effects have mismatched dimensions")
            for k, e in enumerate(effects):
                lo = e.eigvalsh()[0]
                if lo < -1e-10:
                    raise ValueError(f"effect {k} is not positive semidefinite (min eigenvalue {lo:.3g})")
            total = sum(e.entries for e in effects)
        else:
            # |v><v| is PSD by construction
            dim = _vectors.shape[1]
            total = _vectors.T @ _vectors.conj()
        support = np.eye(dim) if support is None else np.array(support, dtype=complex)
        dev = np.max(np.abs(total - support))
        if dev > 1e-10:
            raise ValueError(f"effects do not sum to the support projector (deviation {dev:.3g})")
        self._effects = effects
        self._vectors = _vectors
        self.support = _frozen(support)
        self.dim = dim

    @classmethod
    def rank_one(cls, vectors, support=None) -> "Povm":
        """POVM with effects ``|v_k><v_k|`` for the rows ``v_k`` of ``vectors``."""
        v = np.array(vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("vectors must be a nonempty 2-d array")
        return cls(None, support, _vectors=_frozen(v))

    @property
    def effects(self) -> tuple:
        if self._effects is None:
            return tuple(HermitianOperator(np.outer(v, v.conj())) for v in self._vectors)
        return self._effects

    @property
    def vectors(self):
        return self._vectors

    def __len__(self):
        return len(self._vectors) if self._vectors is not None else len(self._effects)

    def probabilities(self, s: StateVector) -> np.ndarray:
        if self._vectors is not None:
            return np.abs(self._vectors.conj() @ s.amps) ** 2
        return np.array([inner(s, apply(e, s)).real for e in self._effects])

    def __repr__(self):
        return f"Povm(outcomes={len(self)}, dim={self.dim})"


Operator = Union[HermitianOperator, np.ndarray]


def _matrix(op: Operator) -> np.ndarray:
    return op.entries if isinstance(op, HermitianOperator) else np.asarray(op)


def inner(a: StateVector, b: StateVector) -> complex:
    """Return <a|b>, conjugate-linear in ``a``."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def apply(op: Operator, s: StateVector) -> StateVector:
    """Matrix-vector product. The result is only renormalization-checked
    by callers that know ``op`` is unitary."""
    m = _matrix(op)
    if m.shape != (s.dim, s.dim):
        raise ValueError(f"dimension mismatch: operator {m.shape} vs state {s.dim}")
    return StateVector.raw(m @ s.amps)


def is_unitary(op: Operator, tol: float = 1e-10) -> bool:
    m = _matrix(op)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def projector(s: StateVector) -> HermitianOperator:
    return HermitianOperator(np.outer(s.amps, s.amps.conj()))


def _inv_sqrt_and_support(op: HermitianOperator, rel_cutoff: float):
    m = op.entries
    # Real symmetric input takes the cheaper real eigensolver.
    if not np.any(m.imag):
        m = m.real
    vals, vecs = np.linalg.eigh(m)
    top = vals[-1]
    if top <= 0:
        raise ValueError("operator has no positive eigenvalue")
    if vals[0] < -1e-8 * top:
        raise ValueError(f"operator is not positive semidefinite (eigenvalue {vals[0]:.3g})")
    keep = vals > rel_cutoff * top
    kept = vecs[:, keep]
    inv_sqrt = (kept * vals[keep] ** -0.5) @ kept.conj().T
    support = kept @ kept.conj().T
    return (
        HermitianOperator((inv_sqrt + inv_sqrt.conj().T) / 2),
        (support + support.conj().T) / 2,
    )


def inv_sqrt_on_support(op: HermitianOperator, rel_cutoff: float = 1e-12) -> HermitianOperator:
    """Moore-Penrose inverse square root of a PSD operator.

    Eigenvalues at or below ``rel_cutoff * max_eigenvalue`` are treated as
    zero, so ``M @ op @ M`` is the projector onto the retained eigenspace.
    """
    return _inv_sqrt_and_support(op, rel_cutoff)[0]


def support_projector(op: HermitianOperator, rel_cutoff: float = 1e-12) -> np.ndarray:
    """Projector onto the eigenspace kept by :func:`inv_sqrt_on_support`."""
    return _inv_sqrt_and_support(op, rel_cutoff)[1]


def inv_sqrt_expectation(matvec, v: np.ndarray, rel_cutoff: float = 1e-12) -> complex:
    """<v| A^-1/2 |v> for a PSD operator A given only through ``matvec``.

    Lanczos with full reorthogonalization builds the Krylov space of ``v``
    until it closes (or spans the whole space); the inverse square root is
    then taken on the projected tridiagonal matrix with
    :func:`inv_sqrt_on_support`. Exact up to rounding once the space is
    invariant, which for an operator with d distinct eigenvalues happens
    after at most d steps.
    """
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        return 0j
    basis = [v / norm]
    alphas, betas = [], []
    scale = 0.0
    for _ in range(v.size):
        w = np.asarray(matvec(basis[-1]), dtype=complex)
        alpha = np.vdot(basis[-1], w).real
        alphas.append(alpha)
        q = np.array(basis).T
        for _ in range(2):
            w = w - q @ (q.conj().T @ w)
        beta = np.linalg.norm(w)
        scale = max(scale, abs(alpha) + beta)
        if beta <= 1e-13 * scale or len(basis) == v.size:
            break
        betas.append(beta)
        basis.append(w / beta)
    k = len(alphas)
    t = np.diag(np.array(alphas, dtype=complex))
    if k > 1:
        off = np.array(betas[: k - 1])
        t += np.diag(off, 1) + np.diag(off, -1)
    m = inv_sqrt_on_support(HermitianOperator(t), rel_cutoff)
    return complex(norm * norm * m.entries[0, 0])


def sample(s: StateVector, rng: np.random.Generator) -> int:
    """Draw a basis index with probability ``|amps_i|**2``."""
    cdf = np.cumsum(s.probabilities())
    u = rng.random() * cdf[-1]
    # side="right" skips zero-probability indices
    return int(min(np.searchsorted(cdf, u, side="right"), s.dim - 1))

