"""Distinguishability of Grover states after m steps.

For a fixed step count m, the states reached with marked element x form a
symmetric family psi_x(m) = T^x psi_0(m) under the cyclic shift T. This
module evaluates how well the family can be discriminated:

* the unambiguous-discrimination upper bound N * min_a |<gamma_a|psi_0(m)>|^2,
  where gamma_a are the Fourier eigenvectors of T;
* the optimal minimum-error success probability, attained by the
  square-root measurement.

Closed forms accept real m. Numeric routes build the states by gate
iteration and are restricted to integer m and dense sizes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import grover
from .grover import MarkedSet
from .statevec import (
    HermitianOperator,
    Povm,
    StateVector,
    inv_sqrt_expectation,
)

DENSE_LIMIT = 4096
CROSSCHECK_LIMIT = 512
CROSSCHECK_TOL = 1e-8


class CrossCheckError(RuntimeError):
    """A numeric route disagreed with its closed form."""


@dataclass(frozen=True)
class SweepRow:
    m: float
    p_grover: float
    gamma0: float
    p_minerr: float
    cos_term: float
    sin_term: float


def shift_apply(s: StateVector) -> StateVector:
    """Cyclic shift |x> -> |x+1 mod N>."""
    return StateVector(np.roll(s.amps, 1))


def shift_power(s: StateVector, x: int) -> StateVector:
    return StateVector(np.roll(s.amps, x))


def shift_matrix(N: int) -> np.ndarray:
    return np.roll(np.eye(N), 1, axis=0)


def fourier_vector(N: int, a: int) -> StateVector:
    if not 0 <= a < N:
        raise ValueError(f"Fourier index {a} out of range for N={N}")
    y = np.arange(N)
    return StateVector(np.exp(-2j * np.pi * a * y / N) / math.sqrt(N))


@functools.lru_cache(maxsize=8)
def fourier_matrix(N: int) -> np.ndarray:
    """Columns are the shift eigenvectors gamma_0 .. gamma_{N-1}."""
    y = np.arange(N)
    f = np.exp(-2j * np.pi * (np.outer(y, y) % N) / N) / math.sqrt(N)
    f.flags.writeable = False
    return f


def symmetric_state(N: int, x: int, m: int) -> StateVector:
    """psi_x(m), computed as T^x applied to the iterated state with marked 0."""
    if not 0 <= x < N:
        raise ValueError(f"x={x} out of range for N={N}")
    base = grover.run(grover.params(N, 1), MarkedSet(N, (0,)), m)
    return shift_power(base, x)


def _trig(N: int, m: float) -> tuple[float, float]:
    """(cos m*omega, sin m*omega) for single-target Grover at size N.

    The cosine is reduced about m0 + 1/2, where m*omega = pi/2, so that it
    vanishes exactly there.
    """
    p = grover.params(N, 1)
    return -math.sin((m - p.half_turn) * p.omega), math.sin(m * p.omega)


def unamb_terms(N: int, m: float) -> tuple[float, float]:
    """The two unsquared terms |cos m*omega| and |sin m*omega|/sqrt(N-1)."""
    c, s = _trig(N, m)
    return abs(c), abs(s) / math.sqrt(N - 1)


def unamb_bound(N: int, m: float) -> float:
    """Upper bound on unambiguous discrimination of the N Grover states."""
    c, s = unamb_terms(N, m)
    return N * min(c, s) ** 2


def unamb_bound_numeric(N: int, m: int) -> float:
    """N * min_a |<gamma_a|psi_0(m)>|^2 from iterated states and explicit
    Fourier vectors."""
    if N > DENSE_LIMIT:
        raise ValueError(f"N={N} exceeds dense limit {DENSE_LIMIT}; use unamb_bound")
    psi = symmetric_state(N, 0, m).amps
    overlaps = fourier_matrix(N).conj().T @ psi
    return float(N * np.min(np.abs(overlaps) ** 2))


def crossing_points(N: int) -> tuple[float, float]:
    """Real step counts (m0, m0 + 1) where the Grover states are orthogonal."""
    m0 = grover.params(N, 1).m0
    return m0, m0 + 1.0


def minerr_prob(N: int, m: float) -> float:
    """Optimal minimum-error success probability for the N Grover states."""
    c, s = _trig(N, m)
    return (abs(c) + math.sqrt(N - 1) * abs(s)) ** 2 / N


def gram_closed_form(N: int, m: float) -> np.ndarray:
    """sum_x |psi_x(m)><psi_x(m)| from its two-eigenvalue spectral form."""
    c, s = _trig(N, m)
    uniform = np.full((N, N), 1.0 / N)
    return N * c * c * uniform + N / (N - 1) * s * s * (np.eye(N) - uniform)


def minerr_numeric(N: int, m: int, rel_cutoff: float = 1e-12, with_povm: bool = True):
    """Square-root measurement of the Grover states, computed by brute force.

    Builds Omega = sum_x |psi_x><psi_x| from the N shifted iterated states and
    checks it against :func:`gram_closed_form`. Returns the success
    probability |<psi_0|Omega^-1/2|psi_0>|^2 and, if ``with_povm``, the
    measurement with effects Omega^-1/2 |psi_x><psi_x| Omega^-1/2
    (otherwise None).
    """
    if N > DENSE_LIMIT:
        raise ValueError(f"N={N} exceeds dense limit {DENSE_LIMIT}; use minerr_prob")
    psi0 = symmetric_state(N, 0, m).amps
    if not np.any(psi0.imag):
        psi0 = psi0.real
    # column x is T^x psi_0
    y = np.arange(N)
    states = psi0[(y[:, None] - y[None, :]) % N]
    omega = states @ states.conj().T
    dev = np.max(np.abs(omega - gram_closed_form(N, m)))
    if dev > 1e-10:
        raise CrossCheckError(f"Gram operator deviates from closed form by {dev:.3g}")
    amp = inv_sqrt_expectation(lambda v: omega @ v, psi0, rel_cutoff)
    povm = _srm(states, rel_cutoff) if with_povm else None
    return float(abs(amp) ** 2), povm


def _srm(states: np.ndarray, rel_cutoff: float) -> Povm:
    # Omega^-1/2 |psi_x> is column x of the polar factor U W^dagger of the
    # state matrix U S W^dagger. Going through the SVD avoids squaring the
    # condition number, which reaches ~1e6 near m0 + 1/2.
    u, sv, wh = np.linalg.svd(states)
    keep = sv ** 2 > rel_cutoff * sv[0] ** 2
    u, wh = u[:, keep], wh[keep]
    vectors = (u @ wh).T
    return Povm.rank_one(vectors, u @ u.conj().T)


def sweep(N: int, m_values: Iterable[float]) -> list:
    """Grover, unambiguous and minimum-error success curves over ``m_values``.

    Integer abscissae at N <= 512 are re-derived through the numeric routes;
    a disagreement beyond 1e-8 raises CrossCheckError.
    """
    p = grover.params(N, 1)
    rows = []
    for m in m_values:
        m = float(m)
        cos_term, sin_term = unamb_terms(N, m)
        row = SweepRow(
            m=m,
            p_grover=grover.success_prob(p, m),
            gamma0=unamb_bound(N, m),
            p_minerr=minerr_prob(N, m),
            cos_term=cos_term,
            sin_term=sin_term,
        )
        if m.is_integer() and N <= CROSSCHECK_LIMIT:
            _crosscheck(N, int(m), row)
        rows.append(row)
    return rows


def _crosscheck(N: int, m: int, row: SweepRow) -> None:
    marked = MarkedSet(N, (0,))
    state = grover.run(grover.params(N, 1), marked, m)
    checks = {
        "p_grover": (row.p_grover, grover.marked_probability(marked, state)),
        "gamma0": (row.gamma0, unamb_bound_numeric(N, m)),
        "p_minerr": (row.p_minerr, minerr_numeric(N, m, with_povm=False)[0]),
    }
    for name, (closed, numeric) in checks.items():
        if abs(closed - numeric) > CROSSCHECK_TOL:
            raise CrossCheckError(f"N={N} m={m}: {name} closed form {closed!r} vs numeric {numeric!r}")


def step_power_closed_form(N: int, m: int) -> np.ndarray:
    """U_0^m as a rotation on span{gamma_0, |0>} and (-1)^m elsewhere.

    In the basis gamma_0, gamma0_bar (the normalized remainder of |0>), a
    single step acts as exp(-i*omega*Y).
    """
    p = grover.params(N, 1)
    g0 = np.full(N, 1.0 / math.sqrt(N))
    e0 = np.zeros(N)
    e0[0] = 1.0
    g0_bar = (math.sqrt(N) * e0 - g0) / math.sqrt(N - 1)
    i0 = np.outer(g0, g0) + np.outer(g0_bar, g0_bar)
    y0 = -1j * np.outer(g0, g0_bar) + 1j * np.outer(g0_bar, g0)
    rest = (-1.0) ** m * (np.eye(N) - i0)
    return rest + math.cos(m * p.omega) * i0 - 1j * math.sin(m * p.omega) * y0
