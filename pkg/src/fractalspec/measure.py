"""The invariant measure of an affine system and its Fourier transform.

For a validated system the maps s_b(x) = R^-1 x + b admit a unique
invariant probability measure mu = N^-1 sum_b mu o s_b^-1, supported on the
attractor {sum_k R^-k b_k}.  Everything here flows from that equation:

* mu-hat(t) = integral of exp(-2 pi i t.x) is an infinite product of
  exponential-sum masks, truncated with a certified tail bound;
* unrolling the equation K times gives an atomic measure on N^K points
  whose transform equals the K-term truncated product exactly, which makes
  it the natural cross-check oracle;
* integrating monomials against both sides yields a closed linear system
  for moments;
* iterating a randomly chosen map gives the usual chaos-game sampler.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from ._numeric import cis2pi, multi_indices, power_norm_tail, power_norms
from .errors import BudgetError, ConvergenceError, ValidationError
from .systems import AffineSystem, check_hadamard, spectral_expansiveness

__all__ = [
    "FractalMeasure",
    "AtomicApproximation",
    "chi_mask",
    "fourier_mu",
    "fourier_mu_many",
    "atomic_approximation",
    "moments",
    "chaos_sample",
]

DEFAULT_ATOM_BUDGET = 2**24
DEFAULT_MOMENT_DEGREE_CAP = 8


def chi_mask(sys: AffineSystem, t) -> complex | np.ndarray:
    """Exponential-sum mask N^-1 sum_b exp(2 pi i b.t).

    Accepts a single d-vector (returns a scalar) or an (M, d) array of
    frequencies (returns an (M,) array).  Values at points where every
    phase is a quarter integer are exact; in particular the mask vanishes
    exactly where it should.
    """
    t = np.asarray(t, dtype=float)
    single = t.ndim <= 1
    pts = np.atleast_2d(t).reshape(-1, sys.d)
    phases = pts @ sys.B.T
    values = cis2pi(phases).mean(axis=1)
    return complex(values[0]) if single else values


@dataclass(frozen=True)
class AtomicApproximation:
    """Depth-K unrolling of the invariance equation: N^K equal atoms."""

    depth: int
    points: np.ndarray  # (N^K, d)
    weight: float

    def transform(self, t) -> complex | np.ndarray:
        """Fourier transform sum_w weight * exp(-2 pi i t.x_w).

        Direct summation over atoms; independent of the infinite-product
        route, which is exactly why it serves as an oracle for it.
        """
        t = np.asarray(t, dtype=float)
        single = t.ndim <= 1
        pts = np.atleast_2d(t).reshape(-1, self.points.shape[1])
        phases = pts @ self.points.T
        values = np.conj(cis2pi(phases)).mean(axis=1)
        return complex(values[0]) if single else values

    def moment(self, order) -> float:
        """Raw moment of the atomic measure for a multi-index (int in d=1)."""
        order = _as_multi_index(order, self.points.shape[1])
        mono = np.prod(self.points ** np.asarray(order, dtype=float), axis=1)
        return float(mono.mean())


class FractalMeasure:
    """Invariant probability measure of a validated affine system.

    The constructor insists on expansiveness and on the unitarity of the
    digit matrix (deviation <= ``hadamard_tol``); integrality of the system
    is the caller's concern and is checked separately where orthogonality
    claims depend on it.
    """

    def __init__(
        self,
        sys: AffineSystem,
        product_tail_tol: float = 1e-12,
        max_product_depth: int = 256,
        hadamard_tol: float = 1e-9,
    ):
        expansive, min_mod = spectral_expansiveness(sys)
        if not expansive:
            raise ValidationError(
                f"R is not expansive (min eigenvalue modulus {min_mod:.6g})"
            )
        deviation = check_hadamard(sys)
        if deviation > hadamard_tol:
            raise ValidationError(
                f"digit matrix is not unitary (deviation {deviation:.3e})"
            )
        self.sys = sys
        self.product_tail_tol = float(product_tail_tol)
        self.max_product_depth = int(max_product_depth)
        self._rinv = np.linalg.inv(sys.R)
        self._max_b = float(np.max(np.linalg.norm(sys.B, axis=1)))
        # c_k = ||(R^T)^-k||; suffix sums give certified product tails.
        c = power_norms(sys.R.T, self.max_product_depth)
        geo_end = power_norm_tail(sys.R.T, self.max_product_depth)
        if not np.isfinite(geo_end):
            raise ConvergenceError(
                "adjoint inverse powers do not decay within max_product_depth"
            )
        suffix = np.concatenate([np.cumsum(c[::-1])[::-1] + geo_end, [geo_end]])
        self._tail_sums = suffix  # tail_sums[K] >= sum_{k>=K} c_k

    def mask(self, t):
        return chi_mask(self.sys, t)

    def _depth_for(self, max_norm: float) -> int:
        """Smallest K whose tail bound is below product_tail_tol."""
        scale = 2.0 * np.pi * self._max_b * max_norm
        if scale == 0.0:
            return 0
        tails = scale * self._tail_sums[: self.max_product_depth + 1]
        ok = np.nonzero(tails <= self.product_tail_tol)[0]
        if ok.size == 0:
            raise ConvergenceError(
                f"product tail {tails[-1]:.3e} still above tolerance "
                f"{self.product_tail_tol:.1e} at depth {self.max_product_depth} "
                f"(|t| = {max_norm:.6g})"
            )
        return int(ok[0])


def fourier_mu(m: FractalMeasure, t) -> tuple[complex, float]:
    """mu-hat(t) with a certified truncation bound.

    Returns (value, tail_bound) where value is the K-term truncated product
    prod_k conj(chi((R^T)^-k t)) and |mu-hat(t) - value| <= tail_bound.  The
    depth K is the smallest one whose mask-deviation tail falls below the
    measure's ``product_tail_tol``.
    """
    values, tails = fourier_mu_many(m, np.atleast_2d(np.asarray(t, dtype=float)))
    return complex(values[0]), float(tails[0])


def fourier_mu_many(m: FractalMeasure, T) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized mu-hat over rows of T (shape (M, d))."""
    T = np.asarray(T, dtype=float).reshape(-1, m.sys.d)
    norms = np.linalg.norm(T, axis=1)
    max_norm = float(norms.max(initial=0.0))
    depth = m._depth_for(max_norm)
    values = np.ones(T.shape[0], dtype=complex)
    pts = T
    for _ in range(depth):
        values *= np.conj(chi_mask(m.sys, pts))
        pts = pts @ m._rinv  # row form of t -> (R^T)^-1 t
    scale = 2.0 * np.pi * m._max_b
    tails = scale * norms * m._tail_sums[depth]
    return values, tails


def atomic_approximation(
    m: FractalMeasure, depth: int, budget: int = DEFAULT_ATOM_BUDGET
) -> AtomicApproximation:
    """All depth-K words of digits, in lexicographic order over sorted B.

    Point for word (b_0, ..., b_{K-1}) is sum_k R^-k b_k; each carries
    weight N^-K.  K = 0 yields the single point 0 with full mass.
    """
    sys = m.sys
    n = sys.n_digits
    if depth < 0:
        raise ValidationError(f"depth must be >= 0, got {depth}")
    if n**depth > budget:
        raise BudgetError(f"N^K = {n}**{depth} exceeds atom budget {budget}")
    rinv = np.linalg.inv(sys.R)
    points = np.zeros((1, sys.d))
    contrib = sys.B.copy()  # rows R^-k b at level k
    for _ in range(depth):
        # earlier letters vary slowest: lexicographic word order
        points = (points[:, None, :] + contrib[None, :, :]).reshape(-1, sys.d)
        contrib = contrib @ rinv.T
    points.setflags(write=False)
    return AtomicApproximation(depth=depth, points=points, weight=float(n) ** -depth)


def _as_multi_index(order, d: int) -> tuple[int, ...]:
    if isinstance(order, (int, np.integer)):
        if d != 1:
            raise ValidationError("scalar moment order only valid in dimension 1")
        order = (int(order),)
    order = tuple(int(k) for k in order)
    if len(order) != d or any(k < 0 for k in order):
        raise ValidationError(f"bad multi-index {order} for dimension {d}")
    return order


def _poly_mul(p: dict, q: dict, d: int) -> dict:
    out: dict = {}
    for a, ca in p.items():
        for b, cb in q.items():
            key = tuple(a[i] + b[i] for i in range(d))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _poly_pow(p: dict, k: int, d: int) -> dict:
    out = {(0,) * d: 1.0}
    for _ in range(k):
        out = _poly_mul(out, p, d)
    return out


def moments(m: FractalMeasure, order, max_degree: int = DEFAULT_MOMENT_DEGREE_CAP) -> float:
    """Raw moment int x^order dmu via the invariance equation.

    Integrating x^alpha against both sides and expanding (R^-1 x + b)^alpha
    couples each moment to moments of equal or lower total degree; the
    resulting linear system is uniquely solvable because the same-degree
    block has spectral radius < 1 for expansive R.  Exact up to solver
    precision.
    """
    sys = m.sys
    d = sys.d
    order = _as_multi_index(order, d)
    degree = sum(order)
    if degree > max_degree:
        raise BudgetError(f"moment degree {degree} exceeds cap {max_degree}")
    if degree == 0:
        return 1.0

    idx = multi_indices(d, degree)
    pos = {alpha: i for i, alpha in enumerate(idx)}
    n_idx = len(idx)
    rinv = np.linalg.inv(sys.R)
    # linear forms y_i = (R^-1 x)_i as sparse polynomials in x
    lin = []
    for i in range(d):
        form = {}
        for j in range(d):
            if rinv[i, j] != 0.0:
                key = tuple(1 if jj == j else 0 for jj in range(d))
                form[key] = rinv[i, j]
        lin.append(form)

    A = np.zeros((n_idx, n_idx))
    for alpha in idx:
        row = pos[alpha]
        for b in sys.B:
            p = {(0,) * d: 1.0}
            for i in range(d):
                factor: dict = {}
                ypow = {(0,) * d: 1.0}
                for k in range(alpha[i] + 1):
                    coeff = comb(alpha[i], k) * b[i] ** (alpha[i] - k)
                    for key, val in ypow.items():
                        factor[key] = factor.get(key, 0.0) + coeff * val
                    if k < alpha[i]:
                        ypow = _poly_mul(ypow, lin[i], d)
                p = _poly_mul(p, factor, d)
            for beta, coeff in p.items():
                A[row, pos[beta]] += coeff / sys.n_digits

    # m = A m with m_0 = 1; eliminate the trivial zeroth row
    rhs = A[1:, 0]
    core = np.eye(n_idx - 1) - A[1:, 1:]
    try:
        solved = np.linalg.solve(core, rhs)
    except np.linalg.LinAlgError as exc:  # unreachable for expansive R
        raise ValidationError(f"moment system is singular: {exc}") from None
    return float(solved[pos[order] - 1])


def chaos_sample(
    m: FractalMeasure, count: int, burn_in: int = 100, seed: int = 0
) -> np.ndarray:
    """Random-iteration samples of the attractor, deterministic per seed."""
    if count < 0:
        raise ValidationError(f"count must be >= 0, got {count}")
    sys = m.sys
    rng = np.random.default_rng(seed)
    digits = rng.integers(0, sys.n_digits, size=burn_in + count)
    rinv = np.linalg.inv(sys.R)
    out = np.empty((count, sys.d))
    x = np.zeros(sys.d)
    for step, digit in enumerate(digits):
        x = rinv @ x + sys.B[digit]
        if step >= burn_in:
            out[step - burn_in] = x
    return out
