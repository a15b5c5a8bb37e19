"""Candidate frequency sets and how close they come to an orthogonal basis.

The dual maps t -> R^T t + l generate the countable set
Lambda = {sum_k (R^T)^k l_k}; exponentials e_lam with lam in Lambda are the
basis candidates.  Finite truncations by word depth are enumerated here,
together with the two quantities that decide the question at desk scale:

* the pairwise inner products <e_lam, e_lam'> = mu-hat(lam - lam'), whose
  maximal off-diagonal modulus certifies orthogonality, and
* the completeness function Q_n(t) = sum_lam |mu-hat(t - lam)|^2, a
  monotone-in-depth lower bound that tends to 1 exactly when the family
  spans.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import BudgetError, ValidationError
from .measure import FractalMeasure, fourier_mu_many
from .systems import AffineSystem

__all__ = [
    "SpectrumEnumeration",
    "CompletenessReport",
    "enumerate_spectrum",
    "orthogonality_matrix",
    "q_partial",
    "q_partial_many",
    "completeness_scan",
    "separation",
]

DEFAULT_WORD_BUDGET = 2**24
DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumEnumeration:
    """Sorted, deduplicated depth-n truncation of the candidate spectrum.

    ``depth`` is None for hand-built element sets, which cannot be deepened.
    """

    sys: AffineSystem
    depth: int | None
    elements: np.ndarray  # (M, d)

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    @classmethod
    def from_elements(cls, sys: AffineSystem, elements) -> "SpectrumEnumeration":
        elements = np.asarray(elements, dtype=float).reshape(-1, sys.d)
        elements = elements[np.lexsort(elements.T[::-1])]
        elements.setflags(write=False)
        return cls(sys=sys, depth=None, elements=elements)


def enumerate_spectrum(
    sys: AffineSystem, depth: int, budget: int = DEFAULT_WORD_BUDGET
) -> SpectrumEnumeration:
    """All sums sum_{k=0}^{depth} (R^T)^k l_k over words in L^(depth+1).

    Output rows are lexicographically sorted and deduplicated: exact
    comparison when every element is integral, tolerance 1e-9 otherwise.
    """
    if depth < 0:
        raise ValidationError(f"depth must be >= 0, got {depth}")
    n = sys.n_digits
    if n ** (depth + 1) > budget:
        raise BudgetError(
            f"N^(depth+1) = {n}**{depth + 1} exceeds word budget {budget}"
        )
    sums = np.zeros((1, sys.d))
    contrib = sys.L.copy()  # rows (R^T)^k l at level k
    for _ in range(depth + 1):
        sums = (sums[:, None, :] + contrib[None, :, :]).reshape(-1, sys.d)
        contrib = contrib @ sys.R
    sums = sums[np.lexsort(sums.T[::-1])]
    if np.all(np.abs(sums - np.round(sums)) <= DEDUP_TOL):
        sums = np.round(sums)
        keep = np.ones(len(sums), dtype=bool)
        keep[1:] = np.any(np.diff(sums, axis=0) != 0.0, axis=1)
    else:
        keep = np.ones(len(sums), dtype=bool)
        keep[1:] = np.any(np.abs(np.diff(sums, axis=0)) > DEDUP_TOL, axis=1)
    elements = sums[keep]
    elements.setflags(write=False)
    return SpectrumEnumeration(sys=sys, depth=depth, elements=elements)


def orthogonality_matrix(
    m: FractalMeasure, spec: SpectrumEnumeration
) -> tuple[float, np.ndarray]:
    """Table of |mu-hat(lam_i - lam_j)| and its largest off-diagonal entry.

    The (i, j) entry is the modulus of the inner product of e_{lam_i} and
    e_{lam_j} in L^2(mu); a max off-diagonal near zero is the orthogonality
    certificate.
    """
    el = spec.elements
    n = el.shape[0]
    diffs = (el[:, None, :] - el[None, :, :]).reshape(-1, el.shape[1])
    values, _ = fourier_mu_many(m, diffs)
    table = np.abs(values).reshape(n, n)
    if n < 2:
        return 0.0, table
    off = table[~np.eye(n, dtype=bool)]
    return float(off.max()), table


def q_partial(m: FractalMeasure, spec: SpectrumEnumeration, t) -> float:
    """Q_n(t) = sum over enumerated lam of |mu-hat(t - lam)|^2.

    Caller is responsible for the family being orthogonal; only then is the
    Bessel bound Q_n <= 1 meaningful.
    """
    return float(q_partial_many(m, spec, np.atleast_2d(np.asarray(t, dtype=float)))[0])


def q_partial_many(m: FractalMeasure, spec: SpectrumEnumeration, T) -> np.ndarray:
    """Vectorized Q_n over rows of T."""
    T = np.asarray(T, dtype=float).reshape(-1, m.sys.d)
    el = spec.elements
    diffs = (T[:, None, :] - el[None, :, :]).reshape(-1, m.sys.d)
    values, _ = fourier_mu_many(m, diffs)
    return (np.abs(values).reshape(T.shape[0], el.shape[0]) ** 2).sum(axis=1)


@dataclass(frozen=True)
class CompletenessReport:
    """Outcome of a grid scan of Q_n with optional depth escalation."""

    min_Q: float
    argmin: np.ndarray
    max_Q: float
    converged: bool
    status: str  # complete-evidence | incomplete-evidence | inconclusive
    target: float
    depths: tuple[int, ...]
    min_trace: tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "min_Q": self.min_Q,
            "argmin": self.argmin.tolist(),
            "max_Q": self.max_Q,
            "converged": self.converged,
            "status": self.status,
            "target": self.target,
            "depths": list(self.depths),
            "min_trace": list(self.min_trace),
        }


def completeness_scan(
    m: FractalMeasure,
    spec: SpectrumEnumeration,
    grid,
    target: float,
    increment_tol: float = 1e-4,
    max_depth: int | None = None,
    budget: int = DEFAULT_WORD_BUDGET,
) -> CompletenessReport:
    """Scan Q over a grid, deepening the enumeration until min Q stabilizes.

    Deepening stops once one extra depth moves min Q by less than
    ``increment_tol`` (converged), or once the word budget or ``max_depth``
    is hit (inconclusive).  Hand-built enumerations are evaluated at their
    fixed element set only.  Evidence labels: Q_n only ever underestimates
    the limit, so "complete-evidence" (min Q >= target) is one-sided and
    "incomplete-evidence" additionally requires convergence.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1, m.sys.d)
    if grid.size == 0:
        raise ValidationError("completeness grid is empty")
    depths: list[int] = []
    trace: list[float] = []
    converged = False
    exhausted = False

    def evaluate(s: SpectrumEnumeration):
        values = q_partial_many(m, s, grid)
        return float(values.min()), int(values.argmin()), float(values.max())

    if spec.depth is None:
        # fixed element set: single evaluation, nothing to escalate
        min_q, arg, max_q = evaluate(spec)
        depths.append(-1)
        trace.append(min_q)
        converged = True
    else:
        top = spec.depth + 8 if max_depth is None else max_depth
        arg, min_q, max_q, prev = 0, np.inf, -np.inf, None
        for depth in range(spec.depth, top + 1):
            try:
                s = enumerate_spectrum(m.sys, depth, budget=budget)
            except BudgetError:
                exhausted = True
                break
            min_q, arg, mq = evaluate(s)
            max_q = max(max_q, mq)
            depths.append(depth)
            trace.append(min_q)
            if prev is not None and abs(min_q - prev) < increment_tol:
                converged = True
                break
            prev = min_q
        else:
            exhausted = True

    if min_q >= target:
        status = "complete-evidence"
    elif converged:
        status = "incomplete-evidence"
    else:
        status = "inconclusive" if exhausted else "incomplete-evidence"
    return CompletenessReport(
        min_Q=min_q,
        argmin=grid[arg].copy(),
        max_Q=max_q,
        converged=converged,
        status=status,
        target=target,
        depths=tuple(depths),
        min_trace=tuple(trace),
    )


def separation(spec: SpectrumEnumeration) -> float:
    """Smallest pairwise distance between enumerated frequencies."""
    if spec.size < 2:
        raise ValidationError("separation needs at least two elements")
    return float(pdist(spec.elements).min())
