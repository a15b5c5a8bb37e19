"""Transfer operator machinery and the contraction-based basis certificate.

The operator (Cq)(t) = sum_l |chi(t-l)|^2 q((R^T)^-1 (t-l)) acts on
functions over an invariant box around the attractor of the contractive
dual maps.  Three facts drive everything here:

* unitarity of the digit matrix forces sum_l |chi(t-l)|^2 = 1, so C fixes
  constants;
* C's Lipschitz operator norm on functions vanishing at 0 admits the
  closed-form bound
  gamma = (N-1)^2 N^-1 beta ||R^-1||_op max|l| + ||R^-1||_hs,
  with beta = 2 pi diam(B) sup-of-sines over the box;
* gamma < 1, together with 0 in L and L spanning, certifies that the
  enumerated exponentials form an orthonormal basis.

The sup in beta is estimated from dense sampling plus a Lipschitz slack
term, so the reported gamma is an upper bound (sound for certification);
probe ratios, by contrast, only ever underestimate their sups, so the
certificate and the empirical check cannot disagree by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize_scalar

from ._numeric import cospi, hs_norm, operator_norm, power_norm_tail, sinpi
from .errors import ConvergenceError, DomainError, ValidationError
from .measure import FractalMeasure, chi_mask
from .systems import AffineSystem, check_hadamard

__all__ = [
    "GridFunction",
    "ContractionReport",
    "ProbeResult",
    "TrigPolynomial",
    "as_box",
    "attractor_hull",
    "apply_ruelle",
    "lipschitz_norm",
    "estimate_gamma",
    "contraction_probe",
    "probe_ratio",
    "basis_certificate",
]

DEFAULT_NODES_1D = 1025
DEFAULT_NODES_ND = 129
BOX_TOL = 1e-9


def as_box(value, d: int) -> np.ndarray:
    """Normalize a box spec ((lo, hi) pairs, or a flat pair in d=1)."""
    box = np.asarray(value, dtype=float)
    if d == 1 and box.shape == (2,):
        box = box.reshape(1, 2)
    if box.shape != (d, 2) or np.any(box[:, 0] > box[:, 1]):
        raise ValidationError(f"bad box {value!r} for dimension {d}")
    return box


def _default_shape(d: int) -> tuple[int, ...]:
    return (DEFAULT_NODES_1D,) * d if d == 1 else (DEFAULT_NODES_ND,) * d


@dataclass(frozen=True)
class GridFunction:
    """Real-valued samples on a regular grid over an axis-aligned box."""

    box: np.ndarray  # (d, 2)
    samples: np.ndarray

    @property
    def d(self) -> int:
        return self.box.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.samples.shape

    @property
    def steps(self) -> np.ndarray:
        sizes = np.asarray(self.samples.shape)
        return (self.box[:, 1] - self.box[:, 0]) / np.maximum(sizes - 1, 1)

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(lo, hi, n)
            for (lo, hi), n in zip(self.box, self.samples.shape)
        ]

    def nodes(self) -> np.ndarray:
        """All grid nodes as an (M, d) array, C-order over axes."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @classmethod
    def from_callable(cls, box, shape, fn) -> "GridFunction":
        box = np.asarray(box, dtype=float)
        probe = cls(box=box, samples=np.zeros(shape))
        values = np.asarray(fn(probe.nodes()), dtype=float).reshape(shape)
        values.setflags(write=False)
        return cls(box=box, samples=values)

    def interpolate(self, pts: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at (M, d) points inside the box."""
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        if self.d == 1:
            return np.interp(pts[:, 0], self.axes()[0], self.samples)
        interp = RegularGridInterpolator(
            self.axes(), self.samples, method="linear", bounds_error=True
        )
        return interp(pts)

    def rows(self):
        """(node coords..., value) tuples, ready for CSV emission."""
        return [
            tuple(node) + (value,)
            for node, value in zip(self.nodes(), self.samples.ravel())
        ]


def attractor_hull(
    sys: AffineSystem,
    tol: float = BOX_TOL,
    max_levels: int = 256,
    max_expand: int = 64,
) -> np.ndarray:
    """Invariant box around the attractor of the maps t -> (R^T)^-1 (t - l).

    Attractor points are -sum_{k>=1} (R^T)^-k l_k; the per-axis extremes of
    the depth-K cloud decompose level by level, so the bounding box is exact
    without enumerating words.  The box is inflated by the certified tail
    radius and then grown, if needed, until every map sends it into itself
    within ``tol``.
    """
    d = sys.d
    rinv = np.linalg.inv(sys.R)
    max_l = float(np.max(np.linalg.norm(sys.L, axis=1)))
    lo = np.zeros(d)
    hi = np.zeros(d)
    contrib = sys.L @ rinv  # rows (R^T)^-k l at k = 1
    level = 0
    while True:
        level += 1
        lo += (-contrib).min(axis=0)
        hi += (-contrib).max(axis=0)
        tail = power_norm_tail(sys.R.T, level + 1) * max_l
        if tail <= tol:
            break
        if level >= max_levels:
            raise ConvergenceError(
                f"attractor tail radius {tail:.3e} above {tol:.1e} "
                f"after {max_levels} levels"
            )
        contrib = contrib @ rinv
    box = np.stack([lo - tail, hi + tail], axis=1)

    for _ in range(max_expand):
        excess, images = _invariance_excess(sys, box)
        if excess <= tol:
            box.setflags(write=False)
            return box
        box = np.stack(
            [
                np.minimum(box[:, 0], images[:, 0]),
                np.maximum(box[:, 1], images[:, 1]),
            ],
            axis=1,
        )
    raise ConvergenceError(
        "could not grow the box to absorb its own images; "
        "the dual maps expand too strongly along some axis"
    )


def _corners(box: np.ndarray) -> np.ndarray:
    d = box.shape[0]
    idx = np.indices((2,) * d).reshape(d, -1).T
    return box[np.arange(d), idx]


def _invariance_excess(sys: AffineSystem, box: np.ndarray):
    """Largest distance any mapped corner leaves the box, plus image bbox."""
    rinv = np.linalg.inv(sys.R)
    corners = _corners(box)
    all_imgs = []
    for l in sys.L:
        all_imgs.append((corners - l) @ rinv)
    imgs = np.concatenate(all_imgs, axis=0)
    excess = max(
        float(np.max(box[:, 0] - imgs.min(axis=0))),
        float(np.max(imgs.max(axis=0) - box[:, 1])),
    )
    bbox = np.stack([imgs.min(axis=0), imgs.max(axis=0)], axis=1)
    return excess, bbox


def check_box_invariance(sys: AffineSystem, box, tol: float = BOX_TOL) -> float:
    """Max amount by which any dual map sends a box corner outside the box."""
    box = as_box(box, sys.d)
    excess, _ = _invariance_excess(sys, box)
    return max(excess, 0.0)


def _mask_sq(sys: AffineSystem, pts: np.ndarray) -> np.ndarray:
    values = chi_mask(sys, pts)
    return np.abs(np.atleast_1d(values)) ** 2


def _mask_sq_grad(sys: AffineSystem, pts: np.ndarray) -> np.ndarray:
    """Gradient of |chi|^2 = N^-2 sum_{b,b'} cos(2 pi (b-b').s)."""
    pts = np.atleast_2d(pts)
    n = sys.n_digits
    grad = np.zeros_like(pts)
    for i, j in combinations(range(n), 2):
        delta = sys.B[i] - sys.B[j]
        s = sinpi(2.0 * (pts @ delta))
        grad -= (4.0 * np.pi / n**2) * np.outer(s, delta)
    return grad


def apply_ruelle(
    sys: AffineSystem, q: GridFunction, domain_tol: float = BOX_TOL
) -> GridFunction:
    """One application of the transfer operator, sampled on q's own grid.

    q is evaluated at the mapped nodes by multilinear interpolation, which
    requires the box to be invariant under every dual map; a violation
    beyond ``domain_tol`` raises DomainError (enlarge the box).
    """
    rinv = np.linalg.inv(sys.R)
    nodes = q.nodes()
    out = np.zeros(nodes.shape[0])
    lo, hi = q.box[:, 0], q.box[:, 1]
    for l in sys.L:
        shifted = nodes - l
        weights = _mask_sq(sys, shifted)
        mapped = shifted @ rinv
        excess = max(
            float(np.max(lo - mapped.min(axis=0), initial=0.0)),
            float(np.max(mapped.max(axis=0) - hi, initial=0.0)),
        )
        if excess > domain_tol:
            raise DomainError(
                f"dual map with l={l.tolist()} leaves the box by {excess:.3e}; "
                "enlarge the box"
            )
        mapped = np.clip(mapped, lo, hi)
        out += weights * q.interpolate(mapped)
    samples = out.reshape(q.shape)
    samples.setflags(write=False)
    return GridFunction(box=q.box, samples=samples)


def lipschitz_norm(q: GridFunction) -> float:
    """Sup over interior nodes of the central-difference gradient norm."""
    if any(n < 3 for n in q.shape):
        raise ValidationError("grid too coarse for central differences")
    steps = q.steps
    core = tuple(slice(1, -1) for _ in range(q.d))
    sq = np.zeros(q.samples[core].shape)
    for axis in range(q.d):
        fwd = [slice(1, -1)] * q.d
        bwd = [slice(1, -1)] * q.d
        fwd[axis] = slice(2, None)
        bwd[axis] = slice(None, -2)
        comp = (q.samples[tuple(fwd)] - q.samples[tuple(bwd)]) / (2.0 * steps[axis])
        sq += comp**2
    return float(np.sqrt(sq.max()))


@dataclass(frozen=True)
class ContractionReport:
    """Closed-form contraction bound plus certificate bookkeeping."""

    gamma_bound: float
    beta: float
    sup_sin: float
    op_norm_inv: float
    hs_norm_inv: float
    box: np.ndarray
    hadamard_deviation: float | None = None
    zero_in_l: bool | None = None
    l_spans: bool | None = None
    empirical_max_ratio: float | None = None
    trials: int = 0
    skipped: int = 0
    basis_certified: bool = False
    failures: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "gamma_bound": self.gamma_bound,
            "beta": self.beta,
            "sup_sin": self.sup_sin,
            "op_norm_inv": self.op_norm_inv,
            "hs_norm_inv": self.hs_norm_inv,
            "box": self.box.tolist(),
            "hadamard_deviation": self.hadamard_deviation,
            "zero_in_l": self.zero_in_l,
            "l_spans": self.l_spans,
            "empirical_max_ratio": self.empirical_max_ratio,
            "trials": self.trials,
            "skipped": self.skipped,
            "basis_certified": self.basis_certified,
            "failures": list(self.failures),
        }


def _box_nodes(box: np.ndarray, per_axis: int) -> tuple[np.ndarray, np.ndarray]:
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    steps = (box[:, 1] - box[:, 0]) / max(per_axis - 1, 1)
    return pts, steps


def estimate_gamma(
    sys: AffineSystem, box, samples_per_axis: int | None = None
) -> ContractionReport:
    """Closed-form contraction bound for C on functions vanishing at 0.

    The sine sup inside beta is taken over the box by dense sampling; a
    Lipschitz slack (gradient of the sine is bounded by 2 pi |b - b'|)
    is added so the reported value upper-bounds the true sup, then capped
    at the trivial bound 1.  Larger sup, larger gamma: conservative.
    """
    box = as_box(box, sys.d)
    if samples_per_axis is None:
        samples_per_axis = 2**15 + 1 if sys.d == 1 else 257
    pts, _ = _box_nodes(box, samples_per_axis)
    steps = (box[:, 1] - box[:, 0]) / max(samples_per_axis - 1, 1)
    half_diag = 0.5 * float(np.linalg.norm(steps))

    n = sys.n_digits
    sup_sin = 0.0
    for i, j in combinations(range(n), 2):
        delta = sys.B[i] - sys.B[j]
        lip = 2.0 * np.pi * float(np.linalg.norm(delta))
        for l in sys.L:
            vals = np.abs(sinpi(2.0 * ((pts - l) @ delta)))
            sup_sin = max(sup_sin, min(1.0, float(vals.max()) + lip * half_diag))
    diam = 0.0
    for i, j in combinations(range(n), 2):
        diam = max(diam, float(np.linalg.norm(sys.B[i] - sys.B[j])))
    beta = 2.0 * np.pi * diam * sup_sin

    rinv = np.linalg.inv(sys.R)
    op = operator_norm(rinv)
    hs = hs_norm(rinv)
    max_l = float(np.max(np.linalg.norm(sys.L, axis=1)))
    gamma = (n - 1) ** 2 / n * beta * op * max_l + hs
    return ContractionReport(
        gamma_bound=float(gamma),
        beta=float(beta),
        sup_sin=float(sup_sin),
        op_norm_inv=op,
        hs_norm_inv=hs,
        box=box,
    )


class TrigPolynomial:
    """Trigonometric polynomial vanishing at 0, with exact gradient."""

    def __init__(self, waves: np.ndarray, cos_coeff: np.ndarray, sin_coeff: np.ndarray):
        self.waves = np.atleast_2d(np.asarray(waves, dtype=float))
        self.cos_coeff = np.asarray(cos_coeff, dtype=float)
        self.sin_coeff = np.asarray(sin_coeff, dtype=float)

    def value(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        phases = pts @ self.waves.T  # (M, n_terms)
        return (cospi(2.0 * phases) - 1.0) @ self.cos_coeff + sinpi(
            2.0 * phases
        ) @ self.sin_coeff

    def gradient(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        phases = pts @ self.waves.T
        dcos = -sinpi(2.0 * phases) * self.cos_coeff
        dsin = cospi(2.0 * phases) * self.sin_coeff
        return 2.0 * np.pi * (dcos + dsin) @ self.waves

    @classmethod
    def random(cls, rng: np.random.Generator, d: int, degree: int = 4) -> "TrigPolynomial":
        n_terms = 2 * degree
        if d == 1:
            waves = rng.integers(1, degree + 1, size=(n_terms, 1)).astype(float)
        else:
            waves = rng.integers(-degree, degree + 1, size=(n_terms, d)).astype(float)
            dead = np.all(waves == 0.0, axis=1)
            waves[dead, 0] = 1.0
        return cls(
            waves=waves,
            cos_coeff=rng.uniform(-1.0, 1.0, n_terms),
            sin_coeff=rng.uniform(-1.0, 1.0, n_terms),
        )


def _transfer_gradient(sys: AffineSystem, q_value, q_grad, pts: np.ndarray) -> np.ndarray:
    """Exact gradient of Cq at pts, by the product rule."""
    rinv = np.linalg.inv(sys.R)
    pts = np.atleast_2d(pts)
    total = np.zeros_like(pts)
    for l in sys.L:
        shifted = pts - l
        mapped = shifted @ rinv
        w = _mask_sq(sys, shifted)
        gw = _mask_sq_grad(sys, shifted)
        total += gw * q_value(mapped)[:, None]
        total += w[:, None] * (q_grad(mapped) @ rinv.T)
    return total


def _sup_norm(fn, box: np.ndarray, per_axis: int, refine: bool) -> float:
    """Sup of a smooth nonnegative function over the box via sampling.

    1-D argmax cells get a bounded scalar polish; the result never exceeds
    the true sup (it only evaluates the function), which is the direction
    certificate comparisons need.
    """
    pts, steps = _box_nodes(box, per_axis)
    vals = fn(pts)
    best = float(vals.max())
    if refine and box.shape[0] == 1:
        h = steps[0]
        star = pts[int(vals.argmax()), 0]
        lo = max(box[0, 0], star - h)
        hi = min(box[0, 1], star + h)
        if hi > lo:
            res = minimize_scalar(
                lambda y: -float(fn(np.array([[y]]))[0]),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-12},
            )
            best = max(best, float(-res.fun))
    return best


def probe_ratio(
    sys: AffineSystem,
    box,
    q_value,
    q_grad,
    per_axis: int | None = None,
    refine: bool = True,
) -> float:
    """Lipschitz-norm ratio ||Cq|| / ||q|| for one C^1 test function."""
    box = as_box(box, sys.d)
    if per_axis is None:
        per_axis = 4097 if sys.d == 1 else 65

    def grad_q_norm(pts):
        return np.linalg.norm(q_grad(pts), axis=1)

    def grad_cq_norm(pts):
        return np.linalg.norm(_transfer_gradient(sys, q_value, q_grad, pts), axis=1)

    denom = _sup_norm(grad_q_norm, box, per_axis, refine)
    if denom < 1e-12:
        return float("nan")
    numer = _sup_norm(grad_cq_norm, box, per_axis, refine)
    return numer / denom


@dataclass(frozen=True)
class ProbeResult:
    max_ratio: float
    ratios: tuple[float, ...]
    skipped: int
    trials: int
    seed: int


def contraction_probe(
    sys: AffineSystem,
    box,
    trials: int,
    seed: int,
    degree: int = 4,
    per_axis: int | None = None,
) -> ProbeResult:
    """Empirical contraction ratios over random trig-polynomial probes.

    Each probe vanishes at 0, the class the bound covers; gradients are
    evaluated in closed form, so ratios reflect the operator, not grid
    differentiation error.  Degenerate probes (zero Lipschitz norm) are
    skipped and counted.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    box = as_box(box, sys.d)
    rng = np.random.default_rng(seed)
    ratios = []
    skipped = 0
    for _ in range(trials):
        poly = TrigPolynomial.random(rng, sys.d, degree)
        ratio = probe_ratio(sys, box, poly.value, poly.gradient, per_axis=per_axis)
        if np.isnan(ratio):
            skipped += 1
        else:
            ratios.append(float(ratio))
    if not ratios:
        raise ValidationError("all probe functions were degenerate")
    return ProbeResult(
        max_ratio=max(ratios),
        ratios=tuple(ratios),
        skipped=skipped,
        trials=trials,
        seed=seed,
    )


def basis_certificate(
    m: FractalMeasure,
    box=None,
    trials: int = 0,
    seed: int = 0,
    hadamard_tol: float = 1e-9,
) -> ContractionReport:
    """Certificate that the enumerated exponentials form an orthonormal basis.

    Certifies when the digit matrix is unitary, 0 is in L, L spans, and the
    contraction bound is below 1.  Failed hypotheses are recorded rather
    than raised; optional probe trials attach empirical ratios.
    """
    sys = m.sys
    box = attractor_hull(sys) if box is None else as_box(box, sys.d)
    report = estimate_gamma(sys, box)
    deviation = check_hadamard(sys)
    zero_in_l = bool(np.any(np.all(sys.L == 0.0, axis=1)))
    l_spans = bool(np.linalg.matrix_rank(sys.L) == sys.d)

    failures = []
    if deviation > hadamard_tol:
        failures.append("digit matrix is not unitary")
    if not zero_in_l:
        failures.append("0 not in L")
    if not l_spans:
        failures.append("L does not span")
    if not report.gamma_bound < 1.0:
        failures.append("gamma_bound >= 1")

    empirical = None
    skipped = 0
    if trials > 0:
        probe = contraction_probe(sys, box, trials=trials, seed=seed)
        empirical = probe.max_ratio
        skipped = probe.skipped
    return replace(
        report,
        hadamard_deviation=deviation,
        zero_in_l=zero_in_l,
        l_spans=l_spans,
        empirical_max_ratio=empirical,
        trials=trials,
        skipped=skipped,
        basis_certified=not failures,
        failures=tuple(failures),
    )
