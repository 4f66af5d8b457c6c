"""Birkhoff-averaged commutator symbols and degree estimation.

The discrete side works with a unitary step ``U`` and a Hermitian conjugate
operator ``A``; the continuous side with a Hermitian generator ``H``.  Both
share the same storyline: an exact commutator identity turns correlation
decay into a statement about the Birkhoff average of a fixed symbol, and the
limit of those averages acts as a renormalized winding number ("degree") for
the flow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import QuadratureError, StructureError
from .operators import (
    as_square_matrix,
    check_structure,
    matrix_to_payload,
    max_norm,
    spectral_norm,
)

__all__ = [
    "OperatorPair",
    "SmoothWindow",
    "QuadratureRule",
    "QuadratureResult",
    "DegreeEstimate",
    "IdentityCheck",
    "FlowIdentityCheck",
    "MixingBound",
    "unitary_symbol",
    "selfadjoint_symbol",
    "birkhoff_discrete",
    "birkhoff_continuous",
    "degree_identity_check",
    "degree_alternative",
    "estimate_degree",
    "epsilon_commutator",
    "epsilon_commutator_slope",
    "mixing_bound",
    "project_onto_window",
    "tilde_conjugate",
    "flow_identity_check",
]

DEGREE_ESTIMATE_FORMAT = "degree-estimate"
DEGREE_ESTIMATE_VERSION = 1


@dataclass(frozen=True)
class OperatorPair:
    """A flow generator paired with a Hermitian conjugate operator.

    ``kind == "discrete"`` means ``main`` is the unitary step of the flow;
    ``kind == "continuous"`` means ``main`` is the Hermitian generator.  The
    conjugate operator is Hermitian in both cases.  Structure is validated at
    construction with max-norm tolerance 1e-10.
    """

    main: np.ndarray
    conjugate: np.ndarray
    kind: str

    def __post_init__(self):
        main = as_square_matrix(self.main, "main")
        conj = as_square_matrix(self.conjugate, "conjugate")
        if main.shape != conj.shape:
            raise StructureError(f"operator shapes differ: {main.shape} vs {conj.shape}")
        if self.kind not in ("discrete", "continuous"):
            raise ValueError(f"kind must be 'discrete' or 'continuous', got {self.kind!r}")
        structure = "unitary" if self.kind == "discrete" else "hermitian"
        rep = check_structure(main, structure, tol=1e-10 * max(1.0, max_norm(main)))
        if not rep.passed:
            raise StructureError(f"main operator fails {structure} check: deviation {rep.deviation:.3e}")
        rep = check_structure(conj, "hermitian", tol=1e-10 * max(1.0, max_norm(conj)))
        if not rep.passed:
            raise StructureError(f"conjugate operator is not Hermitian: deviation {rep.deviation:.3e}")
        object.__setattr__(self, "main", main)
        object.__setattr__(self, "conjugate", conj)

    @classmethod
    def discrete(cls, unitary, conjugate):
        return cls(main=unitary, conjugate=conjugate, kind="discrete")

    @classmethod
    def continuous(cls, generator, conjugate):
        return cls(main=generator, conjugate=conjugate, kind="continuous")

    @property
    def dim(self):
        return self.main.shape[0]


def _assert_hermitian(m, context, tol_scale):
    dev = max_norm(m - m.conj().T)
    tol = 1e-10 * tol_scale
    if dev > tol:
        raise StructureError(
            f"{context} is not Hermitian (deviation {dev:.3e} > {tol:.3e}); "
            "check the structure of the input pair"
        )


def unitary_symbol(pair):
    """Commutator symbol ``(A U - U A) U*`` of a discrete pair.

    The result is Hermitian whenever ``U`` is unitary and ``A`` Hermitian; a
    violation is reported as a StructureError rather than silently averaged
    away.
    """
    if pair.kind != "discrete":
        raise ValueError("unitary_symbol needs a discrete pair")
    u, a = pair.main, pair.conjugate
    m = (a @ u - u @ a) @ u.conj().T
    _assert_hermitian(m, "commutator symbol", max(1.0, max_norm(a)))
    return m


def selfadjoint_symbol(pair):
    """Resolvent-sandwiched symbol ``(H+i)^{-1} i[H, A] (H-i)^{-1}``."""
    if pair.kind != "continuous":
        raise ValueError("selfadjoint_symbol needs a continuous pair")
    h, a = pair.main, pair.conjugate
    eye = np.eye(h.shape[0])
    inner = 1j * (h @ a - a @ h)
    x = np.linalg.solve(h + 1j * eye, inner)
    # right-multiplying by (H - i)^{-1} == solving against (H + i) from the left of X*
    m = np.linalg.solve(h + 1j * eye, x.conj().T).conj().T
    _assert_hermitian(m, "resolvent-sandwiched symbol", max(1.0, max_norm(a)))
    return m


def birkhoff_discrete(unitary, symbol, steps):
    """Average ``(1/N) sum_{n<N} U^n M U^{-n}`` with a fixed summation order."""
    u = as_square_matrix(unitary, "unitary")
    m = as_square_matrix(symbol, "symbol")
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    total = m.copy()
    current = m
    uh = u.conj().T
    for _ in range(steps - 1):
        current = u @ current @ uh
        total += current
    return total / steps


@dataclass(frozen=True)
class QuadratureRule:
    """Composite-Simpson settings for time averages of conjugated symbols."""

    initial_intervals: int = 8
    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_intervals: int = 1 << 16


@dataclass(frozen=True)
class QuadratureResult:
    value: np.ndarray
    error_estimate: float
    intervals: int


def _simpson_average(gap_matrix, coeff, duration, intervals):
    # composite Simpson for (1/t) * int_0^t exp(i s gap) ds, applied entrywise
    nodes = np.linspace(0.0, duration, intervals + 1)
    weights = np.ones(intervals + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    weights *= duration / (3.0 * intervals)
    acc = np.zeros_like(coeff)
    chunk = 512
    flat = gap_matrix.reshape(-1)
    for start in range(0, nodes.size, chunk):
        s = nodes[start : start + chunk]
        w = weights[start : start + chunk]
        phases = np.exp(1j * s[:, None] * flat[None, :])
        acc += (w @ phases).reshape(coeff.shape)
    return coeff * acc / duration


def birkhoff_continuous(generator, symbol, duration, rule=None):
    """Time average ``(1/t) int_0^t e^{isH} M e^{-isH} ds`` by adaptive Simpson.

    The propagators come from a single eigendecomposition of ``H``; interval
    counts double until the Richardson estimate ``||S_2n - S_n|| / 15`` falls
    below the rule's tolerances.  The reported error estimate never drops
    below the roundoff floor of the summation.
    """
    rule = rule or QuadratureRule()
    h = as_square_matrix(generator, "generator")
    m = as_square_matrix(symbol, "symbol")
    duration = float(duration)
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    eigvals, eigvecs = np.linalg.eigh((h + h.conj().T) / 2.0)
    coeff = eigvecs.conj().T @ m @ eigvecs
    gaps = eigvals[:, None] - eigvals[None, :]
    floor = 64.0 * np.finfo(float).eps * max(1.0, spectral_norm(m))

    intervals = max(2, rule.initial_intervals)
    if intervals % 2:
        intervals += 1
    coarse = _simpson_average(gaps, coeff, duration, intervals)
    while True:
        fine = _simpson_average(gaps, coeff, duration, 2 * intervals)
        estimate = spectral_norm(fine - coarse) / 15.0
        intervals *= 2
        if estimate <= rule.rel_tol * max(spectral_norm(fine), 1e-30) + rule.abs_tol:
            break
        if intervals >= rule.max_intervals:
            raise QuadratureError(
                f"quadrature did not reach tolerance within {rule.max_intervals} "
                f"intervals (last estimate {estimate:.3e})"
            )
        coarse = fine
    value = eigvecs @ fine @ eigvecs.conj().T
    value = (value + value.conj().T) / 2.0
    return QuadratureResult(value=value, error_estimate=float(max(estimate, floor)), intervals=intervals)


@dataclass(frozen=True)
class IdentityCheck:
    steps: int
    residual: float
    expected: float
    passed: bool


def degree_identity_check(pair, steps):
    """Residual of the exact identity ``[A, U^N] = N * D_N * U^N``."""
    if pair.kind != "discrete":
        raise ValueError("degree_identity_check needs a discrete pair")
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    u, a = pair.main, pair.conjugate
    power = np.linalg.matrix_power(u, steps)
    avg = birkhoff_discrete(u, unitary_symbol(pair), steps)
    residual = spectral_norm((a @ power - power @ a) - steps * (avg @ power))
    expected = pair.dim * 1e-12 * (spectral_norm(a) + steps * spectral_norm(avg))
    return IdentityCheck(steps=steps, residual=residual, expected=expected, passed=residual <= expected)


def degree_alternative(pair, steps):
    """Equivalent degree formula ``(1/N) [A, U^N] U^{-N}``."""
    if pair.kind != "discrete":
        raise ValueError("degree_alternative needs a discrete pair")
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    u, a = pair.main, pair.conjugate
    power = np.linalg.matrix_power(u, steps)
    return (a @ power - power @ a) @ power.conj().T / steps


@dataclass
class DegreeEstimate:
    """Schedule of Birkhoff averages with Cauchy-gap convergence evidence.

    ``limit`` is the final average.  ``converged`` means every gap over the
    last third of the schedule sits below ``gap_threshold`` and each probe
    residual sequence decays; ``diverging`` flags a non-decreasing gap trend
    over that same stretch.  On finite truncations these are surrogates for
    an operator limit, and they are reported as such rather than hidden.
    """

    kind: str
    schedule: list
    averages: list
    limit: np.ndarray
    cauchy_gaps: list
    probe_residuals: list
    gap_threshold: float
    converged: bool
    diverging: bool
    quadrature: list | None = field(default=None)

    def to_payload(self):
        payload = {
            "format": DEGREE_ESTIMATE_FORMAT,
            "version": DEGREE_ESTIMATE_VERSION,
            "kind": self.kind,
            "schedule": [float(s) for s in self.schedule],
            "cauchy_gaps": [float(g) for g in self.cauchy_gaps],
            "probe_residuals": [[float(r) for r in row] for row in self.probe_residuals],
            "gap_threshold": float(self.gap_threshold),
            "converged": bool(self.converged),
            "diverging": bool(self.diverging),
            "limit": matrix_to_payload(self.limit),
        }
        if self.quadrature is not None:
            payload["quadrature"] = self.quadrature
        return payload

    def to_json(self):
        return json.dumps(self.to_payload())


def _convergence_flags(gaps, residual_rows, threshold):
    if not gaps:
        return True, False
    tail_start = max(0, len(gaps) - max(1, len(gaps) // 3))
    tail = gaps[tail_start:]
    gaps_ok = all(g <= threshold for g in tail)
    probes_ok = True
    for row in residual_rows:
        # ignore the final entry: the residual against the last average is 0 there
        seq = row[:-1] if len(row) > 1 else row
        start = max(0, len(seq) - max(1, len(seq) // 3))
        window = seq[start:]
        for earlier, later in zip(window, window[1:]):
            if later > earlier * 1.1 + threshold:
                probes_ok = False
    converged = gaps_ok and probes_ok
    trending_up = len(tail) >= 2 and all(b >= a * (1.0 - 1e-12) for a, b in zip(tail, tail[1:]))
    diverging = (not converged) and trending_up and tail[-1] > threshold
    return converged, diverging


def estimate_degree(pair, schedule, probes=(), gap_threshold=1e-6, rule=None):
    """Estimate the degree operator along an increasing schedule of horizons.

    Discrete pairs reuse one running sum, so the cost is a single pass to the
    final horizon.  Continuous pairs run one quadrature per schedule entry and
    report per-entry diagnostics.  Probes must be unit vectors; each row of
    ``probe_residuals`` tracks ``||(D_k - limit) probe||`` along the schedule.
    """
    schedule = list(schedule)
    if not schedule:
        raise ValueError("schedule must be nonempty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    probe_vecs = []
    for p in probes:
        v = np.asarray(p, dtype=complex).reshape(-1)
        if v.shape[0] != pair.dim:
            raise ValueError("probe dimension mismatch")
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValueError("probes must be normalized")
        probe_vecs.append(v)

    averages = []
    quad_info = None
    if pair.kind == "discrete":
        horizons = [int(s) for s in schedule]
        if horizons[0] < 1:
            raise ValueError("discrete schedule entries must be >= 1")
        u = pair.main
        uh = u.conj().T
        symbol = unitary_symbol(pair)
        total = np.zeros_like(symbol)
        current = None
        done = 0
        for n in horizons:
            while done < n:
                current = symbol if current is None else u @ current @ uh
                total += current
                done += 1
            averages.append(total / n)
    else:
        if schedule[0] <= 0:
            raise ValueError("continuous schedule entries must be positive")
        symbol = selfadjoint_symbol(pair)
        quad_info = []
        for t in schedule:
            res = birkhoff_continuous(pair.main, symbol, t, rule=rule)
            averages.append(res.value)
            quad_info.append(
                {"duration": float(t), "intervals": res.intervals, "error_estimate": res.error_estimate}
            )

    limit = averages[-1]
    gaps = [spectral_norm(b - a) for a, b in zip(averages, averages[1:])]
    residual_rows = [[float(np.linalg.norm((avg - limit) @ v)) for avg in averages] for v in probe_vecs]
    converged, diverging = _convergence_flags(gaps, residual_rows, gap_threshold)
    return DegreeEstimate(
        kind=pair.kind,
        schedule=schedule,
        averages=averages,
        limit=limit,
        cauchy_gaps=gaps,
        probe_residuals=residual_rows,
        gap_threshold=gap_threshold,
        converged=converged,
        diverging=diverging,
        quadrature=quad_info,
    )


def epsilon_commutator(operator, conjugate, epsilon):
    """Regularized commutator ``[iS, A_eps]`` with ``A_eps = (e^{i eps A} - 1)/(i eps)``.

    ``A_eps`` is bounded for every ``eps != 0`` even when ``A`` itself has bad
    scaling, and ``[iS, A_eps] -> [iS, A]`` linearly in ``eps``.
    """
    s = as_square_matrix(operator, "operator")
    a = as_square_matrix(conjugate, "conjugate")
    eps = float(epsilon)
    if eps == 0.0:
        raise ValueError("epsilon must be nonzero")
    eigvals, eigvecs = np.linalg.eigh((a + a.conj().T) / 2.0)
    mapped = (np.exp(1j * eps * eigvals) - 1.0) / (1j * eps)
    a_eps = (eigvecs * mapped) @ eigvecs.conj().T
    return 1j * (s @ a_eps - a_eps @ s)


def epsilon_commutator_slope(operator, conjugate, epsilons):
    """Log-log convergence rate of ``[iS, A_eps]`` toward ``[iS, A]``.

    Returns ``(slope, errors)`` from a least-squares fit of ``log err`` against
    ``log eps``; a healthy first-order regularization sits near slope 1.
    """
    s = as_square_matrix(operator, "operator")
    a = as_square_matrix(conjugate, "conjugate")
    exact = 1j * (s @ a - a @ s)
    errors = [spectral_norm(epsilon_commutator(s, a, eps) - exact) for eps in epsilons]
    xs = np.log(np.asarray(epsilons, dtype=float))
    ys = np.log(np.maximum(errors, 1e-300))
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, errors


@dataclass(frozen=True)
class SmoothWindow:
    """C^k bump supported on ``[lower, upper]`` with ``0 < lower < upper``.

    Built from polynomial smoothstep ramps of the given order (order 5 gives a
    C^5 junction), with a flat plateau ``[lower + ramp, upper - ramp]`` at
    height 1.  Because the support stays away from 0, ``window(x)/x`` is a
    bounded function that vanishes near the origin.
    """

    lower: float
    upper: float
    order: int = 5
    ramp: float = None

    def __post_init__(self):
        if not (0.0 < self.lower < self.upper):
            raise ValueError("window support must satisfy 0 < lower < upper")
        ramp = self.ramp if self.ramp is not None else (self.upper - self.lower) / 4.0
        if not (0.0 < ramp <= (self.upper - self.lower) / 2.0):
            raise ValueError("ramp must be positive and at most half the support width")
        object.__setattr__(self, "ramp", float(ramp))

    def _smoothstep(self, t):
        t = np.clip(t, 0.0, 1.0)
        n = self.order
        acc = np.zeros_like(t)
        for k in range(n + 1):
            acc += math.comb(n + k, k) * math.comb(2 * n + 1, n - k) * (-t) ** k
        return t ** (n + 1) * acc

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        rise = self._smoothstep((x - self.lower) / self.ramp)
        fall = self._smoothstep((self.upper - x) / self.ramp)
        return rise * fall

    @property
    def plateau(self):
        return (self.lower + self.ramp, self.upper - self.ramp)


@dataclass(frozen=True)
class MixingBound:
    steps: int
    lhs: float
    rhs: float
    cauchy_term: float
    commutator_term: float

    @property
    def satisfied(self):
        return self.lhs <= self.rhs + 1e-9


def project_onto_window(degree, window, vector):
    """Project onto the eigenspaces where the window plateaus at 1, then normalize."""
    d = as_square_matrix(degree, "degree")
    eigvals, eigvecs = np.linalg.eigh((d + d.conj().T) / 2.0)
    mask = window(eigvals) >= 1.0 - 1e-12
    v = np.asarray(vector, dtype=complex).reshape(-1)
    out = eigvecs[:, mask] @ (eigvecs[:, mask].conj().T @ v)
    norm = np.linalg.norm(out)
    if norm == 0.0:
        raise ValueError("vector has no component in the window plateau")
    return out / norm


def mixing_bound(pair, degree, window, phi, psi, steps, precondition_tol=1e-8):
    """Evaluate both sides of the windowed correlation bound.

    ``phi`` must already satisfy ``phi = window(D) phi`` (project first, e.g.
    with :func:`project_onto_window`); the bound then reads

        |<phi, U^N psi>|  <=  ||(D_N - D) D^{-1} w(D) phi|| ||psi||
                              + (1/N)(||A x|| ||psi|| + ||x|| ||A psi||)

    with ``x = D^{-1} w(D) phi``, and holds exactly for any Hermitian ``D``.
    """
    if pair.kind != "discrete":
        raise ValueError("mixing_bound needs a discrete pair")
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    d = as_square_matrix(degree, "degree")
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if phi.shape[0] != pair.dim or psi.shape[0] != pair.dim:
        raise ValueError("vector dimension mismatch")

    eigvals, eigvecs = np.linalg.eigh((d + d.conj().T) / 2.0)
    weights = window(eigvals)
    windowed = eigvecs @ (weights * (eigvecs.conj().T @ phi))
    drift = np.linalg.norm(phi - windowed)
    if drift > precondition_tol * max(np.linalg.norm(phi), 1e-300):
        raise ValueError(
            f"phi is not window-invariant (||phi - w(D) phi|| = {drift:.3e}); "
            "project it onto the window plateau first"
        )
    inv_weights = np.where(weights > 0.0, weights / np.where(weights > 0.0, eigvals, 1.0), 0.0)
    x = eigvecs @ (inv_weights * (eigvecs.conj().T @ phi))

    u, a = pair.main, pair.conjugate
    avg = birkhoff_discrete(u, unitary_symbol(pair), steps)
    shifted = psi.copy()
    for _ in range(steps):
        shifted = u @ shifted
    lhs = abs(np.vdot(phi, shifted))
    norm_psi = float(np.linalg.norm(psi))
    cauchy_term = float(np.linalg.norm((avg - d) @ x)) * norm_psi
    commutator_term = (
        float(np.linalg.norm(a @ x)) * norm_psi + float(np.linalg.norm(x)) * float(np.linalg.norm(a @ psi))
    ) / steps
    return MixingBound(
        steps=steps,
        lhs=float(lhs),
        rhs=cauchy_term + commutator_term,
        cauchy_term=cauchy_term,
        commutator_term=commutator_term,
    )


def tilde_conjugate(pair):
    """Bounded conjugate ``(H+i)^{-1} A (H-i)^{-1}`` of a continuous pair."""
    if pair.kind != "continuous":
        raise ValueError("tilde_conjugate needs a continuous pair")
    h, a = pair.main, pair.conjugate
    eye = np.eye(h.shape[0])
    x = np.linalg.solve(h + 1j * eye, a)
    m = np.linalg.solve(h + 1j * eye, x.conj().T).conj().T
    _assert_hermitian(m, "tilde conjugate", max(1.0, max_norm(a)))
    return m


@dataclass(frozen=True)
class FlowIdentityCheck:
    duration: float
    residual: float
    error_estimate: float
    intervals: int
    passed: bool


def flow_identity_check(pair, duration, rule=None):
    """Residual of the exact flow identity ``[A~, e^{-itH}] = t e^{-itH} D_t``.

    The identity is exact in finite dimension, so the residual is limited by
    the quadrature error in ``D_t``; ``passed`` compares against ten times the
    reported estimate.
    """
    if pair.kind != "continuous":
        raise ValueError("flow_identity_check needs a continuous pair")
    duration = float(duration)
    if duration < 0.0:
        raise ValueError("duration must be nonnegative")
    h = pair.main
    a_tilde = tilde_conjugate(pair)
    floor = 64.0 * np.finfo(float).eps * max(1.0, spectral_norm(pair.conjugate))
    if duration == 0.0:
        return FlowIdentityCheck(duration=0.0, residual=0.0, error_estimate=floor, intervals=0, passed=True)
    eigvals, eigvecs = np.linalg.eigh((h + h.conj().T) / 2.0)
    propagator = (eigvecs * np.exp(-1j * duration * eigvals)) @ eigvecs.conj().T
    quad = birkhoff_continuous(h, selfadjoint_symbol(pair), duration, rule=rule)
    residual = spectral_norm(
        (a_tilde @ propagator - propagator @ a_tilde) - duration * (propagator @ quad.value)
    )
    estimate = max(duration * quad.error_estimate, floor)
    return FlowIdentityCheck(
        duration=duration,
        residual=float(residual),
        error_estimate=float(estimate),
        intervals=quad.intervals,
        passed=residual <= 10.0 * estimate,
    )
