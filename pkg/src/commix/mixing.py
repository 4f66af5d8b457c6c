"""Correlation decay diagnostics: series, summability, spectra, Fourier tails.

Everything here consumes plain dense matrices and vectors.  The routines are
deliberately model-agnostic; the model constructors in :mod:`commix.skew` and
:mod:`commix.graphs` produce inputs for them.
"""

from __future__ import annotations

import io

import numpy as np

from .errors import ResolutionError, SchemaError, StructureError
from .operators import (
    as_square_matrix,
    check_structure,
    functional_calculus,
    max_norm,
    spectral_norm,
)

__all__ = [
    "CorrelationSeries",
    "correlation_discrete",
    "correlation_continuous",
    "SummabilityReport",
    "summability_report",
    "DecayReport",
    "decay_report",
    "PerpSpectrumReport",
    "eigen_in_perp",
    "FourierCalculus",
    "fourier_calculus",
]

SERIES_FORMAT = "correlation-series"
SERIES_VERSION = 1
FOURIER_FORMAT = "fourier-series"
FOURIER_VERSION = 1


class CorrelationSeries:
    """Sampled correlation function with cumulative squared mass.

    ``abscissae`` are the sample points (integer horizons or real times),
    ``values`` the complex correlations.  ``partial_l2[k]`` accumulates the
    squared modulus up to sample ``k``: a plain running sum for discrete
    series, trapezoidal in the abscissa for continuous ones.
    """

    def __init__(self, abscissae, values, kind):
        self.abscissae = np.asarray(abscissae, dtype=float).reshape(-1)
        self.values = np.asarray(values, dtype=complex).reshape(-1)
        if self.abscissae.shape != self.values.shape:
            raise ValueError("abscissae and values must have equal length")
        if kind not in ("discrete", "continuous"):
            raise ValueError(f"kind must be 'discrete' or 'continuous', got {kind!r}")
        self.kind = kind
        sq = np.abs(self.values) ** 2
        if kind == "discrete":
            self.partial_l2 = np.cumsum(sq)
        else:
            steps = np.diff(self.abscissae)
            if np.any(steps <= 0):
                raise ValueError("continuous abscissae must be strictly increasing")
            inc = 0.5 * (sq[1:] + sq[:-1]) * steps
            self.partial_l2 = np.concatenate([[0.0], np.cumsum(inc)])

    def __len__(self):
        return self.values.shape[0]

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# {SERIES_FORMAT} v{SERIES_VERSION} kind={self.kind}\n")
        buf.write("abscissa,re,im,abs,partial_l2\n")
        for x, v, p in zip(self.abscissae, self.values, self.partial_l2):
            buf.write(f"{float(x)!r},{float(v.real)!r},{float(v.imag)!r},{abs(complex(v))!r},{float(p)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise SchemaError("missing correlation-series header comment")
        header = lines[0][1:].split()
        if len(header) < 3 or header[0] != SERIES_FORMAT or header[1] != f"v{SERIES_VERSION}":
            raise SchemaError(f"unsupported series header: {lines[0]!r}")
        kind = None
        for tok in header[2:]:
            if tok.startswith("kind="):
                kind = tok[5:]
        if kind is None:
            raise SchemaError("series header lacks kind=")
        if lines[1] != "abscissa,re,im,abs,partial_l2":
            raise SchemaError(f"unexpected column row: {lines[1]!r}")
        abscissae, values = [], []
        for ln in lines[2:]:
            parts = ln.split(",")
            if len(parts) != 5:
                raise SchemaError(f"malformed series row: {ln!r}")
            try:
                abscissae.append(float(parts[0]))
                values.append(complex(float(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise SchemaError(f"non-numeric series row: {ln!r}") from exc
        return cls(abscissae, values, kind)


def correlation_discrete(unitary, phi, psi, horizon):
    """Series ``c_N = <phi, U^N psi>`` for ``N = 1..horizon`` by iterated application."""
    u = as_square_matrix(unitary, "unitary")
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    values = np.empty(horizon, dtype=complex)
    current = psi
    for n in range(horizon):
        current = u @ current
        values[n] = np.vdot(phi, current)
    return CorrelationSeries(np.arange(1, horizon + 1), values, "discrete")


def correlation_continuous(generator, phi, psi, times):
    """Series ``c_t = <phi, e^{-itH} psi>`` evaluated through one eigendecomposition."""
    h = as_square_matrix(generator, "generator")
    rep = check_structure(h, "hermitian", tol=1e-8 * max(1.0, max_norm(h)))
    if not rep.passed:
        raise StructureError(f"generator is not Hermitian: deviation {rep.deviation:.3e}")
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    times = np.asarray(times, dtype=float).reshape(-1)
    eigvals, eigvecs = np.linalg.eigh((h + h.conj().T) / 2.0)
    alpha = eigvecs.conj().T @ phi
    beta = eigvecs.conj().T @ psi
    phases = np.exp(-1j * times[:, None] * eigvals[None, :])
    values = phases @ (np.conj(alpha) * beta)
    return CorrelationSeries(times, values, "continuous")


class SummabilityReport:
    """Verdict on whether a correlation series has square-summable tails.

    ``saturating`` asks whether the cumulative squared mass has flattened:
    the increments over the last third must contribute at most ``rel_tail``
    of the total, or the total itself must sit below ``abs_floor``.  ``tail_slope`` is the log-log slope of the squared-modulus
    increments over the last half of the series (NaN when fewer than four
    positive increments are available).  For a power tail with slope < -1 the
    report extrapolates the remaining mass; otherwise the extrapolated total
    is infinite.
    """

    def __init__(self, series, rel_tail=1e-4, abs_floor=1e-28):
        if len(series) < 16:
            raise ValueError("summability needs at least 16 samples")
        self.series = series
        self.rel_tail = float(rel_tail)
        total = float(series.partial_l2[-1])
        self.total = total

        n = len(series)
        tail_start = n - n // 3
        tail_mass = total - float(series.partial_l2[tail_start - 1])
        self.tail_mass = tail_mass
        # a series that never rises above roundoff is trivially summable
        self.saturating = total <= abs_floor or tail_mass <= rel_tail * total

        half = n // 2
        xs = series.abscissae[half:]
        inc = np.abs(series.values[half:]) ** 2
        keep = inc > 0
        if keep.sum() >= 4:
            coeff = np.polyfit(np.log(xs[keep]), np.log(inc[keep]), 1)
            self.tail_slope = float(coeff[0])
            self._tail_intercept = float(coeff[1])
        else:
            self.tail_slope = float("nan")
            self._tail_intercept = float("nan")

        if np.isfinite(self.tail_slope) and self.tail_slope < -1.0:
            h = float(series.abscissae[-1])
            rest = np.exp(self._tail_intercept) * h ** (self.tail_slope + 1.0) / (-self.tail_slope - 1.0)
            self.extrapolated_total = total + float(rest)
        else:
            self.extrapolated_total = float("inf")

    def summary(self):
        return {
            "total": self.total,
            "tail_mass": self.tail_mass,
            "saturating": bool(self.saturating),
            "tail_slope": self.tail_slope,
            "extrapolated_total": self.extrapolated_total,
        }


class DecayReport:
    """Crude mixing check: late-window peak against early-window peak."""

    def __init__(self, series, fraction=0.1):
        n = len(series)
        if n < 8:
            raise ValueError("decay check needs at least 8 samples")
        quarter = max(1, n // 4)
        head = np.max(np.abs(series.values[:quarter]))
        tail = np.max(np.abs(series.values[-quarter:]))
        self.head_peak = float(head)
        self.tail_peak = float(tail)
        self.fraction = float(fraction)
        self.decaying = tail <= fraction * head


def decay_report(series, fraction=0.1):
    return DecayReport(series, fraction=fraction)


def summability_report(series, rel_tail=1e-4):
    return SummabilityReport(series, rel_tail=rel_tail)


class PerpSpectrumReport:
    """Eigenpairs of an operator compressed to the complement of a kernel.

    The compression ``B = Q* S Q`` uses an orthonormal basis ``Q`` of the
    complement; eigenvectors are lifted back and their residuals
    ``||S w - lambda w||`` are measured against the full matrix.  A finite
    truncation of an infinite model happily produces small residuals here
    even when the infinite operator has no point spectrum at all, so treat
    these numbers as statements about the matrix given, nothing more.
    """

    def __init__(self, eigenvalues, vectors, residuals, hermitian):
        self.eigenvalues = eigenvalues
        self.vectors = vectors
        self.residuals = residuals
        self.hermitian = hermitian

    def below_residual(self, cutoff):
        return [i for i, r in enumerate(self.residuals) if r < cutoff]


def eigen_in_perp(operator, split):
    """Diagonalize ``operator`` compressed to the complement encoded by ``split``."""
    s = as_square_matrix(operator, "operator")
    p_perp = split.P_perp
    if p_perp.shape != s.shape:
        raise ValueError("kernel split dimension mismatch")
    eigvals, eigvecs = np.linalg.eigh((p_perp + p_perp.conj().T) / 2.0)
    cols = eigvecs[:, eigvals > 0.5]
    if cols.shape[1] == 0:
        return PerpSpectrumReport(np.zeros(0, complex), np.zeros((s.shape[0], 0), complex), [], True)
    b = cols.conj().T @ s @ cols
    herm = max_norm(b - b.conj().T) <= 1e-10 * max(1.0, max_norm(b))
    if herm:
        vals, vecs = np.linalg.eigh((b + b.conj().T) / 2.0)
        vals = vals.astype(complex)
    else:
        vals, vecs = np.linalg.eig(b)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    vecs = vecs[:, order]
    lifted = cols @ vecs
    residuals = [
        float(np.linalg.norm(s @ lifted[:, k] - vals[k] * lifted[:, k])) for k in range(vals.shape[0])
    ]
    return PerpSpectrumReport(vals, lifted, residuals, herm)


class FourierCalculus:
    """Fourier-series functional calculus for a unitary, with tail control.

    Coefficients come from an FFT over ``grid`` equispaced points of the
    circle; the reconstruction sums ``c_n U^n`` for ``|n| <= n_max``.  With a
    smoothness exponent ``gamma`` the coefficient envelope
    ``C (1+|n|)^{-(2+gamma)}`` yields an a-priori tail bound that must
    dominate the observed reconstruction error.
    """

    def __init__(self, unitary, fn, n_max, gamma, grid=None):
        u = as_square_matrix(unitary, "unitary")
        rep = check_structure(u, "unitary", tol=1e-8 * max(1.0, max_norm(u)))
        if not rep.passed:
            raise StructureError(f"matrix is not unitary: deviation {rep.deviation:.3e}")
        n_max = int(n_max)
        if n_max < 8:
            raise ValueError("n_max must be >= 8")
        grid = int(grid) if grid is not None else 4 * n_max
        if grid < 4 * n_max:
            raise ValueError("grid must be at least 4 * n_max")
        gamma = float(gamma)
        if gamma <= 0:
            raise ValueError("gamma must be positive")

        theta = 2.0 * np.pi * np.arange(grid) / grid
        samples = np.asarray(fn(theta), dtype=complex)
        if samples.shape != theta.shape:
            raise ValueError("fn must map a sample array to an equal-length array")
        coeffs = np.fft.fft(samples) / grid

        # an occupied top octave means the sampling grid cannot separate the
        # requested band from its aliases
        octave = coeffs[grid // 2 - grid // 16 : grid // 2 + grid // 16]
        scale = np.max(np.abs(coeffs)) or 1.0
        if np.max(np.abs(octave)) > 1e-8 * scale:
            raise ResolutionError(
                "sample spectrum reaches the top octave of the grid; "
                "increase grid or smooth the symbol"
            )

        ns = np.arange(-n_max, n_max + 1)
        self.indices = ns
        self.coefficients = coeffs[ns % grid]
        self.gamma = gamma
        self.n_max = n_max
        self.grid = grid

        # incremental two-sided reconstruction: one multiplication per order
        eye = np.eye(u.shape[0], dtype=complex)
        recon = self.coefficients[n_max] * eye
        fwd = eye
        bwd = eye
        uh = u.conj().T
        for n in range(1, n_max + 1):
            fwd = fwd @ u
            bwd = bwd @ uh
            recon += self.coefficients[n_max + n] * fwd + self.coefficients[n_max - n] * bwd
        self.reconstruction = recon

        direct = functional_calculus(u, lambda z: fn(np.angle(z) % (2.0 * np.pi)))
        self.recon_error = spectral_norm(recon - direct)

        mags = np.abs(self.coefficients)
        envelope = (1.0 + np.abs(ns)) ** (2.0 + gamma)
        self.holder_constant = float(np.max(mags * envelope))

        fit_mask = (np.abs(ns) >= 8) & (mags > 0)
        if fit_mask.sum() >= 4:
            self.decay_exponent = float(
                np.polyfit(np.log1p(np.abs(ns[fit_mask])), np.log(mags[fit_mask]), 1)[0]
            )
        else:
            self.decay_exponent = float("nan")

        # sum_{|n| > n_max} C (1+|n|)^{-(2+gamma)}, integral remainder
        p = 2.0 + gamma
        tail = 2.0 * self.holder_constant * (1.0 + n_max) ** (1.0 - p) / (p - 1.0)
        self.tail_bound = float(tail)

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# {FOURIER_FORMAT} v{FOURIER_VERSION} n_max={self.n_max} gamma={self.gamma!r}\n")
        buf.write("n,re,im,abs\n")
        for n, c in zip(self.indices, self.coefficients):
            buf.write(f"{int(n)},{float(c.real)!r},{float(c.imag)!r},{abs(complex(c))!r}\n")
        return buf.getvalue()


def fourier_calculus(unitary, fn, n_max, gamma, grid=None):
    return FourierCalculus(unitary, fn, n_max, gamma, grid=grid)
