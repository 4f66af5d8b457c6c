"""Skew-product models over torus translations.

Concrete builders for the worked examples: abelian sector operators driven by
a winding-plus-perturbation cocycle, their scalar degree fields, SU(2)-valued
cocycles with matrix degree fields, the frequency-separation arithmetic for
the two-frequency unitary family, and the cyclic shift/position pair.

Sector operators are applied function-analytically on periodic grids; the
matrix truncation exists as a cross-check and for spectral sweeps.  All grid
resolutions are powers of two so spectral interpolation is exact on
band-limited data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .commutators import OperatorPair
from .errors import RationalApproximationWarning, ResolutionError, StructureError
from .mixing import CorrelationSeries

__all__ = [
    "TorusFlow",
    "RationalProximity",
    "GridField",
    "unit_grid",
    "TorusCocycle",
    "flow_step",
    "cocycle_sum",
    "sector_apply",
    "sector_matrix",
    "sector_correlation",
    "TorusDegreeReport",
    "torus_degree_field",
    "su2_irrep",
    "SU2Cocycle",
    "SU2DegreeReport",
    "su2_degree_field",
    "FrequencySeparation",
    "u2_frequency_separation",
    "ShiftModel",
    "shift_weyl_model",
    "TruncationSweepEntry",
    "sector_truncation_sweep",
]


@dataclass(frozen=True)
class RationalProximity:
    component: int
    numerator: int
    denominator: int
    error: float


class TorusFlow:
    """Translation flow x -> x + t*y (mod 1) on the d-torus.

    Irrationality of the translation vector cannot be certified in floating
    point; instead every component is compared against its best rational
    approximation with denominator at most ``max_denominator`` and a warning
    is emitted when the distance falls below ``warn_tol``.
    """

    def __init__(self, y, max_denominator=10**4, warn_tol=1e-10):
        arr = np.atleast_1d(np.asarray(y, dtype=float))
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("translation vector must be one-dimensional and nonempty")
        if not np.all((arr > 0.0) & (arr < 1.0)):
            raise ValueError("translation components must lie in (0, 1)")
        self.y = arr
        self.d = arr.size
        self.rationality = []
        for i, yi in enumerate(arr):
            frac = Fraction(yi).limit_denominator(max_denominator)
            err = abs(yi - float(frac))
            self.rationality.append(
                RationalProximity(i, frac.numerator, frac.denominator, err)
            )
            if err < warn_tol:
                warnings.warn(
                    f"translation component {i} = {yi!r} is within {err:.2e} of "
                    f"{frac.numerator}/{frac.denominator}; orbits will be nearly periodic",
                    RationalApproximationWarning,
                    stacklevel=2,
                )

    def advance(self, x, t=1.0):
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return np.mod(x + t * self.y[0], 1.0)
        if x.shape[-1:] != (self.d,):
            raise ValueError(f"points must have a trailing axis of length {self.d}")
        return np.mod(x + t * self.y, 1.0)


def flow_step(flow, x, t=1.0):
    return flow.advance(x, t)


def unit_grid(shape):
    """Coordinate arrays of the uniform grid {0, 1/m, ..., (m-1)/m} per axis."""
    shape = tuple(int(m) for m in shape)
    axes = [np.arange(m) / m for m in shape]
    if len(shape) == 1:
        return axes[0]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _check_power_of_two(m):
    return m >= 2 and (m & (m - 1)) == 0


class GridField:
    """Complex samples on a uniform periodic grid, power-of-two per axis."""

    def __init__(self, values):
        v = np.asarray(values, dtype=complex)
        if v.ndim < 1:
            raise ValueError("field values must have at least one axis")
        for m in v.shape:
            if not _check_power_of_two(m):
                raise ValueError(f"grid sizes must be powers of two, got {v.shape}")
        self.values = v

    @property
    def shape(self):
        return self.values.shape

    @classmethod
    def from_modes(cls, modes, shape):
        shape = tuple(int(m) for m in shape)
        coords = unit_grid(shape)
        vals = np.zeros(shape, dtype=complex)
        for k, c in modes.items():
            k = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
            if len(k) != len(shape):
                raise ValueError("mode index dimension does not match the grid")
            if len(shape) == 1:
                phase = k[0] * coords
            else:
                phase = coords @ np.asarray(k, dtype=float)
            vals += complex(c) * np.exp(2j * np.pi * phase)
        return cls(vals)

    def _frequencies(self):
        return [np.fft.fftfreq(m) * m for m in self.values.shape]

    def shift(self, delta):
        """Translated field x -> f(x + delta), exact on band-limited data."""
        delta = np.atleast_1d(np.asarray(delta, dtype=float))
        if delta.size != self.values.ndim:
            raise ValueError("shift vector dimension mismatch")
        total = np.zeros(self.values.shape)
        for axis, freq in enumerate(self._frequencies()):
            axis_shape = [1] * self.values.ndim
            axis_shape[axis] = -1
            total = total + freq.reshape(axis_shape) * delta[axis]
        spec = np.fft.fftn(self.values) * np.exp(2j * np.pi * total)
        return GridField(np.fft.ifftn(spec))

    def mean(self):
        return complex(self.values.mean())

    def inner(self, other):
        if self.values.shape != other.values.shape:
            raise ValueError("field shapes differ")
        return complex(np.vdot(self.values, other.values) / self.values.size)

    def norm(self):
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def occupied_band(self, rel_tol=1e-8):
        """Per-axis largest |frequency| carrying relative weight above rel_tol."""
        spec = np.abs(np.fft.fftn(self.values))
        peak = spec.max()
        if peak == 0.0:
            return [0] * self.values.ndim
        mask = spec > rel_tol * peak
        band = []
        for axis, freq in enumerate(self._frequencies()):
            hit = mask.any(axis=tuple(i for i in range(self.values.ndim) if i != axis))
            band.append(int(np.abs(freq[hit]).max()) if hit.any() else 0)
        return band

    def refine(self, factor):
        """Spectral upsampling by a power-of-two factor (Nyquist bins split)."""
        factor = int(factor)
        if factor < 1 or (factor & (factor - 1)):
            raise ValueError("refinement factor must be a power of two")
        if factor == 1:
            return GridField(self.values.copy())
        coeff = np.fft.fftn(self.values) / self.values.size
        for axis in range(coeff.ndim):
            coeff = _pad_modes(coeff, axis, self.values.shape[axis] * factor)
        return GridField(np.fft.ifftn(coeff) * coeff.size)


def _pad_modes(coeff, axis, new_len):
    old = coeff.shape[axis]
    shifted = np.fft.fftshift(coeff, axes=axis)
    lo = (new_len - old) // 2
    widths = [(0, 0)] * coeff.ndim
    widths[axis] = (lo, new_len - old - lo)
    padded = np.pad(shifted, widths)
    # the old -m/2 bin represents both Nyquist frequencies; split it
    take = [slice(None)] * coeff.ndim
    put = [slice(None)] * coeff.ndim
    take[axis] = lo
    put[axis] = lo + old
    padded[tuple(put)] = padded[tuple(take)] / 2.0
    padded[tuple(take)] = padded[tuple(take)] / 2.0
    return np.fft.ifftshift(padded, axes=axis)


class TorusCocycle:
    """Additive cocycle generator phi(x) = W x + eta(x) paired with a sector.

    ``winding`` is an integer r-by-d matrix, ``modes`` the finite Fourier data
    of the periodic perturbation eta: T^d -> R^r (Hermitian-symmetric, so eta
    is real), and ``sector`` an integer vector picking the character q under
    which the sector operator acts.  Only the scalar combination q.phi enters
    any computation here.
    """

    def __init__(self, winding, modes, sector):
        w = np.asarray(winding)
        if w.ndim != 2:
            raise ValueError("winding must be a matrix")
        if not np.all(w == np.round(w)):
            raise ValueError("winding matrix must have integer entries")
        self.winding = w.astype(int)
        self.r, self.d = self.winding.shape
        q = np.atleast_1d(np.asarray(sector))
        if q.shape != (self.r,) or not np.all(q == np.round(q)):
            raise ValueError(f"sector must be an integer vector of length {self.r}")
        self.sector = q.astype(int)

        parsed = {}
        for k, c in (modes or {}).items():
            key = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
            if len(key) != self.d:
                raise ValueError("mode frequency dimension does not match the base torus")
            vec = np.atleast_1d(np.asarray(c, dtype=complex))
            if vec.shape != (self.r,):
                raise ValueError(f"mode coefficients must be vectors of length {self.r}")
            parsed[key] = vec
        for k, c in parsed.items():
            mk = tuple(-v for v in k)
            if mk not in parsed or not np.allclose(parsed[mk], np.conj(c), atol=1e-12):
                raise StructureError(
                    "perturbation coefficients must be Hermitian-symmetric "
                    f"(missing or inconsistent mirror of mode {k})"
                )
        self.modes = parsed

    @property
    def sector_winding(self):
        """Integer vector W^T q: the winding seen by the chosen sector."""
        return self.winding.T @ self.sector

    def sector_modes(self):
        """Fourier data of the scalar q.eta."""
        return {k: complex(self.sector @ c) for k, c in self.modes.items()}

    def _dot_base(self, x, vec):
        x = np.asarray(x, dtype=float)
        if self.d == 1:
            return x * float(vec[0])
        if x.shape[-1:] != (self.d,):
            raise ValueError(f"points must have a trailing axis of length {self.d}")
        return x @ np.asarray(vec, dtype=float)

    def eta(self, x):
        """Perturbation values eta(x), shape = points shape + (r,)."""
        x = np.asarray(x, dtype=float)
        base_shape = x.shape if self.d == 1 else x.shape[:-1]
        out = np.zeros(base_shape + (self.r,), dtype=complex)
        for k, c in self.modes.items():
            phase = np.exp(2j * np.pi * self._dot_base(x, np.asarray(k)))
            out += phase[..., None] * c
        return out.real

    def lie_derivative_sup(self, flow):
        """Upper bound for sup |y.grad(q.eta)| from the triangle inequality."""
        total = 0.0
        for k, g in self.sector_modes().items():
            total += 2.0 * np.pi * abs(float(np.dot(k, flow.y))) * abs(g)
        return total


def _geometric_phase_sum(u, n):
    # sum_{j=0}^{n-1} exp(2 pi i j u); closed form away from integer u
    s = math.sin(math.pi * u)
    if abs(s) < 1e-9:
        return complex(np.sum(np.exp(2j * np.pi * u * np.arange(n))))
    return np.exp(1j * np.pi * (n - 1) * u) * math.sin(math.pi * n * u) / s


def cocycle_sum(cocycle, flow, x, n):
    """Accumulated sector phase q.phi^(n)(x), as an unwrapped real number.

    n >= 1 sums q.phi over the first n flow steps starting at x, n = 0 gives
    0, and negative n uses the cocycle inverse, so the cocycle law
    value(n+m, x) = value(n, x) + value(m, F_n x) holds for all integers.
    The winding part is summed in closed form (arithmetic progression), the
    perturbation part mode-by-mode through geometric phase sums.
    """
    n = int(n)
    x = np.asarray(x, dtype=float)
    if n == 0:
        base_shape = x.shape if cocycle.d == 1 else x.shape[:-1]
        return np.zeros(base_shape)
    if n < 0:
        return -cocycle_sum(cocycle, flow, flow.advance(x, n), -n)
    w = cocycle.sector_winding
    wy = float(np.dot(w, flow.y))
    lin = n * cocycle._dot_base(x, w) + wy * n * (n - 1) / 2.0
    osc = np.zeros_like(lin, dtype=complex)
    for k, g in cocycle.sector_modes().items():
        if g == 0:
            continue
        u = float(np.dot(k, flow.y))
        phase = np.exp(2j * np.pi * cocycle._dot_base(x, np.asarray(k)))
        osc += g * _geometric_phase_sum(u, n) * phase
    return lin + osc.real


def _modulation_margin(cocycle, flow, steps):
    # spectral spread of exp(2 pi i q.eta-cocycle-sum): each base mode of
    # amplitude beta radians scatters onto harmonics, negligible beyond
    # roughly |k|*(beta + 8)
    margin = np.zeros(cocycle.d, dtype=int)
    for k, g in cocycle.sector_modes().items():
        if g == 0:
            continue
        u = float(np.dot(k, flow.y))
        s = abs(math.sin(math.pi * u))
        envelope = abs(steps) if s < 1e-9 else min(abs(steps), 1.0 / s)
        beta = 2.0 * np.pi * abs(g) * envelope
        margin += np.abs(np.asarray(k)) * int(math.ceil(beta + 8.0))
    return margin


def sector_apply(cocycle, flow, field, steps, rel_band_tol=1e-8):
    """Apply the sector operator n times: (U^n f)(x) = e(q.phi^(n)(x)) f(x + ny).

    The translation acts spectrally on the grid and the accumulated phase is
    evaluated pointwise in closed form, so the result is exact in n for
    band-limited f.  Both an a-priori frequency budget and the spectrum of
    the result are checked; either failing raises ResolutionError.
    """
    steps = int(steps)
    if field.values.ndim != cocycle.d:
        raise ValueError("field dimension does not match the cocycle base")
    if steps == 0:
        return GridField(field.values.copy())
    shape = field.values.shape
    band = field.occupied_band(rel_band_tol)
    shift_freq = steps * cocycle.sector_winding
    margin = _modulation_margin(cocycle, flow, steps)
    for i, m in enumerate(shape):
        needed = abs(int(shift_freq[i])) + band[i] + int(margin[i])
        if needed >= m // 2:
            raise ResolutionError(
                f"axis {i}: predicted bandwidth {needed} exceeds the grid Nyquist "
                f"{m // 2}; enlarge the grid or reduce the step count"
            )
    coords = unit_grid(shape)
    phase = np.exp(2j * np.pi * cocycle_sum(cocycle, flow, coords, steps))
    moved = field.shift(steps * flow.y)
    out = GridField(phase * moved.values)
    out_band = out.occupied_band(rel_band_tol)
    for i, m in enumerate(shape):
        if out_band[i] >= m // 2 - m // 16:
            raise ResolutionError(
                f"axis {i}: result occupies the top of the resolvable band "
                f"({out_band[i]} of {m // 2}); aliasing suspected"
            )
    return out


def sector_matrix(cocycle, flow, size):
    """Unitary grid truncation of the sector operator, with its conjugate.

    The operator is diag(sector phase samples) composed with the spectral
    translation, a product of two unitaries, so the pair passes the strict
    structure checks regardless of resolution.  The conjugate operator is the
    flow derivative -i y.grad, diagonal in the Fourier basis.  Faithful only
    while the relevant frequency content stays below the grid Nyquist; see
    sector_apply for the function-space route free of this limit.
    """
    if cocycle.d != 1:
        raise ValueError("matrix truncation is implemented for a one-dimensional base")
    m = int(size)
    if not _check_power_of_two(m):
        raise ValueError("truncation size must be a power of two")
    x = np.arange(m) / m
    phase = np.exp(2j * np.pi * cocycle_sum(cocycle, flow, x, 1))
    freqs = np.fft.fftfreq(m) * m
    spec = np.fft.fft(np.eye(m), axis=0)
    translate = np.fft.ifft(np.exp(2j * np.pi * freqs * flow.y[0])[:, None] * spec, axis=0)
    u = phase[:, None] * translate
    a = np.fft.ifft((2.0 * np.pi * freqs * flow.y[0])[:, None] * spec, axis=0)
    a = (a + a.conj().T) / 2.0
    return OperatorPair.discrete(u, a)


def sector_correlation(cocycle, flow, phi, psi, horizon, rel_band_tol=1e-8):
    """Correlation series <phi, U^n psi> for n = 1..horizon, via closed form."""
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    values = np.empty(horizon, dtype=complex)
    for n in range(1, horizon + 1):
        values[n - 1] = phi.inner(sector_apply(cocycle, flow, psi, n, rel_band_tol))
    return CorrelationSeries(np.arange(1, horizon + 1), values, "discrete")


@dataclass
class TorusDegreeReport:
    steps: int
    field: GridField
    limit: float
    sup_error: float


def torus_degree_field(cocycle, flow, shape, steps):
    """Birkhoff average of the sector commutator symbol, as a grid field.

    The symbol is multiplication by 2 pi (q.W y + y.grad(q.eta)); averaging
    along the flow leaves the constant 2 pi q.W y plus mode-wise geometric
    sums that decay in the step count when the translation is irrational.
    Returns the field at the given horizon together with the constant limit
    and the sup-norm distance between them.
    """
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    shape = tuple(int(m) for m in shape)
    if len(shape) != cocycle.d:
        raise ValueError("grid dimension does not match the cocycle base")
    limit = 2.0 * np.pi * float(np.dot(cocycle.sector_winding, flow.y))
    coords = unit_grid(shape)
    vals = np.full(shape, limit, dtype=complex)
    for k, g in cocycle.sector_modes().items():
        if g == 0:
            continue
        u = float(np.dot(k, flow.y))
        avg = _geometric_phase_sum(u, steps) / steps
        coeff = 2.0 * np.pi * (2j * np.pi * u * g) * avg
        vals += coeff * np.exp(2j * np.pi * cocycle._dot_base(coords, np.asarray(k)))
    field = GridField(vals)
    sup_error = float(np.max(np.abs(vals - limit)))
    return TorusDegreeReport(steps=steps, field=field, limit=limit, sup_error=sup_error)


def su2_irrep(label, g):
    """Matrix of a special-unitary 2x2 element in the spin-n/2 representation.

    Acts on the orthonormalized monomial basis e_k = z1^k z2^(n-k) /
    sqrt(k!(n-k)!) of homogeneous degree-n polynomials via (pi(g)f)(z) =
    f(g^T z).  Diagonal inputs map to diag(e^{i(2k-n)theta}), and the
    assignment is a unitary representation for every n.
    """
    n = int(label)
    if n < 0:
        raise ValueError("representation label must be a nonnegative integer")
    g = np.asarray(g, dtype=complex)
    if g.shape != (2, 2):
        raise ValueError("group element must be a 2x2 matrix")
    dev = max(
        float(np.max(np.abs(g.conj().T @ g - np.eye(2)))),
        abs(complex(np.linalg.det(g)) - 1.0),
    )
    if dev > 1e-10:
        raise StructureError(f"matrix is not special-unitary (deviation {dev:.3e})")
    a, b = g[0, 0], g[0, 1]
    c, d = g[1, 0], g[1, 1]
    out = np.zeros((n + 1, n + 1), dtype=complex)
    fact = [math.factorial(j) for j in range(n + 1)]
    for ell in range(n + 1):
        for k in range(n + 1):
            acc = 0.0 + 0.0j
            for i in range(max(0, k + ell - n), min(k, ell) + 1):
                acc += (
                    math.comb(k, i)
                    * math.comb(n - k, ell - i)
                    * a**i
                    * c ** (k - i)
                    * b ** (ell - i)
                    * d ** (n - k - ell + i)
                )
            scale = math.sqrt(fact[ell] * fact[n - ell] / (fact[k] * fact[n - k]))
            out[ell, k] = scale * acc
    return out


class SU2Cocycle:
    """Conjugated-diagonal SU(2) cocycle h diag(e(theta), e(-theta)) h*.

    theta(x) = b.x + eta(x) with an integer frequency vector b != 0 and a
    real trigonometric perturbation eta given by finite Fourier data.  The
    fixed conjugator h makes accumulated cocycle products collapse to summed
    angles in the same frame, which the matrix Birkhoff machinery exploits.
    """

    def __init__(self, conjugator, frequency, modes, label):
        h = np.asarray(conjugator, dtype=complex)
        if h.shape != (2, 2):
            raise ValueError("conjugator must be a 2x2 matrix")
        dev = max(
            float(np.max(np.abs(h.conj().T @ h - np.eye(2)))),
            abs(complex(np.linalg.det(h)) - 1.0),
        )
        if dev > 1e-12:
            raise StructureError(f"conjugator is not special-unitary (deviation {dev:.3e})")
        self.conjugator = h
        b = np.atleast_1d(np.asarray(frequency))
        if not np.all(b == np.round(b)) or not np.any(b):
            raise ValueError("frequency must be a nonzero integer vector")
        self.frequency = b.astype(int)
        self.label = int(label)
        if self.label < 0:
            raise ValueError("representation label must be nonnegative")
        scalar_modes = {}
        for k, c in (modes or {}).items():
            key = (int(k),) if np.isscalar(k) else tuple(int(v) for v in k)
            scalar_modes[key] = (complex(c),)
        self.angle = TorusCocycle(self.frequency[None, :], scalar_modes, (1,))

    @property
    def d(self):
        return self.frequency.size

    def angle_value(self, x):
        """theta(x) = b.x + eta(x), unwrapped."""
        return self.angle._dot_base(x, self.frequency) + self.angle.eta(x)[..., 0]

    def value(self, x):
        """Cocycle matrix at a single point."""
        theta = float(self.angle_value(np.asarray(x, dtype=float)))
        diag = np.diag(np.exp(2j * np.pi * theta * np.array([1.0, -1.0])))
        return self.conjugator @ diag @ self.conjugator.conj().T

    def representation_value(self, x):
        return su2_irrep(self.label, self.value(x))

    def accumulated_representation(self, flow, x, n):
        """pi(phi^(n)(x)) in closed form: conjugated diagonal of summed angles."""
        theta = float(cocycle_sum(self.angle, flow, np.asarray(x, dtype=float), n))
        weights = 2 * np.arange(self.label + 1) - self.label
        pih = su2_irrep(self.label, self.conjugator)
        return (pih * np.exp(2j * np.pi * theta * weights)) @ pih.conj().T


@dataclass
class SU2DegreeReport:
    steps: int
    field: np.ndarray
    limit_estimate: np.ndarray
    eigenvalues: np.ndarray
    predicted_eigenvalues: np.ndarray
    kernel_dim: int
    sup_deviation: float


def su2_degree_field(cocycle, flow, shape, steps, kernel_tol=1e-8):
    """Matrix-valued Birkhoff average of the representation-sector symbol.

    At each grid point the commutator symbol is the conjugated weight matrix
    pi(h) diag(2 pi (2k-n) (y.b + y.grad eta)) pi(h)*, transported along the
    orbit by the accumulated cocycle in the representation.  The average is
    computed honestly as a batched conjugated-multiplier sum; for this
    conjugated-diagonal model family the limit has eigenvalues
    2 pi (y.b) (2k-n), so its kernel is one-dimensional exactly for even n.
    """
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    shape = tuple(int(m) for m in shape)
    if len(shape) != cocycle.d:
        raise ValueError("grid dimension does not match the cocycle base")
    n = cocycle.label
    r = n + 1
    coords = unit_grid(shape)
    points = coords.reshape(-1) if cocycle.d == 1 else coords.reshape(-1, cocycle.d)
    count = points.shape[0]

    pih = su2_irrep(n, cocycle.conjugator)
    pih_h = pih.conj().T
    weights = 2 * np.arange(r) - n
    frame = pih @ np.diag(2.0 * np.pi * weights).astype(complex) @ pih_h
    base_rate = float(np.dot(cocycle.frequency, flow.y))
    eta_rate_modes = {
        k: 2j * np.pi * float(np.dot(k, flow.y)) * g
        for k, g in cocycle.angle.sector_modes().items()
    }

    total = np.zeros((count, r, r), dtype=complex)
    for m in range(steps):
        theta = np.asarray(cocycle_sum(cocycle.angle, flow, points, m), dtype=float)
        moved = flow.advance(points, m)
        rate = np.full(count, base_rate, dtype=complex)
        for k, coeff in eta_rate_modes.items():
            if coeff == 0:
                continue
            rate += coeff * np.exp(2j * np.pi * cocycle.angle._dot_base(moved, np.asarray(k)))
        phases = np.exp(2j * np.pi * theta[:, None] * weights[None, :])
        transport = (pih[None, :, :] * phases[:, None, :]) @ pih_h
        term = transport @ frame @ transport.conj().transpose(0, 2, 1)
        total += rate.real[:, None, None] * term
    total /= steps

    limit = total.mean(axis=0)
    limit = (limit + limit.conj().T) / 2.0
    eigvals = np.linalg.eigvalsh(limit)
    cut = kernel_tol * max(np.max(np.abs(eigvals)), 1e-300)
    kernel_dim = int(np.sum(np.abs(eigvals) <= cut))
    deviation = total - limit[None, :, :]
    sup_dev = float(np.max(np.linalg.svd(deviation, compute_uv=False)[:, 0]))
    predicted = np.sort(2.0 * np.pi * base_rate * weights.astype(float))
    return SU2DegreeReport(
        steps=steps,
        field=total.reshape(shape + (r, r)),
        limit_estimate=limit,
        eigenvalues=eigvals,
        predicted_eigenvalues=predicted,
        kernel_dim=kernel_dim,
        sup_deviation=sup_dev,
    )


@dataclass(frozen=True)
class FrequencySeparation:
    member: bool
    infimum: float
    minimizer: int
    values: tuple


def u2_frequency_separation(m, n, b1, b2, y, tol=1e-12):
    """Separation of the mixed frequencies |(2m-n) b_+.y + (2k-n) b_-.y|.

    The two-frequency unitary family mixes a determinant character with a
    spin-n/2 representation; its sectors decay only when every combined
    frequency stays away from zero.  Returns the minimum over k = 0..n, the
    minimizing k, and whether the strict-positivity test passes.
    """
    n = int(n)
    if n < 0:
        raise ValueError("representation label must be nonnegative")
    m = int(m)
    b1 = np.atleast_1d(np.asarray(b1))
    b2 = np.atleast_1d(np.asarray(b2))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if b1.shape != b2.shape or b1.shape != y.shape:
        raise ValueError("frequency vectors and translation must share a shape")
    if not (np.all(b1 == np.round(b1)) and np.all(b2 == np.round(b2))):
        raise ValueError("frequency vectors must be integer")
    plus = float((b1 + b2) @ y)
    minus = float((b1 - b2) @ y)
    base = (2 * m - n) * plus
    values = tuple(abs(base + (2 * k - n) * minus) for k in range(n + 1))
    kmin = int(np.argmin(values))
    return FrequencySeparation(
        member=values[kmin] > tol,
        infimum=values[kmin],
        minimizer=kmin,
        values=values,
    )


@dataclass(frozen=True)
class ShiftModel:
    pair: OperatorPair
    interior: np.ndarray
    window: int
    margin: int


def shift_weyl_model(window, margin):
    """Cyclic shift with a centered position diagonal, plus its interior.

    The cyclic closure keeps the shift exactly unitary; the price is a single
    seam where the position diagonal wraps, so the canonical commutation
    pattern [A,U]U* = I holds on all rows except the seam.  The interior
    keeps ``margin`` indices away from the seam at both ends, and the Weyl
    phase relation holds for vectors supported there as long as the steps do
    not push the support across the seam.
    """
    w = int(window)
    margin = int(margin)
    if w < 4:
        raise ValueError("window must be at least 4")
    if margin < 0 or margin >= w // 2:
        raise ValueError("margin must satisfy 0 <= margin < window/2")
    u = np.zeros((w, w), dtype=complex)
    u[(np.arange(w) + 1) % w, np.arange(w)] = 1.0
    a = np.diag(np.arange(w) - w // 2).astype(complex)
    interior = np.arange(margin, w - margin)
    return ShiftModel(pair=OperatorPair.discrete(u, a), interior=interior, window=w, margin=margin)


@dataclass
class TruncationSweepEntry:
    size: int
    eigenvalue_count: int
    min_residual: float
    median_residual: float


def sector_truncation_sweep(cocycle, flow, sizes, refine_factor=4):
    """Residuals of truncated-matrix eigenvectors against the sector action.

    Finite truncations always carry point spectrum; the question is whether
    those eigenpairs mean anything for the underlying operator.  Each
    truncation eigenvector is lifted to a finer grid by spectral
    interpolation and hit with the exact one-step sector action; the entry
    records how far it is from solving the eigenvalue equation there.  For a
    sector with nonzero winding (degree bounded away from zero) these
    residuals stay of order one instead of vanishing as the size grows.
    """
    if float(np.dot(cocycle.sector_winding, flow.y)) == 0.0:
        raise ValueError("sweep needs a sector with nonzero winding")
    entries = []
    for size in sizes:
        pair = sector_matrix(cocycle, flow, size)
        vals, vecs = np.linalg.eig(pair.main)
        residuals = []
        for j in range(vals.shape[0]):
            lifted = GridField(vecs[:, j]).refine(refine_factor)
            applied = sector_apply(cocycle, flow, lifted, 1)
            dev = applied.values - vals[j] * lifted.values
            scale = max(lifted.norm(), 1e-300)
            residuals.append(float(np.sqrt(np.mean(np.abs(dev) ** 2))) / scale)
        residuals = np.asarray(residuals)
        entries.append(
            TruncationSweepEntry(
                size=int(size),
                eigenvalue_count=int(vals.shape[0]),
                min_residual=float(residuals.min()),
                median_residual=float(np.median(residuals)),
            )
        )
    return entries
