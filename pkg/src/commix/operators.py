"""Dense complex-matrix foundation layer.

Structure checks, eigendecomposition-based functional calculus, spectral and
kernel projectors, the Cayley transform between unitary and self-adjoint
matrices, and a versioned JSON round trip for complex matrices.

Every operation here is pure: inputs are never mutated and results are freshly
allocated, so matrices can be shared read-only between threads.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    EvaluationError,
    SchemaError,
    SpectralCutWarning,
    SpectralSingularityError,
    StructureError,
)

__all__ = [
    "StructureReport",
    "SpectralDecomposition",
    "KernelSplit",
    "max_norm",
    "spectral_norm",
    "check_structure",
    "spectral_decomposition",
    "functional_calculus",
    "spectral_projector",
    "kernel_split",
    "cayley_transform",
    "inverse_cayley_transform",
    "matrix_to_payload",
    "matrix_from_payload",
    "matrix_to_json",
    "matrix_from_json",
]

MATRIX_FORMAT = "complex-matrix"
MATRIX_VERSION = 1


def as_square_matrix(obj, name="matrix"):
    """Return ``obj`` as a square complex ndarray, or raise DimensionError."""
    m = np.asarray(obj, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def max_norm(m):
    """Entrywise max-norm. Empty input has norm 0."""
    m = np.asarray(m)
    return 0.0 if m.size == 0 else float(np.max(np.abs(m)))


def spectral_norm(m):
    """Operator 2-norm (largest singular value)."""
    m = np.asarray(m, dtype=complex)
    return 0.0 if m.size == 0 else float(np.linalg.norm(m, 2))


@dataclass(frozen=True)
class StructureReport:
    """Outcome of a structural check.

    ``deviation`` is the entrywise max-norm distance from the requested
    structure: ``max|S S* - I|`` for unitarity, ``max|S - S*|`` for
    hermiticity.
    """

    kind: str
    deviation: float
    tol: float
    passed: bool


def check_structure(matrix, kind, tol=1e-10):
    """Check unitarity or hermiticity of a square matrix.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix.
    kind : {"unitary", "hermitian"}
        Structure to test.
    tol : float
        Max-norm deviation threshold.

    Returns
    -------
    StructureReport
    """
    m = as_square_matrix(matrix)
    if kind == "unitary":
        dev = max_norm(m @ m.conj().T - np.eye(m.shape[0]))
    elif kind == "hermitian":
        dev = max_norm(m - m.conj().T)
    else:
        raise ValueError(f"unknown structure kind {kind!r}")
    return StructureReport(kind=kind, deviation=dev, tol=float(tol), passed=dev <= tol)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition of a normal matrix with an orthonormal eigenbasis.

    ``eigenvalues[i]`` pairs with the column ``eigenvectors[:, i]``;
    ``residual`` is ``max_i || S v_i - lambda_i v_i ||_2``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def assemble(self, values):
        """Recombine ``V diag(values) V*`` for per-eigenvalue scalars."""
        v = self.eigenvectors
        return (v * np.asarray(values, dtype=complex)) @ v.conj().T


def spectral_decomposition(matrix, hermitian_tol=1e-10, normal_tol=1e-8):
    """Eigendecompose a normal matrix with guaranteed-orthonormal eigenvectors.

    Hermitian inputs (detected at ``hermitian_tol`` relative max-norm) go
    through the symmetric eigensolver and come back with real eigenvalues.
    Other normal matrices (unitaries in particular) go through a complex Schur
    factorization, whose triangular factor is diagonal precisely in the normal
    case; the Schur basis is then an orthonormal eigenbasis.

    Raises
    ------
    StructureError
        If the matrix is not normal at ``normal_tol`` (relative to the
        squared scale of the matrix).
    """
    m = as_square_matrix(matrix)
    scale = max(1.0, max_norm(m))
    if max_norm(m - m.conj().T) <= hermitian_tol * scale:
        h = (m + m.conj().T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(h)
        eigvals = eigvals.astype(complex)
    else:
        defect = max_norm(m @ m.conj().T - m.conj().T @ m)
        if defect > normal_tol * scale * scale:
            raise StructureError(
                f"matrix is not normal: ||SS* - S*S|| = {defect:.3e} "
                f"exceeds {normal_tol:.1e} * scale^2"
            )
        t, z = scipy.linalg.schur(m, output="complex")
        eigvals = np.diag(t).copy()
        eigvecs = z
    residual = 0.0
    if m.size:
        r = m @ eigvecs - eigvecs * eigvals
        residual = float(np.max(np.linalg.norm(r, axis=0)))
    return SpectralDecomposition(eigenvalues=eigvals, eigenvectors=eigvecs, residual=residual)


def _evaluate_on_spectrum(fn, eigenvalues):
    """Apply a scalar function to each eigenvalue, demanding finite results."""
    try:
        values = np.asarray(fn(eigenvalues), dtype=complex)
        if values.shape != eigenvalues.shape:
            raise TypeError
    except Exception:
        out = []
        for lam in eigenvalues:
            arg = float(lam.real) if lam.imag == 0.0 else complex(lam)
            try:
                out.append(complex(fn(arg)))
            except Exception as exc:
                raise EvaluationError(f"function evaluation failed at eigenvalue {lam}: {exc}") from exc
        values = np.asarray(out, dtype=complex)
    finite = np.isfinite(values.real) & np.isfinite(values.imag)
    if not np.all(finite):
        raise EvaluationError(f"function is undefined (non-finite) at eigenvalue(s) {eigenvalues[~finite]}")
    return values


def functional_calculus(matrix, fn, hermitian_tol=1e-10, normal_tol=1e-8):
    """Evaluate ``fn`` on a normal matrix through its eigendecomposition.

    ``fn`` may be a numpy-vectorized callable or a plain scalar function; it
    receives real arguments when the input is Hermitian and complex arguments
    otherwise.

    Returns ``V diag(fn(lambda)) V*``.
    """
    dec = spectral_decomposition(matrix, hermitian_tol=hermitian_tol, normal_tol=normal_tol)
    values = _evaluate_on_spectrum(fn, dec.eigenvalues)
    return dec.assemble(values)


def spectral_projector(matrix, predicate, tol=1e-9):
    """Orthogonal projector onto eigenspaces whose eigenvalue satisfies ``predicate``.

    If an eigenvalue sits within ``tol`` of the predicate's decision boundary
    (the predicate changes value under a +/- ``tol`` perturbation), a
    SpectralCutWarning carrying that eigenvalue is emitted; the projector is
    still returned.
    """
    dec = spectral_decomposition(matrix)
    real_spectrum = bool(np.all(dec.eigenvalues.imag == 0.0))
    mask = np.zeros(dec.dim, dtype=bool)
    for i, lam in enumerate(dec.eigenvalues):
        arg = float(lam.real) if real_spectrum else complex(lam)
        here = bool(predicate(arg))
        mask[i] = here
        probes = (arg - tol, arg + tol)
        if not real_spectrum:
            probes = probes + (arg - 1j * tol, arg + 1j * tol)
        for p in probes:
            try:
                other = bool(predicate(p))
            except Exception:
                continue
            if other != here:
                warnings.warn(
                    f"eigenvalue {lam} lies within {tol:.1e} of the predicate boundary",
                    SpectralCutWarning,
                    stacklevel=2,
                )
                break
    cols = dec.eigenvectors[:, mask]
    return cols @ cols.conj().T


@dataclass(frozen=True)
class KernelSplit:
    """Orthogonal split into numerical kernel and its complement.

    ``P_ker`` projects onto eigenspaces with ``|lambda| <= tol * ||D||`` and
    ``P_perp = I - P_ker`` exactly, so complementarity holds by construction.
    """

    tol: float
    P_ker: np.ndarray
    P_perp: np.ndarray
    ker_dim: int

    @property
    def dim(self):
        return self.P_ker.shape[0]


def kernel_split(matrix, tol=1e-8, ambiguity_margin=0.5):
    """Split a Hermitian matrix into numerical kernel and complement.

    The cut sits at ``tol * ||D||`` (spectral norm). Eigenvalues whose modulus
    falls inside the relative band ``(1 - margin, 1 + margin)`` around the cut
    make the split ambiguous and trigger a SpectralCutWarning; the zero matrix
    is split without complaint (everything is kernel).
    """
    m = as_square_matrix(matrix)
    rep = check_structure(m, "hermitian", tol=1e-8 * max(1.0, max_norm(m)))
    if not rep.passed:
        raise StructureError(f"kernel_split expects a Hermitian matrix, deviation {rep.deviation:.3e}")
    h = (m + m.conj().T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(h)
    scale = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
    cut = tol * scale
    mask = np.abs(eigvals) <= cut
    if cut > 0.0:
        near = (np.abs(eigvals) > cut * (1.0 - ambiguity_margin)) & (
            np.abs(eigvals) < cut * (1.0 + ambiguity_margin)
        )
        if np.any(near):
            offenders = eigvals[near]
            warnings.warn(
                f"kernel cut at {cut:.3e} is ambiguous near eigenvalue(s) {offenders}",
                SpectralCutWarning,
                stacklevel=2,
            )
    cols = eigvecs[:, mask]
    p_ker = cols @ cols.conj().T
    p_ker = (p_ker + p_ker.conj().T) / 2.0
    p_perp = np.eye(h.shape[0]) - p_ker
    return KernelSplit(tol=float(tol), P_ker=p_ker, P_perp=p_perp, ker_dim=int(np.count_nonzero(mask)))


def cayley_transform(unitary, spectral_gap=1e-8, structure_tol=1e-8):
    """Map a unitary with 1 outside its spectrum to a Hermitian matrix.

    Computes ``H = i (1 + U) (1 - U)^{-1}`` through the eigendecomposition;
    eigenphases map to the real line, so the result is Hermitian by
    construction (the imaginary roundoff is discarded).

    Raises
    ------
    SpectralSingularityError
        If some eigenvalue of ``U`` lies within ``spectral_gap`` of 1. The
        offending eigenvalue is attached to the exception.
    """
    u = as_square_matrix(unitary)
    rep = check_structure(u, "unitary", tol=structure_tol)
    if not rep.passed:
        raise StructureError(f"cayley_transform expects a unitary matrix, deviation {rep.deviation:.3e}")
    dec = spectral_decomposition(u)
    dist = np.abs(dec.eigenvalues - 1.0)
    nearest = int(np.argmin(dist)) if dist.size else -1
    if dist.size and dist[nearest] <= spectral_gap:
        lam = dec.eigenvalues[nearest]
        raise SpectralSingularityError(
            f"spectrum touches the Cayley pole: eigenvalue {lam} is within "
            f"{spectral_gap:.1e} of 1",
            eigenvalue=complex(lam),
        )
    mapped = (1j * (1.0 + dec.eigenvalues) / (1.0 - dec.eigenvalues)).real
    h = dec.assemble(mapped.astype(complex))
    return (h + h.conj().T) / 2.0


def inverse_cayley_transform(hermitian, structure_tol=1e-8):
    """Inverse of :func:`cayley_transform`: ``U = (H - i)(H + i)^{-1}``.

    The Moebius map sends the real line onto the unit circle minus 1, so the
    result is unitary with 1 outside its spectrum.
    """
    h = as_square_matrix(hermitian)
    rep = check_structure(h, "hermitian", tol=structure_tol * max(1.0, max_norm(h)))
    if not rep.passed:
        raise StructureError(f"inverse_cayley_transform expects Hermitian input, deviation {rep.deviation:.3e}")
    eigvals, eigvecs = np.linalg.eigh((h + h.conj().T) / 2.0)
    mapped = (eigvals - 1j) / (eigvals + 1j)
    return (eigvecs * mapped) @ eigvecs.conj().T


# --- serialization ---------------------------------------------------------


def matrix_to_payload(matrix):
    """Dict form of the versioned matrix schema (row-major [re, im] pairs)."""
    m = as_square_matrix(matrix)
    if m.size and not np.all(np.isfinite(m.real) & np.isfinite(m.imag)):
        raise ValueError("matrix serialization requires finite entries")
    flat = m.reshape(-1)
    return {
        "format": MATRIX_FORMAT,
        "version": MATRIX_VERSION,
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_payload(payload):
    """Rebuild a matrix from :func:`matrix_to_payload` output."""
    if not isinstance(payload, dict):
        raise SchemaError("matrix payload must be a mapping")
    if payload.get("format") != MATRIX_FORMAT:
        raise SchemaError(f"unexpected matrix format {payload.get('format')!r}")
    if payload.get("version") != MATRIX_VERSION:
        raise SchemaError(f"unsupported matrix schema version {payload.get('version')!r}")
    dim = payload.get("dim")
    entries = payload.get("entries")
    if not isinstance(dim, int) or dim < 0 or not isinstance(entries, list) or len(entries) != dim * dim:
        raise SchemaError("matrix payload has inconsistent dim/entries")
    flat = np.empty(dim * dim, dtype=complex)
    for i, pair in enumerate(entries):
        if not isinstance(pair, list) or len(pair) != 2:
            raise SchemaError(f"entry {i} is not a [re, im] pair")
        re, im = float(pair[0]), float(pair[1])
        if not (np.isfinite(re) and np.isfinite(im)):
            raise SchemaError(f"entry {i} is not finite")
        flat[i] = complex(re, im)
    return flat.reshape(dim, dim)


def matrix_to_json(matrix):
    return json.dumps(matrix_to_payload(matrix))


def matrix_from_json(text):
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"matrix document is not valid JSON: {exc}") from exc
    return matrix_from_payload(payload)
