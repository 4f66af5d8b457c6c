"""Structure checks, spectral calculus, Cayley maps, and matrix serialization."""

import json
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from commix import (
    DimensionError,
    SchemaError,
    SpectralCutWarning,
    SpectralSingularityError,
    StructureError,
    cayley_transform,
    check_structure,
    functional_calculus,
    inverse_cayley_transform,
    kernel_split,
    matrix_from_json,
    matrix_from_payload,
    matrix_to_json,
    matrix_to_payload,
    max_norm,
    spectral_decomposition,
    spectral_norm,
    spectral_projector,
)


def random_unitary(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_hermitian(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (z + z.conj().T) / 2


def test_check_structure_passes_clean_inputs():
    rng = np.random.default_rng(11)
    u = random_unitary(rng, 9)
    h = random_hermitian(rng, 9)
    assert check_structure(u, "unitary").passed
    assert check_structure(h, "hermitian").passed


def test_check_structure_reports_deviation():
    rng = np.random.default_rng(12)
    u = random_unitary(rng, 6)
    rep = check_structure(u + 1e-4, "unitary")
    assert not rep.passed
    assert rep.deviation > 1e-5


def test_check_structure_rejects_nonsquare():
    with pytest.raises(DimensionError):
        check_structure(np.ones((2, 3)), "unitary")


def test_check_structure_unknown_kind():
    with pytest.raises(ValueError):
        check_structure(np.eye(2), "idempotent")


def test_spectral_decomposition_reconstructs_unitary():
    rng = np.random.default_rng(21)
    u = random_unitary(rng, 12)
    dec = spectral_decomposition(u)
    assert max_norm(dec.assemble(dec.eigenvalues) - u) <= 1e-12
    assert np.allclose(np.abs(dec.eigenvalues), 1.0, atol=1e-10)


def test_spectral_decomposition_rejects_nonnormal():
    # a Jordan block is the canonical failure
    with pytest.raises(StructureError):
        spectral_decomposition(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


def test_functional_calculus_matches_expm():
    rng = np.random.default_rng(31)
    h = random_hermitian(rng, 10)
    lhs = functional_calculus(h, lambda lam: np.exp(1j * lam))
    assert max_norm(lhs - expm(1j * h)) <= 1e-12 * max(1.0, spectral_norm(h))


def test_functional_calculus_polynomial_on_unitary():
    rng = np.random.default_rng(32)
    u = random_unitary(rng, 8)
    sq = functional_calculus(u, lambda lam: lam**2)
    assert max_norm(sq - u @ u) <= 1e-12


def test_spectral_projector_properties():
    rng = np.random.default_rng(41)
    h = random_hermitian(rng, 10)
    p = spectral_projector(h, lambda lam: lam.real < 0.0)
    q = spectral_projector(h, lambda lam: lam.real >= 0.0)
    assert max_norm(p @ p - p) <= 1e-10
    assert max_norm(p - p.conj().T) <= 1e-10
    assert max_norm(p + q - np.eye(10)) <= 1e-10


def test_spectral_projector_warns_on_boundary_eigenvalue():
    h = np.diag([0.0, 0.5, 1.0]).astype(complex)
    with pytest.warns(SpectralCutWarning):
        p = spectral_projector(h, lambda lam: lam.real <= 0.5)
    assert abs(np.trace(p).real - 2.0) <= 1e-10


def test_kernel_split_counts_and_projectors():
    d = np.diag([0.0, 0.0, 1e-12, 0.3, 2.0]).astype(complex)
    split = kernel_split(d, tol=1e-8)
    assert split.ker_dim == 3
    assert max_norm(split.P_ker + split.P_perp - np.eye(5)) <= 1e-12
    assert max_norm(split.P_ker @ split.P_perp) <= 1e-12


def test_kernel_split_warns_in_ambiguity_band():
    # eigenvalue within a factor two of the cut is not a clean verdict
    with pytest.warns(SpectralCutWarning):
        kernel_split(np.diag([1.2e-8, 1.0]).astype(complex), tol=1e-8)


def test_cayley_round_trip():
    rng = np.random.default_rng(51)
    for _ in range(5):
        dim = int(rng.integers(2, 12))
        # keep the spectrum away from 1 so the transform is well posed
        angles = 0.3 + 5.6 * rng.random(dim)
        basis = random_unitary(rng, dim)
        u = basis @ np.diag(np.exp(1j * angles)) @ basis.conj().T
        h = cayley_transform(u)
        assert check_structure(h, "hermitian").passed
        back = inverse_cayley_transform(h)
        assert max_norm(back - u) <= 1e-9


def test_cayley_rejects_spectrum_at_one():
    with pytest.raises(SpectralSingularityError) as info:
        cayley_transform(np.eye(3, dtype=complex))
    assert abs(info.value.eigenvalue - 1.0) <= 1e-8


def test_matrix_payload_round_trip():
    rng = np.random.default_rng(61)
    m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    payload = matrix_to_payload(m)
    assert payload["format"] == "complex-matrix"
    assert payload["version"] == 1
    assert np.array_equal(matrix_from_payload(payload), m)


def test_matrix_json_round_trip():
    rng = np.random.default_rng(62)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    text = matrix_to_json(m)
    json.loads(text)  # must be plain JSON
    assert np.array_equal(matrix_from_json(text), m)


def test_matrix_payload_schema_errors():
    good = matrix_to_payload(np.eye(2, dtype=complex))
    wrong_format = dict(good, format="other")
    wrong_version = dict(good, version=2)
    short = dict(good, entries=good["entries"][:-1])
    not_finite = json.loads(json.dumps(good))
    not_finite["entries"][0][0] = float("inf")
    for bad in (wrong_format, wrong_version, short, not_finite):
        with pytest.raises(SchemaError):
            matrix_from_payload(bad)


def test_norms_agree_on_diagonal():
    d = np.diag([3.0, -4.0, 0.5]).astype(complex)
    assert spectral_norm(d) == pytest.approx(4.0)
    assert max_norm(d) == pytest.approx(4.0)
