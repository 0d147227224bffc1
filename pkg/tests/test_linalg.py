import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import kahan_taylor_expm
from ptqudit import build_hamiltonian
from ptqudit.dynamics import lossy_propagator
from ptqudit.errors import DimensionError, InvalidValueError, NumericalFailure
from ptqudit.linalg import eig, eigenvalues, mat_exp, singular_values

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


def complex_matrices(n, bound):
    parts = arrays(np.float64, (2, n, n), elements=finite)
    return parts.map(lambda p: bound * (p[0] + 1j * p[1]) / max(1.0, np.abs(p[0] + 1j * p[1]).sum(0).max()))


# -- mat_exp -----------------------------------------------------------------

def test_exp_of_zero_is_identity():
    assert np.array_equal(mat_exp(np.zeros((4, 4))), np.eye(4))


def test_exp_of_diagonal():
    got = mat_exp(np.diag([1.0, -1.0]), 2.0)
    assert np.allclose(got, np.diag([math.e**2, math.e**-2]), rtol=1e-14, atol=0)


def test_exp_of_nilpotent_truncates():
    n = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(mat_exp(n), np.eye(2) + n, rtol=0, atol=1e-15)


def test_exp_matches_taylor_oracle_on_random_matrix(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a /= np.abs(a).sum(0).max()
    ref = kahan_taylor_expm(a)
    assert np.abs(mat_exp(a) - ref).sum(0).max() <= 1e-12 * np.abs(ref).sum(0).max()


@settings(max_examples=120, deadline=None)
@given(complex_matrices(4, 1.0))
def test_exp_matches_taylor_oracle_property(a):
    ref = kahan_taylor_expm(a)
    err = np.abs(mat_exp(a) - ref).sum(0).max()
    assert err <= 1e-12 * np.abs(ref).sum(0).max()


@pytest.mark.parametrize("nrm", [3.0, 12.0, 50.0])
def test_exp_large_norm_against_eigendecomposition(rng, nrm):
    # Hermitian matrices have a well-conditioned exp via eigh.
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a = x + x.conj().T
    a *= nrm / np.abs(a).sum(0).max()
    w, v = np.linalg.eigh(a)
    ref = (v * np.exp(w)) @ v.conj().T
    assert np.abs(mat_exp(a) - ref).sum(0).max() <= 1e-12 * np.abs(ref).sum(0).max() * nrm


@settings(max_examples=60, deadline=None)
@given(complex_matrices(4, 5.0), st.floats(-5, 5), st.floats(-5, 5))
def test_exp_group_law(a, t, s):
    lhs = mat_exp(a, t + s)
    rhs = mat_exp(a, t) @ mat_exp(a, s)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1.0, np.linalg.norm(lhs))


@settings(max_examples=60, deadline=None)
@given(complex_matrices(4, 3.0))
def test_exp_determinant_law(a):
    det = np.linalg.det(mat_exp(a))
    ref = np.exp(np.trace(a))
    assert abs(det - ref) <= 1e-9 * abs(ref)


def test_exp_rejects_bad_input():
    with pytest.raises(DimensionError):
        mat_exp(np.zeros((2, 3)))
    with pytest.raises(InvalidValueError):
        mat_exp(np.array([[np.nan, 0], [0, 1]]))


def test_exp_overflow_is_a_numerical_failure():
    with pytest.raises(NumericalFailure, match="overflow"):
        mat_exp(np.diag([800.0, 0.0]))


# -- eig ---------------------------------------------------------------------

def test_eig_diagonal():
    dec = eig(np.diag([3.0, 1.0, -1.0, -3.0]))
    assert np.allclose(np.sort(dec.values.real), [-3, -1, 1, 3], atol=1e-14)
    assert not dec.ill_conditioned


def test_eig_hermitian_limit_spectrum():
    dec = eig(build_hamiltonian(1.0, 0.0, 4).matrix)
    assert np.allclose(np.sort(dec.values.real), [-1.5, -0.5, 0.5, 1.5], atol=1e-12)
    assert np.max(np.abs(dec.values.imag)) < 1e-12


def test_eig_jordan_block_is_flagged():
    dec = eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert np.allclose(dec.values, 0)
    assert dec.ill_conditioned


def test_eig_exceptional_point_is_flagged():
    dec = eig(build_hamiltonian(1.0, 1.0, 4).matrix)
    assert dec.ill_conditioned
    assert np.max(np.abs(dec.values)) < 1e-3


@pytest.mark.parametrize("n", [2, 3, 4, 6, 10])
def test_eig_reconstruction_and_residuals(rng, n):
    for _ in range(20):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        dec = eig(a)
        assert np.allclose(np.linalg.norm(dec.vectors, axis=0), 1.0)
        nrm = np.linalg.norm(a, 2)
        assert np.all(dec.residuals <= 1e-8 * nrm)
        rebuilt = dec.vectors @ np.diag(dec.values) @ np.linalg.inv(dec.vectors)
        assert np.linalg.norm(rebuilt - a, 2) <= 1e-8 * nrm


def test_eig_agrees_with_lapack(rng):
    for _ in range(50):
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        ours = np.sort_complex(eigenvalues(a))
        ref = np.sort_complex(np.linalg.eigvals(a))
        assert np.allclose(ours, ref, atol=1e-10)


def test_eig_nonconvergence_reports_norm_and_iterations(monkeypatch):
    import ptqudit.linalg as la

    monkeypatch.setattr(la, "SWEEPS_PER_DIM", 0)
    with pytest.raises(NumericalFailure, match=r"after 0 sweeps .*1-norm"):
        la.eig(np.array([[0.0, 1.0], [-1.0, 0.0]]))


# -- singular values -----------------------------------------------------------

def test_singular_values_identity():
    assert np.allclose(singular_values(np.eye(4)), 1.0)


def test_singular_values_diag():
    assert np.allclose(singular_values(np.diag([2.0, 0.0])), [2.0, 0.0])


def test_singular_values_match_svd(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(singular_values(a), np.linalg.svd(a, compute_uv=False), rtol=1e-10)


def test_lossy_propagator_is_contraction():
    u = lossy_propagator(build_hamiltonian(1.0, 0.2, 4), 1.0)
    assert singular_values(u)[0] <= 1 + 1e-10
