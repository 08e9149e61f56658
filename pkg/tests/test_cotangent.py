import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from movingframes.cotangent import (
    HamiltonianHandle,
    PhaseState,
    QuadraticHamiltonian,
    coframe_matrix,
    dH_decompose,
    e_matrix,
    earnest_coordinate_dictionary,
    earnest_dictionary,
    lambda_matrix,
    poisson_matrix,
    poisson_tensor_standard,
    quasi_velocities,
    spiritual_component,
    standard_hamiltonian,
    symplectic_matrix,
    to_quasi,
    to_standard,
)
from movingframes.frames import (
    builtin_frames,
    eval_frame,
    heisenberg_frame,
    identity_frame,
    random_point,
    shear_frame,
    sleigh_frame,
    so3_euler_frame,
)
from movingframes.lie_poisson import hat


def canonical(n):
    """Canonical Poisson tensor in (q, p): {q_i, p_j} = delta_ij."""
    Z, I = np.zeros((n, n)), np.eye(n)
    return np.block([[Z, I], [-I, Z]])


def sample(frame, seed=0):
    rng = np.random.default_rng(seed)
    return random_point(frame, rng), rng.normal(size=frame.dim)


FRAMES = list(builtin_frames().values())
IDS = [f.name for f in FRAMES]


# -- momentum transforms -------------------------------------------------------

def test_identity_to_quasi():
    st_ = to_quasi(PhaseState([0.1, 0.2], [3.0, -1.0]), identity_frame(2))
    assert st_.coords == "quasi" and np.array_equal(st_.momentum, [3.0, -1.0])


def test_shear_to_quasi():
    st_ = to_quasi(PhaseState([0.5, 0.0], [1.0, 2.0]), shear_frame())
    assert np.allclose(st_.momentum, [0.0, 2.0], atol=1e-15)


def test_heisenberg_to_quasi_and_back():
    q = [0.0, 2.0, 0.0]
    frame = heisenberg_frame()
    quasi = to_quasi(PhaseState(q, [1.0, 0.0, 1.0]), frame)
    assert np.allclose(quasi.momentum, [3.0, 0.0, 1.0], atol=1e-15)
    # same covector: m_I eps_I = p_J dq_J
    A, _ = eval_frame(frame, q)
    assert np.allclose(A.T @ quasi.momentum, [1.0, 0.0, 1.0], atol=1e-15)
    back = to_standard(PhaseState(q, [3.0, 0.0, 1.0], "quasi"), frame)
    assert np.allclose(back.momentum, [1.0, 0.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("frame", FRAMES, ids=IDS)
def test_round_trip(frame):
    rng = np.random.default_rng(1)
    for _ in range(5):
        q, p = random_point(frame, rng), rng.normal(size=frame.dim)
        back = to_standard(to_quasi(PhaseState(q, p), frame), frame)
        assert np.max(np.abs(back.momentum - p)) < 1e-12


def test_transform_rejects_wrong_coords():
    with pytest.raises(ValueError):
        to_standard(PhaseState([0.0, 0.0], [1.0, 1.0]), shear_frame())
    with pytest.raises(ValueError):
        to_quasi(PhaseState([0.0, 0.0], [1.0, 1.0], "quasi"), shear_frame())
    with pytest.raises(ValueError):
        PhaseState([0.0, 0.0], [1.0, 1.0], "velocity")


def test_quasi_velocities_pair_with_momenta():
    frame = sleigh_frame()
    q, m = sample(frame)
    qdot = np.array([0.3, -0.4, 1.2])
    A, _ = eval_frame(frame, q)
    u = quasi_velocities(q, qdot, frame)
    assert np.isclose(u @ m, qdot @ (A.T @ m), atol=1e-14)


# -- Lambda ---------------------------------------------------------------------

def test_lambda_constant_frame():
    assert not np.any(lambda_matrix([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], identity_frame(3)))


def test_lambda_shear():
    L = lambda_matrix([0.5, 0.1], [0.7, -1.3], shear_frame())
    assert np.allclose(L, [[-1.3, 0.0], [0.0, 0.0]], atol=0)


def test_lambda_heisenberg():
    m = np.array([0.4, 0.9, 2.5])
    L = lambda_matrix([0.1, 0.2, 0.3], m, heisenberg_frame())
    expected = np.zeros((3, 3))
    expected[0, 1] = -m[2]
    assert np.array_equal(L, expected)


# -- extended frame / coframe -----------------------------------------------

def test_dictionary_identity_frame():
    assert np.array_equal(earnest_dictionary(np.zeros(3), np.ones(3), identity_frame(3)), np.eye(6))


@pytest.mark.parametrize("frame", FRAMES, ids=IDS)
def test_duality_pairing(frame):
    rng = np.random.default_rng(2)
    for _ in range(5):
        q, m = random_point(frame, rng), rng.normal(size=frame.dim)
        P = coframe_matrix(q, m, frame) @ earnest_dictionary(q, m, frame)
        assert np.max(np.abs(P - np.eye(2 * frame.dim))) < 1e-10


@pytest.mark.parametrize("frame", [shear_frame(), heisenberg_frame(), sleigh_frame()], ids=lambda f: f.name)
def test_dictionary_columns_are_pushed_coordinate_lines(frame):
    """e*_J and d/dm_J as velocities of curves pushed through (q, m) -> (q, A^T m)."""
    q, m = sample(frame, 3)
    if frame.name == "shear":
        q, m = np.array([0.5, 0.0]), np.array([0.0, 2.0])
    n = frame.dim
    _, B = eval_frame(frame, q)

    def to_qp(x, y):
        A, _ = eval_frame(frame, x)
        return np.concatenate([x, A.T @ y])

    T = earnest_dictionary(q, m, frame)
    h = 1e-6
    for J in range(n):
        d = B[:, J]
        col = (to_qp(q + h * d, m) - to_qp(q - h * d, m)) / (2 * h)
        assert np.allclose(col, T[:, J], atol=1e-9)
        e = np.eye(n)[J]
        col = (to_qp(q, m + h * e) - to_qp(q, m - h * e)) / (2 * h)
        assert np.allclose(col, T[:, n + J], atol=1e-9)
    if frame.name == "shear":
        # e*_1 = d/dq1 - 0.5 d/dq2 + (Lambda B)_{.1} d/dp with Lambda_11 = m_2 = 2
        assert np.allclose(T[:, 0], [1.0, -0.5, 2.0, 0.0], atol=1e-15)


def test_coordinate_dictionary_consistent():
    frame = sleigh_frame()
    q, m = sample(frame, 4)
    _, B = eval_frame(frame, q)
    Tc = earnest_coordinate_dictionary(q, m, frame)
    T = earnest_dictionary(q, m, frame)
    assert np.allclose(Tc[:, :3] @ B, T[:, :3], atol=1e-14)


# -- E, symplectic and Poisson matrices --------------------------------------

def test_e_matrix_coordinate_frame_zero():
    assert not np.any(e_matrix(np.zeros(3), [1.0, 2.0, 3.0], identity_frame(3)))


def test_e_matrix_heisenberg():
    m = np.array([0.3, -0.8, 1.7])
    E = e_matrix([0.5, 0.5, 0.5], m, heisenberg_frame())
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 0] = m[2], -m[2]
    assert np.max(np.abs(E - expected)) < 1e-12


def test_e_matrix_so3_is_hat():
    frame = so3_euler_frame()
    m = np.array([0.5, -1.2, 2.0])
    rng = np.random.default_rng(5)
    for _ in range(3):
        E = e_matrix(random_point(frame, rng), m, frame)
        assert np.max(np.abs(E - hat(m))) < 1e-6
        assert np.allclose(E, [[0, -m[2], m[1]], [m[2], 0, -m[0]], [-m[1], m[0], 0]], atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(-4, 4), st.integers(0, 2 ** 32 - 1))
def test_e_matrix_antisymmetric_and_linear(m, c, seed):
    frame = sleigh_frame()
    q = random_point(frame, np.random.default_rng(seed))
    m = np.array(m)
    E = e_matrix(q, m, frame)
    assert np.max(np.abs(E + E.T)) < 1e-10
    assert np.allclose(e_matrix(q, c * m, frame), c * E, rtol=0, atol=1e-12)


def test_coordinate_frame_matrices_canonical():
    q, m = np.zeros(2), np.array([1.0, -1.0])
    Om = symplectic_matrix(q, m, identity_frame(2))
    P = poisson_matrix(q, m, identity_frame(2))
    assert np.array_equal(Om, -canonical(2)) and np.array_equal(P, canonical(2))


@pytest.mark.parametrize("frame", FRAMES, ids=IDS)
def test_symplectic_poisson_inverse(frame):
    rng = np.random.default_rng(6)
    for _ in range(5):
        q, m = random_point(frame, rng), rng.normal(size=frame.dim)
        Om = symplectic_matrix(q, m, frame)
        P = poisson_matrix(q, m, frame)
        assert np.max(np.abs(Om + Om.T)) < 1e-10
        assert abs(np.linalg.det(Om)) > 0.5
        assert np.max(np.abs(Om @ P - np.eye(2 * frame.dim))) < 1e-12
        n = frame.dim
        assert np.array_equal(P[n:, n:], e_matrix(q, m, frame))


@pytest.mark.parametrize("frame", FRAMES, ids=IDS)
def test_matrices_are_canonical_structure_in_moving_basis(frame):
    """Pushing the moving-basis matrices to (q, p) must give the canonical tensors."""
    q, m = sample(frame, 7)
    n = frame.dim
    T = earnest_dictionary(q, m, frame)
    C = coframe_matrix(q, m, frame)
    J = canonical(n)
    assert np.max(np.abs(T @ poisson_matrix(q, m, frame) @ T.T - J)) < 1e-10
    assert np.max(np.abs(C.T @ symplectic_matrix(q, m, frame) @ C + J)) < 1e-10
    assert np.max(np.abs(poisson_tensor_standard(q, m, frame) - J)) < 1e-10


# -- spiritual component ------------------------------------------------------

def test_spiritual_constant_frame_zero():
    rep = spiritual_component(np.zeros(3), [1.0, 2.0, 3.0], identity_frame(3))
    assert not np.any(rep.S) and not np.any(rep.S_formula)


def test_spiritual_shear_wedge_cancellation():
    q, m = np.array([0.5, -0.3]), np.array([0.4, 2.0])
    frame = shear_frame()
    rep = spiritual_component(q, m, frame)
    E = e_matrix(q, m, frame)
    assert np.allclose(rep.S - rep.S.T, E, atol=1e-14)
    assert rep.assembly_difference < 1e-10
    # the tilde-frame representative assembles to the canonical tensor
    A, B = eval_frame(frame, q)
    e = np.vstack([B, np.zeros((2, 2))])
    dm = np.vstack([np.zeros((2, 2)), A.T])
    vecs = e + dm @ rep.S_tilde.T
    P = sum(np.outer(vecs[:, I], dm[:, I]) - np.outer(dm[:, I], vecs[:, I]) for I in range(2))
    assert np.max(np.abs(P - canonical(2))) < 1e-10


@pytest.mark.parametrize("frame", FRAMES, ids=IDS)
def test_spiritual_discrepancy_symmetric(frame):
    q, m = sample(frame, 8)
    rep = spiritual_component(q, m, frame)
    E = e_matrix(q, m, frame)
    assert rep.discrepancy_asymmetry < 1e-10
    assert rep.assembly_difference < 1e-10
    raw = rep.raw_discrepancy
    assert np.allclose(0.5 * (raw - raw.T), -0.5 * E, atol=1e-10)


def test_spiritual_s_from_dictionary():
    """S read off e*_I = e_I + S_IJ d/dm_J in the standard basis."""
    frame = heisenberg_frame()
    q, m = sample(frame, 9)
    T = earnest_dictionary(q, m, frame)
    A, B = eval_frame(frame, q)
    S = spiritual_component(q, m, frame).S
    recon = np.vstack([B, np.zeros((3, 3))]) + np.vstack([np.zeros((3, 3)), A.T]) @ S.T
    assert np.allclose(recon, T[:, :3], atol=1e-14)


# -- Hamiltonians and dH ---------------------------------------------------------

def kinetic():
    return HamiltonianHandle(lambda q, m: 0.5 * m @ m, lambda q, m: np.zeros_like(q), lambda q, m: np.array(m))


def test_dh_pure_kinetic():
    frame = sleigh_frame()
    q, m = sample(frame, 10)
    alpha, beta = dH_decompose(kinetic(), q, m, frame)
    assert not np.any(alpha) and np.array_equal(beta, m)


def test_dh_identity_frame_with_potential():
    H = HamiltonianHandle(lambda q, m: 0.5 * m @ m + np.sin(q[0]) * q[1])
    q, m = np.array([0.3, 0.8]), np.array([1.0, -2.0])
    alpha, beta = dH_decompose(H, q, m, identity_frame(2))
    assert np.allclose(alpha, [np.cos(0.3) * 0.8, np.sin(0.3)], atol=1e-9)
    assert np.allclose(beta, m, atol=1e-9)


def test_dh_heisenberg_linear_potential():
    frame = heisenberg_frame()
    H = HamiltonianHandle(lambda q, m: 0.5 * m @ m + q[0])
    q, m = np.array([0.2, 1.7, -0.3]), np.array([0.5, 0.1, -0.9])
    alpha, beta = dH_decompose(H, q, m, frame)
    assert np.allclose(alpha, [1.0, 0.0, 0.0], atol=1e-9)
    assert np.allclose(beta, m, atol=1e-9)
    # dH(e*_I) from the standard-coordinate Hamiltonian and the dictionary column
    Hstd = standard_hamiltonian(H, frame)
    A, _ = eval_frame(frame, q)
    x = np.concatenate([q, A.T @ m])
    grad = np.array([(Hstd(*np.split(x + h, 2)) - Hstd(*np.split(x - h, 2))) / 2e-6
                     for h in 1e-6 * np.eye(6)])
    T = earnest_dictionary(q, m, frame)
    assert np.allclose(grad @ T, np.concatenate([alpha, beta]), atol=1e-8)


@pytest.mark.parametrize("frame", [sleigh_frame(), so3_euler_frame(), heisenberg_frame()], ids=lambda f: f.name)
def test_moving_frame_hamilton_equations_match_canonical(frame):
    """X = P . dH in the moving basis, pushed to (q, p), equals the canonical field."""
    n = frame.dim
    M = np.diag(np.arange(1.0, n + 1))
    H = QuadraticHamiltonian(frame, lambda q: M, lambda q: np.zeros((n, n, n)),
                             lambda q: 0.3 * q @ q + q[0] ** 3, lambda q: 0.6 * q + np.eye(n)[0] * 3 * q[0] ** 2)
    q, m = sample(frame, 11)
    alpha, beta = dH_decompose(H, q, m, frame)
    X = earnest_dictionary(q, m, frame) @ poisson_matrix(q, m, frame) @ np.concatenate([alpha, beta])
    A, _ = eval_frame(frame, q)
    p = A.T @ m
    Minv = np.linalg.inv(M)
    canonical_field = np.concatenate([Minv @ p, -(0.6 * q + np.eye(n)[0] * 3 * q[0] ** 2)])
    assert np.allclose(X, canonical_field, atol=1e-10)


def test_quadratic_hamiltonian_gradients():
    frame = so3_euler_frame()

    def M(q):
        return np.diag([1.0 + q[1] ** 2, 2.0, 3.0 + np.sin(q[2])])

    def dM(q):
        d = np.zeros((3, 3, 3))
        d[0, 0, 1] = 2 * q[1]
        d[2, 2, 2] = np.cos(q[2])
        return d

    H = QuadraticHamiltonian(frame, M, dM, lambda q: np.cos(q[0]), lambda q: np.array([-np.sin(q[0]), 0.0, 0.0]))
    rng = np.random.default_rng(12)
    for _ in range(5):
        q, m = random_point(frame, rng), rng.normal(size=3)
        assert H.gradient_check(q, m) < 1e-6
        G = H.metric(q)
        assert np.allclose(H.hess_m(q, m), G, atol=1e-14)
        # H equals the standard kinetic energy 1/2 p^T M^-1 p + V
        A, _ = eval_frame(frame, q)
        p = A.T @ m
        assert np.isclose(H(q, m), 0.5 * p @ np.linalg.solve(M(q), p) + np.cos(q[0]), atol=1e-13)


def test_quadratic_hamiltonian_without_potential():
    frame = sleigh_frame()
    H = QuadraticHamiltonian(frame, lambda q: np.eye(3), lambda q: np.zeros((3, 3, 3)))
    q, m = sample(frame, 13)
    assert np.isclose(H(q, m), 0.5 * m @ m)
    assert H.gradient_check(q, m) < 1e-6


def test_handle_finite_difference_fallbacks():
    H = HamiltonianHandle(lambda q, m: q[0] * m[1] ** 2 + m[0])
    q, m = np.array([2.0, 0.0]), np.array([1.0, 3.0])
    assert np.allclose(H.grad_q(q, m), [9.0, 0.0], atol=1e-8)
    assert np.allclose(H.grad_m(q, m), [1.0, 12.0], atol=1e-8)
    assert np.allclose(H.hess_m(q, m), [[0.0, 0.0], [0.0, 4.0]], atol=1e-5)
