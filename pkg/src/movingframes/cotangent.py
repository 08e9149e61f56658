"""The (q, m) trivialisation of T*Q.

Extended frame/coframe matrices act on the standard basis ordered as
``(d/dq_1..d/dq_n, d/dp_1..d/dp_n)`` and ``(dq, dp)``.  Moving-basis
matrices are ordered ``(e*_1..e*_n, d/dm_1..d/dm_n)`` and ``(eps, dm)``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _numdiff
from .frames import eval_frame, frame_derivative, structure_functions

STANDARD = "standard"
QUASI = "quasi"


@dataclass(frozen=True)
class PhaseState:
    q: np.ndarray
    momentum: np.ndarray
    coords: str = STANDARD

    def __post_init__(self):
        if self.coords not in (STANDARD, QUASI):
            raise ValueError(f"coords must be {STANDARD!r} or {QUASI!r}")
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "momentum", np.asarray(self.momentum, dtype=float))
        if self.q.shape != self.momentum.shape:
            raise ValueError("q and momentum must have equal length")


@dataclass(frozen=True)
class TangentState:
    """Velocity twin of :class:`PhaseState`: ``qdot`` or quasi-velocities ``u``."""

    q: np.ndarray
    velocity: np.ndarray
    coords: str = STANDARD


class HamiltonianHandle:
    """A function ``H(q, m)`` with optional analytic derivatives.

    Missing gradients fall back to central finite differences using the same
    step policy as the frame derivatives.
    """

    def __init__(self, H, dH_dq=None, dH_dm=None, d2H_dm2=None, h_fd=_numdiff.DEFAULT_STEP):
        self.H = H
        self._dq = dH_dq
        self._dm = dH_dm
        self._dmm = d2H_dm2
        self.h_fd = h_fd

    def __call__(self, q, m):
        return float(self.H(np.asarray(q, float), np.asarray(m, float)))

    def grad_q(self, q, m):
        if self._dq is not None:
            return np.asarray(self._dq(q, m), dtype=float)
        m = np.asarray(m, float)
        return _numdiff.gradient(lambda x: self.H(x, m), q, self.h_fd)

    def grad_m(self, q, m):
        if self._dm is not None:
            return np.asarray(self._dm(q, m), dtype=float)
        q = np.asarray(q, float)
        return _numdiff.gradient(lambda y: self.H(q, y), m, self.h_fd)

    def hess_m(self, q, m):
        if self._dmm is not None:
            return np.asarray(self._dmm(q, m), dtype=float)
        q = np.asarray(q, float)
        return _numdiff.derivative(lambda y: self.grad_m(q, y), m, self.h_fd)

    def gradient_check(self, q, m, h=1e-6):
        """Max deviation of the supplied gradients from finite differences."""
        q = np.asarray(q, float)
        m = np.asarray(m, float)
        gq = _numdiff.gradient(lambda x: self.H(x, m), q, h)
        gm = _numdiff.gradient(lambda y: self.H(q, y), m, h)
        return max(np.max(np.abs(gq - self.grad_q(q, m))), np.max(np.abs(gm - self.grad_m(q, m))))


class QuadraticHamiltonian(HamiltonianHandle):
    """``H = 1/2 m^T G(q) m + V(q)`` with ``G = A M^{-1} A^T``.

    ``mass`` is the coordinate mass matrix ``M(q)``; ``dmass[i, j, k] =
    dM_ij/dq_k``.  The quasi-momentum metric ``G`` makes the constraint
    surface a linear solve.
    """

    def __init__(self, frame, mass, dmass=None, potential=None, dpotential=None, h_fd=_numdiff.DEFAULT_STEP):
        self.frame = frame
        self.mass = mass
        self.dmass = dmass
        self.potential = potential
        self.dpotential = dpotential
        self._memo = [None]
        super().__init__(self._H, self._grad_q, self._grad_m, self._hess_m, h_fd)

    def _metric_pair(self, q):
        q = np.asarray(q, float)
        key = q.tobytes()
        hit = self._memo[0]
        if hit is not None and hit[0] == key:
            return hit[1], hit[2]
        A, _ = eval_frame(self.frame, q)
        dA = frame_derivative(self.frame, q)
        Minv = np.linalg.inv(np.asarray(self.mass(q), float))
        if self.dmass is not None:
            dM = np.asarray(self.dmass(q), float)
        else:
            dM = _numdiff.derivative(self.mass, q, self.h_fd)
        G = A @ Minv @ A.T
        dMinv = -np.einsum("ia,abr,bj->ijr", Minv, dM, Minv)
        t1 = np.einsum("iar,ab,jb->ijr", dA, Minv, A)
        t2 = np.einsum("ia,abr,jb->ijr", A, dMinv, A)
        dG = t1 + t1.transpose(1, 0, 2) + t2
        self._memo[0] = (key, G, dG)
        return G, dG

    def metric(self, q):
        return self._metric_pair(q)[0]

    def _metric_derivative(self, q):
        return self._metric_pair(q)[1]

    def _V(self, q):
        return 0.0 if self.potential is None else float(self.potential(q))

    def _H(self, q, m):
        return 0.5 * m @ self.metric(q) @ m + self._V(q)

    def _grad_m(self, q, m):
        return self.metric(q) @ m

    def _hess_m(self, q, m):
        return self.metric(q)

    def _grad_q(self, q, m):
        dG = self._metric_derivative(q)
        if self.potential is None:
            dV = 0.0
        elif self.dpotential is not None:
            dV = np.asarray(self.dpotential(q), float)
        else:
            dV = _numdiff.gradient(self.potential, q, self.h_fd)
        return 0.5 * np.einsum("i,ijr,j->r", m, dG, m) + dV


def to_quasi(state, frame):
    """``m_J = p_I b_{IJ}``."""
    if state.coords != STANDARD:
        raise ValueError("state is not in standard coordinates")
    _, B = eval_frame(frame, state.q)
    return PhaseState(state.q, B.T @ state.momentum, QUASI)


def to_standard(state, frame):
    """``p_J = m_I a_{IJ}``."""
    if state.coords != QUASI:
        raise ValueError("state is not in quasi-momentum coordinates")
    A, _ = eval_frame(frame, state.q)
    return PhaseState(state.q, A.T @ state.momentum, STANDARD)


def quasi_velocities(q, qdot, frame):
    """``u_I = eps_I(qdot)``."""
    A, _ = eval_frame(frame, q)
    return A @ np.asarray(qdot, float)


def lambda_matrix(q, m, frame):
    """``Lambda_{IJ} = m_K d a_{KI} / d q_J``."""
    dA = frame_derivative(frame, q)
    return np.einsum("k,kij->ij", np.asarray(m, float), dA)


def earnest_dictionary(q, m, frame):
    """Extended frame ``{e*_J, d/dm_J}`` as columns in the standard basis.

    ``T = [[B, 0], [Lambda B, A^T]]``.
    """
    A, B = eval_frame(frame, q)
    Lam = lambda_matrix(q, m, frame)
    n = len(A)
    return np.block([[B, np.zeros((n, n))], [Lam @ B, A.T]])


def earnest_coordinate_dictionary(q, m, frame):
    """Coordinate fields ``{d/dq_J |_m, d/dm_J}`` in the standard basis: ``[[I, 0], [Lambda, A^T]]``."""
    A, _ = eval_frame(frame, q)
    Lam = lambda_matrix(q, m, frame)
    n = len(A)
    return np.block([[np.eye(n), np.zeros((n, n))], [Lam, A.T]])


def coframe_matrix(q, m, frame):
    """Extended coframe ``{eps_I, dm_I}`` as rows in the standard ``(dq, dp)`` basis.

    Derived independently of :func:`earnest_dictionary` by differentiating
    ``m = B(q)^T p``: ``dm_J = b_{IJ} dp_I + p_I (d b_{IJ} / d q_R) dq_R``.
    """
    A, B = eval_frame(frame, q)
    dA = frame_derivative(frame, q)
    p = A.T @ np.asarray(m, float)
    dB = -np.einsum("la,abr,bk->lkr", B, dA, B)
    D = np.einsum("i,ijr->jr", p, dB)
    n = len(A)
    return np.block([[A, np.zeros((n, n))], [D, B.T]])


def e_matrix(q, m, frame):
    """``E_{JK} = -m_I gamma^I_{JK}(q)``."""
    gamma = structure_functions(frame, q).gamma
    return -np.einsum("i,ijk->jk", np.asarray(m, float), gamma)


def symplectic_matrix(q, m, frame):
    """Canonical 2-form in the basis ``{e*, d/dm}``: ``[[E, -I], [I, 0]]``."""
    E = e_matrix(q, m, frame)
    n = len(E)
    I = np.eye(n)
    return np.block([[E, -I], [I, np.zeros((n, n))]])


def poisson_matrix(q, m, frame):
    """Poisson tensor in the basis ``{eps, dm}``: ``[[0, I], [-I, E]]``."""
    E = e_matrix(q, m, frame)
    n = len(E)
    I = np.eye(n)
    return np.block([[np.zeros((n, n)), I], [-I, E]])


def wedge(u, v):
    """Matrix of the bivector ``u ^ v``: ``(a, b) -> a(u) b(v) - a(v) b(u)``."""
    return np.outer(u, v) - np.outer(v, u)


def poisson_tensor_standard(q, m, frame):
    """``sum_I e*_I ^ d/dm_I + 1/2 E_{JK} d/dm_J ^ d/dm_K`` in the standard basis."""
    T = earnest_dictionary(q, m, frame)
    E = e_matrix(q, m, frame)
    n = len(E)
    estar, dm = T[:, :n], T[:, n:]
    P = sum(wedge(estar[:, I], dm[:, I]) for I in range(n))
    P = P + 0.5 * np.einsum("jk,aj,bk->ab", E, dm, dm) - 0.5 * np.einsum("jk,bj,ak->ab", E, dm, dm)
    return P


@dataclass
class SpiritualReport:
    S: np.ndarray          # vertical part of e*_I: e*_I = e_I + S[I, J] d/dm_J
    S_tilde: np.ndarray    # vertical part of the tilde frame e*_I - 1/2 E_IJ d/dm_J
    S_formula: np.ndarray  # symmetric closed-form coefficient
    discrepancy: np.ndarray       # S_formula - S_tilde
    raw_discrepancy: np.ndarray   # S_formula - S
    discrepancy_asymmetry: float
    assembly_difference: float


def spiritual_component(q, m, frame):
    """Vertical ("spiritual") correction of ``e*_I`` relative to ``e_I``.

    ``S`` is read off the extended-frame dictionary: the ``d/dp`` part
    ``Lambda B`` converted with ``d/dp_K = b_{KJ} d/dm_J``.  The symmetric
    closed form ``m_K da_{KL}/dq_R (b_RI b_LJ + b_RJ b_LI)`` is evaluated
    alongside it.  ``S - S^T = E``, so the closed form only matches ``S`` up to
    a term that wedges to zero against ``d/dm_I`` once the ``E/2`` shift to the
    tilde frame is made; both differences are reported.
    """
    A, B = eval_frame(frame, q)
    dA = frame_derivative(frame, q)
    m = np.asarray(m, float)
    Lam = lambda_matrix(q, m, frame)
    n = len(A)
    S = ((Lam @ B).T @ B)
    E = e_matrix(q, m, frame)
    S_tilde = S - 0.5 * E
    half = np.einsum("k,klr,ri,lj->ij", m, dA, B, B)
    S_formula = half + half.T
    disc = S_formula - S_tilde

    # assemble sum_I (e_I + C[I, J] d/dm_J) ^ d/dm_I for both tilde representatives
    e = np.vstack([B, np.zeros((n, n))])
    dm = np.vstack([np.zeros((n, n)), A.T])

    def assemble(C):
        vecs = e + dm @ C.T
        return sum(wedge(vecs[:, I], dm[:, I]) for I in range(n))

    diff = np.max(np.abs(assemble(S_formula) - assemble(S_tilde)))
    return SpiritualReport(
        S=S,
        S_tilde=S_tilde,
        S_formula=S_formula,
        discrepancy=disc,
        raw_discrepancy=S_formula - S,
        discrepancy_asymmetry=float(np.max(np.abs(disc - disc.T))),
        assembly_difference=float(diff),
    )


def dH_decompose(H, q, m, frame):
    """Coefficients of ``dH = alpha_I eps_I + beta_J dm_J``.

    ``beta = dH/dm`` at fixed q and ``alpha_I = b_{JI} dH/dq_J`` at fixed m.
    """
    _, B = eval_frame(frame, q)
    beta = H.grad_m(q, m)
    alpha = B.T @ H.grad_q(q, m)
    return alpha, beta


def standard_hamiltonian(H, frame):
    """``H(q, p) = H(q, B(q)^T p)`` as a plain function."""

    def Hstd(q, p):
        _, B = eval_frame(frame, q)
        return H(q, B.T @ np.asarray(p, float))

    return Hstd
