"""Nonholonomic dynamics in an adapted moving frame.

Frame indices ``0..s-1`` span the constraint distribution; ``s..n-1`` are
transversal.  States on the constraint surface are ``(q, m_k)`` with the
transversal momenta ``m_alpha`` recovered by :func:`solve_constraint_surface`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _numdiff
from .cotangent import HamiltonianHandle, QuadraticHamiltonian, dH_decompose, e_matrix
from .errors import EvaluationFailure, NoConvergence, SingularHessian
from .frames import eval_frame, frame_derivative, reciprocal_condition

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50
SENSITIVITY_STEP = 1e-6
# exact for quadratic H up to roundoff ~ eps / h
LEGENDRE_STEP = 1e-3


@dataclass(frozen=True)
class ConstraintSplit:
    frame: object
    s: int
    seed: object = None

    def __post_init__(self):
        if not 0 < self.s <= self.frame.dim:
            raise ValueError(f"need 0 < s <= n, got s={self.s}, n={self.frame.dim}")

    @property
    def n(self):
        return self.frame.dim

    @property
    def r(self):
        return self.n - self.s

    def annihilation_residual(self, q):
        """``max |eps_alpha(e_i)|``."""
        A, B = eval_frame(self.frame, q)
        return float(np.max(np.abs(A[self.s:] @ B[:, :self.s]), initial=0.0))


def full_momentum(m_k, m_alpha):
    return np.concatenate([np.asarray(m_k, float), np.asarray(m_alpha, float)])


def solve_constraint_surface(H, split, q, m_k, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER):
    """Solve ``dH/dm_alpha (q, m_k, m_alpha) = 0`` for ``m_alpha``.

    Quadratic Hamiltonians use one exact linear solve; otherwise Newton's
    method from ``m_alpha = 0`` (or ``split.seed``).
    """
    s, r = split.s, split.r
    m_k = np.asarray(m_k, float)
    if r == 0:
        return np.zeros(0)

    if isinstance(H, QuadraticHamiltonian):
        G = H.metric(q)
        Gaa = G[s:, s:]
        # scale test catches degenerate 1x1 blocks, which always have rcond 1
        if reciprocal_condition(Gaa) < 1e-12 or np.abs(Gaa).max() <= 1e-14 * np.abs(G).max():
            raise SingularHessian(f"transversal block of the metric is singular at q={q}")
        return -np.linalg.solve(Gaa, G[s:, :s] @ m_k)

    m_a = np.zeros(r) if split.seed is None else np.array(split.seed, float)
    for it in range(maxiter + 1):
        m = full_momentum(m_k, m_a)
        try:
            res = H.grad_m(q, m)[s:]
            if np.max(np.abs(res)) < tol:
                return m_a
            if it == maxiter:
                break
            hess = H.hess_m(q, m)[s:, s:]
        except EvaluationFailure as exc:
            if it == 0:
                raise
            raise NoConvergence(f"Newton iterates left the domain of H after {it} steps") from exc
        if not np.all(np.isfinite(hess)) or reciprocal_condition(hess) < 1e-12:
            raise SingularHessian(f"d2H/dm_alpha dm_beta singular at q={q}")
        m_a = m_a - np.linalg.solve(hess, res)
        if not np.all(np.isfinite(m_a)):
            raise NoConvergence(f"Newton iterates diverged after {it + 1} steps")
    raise NoConvergence(f"constraint surface solve stalled at residual {np.max(np.abs(res)):.3g}")


def surface_momentum(H, split, q, m_k):
    return full_momentum(m_k, solve_constraint_surface(H, split, q, m_k))


@dataclass
class ConstrainedField:
    qdot: np.ndarray
    mdot_k: np.ndarray
    v: np.ndarray          # constrained quasi-velocities v_i = dH/dm_i
    m: np.ndarray          # full momentum on the surface
    E: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray


def constrained_field(H, split, q, m_k):
    """Evaluate the constrained vector field with its intermediates."""
    s = split.s
    m = surface_momentum(H, split, q, m_k)
    _, B = eval_frame(split.frame, q)
    E = e_matrix(q, m, split.frame)
    alpha, beta = dH_decompose(H, q, m, split.frame)
    v = beta[:s]
    mdot_k = -v @ E[:s, :s] - alpha[:s]
    qdot = B[:, :s] @ v
    return ConstrainedField(qdot, mdot_k, v, m, E, alpha, beta)


def dalembert_field(H, split, q, m_k):
    """``v_i = dH/dm_i``, ``mdot_i = -v_k E_ki - dH(e*_i)``, ``qdot = v_i e_i``."""
    f = constrained_field(H, split, q, m_k)
    return f.qdot, f.mdot_k


def surface_sensitivities(H, split, q, m_k, h=SENSITIVITY_STEP):
    """``d m_alpha / d q`` and ``d m_alpha / d m_k`` by central differences."""
    q = np.asarray(q, float)
    m_k = np.asarray(m_k, float)
    d_q = _numdiff.derivative(lambda x: solve_constraint_surface(H, split, x, m_k), q, h)
    d_m = _numdiff.derivative(lambda y: solve_constraint_surface(H, split, q, y), m_k, h)
    return d_q, d_m


def mdot_alpha(H, split, q, m_k, qdot, mdot_k):
    """``d/dt m_alpha(q(t), m_k(t))`` along the constrained flow (chain rule)."""
    if split.r == 0:
        return np.zeros(0)
    d_q, d_m = surface_sensitivities(H, split, q, m_k)
    return d_q @ np.asarray(qdot, float) + d_m @ np.asarray(mdot_k, float)


def full_mdot(H, split, q, m_k):
    """Full ``mdot = (mdot_k, mdot_alpha)`` along the constrained flow."""
    qdot, mdot_k = dalembert_field(H, split, q, m_k)
    return np.concatenate([mdot_k, mdot_alpha(H, split, q, m_k, qdot, mdot_k)])


def multipliers(H, split, q, m_k, mdot_full):
    """``lambda_alpha = -mdot_alpha - v_j E_{j alpha} - dH(e*_alpha)``.

    ``mdot_full`` is the time derivative of the full momentum along the
    constrained flow, e.g. from :func:`full_mdot`.
    """
    s = split.s
    f = constrained_field(H, split, q, m_k)
    mdot_full = np.asarray(mdot_full, float)
    return -mdot_full[s:] - f.v @ f.E[:s, s:] - f.alpha[s:]


def multiplier_reconstruction_residual(H, split, q, m_k, mdot_full, lam):
    """``|mdot_alpha + v_j E_{j alpha} + alpha_alpha + lambda_alpha|`` (should vanish)."""
    s = split.s
    f = constrained_field(H, split, q, m_k)
    res = np.asarray(mdot_full, float)[s:] + f.v @ f.E[:s, s:] + f.alpha[s:] + np.asarray(lam, float)
    return float(np.max(np.abs(res), initial=0.0))


def constraint_force(split, q, lam):
    """Constraint force covector in ``dq`` components: ``-lambda_alpha eps_alpha``."""
    A, _ = eval_frame(split.frame, q)
    return -A[split.s:].T @ np.asarray(lam, float)


@dataclass
class ReducedPoisson:
    """Almost-Poisson matrix on ``{eps_i, eps_alpha, dm_k}``."""

    matrix: np.ndarray
    Ec: np.ndarray
    s: int
    r: int

    def middle(self):
        s, r = self.s, self.r
        return np.concatenate([self.matrix[s:s + r].ravel(), self.matrix[:, s:s + r].ravel()])


def reduced_poisson(H, split, q, m_k):
    """``[[0, 0, I], [0, 0, 0], [-I, 0, E^c]]`` with ``E^c_jk = -p_q [e_j, e_k]`` on the surface."""
    s, r = split.s, split.r
    m = surface_momentum(H, split, q, m_k)
    Ec = e_matrix(q, m, split.frame)[:s, :s]
    P = np.zeros((2 * s + r, 2 * s + r))
    P[:s, s + r:] = np.eye(s)
    P[s + r:, :s] = -np.eye(s)
    P[s + r:, s + r:] = Ec
    return ReducedPoisson(P, Ec, s, r)


def restricted_differential(H, split, q, m_k):
    """Components of ``dH|_P`` on ``{eps_i, eps_alpha, dm_k}``."""
    s = split.s
    m = surface_momentum(H, split, q, m_k)
    alpha, beta = dH_decompose(H, q, m, split.frame)
    return np.concatenate([alpha, beta[:s]])


def field_from_reduced(H, split, q, m_k):
    """Constrained field ``X = P . dH|_P``, returned as ``(qdot, mdot_k)``."""
    s, r = split.s, split.r
    X = reduced_poisson(H, split, q, m_k).matrix @ restricted_differential(H, split, q, m_k)
    _, B = eval_frame(split.frame, q)
    return B @ X[:s + r], X[s + r:]


def compress_hamiltonian(H, split):
    """``H*(q, m_k) = H(q, m_k, m_alpha(q, m_k))`` with envelope-identity gradients."""

    def Hs(q, m_k):
        return H(q, surface_momentum(H, split, q, m_k))

    def dq(q, m_k):
        return H.grad_q(q, surface_momentum(H, split, q, m_k))

    def dm(q, m_k):
        return H.grad_m(q, surface_momentum(H, split, q, m_k))[:split.s]

    return HamiltonianHandle(Hs, dq, dm, h_fd=H.h_fd)


@dataclass
class AlmostCasimirReport:
    middle_max: float
    annihilation: float       # max |eps_alpha(pi_* X)|
    surface_residual: float   # max |dH/dm_alpha|
    double_count: float       # max |dH/dm_alpha - eps_alpha(dH/dp)|
    legendre_projection: float  # max |eps_alpha(dH/dp)|
    tol: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return max(self.middle_max, self.annihilation, self.surface_residual, self.double_count) <= self.tol


def almost_casimir_check(H, split, q, m_k, m_alpha=None, tol=1e-10):
    """Check the almost-Casimir structure of ``eps_alpha`` at a point.

    (a) the ``eps_alpha`` rows/columns of the reduced matrix vanish;
    (b) ``eps_alpha(qdot) = 0`` for the constrained field;
    (c) ``dH/dm_alpha = eps_alpha(dH/dp)`` with ``dH/dp`` from finite
        differences of ``H`` in standard coordinates.

    ``m_alpha`` overrides the surface value (to probe off-surface points).
    """
    s, r = split.s, split.r
    if r == 0:
        return AlmostCasimirReport(0.0, 0.0, 0.0, 0.0, 0.0, tol)
    q = np.asarray(q, float)
    A, B = eval_frame(split.frame, q)
    rp = reduced_poisson(H, split, q, m_k)
    qdot, _ = dalembert_field(H, split, q, m_k)
    if m_alpha is None:
        m = surface_momentum(H, split, q, m_k)
    else:
        m = full_momentum(m_k, m_alpha)
    dHdm_a = H.grad_m(q, m)[s:]
    p = A.T @ m
    dHdp = _numdiff.gradient(lambda pp: H(q, B.T @ pp), p, LEGENDRE_STEP)
    proj = A[s:] @ dHdp
    return AlmostCasimirReport(
        middle_max=float(np.max(np.abs(rp.middle()), initial=0.0)),
        annihilation=float(np.max(np.abs(A[s:] @ qdot))),
        surface_residual=float(np.max(np.abs(dHdm_a))),
        double_count=float(np.max(np.abs(dHdm_a - proj))),
        legendre_projection=float(np.max(np.abs(proj))),
        tol=tol,
    )


def reduced_bivector_coordinates(H, split, q, m_k):
    """The reduced bivector in the coordinate basis ``(dq, dm_k)`` of ``P``."""
    s = split.s
    A, B = eval_frame(split.frame, q)
    n = split.n
    P = reduced_poisson(H, split, q, m_k).matrix
    Cinv = np.zeros((n + s, n + s))
    Cinv[:n, :n] = B
    Cinv[n:, n:] = np.eye(s)
    return Cinv @ P @ Cinv.T


def jacobiator(H, split, q, m_k, h=1e-5):
    """Max absolute Jacobiator of the reduced bracket on coordinate functions.

    Generally non-zero: the nonholonomic bracket is only almost-Poisson.
    """
    x = np.concatenate([np.asarray(q, float), np.asarray(m_k, float)])
    n = split.n

    def Pc(y):
        return reduced_bivector_coordinates(H, split, y[:n], y[n:])

    P = Pc(x)
    dP = _numdiff.derivative(Pc, x, h)
    t = np.einsum("ad,bcd->abc", P, dP)
    J = t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1)
    return float(np.max(np.abs(J)))
