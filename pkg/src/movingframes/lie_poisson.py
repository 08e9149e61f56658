"""Lie groups: constant E-matrices, the KAKS pairing and Lie-Poisson flows."""

from dataclasses import dataclass

import numpy as np

from . import _numdiff


@dataclass(frozen=True)
class LieAlgebraData:
    """Structure constants ``c[I, J, K]`` with ``[X_J, X_K] = c^I_{JK} X_I``."""

    c: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValueError(f"structure constants must be r x r x r, got {c.shape}")
        object.__setattr__(self, "c", c)

    @property
    def dim(self):
        return self.c.shape[0]

    def antisymmetry_residual(self):
        return float(np.max(np.abs(self.c + self.c.transpose(0, 2, 1)), initial=0.0))

    def jacobi_residual(self):
        """Max over (M, J, K, L) of the cyclic sum of ``c^M_{JN} c^N_{KL}``."""
        c = self.c
        t = np.einsum("mjn,nkl->mjkl", c, c)
        cyc = t + t.transpose(0, 2, 3, 1) + t.transpose(0, 3, 1, 2)
        return float(np.max(np.abs(cyc), initial=0.0))


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    return eps


def so3():
    return LieAlgebraData(levi_civita(), "so3")


def abelian(r):
    return LieAlgebraData(np.zeros((r, r, r)), f"R^{r}")


def hat(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def e_matrix_left(alg, m):
    """``E_{JK} = -m_I c^I_{JK}`` (left-invariant frame; independent of the group point)."""
    m = np.asarray(m, dtype=float)
    if m.shape != (alg.dim,):
        raise ValueError(f"m must have length {alg.dim}")
    return -np.einsum("i,ijk->jk", m, alg.c)


def e_matrix_right(alg, m):
    """Right-invariant convention: ``E_{JK} = +m_I c^I_{JK}``."""
    return -e_matrix_left(alg, m)


def kaks_pairing(X1, z1, X2, z2, E):
    """``Omega(V1, V2) = X2.z1 - X1.z2 + X1^T E X2``."""
    X1, z1, X2, z2 = (np.asarray(a, dtype=float) for a in (X1, z1, X2, z2))
    return float(X2 @ z1 - X1 @ z2 + X1 @ np.asarray(E, float) @ X2)


def _grad(f, mu, grad):
    if grad is not None:
        return np.asarray(grad(mu), dtype=float)
    return _numdiff.gradient(f, mu)


def lie_poisson_bracket(f, g, mu, alg, grad_f=None, grad_g=None):
    """``{f, g}(mu) = -mu_I c^I_{JK} (df)_J (dg)_K``."""
    mu = np.asarray(mu, dtype=float)
    df = _grad(f, mu, grad_f)
    dg = _grad(g, mu, grad_g)
    return float(df @ e_matrix_left(alg, mu) @ dg)


def lie_poisson_field(grad_H, mu, alg):
    """Hamiltonian vector field ``mu_dot_J = {mu_J, H} = E_{JK}(mu) dH_K``."""
    return e_matrix_left(alg, mu) @ np.asarray(grad_H, dtype=float)


def lie_poisson_jacobiator(alg, mu):
    """Cyclic sum ``{x_a, {x_b, x_c}} + ...`` on coordinate functions at ``mu``.

    The bivector is linear in mu so its derivative is exactly ``-c``.
    """
    P = e_matrix_left(alg, mu)
    dP = -alg.c.transpose(1, 2, 0)  # dP[b, c, d] = d P_bc / d mu_d
    t = np.einsum("ad,bcd->abc", P, dP)
    return t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1)


def rigid_body_energy(m, inertia):
    m = np.asarray(m, float)
    return 0.5 * float(np.sum(m * m / np.asarray(inertia, float)))


def rigid_body_field(m, inertia):
    """Euler equations ``m_dot = m x omega`` with ``omega_I = m_I / I_I``."""
    I1, I2, I3 = inertia
    if min(I1, I2, I3) <= 0:
        raise ValueError("principal moments of inertia must be positive")
    m1, m2, m3 = m
    w1, w2, w3 = m1 / I1, m2 / I2, m3 / I3
    return np.array([m2 * w3 - m3 * w2, m3 * w1 - m1 * w3, m1 * w2 - m2 * w1])
