"""E-matrix blocks for a principal bundle with connection.

The total space is described by one chart ``q = (s_1..s_s, fiber coords)``
whose first ``s`` coordinates are base coordinates.  The base frame is the
coordinate frame ``d/ds_i``, lifted horizontally; the vertical frame fields
are the infinitesimal generators ``e_alpha = X_alpha . q``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _numdiff
from .errors import SingularFrame
from .frames import Chart, FrameField, VectorFieldHandle, eval_frame, lie_bracket, reciprocal_condition
from .lie_poisson import LieAlgebraData, e_matrix_right


@dataclass(frozen=True)
class ConnectionData:
    """Connection form, vertical generators and (optionally) section data.

    Parameters
    ----------
    chart : Chart
        Total-space chart; the first ``s`` coordinates are base coordinates.
    s : int
        Base dimension.
    lam : callable
        ``q -> (r, n)`` matrix of the Lie-algebra-valued connection form.
    algebra : LieAlgebraData
        Structure constants of the group.
    generators : callable
        ``q -> (n, r)`` matrix whose columns are ``X_alpha . q``.
    section : callable, optional
        ``s -> q`` point of a local section.
    split : callable, optional
        ``q -> (s, g)`` with ``q = g . section(s)``.
    adjoint : callable, optional
        ``g -> (r, r)`` matrix with ``Ad_g X_alpha = A[mu, alpha] X_mu``.
    coadjoint_transport : callable, optional
        ``(g, m_vertical) -> m_vertical'`` momentum transported by the lifted action.
    act : callable, optional
        ``(g, q) -> g . q`` in chart coordinates.
    """

    chart: Chart
    s: int
    lam: Callable
    algebra: LieAlgebraData
    generators: Callable
    section: Optional[Callable] = None
    split: Optional[Callable] = None
    adjoint: Optional[Callable] = None
    coadjoint_transport: Optional[Callable] = None
    act: Optional[Callable] = None
    name: str = ""
    h_fd: float = _numdiff.DEFAULT_STEP

    @property
    def n(self):
        return self.chart.dim

    @property
    def r(self):
        return self.n - self.s

    def lam_at(self, q):
        return np.asarray(self.lam(q), dtype=float)

    def gens_at(self, q):
        return np.asarray(self.generators(q), dtype=float)


def horizontal_lift(conn, q, i):
    """Horizontal lift of ``d/ds_i``: ``d/ds_i + V xi`` with ``lam(lift) = 0``."""
    q = conn.chart.check(q)
    lam = conn.lam_at(q)
    V = conn.gens_at(q)
    base = np.zeros(conn.n)
    base[i] = 1.0
    M = lam @ V
    if reciprocal_condition(M) < 1e-10:
        raise SingularFrame(f"vertical generators degenerate at q={q}")
    xi = np.linalg.solve(M, -lam @ base)
    return base + V @ xi


def lift_field(conn, i):
    return VectorFieldHandle(conn.chart, lambda q: horizontal_lift(conn, q, i), h_fd=conn.h_fd)


def generator_field(conn, alpha):
    return VectorFieldHandle(conn.chart, lambda q: conn.gens_at(q)[:, alpha], h_fd=conn.h_fd)


def frame_matrix(conn, q):
    """``B = [lifts | generators]`` (columns are the adapted frame)."""
    lifts = np.column_stack([horizontal_lift(conn, q, i) for i in range(conn.s)])
    return np.hstack([lifts, conn.gens_at(q)])


def bundle_frame(conn):
    """The adapted frame as a :class:`FrameField` (derivatives by finite differences)."""
    return FrameField(
        conn.chart,
        lambda q: np.linalg.inv(frame_matrix(conn, q)),
        None,
        conn.h_fd,
        name=f"bundle:{conn.name}",
    )


def curvature(conn, q, i, j):
    """``K(e_i, e_j) = -lam([e_i, e_j])`` for horizontal lifts of coordinate fields."""
    br = lie_bracket(lift_field(conn, i), lift_field(conn, j), q)
    return -conn.lam_at(q) @ br


def jk_block(conn, q, m):
    """``E_ij = <J(p), K(e_i, e_j)>`` with momentum-map components ``m_alpha``."""
    s = conn.s
    m_vert = np.asarray(m, float)[s:]
    E = np.zeros((s, s))
    for i in range(s):
        for j in range(i + 1, s):
            E[i, j] = m_vert @ curvature(conn, q, i, j)
            E[j, i] = -E[i, j]
    return E


def jk_block_direct(conn, q, m):
    """``E_ij = -p_q [e_i, e_j]`` with ``p = A^T m`` in the adapted coframe."""
    A, _ = eval_frame(bundle_frame(conn), q)
    p = A.T @ np.asarray(m, float)
    s = conn.s
    E = np.zeros((s, s))
    for i in range(s):
        for j in range(i + 1, s):
            E[i, j] = -p @ lie_bracket(lift_field(conn, i), lift_field(conn, j), q)
            E[j, i] = -E[i, j]
    return E


def vertical_block(conn, m):
    """``E_{alpha beta} = +m_gamma c^gamma_{alpha beta}`` (generators are right-invariant)."""
    return e_matrix_right(conn.algebra, np.asarray(m, float)[conn.s:])


def bracket_coefficients(conn, q):
    """``b[gamma, i, alpha]`` with ``[e_i, e_alpha](q) = b^gamma_{i alpha} e_gamma``."""
    A, _ = eval_frame(bundle_frame(conn), q)
    s, r = conn.s, conn.r
    b = np.zeros((r, s, r))
    for i in range(s):
        for a in range(r):
            br = lie_bracket(lift_field(conn, i), generator_field(conn, a), q)
            b[:, i, a] = (A @ br)[s:]
    return b


def mixed_block(conn, base_point, g, m):
    """``E_{i alpha}`` at ``g . section(s)``.

    At the section ``E_{i alpha} = -m_gamma b^gamma_{i alpha}(s)``; elsewhere on the
    fibre the alpha-column is multiplied by the adjoint matrix ``A_Ad(g)``.
    """
    if conn.section is None:
        raise ValueError("mixed_block needs a section")
    q0 = np.asarray(conn.section(np.asarray(base_point, float)), float)
    b = bracket_coefficients(conn, q0)
    E0 = -np.einsum("c,cia->ia", np.asarray(m, float)[conn.s:], b)
    if g is None:
        return E0
    Ad = np.asarray(conn.adjoint(g), float)
    return E0 @ Ad


def assemble_bundle_e(conn, q, m):
    """Full ``n x n`` E from the J.K, vertical and mixed blocks."""
    q = conn.chart.check(q)
    s = conn.s
    n = conn.n
    E = np.zeros((n, n))
    E[:s, :s] = jk_block(conn, q, m)
    E[s:, s:] = vertical_block(conn, m)
    if s and conn.r:
        if conn.split is not None:
            base_point, g = conn.split(q)
            Eia = mixed_block(conn, base_point, g, m)
        else:
            b = bracket_coefficients(conn, q)
            Eia = -np.einsum("c,cia->ia", np.asarray(m, float)[s:], b)
        E[:s, s:] = Eia
        E[s:, :s] = -Eia.T
    return E


# ---------------------------------------------------------------------------
# registered bundles


def heisenberg_bundle():
    """R-bundle over R^2 with connection ``dz - y dx``."""
    chart = Chart(("x", "y", "z"))
    return ConnectionData(
        chart=chart,
        s=2,
        lam=lambda q: np.array([[-q[1], 0.0, 1.0]]),
        algebra=LieAlgebraData(np.zeros((1, 1, 1)), "R"),
        generators=lambda q: np.array([[0.0], [0.0], [1.0]]),
        section=lambda sp: np.array([sp[0], sp[1], 0.0]),
        split=lambda q: (np.array(q[:2]), np.array([q[2]])),
        adjoint=lambda g: np.eye(1),
        coadjoint_transport=lambda g, mv: np.array(mv, float),
        act=lambda g, q: np.array([q[0], q[1], q[2] + g[0]]),
        name="heisenberg",
    )


def flat_bundle(s=2, r=1):
    """Trivial abelian bundle ``R^s x R^r`` with the flat connection."""
    n = s + r
    chart = Chart(tuple(f"s{i + 1}" for i in range(s)) + tuple(f"g{a + 1}" for a in range(r)))
    lam = np.hstack([np.zeros((r, s)), np.eye(r)])
    gens = np.vstack([np.zeros((s, r)), np.eye(r)])
    return ConnectionData(
        chart=chart,
        s=s,
        lam=lambda q: lam,
        algebra=LieAlgebraData(np.zeros((r, r, r)), f"R^{r}"),
        generators=lambda q: gens,
        section=lambda sp: np.concatenate([sp, np.zeros(r)]),
        split=lambda q: (np.array(q[:s]), np.array(q[s:])),
        adjoint=lambda g: np.eye(r),
        coadjoint_transport=lambda g, mv: np.array(mv, float),
        act=lambda g, q: np.concatenate([q[:s], q[s:] + g]),
        name="flat",
    )


def _default_potential(sp):
    """Gauge potential ``a(s)``: 3 x 2, columns ``a_1, a_2`` (body components)."""
    s1, s2 = sp
    return np.array([
        [0.4 * s2, 0.2],
        [0.1, 1.0 - 0.3 * s1],
        [0.3 + 0.5 * s1 * s2, 0.25 * s2],
    ])


def so3_bundle(potential=_default_potential, invariant=True):
    """Trivial bundle ``R^2 x SO(3)``, ZXZ Euler angles on the fibre.

    ``G = SO(3)`` acts on the left, ``g . (s, R) = (s, g R)``.  The connection is
    ``lam = vee(dR R^T) + R a(s) ds`` which is Ad-equivariant; with
    ``invariant=False`` the potential is taken in space rather than body
    components, ``lam = vee(dR R^T) + a(s) ds``, which breaks equivariance and
    makes the mixed block non-zero.
    """
    from .frames import euler_zxz, so3_space_coframe
    from .lie_poisson import so3

    chart = Chart(("s1", "s2", "phi", "theta", "psi"))

    def lam(q):
        ang = q[2:]
        a = potential(q[:2])
        if invariant:
            a = euler_zxz(ang) @ a
        return np.hstack([a, so3_space_coframe(ang)])

    def gens(q):
        Ainv = np.linalg.inv(so3_space_coframe(q[2:]))
        return np.vstack([np.zeros((2, 3)), Ainv])

    def section(sp):
        return np.array([sp[0], sp[1], 0.3, 1.1, -0.2])

    def rot_to_zxz(R):
        theta = np.arccos(np.clip(R[2, 2], -1.0, 1.0))
        phi = np.arctan2(R[0, 2], -R[1, 2])
        psi = np.arctan2(R[2, 0], R[2, 1])
        return np.array([phi, theta, psi])

    def act(g, q):
        R = np.asarray(g) @ euler_zxz(q[2:])
        return np.concatenate([q[:2], rot_to_zxz(R)])

    def split(q):
        R0 = euler_zxz(section(q[:2])[2:])
        g = euler_zxz(q[2:]) @ R0.T
        return np.array(q[:2]), g

    return ConnectionData(
        chart=chart,
        s=2,
        lam=lam,
        algebra=so3(),
        generators=gens,
        section=section,
        split=split if invariant else None,
        adjoint=lambda g: np.asarray(g, float),
        coadjoint_transport=lambda g, mv: np.asarray(g, float) @ np.asarray(mv, float),
        act=act,
        name="so3" if invariant else "so3_noninvariant",
    )


def builtin_bundles():
    return {b.name: b for b in (flat_bundle(), heisenberg_bundle(), so3_bundle())}
