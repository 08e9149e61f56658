"""Charts, moving frames/coframes, Lie brackets and structure functions.

Index conventions used throughout the package:

* coframe matrix ``A`` has rows ``eps_I = a_{IJ} dq_J``;
* frame matrix ``B = inv(A)`` has columns ``e_J = b_{LJ} d/dq_L``;
* derivative tensor ``dA[K, I, J] = d a_{KI} / d q_J``;
* structure functions ``gamma[I, J, K]`` with ``[e_J, e_K] = gamma^I_{JK} e_I``;
* the vector field bracket is ``[v, w] = (Dw) v - (Dv) w``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _numdiff
from .errors import EvaluationFailure, SingularFrame

RCOND_MIN = 1e-10


@dataclass(frozen=True)
class Chart:
    names: tuple
    bounds: Optional[tuple] = None

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) < 1:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate names must be unique: {names}")
        if self.bounds is not None and len(self.bounds) != len(names):
            raise ValueError("bounds must have one entry per coordinate")

    @property
    def dim(self):
        return len(self.names)

    def check(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dim,):
            raise ValueError(f"expected a point of shape ({self.dim},), got {q.shape}")
        return q


@dataclass(frozen=True)
class FrameField:
    """A coframe ``A(q)`` on a single chart, optionally with its derivative."""

    chart: Chart
    coframe: Callable
    dcoframe: Optional[Callable] = None
    h_fd: float = _numdiff.DEFAULT_STEP
    name: str = ""
    # last-point memo: slot 0 holds (key, A, B), slot 1 holds (key, dA)
    _memo: list = field(default_factory=lambda: [None, None], repr=False, compare=False)

    @property
    def dim(self):
        return self.chart.dim


@dataclass(frozen=True)
class VectorFieldHandle:
    chart: Chart
    components: Callable
    jacobian: Optional[Callable] = None
    h_fd: float = _numdiff.DEFAULT_STEP

    def __call__(self, q):
        return np.asarray(self.components(q), dtype=float)

    def derivative(self, q):
        """Jacobian ``J[L, R] = d v_L / d q_R``."""
        if self.jacobian is not None:
            return np.asarray(self.jacobian(q), dtype=float)
        return _numdiff.derivative(self.components, q, self.h_fd)


@dataclass
class StructureFunctions:
    gamma: np.ndarray
    # max |raw[I,J,K] + raw[I,K,J]| before antisymmetrisation
    asymmetry: float = 0.0
    q: np.ndarray = field(default=None, repr=False)


def _coframe_matrix(frame, q):
    try:
        A = np.asarray(frame.coframe(q), dtype=float)
    except (ArithmeticError, ValueError) as exc:
        raise EvaluationFailure(f"coframe evaluation failed at {q!r}: {exc}") from exc
    n = frame.dim
    if A.shape != (n, n):
        raise ValueError(f"coframe must be {n}x{n}, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise EvaluationFailure(f"non-finite coframe at {q!r}")
    return A


def eval_frame(frame, q):
    """Return the coframe matrix ``A(q)`` and its inverse ``B(q)``.

    Raises
    ------
    SingularFrame
        If the reciprocal condition number of ``A`` is below ``RCOND_MIN``.
    """
    q = frame.chart.check(q)
    key = q.tobytes()
    hit = frame._memo[0]
    if hit is not None and hit[0] == key:
        return hit[1], hit[2]
    A = _coframe_matrix(frame, q)
    rcond, B = _rcond_inv(A)
    if not rcond >= RCOND_MIN:
        raise SingularFrame(f"coframe {frame.name or ''} singular at q={q} (rcond={rcond:.3g})")
    frame._memo[0] = (key, A, B)
    return A, B


def _rcond_inv(A):
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError:
        return 0.0, None
    denom = np.abs(A).sum(axis=0).max() * np.abs(Ainv).sum(axis=0).max()
    return (1.0 / denom if np.isfinite(denom) and denom > 0 else 0.0), Ainv


def reciprocal_condition(A):
    """``1 / (|A|_1 |A^-1|_1)``; zero for exactly singular matrices."""
    return _rcond_inv(np.asarray(A, float))[0]


def frame_derivative(frame, q):
    """Tensor ``dA[K, I, J] = d a_{KI} / d q_J`` (analytic when available)."""
    q = frame.chart.check(q)
    key = q.tobytes()
    hit = frame._memo[1]
    if hit is not None and hit[0] == key:
        return hit[1]
    if frame.dcoframe is not None:
        dA = np.asarray(frame.dcoframe(q), dtype=float)
    else:
        dA = _numdiff.derivative(lambda x: _coframe_matrix(frame, x), q, frame.h_fd)
    frame._memo[1] = (key, dA)
    return dA


def frame_fields(frame, q):
    """The frame vector fields ``e_J`` evaluated at ``q`` as columns of ``B``."""
    return eval_frame(frame, q)[1]


def lie_bracket(v, w, q):
    """Lie bracket ``[v, w] = (Dw) v - (Dv) w`` of two vector fields at ``q``."""
    if v.chart != w.chart:
        raise ValueError("vector fields live on different charts")
    q = v.chart.check(q)
    return w.derivative(q) @ v(q) - v.derivative(q) @ w(q)


def frame_vector_field(frame, J):
    """The J-th frame field as a :class:`VectorFieldHandle` (analytic Jacobian via dA)."""

    def comps(q):
        return eval_frame(frame, q)[1][:, J]

    def jac(q):
        _, B = eval_frame(frame, q)
        dA = frame_derivative(frame, q)
        # dB/dq_R = -B (dA/dq_R) B
        return -np.einsum("la,abr,b->lr", B, dA, B[:, J])

    return VectorFieldHandle(frame.chart, comps, jac, frame.h_fd)


def structure_functions(frame, q):
    """Structure functions of the frame at ``q``.

    The brackets ``[e_J, e_K]`` are computed from the frame Jacobians
    ``dB = -B dA B`` and read off in the coframe.  The raw array is then
    antisymmetrised in the lower indices; the size of the discarded symmetric
    part is kept in ``asymmetry``.
    """
    A, B = eval_frame(frame, q)
    dA = frame_derivative(frame, q)
    dB = -np.einsum("la,abr,bk->lkr", B, dA, B)
    # brackets[L, J, K] = (D e_K) e_J - (D e_J) e_K
    De_e = np.einsum("lkr,rj->ljk", dB, B)
    brackets = De_e - De_e.transpose(0, 2, 1)
    raw = np.einsum("il,ljk->ijk", A, brackets)
    sym = raw + raw.transpose(0, 2, 1)
    gamma = 0.5 * (raw - raw.transpose(0, 2, 1))
    return StructureFunctions(gamma=gamma, asymmetry=float(np.max(np.abs(sym), initial=0.0)), q=np.array(q, dtype=float))


# ---------------------------------------------------------------------------
# built-in frames


def identity_frame(n=3):
    names = tuple(f"q{i + 1}" for i in range(n))
    return FrameField(
        Chart(names),
        lambda q: np.eye(n),
        lambda q: np.zeros((n, n, n)),
        name=f"identity{n}",
    )


def shear_frame():
    """``A = [[1, 0], [q1, 1]]``."""

    def A(q):
        return np.array([[1.0, 0.0], [q[0], 1.0]])

    def dA(q):
        d = np.zeros((2, 2, 2))
        d[1, 0, 0] = 1.0
        return d

    return FrameField(Chart(("q1", "q2")), A, dA, name="shear")


def heisenberg_frame():
    """eps1 = dx, eps2 = dy, eps3 = dz - y dx on (x, y, z)."""

    def A(q):
        return np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-q[1], 0.0, 1.0]])

    def dA(q):
        d = np.zeros((3, 3, 3))
        d[2, 0, 1] = -1.0
        return d

    return FrameField(Chart(("x", "y", "z")), A, dA, name="heisenberg")


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_zxz(angles):
    """Rotation matrix ``Rz(phi) Rx(theta) Rz(psi)``."""
    phi, theta, psi = angles
    return rot_z(phi) @ rot_x(theta) @ rot_z(psi)


def so3_body_coframe(angles):
    """Left-invariant coframe on SO(3) in ZXZ Euler angles: ``vee(R^T dR) = A dq``."""
    _, th, ps = angles
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ps), np.cos(ps)
    return np.array([
        [st * sp, cp, 0.0],
        [st * cp, -sp, 0.0],
        [ct, 0.0, 1.0],
    ])


def so3_body_dcoframe(angles):
    _, th, ps = angles
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ps), np.cos(ps)
    d = np.zeros((3, 3, 3))
    d[:, :, 1] = [[ct * sp, 0.0, 0.0], [ct * cp, 0.0, 0.0], [-st, 0.0, 0.0]]
    d[:, :, 2] = [[st * cp, -sp, 0.0], [-st * sp, -cp, 0.0], [0.0, 0.0, 0.0]]
    return d


def so3_space_coframe(angles):
    """Right-invariant coframe: ``vee(dR R^T) = R A_body dq``."""
    return euler_zxz(angles) @ so3_body_coframe(angles)


def so3_euler_frame():
    """Left-invariant frame on SO(3) in ZXZ Euler angles; singular at theta = 0, pi."""
    return FrameField(
        Chart(("phi", "theta", "psi"), bounds=((-np.inf, np.inf), (0.0, np.pi), (-np.inf, np.inf))),
        so3_body_coframe,
        so3_body_dcoframe,
        name="so3_euler",
    )


def sleigh_frame():
    """Forward / heading / lateral frame on (x, y, theta)."""

    def A(q):
        c, s = np.cos(q[2]), np.sin(q[2])
        return np.array([[c, s, 0.0], [0.0, 0.0, 1.0], [-s, c, 0.0]])

    def dA(q):
        c, s = np.cos(q[2]), np.sin(q[2])
        d = np.zeros((3, 3, 3))
        d[:, :, 2] = [[-s, c, 0.0], [0.0, 0.0, 0.0], [-c, -s, 0.0]]
        return d

    return FrameField(Chart(("x", "y", "theta")), A, dA, name="chaplygin_sleigh")


def rolling_disk_frame(radius=1.0):
    """Frame adapted to the vertical rolling disk on (x, y, theta, phi).

    eps1 = dtheta, eps2 = dphi, eps3 = dx - R cos(theta) dphi,
    eps4 = dy - R sin(theta) dphi.
    """
    R = float(radius)

    def A(q):
        c, s = np.cos(q[2]), np.sin(q[2])
        return np.array([
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, -R * c],
            [0.0, 1.0, 0.0, -R * s],
        ])

    def dA(q):
        c, s = np.cos(q[2]), np.sin(q[2])
        d = np.zeros((4, 4, 4))
        d[2, 3, 2] = R * s
        d[3, 3, 2] = -R * c
        return d

    return FrameField(Chart(("x", "y", "theta", "phi")), A, dA, name="vertical_disk")


def random_point(frame, rng, scale=1.0):
    """A random chart point away from known singularities of built-in frames."""
    n = frame.dim
    q = rng.uniform(-scale, scale, n)
    if frame.name == "so3_euler":
        q[1] = rng.uniform(0.3, np.pi - 0.3)
    return q


def builtin_frames():
    """Registered frames used by the duality/inversion suites (stable order)."""
    return {
        f.name: f
        for f in (
            identity_frame(3),
            shear_frame(),
            heisenberg_frame(),
            so3_euler_frame(),
            sleigh_frame(),
            rolling_disk_frame(0.7),
        )
    }
