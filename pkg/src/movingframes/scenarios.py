"""Benchmark mechanical systems, each in two independent formulations.

Every nonholonomic scenario provides an adapted moving frame plus a
quadratic Hamiltonian for the moving-frame flow, and the raw mass matrix and
constraint matrix for the direct multiplier oracle.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cotangent import QuadraticHamiltonian
from .errors import ConfigError, MovingFrameError
from .frames import FrameField, eval_frame, heisenberg_frame, rolling_disk_frame, shear_frame, sleigh_frame
from .harness import OracleSystem, integrate, oracle_direct
from .lie_poisson import rigid_body_energy, rigid_body_field
from .nonholonomic import (
    ConstraintSplit,
    compress_hamiltonian,
    constrained_field,
    dalembert_field,
    full_mdot,
    multipliers,
    solve_constraint_surface,
)

ROW_MIX_TOL = 1e-12
# masses, inertias and radii must be positive
POSITIVE_PREFIXES = ("mass", "inertia", "radius")


@dataclass
class NonholonomicScenario:
    name: str
    frame: FrameField
    s: int
    mass: Callable
    dmass: Callable
    constraint: Optional[Callable]
    dconstraint: Optional[Callable]
    q0: np.ndarray
    u0: np.ndarray
    potential: Callable = None
    dpotential: Callable = None
    params: dict = field(default_factory=dict)
    first_integrals: dict = field(default_factory=dict)

    def __post_init__(self):
        self.q0 = np.asarray(self.q0, float)
        self.u0 = np.asarray(self.u0, float)
        self.hamiltonian = QuadraticHamiltonian(self.frame, self.mass, self.dmass, self.potential, self.dpotential)
        self.split = ConstraintSplit(self.frame, self.s)
        self.compressed = compress_hamiltonian(self.hamiltonian, self.split)
        self.oracle = OracleSystem(
            n=self.frame.dim,
            mass=self.mass,
            constraint=self.constraint,
            dmass=self.dmass,
            dconstraint=self.dconstraint,
            potential_grad=self.dpotential,
            potential=self.potential,
        )
        self._check_row_mix(self.q0)

    @property
    def n(self):
        return self.frame.dim

    @property
    def r(self):
        return self.n - self.s

    # -- conversions -------------------------------------------------------

    def initial_velocity(self, q=None, u=None):
        q = self.q0 if q is None else np.asarray(q, float)
        u = self.u0 if u is None else np.asarray(u, float)
        _, B = eval_frame(self.frame, q)
        return B[:, :self.s] @ u

    def surface_state(self, q, qdot):
        """``(q, m_k)`` from a consistent ``(q, qdot)`` via ``p = M qdot``."""
        q = np.asarray(q, float)
        _, B = eval_frame(self.frame, q)
        m = B.T @ (np.asarray(self.mass(q), float) @ np.asarray(qdot, float))
        return np.concatenate([q, m[:self.s]])

    def initial_state(self):
        return self.surface_state(self.q0, self.initial_velocity())

    def to_velocity_state(self, y):
        """Map a moving-frame state ``(q, m_k)`` to ``(q, qdot)``."""
        q, m_k = y[:self.n], y[self.n:]
        qdot, _ = dalembert_field(self.hamiltonian, self.split, q, m_k)
        return np.concatenate([q, qdot])

    def row_mix(self, q):
        """``W`` with ``A_c = W A_alpha``; the fit residual is checked."""
        A, _ = eval_frame(self.frame, q)
        Aa = A[self.s:]
        Ac = np.atleast_2d(np.asarray(self.constraint(q), float))
        Wt, *_ = np.linalg.lstsq(Aa.T, Ac.T, rcond=None)
        W = Wt.T
        resid = np.max(np.abs(W @ Aa - Ac), initial=0.0)
        if resid > ROW_MIX_TOL:
            raise MovingFrameError(f"{self.name}: constraint rows not spanned by eps_alpha (residual {resid:.3g})")
        return W

    def _check_row_mix(self, q):
        if self.r:
            self.row_mix(q)

    def oracle_to_frame_multipliers(self, q, lam_oracle):
        """Oracle multipliers (rows of ``A_c``) expressed on ``eps_alpha``: ``-W^T lam``."""
        return -self.row_mix(q).T @ np.asarray(lam_oracle, float)

    # -- flows -------------------------------------------------------------

    def field(self, t, y):
        qdot, mdot_k = dalembert_field(self.hamiltonian, self.split, y[:self.n], y[self.n:])
        return np.concatenate([qdot, mdot_k])

    def energy(self, y):
        return self.compressed(y[:self.n], y[self.n:])

    def frame_multipliers(self, y):
        q, m_k = y[:self.n], y[self.n:]
        return multipliers(self.hamiltonian, self.split, q, m_k, full_mdot(self.hamiltonian, self.split, q, m_k))

    def surface_residual(self, y):
        q, m_k = y[:self.n], y[self.n:]
        m = np.concatenate([m_k, solve_constraint_surface(self.hamiltonian, self.split, q, m_k)])
        return float(np.max(np.abs(self.hamiltonian.grad_m(q, m)[self.s:]), initial=0.0))

    def annihilation_residual(self, y):
        q = y[:self.n]
        f = constrained_field(self.hamiltonian, self.split, q, y[self.n:])
        A, _ = eval_frame(self.frame, q)
        return float(np.max(np.abs(A[self.s:] @ f.qdot), initial=0.0))

    def run(self, t_end, h, method="rk4", store_every=1, **kw):
        return integrate(self.field, self.initial_state(), t_end, h, method=method, store_every=store_every, **kw)

    def run_oracle(self, t_end, h, store_every=1):
        return oracle_direct(self.oracle, self.q0, self.initial_velocity(), t_end, h, store_every=store_every)

    def conserved(self):
        """Scenario-specific first integrals ``name -> f(y)`` on moving-frame states."""
        return dict(self.first_integrals)


def _diag_mass(values):
    values = np.asarray(values, float)

    def M(q):
        return np.diag(values)

    def dM(q):
        return np.zeros((len(values),) * 3)

    return M, dM


def heisenberg_particle(mass=1.0, q0=(0.3, -0.5, 0.2), u0=(0.8, 0.6)):
    """Free particle in R^3 with the constraint ``zdot = y xdot``."""
    M, dM = _diag_mass([mass] * 3)

    def Ac(q):
        return np.array([[-q[1], 0.0, 1.0]])

    def dAc(q):
        d = np.zeros((1, 3, 3))
        d[0, 0, 1] = -1.0
        return d

    return NonholonomicScenario("heisenberg_particle", heisenberg_frame(), 2, M, dM, Ac, dAc, q0, u0,
                                params={"mass": mass})


def vertical_disk(mass=1.0, radius=0.7, inertia_heading=0.25, inertia_roll=0.5,
                  q0=(0.1, -0.2, 0.4, 0.0), u0=(0.9, 1.3)):
    """Upright disk rolling without slipping on (x, y, theta, phi).

    Frame velocities ``u = (theta_dot, phi_dot)``.
    """
    M, dM = _diag_mass([mass, mass, inertia_heading, inertia_roll])
    R = float(radius)

    def Ac(q):
        c, s = np.cos(q[2]), np.sin(q[2])
        return np.array([[1.0, 0.0, 0.0, -R * c], [0.0, 1.0, 0.0, -R * s]])

    def dAc(q):
        c, s = np.cos(q[2]), np.sin(q[2])
        d = np.zeros((2, 4, 4))
        d[0, 3, 2] = R * s
        d[1, 3, 2] = -R * c
        return d

    sc = NonholonomicScenario("vertical_disk", rolling_disk_frame(R), 2, M, dM, Ac, dAc, q0, u0,
                              params=dict(mass=mass, radius=radius, inertia_heading=inertia_heading,
                                          inertia_roll=inertia_roll))
    # heading and rolling rates are first integrals
    sc.first_integrals = {
        "theta_dot": lambda y: float(sc.to_velocity_state(y)[6]),
        "phi_dot": lambda y: float(sc.to_velocity_state(y)[7]),
    }
    return sc


def chaplygin_sleigh(mass=1.0, inertia=0.2, offset=0.4, q0=(0.0, 0.0, 0.3), u0=(1.0, 0.7)):
    """Chaplygin sleigh: contact point (x, y), heading theta, centre of mass at
    distance ``offset`` ahead of the knife edge; ``inertia`` is about the centre of mass.

    Frame velocities ``u = (forward speed, theta_dot)``.
    """
    m, Ic, a = float(mass), float(inertia), float(offset)

    def M(q):
        c, s = np.cos(q[2]), np.sin(q[2])
        return np.array([[m, 0.0, -m * a * s], [0.0, m, m * a * c], [-m * a * s, m * a * c, Ic + m * a * a]])

    def dM(q):
        c, s = np.cos(q[2]), np.sin(q[2])
        d = np.zeros((3, 3, 3))
        d[:, :, 2] = [[0.0, 0.0, -m * a * c], [0.0, 0.0, -m * a * s], [-m * a * c, -m * a * s, 0.0]]
        return d

    def Ac(q):
        return np.array([[-np.sin(q[2]), np.cos(q[2]), 0.0]])

    def dAc(q):
        d = np.zeros((1, 3, 3))
        d[0, :, 2] = [-np.cos(q[2]), -np.sin(q[2]), 0.0]
        return d

    return NonholonomicScenario("chaplygin_sleigh", sleigh_frame(), 2, M, dM, Ac, dAc, q0, u0,
                                params=dict(mass=mass, inertia=inertia, offset=offset))


def shear_demo(mass=1.0, stiffness=1.0, q0=(0.5, -0.3), u0=(0.2, 0.4)):
    """Unconstrained harmonic oscillator written in the shear frame (s = n)."""
    M, dM = _diag_mass([mass, mass])
    k = float(stiffness)
    return NonholonomicScenario(
        "shear_demo", shear_frame(), 2, M, dM, None, None, q0, u0,
        potential=lambda q: 0.5 * k * float(q @ q),
        dpotential=lambda q: k * np.asarray(q, float),
        params=dict(mass=mass, stiffness=stiffness),
    )


@dataclass
class RigidBodyScenario:
    """Free rigid body on so(3)*, Lie-Poisson flow of the body angular momentum."""

    inertia: tuple
    m0: np.ndarray
    name: str = "rigid_body"

    def __post_init__(self):
        self.inertia = tuple(float(x) for x in self.inertia)
        self.m0 = np.asarray(self.m0, float)
        if min(self.inertia) <= 0:
            raise ConfigError("inertia entries must be positive")

    n = 0
    s = 3
    r = 0

    def field(self, t, y):
        return rigid_body_field(y, self.inertia)

    def initial_state(self):
        return self.m0.copy()

    def energy(self, y):
        return rigid_body_energy(y, self.inertia)

    def conserved(self):
        return {"casimir": lambda y: float(y @ y)}

    def run(self, t_end, h, method="rk4", store_every=1, **kw):
        return integrate(self.field, self.initial_state(), t_end, h, method=method, store_every=store_every, **kw)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    module: str
    parameters: tuple
    initial: dict
    build: Callable
    reference: str


def _build_rigid(params, initial):
    return RigidBodyScenario((params["inertia_1"], params["inertia_2"], params["inertia_3"]),
                             initial.get("m", (1.0, 1.0, 1.0)))


def _build_nh(factory, keys):
    def build(params, initial):
        kwargs = {k: params[k] for k in keys}
        if "q" in initial:
            kwargs["q0"] = initial["q"]
        if "u" in initial:
            kwargs["u0"] = initial["u"]
        return factory(**kwargs)

    return build


REGISTRY = {
    spec.name: spec
    for spec in (
        ScenarioSpec("rigid_body", "lie_poisson", ("inertia_1", "inertia_2", "inertia_3"),
                     {"m": 3}, _build_rigid, "Euler equations on so(3)*"),
        ScenarioSpec("heisenberg_particle", "nonholonomic", ("mass",), {"q": 3, "u": 2},
                     _build_nh(heisenberg_particle, ("mass",)), "particle with zdot = y xdot"),
        ScenarioSpec("vertical_disk", "nonholonomic", ("mass", "radius", "inertia_heading", "inertia_roll"),
                     {"q": 4, "u": 2},
                     _build_nh(vertical_disk, ("mass", "radius", "inertia_heading", "inertia_roll")),
                     "upright rolling disk"),
        ScenarioSpec("chaplygin_sleigh", "nonholonomic", ("mass", "inertia", "offset"), {"q": 3, "u": 2},
                     _build_nh(chaplygin_sleigh, ("mass", "inertia", "offset")), "knife-edge sleigh"),
        ScenarioSpec("shear_demo", "nonholonomic", ("mass", "stiffness"), {"q": 2, "u": 2},
                     _build_nh(shear_demo, ("mass", "stiffness")), "oscillator in a shear frame (s = n)"),
    )
}


def build_scenario(name, params, initial=None):
    try:
        spec = REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; registered: {', '.join(REGISTRY)}") from None
    missing = [p for p in spec.parameters if p not in params]
    if missing:
        raise ConfigError(f"scenario {name!r} is missing parameters: {', '.join(missing)}")
    unknown = [p for p in params if p not in spec.parameters]
    if unknown:
        raise ConfigError(f"scenario {name!r} got unknown parameters: {', '.join(unknown)}")
    initial = dict(initial or {})
    for key, length in spec.initial.items():
        if key in initial and len(initial[key]) != length:
            raise ConfigError(f"initial {key!r} for {name!r} must have length {length}")
    bad = [k for k in initial if k not in spec.initial]
    if bad:
        raise ConfigError(f"scenario {name!r} got unknown initial-state keys: {', '.join(bad)}")
    params = {k: float(v) for k, v in params.items()}
    bad = [k for k, v in params.items() if k.startswith(POSITIVE_PREFIXES) and not v > 0]
    if bad:
        raise ConfigError(f"scenario {name!r} needs positive values for: {', '.join(bad)}")
    return spec.build(params, initial)
