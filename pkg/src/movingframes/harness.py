"""Time integration, the direct Lagrange-multiplier oracle, and trajectory diagnostics.

The oracle works in ``(q, qdot)`` with the raw constraint matrix and never
calls into the moving-frame modules.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from . import _numdiff
from .errors import (
    EvaluationFailure,
    IncompatibleTrajectories,
    InconsistentInitialData,
    SingularConstraintMetric,
    StepFailure,
)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        self.states = np.asarray(self.states, float)
        self.derivs = np.asarray(self.derivs, float)
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ValueError("times and states must have matching length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]


def _rk4(field, y0, t_end, h, store_every):
    n_steps = int(round(t_end / h))
    if n_steps < 1 or abs(n_steps * h - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end} is not a whole number of steps h={h}")
    y = np.array(y0, dtype=float)
    t = 0.0
    times, states, derivs = [], [], []
    k1 = np.asarray(field(t, y), float)
    for step in range(n_steps):
        if step % store_every == 0:
            times.append(t)
            states.append(y.copy())
            derivs.append(k1)
        k2 = np.asarray(field(t + 0.5 * h, y + 0.5 * h * k1), float)
        k3 = np.asarray(field(t + 0.5 * h, y + 0.5 * h * k2), float)
        k4 = np.asarray(field(t + h, y + h * k3), float)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (step + 1) * h
        if not np.all(np.isfinite(y)):
            raise EvaluationFailure(f"non-finite state at t={t}")
        k1 = np.asarray(field(t, y), float)
    times.append(t)
    states.append(y.copy())
    derivs.append(k1)
    return np.array(times), np.array(states), np.array(derivs)


def _rk45(field, y0, t_end, h, rtol, atol):
    sol = solve_ivp(field, (0.0, t_end), np.asarray(y0, float), method="RK45",
                    rtol=rtol, atol=atol, first_step=h)
    if not sol.success:
        raise StepFailure(sol.message)
    derivs = np.array([field(t, y) for t, y in zip(sol.t, sol.y.T)])
    return sol.t, sol.y.T, derivs


def integrate(field, state0, t_end, h, method="rk4", rtol=1e-10, atol=1e-10,
              store_every=1, diagnostics=None):
    """Integrate ``y' = field(t, y)`` from ``t = 0`` to ``t_end``.

    Parameters
    ----------
    field : callable
        ``(t, y) -> dy/dt``.
    state0 : array_like
        Initial state.
    t_end, h : float
        Final time and step (initial step for ``rk45``).
    method : {"rk4", "rk45"}
        Fixed-step classical RK4 or adaptive Dormand-Prince.
    store_every : int
        Keep every k-th RK4 step (the final state is always kept).
    diagnostics : dict, optional
        ``name -> f(t, y)`` evaluated at each stored state.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    if method == "rk4":
        times, states, derivs = _rk4(field, state0, t_end, h, store_every)
    elif method in ("rk45", "rk45-adaptive"):
        times, states, derivs = _rk45(field, state0, t_end, h, rtol, atol)
    else:
        raise ValueError(f"unknown method {method!r}")
    traj = Trajectory(times, states, derivs)
    for name, f in (diagnostics or {}).items():
        traj.diagnostics[name] = np.array([f(t, y) for t, y in zip(times, states)])
    return traj


@dataclass(frozen=True)
class OracleSystem:
    """``L = 1/2 qdot^T M(q) qdot - V(q)`` with constraints ``A_c(q) qdot = 0``.

    ``dmass[i, j, k] = dM_ij / dq_k`` and ``dconstraint[a, j, k] = dA_c[a, j] / dq_k``
    are optional; finite differences are used when absent.
    """

    n: int
    mass: Callable
    constraint: Optional[Callable] = None
    dmass: Optional[Callable] = None
    dconstraint: Optional[Callable] = None
    potential_grad: Optional[Callable] = None
    force: Optional[Callable] = None
    potential: Optional[Callable] = None

    def constraint_at(self, q):
        if self.constraint is None:
            return np.zeros((0, self.n))
        return np.atleast_2d(np.asarray(self.constraint(q), float))

    def energy(self, q, qdot):
        V = 0.0 if self.potential is None else float(self.potential(q))
        return 0.5 * qdot @ np.asarray(self.mass(q), float) @ qdot + V


def _rcond(S):
    try:
        Sinv = np.linalg.inv(S)
    except np.linalg.LinAlgError:
        return 0.0
    return 1.0 / (np.linalg.norm(S, 1) * np.linalg.norm(Sinv, 1))


def oracle_acceleration(sys, q, qdot):
    """``(qddot, lambda)`` from ``M qddot = F + A_c^T lambda`` and ``d/dt (A_c qdot) = 0``."""
    M = np.asarray(sys.mass(q), float)
    dM = np.asarray(sys.dmass(q), float) if sys.dmass else _numdiff.derivative(sys.mass, q)
    Mdot = dM @ qdot
    F = -Mdot @ qdot + 0.5 * np.einsum("i,ijk,j->k", qdot, dM, qdot)
    if sys.potential_grad is not None:
        F = F - np.asarray(sys.potential_grad(q), float)
    if sys.force is not None:
        F = F + np.asarray(sys.force(q, qdot), float)
    Ac = sys.constraint_at(q)
    if len(Ac) == 0:
        return np.linalg.solve(M, F), np.zeros(0)
    if sys.dconstraint is not None:
        dAc = np.asarray(sys.dconstraint(q), float)
    else:
        dAc = _numdiff.derivative(sys.constraint_at, q)
    Acdot = dAc @ qdot
    MinvAt = np.linalg.solve(M, Ac.T)
    MinvF = np.linalg.solve(M, F)
    S = Ac @ MinvAt
    if _rcond(S) < 1e-12:
        raise SingularConstraintMetric(f"A_c M^-1 A_c^T singular at q={q}")
    lam = np.linalg.solve(S, -(Ac @ MinvF + Acdot @ qdot))
    return MinvF + MinvAt @ lam, lam


def oracle_direct(sys, q0, qdot0, t_end, h, store_every=1, tol=1e-10):
    """Integrate the constrained Euler-Lagrange system, recording multipliers."""
    q0 = np.asarray(q0, float)
    qdot0 = np.asarray(qdot0, float)
    res = sys.constraint_at(q0) @ qdot0
    if res.size and np.max(np.abs(res)) > tol:
        raise InconsistentInitialData(f"A_c(q0) qdot0 = {res}")
    n = sys.n

    def field(t, y):
        qdd, _ = oracle_acceleration(sys, y[:n], y[n:])
        return np.concatenate([y[n:], qdd])

    def mult(t, y):
        return oracle_acceleration(sys, y[:n], y[n:])[1]

    def resid(t, y):
        r = sys.constraint_at(y[:n]) @ y[n:]
        return float(np.max(np.abs(r), initial=0.0))

    return integrate(field, np.concatenate([q0, qdot0]), t_end, h, store_every=store_every,
                     diagnostics={"multipliers": mult, "constraint_residual": resid,
                                  "energy": lambda t, y: sys.energy(y[:n], y[n:])})


def _hermite(traj, grid):
    return CubicHermiteSpline(traj.times, traj.states, traj.derivs, axis=0)(grid)


def compare(t1, t2, state_map1=None, state_map2=None):
    """Sup-norm deviation between two trajectories on the union of their time grids.

    Native states are interpolated with cubic Hermite splines (stored
    derivatives) and then passed through the optional state maps.
    """
    lo = max(t1.times[0], t2.times[0])
    hi = min(t1.times[-1], t2.times[-1])
    if hi <= lo:
        raise IncompatibleTrajectories("trajectories do not overlap in time")
    grid = np.union1d(t1.times, t2.times)
    grid = grid[(grid >= lo) & (grid <= hi)]
    s1 = _hermite(t1, grid)
    s2 = _hermite(t2, grid)
    if state_map1 is not None:
        s1 = np.array([state_map1(y) for y in s1])
    if state_map2 is not None:
        s2 = np.array([state_map2(y) for y in s2])
    if s1.shape != s2.shape:
        raise IncompatibleTrajectories(f"mapped states differ in shape: {s1.shape} vs {s2.shape}")
    dev = np.abs(s1 - s2)
    return {"sup": float(dev.max()), "per_component": dev.max(axis=0), "grid_size": len(grid)}


def monitor(traj, quantities):
    """Evaluate named quantities ``f(t, y)`` along a trajectory and report drift."""
    table = {}
    for name, f in quantities.items():
        vals = np.array([f(t, y) for t, y in zip(traj.times, traj.states)], float)
        table[name] = {"values": vals, "max_drift": float(np.max(np.abs(vals - vals[0])))}
    return table


def convergence_order(errors, steps):
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])
