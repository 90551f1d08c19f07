"""Direct time integration of the chain equations (kick-drift-kick).

This is the independent oracle for the spectral solution: it never looks at
mode frequencies, only at pair forces.  Two topologies are supported:

* ``PinnedLine(N)``: sites 0..N-1, site 0 held at zero, constant driving on
  site N-1.  Positions are absolute (z_n), starting on the lattice n*a.
* ``CircleForced(N)``: the 4N-2 site ring with driving +f0 at N-1, N and -f0
  at 3N-2, 3N-1.  Positions are deviations y_n; only the harmonic bond is
  meaningful here.

Masses are equal; ``mass`` defaults to 1 so that ``f0`` is a force per unit
mass and ``kappa`` equals omega0 squared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np
from numba import njit

from .chain import ChainParams, Convention, as_convention, exact_displacements
from .errors import DomainError, StabilityError
from .potentials import MiePotential, QuadraticPotential, stiffness_bound

MIN_GAP_FRACTION = 1e-6


@dataclass(frozen=True)
class PinnedLine:
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("pinned line needs N >= 2")

    @property
    def n_sites(self) -> int:
        return self.N


@dataclass(frozen=True)
class CircleForced:
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("forced circle needs N >= 2")

    @property
    def n_sites(self) -> int:
        return 4 * self.N - 2

    def forcing_pattern(self) -> np.ndarray:
        N, L = self.N, self.n_sites
        p = np.zeros(L)
        p[(N - 1) % L] += 1.0
        p[N % L] += 1.0
        p[(3 * N - 2) % L] -= 1.0
        p[(3 * N - 1) % L] -= 1.0
        return p


Topology = Union[PinnedLine, CircleForced]
Potential = Union[QuadraticPotential, MiePotential]


@dataclass(frozen=True)
class SystemSpec:
    topology: Topology
    potential: Potential
    f0: float = 0.0
    mass: float = 1.0

    def __post_init__(self):
        if isinstance(self.topology, CircleForced) and not isinstance(self.potential, QuadraticPotential):
            raise DomainError("the forced circle is defined for the harmonic bond only")
        if not self.mass > 0:
            raise DomainError("mass must be positive")

    @classmethod
    def harmonic(cls, params: ChainParams, circle: bool = False) -> "SystemSpec":
        topo = CircleForced(params.N) if circle else PinnedLine(params.N)
        return cls(topo, QuadraticPotential(kappa=params.omega0**2, a=params.a), f0=params.f0)

    @property
    def N(self) -> int:
        return self.topology.N


@dataclass(frozen=True)
class ChainState:
    t: float
    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        if len(self.positions) != len(self.velocities):
            raise DomainError("positions and velocities differ in length")


def initial_state(spec: SystemSpec) -> ChainState:
    L = spec.topology.n_sites
    if isinstance(spec.topology, PinnedLine):
        z = np.arange(L) * spec.potential.a
    else:
        z = np.zeros(L)
    return ChainState(0.0, z, np.zeros(L))


def _gaps(spec: SystemSpec, z: np.ndarray) -> np.ndarray:
    gaps = np.diff(z)
    if isinstance(spec.potential, MiePotential):
        gmin = gaps.min()
        if not gmin > MIN_GAP_FRACTION * spec.potential.a:
            raise StabilityError(f"gap collapsed to {gmin:.3e}; Mie potential is singular at 0")
    return gaps


def acceleration(spec: SystemSpec, z: np.ndarray) -> np.ndarray:
    topo = spec.topology
    if isinstance(topo, CircleForced):
        kappa = spec.potential.kappa
        lap = np.roll(z, 1) - 2.0 * z + np.roll(z, -1)
        return (kappa / spec.mass) * lap + spec.f0 * topo.forcing_pattern()
    tension = spec.potential.dV(_gaps(spec, z))
    acc = np.zeros_like(z)
    acc[1:-1] = (tension[1:] - tension[:-1]) / spec.mass
    acc[-1] = -tension[-1] / spec.mass + spec.f0
    return acc


def max_frequency(spec: SystemSpec, z: np.ndarray) -> float:
    """Upper edge of the linearised spectrum, 2 sqrt(V''/mass)."""
    if isinstance(spec.topology, CircleForced):
        curv = spec.potential.kappa
    else:
        curv = stiffness_bound(spec.potential, np.diff(z))
    return 2.0 * math.sqrt(curv / spec.mass)


def default_dt(spec: SystemSpec, state: Optional[ChainState] = None) -> float:
    """64 steps per period of the fastest mode."""
    z = (state or initial_state(spec)).positions
    w = max_frequency(spec, z)
    return (2.0 * math.pi / w) / 64.0


def _check_dt(spec: SystemSpec, z: np.ndarray, dt: float) -> None:
    if not dt > 0:
        raise DomainError(f"time step must be positive, got {dt!r}")
    w = max_frequency(spec, z)
    if not dt * w < 2.0:
        raise StabilityError(f"dt*omega_max = {dt * w:.4g} violates the bound dt*omega_max < 2")


def _kdk(spec: SystemSpec, z, v, acc, dt):
    v_half = v + (0.5 * dt) * acc
    z_new = z + dt * v_half
    if isinstance(spec.topology, PinnedLine):
        z_new[0] = 0.0
    acc_new = acceleration(spec, z_new)
    v_new = v_half + (0.5 * dt) * acc_new
    return z_new, v_new, acc_new


def step(spec: SystemSpec, state: ChainState, dt: float) -> ChainState:
    _check_dt(spec, state.positions, dt)
    acc = acceleration(spec, state.positions)
    z, v, _ = _kdk(spec, state.positions, state.velocities, acc, dt)
    return ChainState(state.t + dt, z, v)


Observer = Callable[[ChainState], None]


def integrate(
    spec: SystemSpec,
    T: float,
    dt: Optional[float] = None,
    observer: Optional[Observer] = None,
    state: Optional[ChainState] = None,
) -> ChainState:
    """Advance to time ``state.t + T`` in ceil(T/dt) equal steps.

    The step actually used is T/ceil(T/dt) <= dt.  ``observer`` is called with
    every accepted state (not with the initial one); states are immutable and
    may be retained.
    """
    state = state or initial_state(spec)
    if T < 0:
        raise DomainError("integration horizon must be non-negative")
    if dt is None:
        dt = default_dt(spec, state)
    if T == 0:
        return state
    n_steps = max(1, math.ceil(T / dt - 1e-9))
    h = T / n_steps
    z, v, t0 = state.positions, state.velocities, state.t
    acc = acceleration(spec, z)
    mie = isinstance(spec.potential, MiePotential)
    _check_dt(spec, z, h)
    for i in range(1, n_steps + 1):
        if mie:
            _check_dt(spec, z, h)
        z, v, acc = _kdk(spec, z, v, acc, h)
        if observer is not None:
            observer(ChainState(t0 + i * h, z, v))
    return ChainState(t0 + n_steps * h, z, v)


def total_energy(spec: SystemSpec, state: ChainState) -> float:
    """Kinetic + bond energy - driving work potential; conserved by the exact flow."""
    z, v = state.positions, state.velocities
    kin = 0.5 * spec.mass * math.fsum(v * v)
    if isinstance(spec.topology, CircleForced):
        bonds = z - np.roll(z, 1)
        pot = 0.5 * spec.potential.kappa * math.fsum(bonds * bonds)
        drive = spec.mass * spec.f0 * math.fsum(spec.topology.forcing_pattern() * z)
        return kin + pot - drive
    gaps = np.diff(z)
    if np.any(gaps <= 0) and isinstance(spec.potential, MiePotential):
        raise DomainError("non-positive gap: Mie potential is singular")
    pot = math.fsum(spec.potential.V(gaps))
    return kin + pot - spec.mass * spec.f0 * z[-1]


@njit(cache=True)
def _harmonic_line_kernel(z, v, n_steps, h, k_over_m, a, f0, stride):
    N = z.shape[0]
    n_out = n_steps // stride + 1
    zs = np.empty((n_out, N))
    vs = np.empty((n_out, N))
    zs[0] = z
    vs[0] = v
    acc = np.zeros(N)
    _line_acc(z, acc, k_over_m, a, f0)
    row = 1
    for i in range(1, n_steps + 1):
        for j in range(N):
            v[j] = v[j] + (0.5 * h) * acc[j]
            z[j] = z[j] + h * v[j]
        z[0] = 0.0
        _line_acc(z, acc, k_over_m, a, f0)
        for j in range(N):
            v[j] = v[j] + (0.5 * h) * acc[j]
        if i % stride == 0 and row < n_out:
            zs[row] = z
            vs[row] = v
            row += 1
    return zs[:row], vs[:row]


@njit(cache=True)
def _line_acc(z, acc, k_over_m, a, f0):
    N = z.shape[0]
    acc[0] = 0.0
    for j in range(1, N - 1):
        acc[j] = k_over_m * ((z[j + 1] - z[j] - a) - (z[j] - z[j - 1] - a))
    acc[N - 1] = -k_over_m * (z[N - 1] - z[N - 2] - a) + f0


@njit(cache=True)
def _harmonic_ring_kernel(y, v, n_steps, h, k_over_m, drive, stride):
    L = y.shape[0]
    n_out = n_steps // stride + 1
    ys = np.empty((n_out, L))
    vs = np.empty((n_out, L))
    ys[0] = y
    vs[0] = v
    acc = np.empty(L)
    _ring_acc(y, acc, k_over_m, drive)
    row = 1
    for i in range(1, n_steps + 1):
        for j in range(L):
            v[j] = v[j] + (0.5 * h) * acc[j]
            y[j] = y[j] + h * v[j]
        _ring_acc(y, acc, k_over_m, drive)
        for j in range(L):
            v[j] = v[j] + (0.5 * h) * acc[j]
        if i % stride == 0 and row < n_out:
            ys[row] = y
            vs[row] = v
            row += 1
    return ys[:row], vs[:row]


@njit(cache=True)
def _ring_acc(y, acc, k_over_m, drive):
    L = y.shape[0]
    for j in range(L):
        acc[j] = k_over_m * (y[j - 1] - 2.0 * y[j] + y[(j + 1) % L]) + drive[j]


def sampled_trajectory(spec: SystemSpec, T: float, dt: float, stride: int = 1):
    """(times, positions, velocities) every ``stride`` steps, starting at t=0.

    Harmonic systems run in a compiled loop; Mie chains fall back to
    ``integrate``.  Same step rule as ``integrate``: h = T / ceil(T/dt).
    """
    init = initial_state(spec)
    if T == 0:
        return np.zeros(1), init.positions[None, :], init.velocities[None, :]
    n_steps = max(1, math.ceil(T / dt - 1e-9))
    h = T / n_steps
    _check_dt(spec, init.positions, h)
    if isinstance(spec.potential, QuadraticPotential):
        k_over_m = spec.potential.kappa / spec.mass
        z, v = init.positions.copy(), init.velocities.copy()
        if isinstance(spec.topology, CircleForced):
            drive = spec.f0 * spec.topology.forcing_pattern()
            zs, vs = _harmonic_ring_kernel(z, v, n_steps, h, k_over_m, drive, stride)
        else:
            zs, vs = _harmonic_line_kernel(z, v, n_steps, h, k_over_m, spec.potential.a, spec.f0, stride)
        times = np.arange(zs.shape[0]) * (stride * h)
        return times, zs, vs
    kept = [init]

    def keep(s: ChainState) -> None:
        if round(s.t / h) % stride == 0:
            kept.append(s)

    integrate(spec, T, dt, keep, init)
    return (
        np.array([s.t for s in kept]),
        np.array([s.positions for s in kept]),
        np.array([s.velocities for s in kept]),
    )


def _stride_for(T: float, dt: float, n_samples: int) -> int:
    n_steps = max(1, math.ceil(T / dt - 1e-9)) if T > 0 else 1
    return max(1, n_steps // max(n_samples, 1))


def spectral_vs_ode_error(
    params: ChainParams,
    T: float,
    dt: float,
    conv: Convention | str = Convention.CORRECTED,
    n_samples: int = 400,
) -> float:
    """max_n,t |x_spectral - x_ode| / (sigma N) over sampled times in [0, T]."""
    conv = as_convention(conv)
    if params.sigma == 0:
        raise DomainError("comparison is normalised by sigma; need sigma > 0")
    spec = SystemSpec.harmonic(params)
    times, z, _ = sampled_trajectory(spec, T, dt, _stride_for(T, dt, n_samples))
    x_ode = z - (np.arange(params.N) * params.a)[None, :]
    x_spec = exact_displacements(params, times, conv)
    return float(np.max(np.abs(x_spec - x_ode)) / (params.sigma * params.N))


@dataclass(frozen=True)
class CircleCheck:
    """Residuals normalised by sigma*N."""

    error: float
    antisymmetry: float  # max |y_n + y_{4N-2-n}|
    mirror: float  # max |y_n - y_{2N-1-n}|

    def __float__(self) -> float:
        return self.error


def circle_equivalence_error(
    params: ChainParams,
    T: float,
    dt: float,
    n_samples: int = 400,
) -> CircleCheck:
    if params.sigma == 0:
        raise DomainError("comparison is normalised by sigma; need sigma > 0")
    N = params.N
    stride = _stride_for(T, dt, n_samples)
    _, z, _ = sampled_trajectory(SystemSpec.harmonic(params), T, dt, stride)
    _, y, _ = sampled_trajectory(SystemSpec.harmonic(params, circle=True), T, dt, stride)
    x = z - (np.arange(N) * params.a)[None, :]
    L = 4 * N - 2
    scale = params.sigma * N
    idx = np.arange(L)
    anti = np.max(np.abs(y + y[:, (-idx) % L]))
    n = np.arange(N)
    mirror = np.max(np.abs(y[:, n] - y[:, 2 * N - 1 - n]))
    err = np.max(np.abs(x - y[:, :N]))
    return CircleCheck(float(err / scale), float(anti / scale), float(mirror / scale))


@dataclass(frozen=True)
class DissociationResult:
    f: float
    verdict: str  # "bound" or "dissociated"
    max_gap: float
    t_exceed: Optional[float]


def dissociation_run(
    potential: MiePotential,
    N: int,
    f: float,
    T: float,
    dt: Optional[float] = None,
    mass: float = 1.0,
    threshold_factor: float = 3.0,
) -> DissociationResult:
    """One pulled Mie chain; dissociated if a gap passes 3b and keeps growing."""
    spec = SystemSpec(PinnedLine(N), potential, f0=f / mass, mass=mass)
    limit = threshold_factor * potential.b
    n_steps = max(1, math.ceil(T / (dt or default_dt(spec)) - 1e-9))
    tail_start = n_steps - n_steps // 4
    track = {"i": 0, "max": 0.0, "t_exceed": None, "tail": []}

    def watch(s: ChainState) -> None:
        track["i"] += 1
        g = float(np.max(np.diff(s.positions)))
        track["max"] = max(track["max"], g)
        if track["t_exceed"] is None and g > limit:
            track["t_exceed"] = s.t
        if track["i"] >= tail_start:
            track["tail"].append(g)

    integrate(spec, T, dt, watch)
    tail = np.asarray(track["tail"])
    growing = tail.size > 1 and bool(np.all(np.diff(tail) >= 0))
    broken = track["t_exceed"] is not None and growing
    return DissociationResult(f, "dissociated" if broken else "bound", track["max"], track["t_exceed"])


def dissociation_scan(
    potential: MiePotential,
    N: int,
    f_values: Iterable[float],
    T: float,
    dt: Optional[float] = None,
    mapper: Callable = map,
) -> list[DissociationResult]:
    forces = [float(f) for f in f_values]
    if any(b < a for a, b in zip(forces, forces[1:])):
        raise DomainError("forces must be sorted ascending")
    runs = mapper(_DissociationTask(potential, N, T, dt), forces)
    return sorted(runs, key=lambda r: r.f)


@dataclass(frozen=True)
class _DissociationTask:
    # picklable callable for process pools
    potential: MiePotential
    N: int
    T: float
    dt: Optional[float]

    def __call__(self, f: float) -> DissociationResult:
        return dissociation_run(self.potential, self.N, f, self.T, self.dt)
