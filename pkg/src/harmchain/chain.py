"""Exact normal-mode solution of the forced harmonic chain.

The pinned chain of N particles (site 0 fixed, constant force on site N-1)
is solved by mirroring it onto a ring of 4N-2 sites.  Every displacement is
a finite cosine sum over modes m = 1..2N-2 with frequencies
``omega_m = 2 omega0 sin(pi m / ring)``.

Two dispersion conventions are supported.  ``corrected`` uses ring = 4N-2,
which is the eigenfrequency of the ring Laplacian and reproduces the direct
integration.  ``paper-literal`` uses the printed 8N-4 in both the frequency
and the 1/sin^2 prefactor; it is kept only to document that it does not
solve the equations of motion.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


class Convention(str, enum.Enum):
    CORRECTED = "corrected"
    PAPER_LITERAL = "paper-literal"


def as_convention(conv: Convention | str) -> Convention:
    try:
        return Convention(conv)
    except ValueError:
        raise DomainError(f"unknown dispersion convention {conv!r}") from None


def dispersion_denominator(N: int, conv: Convention | str = Convention.CORRECTED) -> int:
    """Denominator inside sin() of the dispersion relation and the sin^2 prefactor."""
    conv = as_convention(conv)
    return 4 * N - 2 if conv is Convention.CORRECTED else 8 * N - 4


def _check_N(N: int) -> None:
    if int(N) != N or N < 2:
        raise DomainError(f"particle count must be an integer >= 2, got {N!r}")


@dataclass(frozen=True)
class ChainParams:
    """Physical description of the chain, per unit mass.

    ``sigma = f0 / omega0**2`` is the static elongation of one bond.
    """

    N: int
    omega0: float = 1.0
    f0: float = 0.0
    a: float = 1.0
    sigma: float = field(init=False)

    def __post_init__(self):
        _check_N(self.N)
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be > 0, got {self.omega0!r}")
        if not self.f0 >= 0:
            raise DomainError(f"f0 must be >= 0, got {self.f0!r}")
        if not self.a > 0:
            raise DomainError(f"lattice spacing must be > 0, got {self.a!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "sigma", self.f0 / self.omega0**2)

    @classmethod
    def from_physical(cls, N: int, kappa: float, mass: float, f: float, a: float = 1.0) -> "ChainParams":
        """Fold stiffness and mass into omega0 = sqrt(kappa/mass) and f0 = f/mass."""
        if not (kappa > 0 and mass > 0):
            raise DomainError("kappa and mass must be > 0")
        return cls(N=N, omega0=math.sqrt(kappa / mass), f0=f / mass, a=a)

    @classmethod
    def from_sigma(cls, N: int, sigma: float, omega0: float = 1.0, a: float = 1.0) -> "ChainParams":
        return cls(N=N, omega0=omega0, f0=sigma * omega0**2, a=a)


@dataclass(frozen=True)
class AnalysisWindow:
    """Bond window [k, k+l] kept a fraction ``epsilon`` away from the free end."""

    k: int
    l: int
    epsilon: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.k < 0 or self.l < 1:
            raise DomainError(f"need k >= 0 and l >= 1, got k={self.k}, l={self.l}")

    def check(self, N: int) -> None:
        if self.k + self.l > (1 - self.epsilon) * N:
            raise DomainError(
                f"window k={self.k}, l={self.l} violates k+l <= (1-eps)N "
                f"with eps={self.epsilon}, N={N}"
            )


@dataclass(frozen=True)
class ModeData:
    N: int
    convention: Convention
    omegas: np.ndarray  # m = 1..2N-2

    def __post_init__(self):
        self.omegas.setflags(write=False)


@dataclass(frozen=True)
class ExtensionCoefficients:
    N: int
    k: int
    l: int
    a_m: np.ndarray  # m = 1..2N-2
    b_m: np.ndarray

    def __post_init__(self):
        self.a_m.setflags(write=False)
        self.b_m.setflags(write=False)


def mode_indices(N: int) -> np.ndarray:
    return np.arange(1, 2 * N - 1)


def mode_frequency(N: int, omega0: float, m: int, conv: Convention | str = Convention.CORRECTED) -> float:
    _check_N(N)
    if not 0 <= m <= 4 * N - 3:
        raise DomainError(f"mode index m={m} outside 0..{4 * N - 3}")
    return 2.0 * omega0 * math.sin(math.pi * m / dispersion_denominator(N, conv))


def mode_frequencies(N: int, omega0: float = 1.0, conv: Convention | str = Convention.CORRECTED) -> np.ndarray:
    _check_N(N)
    return 2.0 * omega0 * np.sin(np.pi * mode_indices(N) / dispersion_denominator(N, conv))


def mode_data(N: int, omega0: float = 1.0, conv: Convention | str = Convention.CORRECTED) -> ModeData:
    return ModeData(N=N, convention=as_convention(conv), omegas=mode_frequencies(N, omega0, conv))


def _mode_prefactor(N: int, m: np.ndarray, conv) -> np.ndarray:
    # sin(pi m/2) cos(pi m/(4N-2)) / sin^2(pi m/den); exactly zero for even m.
    den = dispersion_denominator(N, conv)
    parity = np.where(m % 2 == 1, np.where(m % 4 == 1, 1.0, -1.0), 0.0)
    return parity * np.cos(np.pi * m / (4 * N - 2)) / np.sin(np.pi * m / den) ** 2


def gamma_coefficient(N: int, n: int, m: int, conv: Convention | str = Convention.CORRECTED) -> float:
    _check_N(N)
    if not 1 <= m <= 2 * N - 2:
        raise DomainError(f"mode index m={m} outside 1..{2 * N - 2}")
    if not 0 <= n <= N - 1:
        raise DomainError(f"site index n={n} outside 0..{N - 1}")
    return float(gamma_coefficients(N, n, conv)[m - 1])


def gamma_coefficients(N: int, n: int, conv: Convention | str = Convention.CORRECTED) -> np.ndarray:
    """gamma_{m,N,n} for m = 1..2N-2."""
    m = mode_indices(N)
    return _mode_prefactor(N, m, conv) * np.sin(np.pi * n * m / (2 * N - 1))


def gamma_matrix(N: int, conv: Convention | str = Convention.CORRECTED) -> np.ndarray:
    """Rows are sites n = 0..N-1, columns modes m = 1..2N-2."""
    m = mode_indices(N)
    n = np.arange(N)[:, None]
    return _mode_prefactor(N, m, conv)[None, :] * np.sin(np.pi * n * m[None, :] / (2 * N - 1))


def gamma_identity_residual(N: int, n: int, conv: Convention | str = Convention.CORRECTED) -> float:
    """|(1/(2N-1)) sum_m gamma_{m,N,n} - n|; zero iff the static part of the solution is right."""
    _check_N(N)
    if not 0 <= n <= N - 1:
        raise DomainError(f"site index n={n} outside 0..{N - 1}")
    return abs(math.fsum(gamma_coefficients(N, n, conv)) / (2 * N - 1) - n)


def exact_displacements(params: ChainParams, t, conv: Convention | str = Convention.CORRECTED) -> np.ndarray:
    """Deviations x_n(t) = z_n(t) - n a for all sites.

    Returns shape (N,) for scalar ``t`` and (len(t), N) for an array.
    """
    N = params.N
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    omegas = mode_frequencies(N, params.omega0, conv)
    G = gamma_matrix(N, conv)
    S = np.cos(np.outer(t_arr, omegas)) @ G.T
    x = params.sigma * (np.arange(N)[None, :] - S / (2 * N - 1))
    return x[0] if np.ndim(t) == 0 else x


def exact_velocities(params: ChainParams, t, conv: Convention | str = Convention.CORRECTED) -> np.ndarray:
    N = params.N
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    omegas = mode_frequencies(N, params.omega0, conv)
    G = gamma_matrix(N, conv) * omegas[None, :]
    v = params.sigma / (2 * N - 1) * (np.sin(np.outer(t_arr, omegas)) @ G.T)
    return v[0] if np.ndim(t) == 0 else v


def exact_displacement(params: ChainParams, n: int, t, conv: Convention | str = Convention.CORRECTED):
    if not 0 <= n <= params.N - 1:
        raise DomainError(f"site index n={n} outside 0..{params.N - 1}")
    N = params.N
    omegas = mode_frequencies(N, params.omega0, conv)
    gam = gamma_coefficients(N, n, conv)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    x = params.sigma * (n - np.cos(np.outer(t_arr, omegas)) @ gam / (2 * N - 1))
    return float(x[0]) if np.ndim(t) == 0 else x


def _check_window(N: int, k: int, l: int, epsilon: float | None) -> None:
    if epsilon is not None:
        AnalysisWindow(k, l, epsilon).check(N)
    elif k < 0 or l < 1 or k + l > N - 1:
        raise DomainError(f"window k={k}, l={l} needs 0 <= k < k+l <= N-1 = {N - 1}")


def extension_coefficients(
    N: int,
    k: int,
    l: int,
    conv: Convention | str = Convention.CORRECTED,
    epsilon: float | None = None,
) -> ExtensionCoefficients:
    _check_N(N)
    _check_window(N, k, l, epsilon)
    m = mode_indices(N)
    a = _mode_prefactor(N, m, conv) * np.sin(np.pi * m * l / (4 * N - 2))
    b = np.cos(np.pi * m * (k + l / 2) / (2 * N - 1))
    return ExtensionCoefficients(N=N, k=k, l=l, a_m=a, b_m=b)


class CosineSum:
    """S(t) = sum_j amp_j cos(freq_j t), with fast evaluation on long uniform grids."""

    def __init__(self, amplitudes, frequencies):
        amps = np.asarray(amplitudes, dtype=float)
        freqs = np.asarray(frequencies, dtype=float)
        keep = amps != 0.0
        self.amplitudes = amps[keep]
        self.frequencies = freqs[keep]

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.cos(np.outer(t_arr, self.frequencies)) @ self.amplitudes
        return float(out[0]) if np.ndim(t) == 0 else out

    def derivative(self, t, order: int = 1):
        # d^k/dt^k cos(w t) = w^k cos(w t + k pi/2)
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        amps = self.amplitudes * self.frequencies**order
        out = np.cos(np.outer(t_arr, self.frequencies) + order * np.pi / 2) @ amps
        return float(out[0]) if np.ndim(t) == 0 else out

    def abs_sum(self) -> float:
        return math.fsum(np.abs(self.amplitudes))

    def grid(self, dt: float, n_points: int, chunk: int = 4096) -> np.ndarray:
        """Values at t_j = j*dt, j = 0..n_points-1.

        Each chunk re-anchors the phase with a direct exp(i w t0), so no
        rounding accumulates across chunks.
        """
        out = np.empty(n_points)
        if n_points == 0:
            return out
        width = min(chunk, n_points)
        base = np.exp(1j * np.outer(np.arange(width) * dt, self.frequencies))
        for start in range(0, n_points, width):
            stop = min(start + width, n_points)
            anchor = self.amplitudes * np.exp(1j * self.frequencies * (start * dt))
            out[start:stop] = (base[: stop - start] @ anchor).real
        return out


def deviation_sum(params_or_N, k: int, l: int, conv=Convention.CORRECTED, epsilon=None) -> CosineSum:
    """The extension deviation I_{N,k,l}(t) as a cosine sum (even modes dropped)."""
    if isinstance(params_or_N, ChainParams):
        N, omega0 = params_or_N.N, params_or_N.omega0
    else:
        N, omega0 = int(params_or_N), 1.0
    ec = extension_coefficients(N, k, l, conv, epsilon)
    amps = -2.0 / (2 * N - 1) * ec.a_m * ec.b_m
    return CosineSum(amps, mode_frequencies(N, omega0, conv))


def extension_deviation(
    params: ChainParams,
    k: int,
    l: int,
    t,
    conv: Convention | str = Convention.CORRECTED,
    via: str = "coefficients",
):
    """I_{N,k,l}(t) = (x_{k+l} - x_k - sigma l) / sigma.

    ``via="coefficients"`` sums -(2/(2N-1)) a_m b_m cos(omega_m t);
    ``via="displacements"`` differences the site solutions (needs sigma > 0).
    """
    if via == "coefficients":
        return deviation_sum(params, k, l, conv)(t)
    if via == "displacements":
        _check_window(params.N, k, l, None)
        if params.sigma == 0:
            raise DomainError("displacement route needs sigma > 0")
        x = exact_displacements(params, t, conv)
        out = (x[..., k + l] - x[..., k] - params.sigma * l) / params.sigma
        return float(out) if np.ndim(t) == 0 else out
    raise DomainError(f"unknown evaluation route {via!r}")
