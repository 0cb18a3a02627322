"""First- and second-moment dynamics of the linear models."""
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import InvalidSpecError, SolveError, StabilityError
from .model import (
    LinearSystem,
    QuadratureSystem,
    mode_vector,
    quadrature_vector,
    stability_margin,
)
from .util import freeze

# Steady-state solves are refused above this margin.
STABILITY_THRESHOLD = -1e-9
# Largest |drift| * h used by one augmented-exponential covariance step.
MAX_STEP_NORM = 0.5
PHYSICALITY_FLOOR = -1e-9

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MomentState:
    """Gaussian moments at `time`.  `mean` is the quadrature-ordered
    real mean vector; `amplitudes` gives the complex mode means."""

    time: float
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        if not self.time >= 0:
            raise InvalidSpecError(f"time must be >= 0, not {self.time}")
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if cov.shape != (mean.size, mean.size) or mean.size % 2:
            raise InvalidSpecError(
                f"mean of size {mean.size} does not match covariance "
                f"{cov.shape}"
            )
        if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-12):
            raise InvalidSpecError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        if cov.size and np.min(np.linalg.eigvalsh(cov)) < PHYSICALITY_FLOOR:
            raise InvalidSpecError("covariance is not positive semidefinite")
        object.__setattr__(self, "mean", freeze(mean))
        object.__setattr__(self, "covariance", freeze(cov))

    @classmethod
    def vacuum(cls, n_modes: int) -> "MomentState":
        return cls(
            time=0.0,
            mean=np.zeros(2 * n_modes),
            covariance=0.5 * np.eye(2 * n_modes),
        )

    @property
    def amplitudes(self) -> np.ndarray:
        return mode_vector(self.mean)


def expm(matrix: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(matrix * t) by scaling and squaring with a Pade kernel.

    Safe at defective points; nothing here diagonalizes.
    """
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidSpecError(f"expm needs a square matrix, not {arr.shape}")
    if not np.all(np.isfinite(arr)) or not math.isfinite(t):
        raise InvalidSpecError("expm needs finite entries")
    return scipy.linalg.expm(arr * t)


def propagate_mean(
    sys: LinearSystem, x0: np.ndarray, t: float
) -> np.ndarray:
    """Complex mode means at time t, starting from x0."""
    if t < 0:
        raise InvalidSpecError(f"cannot propagate to negative time {t}")
    n = sys.n_modes
    x0 = np.asarray(x0, dtype=complex).reshape(-1)
    if x0.shape != (n,):
        raise InvalidSpecError(f"x0 must have {n} entries")
    augmented = np.zeros((n + 1, n + 1), dtype=complex)
    augmented[:n, :n] = sys.drift
    augmented[:n, n] = sys.drive
    kernel = expm(augmented, t)
    return kernel[:n, :n] @ x0 + kernel[:n, n]


def _require_stable(margin: float, what: str) -> None:
    if margin > STABILITY_THRESHOLD:
        logger.debug(f"Refusing {what}: stability margin {margin}")
        raise StabilityError(
            f"{what} needs a stable drift; stability margin is {margin}"
        )


def steady_mean(sys: LinearSystem) -> np.ndarray:
    _require_stable(stability_margin(sys), "steady mean")
    x = np.linalg.solve(sys.drift, -sys.drive)
    residual = np.linalg.norm(sys.drift @ x + sys.drive)
    scale = max(
        1.0,
        np.linalg.norm(sys.drift) * np.linalg.norm(x),
        np.linalg.norm(sys.drive),
    )
    if residual > 1e-12 * scale:
        raise SolveError(f"steady mean residual {residual} is too large")
    return x


def steady_covariance(qsys: QuadratureSystem) -> np.ndarray:
    """Solve drift_q C + C drift_q^T + diffusion = 0."""
    _require_stable(stability_margin(qsys), "steady covariance")
    drift = qsys.drift_q
    cov = scipy.linalg.solve_continuous_lyapunov(drift, -qsys.diffusion)
    cov = 0.5 * (cov + cov.T)
    residual = np.linalg.norm(drift @ cov + cov @ drift.T + qsys.diffusion)
    scale = max(
        1.0,
        np.linalg.norm(qsys.diffusion),
        np.linalg.norm(drift) * np.linalg.norm(cov),
    )
    if residual > 1e-10 * scale:
        raise SolveError(f"Lyapunov residual {residual} is too large")
    return cov


def steady_state(sys: LinearSystem, qsys: QuadratureSystem) -> MomentState:
    return MomentState(
        time=math.inf,
        mean=quadrature_vector(steady_mean(sys)),
        covariance=steady_covariance(qsys),
    )


def _covariance_step(
    qsys: QuadratureSystem, h: float
) -> tuple[np.ndarray, np.ndarray]:
    """Propagator E = exp(A h) and accumulated noise
    Q = int_0^h exp(A s) D exp(A^T s) ds, from one block exponential."""
    dim = qsys.dimension
    block = np.zeros((2 * dim, 2 * dim))
    block[:dim, :dim] = -qsys.drift_q
    block[:dim, dim:] = qsys.diffusion
    block[dim:, dim:] = qsys.drift_q.T
    kernel = expm(block, h)
    propagator = kernel[dim:, dim:].T
    noise = propagator @ kernel[:dim, dim:]
    return propagator, 0.5 * (noise + noise.T)


def transient_covariance(
    qsys: QuadratureSystem, c0: np.ndarray, t: float
) -> np.ndarray:
    if t < 0:
        raise InvalidSpecError(f"cannot propagate to negative time {t}")
    cov = np.array(c0, dtype=float)
    if cov.shape != (qsys.dimension, qsys.dimension):
        raise InvalidSpecError(
            f"initial covariance must be {qsys.dimension} square"
        )
    if t == 0:
        return cov
    size = np.linalg.norm(qsys.drift_q, 2) * t
    steps = max(1, math.ceil(size / MAX_STEP_NORM))
    logger.debug(f"Covariance propagation to t={t} in {steps} steps")
    propagator, noise = _covariance_step(qsys, t / steps)
    # Apply the step `steps` times by binary powers of the step map.
    while steps:
        if steps & 1:
            cov = propagator @ cov @ propagator.T + noise
        steps >>= 1
        if steps:
            noise = propagator @ noise @ propagator.T + noise
            propagator = propagator @ propagator
    return 0.5 * (cov + cov.T)


def covariance_path(
    qsys: QuadratureSystem, c0: np.ndarray, times: Sequence[float]
) -> list[np.ndarray]:
    """Covariances at each of the nondecreasing `times`, chaining one
    propagation into the next."""
    out: list[np.ndarray] = []
    cov = np.array(c0, dtype=float)
    previous = 0.0
    for t in times:
        if t < previous:
            raise InvalidSpecError("times must be nondecreasing and >= 0")
        cov = transient_covariance(qsys, cov, t - previous)
        out.append(cov)
        previous = t
    return out


def evolve(
    sys: LinearSystem,
    qsys: QuadratureSystem,
    state: MomentState,
    t: float,
) -> MomentState:
    """Propagate `state` forward by t."""
    mean = propagate_mean(sys, state.amplitudes, t)
    return MomentState(
        time=state.time + t,
        mean=quadrature_vector(mean),
        covariance=transient_covariance(qsys, state.covariance, t),
    )
