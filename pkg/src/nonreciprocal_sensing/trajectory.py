"""Monte Carlo sampling of the quadrature Langevin equations.

Trajectories are integrated by Euler-Maruyama,
dX = (drift_q X + drive_q) dt + B dW with B B^T = diffusion, so bath
occupation n scales its Wiener increments by sqrt(n + 1/2).  Trajectories
are split into fixed-size batches; batch k draws from its own PCG64 stream
seeded by SeedSequence(seed, spawn_key=(k,)), and results are concatenated
in batch order, so output depends only on the seed and batch size.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidSpecError, StabilityError
from .model import LinearSystem, real_image, stability_margin, to_quadrature
from .moments import STABILITY_THRESHOLD, MomentState
from .util import freeze

MIN_TRAJECTORIES = 100
# dt times the largest drift eigenvalue modulus may not exceed this.
MAX_STEP_FRACTION = 0.01

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_end: float
    n_traj: int
    seed: int
    batch_size: int = 10000
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.dt > 0 or not math.isfinite(self.dt):
            raise InvalidSpecError(f"dt must be > 0, not {self.dt}")
        if not self.t_end > 0 or not math.isfinite(self.t_end):
            raise InvalidSpecError(f"t_end must be > 0, not {self.t_end}")
        if self.n_traj < MIN_TRAJECTORIES:
            raise InvalidSpecError(
                f"need at least {MIN_TRAJECTORIES} trajectories, "
                f"not {self.n_traj}"
            )
        if not 0 <= self.seed < 2**64:
            raise InvalidSpecError(f"seed must fit in 64 bits: {self.seed}")
        if self.batch_size < 1 or self.workers < 1:
            raise InvalidSpecError("batch_size and workers must be >= 1")

    @property
    def n_batches(self) -> int:
        return math.ceil(self.n_traj / self.batch_size)


@dataclass(frozen=True)
class SampledMoments:
    """Sample moments at t_end and their standard errors."""

    state: MomentState
    mean_stderr: np.ndarray
    covariance_stderr: np.ndarray
    n_traj: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean_stderr", freeze(self.mean_stderr))
        object.__setattr__(
            self, "covariance_stderr", freeze(self.covariance_stderr)
        )


class _Integrator:
    def __init__(
        self,
        sys: LinearSystem,
        cfg: SimConfig,
        initial: MomentState,
    ) -> None:
        qsys = to_quadrature(sys)
        self._drift_t = np.array(qsys.drift_q.T)
        self._drive = np.array(qsys.drive_q)
        scale = np.sqrt(np.repeat(sys.bath_occupations + 0.5, 2))
        self._noise_t = np.array((real_image(sys.input_matrix) * scale).T)
        self._steps = math.ceil(cfg.t_end / cfg.dt)
        self._h = cfg.t_end / self._steps
        self._initial = initial
        self._cfg = cfg

    def batch(self, index: int) -> np.ndarray:
        cfg = self._cfg
        size = min(cfg.batch_size, cfg.n_traj - index * cfg.batch_size)
        stream = np.random.SeedSequence(cfg.seed, spawn_key=(index,))
        rng = np.random.Generator(np.random.PCG64(stream))
        x = rng.multivariate_normal(
            self._initial.mean,
            self._initial.covariance,
            size=size,
            method="eigh",
        )
        h = self._h
        root_h = math.sqrt(h)
        n_noise = self._noise_t.shape[0]
        for _ in range(self._steps):
            dw = rng.standard_normal((size, n_noise)) * root_h
            x = x + (x @ self._drift_t + self._drive) * h + dw @ self._noise_t
        return x


def max_step(sys: LinearSystem) -> float:
    """Largest dt simulate accepts for this system."""
    rates = np.abs(np.linalg.eigvals(to_quadrature(sys).drift_q))
    fastest = float(np.max(rates)) if rates.size else 0.0
    return math.inf if fastest == 0.0 else MAX_STEP_FRACTION / fastest


def check_step(sys: LinearSystem, cfg: SimConfig) -> None:
    limit = max_step(sys)
    if cfg.dt > limit:
        raise InvalidSpecError(
            f"dt = {cfg.dt} exceeds {limit:.6g}, {MAX_STEP_FRACTION} over "
            "the largest drift eigenvalue modulus"
        )


def _covariance_stderr(centered: np.ndarray) -> np.ndarray:
    n, d = centered.shape
    stderr = np.empty((d, d))
    for i in range(d):
        products = centered[:, i, None] * centered
        stderr[i] = products.std(axis=0, ddof=1) / math.sqrt(n)
    return stderr


def simulate(
    sys: LinearSystem,
    cfg: SimConfig,
    initial: MomentState | None = None,
) -> SampledMoments:
    """Sample quadrature moments at cfg.t_end, from vacuum by default."""
    margin = stability_margin(sys)
    if margin > STABILITY_THRESHOLD:
        raise StabilityError(
            f"Monte Carlo needs a stable system; stability margin is {margin}"
        )
    check_step(sys, cfg)
    if initial is None:
        initial = MomentState.vacuum(sys.n_modes)
    integrator = _Integrator(sys, cfg, initial)
    logger.debug(
        f"Sampling {cfg.n_traj} trajectories in {cfg.n_batches} batches "
        f"to t={cfg.t_end}"
    )
    batches = range(cfg.n_batches)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(integrator.batch, batches))
    else:
        parts = [integrator.batch(b) for b in batches]
    samples = np.concatenate(parts)
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    cov = np.cov(samples, rowvar=False, ddof=1)
    return SampledMoments(
        state=MomentState(time=cfg.t_end, mean=mean, covariance=cov),
        mean_stderr=np.sqrt(np.diag(cov) / n),
        covariance_stderr=_covariance_stderr(samples - mean),
        n_traj=n,
    )
