"""Linear Langevin models of the probe/measurement networks.

Modes are ordered (a, b_1, ..., b_N).  Quadratures are ordered (q, p) for
every mode, with p = (b + b^dag)/sqrt(2) and q = (b - b^dag)/(i sqrt(2)),
so that <q> = sqrt(2) Im<b> and <p> = sqrt(2) Re<b>.  Rates are
dimensionless and lambda_eff is the effective dissipative coupling rate.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidSpecError
from .util import check_nonnegative, freeze

SQRT2 = math.sqrt(2.0)
# Smallest diffusion eigenvalue accepted as rounding.
DIFFUSION_FLOOR = -1e-9

# Real image of multiplication by i in (q, p) ordering.
_ROTATOR = np.array([[0.0, 1.0], [-1.0, 0.0]])

logger = logging.getLogger(__name__)


class Topology(enum.Enum):
    PAIR = "pair"
    STAR = "star"


class Coupling(enum.Enum):
    NONRECIPROCAL = "nonreciprocal"
    RECIPROCAL = "reciprocal"
    CUSTOM = "custom"


class ParallelConvention(enum.Enum):
    """How the star network's cross terms are written.

    SCALED puts N*lambda_eff on the probe row's cross coefficient and
    balances it with J_p = i*N*lambda_eff.  PER_BATH derives every cross
    term from its own common bath z_k = (a + b_k)/sqrt(2), so the probe
    row carries lambda_eff and nonreciprocity sits at J_p = i*lambda_eff.
    """

    SCALED = "scaled"
    PER_BATH = "per_bath"


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of a sensing network.

    Enum fields also accept their string values, which is how scenario
    files spell them.
    """

    kappa: float = 1.0
    lambda_eff: float = 1.0
    coupling: Coupling = Coupling.NONRECIPROCAL
    xi: float = 1.0
    detuning_a: float = 0.0
    detuning_b: float = 0.0
    n_a: float = 0.0
    n_b: float = 0.0
    topology: Topology = Topology.PAIR
    n_parallel: int = 1
    convention: ParallelConvention = ParallelConvention.SCALED
    j_custom: complex | None = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "coupling", Coupling(self.coupling))
            object.__setattr__(self, "topology", Topology(self.topology))
            object.__setattr__(
                self, "convention", ParallelConvention(self.convention)
            )
        except ValueError as exc:
            raise InvalidSpecError(str(exc)) from exc
        check_nonnegative(
            kappa=self.kappa,
            lambda_eff=self.lambda_eff,
            xi=self.xi,
            n_a=self.n_a,
            n_b=self.n_b,
        )
        for name in ("detuning_a", "detuning_b"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpecError(f"{name} must be finite")
        if isinstance(self.n_parallel, bool) or not isinstance(
            self.n_parallel, int
        ):
            raise InvalidSpecError(
                f"n_parallel must be an integer: {self.n_parallel!r}"
            )
        if self.n_parallel < 1:
            raise InvalidSpecError(
                f"star topology needs N >= 1, not {self.n_parallel}"
            )
        if self.topology is Topology.PAIR and self.n_parallel != 1:
            raise InvalidSpecError(
                f"pair topology has exactly one measurement mode, "
                f"not {self.n_parallel}"
            )
        if self.coupling is Coupling.CUSTOM:
            if self.j_custom is None:
                raise InvalidSpecError("custom coupling needs j_custom")
            object.__setattr__(self, "j_custom", complex(self.j_custom))

    @property
    def n_modes(self) -> int:
        return 1 + self.n_parallel

    @property
    def dissipative(self) -> bool:
        """Whether the modes share common baths (every coupling but the
        purely coherent reciprocal one)."""
        return self.coupling is not Coupling.RECIPROCAL


@dataclass(frozen=True)
class LinearSystem:
    """Complex-mode Langevin system dA/dt = drift A + drive + L A_in.

    Column l of input_matrix carries bath input l, whose thermal occupation
    is bath_occupations[l].
    """

    drift: np.ndarray
    drive: np.ndarray
    input_matrix: np.ndarray
    bath_occupations: np.ndarray

    def __post_init__(self) -> None:
        drift = np.atleast_2d(np.asarray(self.drift, dtype=complex))
        n = drift.shape[0]
        if drift.shape != (n, n):
            raise InvalidSpecError(f"drift must be square, not {drift.shape}")
        drive = np.asarray(self.drive, dtype=complex).reshape(-1)
        if drive.shape != (n,):
            raise InvalidSpecError(
                f"drive has {drive.shape[0]} entries for {n} modes"
            )
        inputs = np.asarray(self.input_matrix, dtype=complex).reshape(n, -1)
        occupations = np.asarray(self.bath_occupations, dtype=float)
        occupations = occupations.reshape(-1)
        if occupations.shape != (inputs.shape[1],):
            raise InvalidSpecError(
                f"{inputs.shape[1]} bath inputs but "
                f"{occupations.shape[0]} occupations"
            )
        if np.any(occupations < 0):
            raise InvalidSpecError("bath occupations must be >= 0")
        object.__setattr__(self, "drift", freeze(drift))
        object.__setattr__(self, "drive", freeze(drive))
        object.__setattr__(self, "input_matrix", freeze(inputs))
        object.__setattr__(self, "bath_occupations", freeze(occupations))

    @property
    def n_modes(self) -> int:
        return int(self.drift.shape[0])


@dataclass(frozen=True)
class QuadratureSystem:
    """Real (q, p) form used for covariance dynamics:
    dC/dt = drift_q C + C drift_q^T + diffusion."""

    drift_q: np.ndarray
    diffusion: np.ndarray
    drive_q: np.ndarray

    def __post_init__(self) -> None:
        drift = np.atleast_2d(np.asarray(self.drift_q, dtype=float))
        n = drift.shape[0]
        if drift.shape != (n, n):
            raise InvalidSpecError(
                f"drift_q must be square, not {drift.shape}"
            )
        diffusion = np.atleast_2d(np.asarray(self.diffusion, dtype=float))
        if diffusion.shape != (n, n):
            raise InvalidSpecError(
                f"diffusion must be {n}x{n}, not {diffusion.shape}"
            )
        if not np.allclose(diffusion, diffusion.T, rtol=0.0, atol=1e-12):
            raise InvalidSpecError("diffusion must be symmetric")
        lowest = float(np.min(np.linalg.eigvalsh(diffusion)))
        if lowest < DIFFUSION_FLOOR:
            raise InvalidSpecError(
                f"diffusion must be positive semidefinite; eigenvalue {lowest}"
            )
        drive = np.asarray(self.drive_q, dtype=float).reshape(-1)
        if drive.shape != (n,):
            raise InvalidSpecError(f"drive_q must have {n} entries")
        object.__setattr__(self, "drift_q", freeze(drift))
        object.__setattr__(self, "diffusion", freeze(diffusion))
        object.__setattr__(self, "drive_q", freeze(drive))

    @property
    def dimension(self) -> int:
        return int(self.drift_q.shape[0])


def coherent_coupling(spec: ModelSpec) -> complex:
    """The coherent coupling J (or J_p) of this model."""
    if spec.coupling is Coupling.CUSTOM:
        assert spec.j_custom is not None
        return spec.j_custom
    if (
        spec.topology is Topology.STAR
        and spec.convention is ParallelConvention.SCALED
    ):
        return 1j * spec.n_parallel * spec.lambda_eff
    return 1j * spec.lambda_eff


def build_pair(spec: ModelSpec) -> LinearSystem:
    if spec.topology is not Topology.PAIR:
        raise InvalidSpecError(
            f"build_pair needs a pair topology, not {spec.topology.value}"
        )
    return _assemble(spec)


def build_star(spec: ModelSpec) -> LinearSystem:
    if spec.topology is not Topology.STAR:
        raise InvalidSpecError(
            f"build_star needs a star topology, not {spec.topology.value}"
        )
    return _assemble(spec)


def build(spec: ModelSpec) -> LinearSystem:
    if spec.topology is Topology.STAR:
        return build_star(spec)
    return build_pair(spec)


def _assemble(spec: ModelSpec) -> LinearSystem:
    n = spec.n_parallel
    lam = spec.lambda_eff
    coupling = coherent_coupling(spec)
    shared = lam if spec.dissipative else 0.0
    # The probe feels one common bath per measurement mode.
    probe_cross = shared
    if spec.convention is ParallelConvention.SCALED:
        probe_cross = n * shared

    drift = np.zeros((n + 1, n + 1), dtype=complex)
    drift[0, 0] = -(spec.kappa + n * shared) - 1j * spec.detuning_a
    drift[0, 1:] = -(probe_cross + 1j * coupling)
    drift[1:, 0] = -(shared + 1j * np.conj(coupling))
    for j in range(1, n + 1):
        drift[j, j] = -(spec.kappa + shared) - 1j * spec.detuning_b

    drive = drive_vector(spec.xi, n + 1)

    local = math.sqrt(2.0 * spec.kappa)
    columns = [local * _unit(0, n + 1)]
    occupations = [spec.n_a]
    for j in range(1, n + 1):
        columns.append(local * _unit(j, n + 1))
        occupations.append(spec.n_b)
    if spec.dissipative:
        common = math.sqrt(2.0 * lam)
        for j in range(1, n + 1):
            columns.append(common * (_unit(0, n + 1) + _unit(j, n + 1)))
            occupations.append(0.0)
    logger.debug(
        f"Assembled {spec.topology.value} model with {n + 1} modes and "
        f"{len(columns)} bath inputs (J = {coupling})"
    )
    return LinearSystem(
        drift=drift,
        drive=drive,
        input_matrix=np.column_stack(columns),
        bath_occupations=np.array(occupations),
    )


def _unit(index: int, size: int) -> np.ndarray:
    vec = np.zeros(size, dtype=complex)
    vec[index] = 1.0
    return vec


def drive_vector(xi: float, n_modes: int) -> np.ndarray:
    """The constant drive: -i*xi on the probe, nothing elsewhere."""
    vec = np.zeros(n_modes, dtype=complex)
    vec[0] = -1j * xi
    return vec


def sensitivity_system(sys: LinearSystem) -> LinearSystem:
    """The same system with drive d(drive)/d(xi).  Means are linear in
    the drive, so its solutions are the mean derivatives."""
    return LinearSystem(
        drift=sys.drift,
        drive=drive_vector(1.0, sys.n_modes),
        input_matrix=sys.input_matrix,
        bath_occupations=sys.bath_occupations,
    )


def real_image(matrix: np.ndarray) -> np.ndarray:
    """Map a complex (rows x cols) matrix to its real (2 rows x 2 cols)
    image; entry m becomes [[Re m, Im m], [-Im m, Re m]]."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    return np.kron(matrix.real, np.eye(2)) + np.kron(matrix.imag, _ROTATOR)


def quadrature_vector(values: np.ndarray) -> np.ndarray:
    """Complex mode amplitudes to the interleaved (q, p) vector."""
    values = np.asarray(values, dtype=complex).reshape(-1)
    out = np.empty(2 * values.size)
    out[0::2] = SQRT2 * values.imag
    out[1::2] = SQRT2 * values.real
    return out


def mode_vector(quadratures: np.ndarray) -> np.ndarray:
    """Inverse of quadrature_vector: b = (p + i q)/sqrt(2)."""
    quadratures = np.asarray(quadratures, dtype=float).reshape(-1)
    return (quadratures[1::2] + 1j * quadratures[0::2]) / SQRT2


def mode_slice(mode: int) -> slice:
    """Rows of mode `mode` (0 is the probe) in quadrature ordering."""
    return slice(2 * mode, 2 * mode + 2)


def to_quadrature(sys: LinearSystem) -> QuadratureSystem:
    images = real_image(sys.input_matrix)
    weights = np.repeat(sys.bath_occupations + 0.5, 2)
    diffusion = (images * weights) @ images.T
    return QuadratureSystem(
        drift_q=real_image(sys.drift),
        diffusion=0.5 * (diffusion + diffusion.T),
        drive_q=quadrature_vector(sys.drive),
    )


def stability_margin(sys: LinearSystem | QuadratureSystem) -> float:
    """Largest real part of the drift spectrum; negative means stable."""
    if isinstance(sys, QuadratureSystem):
        matrix = sys.drift_q
    else:
        matrix = sys.drift
    return float(np.max(np.linalg.eigvals(matrix).real))
