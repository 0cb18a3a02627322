import math

import numpy as np
import pytest

from nonreciprocal_sensing.exceptions import InvalidSpecError, StabilityError
from nonreciprocal_sensing.model import (
    Coupling,
    LinearSystem,
    ModelSpec,
    Topology,
    build,
    quadrature_vector,
    to_quadrature,
)
from nonreciprocal_sensing.moments import (
    MomentState,
    covariance_path,
    evolve,
    expm,
    propagate_mean,
    steady_covariance,
    steady_mean,
    steady_state,
    transient_covariance,
)


def test_expm_defective_block() -> None:
    """The nonreciprocal drift is a Jordan block; its exponential has a
    linear-in-t term that diagonalization would lose."""
    jordan = np.array([[-2.0, 0.0], [-2.0, -2.0]])
    for t in np.linspace(0.0, 10.0, 41):
        oracle = math.exp(-2 * t) * np.array([[1.0, 0.0], [-2 * t, 1.0]])
        np.testing.assert_allclose(expm(jordan, t), oracle, atol=1e-12)


def test_expm_rejects_bad_input() -> None:
    with pytest.raises(InvalidSpecError):
        expm(np.zeros((2, 3)))
    with pytest.raises(InvalidSpecError):
        expm(np.array([[math.inf]]))


def test_steady_mean(nr_pair: LinearSystem, r_pair: LinearSystem) -> None:
    np.testing.assert_allclose(steady_mean(nr_pair), [-0.5j, 0.5j])
    np.testing.assert_allclose(steady_mean(r_pair), [-0.5j, 0.5j])
    # <q_b> = sqrt(2) Im<b>
    q_b = quadrature_vector(steady_mean(nr_pair))[2]
    assert q_b == pytest.approx(math.sqrt(2) / 2)


def test_vacuum_is_fixed_point(nr_pair: LinearSystem) -> None:
    cov = steady_covariance(to_quadrature(nr_pair))
    np.testing.assert_allclose(cov, 0.5 * np.eye(4), atol=1e-12)


def test_thermal_covariance() -> None:
    """Reciprocal pair with a hot measurement bath: <b^dag b> is
    n_b (2 kappa^2 + lambda^2) / (2 (kappa^2 + lambda^2))."""
    sys = build(ModelSpec(coupling=Coupling.RECIPROCAL, n_b=1.0))
    cov = steady_covariance(to_quadrature(sys))
    number = 0.5 * (cov[2, 2] + cov[3, 3]) - 0.5
    assert number == pytest.approx(0.75, rel=1e-10)


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec(n_a=0.5, n_b=2.0),
        ModelSpec(coupling=Coupling.RECIPROCAL, n_a=3.0),
        ModelSpec(kappa=0.2, lambda_eff=4.0, n_a=1.0, n_b=1.0),
        ModelSpec(detuning_a=0.7, detuning_b=-0.3, n_b=1.5),
        ModelSpec(topology=Topology.STAR, n_parallel=3, n_a=2.0, n_b=0.5),
    ],
)
def test_thermal_covariance_above_vacuum(spec: ModelSpec) -> None:
    cov = steady_covariance(to_quadrature(build(spec)))
    assert np.min(np.linalg.eigvalsh(cov)) >= 0.5 - 1e-9


def test_unstable_refused() -> None:
    coherent = build(
        ModelSpec(kappa=0.0, lambda_eff=1.0, coupling=Coupling.RECIPROCAL)
    )
    with pytest.raises(StabilityError):
        steady_mean(coherent)
    with pytest.raises(StabilityError):
        steady_covariance(to_quadrature(coherent))


def test_propagation_reaches_steady_state(nr_pair: LinearSystem) -> None:
    zero = np.zeros(2)
    np.testing.assert_array_equal(propagate_mean(nr_pair, zero, 0.0), zero)
    late = propagate_mean(nr_pair, zero, 30.0)
    np.testing.assert_allclose(late, steady_mean(nr_pair), atol=1e-12)
    with pytest.raises(InvalidSpecError):
        propagate_mean(nr_pair, zero, -1.0)


def test_transient_mean_matches_closed_form(r_pair: LinearSystem) -> None:
    """Reciprocal <q_b(t)> = sqrt(2) (lambda - e^{-kappa t}(lambda cos
    lambda t + kappa sin lambda t)) / (kappa^2 + lambda^2)."""
    for t in (0.1, 1.0, 3.0):
        b = propagate_mean(r_pair, np.zeros(2), t)[1]
        expected = (1 - math.exp(-t) * (math.cos(t) + math.sin(t))) / 2
        assert math.sqrt(2) * b.imag == pytest.approx(
            math.sqrt(2) * expected, rel=1e-12
        )


def test_transient_covariance() -> None:
    hot = build(ModelSpec(n_a=2.0, n_b=1.0))
    qsys = to_quadrature(hot)
    c0 = 0.5 * np.eye(4)
    np.testing.assert_array_equal(transient_covariance(qsys, c0, 0.0), c0)
    late = transient_covariance(qsys, c0, 40.0)
    np.testing.assert_allclose(late, steady_covariance(qsys), atol=1e-10)
    # Chaining the path agrees with one long propagation.
    path = covariance_path(qsys, c0, [0.25, 0.5, 2.0])
    np.testing.assert_allclose(
        path[-1], transient_covariance(qsys, c0, 2.0), atol=1e-12
    )
    with pytest.raises(InvalidSpecError):
        covariance_path(qsys, c0, [1.0, 0.5])


def test_stiff_covariance_propagation() -> None:
    """Large kappa times long horizons stay finite and settle."""
    qsys = to_quadrature(build(ModelSpec(kappa=1000.0, n_b=0.5)))
    late = transient_covariance(qsys, 0.5 * np.eye(4), 1000.0)
    np.testing.assert_allclose(late, steady_covariance(qsys), atol=1e-9)


def test_moment_state(nr_pair: LinearSystem) -> None:
    vacuum = MomentState.vacuum(2)
    np.testing.assert_array_equal(vacuum.amplitudes, [0.0, 0.0])
    with pytest.raises(InvalidSpecError):
        MomentState(time=0.0, mean=np.zeros(4), covariance=-np.eye(4))
    with pytest.raises(InvalidSpecError):
        MomentState(time=-1.0, mean=np.zeros(2), covariance=np.eye(2))
    state = evolve(nr_pair, to_quadrature(nr_pair), vacuum, 30.0)
    steady = steady_state(nr_pair, to_quadrature(nr_pair))
    assert state.time == 30.0
    np.testing.assert_allclose(state.mean, steady.mean, atol=1e-12)
    np.testing.assert_allclose(
        state.covariance, steady.covariance, atol=1e-12
    )
