import math

import pytest

from nonreciprocal_sensing.closedform import (
    FormulaInputs,
    LambdaReading,
    bose_n,
    detuned,
    pair_steady,
    pair_transient,
    parallel,
    steady_amplitudes,
    thermal,
    thermal_excess,
    transient_q,
)
from nonreciprocal_sensing.exceptions import InvalidSpecError, PrecisionError
from nonreciprocal_sensing.model import Coupling


def test_pair_steady() -> None:
    cf = pair_steady(FormulaInputs(kappa=1.0, lambda_eff=1.0))
    assert cf.dxi_nr == pytest.approx(1.0)
    assert cf.dxi_r == pytest.approx(1.0)
    assert cf.eta == pytest.approx(1.0)
    weak = pair_steady(FormulaInputs(kappa=1e-6, lambda_eff=1.0))
    assert weak.eta == pytest.approx(0.5, rel=1e-5)
    assert weak.improvement == pytest.approx(2.0, rel=1e-5)
    with pytest.raises(PrecisionError):
        pair_steady(FormulaInputs(kappa=1.0, lambda_eff=0.0))


def test_pair_transient_limits() -> None:
    lam = 10 / math.sqrt(2)
    late = pair_transient(FormulaInputs(kappa=0.1, lambda_eff=lam, t=500.0))
    steady = pair_steady(FormulaInputs(kappa=0.1, lambda_eff=lam))
    assert late.eta == pytest.approx(steady.eta, rel=1e-10)
    # Early on the reciprocal pair responds faster.
    window = [
        pair_transient(FormulaInputs(kappa=0.1, lambda_eff=lam, t=t)).eta
        for t in (0.05, 0.2, 0.3, 0.44)
    ]
    assert max(window) > 1.0
    with pytest.raises(PrecisionError):
        pair_transient(FormulaInputs(kappa=1.0, lambda_eff=1.0, t=0.0))
    with pytest.raises(InvalidSpecError):
        pair_transient(FormulaInputs(kappa=1.0, lambda_eff=1.0))


def test_transient_q() -> None:
    inputs = FormulaInputs(kappa=1.0, lambda_eff=1.0, t=1e3)
    for coupling in (Coupling.NONRECIPROCAL, Coupling.RECIPROCAL):
        assert transient_q(inputs, coupling) == pytest.approx(
            math.sqrt(2) / 2
        )
    early = FormulaInputs(kappa=1.0, lambda_eff=1.0, t=0.0)
    assert transient_q(early, Coupling.NONRECIPROCAL) == 0.0
    with pytest.raises(InvalidSpecError):
        transient_q(inputs, Coupling.CUSTOM)


@pytest.mark.parametrize("n", [1, 2, 3, 8, 64])
def test_parallel_equal_rates(n: int) -> None:
    cf = parallel(FormulaInputs(kappa=1.0, lambda_eff=1.0, N=n))
    assert cf.eta == pytest.approx(2 * n / (n**3 + 1), rel=1e-12)
    assert cf.eta == pytest.approx(cf.dxi_nr / cf.dxi_r, rel=1e-12)
    assert cf.asymptotics["equal_rates"] == pytest.approx(cf.eta)
    assert cf.asymptotics["strong_dissipation"] == n / (n + 1)


def test_parallel_weak_dissipation() -> None:
    cf = parallel(FormulaInputs(kappa=0.01, lambda_eff=1.0, N=100))
    assert cf.eta == pytest.approx(1e-4, rel=0.2)
    assert cf.asymptotics["weak_dissipation_scaling"] == pytest.approx(1e-4)
    with pytest.raises(InvalidSpecError):
        FormulaInputs(kappa=1.0, lambda_eff=1.0, N=0)


def test_detuned() -> None:
    resonant = pair_steady(FormulaInputs(kappa=0.7, lambda_eff=1.3))
    for opposite in (False, True):
        zero = detuned(
            FormulaInputs(kappa=0.7, lambda_eff=1.3), opposite=opposite
        )
        assert zero.eta == pytest.approx(resonant.eta)
    loses = detuned(FormulaInputs(kappa=0.1, lambda_eff=1.0, delta=1.0))
    assert loses.eta > 1.0
    for d in (0.5, 2.0, 50.0):
        wins = detuned(
            FormulaInputs(kappa=1.0, lambda_eff=1.0, delta_prime=d),
            opposite=True,
        )
        assert wins.eta < 1.0


def test_thermal_reduces_to_vacuum() -> None:
    inputs = FormulaInputs(kappa=0.4, lambda_eff=2.5)
    th = thermal(inputs)
    base = pair_steady(inputs)
    assert th.eta == pytest.approx(base.eta)
    assert th.mu == pytest.approx(1.0)
    assert th.mu_equal == pytest.approx(1.0)
    assert th.mu_gap == 0.0


def test_thermal_equal_rates() -> None:
    for n in (0.1, 1.0, 5.0):
        th = thermal(
            FormulaInputs(
                kappa=2.0,
                lambda_eff=2.0,
                n_a=n,
                n_b=n,
                reading=LambdaReading.PRIME,
            )
        )
        assert th.eta == pytest.approx(1 - n / (2 * (1 + 2 * n)), rel=1e-10)
        assert th.asymptotics["equal_rates"] == pytest.approx(th.eta)
        assert th.mu_equal == pytest.approx(1 + th.mu_gap)


def test_thermal_weak_dissipation_limits() -> None:
    th = thermal(
        FormulaInputs(
            kappa=1e-6,
            lambda_eff=1.0,
            n_a=1.0,
            n_b=1.0,
            reading=LambdaReading.PRIME,
        )
    )
    assert th.asymptotics["weak_dissipation"] == pytest.approx(1 / 6)
    assert th.asymptotics["weak_dissipation_verbatim"] == pytest.approx(
        1 / 12
    )


def test_thermal_mu_decreasing() -> None:
    mus = [
        thermal(FormulaInputs(kappa=1.0, lambda_eff=1.0, n_a=n, n_b=n)).mu
        for n in (0.0, 0.5, 1.0, 10.0, 100.0)
    ]
    assert mus[0] == pytest.approx(1.0)
    assert all(b < a for a, b in zip(mus, mus[1:]))


def test_thermal_two_temperatures() -> None:
    th = thermal(FormulaInputs(kappa=1.0, lambda_eff=1.0, n_a=1.0, n_b=0.0))
    assert math.isnan(th.mu_equal)
    assert th.asymptotics == {}
    assert math.isfinite(th.mu_two_temperature)


def test_thermal_excess() -> None:
    prime = FormulaInputs(
        kappa=1.0, lambda_eff=1.0, n_b=1.0, reading=LambdaReading.PRIME
    )
    assert thermal_excess(prime, Coupling.RECIPROCAL) == pytest.approx(0.75)
    # Only the measurement bath reaches b in the nonreciprocal pair at
    # kappa = lambda_eff: kappa n_b / (kappa + lambda_eff).
    assert thermal_excess(prime, Coupling.NONRECIPROCAL) == pytest.approx(0.5)


def test_bose_occupation() -> None:
    assert bose_n(1.0, 1.0) == pytest.approx(1 / (math.e - 1))
    assert bose_n(1.0, 0.0) == 0.0
    assert bose_n(1e4, 1.0) == 0.0
    inputs = FormulaInputs(
        kappa=1.0, lambda_eff=1.0, omega=2.0, T_a=1.0, T_b=1.0
    )
    assert inputs.occupations == pytest.approx(
        (1 / (math.e**2 - 1), 1 / (math.e**2 - 1))
    )
    with pytest.raises(InvalidSpecError):
        _ = FormulaInputs(kappa=1.0, lambda_eff=1.0, T_a=1.0).occupations


def test_steady_amplitudes() -> None:
    inputs = FormulaInputs(kappa=1.0, lambda_eff=1.0)
    for coupling in (Coupling.NONRECIPROCAL, Coupling.RECIPROCAL):
        amp = steady_amplitudes(inputs, coupling)
        assert amp.b == pytest.approx(0.5j)
        assert amp.number == pytest.approx(0.25)
        assert amp.square == pytest.approx(-0.25)
    star = steady_amplitudes(
        FormulaInputs(kappa=1.0, lambda_eff=1.0, N=2), Coupling.RECIPROCAL
    )
    assert star.b == pytest.approx(2j / 9)
