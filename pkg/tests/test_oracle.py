import numpy as np
import pytest

from nschsim.oracle import homogeneous_oracle, homogeneous_oracle_coupled
from nschsim.stepper import SolverConfig

CFG = SolverConfig(eps=1.0, delta=1.0)


def test_equilibrium_is_constant():
    orc = homogeneous_oracle(0.5, 0.0, CFG, 2.0)
    assert np.all(orc.rho_values == 0.5) and np.all(orc.mu_values == 0.0)


def test_invariant_value():
    orc = homogeneous_oracle(0.3, 2.0, CFG, 1.0)
    assert orc.invariant_values[0] == pytest.approx(3.2, abs=1e-15)
    assert np.max(np.abs(orc.invariant_values - 3.2)) <= 1e-9


def test_t_end_zero():
    orc = homogeneous_oracle(0.3, 2.0, CFG, 0.0)
    assert np.all(orc.rho_values == 0.3) and np.all(orc.mu_values == 2.0)


def test_rtol_self_consistency():
    a = homogeneous_oracle(0.3, 2.0, CFG, 1.0, rtol=1e-8)
    b = homogeneous_oracle(0.3, 2.0, CFG, 1.0, rtol=1e-12)
    err = max(np.max(np.abs(a.mu_values - b.mu_values)), np.max(np.abs(a.rho_values - b.rho_values)))
    assert err <= 1e-7


@pytest.mark.parametrize("rho0,mu0", [(0.3, 2.0), (0.8, 0.5), (0.05, 3.0), (0.6, 0.0)])
def test_coupled_cross_check(rho0, mu0):
    rtol = 1e-10
    a = homogeneous_oracle(rho0, mu0, CFG, 2.0, rtol=rtol)
    b = homogeneous_oracle_coupled(rho0, mu0, CFG, 2.0, rtol=rtol)
    assert np.max(np.abs(a.mu_values - b.mu_values)) <= 100 * rtol * max(1.0, mu0)
    assert np.max(np.abs(a.rho_values - b.rho_values)) <= 100 * rtol
    inv0 = (0.5 * CFG.eps + rho0) * mu0**2
    assert np.max(np.abs(b.invariant_values - inv0)) <= 100 * rtol * max(1.0, inv0)


@pytest.mark.parametrize("rho0,mu0", [(1e-6, 0.0), (1 - 1e-3, 5.0), (0.3, 5.0)])
def test_sign_and_confinement(rho0, mu0):
    orc = homogeneous_oracle(rho0, mu0, CFG, 2.0)
    assert np.all(orc.mu_values >= 0)
    assert np.all((orc.rho_values >= 1e-12) & (orc.rho_values <= 1 - 1e-12))


def test_dense_output_matches_samples():
    orc = homogeneous_oracle(0.3, 2.0, CFG, 1.0)
    mu, rho = orc.at(orc.times)
    assert np.allclose(mu, orc.mu_values, rtol=0, atol=1e-15)
    assert np.allclose(rho, orc.rho_values, rtol=0, atol=1e-15)


@pytest.mark.parametrize("rho0,mu0", [(0.0, 1.0), (1.0, 1.0), (0.5, -1.0)])
def test_bad_data(rho0, mu0):
    with pytest.raises(ValueError):
        homogeneous_oracle(rho0, mu0, CFG, 1.0)
