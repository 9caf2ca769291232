import numpy as np
import pytest

from specden import (
    BudgetLedger,
    DiagonalOperator,
    SdeConfig,
    SeededStream,
    average_densities,
    cmm,
    exact_density,
    run,
    schatten1_estimate,
    sde_with_deflation,
    slq,
    vr_slq,
    wasserstein1,
)
from specden.lanczos import lanczos, tridiag_eig
from specden.metrics import DiscreteDistribution
from specden.operators import norm_estimate_cost
from specden.sde import BudgetExhaustedError, _vr_sizing

from conftest import random_symmetric


def test_slq_hand_case_through_lanczos():
    # For A = diag(1, -1) and g = (1, 1)/sqrt(2), the SLQ density is exactly
    # half mass at +1 and half at -1, so W1 against the true spectrum is 0.
    A = DiagonalOperator(np.array([1.0, -1.0]))
    g = np.array([1.0, 1.0]) / np.sqrt(2.0)
    ritz = tridiag_eig(lanczos(A, g, 2))
    f = DiscreteDistribution(ritz.values.copy(), ritz.weights.copy())
    assert wasserstein1(f, exact_density(A)) <= 1e-12


def test_slq_weights_sum_and_trial_averaging():
    A, _ = random_symmetric(12, seed=31)
    single = slq(A, 12, SeededStream(0))
    assert single.weights.sum() == pytest.approx(1.0, abs=1e-10)
    few = average_densities([slq(A, 12, SeededStream(0).substream(t)) for t in range(2)])
    many = average_densities(
        [slq(A, 12, SeededStream(0).substream(t)) for t in range(300)]
    )
    exact = exact_density(A)
    assert wasserstein1(many, exact) <= 0.05
    assert wasserstein1(many, exact) <= wasserstein1(few, exact) + 1e-12


def test_slq_uniform_weight_diagnostic_recovers_spectrum():
    A, _ = random_symmetric(25, seed=32)
    f = slq(A, 25, SeededStream(7), uniform_weights=True)
    assert wasserstein1(f, exact_density(A)) <= 1e-8


def test_slq_budget_and_support_containment():
    A, spectrum = random_symmetric(40, seed=33)
    ledger = BudgetLedger()
    f = slq(A, 18, SeededStream(3), ledger)
    assert ledger.total == 18
    top = np.max(np.abs(spectrum))
    assert np.max(np.abs(f.locations)) <= top + 1e-10


def test_vr_slq_gates_low_rank_atoms_at_exactly_one_over_n():
    entries = np.zeros(50)
    entries[:3] = [1.0, -0.7, 0.4]
    A = DiagonalOperator(entries)
    f = vr_slq(A, 20, 5, stream=SeededStream(4))
    for target in entries[:3]:
        idx = np.argmin(np.abs(f.locations - target))
        assert abs(f.locations[idx] - target) <= 1e-8
        assert f.weights[idx] == 1.0 / 50
    assert f.weights.sum() == pytest.approx(1.0, abs=1e-10)


def test_vr_slq_empty_gate_equals_slq():
    A, _ = random_symmetric(40, seed=35)
    # beta huge -> residual threshold below machine precision, nothing admits.
    f_vr = vr_slq(A, 10, 5, beta=50.0, stream=SeededStream(8))
    f_slq = slq(A, 10, SeededStream(8))
    np.testing.assert_allclose(f_vr.locations, f_slq.locations)
    np.testing.assert_allclose(f_vr.weights, f_slq.weights)


def test_vr_slq_budget_is_m_plus_tested():
    entries = np.zeros(50)
    entries[:3] = [1.0, -0.7, 0.4]
    A = DiagonalOperator(entries)
    ledger = BudgetLedger()
    m, l = 20, 5
    vr_slq(A, m, l, stream=SeededStream(4), ledger=ledger)
    # Krylov space has dimension 4 here, so Lanczos breaks down at 4 and
    # only min(l, 4) residual tests run.
    assert ledger.counts["lanczos"] == 4
    assert ledger.counts["residual_test"] == 4
    with pytest.raises(ValueError):
        vr_slq(A, 5, 6, stream=SeededStream(0))


def test_vr_sizing_fits_budget():
    for budget in (3, 10, 100, 1000):
        m, l = _vr_sizing(budget, 500)
        assert m + l <= budget
        assert l == min(m // 2, 100)


def test_sde_with_deflation_on_exact_low_rank():
    n, r = 80, 4
    entries = np.zeros(n)
    entries[:r] = [1.0, -0.8, 0.6, 0.5]
    A = DiagonalOperator(entries)
    config = SdeConfig("def_cmm", budget=400, deflation_block=r, seed=2)
    est = sde_with_deflation(A, config)
    assert est.diagnostics["s"] >= r
    exact = exact_density(A)
    L = max(est.diagnostics["L"], 1e-12)
    assert wasserstein1(est.density, exact) <= 2 * L / config.grid_d + 1e-4 * 1.0
    assert est.ledger.total <= config.budget


def test_sde_with_deflation_s_zero_equals_plain_cmm():
    A, _ = random_symmetric(60, seed=41)
    # beta so strict that no Ritz pair is ever admitted.
    config = SdeConfig("def_cmm", budget=300, deflation_block=2, beta=50.0, seed=9)
    ledger = BudgetLedger()
    est = sde_with_deflation(A, config, ledger)
    assert est.diagnostics["s"] == 0
    spent_on_krylov = (
        ledger.counts["krylov_subspace"]
        + ledger.counts["rayleigh_ritz"]
        + norm_estimate_cost(60)
    )
    remaining = config.budget - spent_on_krylov
    plain = cmm(A, remaining, SeededStream(9), b=config.hutchinson_b, d=config.grid_d)
    np.testing.assert_allclose(est.density.locations, plain.locations)
    np.testing.assert_allclose(est.density.weights, plain.weights)


def test_sde_with_deflation_budget_exhaustion():
    A, _ = random_symmetric(60, seed=42)
    with pytest.raises(BudgetExhaustedError):
        sde_with_deflation(A, SdeConfig("def_cmm", budget=5, seed=0))


def test_sde_with_deflation_rejects_wrong_algorithm():
    A, _ = random_symmetric(10, seed=1)
    with pytest.raises(ValueError):
        sde_with_deflation(A, SdeConfig("slq", budget=50))


def test_config_validation():
    with pytest.raises(ValueError):
        SdeConfig("nope", budget=10)
    with pytest.raises(ValueError):
        SdeConfig("slq", budget=0)
    with pytest.raises(ValueError):
        SdeConfig("slq", budget=10, trials=0)
    with pytest.raises(ValueError):
        SdeConfig("cmm", budget=10, hutchinson_b=0)
    assert SdeConfig("slq", budget=10).resolved_trials() == 15
    assert SdeConfig("cmm", budget=100).resolved_trials() == 1


@pytest.mark.parametrize("algo", ["cmm", "kpm", "def_cmm", "def_kpm", "slq", "vr_slq"])
def test_run_every_algorithm_mass_and_budget(algo):
    A, _ = random_symmetric(60, seed=50)
    config = SdeConfig(algo, budget=250, trials=2, seed=5)
    est = run(A, config)
    assert np.all(est.density.weights >= 0)
    assert est.density.weights.sum() == pytest.approx(1.0, abs=1e-9)
    assert est.ledger.total <= config.budget * 2
    # Determinism end to end.
    est2 = run(A, config)
    np.testing.assert_array_equal(est.density.locations, est2.density.locations)
    np.testing.assert_array_equal(est.density.weights, est2.density.weights)


def test_schatten1_identity_zero_and_harmonic():
    n = 100
    assert abs(schatten1_estimate(DiagonalOperator(np.ones(n)), 0.5) - n) <= 0.5 * n
    assert abs(schatten1_estimate(DiagonalOperator(np.zeros(n)), 0.5)) <= 1e-6
    n = 200
    H = float(np.sum(1.0 / np.arange(1, n + 1)))
    hits = 0
    for seed in range(3):
        M = schatten1_estimate(DiagonalOperator(1.0 / np.arange(1, n + 1)), 0.2, seed=seed)
        if abs(M - H) <= 0.2 * H:
            hits += 1
    assert hits >= 2
    with pytest.raises(ValueError):
        schatten1_estimate(DiagonalOperator(np.ones(4)), 1.5)


def test_schatten1_clamps_oversized_block_with_warning():
    A = DiagonalOperator(np.ones(9))
    with pytest.warns(UserWarning):
        M = schatten1_estimate(A, 0.3)
    assert abs(M - 9) <= 0.3 * 9
