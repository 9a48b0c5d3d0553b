"""Digitized-evolution tests against dense matrix oracles.

The product-formula engine is pinned word-for-word to a dense product of
single-term exponentials built from independent Kronecker matrices, and
its step error is measured against the un-split per-step propagator
(scipy expm).  Sweep bookkeeping is checked against direct evolve calls.
"""

import numpy as np
import pytest
from scipy.linalg import expm

from cdprep.adiabatic import (
    EvolutionConfig,
    convergence_epsilon,
    evolve,
    step_hamiltonian,
    sweep,
)
from cdprep.agp import cd_hamiltonian, hamiltonian_at, schedule_at
from cdprep.fermion import AdiabaticSplit, adiabatic_split
from cdprep.fixtures import load_fixture, reference_energies
from cdprep.pauli import PauliSum
from cdprep.simulator import Statevector, basis_state, expectation, ground_state

from test_pauli import sum_matrix, word_matrix


@pytest.fixture(scope="module")
def h2_split():
    return adiabatic_split(load_fixture("h2_0.7414"), mapping="bk")


@pytest.fixture(scope="module")
def h2_initial(h2_split):
    return basis_state(h2_split.hf_index, h2_split.n_qubits)


@pytest.fixture(scope="module")
def h2_reference():
    return reference_energies()["h2_0.7414"]


def ordered_dense_terms(h: PauliSum, order: str):
    terms = list(h.terms())
    if order == "lexicographic":
        terms.sort(key=lambda t: t[0].label())
    elif order == "magnitude-descending":
        terms.sort(key=lambda t: (-abs(t[1]), t[0].label()))
    else:
        raise AssertionError(order)
    return terms


def dense_trotter_evolution(split, index, cfg):
    """Independent per-term exponential product on dense vectors."""
    dim = 1 << split.n_qubits
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    eye = np.eye(dim)
    total = cfg.n_steps * cfg.step_size
    for n in range(1, cfg.n_steps + 1):
        point = schedule_at((n - 0.5) * cfg.step_size, total)
        if cfg.cd_order is None:
            layers = [hamiltonian_at(split, point.lam)]
        elif cfg.cd_separate_layer:
            layers = [
                hamiltonian_at(split, point.lam),
                cd_hamiltonian(split, point, cfg.cd_order),
            ]
        else:
            layers = [
                hamiltonian_at(split, point.lam)
                + cd_hamiltonian(split, point, cfg.cd_order)
            ]
        for layer in layers:
            for word, coeff in ordered_dense_terms(layer, cfg.term_order):
                assert abs(coeff.imag) < 1e-10
                theta = cfg.step_size * coeff.real
                p = word_matrix(word.label())
                psi = (np.cos(theta) * eye - 1j * np.sin(theta) * p) @ psi
    return psi


def dense_step_propagator_evolution(split, index, cfg):
    """Per-step expm reference: Trotter-free within each step."""
    dim = 1 << split.n_qubits
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    total = cfg.n_steps * cfg.step_size
    for n in range(1, cfg.n_steps + 1):
        point = schedule_at((n - 0.5) * cfg.step_size, total)
        h = step_hamiltonian(split, point, cfg.cd_order)
        psi = expm(-1j * cfg.step_size * sum_matrix(h)) @ psi
    return psi


def test_config_validation():
    with pytest.raises(ValueError, match="at least 1"):
        EvolutionConfig(n_steps=0, step_size=0.1)
    with pytest.raises(ValueError, match="positive"):
        EvolutionConfig(n_steps=5, step_size=0.0)
    with pytest.raises(ValueError, match="term order"):
        EvolutionConfig(n_steps=5, step_size=0.1, term_order="random")
    with pytest.raises(ValueError, match="mapping"):
        EvolutionConfig(n_steps=5, step_size=0.1, mapping="parity")
    with pytest.raises(ValueError, match="order"):
        EvolutionConfig(n_steps=5, step_size=0.1, cd_order=0)
    cfg = EvolutionConfig(n_steps=4, step_size=0.25)
    assert cfg.total_time == pytest.approx(1.0)


def test_evolve_rejects_mismatched_state(h2_split):
    cfg = EvolutionConfig(n_steps=2, step_size=0.1)
    with pytest.raises(ValueError, match="qubit"):
        evolve(h2_split, basis_state(0, 2), cfg)
    bad = Statevector(np.ones(16, dtype=complex), 4)
    with pytest.raises(ValueError, match="normalized"):
        evolve(h2_split, bad, cfg)


def test_evolve_rejects_mapping_mismatch(h2_split):
    cfg = EvolutionConfig(n_steps=2, step_size=0.1, mapping="jw")
    with pytest.raises(ValueError, match="mapping"):
        evolve(h2_split, basis_state(h2_split.hf_index, 4), cfg)


def test_trotter_matches_dense_term_product(h2_split, h2_initial):
    for order in ("lexicographic", "magnitude-descending"):
        cfg = EvolutionConfig(n_steps=4, step_size=0.21, term_order=order)
        result = evolve(h2_split, h2_initial, cfg)
        oracle = dense_trotter_evolution(h2_split, h2_split.hf_index, cfg)
        assert np.max(np.abs(result.final.amplitudes - oracle)) < 1e-12


def test_trotter_matches_dense_term_product_with_cd(h2_split, h2_initial):
    for separate in (False, True):
        cfg = EvolutionConfig(
            n_steps=3,
            step_size=0.3,
            cd_order=1,
            cd_separate_layer=separate,
        )
        result = evolve(h2_split, h2_initial, cfg)
        oracle = dense_trotter_evolution(h2_split, h2_split.hf_index, cfg)
        assert np.max(np.abs(result.final.amplitudes - oracle)) < 1e-12


def test_merged_and_separate_cd_layers_differ(h2_split, h2_initial):
    # same step Hamiltonian, different product splitting: states agree only
    # to the Trotter error, not exactly
    merged = evolve(
        h2_split,
        h2_initial,
        EvolutionConfig(n_steps=3, step_size=0.3, cd_order=1),
    )
    separate = evolve(
        h2_split,
        h2_initial,
        EvolutionConfig(
            n_steps=3, step_size=0.3, cd_order=1, cd_separate_layer=True
        ),
    )
    gap = np.max(np.abs(merged.final.amplitudes - separate.final.amplitudes))
    assert 1e-12 < gap < 0.1


def test_free_system_is_trotter_exact():
    h_one = PauliSum(2)
    h_one = h_one + PauliSum.from_label("ZI", 0.7) + PauliSum.from_label("IZ", -0.4)
    split = AdiabaticSplit(h_one=h_one, h_two=PauliSum(2), n_qubits=2, mapping="jw")
    state = basis_state(2, 2)
    before = expectation(state, h_one)
    for n_steps, dt in ((1, 0.9), (17, 0.05)):
        cfg = EvolutionConfig(n_steps=n_steps, step_size=dt)
        result = evolve(split, state, cfg)
        after = expectation(result.final, h_one)
        assert after == pytest.approx(before, abs=1e-12)


def test_final_norm_is_one(h2_split, h2_initial):
    cfg = EvolutionConfig(n_steps=7, step_size=0.33, cd_order=1)
    result = evolve(h2_split, h2_initial, cfg)
    assert abs(result.final.norm() - 1.0) < 1e-10


def test_trajectory_recording(h2_split, h2_initial):
    cfg = EvolutionConfig(n_steps=5, step_size=0.2, record_trajectory=True)
    result = evolve(h2_split, h2_initial, cfg)
    assert result.energies is not None and len(result.energies) == 5
    # first step sits near lambda ~ 0: energy close to the mean-field start
    start = expectation(h2_initial, hamiltonian_at(h2_split, schedule_at(0.1, 1.0).lam))
    assert result.energies[0] == pytest.approx(start, abs=0.05)
    off = evolve(h2_split, h2_initial, EvolutionConfig(n_steps=5, step_size=0.2))
    assert off.energies is None


def test_cd_endpoint_neutrality(h2_split):
    for t, total in ((0.0, 2.0), (2.0, 2.0)):
        point = schedule_at(t, total)
        assert point.lam_dot == 0.0
        bare = dict(hamiltonian_at(h2_split, point.lam).terms())
        with_cd = dict(step_hamiltonian(h2_split, point, cd_order=2).terms())
        assert bare.keys() == with_cd.keys()
        for word, coeff in bare.items():
            assert with_cd[word] == coeff


def test_step_hamiltonian_adds_gauge_term(h2_split):
    point = schedule_at(0.5, 1.0)
    bare = step_hamiltonian(h2_split, point, None)
    assert dict(bare.terms()) == dict(hamiltonian_at(h2_split, point.lam).terms())
    assisted = step_hamiltonian(h2_split, point, 1)
    extra = dict(cd_hamiltonian(h2_split, point, 1).terms())
    assert extra and all(w in dict(assisted.terms()) for w in extra)


def test_epsilon_zero_on_ground_state(h2_split):
    h_full = h2_split.full()
    gs = ground_state(h_full, guess_index=h2_split.hf_index)
    eps = convergence_epsilon(gs.state, h_full, gs.energy)
    assert -1e-9 <= eps < 1e-9


def test_epsilon_on_mean_field_equals_correlation_gap(h2_split, h2_initial, h2_reference):
    h_full = h2_split.full()
    eps = convergence_epsilon(h2_initial, h_full, h2_reference["fci_energy"])
    gap = h2_reference["scf_energy"] - h2_reference["fci_energy"]
    assert eps == pytest.approx(gap, abs=1e-8)


def test_trotter_error_against_step_propagator(h2_split, h2_initial):
    # the per-term product deviates from the exact per-step propagator at
    # second order in the step size; halving dt at fixed T shrinks the
    # state error by about 2 (error ~ N dt^2 ~ T dt)
    errors = {}
    for n_steps, dt in ((25, 0.2), (50, 0.1)):
        cfg = EvolutionConfig(n_steps=n_steps, step_size=dt)
        fast = evolve(h2_split, h2_initial, cfg).final.amplitudes
        reference = dense_step_propagator_evolution(h2_split, h2_split.hf_index, cfg)
        errors[dt] = np.linalg.norm(fast - reference)
    assert errors[0.2] < 0.5
    shrink = errors[0.2] / errors[0.1]
    assert 1.5 < shrink < 3.0


def test_evolution_converges_toward_ground_state(h2_split, h2_initial, h2_reference):
    h_full = h2_split.full()
    e0 = h2_reference["fci_energy"]
    eps_short = convergence_epsilon(
        evolve(h2_split, h2_initial, EvolutionConfig(n_steps=10, step_size=0.05)).final,
        h_full,
        e0,
    )
    eps_long = convergence_epsilon(
        evolve(h2_split, h2_initial, EvolutionConfig(n_steps=100, step_size=0.05)).final,
        h_full,
        e0,
    )
    assert eps_long < eps_short
    assert eps_long >= -1e-9


def test_refinement_at_fixed_total_time_is_monotone(h2_split, h2_initial, h2_reference):
    # T = N * dt held at 2.5: shrinking the step toward the continuum limit
    # must not push the prepared state away from the ground state
    h_full = h2_split.full()
    e0 = h2_reference["fci_energy"]
    epsilons = []
    for n_steps in (10, 25, 50, 100):
        cfg = EvolutionConfig(n_steps=n_steps, step_size=2.5 / n_steps)
        final = evolve(h2_split, h2_initial, cfg).final
        epsilons.append(convergence_epsilon(final, h_full, e0))
    for coarse, fine in zip(epsilons, epsilons[1:]):
        assert fine <= coarse + 1e-9


def test_sweep_single_cell_matches_direct_evolve(h2_split, h2_initial):
    h_full = h2_split.full()
    e0 = ground_state(h_full, guess_index=h2_split.hf_index).energy
    result = sweep(h2_split, h2_initial, [0.1], [20], cd_order=1)
    assert len(result.rows) == 1
    row = result.rows[0]
    bare = evolve(h2_split, h2_initial, EvolutionConfig(n_steps=20, step_size=0.1))
    assisted = evolve(
        h2_split, h2_initial, EvolutionConfig(n_steps=20, step_size=0.1, cd_order=1)
    )
    assert row.eps_bare == convergence_epsilon(bare.final, h_full, e0)
    assert row.eps_cd == convergence_epsilon(assisted.final, h_full, e0)
    assert row.ratio == pytest.approx(row.eps_bare / row.eps_cd)
    assert row.total_time == pytest.approx(2.0)
    assert row.error is None


def test_sweep_grid_order_and_row_count(h2_split, h2_initial):
    result = sweep(h2_split, h2_initial, [0.2, 0.1], [5, 10], cd_order=None)
    assert [(r.step_size, r.n_steps) for r in result.rows] == [
        (0.2, 5),
        (0.2, 10),
        (0.1, 5),
        (0.1, 10),
    ]
    assert all(r.eps_cd is None and r.ratio is None for r in result.rows)


def test_sweep_csv_schema_and_determinism(h2_split, h2_initial):
    result = sweep(h2_split, h2_initial, [0.1, 0.05], [5, 10], cd_order=1)
    text = result.to_csv()
    lines = text.splitlines()
    assert lines[0] == "# schema=1"
    assert lines[1] == "dt,N,T,eps_bare,eps_cd,ratio"
    assert len(lines) == 2 + 4
    again = sweep(h2_split, h2_initial, [0.1, 0.05], [5, 10], cd_order=1)
    assert again.to_csv() == text


def test_sweep_records_cell_failures_and_continues(h2_split, h2_initial):
    # an unsupported expansion order fails inside each assisted cell; the
    # bare half of the cell still reports
    result = sweep(h2_split, h2_initial, [0.1], [2, 4], cd_order=99)
    assert len(result.rows) == 2
    for row in result.rows:
        assert row.error is not None and "order" in row.error
        assert row.eps_bare is not None
        assert row.eps_cd is None and row.ratio is None
    text = result.to_csv()
    assert len(text.splitlines()) == 4


def test_sweep_empty_grid_rejected(h2_split, h2_initial):
    with pytest.raises(ValueError, match="grid"):
        sweep(h2_split, h2_initial, [], [10], cd_order=None)
    with pytest.raises(ValueError, match="grid"):
        sweep(h2_split, h2_initial, [0.1], [], cd_order=None)
