import numpy as np
import pytest

from mns.errors import ValidationError
from mns.linalg import block_projector, dagger
from mns.noise import (
    identity_channel,
    lindblad_to_kraus,
    perturbed_collective,
    random_perturbation_unitary,
)
from mns.objective import objective_of_unitary
from mns.parametrization import realize, zero_params
from mns.search import (
    SearchConfig,
    bfgs_maximize,
    containment_defect,
    default_candidate_dims,
    find_mns,
    projector_distance,
    subspace_projector,
)
from mns.search import _initial_point

from conftest import P_ONE_EXCITED, P_TWO_EXCITED, TIGHT


def test_search_config_validation():
    with pytest.raises(ValidationError):
        SearchConfig(max_iterations=0)
    with pytest.raises(ValidationError):
        SearchConfig(num_restarts=0)
    with pytest.raises(ValidationError):
        SearchConfig(gradient_tolerance=0.0)
    with pytest.raises(ValidationError):
        SearchConfig(candidate_dims=((0, 2),))


def test_default_candidate_dims():
    assert default_candidate_dims(8) == ((2, 1), (2, 2), (2, 3), (2, 4))
    assert default_candidate_dims(8, n1=3) == ((3, 1), (3, 2))


def test_bfgs_from_optimum_terminates_immediately(collective_channel, collective_search):
    config = SearchConfig(num_restarts=1, candidate_dims=((2, 2),))
    out = bfgs_maximize(collective_channel, (2, 2), collective_search.best_params, config)
    assert out.iterations <= 2
    assert out.converged
    assert out.j_final >= 1.0 - 1e-6


def test_bfgs_traces_non_decreasing(collective_search, local_dephasing_search):
    for result in (collective_search, local_dephasing_search[(2, 1)]):
        for rec in result.per_restart:
            diffs = np.diff(rec.trace)
            assert diffs.min() >= -1e-15
            assert rec.trace[-1] == rec.final_j


def test_bfgs_identity_channel_converges_at_start():
    ch = identity_channel(4)
    rng = np.random.default_rng(0)
    out = bfgs_maximize(
        ch, (2, 2), _initial_point(4, rng), SearchConfig(candidate_dims=((2, 2),))
    )
    assert out.iterations == 0
    assert out.converged
    assert abs(out.j_final - 1.0) <= 1e-12


def test_bfgs_dimension_checks(collective_channel):
    cfg = SearchConfig(candidate_dims=((2, 2),))
    with pytest.raises(ValidationError):
        bfgs_maximize(collective_channel, (3, 3), zero_params(8), cfg)
    with pytest.raises(ValidationError):
        bfgs_maximize(collective_channel, (2, 2), zero_params(4), cfg)


def test_find_mns_collective_model_is_dfs(collective_channel, collective_search):
    assert collective_search.is_dfs
    assert collective_search.best_j >= 1.0 - 1e-6
    assert collective_search.dims == (2, 2, 4)
    # the first-order Kraus set overshoots by exactly dt^2 at the true optimum
    assert abs(collective_search.best_j - (1.0 + 1e-6)) <= 1e-12


def test_find_mns_best_is_max_of_restarts(collective_search, local_dephasing_search):
    for result in (collective_search, local_dephasing_search[(2, 1)]):
        finals = [rec.final_j for rec in result.per_restart]
        # polishing may lift the winner, but never below the raw maximum
        assert result.best_j >= max(finals) - 1e-12
        assert abs(result.best_j - max(finals)) <= 1e-9
        assert result.per_restart[result.best_restart].final_j == max(finals)


def test_find_mns_agreement_fraction(collective_search):
    finals = np.array([rec.final_j for rec in collective_search.per_restart])
    expected = float(np.mean(finals >= finals.max() - 1e-6))
    assert collective_search.agreement_fraction == expected
    assert collective_search.agreement_fraction > 0.0


def test_find_mns_two_dim_subspace_inside_double_excitation(local_dephasing_search):
    result = local_dephasing_search[(2, 1)]
    p = subspace_projector(result)
    assert containment_defect(p, P_TWO_EXCITED) <= 1e-6
    # and nowhere near the mirror-image subspace
    assert containment_defect(p, P_ONE_EXCITED) > 0.9


def test_find_mns_qutrit_space_matches_excitation_subspace(local_dephasing_search):
    result = local_dephasing_search[(3, 1)]
    p = subspace_projector(result)
    d = min(
        projector_distance(p, P_TWO_EXCITED), projector_distance(p, P_ONE_EXCITED)
    )
    assert d <= 1e-6


def test_find_mns_perturbed_model_not_dfs():
    v = random_perturbation_unitary(8, 0.1, "global", seed=9)
    ch = lindblad_to_kraus(perturbed_collective(3, 1.0, 1.0, v), 1e-3)
    res = find_mns(ch, SearchConfig(num_restarts=3, seed=1, candidate_dims=((2, 2),)))
    assert not res[(2, 2)].is_dfs
    assert res[(2, 2)].best_j < 1.0 - 1e-6


def test_best_j_invariant_across_master_seeds(
    collective_channel, collective_search, local_dephasing_channel, local_dephasing_search
):
    res8 = find_mns(
        collective_channel, SearchConfig(num_restarts=2, seed=2, candidate_dims=((2, 2),))
    )
    assert abs(res8[(2, 2)].best_j - collective_search.best_j) <= 1e-6
    res10 = find_mns(
        local_dephasing_channel,
        SearchConfig(num_restarts=4, seed=2, candidate_dims=((2, 1), (3, 1)), **TIGHT),
    )
    for dims in ((2, 1), (3, 1)):
        assert abs(res10[dims].best_j - local_dephasing_search[dims].best_j) <= 1e-6


def test_restarts_agreeing_in_j_describe_same_subspace(
    local_dephasing_channel, local_dephasing_search
):
    # rerun the two best restarts of the qutrit search (seeds are derived from
    # (master, dims index, restart index)) and compare their subspaces
    result = local_dephasing_search[(3, 1)]
    order = sorted(result.per_restart, key=lambda rec: -rec.final_j)
    top_two = order[:2]
    assert abs(top_two[0].final_j - top_two[1].final_j) <= 1e-9
    config = SearchConfig(num_restarts=20, seed=1, candidate_dims=((2, 1), (3, 1)), **TIGHT)
    projs = []
    for rec in top_two:
        rng = np.random.default_rng(np.random.SeedSequence(tuple(rec.seed)))
        out = bfgs_maximize(
            local_dephasing_channel, (3, 1), _initial_point(8, rng), config
        )
        assert out.j_final == rec.final_j
        u = realize(out.params_final)
        projs.append(dagger(u) @ block_projector(3, 8) @ u)
    assert projector_distance(projs[0], projs[1]) <= 1e-6


def test_subspace_projector_properties(collective_search):
    p = subspace_projector(collective_search)
    assert np.abs(p - dagger(p)).max() <= 1e-12
    assert np.abs(p @ p - p).max() <= 1e-12
    assert abs(np.trace(p).real - 4.0) <= 1e-10
    eig = np.linalg.eigvalsh(p)
    assert int(np.sum(eig > 0.5)) == 4


def test_projector_distance_and_containment():
    p = block_projector(2, 4)
    q = block_projector(3, 4)
    assert projector_distance(p, p) == 0.0
    assert containment_defect(p, q) <= 1e-15
    assert containment_defect(q, p) == 1.0


def test_find_mns_threads_match_serial(collective_channel):
    cfg = SearchConfig(num_restarts=2, seed=3, candidate_dims=((2, 2),))
    serial = find_mns(collective_channel, cfg, threads=1)[(2, 2)]
    parallel = find_mns(collective_channel, cfg, threads=2)[(2, 2)]
    assert serial.best_j == parallel.best_j
    assert serial.best_restart == parallel.best_restart
    assert np.array_equal(serial.best_params.phases, parallel.best_params.phases)
    assert np.array_equal(serial.best_params.angles, parallel.best_params.angles)
    assert [r.final_j for r in serial.per_restart] == [r.final_j for r in parallel.per_restart]


def test_find_mns_rejects_oversized_dims(collective_channel):
    with pytest.raises(ValidationError):
        find_mns(collective_channel, SearchConfig(candidate_dims=((3, 3),)))


def test_identity_channel_every_dims_optimal():
    ch = identity_channel(4)
    res = find_mns(ch, SearchConfig(num_restarts=1, seed=0, candidate_dims=((2, 1), (2, 2))))
    for dims, result in res.items():
        assert abs(result.best_j - 1.0) <= 1e-12
        assert result.is_dfs
