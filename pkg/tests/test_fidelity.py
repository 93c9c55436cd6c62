import numpy as np
import pytest

from mns.errors import ValidationError
from mns.fidelity import (
    choi_matrix,
    decode,
    encode,
    evolve,
    fidelity_sweep,
    liouvillian,
    worst_case_fidelity,
)
from mns.linalg import dagger, haar_random_unitary, random_density_matrix, tensor
from mns.noise import (
    LindbladModel,
    PAULI_Z,
    basis_state_encoding,
    collective_dfs_encoding,
    collective_xz,
    collective_z_with_local_dephasing,
    perturbed_collective,
    random_perturbation_unitary,
)
from mns.search import SearchConfig

LOCAL_RATES = (0.33, 0.47, 0.85)


def _dephasing(gamma=1.0):
    return LindbladModel(1, ((gamma, PAULI_Z),))


def _perturbed(delta, seed=9):
    v = random_perturbation_unitary(8, delta, "global", seed=seed)
    return perturbed_collective(3, 1.0, 1.0, v)


def _pure_fidelity(psi, u, dims, evolved):
    rho1 = np.outer(psi, psi.conj())
    out, _ = decode(evolved.apply(encode(rho1, u, dims)), u, dims, renormalize=False)
    return float(np.real(psi.conj() @ out @ psi))


def test_liouvillian_dephasing_closed_form():
    gamma = 0.8
    ll = liouvillian(_dephasing(gamma))
    expected = gamma * (tensor(PAULI_Z, PAULI_Z) - np.eye(4))
    assert np.abs(ll - expected).max() <= 1e-15
    assert np.array_equal(np.diagonal(ll).real, [0.0, -2 * gamma, -2 * gamma, 0.0])


def test_evolve_zero_time_is_identity():
    ev = evolve(_dephasing(), 0.0)
    assert np.array_equal(ev.superoperator, np.eye(4))
    rng = np.random.default_rng(0)
    rho = random_density_matrix(2, rng)
    assert np.array_equal(ev.apply(rho), rho)
    with pytest.raises(ValidationError):
        evolve(_dephasing(), -0.1)
    with pytest.raises(ValidationError):
        ev.apply(np.eye(3))


def test_evolve_coherence_decay():
    gamma = 0.6
    plus = np.full((2, 2), 0.5, dtype=complex)
    for t in (0.1, 0.5, 1.3):
        out = evolve(_dephasing(gamma), t).apply(plus)
        assert abs(out[0, 1] - 0.5 * np.exp(-2 * gamma * t)) <= 1e-12
        assert abs(out[0, 0] - 0.5) <= 1e-12


def test_evolve_is_cptp():
    rng = np.random.default_rng(1)
    for model in (collective_xz(2, 1.0, 0.5), _dephasing(0.9)):
        for t in (0.3, 1.0):
            ev = evolve(model, t)
            for _ in range(3):
                rho = random_density_matrix(model.dim, rng)
                out = ev.apply(rho)
                assert abs(np.trace(out).real - 1.0) <= 1e-10
            choi = choi_matrix(ev.superoperator)
            assert np.abs(choi - dagger(choi)).max() <= 1e-10
            assert np.linalg.eigvalsh(choi).min() >= -1e-9


def test_choi_matrix_identity_superoperator():
    vec_id = np.eye(2).reshape(-1)
    assert np.array_equal(choi_matrix(np.eye(4)), np.outer(vec_id, vec_id))
    with pytest.raises(ValidationError):
        choi_matrix(np.eye(5))


def test_dfs_encoded_state_is_stationary():
    # collective noise cannot see a state encoded in the doublet pair
    model = collective_xz(3, 1.0, 1.0)
    u = collective_dfs_encoding(3)
    rng = np.random.default_rng(2)
    rho = encode(random_density_matrix(2, rng), u, (2, 2))
    out = evolve(model, 1.0).apply(rho)
    assert np.abs(out - rho).max() <= 1e-9


def test_encode_decode_roundtrip():
    rng = np.random.default_rng(3)
    u = haar_random_unitary(8, rng)
    rho1 = random_density_matrix(2, rng)
    full = encode(rho1, u, (2, 2))
    assert abs(np.trace(full).real - 1.0) <= 1e-12
    back, leakage = decode(full, u, (2, 2))
    assert np.abs(back - rho1).max() <= 1e-12
    assert abs(leakage) <= 1e-12


def test_encode_rank_bound():
    psi = np.zeros(2, dtype=complex)
    psi[0] = 1.0
    rho1 = np.outer(psi, psi.conj())
    full = encode(rho1, haar_random_unitary(8, 4), (2, 2))
    eig = np.linalg.eigvalsh(full)
    assert int(np.sum(eig > 1e-12)) <= 2  # n2 * rank(rho1)
    assert np.abs(eig[-2:] - 0.5).max() <= 1e-12


def test_encode_rejects_invalid_states():
    u = np.eye(8, dtype=complex)
    with pytest.raises(ValidationError):
        encode(np.array([[0.5, 0.5], [0.2, 0.5]]), u, (2, 2))  # not Hermitian
    with pytest.raises(ValidationError):
        encode(np.diag([0.7, 0.7]), u, (2, 2))  # trace != 1
    with pytest.raises(ValidationError):
        encode(np.diag([1.5, -0.5]), u, (2, 2))  # negative eigenvalue
    with pytest.raises(ValidationError):
        encode(np.diag([0.5, 0.3, 0.2]), u, (2, 2))  # wrong logical dim


def test_decode_leakage_bookkeeping():
    rng = np.random.default_rng(5)
    u = haar_random_unitary(8, rng)
    rho1 = random_density_matrix(2, rng)
    outside = np.zeros((8, 8), dtype=complex)
    outside[4:, 4:] = random_density_matrix(4, rng)
    leaky = 0.7 * encode(rho1, u, (2, 2)) + 0.3 * (dagger(u) @ outside @ u)
    raw, leakage = decode(leaky, u, (2, 2), renormalize=False)
    assert abs(leakage - 0.3) <= 1e-12
    assert abs(np.trace(raw).real - 0.7) <= 1e-12
    renormed, leakage2 = decode(leaky, u, (2, 2))
    assert abs(leakage2 - 0.3) <= 1e-12
    assert np.abs(renormed - rho1).max() <= 1e-12


def test_worst_case_fidelity_identity_evolution():
    ev = evolve(collective_xz(3, 1.0, 1.0), 0.0)
    fi = worst_case_fidelity(haar_random_unitary(8, 6), (2, 2), ev)
    assert abs(fi - 1.0) <= 1e-12


def test_worst_case_fidelity_dfs_encoding():
    ev = evolve(collective_xz(3, 1.0, 1.0), 1.0)
    fi = worst_case_fidelity(collective_dfs_encoding(3), (2, 2), ev)
    assert fi >= 1.0 - 1e-6


def test_worst_case_fidelity_dephasing_closed_form():
    for gamma, t in ((0.7, 0.9), (1.0, 1.0)):
        ev = evolve(_dephasing(gamma), t)
        fi = worst_case_fidelity(np.eye(2), (2, 1), ev)
        assert abs(fi - 0.5 * (1 + np.exp(-2 * gamma * t))) <= 1e-6


def test_worst_case_fidelity_qutrit_chart():
    ev = evolve(collective_z_with_local_dephasing(3, 1.0, 0.1, LOCAL_RATES), 0.0)
    fi = worst_case_fidelity(basis_state_encoding(8, [3, 5, 6]), (3, 1), ev)
    assert abs(fi - 1.0) <= 1e-12


def test_worst_case_fidelity_generic_dim_fallback():
    ev = evolve(collective_xz(3, 1.0, 1.0), 0.0)
    fi = worst_case_fidelity(haar_random_unitary(8, 7), (4, 1), ev)
    assert abs(fi - 1.0) <= 1e-9


def test_worst_case_below_sampled_fidelities():
    # the reported minimum sits under both the mean and the minimum of a
    # 1000-state random sample
    ev = evolve(_perturbed(0.1), 1.0)
    u = collective_dfs_encoding(3)
    fi = worst_case_fidelity(u, (2, 2), ev)
    rng = np.random.default_rng(8)
    sample = []
    for _ in range(1000):
        psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi /= np.linalg.norm(psi)
        sample.append(_pure_fidelity(psi, u, (2, 2), ev))
    sample = np.array(sample)
    assert fi <= sample.min() + 1e-12
    assert fi <= sample.mean()
    assert 0.0 <= fi <= 1.0 + 1e-9


def test_worst_case_fidelity_non_increasing_in_time():
    u = collective_dfs_encoding(3)
    model = _perturbed(0.1)
    vals = [
        worst_case_fidelity(u, (2, 2), evolve(model, t)) for t in (0.0, 0.3, 0.6, 1.0)
    ]
    assert vals[0] >= 1.0 - 1e-12
    for a, b in zip(vals, vals[1:]):
        assert b <= a + 1e-9


def test_fidelity_sweep_delta_mode():
    config = SearchConfig(num_restarts=2, seed=1, candidate_dims=((2, 2),))
    points = fidelity_sweep(
        _perturbed, [0.0, 0.05, 0.1], "delta", collective_dfs_encoding(3), (2, 2), config
    )
    assert [pt.param for pt in points] == [0.0, 0.05, 0.1]
    for pt in points:
        assert 0.0 <= pt.fi_mns <= 1.0 + 1e-9
        assert 0.0 <= pt.fi_dfs <= 1.0 + 1e-9
        assert pt.fi_mns >= pt.fi_dfs - 1e-9
        assert pt.converged
    assert abs(points[0].fi_mns - 1.0) <= 1e-6
    assert abs(points[0].fi_dfs - 1.0) <= 1e-6
    # strict advantage away from the unperturbed point
    assert points[2].fi_mns - points[2].fi_dfs > 1e-4


def test_fidelity_sweep_dfs_plateau():
    # the reference curve is quadratically flat near delta = 0
    for delta in (0.005, 0.01):
        ev = evolve(_perturbed(delta), 1.0)
        fi = worst_case_fidelity(collective_dfs_encoding(3), (2, 2), ev)
        assert abs(fi - 1.0) <= 1e-3


def test_fidelity_sweep_tf_mode():
    config = SearchConfig(num_restarts=2, seed=1, candidate_dims=((2, 2),))
    points = fidelity_sweep(
        lambda _v: _perturbed(0.05),
        [0.0, 0.1],
        "tf",
        collective_dfs_encoding(3),
        (2, 2),
        config,
    )
    assert [pt.param for pt in points] == [0.0, 0.1]
    assert abs(points[0].fi_mns - 1.0) <= 1e-9
    assert abs(points[0].fi_dfs - 1.0) <= 1e-9
    assert points[1].fi_mns <= points[0].fi_mns + 1e-9
    assert points[0].j_opt == points[1].j_opt  # single search in tf mode


def test_fidelity_sweep_flags_failed_points():
    config = SearchConfig(num_restarts=1, seed=1, candidate_dims=((2, 2),))

    def model_for(delta):
        if delta > 0.04:
            raise RuntimeError("synthetic failure")
        return _perturbed(delta)

    points = fidelity_sweep(
        model_for, [0.0, 0.05], "delta", collective_dfs_encoding(3), (2, 2), config
    )
    assert points[0].converged
    assert not points[1].converged
    assert np.isnan(points[1].fi_mns)


def test_fidelity_sweep_validation():
    config = SearchConfig(num_restarts=1, candidate_dims=((2, 2),))
    with pytest.raises(ValidationError):
        fidelity_sweep(_perturbed, [0.0], "sideways", np.eye(8), (2, 2), config)
    with pytest.raises(ValidationError):
        fidelity_sweep(_perturbed, [], "delta", np.eye(8), (2, 2), config)
