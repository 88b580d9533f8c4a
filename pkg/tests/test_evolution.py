"""MPO construction and TDVP integration against dense oracles.

The dense references are full matrix exponentials (or eigendecompositions)
of explicitly assembled Hamiltonians on up to four sites, so the tensor
contractions and the integrator are checked independently.
"""

import numpy as np
import pytest
from scipy.linalg import expm

from chaintomo.errors import ConfigError, KrylovError
from chaintomo.evolution import (
    ChainModel,
    EvolutionConfig,
    Tdvp2Engine,
    build_mpo,
    evolve,
    lanczos_expm_apply,
    tdvp2_sweep,
)
from chaintomo.mps import TruncationPolicy, expectation, product_state
from chaintomo.operators import (
    PLUS_X,
    SIGMA_X,
    SIGMA_Z,
    annihilation,
    creation,
    number_op,
    vacuum,
)
from chaintomo.spectral import ChainCoefficients, SpectralDensity, chain_coefficients

from conftest import kron_chain

NO_TRUNC = TruncationPolicy(max_bond=None, sv_cutoff=0.0)


def decoupled_coeffs(omegas, hops=None):
    """Synthetic chain with g = 0 for decoupled-qubit tests."""
    omegas = np.asarray(omegas, dtype=float)
    if hops is None:
        hops = np.zeros(max(len(omegas) - 1, 0))
    return ChainCoefficients(
        omegas=omegas, hops=np.asarray(hops, dtype=float), g=0.0, total_weight=0.0
    )


def dense_hamiltonian(model, dims):
    """Direct sum-of-terms construction, independent of the MPO code."""
    coeffs = model.coeffs
    h = model.delta * kron_chain({0: SIGMA_X}, dims)
    for n in range(coeffs.length):
        d = dims[n + 1]
        h = h + coeffs.omegas[n] * kron_chain({n + 1: number_op(d)}, dims)
    for n in range(coeffs.length - 1):
        hop = kron_chain({n + 1: creation(dims[n + 1])}, dims) @ kron_chain(
            {n + 2: annihilation(dims[n + 2])}, dims
        )
        h = h + coeffs.hops[n] * (hop + hop.conj().T)
    d0 = dims[1]
    h = h + coeffs.g * kron_chain({0: SIGMA_Z}, dims) @ (
        kron_chain({1: creation(d0)}, dims) + kron_chain({1: annihilation(d0)}, dims)
    )
    return h


@pytest.fixture(scope="module")
def ohmic_l3():
    coeffs = chain_coefficients(SpectralDensity(0.2, 1.0, 4.0), 3)
    return ChainModel(delta=1.0, coeffs=coeffs)


class TestEvolutionConfig:
    def test_defaults(self):
        cfg = EvolutionConfig()
        assert cfg.n_steps == 500

    @pytest.mark.parametrize(
        "kwargs",
        [dict(dt=0.0), dict(dt=-0.1), dict(t_max=0.0), dict(krylov_dim=1), dict(observe_stride=0)],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ConfigError):
            EvolutionConfig(**kwargs)


class TestBuildMpo:
    def test_decoupled_single_mode(self):
        model = ChainModel(delta=1.0, coeffs=decoupled_coeffs([3.0]))
        dims = [2, 4]
        dense = build_mpo(model, 4).to_dense()
        want = kron_chain({0: SIGMA_X}, dims) + 3.0 * kron_chain({1: number_op(4)}, dims)
        assert np.linalg.norm(dense - want) < 1e-12

    def test_l2_matches_term_sum(self):
        coeffs = chain_coefficients(SpectralDensity(0.3, 0.5, 4.0), 2)
        model = ChainModel(delta=1.0, coeffs=coeffs)
        dims = [2, 3, 3]
        dense = build_mpo(model, 3).to_dense()
        assert np.linalg.norm(dense - dense_hamiltonian(model, dims)) < 1e-12
        assert np.linalg.norm(dense - dense.conj().T) < 1e-12

    def test_l3_matches_term_sum(self, ohmic_l3):
        dims = [2, 4, 4, 4]
        dense = build_mpo(ohmic_l3, 4).to_dense()
        assert np.linalg.norm(dense - dense_hamiltonian(ohmic_l3, dims)) < 1e-12

    def test_ground_energy_decoupled(self):
        model = ChainModel(delta=1.0, coeffs=decoupled_coeffs([8.0, 16.0, 24.0], [4.0, 5.0]))
        dense = build_mpo(model, 3).to_dense()
        assert np.linalg.eigvalsh(dense)[0] == pytest.approx(-1.0, abs=1e-12)

    def test_per_site_dims(self):
        model = ChainModel(delta=1.0, coeffs=decoupled_coeffs([1.0, 2.0]))
        mpo = build_mpo(model, [5, 3])
        assert mpo.phys_dims == [2, 5, 3]
        with pytest.raises(ConfigError):
            build_mpo(model, [5, 3, 3])


class TestLanczosExpm:
    def test_matches_dense_expm(self, rng):
        n = 40
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = (h + h.conj().T) / 2
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        got = lanczos_expm_apply(lambda x: h @ x, v, -0.3j, max_dim=40)
        want = expm(-0.3j * h) @ v
        assert np.linalg.norm(got - want) < 1e-10 * np.linalg.norm(v)

    def test_eigenvector_gets_phase(self, rng):
        h = np.diag(np.array([1.0, 4.0, 9.0]))
        v = np.array([0.0, 1.0, 0.0], dtype=complex)
        got = lanczos_expm_apply(lambda x: h @ x, v, -1j * 0.7)
        assert np.linalg.norm(got - np.exp(-1j * 0.7 * 4.0) * v) < 1e-13

    def test_zero_vector(self):
        v = np.zeros(5, dtype=complex)
        out = lanczos_expm_apply(lambda x: x, v, -1j)
        assert np.array_equal(out, v)

    def test_preserves_shape(self, rng):
        h = np.eye(12)
        v = (rng.normal(size=(3, 2, 2)) + 0j)
        out = lanczos_expm_apply(lambda x: x.reshape(-1).reshape(3, 2, 2), v, -1j * 0.1)
        assert out.shape == (3, 2, 2)

    def test_raises_on_exhaustion(self, rng):
        n = 60
        h = np.diag(np.linspace(0.0, 400.0, n))
        v = np.ones(n, dtype=complex) / np.sqrt(n)
        with pytest.raises(KrylovError) as excinfo:
            lanczos_expm_apply(lambda x: h @ x, v, -1j, max_dim=4, tol=1e-14)
        assert excinfo.value.achieved is not None
        assert excinfo.value.achieved > 0


class TestTdvpSweep:
    def test_decoupled_plus_x_invariant(self):
        model = ChainModel(delta=1.0, coeffs=decoupled_coeffs([8.0, 16.0], [4.0]))
        mpo = build_mpo(model, 3)
        state = product_state([PLUS_X, vacuum(3), vacuum(3)])
        engine = Tdvp2Engine(state, mpo, NO_TRUNC)
        for _ in range(20):
            engine.sweep(0.05)
            sx = expectation(engine.state, {0: SIGMA_X}).real
            assert sx == pytest.approx(1.0, abs=1e-10)

    def test_norm_preserved(self, ohmic_l3):
        mpo = build_mpo(ohmic_l3, 4)
        state = product_state([PLUS_X] + [vacuum(4)] * 3)
        engine = Tdvp2Engine(state, mpo, NO_TRUNC)
        for _ in range(50):
            engine.sweep(0.01)
            assert abs(engine.state.norm() - 1.0) < 1e-10

    def test_energy_conserved_untruncated(self, ohmic_l3):
        mpo = build_mpo(ohmic_l3, 4)
        state = product_state([PLUS_X] + [vacuum(4)] * 3)
        engine = Tdvp2Engine(state, mpo, NO_TRUNC)
        e0 = expectation(engine.state, mpo).real
        for _ in range(500):
            engine.sweep(0.01)
        assert abs(expectation(engine.state, mpo).real - e0) < 1e-6

    def test_against_dense_propagator(self, ohmic_l3):
        """⟨σ_x⟩ after t=1 vs the full matrix exponential."""
        dims = [2, 4, 4, 4]
        h = dense_hamiltonian(ohmic_l3, dims)
        state = product_state([PLUS_X] + [vacuum(4)] * 3)
        psi = expm(-1j * h * 1.0) @ state.to_dense()
        want = np.vdot(psi, kron_chain({0: SIGMA_X}, dims) @ psi).real

        out, worst = state, 0.0
        engine = Tdvp2Engine(state, build_mpo(ohmic_l3, 4), NO_TRUNC)
        for _ in range(100):
            worst = max(worst, engine.sweep(0.01))
        got = expectation(engine.state, {0: SIGMA_X}).real
        assert got == pytest.approx(want, abs=5e-7)
        assert worst == 0.0  # no truncation at unrestricted bond dimension

    def test_truncation_reported(self, ohmic_l3):
        mpo = build_mpo(ohmic_l3, 4)
        state = product_state([PLUS_X] + [vacuum(4)] * 3)
        engine = Tdvp2Engine(state, mpo, TruncationPolicy(max_bond=2, sv_cutoff=0.0))
        worst = 0.0
        for _ in range(40):
            worst = max(worst, engine.sweep(0.01))
        assert worst > 0.0
        assert engine.state.max_bond <= 2

    def test_wrapper_roundtrip(self, ohmic_l3):
        mpo = build_mpo(ohmic_l3, 4)
        state = product_state([PLUS_X] + [vacuum(4)] * 3)
        out, worst = tdvp2_sweep(state, mpo, 0.01, NO_TRUNC)
        assert out is not state
        assert abs(out.norm() - 1.0) < 1e-10
        assert worst == 0.0

    def test_dimension_mismatch(self, ohmic_l3):
        mpo = build_mpo(ohmic_l3, 4)
        state = product_state([PLUS_X] + [vacuum(5)] * 3)
        with pytest.raises(ConfigError):
            Tdvp2Engine(state, mpo)


class TestEvolve:
    def test_record_schedule(self, ohmic_l3):
        state = product_state([PLUS_X] + [vacuum(3)] * 3)
        cfg = EvolutionConfig(dt=0.01, t_max=1.0, trunc=NO_TRUNC, observe_stride=10)
        records = evolve(state, ohmic_l3, cfg, callbacks=[lambda t, s: {"t2": t}])
        assert len(records) == 11
        times = [r["time"] for r in records]
        for want in (0.0, 0.5, 1.0):
            assert min(abs(t - want) for t in times) < 1e-9
        assert times == sorted(times)
        assert all("max_discarded" in r for r in records)

    def test_no_callbacks_no_records(self, ohmic_l3):
        state = product_state([PLUS_X] + [vacuum(3)] * 3)
        cfg = EvolutionConfig(dt=0.05, t_max=0.2, trunc=NO_TRUNC, observe_stride=1)
        assert evolve(state, ohmic_l3, cfg) == []

    def test_deterministic(self, ohmic_l3):
        state = product_state([PLUS_X] + [vacuum(3)] * 3)
        cfg = EvolutionConfig(dt=0.02, t_max=0.5, trunc=NO_TRUNC, observe_stride=5)
        cb = [lambda t, s: {"sx": expectation(s, {0: SIGMA_X}).real}]
        first = [r["sx"] for r in evolve(state, ohmic_l3, cfg, cb)]
        second = [r["sx"] for r in evolve(state, ohmic_l3, cfg, cb)]
        assert first == second  # bit-identical
