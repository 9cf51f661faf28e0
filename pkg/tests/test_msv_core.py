import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewmsv.msv_core import (
    CovParams,
    LatentStates,
    ModelConfig,
    PriorSet,
    SeriesParams,
    SparsityState,
    build_A,
    inverse_structural_panel,
    k_from_p,
    row_slices,
    sigma_t,
    structural_transform,
    structural_transform_panel,
)


class TestBuildA:
    def test_k2_paper_display(self):
        A = build_A(np.array([0.5]))
        assert np.array_equal(A, np.array([[1.0, 0.0], [-0.5, 1.0]]))

    def test_k1_identity(self):
        assert np.array_equal(build_A(np.array([])), np.eye(1))

    def test_k3_inverse_roundtrip(self):
        A = build_A(np.array([0.5, 0.5, 0.5]))
        assert np.max(np.abs(A @ np.linalg.inv(A) - np.eye(3))) < 1e-12

    def test_row_major_stacking(self):
        a = np.arange(1.0, 7.0)  # k = 4
        A = build_A(a)
        assert A[1, 0] == -1.0
        assert list(A[2, :2]) == [-2.0, -3.0]
        assert list(A[3, :3]) == [-4.0, -5.0, -6.0]
        assert np.all(np.triu(A, 1) == 0)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            build_A(np.array([1.0, 2.0]))  # no k gives p = 2
        with pytest.raises(ValueError):
            build_A(np.array([1.0]), k=3)

    def test_row_slices_cover(self):
        sl = row_slices(4)
        covered = sorted(i for s in sl for i in range(s.start, s.stop))
        assert covered == list(range(6))
        assert k_from_p(6) == 4


class TestSigmaT:
    def test_k2_hand_value(self):
        S = sigma_t(np.array([0.5]), np.zeros(2))
        assert np.allclose(S, [[1.0, 0.5], [0.5, 1.25]], atol=1e-12)

    def test_a_zero_gives_diag(self):
        h = np.array([-1.0, 0.3, 2.0])
        S = sigma_t(np.zeros(3), h)
        assert np.allclose(S, np.diag(np.exp(h)), atol=1e-12)

    def test_random_k4_positive_definite(self, rng):
        for _ in range(25):
            a = rng.standard_normal(6)
            h = rng.standard_normal(4)
            vals = np.linalg.eigvalsh(sigma_t(a, h))
            assert np.all(vals > 0)

    def test_matches_explicit_product(self, rng):
        for _ in range(25):
            a = rng.standard_normal(3)
            h = rng.standard_normal(3)
            A = build_A(a)
            explicit = np.linalg.inv(A) @ np.diag(np.exp(h)) @ np.linalg.inv(A).T
            assert np.max(np.abs(sigma_t(a, h) - explicit)) < 1e-10

    def test_overflow_signalled(self):
        with pytest.raises(OverflowError):
            sigma_t(np.array([0.5]), np.array([45.0, 0.0]))


class TestStructuralTransform:
    def test_identity_when_a_zero(self):
        y = np.array([1.0, -2.0, 0.5])
        assert np.array_equal(structural_transform(y, np.zeros(3)), y)

    def test_k2_hand_value(self):
        out = structural_transform(np.array([1.0, 1.0]), np.array([0.5]))
        assert np.allclose(out, [1.0, 0.5])

    def test_roundtrip_through_inverse(self, rng):
        k, T = 4, 11
        a = rng.standard_normal((6, T))
        lam_w = rng.standard_normal((k, T))
        y = inverse_structural_panel(lam_w, a)
        back = structural_transform_panel(y, a)
        assert np.max(np.abs(back - lam_w)) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 10**6))
    def test_bijection_property(self, k, seed):
        rng = np.random.default_rng(seed)
        a = rng.uniform(-1.5, 1.5, size=k * (k - 1) // 2)
        y = rng.standard_normal(k)
        ytil = structural_transform(y, a)
        y_back = np.linalg.solve(build_A(a), ytil)
        assert np.max(np.abs(y_back - y)) < 1e-10


class TestConfigAndTypes:
    def test_variant_flags(self):
        assert not ModelConfig(k=2, variant="S").has_corr
        assert not ModelConfig(k=2, variant="SS").has_corr
        assert ModelConfig(k=2, variant="C").has_corr
        assert not ModelConfig(k=2, variant="C").has_skew
        assert not ModelConfig(k=2, variant="S").has_sparsity
        assert not ModelConfig(k=2, variant="CS").has_sparsity
        assert ModelConfig(k=2, variant="CSS").has_sparsity
        assert ModelConfig(k=5, variant="CSS").p == 10

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ModelConfig(k=0)
        with pytest.raises(ValueError):
            ModelConfig(k=2, variant="X")
        with pytest.raises(ValueError):
            ModelConfig(k=2, draws=0)

    def test_series_params_invariants(self):
        with pytest.raises(ValueError):
            SeriesParams(mu=0, phi=1.0, sigma=0.1, rho=0.0, nu=10.0)
        with pytest.raises(ValueError):
            SeriesParams(mu=0, phi=0.9, sigma=0.1, rho=0.0, nu=4.0)
        with pytest.raises(ValueError):
            SeriesParams(mu=0, phi=0.9, sigma=0.1, rho=0.0, nu=10.0,
                         beta=-1.0, included=False)
        sp = SeriesParams(mu=-9, phi=0.98, sigma=0.1, rho=-0.3, nu=20.0)
        assert sp.c == pytest.approx(20.0 / 18.0)

    def test_cov_params_and_sparsity(self):
        with pytest.raises(ValueError):
            CovParams(mu_a=0.0, phi_a=1.2, v_a=0.1)
        with pytest.raises(ValueError):
            CovParams(mu_a=0.0, phi_a=0.5, v_a=0.0)
        with pytest.raises(ValueError):
            SparsityState(kappa=1.0)
        assert SparsityState(kappa=0.4).kappa == 0.4

    def test_latent_states_shapes(self):
        with pytest.raises(ValueError):
            LatentStates(h=np.zeros((2, 5)), z=np.ones((2, 4)), a=np.zeros((1, 5)))
        with pytest.raises(ValueError):
            LatentStates(h=np.zeros((2, 5)), z=np.zeros((2, 5)), a=np.zeros((1, 5)))
        st_ = LatentStates(h=np.zeros((3, 5)), z=np.ones((3, 5)), a=np.zeros((3, 5)))
        assert st_.k == 3 and st_.T == 5

    def test_prior_presets(self):
        assert PriorSet().kappa_a == 2.0
        with pytest.raises(ValueError):
            PriorSet(beta_slab_var=0.0)
        with pytest.raises(ValueError):
            PriorSet(nu_lower=2.0)
