import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import chiralfield as cf
from chiralfield.errors import (
    DegeneratePair,
    InvalidPole,
    NoCrest,
    Overflow,
)
from chiralfield.solitons import (
    SolitonConfig,
    kinematics,
    n_soliton,
    one_soliton,
    soliton_field,
    soliton_frame,
    two_soliton,
)


def rel_err(a, b):
    return np.max(np.abs(np.asarray(a) - np.asarray(b)) /
                  np.maximum(np.abs(np.asarray(a)), 1e-30))


valid_mu = st.floats(-5, 5).filter(
    lambda m: abs(m) > 0.05 and abs(abs(m) - 1) > 0.05
)


class TestConfig:
    def test_parse_single(self):
        cfg = SolitonConfig.parse("mu=-2,C=1")
        assert cfg.poles == (-2 + 0j,) and cfg.constants == (1 + 0j,)
        assert cfg.n == 1 and cfg.is_real

    def test_parse_list_and_describe_round_trip(self):
        cfg = SolitonConfig.parse("mu=-2,C=1;mu=3,C=2")
        assert cfg.n == 2
        again = SolitonConfig.parse(cfg.describe())
        assert again.poles == cfg.poles and again.constants == cfg.constants

    def test_parse_empty(self):
        assert SolitonConfig.parse("").n == 0

    def test_parse_complex_pair(self):
        cfg = SolitonConfig.parse("mu=0.5+0.8i,C=1+0.5i;mu=0.5-0.8i,C=1-0.5i")
        assert cfg.n == 2 and not cfg.is_real

    def test_unpaired_complex_rejected(self):
        with pytest.raises(InvalidPole):
            SolitonConfig.parse("mu=0.5+0.8i,C=1")

    def test_conjugate_pole_with_mismatched_constant_rejected(self):
        with pytest.raises(InvalidPole):
            SolitonConfig(poles=(0.5 + 0.8j, 0.5 - 0.8j),
                          constants=(1 + 0.5j, 1 + 0.5j))

    def test_unit_modulus_rejected(self):
        for text in ("mu=1,C=1", "mu=-1,C=1", "mu=0,C=1"):
            with pytest.raises(InvalidPole):
                SolitonConfig.parse(text)

    def test_reciprocal_pair_rejected(self):
        with pytest.raises(InvalidPole):
            SolitonConfig(poles=(3.0, 1 / 3), constants=(1.0, 1.0))

    def test_zero_constant_rejected(self):
        with pytest.raises(InvalidPole):
            SolitonConfig(poles=(2.0,), constants=(0.0,))

    def test_malformed_entries(self):
        for text in ("mu=-2", "mu=-2,C=1,x=3", "nu=-2,C=1", "mu=abc,C=1"):
            with pytest.raises(InvalidPole):
                SolitonConfig.parse(text)


class TestFrame:
    def test_hand_values(self, bg_timelike):
        # at (zeta, eta) = (1, 0): t = 1, z = 1, so L = 1, Lt = -1;
        # mu = -2, C = 3: B = (1 + 2)/3 = 1, gamma = ln 3 + 1 + 2
        cfg = SolitonConfig(poles=(-2.0,), constants=(3.0,))
        fr = soliton_frame(cfg, bg_timelike, np.array(1.0), np.array(0.0))
        assert abs(fr.B[0] - 1.0) < 1e-14
        assert abs(fr.gamma[0] - (np.log(3.0) + 3.0)) < 1e-14
        assert abs(fr.gamma_tilde[0] + np.log(2.0)) < 1e-15
        assert abs(fr.D[0, 0] - 3.0) < 1e-14
        assert fr.Pi == 2.0

    def test_d_matrix_symmetric(self, two_sol_cfg, bg_timelike):
        fr = soliton_frame(two_sol_cfg, bg_timelike,
                           np.linspace(-1, 1, 7), np.linspace(0, 2, 7))
        assert np.allclose(fr.D[0, 1], fr.D[1, 0], rtol=0, atol=1e-15)
        # D_ss = gamma_s - ln C_s
        assert np.allclose(fr.D[1, 1], fr.gamma[1] - np.log(2.0), atol=1e-13)

    def test_rejects_complex(self, bg_timelike):
        cfg = SolitonConfig(poles=(0.5 + 0.8j, 0.5 - 0.8j),
                            constants=(1 + 0j, 1 - 0j))
        with pytest.raises(InvalidPole):
            soliton_frame(cfg, bg_timelike, 0.0, 0.0)


class TestOneSoliton:
    def test_unit_determinant(self, one_sol_cfg, bg_timelike):
        rng = np.random.default_rng(1)
        zeta, eta = rng.uniform(-4, 4, 400), rng.uniform(-4, 4, 400)
        g11, g12, g22 = one_soliton(one_sol_cfg, bg_timelike, zeta, eta)
        assert np.max(np.abs(g11 * g22 - g12**2 - 1)) < 1e-12
        assert np.all(g11 > 0) and np.all(g22 > 0)

    def test_amplitude_bound(self, one_sol_cfg, bg_timelike):
        # |g12| = |1 - mu^2| / (2 |mu| cosh gamma) <= 0.75 for mu = -2
        zeta = np.linspace(-6, 6, 3001)
        g12 = one_soliton(one_sol_cfg, bg_timelike, zeta, 0.3 - zeta)[1]
        assert np.max(np.abs(g12)) <= 0.75 + 1e-12
        assert np.max(np.abs(g12)) > 0.74  # the slice crosses the crest

    def test_far_field_is_background(self, one_sol_cfg, bg_timelike):
        # gamma -> +inf: g11 -> e^{L} e^{gamma_tilde} = e^{L}/|mu|
        t, z = 0.0, 40.0
        zeta, eta = (z + t) / 2, (z - t) / 2
        g11, g12, g22 = one_soliton(one_sol_cfg, bg_timelike,
                                    np.array(zeta), np.array(eta))
        L = t
        assert abs(g12) < 1e-12
        assert abs(g11 - np.exp(L) / 2) < 1e-12

    def test_overflow_guard(self, one_sol_cfg, bg_timelike):
        with pytest.raises(Overflow):
            one_soliton(one_sol_cfg, bg_timelike, np.array(800.0), np.array(0.0))

    def test_matches_determinant_path(self, one_sol_cfg, bg_timelike,
                                      bg_spacelike):
        rng = np.random.default_rng(2)
        zeta, eta = rng.uniform(-5, 5, 500), rng.uniform(-5, 5, 500)
        for bg in (bg_timelike, bg_spacelike):
            closed = one_soliton(one_sol_cfg, bg, zeta, eta)
            det_path = n_soliton(one_sol_cfg, bg, zeta, eta)
            assert max(rel_err(c, d) for c, d in zip(closed, det_path)) < 1e-9

    def test_negative_constant_needs_determinant_path(self, bg_timelike):
        cfg = SolitonConfig(poles=(-2.0,), constants=(-1.0,))
        with pytest.raises(InvalidPole):
            one_soliton(cfg, bg_timelike, np.array(0.0), np.array(0.0))
        g11, g12, g22 = n_soliton(cfg, bg_timelike, np.linspace(-2, 2, 50),
                                  np.linspace(-2, 2, 50))
        assert np.max(np.abs(g11 * g22 - g12**2 - 1)) < 1e-12


class TestTwoSoliton:
    def test_unit_determinant_mixed_sign_product(self, bg_timelike):
        # mu1 mu2 < 0 exercises the sign-sensitive closed-form branch
        for poles in ((-2.0, 3.0), (-2.0, 2.0), (2.0, 3.0)):
            cfg = SolitonConfig(poles=poles, constants=(1.0, 2.0))
            zeta = np.linspace(-3, 3, 101)
            eta = np.linspace(-3, 3, 101)[:, None]
            g11, g12, g22 = two_soliton(cfg, bg_timelike, zeta, eta)
            dev = np.max(np.abs(g11 * g22 - g12**2 - 1))
            assert dev < 1e-11, (poles, dev)

    def test_equal_poles_rejected(self, bg_timelike):
        cfg = SolitonConfig(poles=(2.0, 2.0), constants=(1.0, 1.0))
        with pytest.raises(DegeneratePair):
            two_soliton(cfg, bg_timelike, np.array(0.0), np.array(0.0))

    def test_matches_determinant_path(self, two_sol_cfg, bg_timelike):
        rng = np.random.default_rng(3)
        zeta, eta = rng.uniform(-5, 5, 500), rng.uniform(-5, 5, 500)
        closed = two_soliton(two_sol_cfg, bg_timelike, zeta, eta)
        det_path = n_soliton(two_sol_cfg, bg_timelike, zeta, eta)
        assert max(rel_err(c, d) for c, d in zip(closed, det_path)) < 1e-9

    def test_reduces_to_background_far_away(self, two_sol_cfg, bg_timelike):
        g11, g12, g22 = two_soliton(two_sol_cfg, bg_timelike,
                                    np.array(30.0), np.array(-35.0))
        assert abs(g12) < 1e-10


class TestNSoliton:
    def test_zero_poles_is_background(self, bg_timelike):
        cfg = SolitonConfig(poles=(), constants=())
        zeta, eta = np.linspace(-1, 1, 11), np.linspace(-1, 1, 11)
        g11, g12, g22 = n_soliton(cfg, bg_timelike, zeta, eta)
        L = zeta - eta
        assert np.allclose(g11, np.exp(L), atol=1e-14)
        assert np.allclose(g12, 0.0, atol=1e-14)

    def test_permutation_invariance(self, bg_timelike):
        cfg = SolitonConfig(poles=(-2.0, 3.0, -0.6), constants=(1.0, 2.0, 0.7))
        rng = np.random.default_rng(4)
        zeta, eta = rng.uniform(-3, 3, 200), rng.uniform(-3, 3, 200)
        base = n_soliton(cfg, bg_timelike, zeta, eta)
        for order in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
            permuted = n_soliton(cfg.permuted(order), bg_timelike, zeta, eta)
            assert max(rel_err(a, b) for a, b in zip(base, permuted)) < 1e-10

    def test_three_soliton_invariants(self, bg_timelike):
        cfg = SolitonConfig(poles=(-2.0, 3.0, -0.6), constants=(1.0, 2.0, 0.7))
        grid = cf.Grid.lab(-4, 4, 65, -4, 4, 65)
        f = soliton_field(cfg, bg_timelike, grid)
        assert np.max(np.abs(f.det() - 1)) < 1e-10
        assert np.all(f.g11 > 0) and np.all(f.g22 > 0)

    def test_complex_pair_real_output(self, bg_timelike):
        cfg = SolitonConfig(poles=(0.5 + 0.8j, 0.5 - 0.8j),
                            constants=(1 + 0.5j, 1 - 0.5j))
        grid = cf.Grid.lab(-3, 3, 129, -3, 3, 129)
        f = soliton_field(cfg, bg_timelike, grid)
        assert np.max(np.abs(f.det() - 1)) < 1e-10
        assert cf.trimmed_max(cf.pde_residual(f)) < 2e-2

    def test_chunking_consistent(self, two_sol_cfg, bg_timelike):
        zeta = np.linspace(-2, 2, 301)
        eta = np.linspace(-2, 2, 301)
        one_chunk = n_soliton(two_sol_cfg, bg_timelike, zeta, eta)
        many = n_soliton(two_sol_cfg, bg_timelike, zeta, eta, chunk=17)
        for a, b in zip(one_chunk, many):
            assert np.array_equal(a, b)

    @given(mu=valid_mu, c=st.floats(0.1, 5))
    @settings(max_examples=20, deadline=None)
    def test_random_single_pole_determinant(self, mu, c, bg_timelike):
        assume(abs(mu * mu - 1) > 0.05)
        cfg = SolitonConfig(poles=(mu,), constants=(c,))
        zeta = np.linspace(-1, 1, 9)
        g11, g12, g22 = n_soliton(cfg, bg_timelike, zeta, -zeta / 3)
        assert np.max(np.abs(g11 * g22 - g12**2 - 1)) < 1e-9


class TestKinematics:
    def test_frozen_table(self):
        kt = kinematics(-2.0, "timelike")
        assert abs(kt.k + 4 / 3) < 1e-15
        assert abs(kt.omega - 5 / 3) < 1e-15
        assert kt.v == -1.25
        assert kt.amplitude == 0.75
        ks = kinematics(-2.0, "spacelike")
        assert ks.v == -0.8
        assert kt.v * ks.v == 1.0  # exact reciprocal pair

    @given(mu=valid_mu)
    @settings(max_examples=50, deadline=None)
    def test_reciprocal_velocities(self, mu):
        vt = kinematics(mu, "timelike").v
        vs = kinematics(mu, "spacelike").v
        assert abs(vt * vs - 1) < 1e-14

    def test_superluminal_vs_subluminal(self):
        for mu in (-2.0, 3.0, 0.5, -0.3):
            assert abs(kinematics(mu, "timelike").v) > 1
            assert abs(kinematics(mu, "spacelike").v) < 1

    def test_invalid_pole(self):
        with pytest.raises(InvalidPole):
            kinematics(1.0, "timelike")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            kinematics(2.0, "diagonal")


class TestCrestTrack:
    def test_single_soliton_timelike(self, one_sol_cfg, bg_timelike):
        grid = cf.Grid.lab(-4, 4, 81, -7, 7, 2001)
        f = soliton_field(one_sol_cfg, bg_timelike, grid)
        (track,) = cf.crest_track(f, t_fit=1.0)
        kin = kinematics(-2.0, "timelike")
        assert abs(track.velocity - kin.v) / abs(kin.v) < 0.01
        assert abs(track.amplitude - kin.amplitude) / kin.amplitude < 0.005
        assert abs(track.phase_shift) < 1e-6  # no partner, no shift

    def test_single_soliton_spacelike(self, one_sol_cfg, bg_spacelike):
        grid = cf.Grid.lab(-4, 4, 81, -7, 7, 2001)
        f = soliton_field(one_sol_cfg, bg_spacelike, grid)
        (track,) = cf.crest_track(f, t_fit=1.0)
        assert abs(track.velocity + 0.8) < 0.008

    def test_two_soliton_phase_shift(self, bg_timelike):
        cfg = SolitonConfig(poles=(-2.0, 3.0), constants=(1.0, 1.0))
        grid = cf.Grid.lab(-12, 12, 121, -21, 21, 2001)
        f = soliton_field(cfg, bg_timelike, grid)
        tracks = cf.crest_track(f, t_fit=8.0)
        assert len(tracks) == 2
        # slow crest first (sorted by velocity)
        assert abs(tracks[0].velocity + 1.25) < 0.01
        assert abs(tracks[1].velocity - 5 / 3) < 0.01
        # the collision shifts each line by (2/|k_s|) ln|(m1 m2 - 1)/(m1 - m2)|
        shift_scale = 2 * np.log(7 / 5)
        k1 = abs(kinematics(-2.0, "timelike").k)
        k2 = abs(kinematics(3.0, "timelike").k)
        assert abs(abs(tracks[0].phase_shift) - shift_scale / k1) < 5e-3
        assert abs(abs(tracks[1].phase_shift) - shift_scale / k2) < 5e-3

    def test_background_has_no_crest(self, bg_timelike):
        grid = cf.Grid.lab(-2, 2, 21, -2, 2, 101)
        f = soliton_field(SolitonConfig(poles=(), constants=()),
                          bg_timelike, grid)
        with pytest.raises(NoCrest):
            cf.crest_track(f)

    def test_requires_lab_grid(self, one_sol_field_129, bg_timelike,
                               one_sol_cfg):
        grid = cf.Grid.lightcone(-1, 1, 21, -1, 1, 21)
        f = soliton_field(one_sol_cfg, bg_timelike, grid)
        with pytest.raises(ValueError):
            cf.crest_track(f)
