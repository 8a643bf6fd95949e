import numpy as np
import pytest

from chaoscrack.attacks.differential import (
    build_chosen_pair, recover_permutation_from_diff, recover_substitution_diff,
    run_differential_attack,
)
from chaoscrack.cipher import encrypt
from chaoscrack.eqkey import decrypt_with_equivalent, equivalent_from_master
from chaoscrack.errors import NonConformingOracleError
from chaoscrack.oracle import EncryptionOracle, make_local_oracle
from chaoscrack.pgm import random_image

from conftest import MapOracle, random_keys


class TestChosenPair:
    def test_small(self):
        assert build_chosen_pair(1).second.tolist() == [[255]]
        assert build_chosen_pair(3).second.tolist() == [[255, 255, 255], [0, 255, 255], [0, 0, 255]]

    @pytest.mark.parametrize("L", [1, 2, 7, 400])
    def test_column_counts(self, L):
        pair = build_chosen_pair(L)
        counts = ((pair.first ^ pair.second) == 255).sum(axis=0)
        assert counts.tolist() == list(range(1, L + 1))


class TestRecoverPermutation:
    def test_brute_force_example(self):
        p = np.array([2, 0, 3, 1])
        pattern = build_chosen_pair(4).second
        diff = pattern[np.ix_(p, p)]
        assert ((diff == 255).sum(axis=0)).tolist() == [3, 1, 4, 2]
        assert recover_permutation_from_diff(diff, 4).tolist() == [2, 0, 3, 1]

    def test_identity(self):
        assert recover_permutation_from_diff(build_chosen_pair(9).second, 9).tolist() == list(range(9))

    def test_random_keys_400(self, params):
        for key in random_keys(20, seed=21):
            oracle = make_local_oracle(key, params)
            pair = build_chosen_pair(400)
            diff = oracle.query(pair.first) ^ oracle.query(pair.second)
            truth = equivalent_from_master(key, params, 400, 400)
            assert np.array_equal(recover_permutation_from_diff(diff, 400), truth.base_map)

    def test_rejects_masked_difference(self):
        diff = build_chosen_pair(5).second.copy()
        diff[0, 0] = 17
        with pytest.raises(NonConformingOracleError):
            recover_permutation_from_diff(diff, 5)

    def test_rejects_count_collision(self):
        diff = build_chosen_pair(5).second.copy()
        diff[:, 1] = diff[:, 2]
        with pytest.raises(NonConformingOracleError):
            recover_permutation_from_diff(diff, 5)


class TestRecoverSubstitution:
    def test_zero_plain_is_direct(self, demo_key, params):
        truth = equivalent_from_master(demo_key, params, 512, 512)
        zero = np.zeros((512, 512), dtype=np.uint8)
        cipher = encrypt(zero, demo_key, params)
        p = truth.base_map
        sub, cov = recover_substitution_diff(zero, cipher, p, p)
        assert cov.all()
        np.testing.assert_array_equal(sub, cipher[0, :400])
        np.testing.assert_array_equal(sub, truth.sub_bytes)

    def test_random_plain(self, demo_key, params):
        truth = equivalent_from_master(demo_key, params, 512, 512)
        plain = random_image(2, 512, 512)
        sub, cov = recover_substitution_diff(plain, encrypt(plain, demo_key, params),
                                             truth.map_for(512), truth.map_for(512))
        assert cov.all() and np.array_equal(sub, truth.sub_bytes)

    def test_three_by_400_uses_one_row(self, demo_key, params):
        truth = equivalent_from_master(demo_key, params, 3, 400)
        plain = random_image(4, 3, 400)
        cipher = encrypt(plain, demo_key, params)
        cipher[1:] = 0  # rows below the first are not needed
        sub, cov = recover_substitution_diff(plain, cipher, truth.map_for(3), truth.map_for(400))
        assert cov.all() and np.array_equal(sub, truth.sub_bytes)

    def test_narrow_walks_rows(self, demo_key, params):
        truth = equivalent_from_master(demo_key, params, 30, 30)
        plain = random_image(5, 30, 30)
        p = truth.map_for(30)
        sub, cov = recover_substitution_diff(plain, encrypt(plain, demo_key, params), p, p)
        assert cov.all() and np.array_equal(sub, truth.sub_bytes)

    def test_tiny_image_partial(self, demo_key, params):
        truth = equivalent_from_master(demo_key, params, 5, 5)
        zero = np.zeros((5, 5), dtype=np.uint8)
        p = truth.map_for(5)
        sub, cov = recover_substitution_diff(zero, encrypt(zero, demo_key, params), p, p)
        assert cov.sum() == 25 and cov[:25].all()
        np.testing.assert_array_equal(sub[:25], truth.sub_bytes[:25])


class TestRunAttack:
    def test_demo_key_512(self, demo_key, params):
        oracle = make_local_oracle(demo_key, params)
        ek = run_differential_attack(oracle, 512, 512)
        assert oracle.queries == 2
        assert ek == equivalent_from_master(demo_key, params, 512, 512)
        secret = random_image(99, 512, 512)
        assert (decrypt_with_equivalent(encrypt(secret, demo_key, params), ek) == secret).all()

    @pytest.mark.parametrize("shape", [(64, 32), (32, 64), (32, 32), (5, 5), (3, 700)])
    def test_geometries(self, demo_key, params, shape):
        oracle = make_local_oracle(demo_key, params)
        ek = run_differential_attack(oracle, *shape)
        assert oracle.queries == 2 and ek.base_map.size == max(shape)
        assert ek.agrees_with(equivalent_from_master(demo_key, params, *shape))
        secret = random_image(7, *shape)
        assert (decrypt_with_equivalent(encrypt(secret, demo_key, params), ek) == secret).all()

    def test_tiny_geometry_reports_coverage(self, demo_key, params):
        ek = run_differential_attack(make_local_oracle(demo_key, params), 4, 4)
        assert ek.coverage.sum() == 16 and not ek.complete

    def test_mock_oracle_without_master_key(self):
        rng = np.random.default_rng(8)
        base, stream = rng.permutation(600), rng.integers(0, 256, 400)
        ek = run_differential_attack(MapOracle(base, stream), 600, 450)
        assert np.array_equal(ek.base_map, base) and np.array_equal(ek.sub_bytes, stream)

    def test_nonconforming_oracle(self):
        class Noisy(EncryptionOracle):
            def _answer(self, img, n):
                rng = np.random.default_rng(n)
                return rng.integers(0, 256, img.shape, dtype=np.uint8)

        with pytest.raises(NonConformingOracleError):
            run_differential_attack(Noisy(), 16, 16)

    def test_shift200_oracle(self, demo_key, params):
        from chaoscrack.cipher import CipherConfig
        cfg = CipherConfig(apply_200_shift=True)
        ek = run_differential_attack(make_local_oracle(demo_key, params, cfg), 64, 64)
        assert ek.agrees_with(equivalent_from_master(demo_key, params, 64, 64, cfg))
