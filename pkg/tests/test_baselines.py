import numpy as np
import pytest

from cfloc.baselines import (CentralFingerprintDB, GprLocalizer,
                             KnnPositionRegressor, LinearPositionRegressor,
                             build_central_db, central_test_input,
                             distributed_median_with, fit_centralized_gpr,
                             knn_predict, lr_fit_predict)
from cfloc.fingerprint import FingerprintDB, TestObservation
from cfloc.fusion import fuse_median
from cfloc.gpr import TrainConfig


def _toy_fingerprints(rng, num_aps=3, num_rps=10):
    rps = rng.uniform(0, 200, size=(num_rps, 2))
    dbs = []
    for ap in range(num_aps):
        dbs.append(FingerprintDB(
            ap_index=ap,
            rss_db=rng.uniform(-90, -40, num_rps),
            aoa_deg=rng.uniform(-180, 180, num_rps),
            rp_positions=rps,
        ))
    return dbs, rps


class TestCentralDb:
    def test_hybrid_column_order(self):
        rng = np.random.default_rng(0)
        dbs, rps = _toy_fingerprints(rng, num_aps=2, num_rps=4)
        db = build_central_db(dbs, rps, "hybrid")
        assert db.inputs.shape == (4, 4)
        np.testing.assert_array_equal(db.inputs[:, 0], dbs[0].rss_db)
        np.testing.assert_array_equal(db.inputs[:, 1], dbs[1].rss_db)
        np.testing.assert_array_equal(db.inputs[:, 2], dbs[0].aoa_deg)
        np.testing.assert_array_equal(db.inputs[:, 3], dbs[1].aoa_deg)

    def test_rss_only_width(self):
        rng = np.random.default_rng(1)
        dbs, rps = _toy_fingerprints(rng, num_aps=5, num_rps=9)
        assert build_central_db(dbs, rps, "rss").inputs.shape == (9, 5)

    def test_test_input_matches_training_layout(self):
        obs = [TestObservation(0, -50.0, 10.0), TestObservation(1, -60.0, 20.0)]
        np.testing.assert_array_equal(central_test_input(obs, "hybrid"),
                                      [-50.0, -60.0, 10.0, 20.0])
        np.testing.assert_array_equal(central_test_input(obs, "aoa"), [10.0, 20.0])


class TestCentralizedGpr:
    def test_single_ap_equals_distributed_model(self):
        rng = np.random.default_rng(2)
        dbs, rps = _toy_fingerprints(rng, num_aps=1, num_rps=12)
        cfg = TrainConfig(max_iters=150)
        central = fit_centralized_gpr(build_central_db(dbs, rps, "hybrid"), cfg)
        distributed = GprLocalizer(cfg).fit(dbs[0].hybrid, rps)
        test = np.array([-55.0, 30.0])
        a = central.predict_one(test)
        b = distributed.predict_one(test)
        assert abs(a.mean[0] - b.mean[0]) < 1e-9
        assert abs(a.mean[1] - b.mean[1]) < 1e-9
        assert abs(a.var[0] - b.var[0]) < 1e-9

    def test_full_scale_hybrid_fit_smoke(self):
        # K=225 rows, 2L=50 input columns: must factorize on default jitter
        rng = np.random.default_rng(3)
        dbs, rps = _toy_fingerprints(rng, num_aps=25, num_rps=225)
        central = fit_centralized_gpr(build_central_db(dbs, rps, "hybrid"),
                                      TrainConfig(max_iters=40))
        est = central.predict_one(rng.uniform(-90, 90, 50))
        assert np.isfinite(est.mean).all() and np.isfinite(est.var).all()


class TestKnn:
    def test_exact_training_input_with_k1(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((20, 3))
        coords = rng.uniform(0, 200, size=(20, 2))
        model = KnnPositionRegressor(k=1).fit(x, coords)
        est = model.predict_one(x[7])
        assert est.mean == pytest.approx(tuple(coords[7]), abs=1e-9)

    def test_all_neighbours_uniform_weights_give_centroid(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((15, 2))
        coords = rng.uniform(0, 200, size=(15, 2))
        model = KnnPositionRegressor(k=15, weighting="uniform").fit(x, coords)
        est = model.predict_one(rng.standard_normal(2))
        assert est.mean == pytest.approx(tuple(coords.mean(axis=0)), abs=1e-9)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((50, 4))
        coords = rng.uniform(0, 200, size=(50, 2))
        model = KnnPositionRegressor(k=4).fit(x, coords)
        for _ in range(20):
            test = rng.standard_normal(4)
            est = model.predict_one(test)
            scaled = (x - x.mean(axis=0)) / x.std(axis=0)
            t = (test - x.mean(axis=0)) / x.std(axis=0)
            dists = np.linalg.norm(scaled - t, axis=1)
            nearest = np.argsort(dists)[:4]
            weights = 1.0 / (dists[nearest] + 1e-12)
            weights /= weights.sum()
            expected = weights @ coords[nearest]
            assert est.mean == pytest.approx(tuple(expected), abs=1e-9)

    def test_prediction_in_neighbour_bounding_box(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((30, 2))
        coords = rng.uniform(0, 200, size=(30, 2))
        model = KnnPositionRegressor(k=4).fit(x, coords)
        for _ in range(20):
            test = rng.standard_normal(2)
            est = model.predict_one(test)
            assert coords[:, 0].min() - 1e-9 <= est.mean[0] <= coords[:, 0].max() + 1e-9
            assert coords[:, 1].min() - 1e-9 <= est.mean[1] <= coords[:, 1].max() + 1e-9

    def test_functional_wrapper(self):
        rng = np.random.default_rng(8)
        db = CentralFingerprintDB(inputs=rng.standard_normal((10, 3)),
                                  targets=rng.uniform(0, 10, (10, 2)), variant="hybrid")
        est = knn_predict(db, rng.standard_normal(3), k=4)
        assert est.var[0] >= 0


class TestLinearRegression:
    def test_exact_affine_recovery(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((30, 4))
        coef = rng.standard_normal((4, 2))
        coords = x @ coef + np.array([3.0, -7.0])
        model = LinearPositionRegressor().fit(x, coords)
        for _ in range(10):
            test = rng.standard_normal(4)
            est = model.predict_one(test)
            expected = test @ coef + np.array([3.0, -7.0])
            assert est.mean == pytest.approx(tuple(expected), abs=1e-8)
        assert not model.ridge_used_

    def test_duplicate_column_triggers_ridge(self):
        rng = np.random.default_rng(10)
        base = rng.standard_normal((20, 2))
        x = np.column_stack([base, base[:, 0]])  # exact duplicate column
        coords = rng.uniform(0, 10, (20, 2))
        model = LinearPositionRegressor().fit(x, coords)
        assert model.ridge_used_
        est = model.predict_one(np.array([0.5, -0.5, 0.5]))
        assert np.isfinite(est.mean).all()

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((30, 4))
        coords = x @ rng.standard_normal((4, 2)) + rng.standard_normal((30, 2))
        model = LinearPositionRegressor().fit(x, coords)
        scaled = (x - x.mean(axis=0)) / x.std(axis=0)
        design = np.column_stack([np.ones(30), scaled])
        oracle_coeffs = np.linalg.solve(design.T @ design, design.T @ coords)
        for _ in range(10):
            test = rng.standard_normal(4)
            est = model.predict_one(test)
            t = (test - x.mean(axis=0)) / x.std(axis=0)
            expected = np.concatenate([[1.0], t]) @ oracle_coeffs
            assert est.mean == pytest.approx(tuple(expected), abs=1e-7)

    def test_too_few_rows_rejected(self):
        with pytest.raises(ValueError):
            LinearPositionRegressor().fit(np.eye(3), np.ones((3, 2)))

    def test_functional_wrapper(self):
        rng = np.random.default_rng(12)
        db = CentralFingerprintDB(inputs=rng.standard_normal((20, 3)),
                                  targets=rng.uniform(0, 10, (20, 2)), variant="hybrid")
        est = lr_fit_predict(db, rng.standard_normal(3))
        assert np.isfinite(est.mean).all()


class TestDistributedMedianComposition:
    def test_single_ap_passthrough(self):
        rng = np.random.default_rng(13)
        dbs, rps = _toy_fingerprints(rng, num_aps=1, num_rps=10)
        model = KnnPositionRegressor(k=4).fit(dbs[0].hybrid, rps)
        obs = [TestObservation(0, -55.0, 12.0)]
        fused = distributed_median_with([model], obs)
        direct = model.predict_one(np.array([-55.0, 12.0]))
        assert fused.estimate.mean == direct.mean
        assert fused.estimate.var == direct.var

    def test_matches_hand_composed_pipeline(self):
        rng = np.random.default_rng(14)
        dbs, rps = _toy_fingerprints(rng, num_aps=3, num_rps=10)
        models = [KnnPositionRegressor(k=4).fit(db.hybrid, rps) for db in dbs]
        obs = [TestObservation(ap, -50.0 - ap, 10.0 * ap) for ap in range(3)]
        fused = distributed_median_with(models, obs)
        manual = fuse_median([
            models[ap].predict_one(np.array([obs[ap].rss_db, obs[ap].aoa_deg]))
            for ap in range(3)
        ])
        assert fused.estimate.mean == manual.estimate.mean
        assert fused.estimate.var == manual.estimate.var
