import math

import numpy as np
import pytest

from gpplab import ConfigError, DomainError
from gpplab.harness import (
    ExperimentConfig,
    config_from_mapping,
    load_config,
    normality_diagnostics,
    run_experiment,
)

BASE = dict(
    kind="fixed",
    kernel="laplace",
    beta=2.0,
    model="gpp",
    c=-0.1,
    n_list=(4_000,),
    replications=150,
    seed=5,
    estimators=("psi", "theta"),
    grid_size=256,
)


def small_config(**overrides) -> ExperimentConfig:
    return ExperimentConfig(**{**BASE, **overrides}).validate()


class TestConfig:
    def test_roundtrip_through_mapping(self):
        config = small_config()
        again = config_from_mapping(config.resolved())
        assert again == config

    def test_file_parsing(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "# comment line\n"
            "kind = fixed\n"
            "kernel = laplace\n"
            "beta = 2.0\n"
            "c = -0.1\n"
            "n_list = 1000, 2000\n"
            "replications = 3\n"
            "estimators = psi , theta\n"
        )
        config = load_config(path, {"seed": "9"})
        assert config.n_list == (1000, 2000)
        assert config.seed == 9
        assert config.estimators == ("psi", "theta")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            config_from_mapping({"kind": "fixed", "frobnicate": "1"})

    def test_bad_syntax(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("kind fixed\n")
        with pytest.raises(ConfigError, match="key = value"):
            load_config(path)

    def test_needs_one_parameter(self):
        with pytest.raises(ConfigError, match="exactly one"):
            small_config(beta=None, theta0=None)
        with pytest.raises(ConfigError, match="exactly one"):
            small_config(theta0=0.5)

    def test_rate_window_rejected_with_diagnostic(self):
        # LAN regime: n |c_n|^(1+2 min(delta, gamma)) must tend to zero
        with pytest.raises(ConfigError, match=r"n\|c_n\|\^\(1\+2\*min\(delta,gamma\)\)"):
            ExperimentConfig(
                kind="lan",
                theta0=0.5,
                model="neighborhood",
                ydist="exponential",
                rate_a=0.25,
                n_list=(1000,),
                replications=2,
                xi_list=(1.0,),
            ).validate()

    def test_threshold_validity_rejected(self):
        with pytest.raises(ConfigError, match="validity bound"):
            small_config(c=-0.9)

    def test_lan_needs_xi(self):
        with pytest.raises(ConfigError, match="xi_list"):
            ExperimentConfig(
                kind="lan", theta0=0.5, rate_a=0.5, n_list=(1000,), replications=2
            ).validate()

    def test_alternative_outside_unit_interval(self):
        with pytest.raises(DomainError):
            ExperimentConfig(
                kind="lan",
                theta0=0.9,
                rate_a=0.5,
                n_list=(100,),
                replications=2,
                xi_list=(4.0,),
            ).validate()


class TestDeterminism:
    def test_rows_and_summaries_reproduce(self):
        a = run_experiment(small_config())
        b = run_experiment(small_config())
        assert a.rows == b.rows
        assert [s.to_dict() for s in a.summaries] == [s.to_dict() for s in b.summaries]

    def test_csv_bytes_identical(self, tmp_path):
        paths = []
        for tag in ("one", "two"):
            res = run_experiment(small_config())
            out = tmp_path / f"{tag}.csv"
            res.write_csv(out)
            paths.append(out.read_bytes())
        assert paths[0] == paths[1]

    def test_workers_do_not_change_results(self):
        a = run_experiment(small_config(replications=40))
        b = run_experiment(small_config(replications=40, workers=2))
        assert a.rows == b.rows

    def test_stream_independence(self):
        # errors from disjoint replication streams are uncorrelated
        res = run_experiment(small_config(replications=300))
        psi = np.array([r["psi"] for r in res.rows])
        corr = np.corrcoef(psi[:-1], psi[1:])[0, 1]
        assert abs(corr) <= 3.0 / math.sqrt(len(psi) - 1)


class TestSummaries:
    def test_fixed_cell_targets(self, laplace):
        res = run_experiment(small_config(replications=300))
        cell = res.summary(4_000, "psi")
        _, var = (0.0, None)
        from gpplab.estimators import asymptotic_moments

        bias, var = asymptotic_moments("psi_fixed", laplace, 2.0, c=-0.1)
        assert cell.target_mean == bias
        assert cell.target_variance == pytest.approx(var)
        assert cell.replications == 300
        assert cell.passed, cell.checks

    def test_meta_has_version_and_backend(self):
        res = run_experiment(small_config())
        assert res.meta["version"]
        assert res.meta["backend"] in ("native", "fallback")

    def test_shrinking_records_mu(self):
        config = ExperimentConfig(
            kind="shrinking",
            theta0=0.5,
            model="neighborhood",
            ydist="exponential",
            kappa=0.5,
            rate_a=1.0 / 3.0,
            n_list=(2_000,),
            replications=120,
            seed=8,
            estimators=("psi",),
            grid_size=256,
            mu_n_mc=20_000,
        ).validate()
        res = run_experiment(config)
        assert "mu" in res.meta and res.meta["mu"] < 0.0
        assert res.meta["bias_coefficient_se"] > 0.0


class TestNormalityDiagnostics:
    def test_calibration_self_test(self):
        # draws from the target normal itself: the 1% KS test passes in at
        # least 98 of 100 runs
        passes = 0
        for rep in range(100):
            draws = np.random.default_rng((21, rep)).normal(1.0, 2.0, 10_000)
            diag = normality_diagnostics(draws, 1.0, 4.0)
            passes += diag.checks["ks"]
        assert passes >= 98, passes

    def test_constant_sequence_degenerate(self):
        diag = normality_diagnostics(np.ones(200), 1.0, 1.0)
        assert diag.degenerate

    def test_mean_shift_fails(self):
        draws = np.random.default_rng(3).normal(0.0, 1.0, 10_000) + 5.0
        diag = normality_diagnostics(draws, 0.0, 1.0)
        assert not diag.checks["mean"]

    def test_needs_hundred_values(self):
        with pytest.raises(DomainError):
            normality_diagnostics(np.zeros(99), 0.0, 1.0)

    def test_variance_band(self):
        draws = np.random.default_rng(4).normal(0.0, 2.0, 20_000)
        diag = normality_diagnostics(draws, 0.0, 1.0)
        assert not diag.checks["variance"]


class TestErrorRecording:
    def test_failures_recorded_not_dropped(self, monkeypatch):
        import gpplab.harness as hmod

        calls = {"k": 0}
        original = hmod.exceedance_scan

        def flaky(*args, **kwargs):
            calls["k"] += 1
            if calls["k"] == 3:
                raise RuntimeError("injected fault")
            return original(*args, **kwargs)

        monkeypatch.setattr(hmod, "exceedance_scan", flaky)
        res = run_experiment(small_config(replications=5))
        errors = [r for r in res.rows if "error" in r]
        assert len(errors) == 1 and "injected fault" in errors[0]["error"]
        assert res.summary(4_000, "psi").errors == 1
