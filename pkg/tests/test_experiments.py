import math

import numpy as np
import pytest

from falqon.experiments import (
    ExperimentError,
    QaoaParameters,
    aggregate_csv,
    aggregate_traces,
    cost_report,
    cubic_corpus,
    evaluate_qaoa,
    find_critical_dt,
    first_crossing,
    growth_exponent,
    layers_to_threshold,
    monotone_at,
    prepare,
)
from falqon.feedback import RunConfig, run_falqon, run_with_reference
from falqon.graphs import generate_regular
from falqon.simulator import StateVector, expect_hp, init_mixer_ground
from oracles import qaoa_dense, random_state


class TestCriticalDt:
    def test_empty_graph_unbounded(self, empty3):
        rep = find_critical_dt([empty3], ell=20)
        assert rep.unbounded and rep.dt_c == rep.hi

    def test_path3_monotone_demo(self, path3):
        assert monotone_at([prepare(path3)], 0.2, 10)

    def test_grid_consistency(self):
        insts = [prepare(g) for g in cubic_corpus(6)]
        rep = find_critical_dt(insts, ell=100, lo=0.01, hi=0.6, resolution=0.01)
        assert not rep.unbounded and not rep.failed_at_lo
        assert monotone_at(insts, rep.dt_c, 100)
        assert not monotone_at(insts, rep.dt_c + rep.resolution, 100)
        k = (rep.dt_c - rep.lo) / rep.resolution
        assert abs(k - round(k)) < 1e-9
        assert rep.n == 6

    def test_failed_at_lo(self):
        rep = find_critical_dt(cubic_corpus(6), ell=100, lo=1.0, hi=1.2, resolution=0.1)
        assert rep.failed_at_lo and rep.dt_c is None

    def test_bad_bounds(self, path3):
        with pytest.raises(ExperimentError):
            find_critical_dt([path3], ell=5, lo=0.3, hi=0.1)


class TestThresholds:
    def test_path3_phi_at_start(self, path3):
        rep = layers_to_threshold([path3], dt=0.2, ell_max=30)
        # phi starts at exactly 0.25 = 2 / 8 ground states
        assert rep.layers_to_phi == [0]
        assert rep.layers_to_rA[0] > 0 and not rep.censored_rA[0]

    def test_empty_rejected(self, empty3, path3):
        rep = layers_to_threshold([empty3, path3], dt=0.2, ell_max=10)
        assert rep.warnings == 1 and "empty3" in rep.rejected
        assert rep.names == ["path3"]

    def test_censoring(self):
        (g,) = generate_regular(10, 3, seed=0, count=1)
        rep = layers_to_threshold([g], dt=0.01, ell_max=3)
        assert rep.layers_to_rA == [4] and rep.censored_rA == [True]

    def test_first_crossing(self):
        assert first_crossing(np.array([0.1, 0.3, 0.2, 0.5]), 0.25) == 1
        assert first_crossing(np.array([0.1]), 0.25) is None

    def test_to_dict_summary(self, path3):
        d = layers_to_threshold([path3], dt=0.2, ell_max=30).to_dict()
        assert d["mean_phi"] == 0.0 and d["warnings"] == 0

    def test_growth_exponent(self):
        ns = [8, 10, 12, 14]
        assert growth_exponent(ns, [3 * n**1.5 for n in ns]) == pytest.approx(1.5)


class TestAggregate:
    def test_padding(self, path3):
        inst = prepare(path3)
        short = run_falqon(inst.hp, inst.comm, inst.ground, RunConfig(dt=0.2, max_layers=3))
        long = run_falqon(inst.hp, inst.comm, inst.ground, RunConfig(dt=0.2, max_layers=6))
        agg = aggregate_traces([short, long])
        assert len(agg["layer"]) == 7
        assert agg["mean_beta"][5] == pytest.approx((short.beta[-1] + long.beta[5]) / 2)
        text = aggregate_csv({3: agg})
        assert text.startswith("n,layer,mean_beta,std_beta,mean_rA,mean_phi\n")
        assert text.count("\n") == 8

    def test_empty(self):
        with pytest.raises(ExperimentError):
            aggregate_traces([])


class TestQaoa:
    def test_falqon_circuit_replay(self, path3):
        inst = prepare(path3)
        run = run_falqon(inst.hp, inst.comm, inst.ground, RunConfig(dt=0.2, max_layers=10))
        params = QaoaParameters.from_falqon(run)
        assert params.depth == 10
        assert evaluate_qaoa(inst.hp, params) == pytest.approx(run.final_energy, abs=1e-12)

    def test_reference_circuit_replay(self):
        (g,) = generate_regular(8, 4, seed=7, count=1, weighted=True)
        inst = prepare(g)
        run = run_with_reference(inst.hp, inst.comm, inst.ground, RunConfig(dt=0.08, max_layers=40))
        assert evaluate_qaoa(inst.hp, QaoaParameters.from_falqon(run)) == pytest.approx(run.final_energy, abs=1e-12)

    def test_depth_zero(self, path3):
        inst = prepare(path3)
        psi = StateVector(3, random_state(np.random.default_rng(0), 3))
        assert evaluate_qaoa(inst.hp, QaoaParameters((), ()), psi) == pytest.approx(expect_hp(psi, inst.hp))
        assert evaluate_qaoa(inst.hp, QaoaParameters((), ())) == pytest.approx(-1.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        (g,) = generate_regular(6, 3, seed=seed, count=1, weighted=True)
        inst = prepare(g)
        gammas, betas = rng.uniform(-1, 1, 5), rng.uniform(-1, 1, 5)
        ref = qaoa_dense(6, g.edges, gammas, betas)
        assert evaluate_qaoa(inst.hp, QaoaParameters(tuple(gammas), tuple(betas))) == pytest.approx(ref, abs=1e-10)

    def test_length_mismatch(self):
        with pytest.raises(ExperimentError):
            QaoaParameters((0.1,), ())


class TestCost:
    def test_demo_run(self, path3):
        inst = prepare(path3)
        run = run_falqon(inst.hp, inst.comm, inst.ground, RunConfig(dt=0.2, max_layers=10, shots=1024))
        rep = cost_report(run, path3)
        assert rep["N_s"] == 40960 and rep["identity_holds"]
        assert rep["strings_per_layer"] == 4

    @pytest.mark.parametrize("n", [8, 12])
    def test_cubic_identity(self, n):
        (g,) = generate_regular(n, 3, seed=1, count=1)
        inst = prepare(g)
        cfg = RunConfig(dt=0.03, max_layers=7, estimator="shots", shots=256, seed=2)
        rep = cost_report(run_falqon(inst.hp, inst.comm, inst.ground, cfg), g)
        assert rep["strings_per_layer"] == 3 * n
        assert rep["N_s"] == 256 * 3 * n * 7
        assert rep["strings_per_layer"] <= rep["string_bound_n(n-1)"]

    def test_energy_samples_counted(self, path3):
        inst = prepare(path3)
        run = run_falqon(inst.hp, inst.comm, inst.ground, RunConfig(dt=0.2, max_layers=10, measure_energy=True))
        rep = cost_report(run, path3)
        assert rep["N_s"] == 40960 + 10240 and rep["identity_holds"]


def test_corpus_sizes():
    assert len(cubic_corpus(8)) == 5
    assert len(cubic_corpus(12, seed=12, count=6)) == 6
