import math

import numpy as np
import pytest

import densehmm


def test_row_softmax_uniform():
    out = densehmm.row_softmax(np.zeros((3, 4)))
    assert np.allclose(out, 0.25, atol=1e-15)


def test_materialize_is_stochastic():
    reps = densehmm.init_reps(n=4, m=6, l=3, seed=7)
    model = densehmm.materialize(**reps)
    assert model["A"].shape == (4, 4)
    assert model["B"].shape == (4, 6)
    assert np.allclose(model["A"].sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(model["B"].sum(axis=1), 1.0, atol=1e-12)
    assert math.isclose(model["pi"].sum(), 1.0, abs_tol=1e-12)


def test_sample_score_round_trip():
    model = densehmm.build_synthetic_hmm(n=3, alpha=1.0, seed=11)
    seqs = [
        densehmm.sample(model["A"], model["B"], model["pi"], length=50, seed=s)
        for s in range(4)
    ]
    nll = densehmm.score_nll(model["A"], model["B"], model["pi"], seqs)
    assert np.isfinite(nll) and nll > 0

    fb = densehmm.forward_backward(model["A"], model["B"], model["pi"], seqs[0])
    assert np.allclose(fb["gamma"].sum(axis=1), 1.0, atol=1e-12)
    single = densehmm.sequence_log_likelihood(
        model["A"], model["B"], model["pi"], seqs[0]
    )
    assert math.isclose(fb["log_likelihood"], single, rel_tol=1e-12)


def test_sampling_is_seed_deterministic():
    model = densehmm.build_synthetic_hmm(n=3, alpha=1.0, seed=5)
    a = densehmm.sample(model["A"], model["B"], model["pi"], length=30, seed=1)
    b = densehmm.sample(model["A"], model["B"], model["pi"], length=30, seed=1)
    assert a == b


def test_cooc_consistency():
    model = densehmm.build_synthetic_hmm(n=4, alpha=0.5, seed=3)
    omega = densehmm.analytic_cooc(model["A"], model["B"], model["pi"])
    assert math.isclose(omega.sum(), 1.0, abs_tol=1e-10)
    emp = densehmm.empirical_cooc([[0, 1, 0], [1, 1]], m=2)
    assert np.allclose(emp, [[0, 1 / 3], [1 / 3, 1 / 3]], atol=1e-15)
    assert densehmm.cooc_mad(emp, emp) == 0.0


def test_baum_welch_monotone():
    model = densehmm.build_synthetic_hmm(n=2, alpha=0.5, seed=21)
    seqs = [
        densehmm.sample(model["A"], model["B"], model["pi"], length=60, seed=s)
        for s in range(3)
    ]
    fit = densehmm.baum_welch_fit(seqs, m=2, n=2, max_em_iters=15, seed=4)
    trace = fit["log_likelihood_trace"]
    assert len(trace) >= 2
    assert all(b >= a - 1e-8 for a, b in zip(trace, trace[1:]))
    assert np.allclose(fit["A"].sum(axis=1), 1.0, atol=1e-12)


def test_dense_em_runs():
    model = densehmm.build_synthetic_hmm(n=2, alpha=0.5, seed=31)
    seqs = [
        densehmm.sample(model["A"], model["B"], model["pi"], length=40, seed=s)
        for s in range(2)
    ]
    fit = densehmm.dense_em_fit(seqs, m=2, n=2, l=2, max_em_iters=3, mstep_steps=30, seed=9)
    assert fit["U"].shape == (2, 2)
    rebuilt = densehmm.materialize(
        fit["U"], fit["Z"], fit["W"], fit["V"], fit["z_start"]
    )
    assert np.array_equal(rebuilt["A"], fit["A"])


def test_direct_fit_decreases_loss():
    model = densehmm.build_synthetic_hmm(n=3, alpha=1.0, seed=41)
    target = densehmm.analytic_cooc(model["A"], model["B"], model["pi"])
    fit = densehmm.direct_fit(target, n=3, l=2, steps=200, learning_rate=0.05, seed=2)
    trace = fit["loss_trace"]
    assert trace[-1] <= trace[0]
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


def test_dof_report_pins():
    report = densehmm.dof_report(10, 19, 5)
    assert report["dof_standard"] == 279
    assert report["dof_dense"] == 250
    assert report["n_fair"] == 9


def test_stationary_distribution():
    a = np.array([[0.9, 0.1], [0.5, 0.5]])
    pi = densehmm.stationary_distribution(a)
    assert np.allclose(pi @ a, pi, atol=1e-10)


def test_error_mapping():
    with pytest.raises(densehmm.NumericError):
        densehmm.sequence_log_likelihood(
            np.array([[1.0]]), np.array([[1.0, 0.0]]), np.array([1.0]), [0, 1]
        )
    with pytest.raises(ValueError):
        densehmm.materialize(
            np.zeros((2, 3)),
            np.zeros((2, 3)),
            np.zeros((2, 3)),
            np.zeros((4, 2)),
            np.zeros(3),
        )
