#include "densehmm/corpus.hpp"
#include "densehmm/dense_repr.hpp"
#include "densehmm/hmm_core.hpp"
#include "densehmm/metrics.hpp"
#include "densehmm/stochastic.hpp"
#include "densehmm/train_cooc.hpp"
#include "densehmm/train_em.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace densehmm;

namespace {

HmmParams make_params(const Matrix& a, const Matrix& b, const Vector& pi) {
    HmmParams p;
    p.A.p = a;
    p.B.p = b;
    p.pi.p = pi;
    p.check();
    return p;
}

DenseReps make_reps(const Matrix& u, const Matrix& z, const Matrix& w, const Matrix& v,
                    const Vector& z_start) {
    DenseReps reps{u, z, w, v, z_start};
    reps.check();
    return reps;
}

SequenceDataset make_dataset(std::vector<std::vector<std::int32_t>> seqs, int m) {
    require(m >= 1, "m must be >= 1");
    std::vector<std::string> symbols;
    symbols.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) symbols.push_back(std::to_string(i));
    SequenceDataset ds;
    ds.vocab = Vocabulary::from_symbols(std::move(symbols));
    ds.sequences = std::move(seqs);
    return ds;
}

py::dict reps_dict(const DenseReps& reps) {
    py::dict d;
    d["U"] = reps.U;
    d["Z"] = reps.Z;
    d["W"] = reps.W;
    d["V"] = reps.V;
    d["z_start"] = reps.z_start;
    return d;
}

py::dict params_dict(const HmmParams& p) {
    py::dict d;
    d["A"] = p.A.p;
    d["B"] = p.B.p;
    d["pi"] = p.pi.p;
    return d;
}

py::dict trace_dict(const EmTrace& trace) {
    py::dict d;
    std::vector<double> ll;
    ll.reserve(trace.rows.size());
    for (const auto& row : trace.rows) ll.push_back(row.log_likelihood);
    d["log_likelihood_trace"] = ll;
    d["converged"] = trace.converged;
    d["stalled_msteps"] = trace.stalled_msteps;
    return d;
}

}  // namespace

PYBIND11_MODULE(_densehmm, m) {
    m.doc() = "HMMs with dense softmax-factorized parameters: training "
              "(Baum-Welch, dense EM, direct co-occurrence fits), scoring, "
              "sampling and co-occurrence analysis.";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def(
        "row_softmax", [](const Matrix& logits) { return row_softmax(logits).p; },
        py::arg("logits"), "Row-wise softmax with per-row max shift.");

    m.def(
        "stationary_distribution",
        [](const Matrix& a) {
            StochasticMatrix sm{a};
            sm.check();
            return stationary_distribution(sm).p;
        },
        py::arg("A"), "Stationary distribution of a row-stochastic matrix.");

    m.def(
        "materialize",
        [](const Matrix& u, const Matrix& z, const Matrix& w, const Matrix& v,
           const Vector& z_start) {
            return params_dict(materialize(make_reps(u, z, w, v, z_start)));
        },
        py::arg("U"), py::arg("Z"), py::arg("W"), py::arg("V"), py::arg("z_start"),
        "Materialize stochastic parameters {A, B, pi} from dense representations.");

    m.def(
        "init_reps",
        [](int n, int m_, int l, std::uint64_t seed) {
            Rng rng(seed);
            return reps_dict(init_reps(n, m_, l, rng));
        },
        py::arg("n"), py::arg("m"), py::arg("l"), py::arg("seed") = 0,
        "Standard-normal representations {U, Z, W, V, z_start}.");

    m.def(
        "dof_report",
        [](int n, int m_, int l) {
            const DofReport r = dof_report(n, m_, l);
            py::dict d;
            d["n"] = r.n;
            d["m"] = r.m;
            d["l"] = r.l;
            d["dof_standard"] = r.dof_standard;
            d["dof_dense"] = r.dof_dense;
            d["n_fair"] = r.n_fair;
            return d;
        },
        py::arg("n"), py::arg("m"), py::arg("l"),
        "Degrees of freedom of both parameterizations plus the fair state count.");

    m.def(
        "sample",
        [](const Matrix& a, const Matrix& b, const Vector& pi, int length,
           std::uint64_t seed) {
            Rng rng(seed);
            return sample(make_params(a, b, pi), length, rng);
        },
        py::arg("A"), py::arg("B"), py::arg("pi"), py::arg("length"), py::arg("seed") = 0,
        "Draw one emission sequence of the given length.");

    m.def(
        "forward_backward",
        [](const Matrix& a, const Matrix& b, const Vector& pi,
           const std::vector<std::int32_t>& seq) {
            const PosteriorStats stats = forward_backward(make_params(a, b, pi), seq);
            py::dict d;
            d["gamma"] = stats.gamma;
            d["xi"] = stats.xi;
            d["log_likelihood"] = stats.log_likelihood;
            return d;
        },
        py::arg("A"), py::arg("B"), py::arg("pi"), py::arg("sequence"),
        "Smoothed posteriors {gamma, xi} and the sequence log-likelihood.");

    m.def(
        "sequence_log_likelihood",
        [](const Matrix& a, const Matrix& b, const Vector& pi,
           const std::vector<std::int32_t>& seq) {
            return sequence_log_likelihood(make_params(a, b, pi), seq);
        },
        py::arg("A"), py::arg("B"), py::arg("pi"), py::arg("sequence"),
        "log P(sequence) via the scaled forward pass.");

    m.def(
        "score_nll",
        [](const Matrix& a, const Matrix& b, const Vector& pi,
           std::vector<std::vector<std::int32_t>> seqs) {
            const HmmParams p = make_params(a, b, pi);
            return score_nll(p, make_dataset(std::move(seqs), p.num_symbols()));
        },
        py::arg("A"), py::arg("B"), py::arg("pi"), py::arg("sequences"),
        "Total NLL normalized by sequence count times max sequence length.");

    m.def(
        "empirical_cooc",
        [](const std::vector<std::vector<std::int32_t>>& seqs, int m_) {
            return empirical_cooc(seqs, m_).omega;
        },
        py::arg("sequences"), py::arg("m"),
        "Relative frequencies of adjacent symbol pairs (within sequences).");

    m.def(
        "analytic_cooc",
        [](const Matrix& a, const Matrix& b, const Vector& pi) {
            return analytic_cooc(make_params(a, b, pi)).omega;
        },
        py::arg("A"), py::arg("B"), py::arg("pi"),
        "B^T diag(pi) A B for a stationary model.");

    m.def(
        "cooc_mad",
        [](const Matrix& a, const Matrix& b) {
            return cooc_mad(CoocMatrix{a}, CoocMatrix{b});
        },
        py::arg("a"), py::arg("b"),
        "Mean absolute deviation between two co-occurrence matrices.");

    m.def(
        "baum_welch_fit",
        [](std::vector<std::vector<std::int32_t>> seqs, int m_, int n, int max_em_iters,
           double em_tol, std::uint64_t seed) {
            EmConfig cfg;
            cfg.n = n;
            cfg.max_em_iters = max_em_iters;
            cfg.em_tol = em_tol;
            cfg.seed = seed;
            Rng rng(seed);
            const auto result = baum_welch_fit(make_dataset(std::move(seqs), m_), cfg, rng);
            py::dict d = params_dict(result.params);
            d.attr("update")(trace_dict(result.trace));
            return d;
        },
        py::arg("sequences"), py::arg("m"), py::arg("n"), py::arg("max_em_iters") = 100,
        py::arg("em_tol") = 1e-6, py::arg("seed") = 0,
        "Classical Baum-Welch fit; returns {A, B, pi, log_likelihood_trace, ...}.");

    m.def(
        "dense_em_fit",
        [](std::vector<std::vector<std::int32_t>> seqs, int m_, int n, int l,
           int max_em_iters, double em_tol, int mstep_steps, double mstep_lr,
           std::uint64_t seed) {
            EmConfig cfg;
            cfg.n = n;
            cfg.l = l;
            cfg.max_em_iters = max_em_iters;
            cfg.em_tol = em_tol;
            cfg.mstep_steps = mstep_steps;
            cfg.mstep_lr = mstep_lr;
            cfg.seed = seed;
            Rng rng(seed);
            const auto result = dense_em_fit(make_dataset(std::move(seqs), m_), cfg, rng);
            py::dict d = params_dict(result.params);
            d.attr("update")(reps_dict(result.reps));
            d.attr("update")(trace_dict(result.trace));
            return d;
        },
        py::arg("sequences"), py::arg("m"), py::arg("n"), py::arg("l"),
        py::arg("max_em_iters") = 100, py::arg("em_tol") = 1e-6,
        py::arg("mstep_steps") = 100, py::arg("mstep_lr") = 0.01, py::arg("seed") = 0,
        "EM on the dense parameterization (gradient M-step); returns params and reps.");

    m.def(
        "direct_fit",
        [](const Matrix& target, int n, int l, int steps, double learning_rate,
           std::uint64_t seed) {
            CoocMatrix cooc{target};
            cooc.check();
            DirectFitConfig cfg;
            cfg.n = n;
            cfg.l = l;
            cfg.steps = steps;
            cfg.learning_rate = learning_rate;
            cfg.seed = seed;
            const auto result = direct_fit(cooc, cfg);
            py::dict d = params_dict(result.params);
            d.attr("update")(reps_dict(result.reps));
            d["loss_trace"] = result.loss_trace;
            return d;
        },
        py::arg("target"), py::arg("n"), py::arg("l"), py::arg("steps") = 5000,
        py::arg("learning_rate") = 0.01, py::arg("seed") = 0,
        "Fit dense representations to a co-occurrence target; returns params, reps "
        "and the non-increasing loss trace.");

    m.def(
        "build_synthetic_hmm",
        [](int n, double alpha, std::uint64_t seed) {
            Rng rng(seed);
            return params_dict(build_synthetic_hmm(n, alpha, rng));
        },
        py::arg("n"), py::arg("alpha"), py::arg("seed") = 0,
        "Random stationary ground-truth HMM with m = n symbols.");
}
