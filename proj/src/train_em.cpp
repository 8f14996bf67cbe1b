#include "densehmm/train_em.hpp"

#include "densehmm/optim.hpp"
#include "densehmm/stochastic.hpp"

#include <cmath>
#include <limits>

namespace densehmm {

void EmConfig::check() const {
    require(n >= 1, "EmConfig: n must be >= 1");
    require(l >= 1, "EmConfig: l must be >= 1");
    require(max_em_iters >= 1, "EmConfig: max_em_iters must be >= 1");
    require(em_tol > 0.0, "EmConfig: em_tol must be positive");
    require(mstep_steps >= 1, "EmConfig: mstep_steps must be >= 1");
    require(mstep_lr > 0.0, "EmConfig: mstep_lr must be positive");
}

std::pair<AggregateStats, double> accumulate_stats(const HmmParams& params,
                                                   const SequenceDataset& train) {
    require(!train.sequences.empty(), "accumulate_stats: empty training set");
    const int n = params.num_states();
    const int m = params.num_symbols();
    AggregateStats stats;
    stats.xi_sum = Matrix::Zero(n, n);
    stats.gamma_obs_sum = Matrix::Zero(n, m);
    stats.gamma1_sum = Vector::Zero(n);

    double total_ll = 0.0;
    for (std::size_t s = 0; s < train.sequences.size(); ++s) {
        const auto& seq = train.sequences[s];
        PosteriorStats post;
        try {
            post = forward_backward(params, seq);
        } catch (const NumericError& e) {
            throw NumericError("sequence " + std::to_string(s) + ": " + e.what());
        }
        total_ll += post.log_likelihood;
        for (const auto& slice : post.xi) stats.xi_sum += slice;
        for (Eigen::Index t = 0; t < post.gamma.rows(); ++t) {
            stats.gamma_obs_sum.col(seq[t]) += post.gamma.row(t).transpose();
        }
        stats.gamma1_sum += post.gamma.row(0).transpose();
    }
    return {std::move(stats), total_ll};
}

HmmParams m_step_standard(const AggregateStats& stats) {
    const Eigen::Index n = stats.xi_sum.rows();
    const Eigen::Index m = stats.gamma_obs_sum.cols();

    auto normalize_rows = [](const Matrix& counts) {
        Matrix out(counts.rows(), counts.cols());
        for (Eigen::Index i = 0; i < counts.rows(); ++i) {
            const double s = counts.row(i).sum();
            if (s > 0.0) {
                out.row(i) = counts.row(i) / s;
            } else {
                out.row(i).setConstant(1.0 / static_cast<double>(counts.cols()));
            }
        }
        return out;
    };

    HmmParams params;
    params.A = {normalize_rows(stats.xi_sum)};
    params.B = {normalize_rows(stats.gamma_obs_sum)};
    const double g = stats.gamma1_sum.sum();
    params.pi = {g > 0.0 ? Vector(stats.gamma1_sum / g)
                         : Vector(Vector::Constant(n, 1.0 / static_cast<double>(n)))};
    (void)m;
    return params;
}

double dense_lagrangian(const DenseReps& reps, const AggregateStats& stats) {
    const Matrix a_logits = reps.Z * reps.U.transpose();     // n x n
    const Matrix b_logits = reps.W * reps.V.transpose();     // n x m
    const Vector pi_logits = reps.U * reps.z_start;          // n

    double value = (stats.xi_sum.array() * a_logits.array()).sum() +
                   (stats.gamma_obs_sum.array() * b_logits.array()).sum() +
                   stats.gamma1_sum.dot(pi_logits);
    for (Eigen::Index i = 0; i < a_logits.rows(); ++i) {
        value -= stats.xi_sum.row(i).sum() * log_sum_exp(a_logits.row(i).transpose());
        value -= stats.gamma_obs_sum.row(i).sum() * log_sum_exp(b_logits.row(i).transpose());
    }
    value -= stats.gamma1_sum.sum() * log_sum_exp(pi_logits);
    return value;
}

DenseReps dense_lagrangian_grad(const DenseReps& reps, const AggregateStats& stats) {
    const HmmParams params = materialize(reps);

    // d/d(logit) of each block: statistics minus row-mass-weighted softmax.
    const Vector c_mass = stats.xi_sum.rowwise().sum();
    const Vector d_mass = stats.gamma_obs_sum.rowwise().sum();
    const Matrix ga = stats.xi_sum - c_mass.asDiagonal() * params.A.p;
    const Matrix gb = stats.gamma_obs_sum - d_mass.asDiagonal() * params.B.p;
    const Vector gpi = stats.gamma1_sum - stats.gamma1_sum.sum() * params.pi.p;

    DenseReps grad;
    grad.Z = ga * reps.U;                                      // logits A = Z U^T
    grad.U = ga.transpose() * reps.Z + gpi * reps.z_start.transpose();
    grad.W = gb * reps.V;                                      // logits B = W V^T
    grad.V = gb.transpose() * reps.W;
    grad.z_start = reps.U.transpose() * gpi;
    return grad;
}

std::vector<double> dense_m_step(DenseReps& reps, const AggregateStats& stats, int steps,
                                 double lr) {
    FlatParams flat = pack_dense_reps(reps);
    AdamState adam = make_adam_state(flat.size(), lr);
    double current = dense_lagrangian(reps, stats);
    std::vector<double> trace;
    trace.reserve(steps + 1);
    trace.push_back(current);

    for (int step = 0; step < steps; ++step) {
        const DenseReps grad = dense_lagrangian_grad(unpack_dense_reps(flat), stats);
        const Vector grad_flat = pack_dense_reps(grad).values;
        // Ascent: feed the negated gradient to the (minimizing) Adam rule.
        Vector delta = adam_direction(-grad_flat, adam);
        for (int halving = 0; halving <= 20; ++halving) {
            FlatParams candidate = flat;
            candidate.values += delta;
            const double value = dense_lagrangian(unpack_dense_reps(candidate), stats);
            if (value >= current) {
                flat = std::move(candidate);
                current = value;
                break;
            }
            delta *= 0.5;
        }
        trace.push_back(current);
    }
    reps = unpack_dense_reps(flat);
    return trace;
}

namespace {

double relative_improvement(double current, double previous) {
    return (current - previous) / std::max(1.0, std::abs(previous));
}

}  // namespace

DenseEmResult dense_em_fit(const SequenceDataset& train, const EmConfig& cfg, Rng& rng) {
    cfg.check();
    require(!train.sequences.empty(), "dense_em_fit: empty training set");
    const int m = train.vocab.size();

    DenseEmResult result;
    result.reps = init_reps(cfg.n, m, cfg.l, rng);
    result.params = materialize(result.reps);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cfg.max_em_iters; ++iter) {
        auto [stats, ll] = accumulate_stats(result.params, train);

        EmTraceRow row;
        row.iteration = iter;
        row.log_likelihood = ll;
        if (iter > 0 && relative_improvement(ll, prev_ll) < cfg.em_tol) {
            result.trace.rows.push_back(row);
            result.trace.converged = true;
            break;
        }
        prev_ll = ll;

        const std::vector<double> mstep = dense_m_step(result.reps, stats, cfg.mstep_steps,
                                                       cfg.mstep_lr);
        if (!(mstep.back() > mstep.front())) ++result.trace.stalled_msteps;
        row.lagrangian = dense_lagrangian(result.reps, stats);
        result.trace.rows.push_back(row);

        result.params = materialize(result.reps);
    }
    return result;
}

BaumWelchResult baum_welch_fit(const SequenceDataset& train, const EmConfig& cfg, Rng& rng) {
    cfg.check();
    require(!train.sequences.empty(), "baum_welch_fit: empty training set");
    const int m = train.vocab.size();

    BaumWelchResult result;
    result.params.A = sample_dirichlet_rows(cfg.n, cfg.n, 1.0, rng);
    result.params.B = sample_dirichlet_rows(cfg.n, m, 1.0, rng);
    result.params.pi = {sample_dirichlet_rows(1, cfg.n, 1.0, rng).p.row(0).transpose()};

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cfg.max_em_iters; ++iter) {
        auto [stats, ll] = accumulate_stats(result.params, train);
        result.trace.rows.push_back({iter, ll, std::nullopt});
        if (iter > 0 && relative_improvement(ll, prev_ll) < cfg.em_tol) {
            result.trace.converged = true;
            break;
        }
        prev_ll = ll;
        result.params = m_step_standard(stats);
    }
    return result;
}

}  // namespace densehmm
