#pragma once

#include "densehmm/common.hpp"
#include "densehmm/corpus.hpp"
#include "densehmm/dense_repr.hpp"
#include "densehmm/hmm_core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace densehmm {

struct EmConfig {
    int n = 2;                 // hidden states
    int l = 1;                 // representation length (dense trainer only)
    int max_em_iters = 100;
    double em_tol = 1e-6;      // relative log-likelihood improvement threshold
    int mstep_steps = 100;     // gradient steps per M-step (dense trainer only)
    double mstep_lr = 0.01;
    std::uint64_t seed = 0;

    void check() const;
};

/// Sufficient statistics of one E-step, summed over all training sequences.
/// These are exactly the coefficients multiplying log a_ij, log b_ij and
/// log pi_i in the M-step objective.
struct AggregateStats {
    Matrix xi_sum;         // n x n: sum_t gamma_t(s_i, s_j)
    Matrix gamma_obs_sum;  // n x m: sum_{t: o_t = j} gamma_t(s_i)
    Vector gamma1_sum;     // n: sum over sequences of gamma_1(s_i)
};

/// Runs forward-backward on every sequence and sums the posteriors.
/// Returns the stats and the total log-likelihood.
std::pair<AggregateStats, double> accumulate_stats(const HmmParams& params,
                                                   const SequenceDataset& train);

/// Closed-form maximizer: row-normalized statistics. Rows with zero mass
/// (states never visited) fall back to a uniform row.
HmmParams m_step_standard(const AggregateStats& stats);

/// The unconstrained M-step objective of the dense parameterization,
/// evaluated from the aggregated statistics:
///   sum_ij c_ij (u_j.z_i)      - sum_i (sum_j c_ij) lse_k(u_k.z_i)
/// + sum_ij d_ij (v_j.w_i)      - sum_i (sum_j d_ij) lse_j(v_j.w_i)
/// + sum_i  g_i  (u_i.z_start)  - (sum_i g_i)        lse_j(u_j.z_start)
double dense_lagrangian(const DenseReps& reps, const AggregateStats& stats);

/// Analytic gradient of dense_lagrangian with respect to all five blocks.
DenseReps dense_lagrangian_grad(const DenseReps& reps, const AggregateStats& stats);

/// One guarded M-step: `steps` Adam ascent passes on dense_lagrangian, each
/// applied displacement halved until the objective does not decrease (at most
/// 20 times, then the step is skipped). Updates reps in place and returns the
/// objective trace (length steps + 1, non-decreasing).
std::vector<double> dense_m_step(DenseReps& reps, const AggregateStats& stats, int steps,
                                 double lr);

struct EmTraceRow {
    int iteration = 0;
    double log_likelihood = 0.0;
    std::optional<double> lagrangian;  // dense trainer only
};

struct EmTrace {
    std::vector<EmTraceRow> rows;
    int stalled_msteps = 0;  // M-steps that could not improve the objective
    bool converged = false;
};

struct DenseEmResult {
    DenseReps reps;
    HmmParams params;
    EmTrace trace;
};

struct BaumWelchResult {
    HmmParams params;
    EmTrace trace;
};

/// DenseHMM EM: Gaussian-initialized reps; the E-step is the standard
/// forward-backward, the M-step runs cfg.mstep_steps Adam ascent steps on
/// dense_lagrangian with a step-halving guard (each accepted move must not
/// decrease the objective; after 20 halvings the step is skipped).
DenseEmResult dense_em_fit(const SequenceDataset& train, const EmConfig& cfg, Rng& rng);

/// Classical Baum-Welch: Dirichlet(1) random initialization, closed-form
/// M-step; per-iteration log-likelihood is non-decreasing.
BaumWelchResult baum_welch_fit(const SequenceDataset& train, const EmConfig& cfg, Rng& rng);

}  // namespace densehmm
