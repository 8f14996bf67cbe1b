#pragma once

#include "densehmm/common.hpp"
#include "densehmm/corpus.hpp"
#include "densehmm/rng.hpp"
#include "densehmm/stochastic.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace densehmm {

/// Classical HMM parameter triple.
struct HmmParams {
    StochasticMatrix A;   // n x n transitions
    StochasticMatrix B;   // n x m emissions
    ProbVector pi;        // length n

    int num_states() const { return static_cast<int>(A.rows()); }
    int num_symbols() const { return static_cast<int>(B.cols()); }

    /// Shape consistency plus the component stochasticity invariants.
    void check() const;
};

/// Smoothed posteriors of one sequence.
///   gamma(t, i)  = P(X_t = s_i | o)
///   xi[t](i, j)  = P(X_t = s_i, X_{t+1} = s_j | o), t = 0..T-2
struct PosteriorStats {
    Matrix gamma;
    std::vector<Matrix> xi;
    double log_likelihood = 0.0;
};

/// Draws a hidden path from pi/A and emits through B; returns emissions only.
std::vector<std::int32_t> sample(const HmmParams& params, int T, Rng& rng);

/// Scaling-coefficient forward-backward. Exact posteriors; log-likelihood is
/// the sum of the log per-step scale factors. Throws NumericError when the
/// sequence has zero probability under the model (with the offending
/// position).
PosteriorStats forward_backward(const HmmParams& params, std::span<const std::int32_t> seq);

/// Forward pass only; log P(o | params). Same error behavior.
double sequence_log_likelihood(const HmmParams& params, std::span<const std::int32_t> seq);

/// log P(o) by explicit enumeration over all n^T hidden paths in log space.
/// Test oracle; guarded to n^T <= 1e6.
double brute_force_log_likelihood(const HmmParams& params, std::span<const std::int32_t> seq);

/// (-sum_i log P(o_i)) / (num_sequences * max sequence length in `test`).
double score_nll(const HmmParams& params, const SequenceDataset& test);

/// Like score_nll but floors each per-step likelihood contribution at `floor`
/// instead of rejecting impossible sequences; counts the floored steps.
/// Exactly equal to score_nll on sequences where no flooring occurs.
struct FlooredNll {
    double normalized_nll = 0.0;
    std::size_t floored_steps = 0;
};
FlooredNll score_nll_floored(const HmmParams& params, const SequenceDataset& test,
                             double floor = 1e-300);

}  // namespace densehmm
