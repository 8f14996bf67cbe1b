#pragma once

#include "densehmm/common.hpp"
#include "densehmm/corpus.hpp"
#include "densehmm/dense_repr.hpp"
#include "densehmm/hmm_core.hpp"

#include <cstdint>
#include <vector>

namespace densehmm {

/// Joint distribution over consecutive observation pairs; entries sum to 1.
struct CoocMatrix {
    Matrix omega;  // m x m

    Eigen::Index size() const { return omega.rows(); }
    void check(double tol = 1e-10) const;
};

/// Relative frequencies of adjacent symbol pairs, counted within sequences
/// (never across sequence boundaries).
CoocMatrix empirical_cooc(const SequenceDataset& ds);
CoocMatrix empirical_cooc(const std::vector<std::vector<std::int32_t>>& seqs, int m);

/// Omega_ij = sum_kl pi_k B_ki A_kl B_lj for a stationary model. Rejects
/// parameters whose pi is not the stationary distribution of A (1e-8).
CoocMatrix analytic_cooc(const HmmParams& params);

/// Co-occurrences of the dense model: A, B materialized from the reps, pi
/// replaced by the stationary distribution of A (the softmax start
/// distribution plays no role here).
struct DenseCooc {
    CoocMatrix cooc;
    ProbVector pi_used;
};
DenseCooc dense_cooc(const DenseReps& reps);

/// Squared Frobenius distance between the target and dense_cooc(reps).
double cooc_loss(const DenseReps& reps, const CoocMatrix& target);

/// cooc_loss with the stationary pi supplied by the caller and treated as a
/// constant. This is the per-step objective the gradient below differentiates.
double cooc_loss_frozen_pi(const DenseReps& reps, const CoocMatrix& target, const Vector& pi);

/// Analytic gradient of the frozen-pi loss at the current stationary pi
/// (stop-gradient: pi is recomputed from A but not differentiated through).
/// z_start receives a zero gradient.
DenseReps cooc_loss_grad(const DenseReps& reps, const CoocMatrix& target);

struct DirectFitConfig {
    int n = 2;
    int l = 1;
    int steps = 5000;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;

    void check() const;
};

struct DirectFitResult {
    DenseReps reps;
    HmmParams params;              // materialized A, B with the stationary pi
    std::vector<double> loss_trace;  // loss_trace[0] is the initial loss
};

/// Gaussian init, then `steps` guarded Adam descent steps on cooc_loss; the
/// stationary pi is recomputed after every accepted move. The loss trace is
/// non-increasing.
DirectFitResult direct_fit(const CoocMatrix& target, const DirectFitConfig& cfg);

}  // namespace densehmm
