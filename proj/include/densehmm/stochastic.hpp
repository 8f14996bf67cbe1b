#pragma once

#include "densehmm/common.hpp"
#include "densehmm/rng.hpp"

namespace densehmm {

/// Row-stochastic matrix: entries in [0,1], every row sums to 1 within 1e-12.
/// Produced only by the kernels below (or validated on construction), so the
/// invariant can be assumed downstream.
struct StochasticMatrix {
    Matrix p;

    Eigen::Index rows() const { return p.rows(); }
    Eigen::Index cols() const { return p.cols(); }

    /// Validates the invariant and throws NumericError if violated.
    void check(double tol = 1e-12) const;
};

struct ProbVector {
    Vector p;

    Eigen::Index size() const { return p.size(); }
    void check(double tol = 1e-12) const;
};

/// Row-wise softmax with per-row max shift. Rejects non-finite input.
StochasticMatrix row_softmax(const Matrix& logits);

/// Softmax of a single vector of logits.
ProbVector softmax(const Vector& logits);

/// |M_ij| / sum_k |M_ik|. Rejects rows that are identically zero.
StochasticMatrix norm_abs_lin(const Matrix& m);

/// Each row drawn independently from Dirichlet(alpha * 1_c).
StochasticMatrix sample_dirichlet_rows(int rows, int cols, double alpha, Rng& rng);

/// Stationary distribution of a row-stochastic matrix: power iteration on
/// A^T starting from the uniform vector, renormalized every step, until the
/// max-abs update drops below 1e-13 (at most 10,000 iterations). Throws
/// NumericError with the final residual if it does not converge; for
/// reducible or periodic chains the iteration settles on whichever fixed
/// point the uniform start leads to.
ProbVector stationary_distribution(const StochasticMatrix& a);

/// log(sum_i exp(v_i)) with max shift; exact for single-element input.
double log_sum_exp(const Vector& v);

/// Draw an index from a probability row (inverse CDF walk).
int sample_categorical(const Eigen::Ref<const Eigen::RowVectorXd>& probs, Rng& rng);

}  // namespace densehmm
