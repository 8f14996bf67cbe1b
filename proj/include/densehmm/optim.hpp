#pragma once

#include "densehmm/common.hpp"
#include "densehmm/dense_repr.hpp"

#include <functional>
#include <string>
#include <vector>

namespace densehmm {

/// Flat view of a set of named parameter blocks. Blocks are concatenated
/// row-major in layout order; pack/unpack round-trip bit-exactly.
struct FlatParams {
    struct Block {
        std::string name;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;  // 1 for vectors
    };
    Vector values;
    std::vector<Block> layout;

    Eigen::Index size() const { return values.size(); }
};

FlatParams pack_dense_reps(const DenseReps& reps);
DenseReps unpack_dense_reps(const FlatParams& flat);

/// Generic block helpers used by the factorization study (U then Z).
FlatParams pack_blocks(const std::vector<std::pair<std::string, Matrix>>& blocks);
Matrix block_as_matrix(const FlatParams& flat, const std::string& name);

struct AdamState {
    Vector m;
    Vector v;
    long t = 0;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

AdamState make_adam_state(Eigen::Index num_params, double learning_rate);

/// params - lr * grad (minimization convention).
FlatParams sgd_step(const FlatParams& params, const Vector& grad, double learning_rate);

/// Standard Adam update with bias correction; mutates the state, returns the
/// updated parameters.
FlatParams adam_step(const FlatParams& params, const Vector& grad, AdamState& state);

/// Proposed displacement of one Adam step (update = -lr * mhat/(sqrt(vhat)+eps))
/// without applying it. Lets callers scale the applied move (step halving)
/// while the moment estimates advance normally.
Vector adam_direction(const Vector& grad, AdamState& state);

struct GradCheckReport {
    double max_rel_error = 0.0;
    Eigen::Index worst_index = -1;
    bool passed = false;
};

/// Central finite differences against an analytic gradient. Per-coordinate
/// error is |fd - analytic| / max(1, |analytic|); the report carries the max.
GradCheckReport check_gradient(const std::function<double(const Vector&)>& f,
                               const Vector& analytic_grad, const Vector& x, double h,
                               double tol);

}  // namespace densehmm
