#pragma once

#include "densehmm/common.hpp"
#include "densehmm/hmm_core.hpp"
#include "densehmm/rng.hpp"

namespace densehmm {

/// Learnable embeddings of a DenseHMM. Rows are entity vectors of length l:
/// U row i is the incoming vector of hidden state i, Z row i its outgoing
/// vector along the hidden chain, W row i its outgoing vector toward the
/// observations, V row j the vector of observation j. z_start plays the role
/// of a virtual predecessor state for the initial distribution.
struct DenseReps {
    Matrix U;        // n x l
    Matrix Z;        // n x l
    Matrix W;        // n x l
    Matrix V;        // m x l
    Vector z_start;  // l

    int num_states() const { return static_cast<int>(U.rows()); }
    int num_symbols() const { return static_cast<int>(V.rows()); }
    int rep_length() const { return static_cast<int>(z_start.size()); }

    void check() const;
};

struct DofReport {
    int n = 0;
    int m = 0;
    int l = 0;
    long long dof_standard = 0;  // n^2 + n(m-1) - 1
    long long dof_dense = 0;     // l(3n + m + 1)
    int n_fair = 1;              // state count matching dof_dense, min 1
};

/// All entries i.i.d. standard normal.
DenseReps init_reps(int n, int m, int l, Rng& rng);

/// Materializes the stochastic parameters:
///   A_ij  = softmax_j(u_j . z_i)
///   B_ij  = softmax_j(v_j . w_i)
///   pi_i  = softmax_i(u_i . z_start)
HmmParams materialize(const DenseReps& reps);

/// Parameter-count comparison between a standard HMM and a DenseHMM, plus the
/// state count n_fair whose standard HMM has about dof_dense parameters
/// (positive root of n_fair^2 + n_fair(m-1) - 1 = dof_dense, rounded).
DofReport dof_report(int n, int m, int l);

}  // namespace densehmm
