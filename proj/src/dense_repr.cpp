#include "densehmm/dense_repr.hpp"

#include "densehmm/stochastic.hpp"

#include <cmath>

namespace densehmm {

void DenseReps::check() const {
    const auto l = z_start.size();
    require(U.cols() == l && Z.cols() == l && W.cols() == l && V.cols() == l,
            "DenseReps: inconsistent representation length");
    require(U.rows() == Z.rows() && U.rows() == W.rows(),
            "DenseReps: U, Z, W must have one row per hidden state");
    if (!U.allFinite() || !Z.allFinite() || !W.allFinite() || !V.allFinite() ||
        !z_start.allFinite()) {
        throw NumericError("DenseReps: non-finite entries");
    }
}

DenseReps init_reps(int n, int m, int l, Rng& rng) {
    require(n >= 1 && m >= 1 && l >= 1, "init_reps: n, m, l must be >= 1");
    DenseReps reps;
    auto fill = [&rng](Matrix& mat, int r, int c) {
        mat.resize(r, c);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) mat(i, j) = rng.normal();
        }
    };
    fill(reps.U, n, l);
    fill(reps.Z, n, l);
    fill(reps.W, n, l);
    fill(reps.V, m, l);
    reps.z_start.resize(l);
    for (int j = 0; j < l; ++j) reps.z_start[j] = rng.normal();
    return reps;
}

HmmParams materialize(const DenseReps& reps) {
    reps.check();
    HmmParams params;
    // Row i of the logit matrices collects the scores of all successors of i.
    params.A = row_softmax(reps.Z * reps.U.transpose());
    params.B = row_softmax(reps.W * reps.V.transpose());
    params.pi = softmax(reps.U * reps.z_start);
    return params;
}

DofReport dof_report(int n, int m, int l) {
    require(n >= 1 && m >= 1 && l >= 1, "dof_report: n, m, l must be >= 1");
    DofReport r;
    r.n = n;
    r.m = m;
    r.l = l;
    r.dof_standard = static_cast<long long>(n) * n + static_cast<long long>(n) * (m - 1) - 1;
    r.dof_dense = static_cast<long long>(l) * (3LL * n + m + 1);
    const double b = static_cast<double>(m - 1);
    const double root =
        (-b + std::sqrt(b * b + 4.0 * (static_cast<double>(r.dof_dense) + 1.0))) / 2.0;
    r.n_fair = std::max(1, static_cast<int>(std::llround(root)));
    return r;
}

}  // namespace densehmm
