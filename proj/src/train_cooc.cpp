#include "densehmm/train_cooc.hpp"

#include "densehmm/optim.hpp"
#include "densehmm/stochastic.hpp"

#include <cmath>
#include <string>

namespace densehmm {

void CoocMatrix::check(double tol) const {
    require(omega.rows() == omega.cols(), "CoocMatrix: must be square");
    if ((omega.array() < 0.0).any() || (omega.array() > 1.0).any()) {
        throw NumericError("CoocMatrix: entry outside [0,1]");
    }
    const double total = omega.sum();
    if (std::abs(total - 1.0) > tol) {
        throw NumericError("CoocMatrix: entries sum to " + std::to_string(total));
    }
}

CoocMatrix empirical_cooc(const std::vector<std::vector<std::int32_t>>& seqs, int m) {
    require(m >= 1, "empirical_cooc: vocabulary must be nonempty");
    Matrix counts = Matrix::Zero(m, m);
    std::size_t pairs = 0;
    for (const auto& seq : seqs) {
        for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
            counts(seq[t], seq[t + 1]) += 1.0;
            ++pairs;
        }
    }
    if (pairs == 0) throw DataError("empirical_cooc: no adjacent symbol pairs in dataset");
    return {counts / static_cast<double>(pairs)};
}

CoocMatrix empirical_cooc(const SequenceDataset& ds) {
    return empirical_cooc(ds.sequences, ds.vocab.size());
}

namespace {

Matrix cooc_from(const Matrix& a, const Matrix& b, const Vector& pi) {
    // Omega = B^T Theta B with Theta = diag(pi) A.
    return b.transpose() * (pi.asDiagonal() * a) * b;
}

}  // namespace

CoocMatrix analytic_cooc(const HmmParams& params) {
    params.check();
    const double residual =
        ((params.pi.p.transpose() * params.A.p).transpose() - params.pi.p).cwiseAbs().maxCoeff();
    if (residual > 1e-8) {
        throw NumericError("analytic_cooc: pi is not stationary (residual " +
                           std::to_string(residual) + ")");
    }
    return {cooc_from(params.A.p, params.B.p, params.pi.p)};
}

DenseCooc dense_cooc(const DenseReps& reps) {
    const HmmParams params = materialize(reps);
    DenseCooc out;
    out.pi_used = stationary_distribution(params.A);
    out.cooc = {cooc_from(params.A.p, params.B.p, out.pi_used.p)};
    return out;
}

double cooc_loss_frozen_pi(const DenseReps& reps, const CoocMatrix& target, const Vector& pi) {
    const HmmParams params = materialize(reps);
    require(target.omega.rows() == params.B.cols(), "cooc_loss: target size mismatch");
    return (cooc_from(params.A.p, params.B.p, pi) - target.omega).squaredNorm();
}

double cooc_loss(const DenseReps& reps, const CoocMatrix& target) {
    const DenseCooc dc = dense_cooc(reps);
    require(target.omega.rows() == dc.cooc.omega.rows(), "cooc_loss: target size mismatch");
    return (dc.cooc.omega - target.omega).squaredNorm();
}

DenseReps cooc_loss_grad(const DenseReps& reps, const CoocMatrix& target) {
    const HmmParams params = materialize(reps);
    require(target.omega.rows() == params.B.cols(), "cooc_loss_grad: target size mismatch");
    const Matrix& a = params.A.p;
    const Matrix& b = params.B.p;
    const Vector pi = stationary_distribution(params.A).p;

    const Matrix theta = pi.asDiagonal() * a;
    const Matrix residual = 2.0 * (cooc_from(a, b, pi) - target.omega);  // dL/dOmega

    // Omega = B^T Theta B, pi held constant.
    const Matrix grad_b = theta * b * residual.transpose() + theta.transpose() * b * residual;
    const Matrix grad_a = pi.asDiagonal() * (b * residual * b.transpose());

    // Back through the row softmaxes into the logit matrices.
    auto softmax_backward = [](const Matrix& probs, const Matrix& grad_probs) {
        Matrix out(probs.rows(), probs.cols());
        for (Eigen::Index i = 0; i < probs.rows(); ++i) {
            const double inner = probs.row(i).dot(grad_probs.row(i));
            out.row(i) = (probs.row(i).array() * (grad_probs.row(i).array() - inner)).matrix();
        }
        return out;
    };
    const Matrix ga = softmax_backward(a, grad_a);  // d/d logits of A (= Z U^T)
    const Matrix gb = softmax_backward(b, grad_b);  // d/d logits of B (= W V^T)

    DenseReps grad;
    grad.Z = ga * reps.U;
    grad.U = ga.transpose() * reps.Z;
    grad.W = gb * reps.V;
    grad.V = gb.transpose() * reps.W;
    grad.z_start = Vector::Zero(reps.z_start.size());
    return grad;
}

void DirectFitConfig::check() const {
    require(n >= 1, "DirectFitConfig: n must be >= 1");
    require(l >= 1, "DirectFitConfig: l must be >= 1");
    require(steps >= 1, "DirectFitConfig: steps must be >= 1");
    require(learning_rate > 0.0, "DirectFitConfig: learning_rate must be positive");
}

DirectFitResult direct_fit(const CoocMatrix& target, const DirectFitConfig& cfg) {
    cfg.check();
    target.check();
    const int m = static_cast<int>(target.omega.rows());

    Rng rng(cfg.seed);
    DirectFitResult result;
    result.reps = init_reps(cfg.n, m, cfg.l, rng);

    FlatParams flat = pack_dense_reps(result.reps);
    AdamState adam = make_adam_state(flat.size(), cfg.learning_rate);
    double current = cooc_loss(result.reps, target);
    result.loss_trace.reserve(cfg.steps + 1);
    result.loss_trace.push_back(current);

    for (int step = 0; step < cfg.steps; ++step) {
        const DenseReps reps_now = unpack_dense_reps(flat);
        const Vector grad_flat = pack_dense_reps(cooc_loss_grad(reps_now, target)).values;
        Vector delta = adam_direction(grad_flat, adam);
        for (int halving = 0; halving <= 20; ++halving) {
            FlatParams candidate = flat;
            candidate.values += delta;
            const double value = cooc_loss(unpack_dense_reps(candidate), target);
            if (value <= current) {
                flat = std::move(candidate);
                current = value;
                break;
            }
            delta *= 0.5;
        }
        result.loss_trace.push_back(current);
    }

    result.reps = unpack_dense_reps(flat);
    result.params = materialize(result.reps);
    result.params.pi = stationary_distribution(result.params.A);
    return result;
}

}  // namespace densehmm
