#include "densehmm/factor_study.hpp"

#include "densehmm/optim.hpp"
#include "densehmm/parallel.hpp"
#include "densehmm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace densehmm {

std::string to_string(FactorKernel kernel) {
    return kernel == FactorKernel::kSoftmax ? "softmax" : "normAbsLin";
}

FactorKernel factor_kernel_from_string(const std::string& name) {
    if (name == "softmax") return FactorKernel::kSoftmax;
    if (name == "normAbsLin") return FactorKernel::kNormAbsLin;
    throw std::invalid_argument("unknown factorization kernel: " + name);
}

void FactorStudyConfig::check() const {
    require(!grid.empty(), "FactorStudyConfig: empty grid");
    for (const auto& [n, l] : grid) {
        require(n >= 1 && l >= 1, "FactorStudyConfig: grid cells must have n, l >= 1");
    }
    require(replicas >= 1, "FactorStudyConfig: replicas must be >= 1");
    require(alpha > 0.0, "FactorStudyConfig: alpha must be positive");
    require(steps >= 1, "FactorStudyConfig: steps must be >= 1");
    require(learning_rate > 0.0, "FactorStudyConfig: learning_rate must be positive");
    require(jobs >= 1, "FactorStudyConfig: jobs must be >= 1");
}

namespace {

Matrix apply_kernel(const Matrix& logits, FactorKernel kernel) {
    if (kernel == FactorKernel::kSoftmax) return row_softmax(logits).p;
    // normAbsLin rows can be identically zero at pathological iterates; treat
    // such a row as uniform rather than failing mid-optimization.
    Matrix out = logits.cwiseAbs();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double s = out.row(i).sum();
        if (s == 0.0) {
            out.row(i).setConstant(1.0 / static_cast<double>(out.cols()));
        } else {
            out.row(i) /= s;
        }
    }
    return out;
}

/// Gradient of the squared normalized loss w.r.t. the logit matrix S = UZ.
Matrix kernel_backward(const Matrix& logits, const Matrix& approx, const Matrix& grad_approx,
                       FactorKernel kernel) {
    Matrix out(logits.rows(), logits.cols());
    if (kernel == FactorKernel::kSoftmax) {
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            const double inner = approx.row(i).dot(grad_approx.row(i));
            out.row(i) = (approx.row(i).array() * (grad_approx.row(i).array() - inner)).matrix();
        }
        return out;
    }
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double r = logits.row(i).cwiseAbs().sum();
        if (r == 0.0) {
            out.row(i).setZero();
            continue;
        }
        const double inner = approx.row(i).dot(grad_approx.row(i));
        for (Eigen::Index j = 0; j < logits.cols(); ++j) {
            const double s = logits(i, j) > 0.0 ? 1.0 : (logits(i, j) < 0.0 ? -1.0 : 0.0);
            out(i, j) = s * (grad_approx(i, j) - inner) / r;
        }
    }
    return out;
}

}  // namespace

double factor_loss(const Matrix& u, const Matrix& z, const StochasticMatrix& a_gt,
                   FactorKernel kernel) {
    const Matrix approx = apply_kernel(u * z, kernel);
    return (approx - a_gt.p).norm() / a_gt.p.norm();
}

FactorFitResult fit_factorization(const StochasticMatrix& a_gt, int l, FactorKernel kernel,
                                  int steps, double learning_rate, std::uint64_t seed) {
    require(l >= 1, "fit_factorization: l must be >= 1");
    require(steps >= 1, "fit_factorization: steps must be >= 1");
    const auto n = a_gt.rows();
    const double gt_norm2 = a_gt.p.squaredNorm();

    Rng rng(seed);
    Matrix u(n, l), z(l, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < l; ++j) u(i, j) = rng.normal();
    }
    for (int i = 0; i < l; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) z(i, j) = rng.normal();
    }

    FlatParams flat = pack_blocks({{"U", u}, {"Z", z}});
    AdamState adam = make_adam_state(flat.size(), learning_rate);

    FactorFitResult best;
    best.U = u;
    best.Z = z;
    best.loss = factor_loss(u, z, a_gt, kernel);

    for (int step = 0; step < steps; ++step) {
        const Matrix logits = u * z;
        const Matrix approx = apply_kernel(logits, kernel);
        // Minimize ||approx - gt||^2 / ||gt||^2; same argmin as the reported loss.
        const Matrix grad_approx = 2.0 * (approx - a_gt.p) / gt_norm2;
        const Matrix grad_logits = kernel_backward(logits, approx, grad_approx, kernel);

        const Matrix grad_u = grad_logits * z.transpose();
        const Matrix grad_z = u.transpose() * grad_logits;
        const Vector grad_flat = pack_blocks({{"U", grad_u}, {"Z", grad_z}}).values;

        flat.values += adam_direction(grad_flat, adam);
        u = block_as_matrix(flat, "U");
        z = block_as_matrix(flat, "Z");

        const double loss = factor_loss(u, z, a_gt, kernel);
        if (loss < best.loss) {
            best.loss = loss;
            best.U = u;
            best.Z = z;
        }
    }
    return best;
}

FactorStudyResult run_study(const FactorStudyConfig& cfg) {
    cfg.check();
    const FactorKernel kernels[] = {FactorKernel::kNormAbsLin, FactorKernel::kSoftmax};

    FactorStudyResult result;
    for (const auto& [n, l] : cfg.grid) {
        for (const auto kernel : kernels) {
            FactorCellResult cell;
            cell.n = n;
            cell.l = l;
            cell.kernel = kernel;
            cell.losses.resize(cfg.replicas);
            result.cells.push_back(std::move(cell));
        }
    }

    // One task per (cell, replica); seeds depend only on the task index.
    const std::size_t per_cell = static_cast<std::size_t>(cfg.replicas);
    parallel_for_index(result.cells.size() * per_cell, cfg.jobs, [&](std::size_t task) {
        auto& cell = result.cells[task / per_cell];
        const int replica = static_cast<int>(task % per_cell);
        const std::uint64_t seed = Rng::derive_seed(cfg.seed, task);
        Rng gt_rng(seed);
        const StochasticMatrix a_gt = sample_dirichlet_rows(cell.n, cell.n, cfg.alpha, gt_rng);
        const auto fit = fit_factorization(a_gt, cell.l, cell.kernel, cfg.steps,
                                           cfg.learning_rate, Rng::derive_seed(seed, 1));
        cell.losses[replica] = fit.loss;
    });

    for (auto& cell : result.cells) {
        cell.p25 = percentile(cell.losses, 0.25);
        cell.median = percentile(cell.losses, 0.50);
        cell.p75 = percentile(cell.losses, 0.75);
    }
    return result;
}

double percentile(std::vector<double> values, double q) {
    require(!values.empty(), "percentile: empty sample");
    require(q >= 0.0 && q <= 1.0, "percentile: q must be in [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

void write_study_csv(const FactorStudyResult& result, std::ostream& out) {
    out.precision(17);
    out << "n,l,kernel,replica,loss\n";
    for (const auto& cell : result.cells) {
        for (std::size_t r = 0; r < cell.losses.size(); ++r) {
            out << cell.n << ',' << cell.l << ',' << to_string(cell.kernel) << ',' << r << ','
                << cell.losses[r] << '\n';
        }
    }
}

void write_study_aggregate_csv(const FactorStudyResult& result, std::ostream& out) {
    out.precision(17);
    out << "n,l,kernel,p25,median,p75\n";
    for (const auto& cell : result.cells) {
        out << cell.n << ',' << cell.l << ',' << to_string(cell.kernel) << ',' << cell.p25 << ','
            << cell.median << ',' << cell.p75 << '\n';
    }
}

}  // namespace densehmm
