#pragma once

#include "densehmm/common.hpp"
#include "densehmm/stochastic.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace densehmm {

enum class FactorKernel { kSoftmax, kNormAbsLin };

std::string to_string(FactorKernel kernel);
FactorKernel factor_kernel_from_string(const std::string& name);

struct FactorStudyConfig {
    std::vector<std::pair<int, int>> grid;  // (n, l) cells
    int replicas = 10;
    double alpha = 0.1;  // Dirichlet concentration of the ground truths
    int steps = 10000;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    int jobs = 1;

    void check() const;
};

struct FactorFitResult {
    Matrix U;  // n x l
    Matrix Z;  // l x n
    double loss = 0.0;  // best-seen ||kernel(UZ) - A_gt||_F / ||A_gt||_F
};

/// Normalized Frobenius error of kernel(UZ) against the ground truth.
double factor_loss(const Matrix& u, const Matrix& z, const StochasticMatrix& a_gt,
                   FactorKernel kernel);

/// Gaussian-initialized U (n x l) and Z (l x n); Adam descent on the squared
/// normalized Frobenius loss. Returns the best factors seen over all steps.
/// The |.| kernel uses subgradient 0 at 0.
FactorFitResult fit_factorization(const StochasticMatrix& a_gt, int l, FactorKernel kernel,
                                  int steps, double learning_rate, std::uint64_t seed);

struct FactorCellResult {
    int n = 0;
    int l = 0;
    FactorKernel kernel = FactorKernel::kSoftmax;
    std::vector<double> losses;  // one per replica, replica order
    double p25 = 0.0;
    double median = 0.0;
    double p75 = 0.0;
};

struct FactorStudyResult {
    std::vector<FactorCellResult> cells;
};

/// For every grid cell and both kernels: `replicas` fits against fresh
/// Dirichlet(alpha) ground truths with per-replica derived seeds. Cells and
/// replicas are independent; cfg.jobs > 1 runs them on a worker pool without
/// changing any result.
FactorStudyResult run_study(const FactorStudyConfig& cfg);

/// CSV writers: per-replica (n,l,kernel,replica,loss) and aggregated
/// (n,l,kernel,p25,median,p75).
void write_study_csv(const FactorStudyResult& result, std::ostream& out);
void write_study_aggregate_csv(const FactorStudyResult& result, std::ostream& out);

/// Shared percentile helper (linear interpolation between order statistics).
double percentile(std::vector<double> values, double q);

}  // namespace densehmm
