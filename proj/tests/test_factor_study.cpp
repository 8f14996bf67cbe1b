#include "densehmm/factor_study.hpp"

#include "densehmm/common.hpp"
#include "densehmm/rng.hpp"
#include "densehmm/stochastic.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace densehmm;

namespace {

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text) {
        if (c == '\n') ++lines;
    }
    return lines;
}

}  // namespace

TEST_CASE("kernel names round-trip") {
    CHECK(to_string(FactorKernel::kSoftmax) == "softmax");
    CHECK(to_string(FactorKernel::kNormAbsLin) == "normAbsLin");
    CHECK(factor_kernel_from_string("softmax") == FactorKernel::kSoftmax);
    CHECK(factor_kernel_from_string("normAbsLin") == FactorKernel::kNormAbsLin);
    CHECK_THROWS_AS(factor_kernel_from_string("relu"), std::invalid_argument);
}

TEST_CASE("factor_loss closed forms") {
    // Zero factors put the softmax kernel exactly at the uniform matrix.
    const Matrix u0 = Matrix::Zero(2, 1);
    const Matrix z0 = Matrix::Zero(1, 2);
    StochasticMatrix gt;
    gt.p.resize(2, 2);
    gt.p << 1.0, 0.0, 0.0, 1.0;
    const double expected = (Matrix::Constant(2, 2, 0.5) - gt.p).norm() / gt.p.norm();
    CHECK(factor_loss(u0, z0, gt, FactorKernel::kSoftmax) ==
          doctest::Approx(expected).epsilon(1e-14));

    // normAbsLin reproduces a rank-1 target exactly, including negative logits.
    Matrix u(2, 1);
    u << 1.0, 2.0;
    Matrix z(1, 2);
    z << -1.0, 3.0;
    StochasticMatrix rank1;
    rank1.p.resize(2, 2);
    rank1.p << 0.25, 0.75, 0.25, 0.75;
    CHECK(factor_loss(u, z, rank1, FactorKernel::kNormAbsLin) < 1e-15);
    CHECK(factor_loss(u, z, gt, FactorKernel::kNormAbsLin) ==
          doctest::Approx((rank1.p - gt.p).norm() / gt.p.norm()).epsilon(1e-12));
}

TEST_CASE("fit_factorization reports the loss of the returned factors and never regresses") {
    Rng rng(301);
    const StochasticMatrix gt = sample_dirichlet_rows(4, 4, 0.5, rng);
    const auto fit = fit_factorization(gt, 2, FactorKernel::kSoftmax, 50, 0.05, 9);
    CHECK(fit.loss == factor_loss(fit.U, fit.Z, gt, FactorKernel::kSoftmax));

    // Reproduce the Gaussian init from the same seed: best-seen includes it.
    Rng init(9);
    Matrix u(4, 2), z(2, 4);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 2; ++j) u(i, j) = init.normal();
    }
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 4; ++j) z(i, j) = init.normal();
    }
    CHECK(fit.loss <= factor_loss(u, z, gt, FactorKernel::kSoftmax));
}

TEST_CASE("softmax factorization drives a uniform target to near zero at l = 1") {
    StochasticMatrix gt;
    gt.p = Matrix::Constant(3, 3, 1.0 / 3.0);
    const auto fit = fit_factorization(gt, 1, FactorKernel::kSoftmax, 2000, 0.05, 4);
    CHECK(fit.loss < 1e-6);
}

TEST_CASE("normAbsLin factorization recovers a full-rank target at l = n") {
    Rng rng(307);
    const StochasticMatrix gt = sample_dirichlet_rows(3, 3, 1.0, rng);
    const auto fit = fit_factorization(gt, 3, FactorKernel::kNormAbsLin, 5000, 0.05, 11);
    CHECK(fit.loss < 0.01);
}

TEST_CASE("softmax factorization cannot separate a near-deterministic target at l = 1") {
    // Row-softmax of a rank-1 logit matrix has strongly coupled rows; a
    // concentrated Dirichlet draw with distinct peaks stays far away.
    Rng rng(311);
    const StochasticMatrix gt = sample_dirichlet_rows(5, 5, 0.05, rng);
    const auto fit = fit_factorization(gt, 1, FactorKernel::kSoftmax, 2000, 0.05, 13);
    CHECK(fit.loss > 0.3);
}

TEST_CASE("fit_factorization is deterministic given the seed") {
    Rng rng(313);
    const StochasticMatrix gt = sample_dirichlet_rows(3, 3, 0.5, rng);
    const auto a = fit_factorization(gt, 2, FactorKernel::kNormAbsLin, 100, 0.05, 21);
    const auto b = fit_factorization(gt, 2, FactorKernel::kNormAbsLin, 100, 0.05, 21);
    CHECK(a.loss == b.loss);
    CHECK(a.U == b.U);
    CHECK(a.Z == b.Z);
}

TEST_CASE("percentile interpolates order statistics") {
    const std::vector<double> v{3.0, 1.0, 4.0, 2.0};
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK(percentile(v, 1.0) == 4.0);
    CHECK(percentile(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(percentile(v, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(percentile(v, 0.75) == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(percentile({42.0}, 0.37) == 42.0);
    CHECK_THROWS_AS(percentile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(percentile(v, 1.5), std::invalid_argument);
}

TEST_CASE("run_study layout, aggregates and determinism across job counts") {
    FactorStudyConfig cfg;
    cfg.grid = {{3, 1}, {3, 2}};
    cfg.replicas = 4;
    cfg.steps = 40;
    cfg.learning_rate = 0.05;
    cfg.seed = 123;
    cfg.jobs = 1;
    const auto serial = run_study(cfg);

    REQUIRE(serial.cells.size() == 4);
    CHECK(serial.cells[0].kernel == FactorKernel::kNormAbsLin);
    CHECK(serial.cells[1].kernel == FactorKernel::kSoftmax);
    CHECK(serial.cells[0].n == 3);
    CHECK(serial.cells[0].l == 1);
    CHECK(serial.cells[2].l == 2);
    for (const auto& cell : serial.cells) {
        REQUIRE(cell.losses.size() == 4);
        for (double loss : cell.losses) {
            CHECK(loss >= 0.0);
            CHECK(std::isfinite(loss));
        }
        CHECK(cell.median == percentile(cell.losses, 0.5));
        CHECK(cell.p25 == percentile(cell.losses, 0.25));
        CHECK(cell.p75 == percentile(cell.losses, 0.75));
        CHECK(cell.p25 <= cell.median);
        CHECK(cell.median <= cell.p75);
    }

    cfg.jobs = 3;
    const auto parallel = run_study(cfg);
    for (std::size_t c = 0; c < serial.cells.size(); ++c) {
        CHECK(serial.cells[c].losses == parallel.cells[c].losses);
    }
}

TEST_CASE("run_study rejects bad configurations") {
    FactorStudyConfig cfg;
    CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
    cfg.grid = {{3, 0}};
    CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
    cfg.grid = {{3, 1}};
    cfg.replicas = 0;
    CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
}

TEST_CASE("study CSV writers emit one row per record at full precision") {
    FactorStudyConfig cfg;
    cfg.grid = {{2, 1}};
    cfg.replicas = 3;
    cfg.steps = 5;
    cfg.seed = 7;
    const auto result = run_study(cfg);

    std::ostringstream per_replica;
    write_study_csv(result, per_replica);
    const std::string text = per_replica.str();
    CHECK(text.rfind("n,l,kernel,replica,loss\n", 0) == 0);
    CHECK(count_lines(text) == 1 + 2 * 3);
    CHECK(text.find("normAbsLin") != std::string::npos);
    CHECK(text.find("softmax") != std::string::npos);

    std::ostringstream aggregate;
    write_study_aggregate_csv(result, aggregate);
    CHECK(aggregate.str().rfind("n,l,kernel,p25,median,p75\n", 0) == 0);
    CHECK(count_lines(aggregate.str()) == 1 + 2);

    // 17 significant digits survive the round trip.
    std::ostringstream probe;
    FactorStudyResult tiny;
    FactorCellResult cell;
    cell.n = 2;
    cell.l = 1;
    cell.kernel = FactorKernel::kSoftmax;
    cell.losses = {1.0 / 3.0};
    tiny.cells.push_back(cell);
    write_study_csv(tiny, probe);
    CHECK(probe.str().find("0.33333333333333331") != std::string::npos);
}
