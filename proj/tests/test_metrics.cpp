#include "densehmm/metrics.hpp"

#include "densehmm/common.hpp"
#include "densehmm/corpus.hpp"
#include "densehmm/factor_study.hpp"
#include "densehmm/rng.hpp"
#include "densehmm/stochastic.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace densehmm;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path = fs::temp_directory_path() / ("densehmm_metrics_test_" + std::to_string(counter++));
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (v[j] < v[i]) r[i] += 1.0;
            }
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    return cov / std::sqrt(vx * vy);
}

ExperimentConfig quick_synthetic_config() {
    ExperimentConfig cfg;
    cfg.cells = {{2, 1}};
    cfg.replicas = 2;
    cfg.sequences_per_split = 4;
    cfg.sequence_length = 50;
    cfg.em.max_em_iters = 3;
    cfg.em.mstep_steps = 20;
    cfg.em.mstep_lr = 0.05;
    cfg.direct.steps = 50;
    cfg.direct.learning_rate = 0.05;
    cfg.seed = 99;
    return cfg;
}

}  // namespace

TEST_CASE("cooc_mad averages absolute deviations over all entries") {
    CoocMatrix a, b;
    a.omega.resize(2, 2);
    a.omega << 0.5, 0.1, 0.2, 0.2;
    b.omega.resize(2, 2);
    b.omega << 0.4, 0.2, 0.2, 0.2;
    CHECK(cooc_mad(a, b) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(cooc_mad(a, a) == 0.0);

    CoocMatrix c;
    c.omega.resize(3, 3);
    CHECK_THROWS_AS(cooc_mad(a, c), std::invalid_argument);
}

TEST_CASE("build_synthetic_hmm produces a stationary square model") {
    Rng rng(401);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(6));
        const HmmParams p = build_synthetic_hmm(n, 0.5, rng);
        p.check();
        CHECK(p.num_symbols() == n);
        const Vector residual = (p.A.p.transpose() * p.pi.p) - p.pi.p;
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
    }

    Rng a(5), b(5);
    const HmmParams pa = build_synthetic_hmm(3, 0.1, a);
    const HmmParams pb = build_synthetic_hmm(3, 0.1, b);
    CHECK(pa.A.p == pb.A.p);
    CHECK(pa.B.p == pb.B.p);
    CHECK_THROWS_AS(build_synthetic_hmm(0, 0.5, rng), std::invalid_argument);
}

TEST_CASE("estimate_model_cooc converges to the analytic co-occurrences") {
    Rng rng(409);
    const HmmParams p = build_synthetic_hmm(3, 0.5, rng);
    const CoocMatrix analytic = analytic_cooc(p);

    SequenceDataset shape;
    shape.vocab = Vocabulary::from_symbols({"0", "1", "2"});
    for (int i = 0; i < 10; ++i) shape.sequences.emplace_back(10000, 0);

    Rng eval(11);
    const CoocMatrix estimate = estimate_model_cooc(p, shape, eval);
    estimate.check();
    CHECK(cooc_mad(estimate, analytic) < 0.003);
}

TEST_CASE("model kind names round-trip") {
    for (const auto kind : {ModelKind::kStand, ModelKind::kStandFair, ModelKind::kDenseEm,
                            ModelKind::kDenseDirect}) {
        CHECK(model_kind_from_string(to_string(kind)) == kind);
    }
    CHECK(to_string(ModelKind::kStandFair) == "stand_fair");
    CHECK_THROWS_AS(model_kind_from_string("gru"), std::invalid_argument);
}

TEST_CASE("ExperimentConfig rejects invalid settings") {
    ExperimentConfig cfg;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);  // no cells
    cfg.cells = {{2, 1}};
    cfg.check();
    cfg.sequence_length = 1;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = ExperimentConfig{};
    cfg.cells = {{2, 1}};
    cfg.source = DatasetSource::kFile;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);  // no path
    cfg.data_path = "corpus.txt";
    cfg.test_fraction = 1.0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg.test_fraction = 0.5;
    cfg.check();
}

TEST_CASE("run_experiment record layout and aggregate consistency") {
    ExperimentConfig cfg = quick_synthetic_config();
    cfg.cells = {{2, 1}, {3, 2}};
    const auto result = run_experiment(cfg);

    CHECK(result.dataset_label == "synthetic");
    REQUIRE(result.records.size() == 2 * 2 * 4);
    CHECK(result.warnings.empty());

    // cells x replicas x models order.
    const auto& first = result.records[0];
    CHECK(first.n == 2);
    CHECK(first.model == ModelKind::kStand);
    CHECK(first.replica == 0);
    CHECK(result.records[3].model == ModelKind::kDenseDirect);
    CHECK(result.records[4].replica == 1);
    CHECK(result.records[8].n == 3);
    CHECK(result.records[8].l == 2);

    for (const auto& rec : result.records) {
        CHECK_FALSE(rec.failed);
        CHECK(std::isfinite(rec.cooc_mad));
        CHECK(rec.cooc_mad >= 0.0);
        CHECK(std::isfinite(rec.normalized_nll));
        if (rec.model == ModelKind::kDenseDirect) CHECK(rec.train_loss >= 0.0);
    }

    // One aggregate row per (cell, model, metric), consistent with percentile.
    REQUIRE(result.aggregates.size() == 2 * 4 * 2);
    for (const auto& agg : result.aggregates) {
        CHECK(agg.replicas_used == 2);
        CHECK(agg.p25 <= agg.median);
        CHECK(agg.median <= agg.p75);
    }
    const auto& agg0 = result.aggregates[0];
    CHECK(agg0.metric == "cooc_mad");
    std::vector<double> mads;
    for (const auto& rec : result.records) {
        if (rec.n == agg0.n && rec.l == agg0.l && rec.model == agg0.model && !rec.failed) {
            mads.push_back(rec.cooc_mad);
        }
    }
    CHECK(agg0.median == percentile(mads, 0.5));
}

TEST_CASE("run_experiment is deterministic and independent of the job count") {
    ExperimentConfig cfg = quick_synthetic_config();
    const auto a = run_experiment(cfg);
    cfg.jobs = 3;
    const auto b = run_experiment(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].cooc_mad == b.records[i].cooc_mad);
        CHECK(a.records[i].normalized_nll == b.records[i].normalized_nll);
        CHECK(a.records[i].train_loss == b.records[i].train_loss);
        CHECK(a.records[i].floored_steps == b.records[i].floored_steps);
    }
}

TEST_CASE("model subsets reuse the same per-model seeds") {
    // Dropping models from the list must not change the records of the
    // remaining ones: seeds are tied to the position in cfg.models.
    ExperimentConfig cfg = quick_synthetic_config();
    cfg.models = {ModelKind::kStand, ModelKind::kStandFair};
    const auto both = run_experiment(cfg);
    cfg.models = {ModelKind::kStand};
    const auto solo = run_experiment(cfg);
    REQUIRE(both.records.size() == 2 * 2);
    REQUIRE(solo.records.size() == 2);
    for (int r = 0; r < 2; ++r) {
        CHECK(solo.records[r].cooc_mad == both.records[2 * r].cooc_mad);
        CHECK(solo.records[r].normalized_nll == both.records[2 * r].normalized_nll);
    }
}

TEST_CASE("dense_direct training loss ranks its evaluation error") {
    ExperimentConfig cfg;
    cfg.cells = {{3, 2}};
    cfg.replicas = 10;
    cfg.models = {ModelKind::kDenseDirect};
    cfg.alpha = 0.5;  // smooth generators: no near-periodic chains in this batch
    cfg.sequences_per_split = 6;
    cfg.sequence_length = 300;
    cfg.direct.steps = 150;
    cfg.direct.learning_rate = 0.03;
    cfg.seed = 17;
    const auto result = run_experiment(cfg);

    std::vector<double> train_losses, eval_mads;
    for (const auto& rec : result.records) {
        REQUIRE_FALSE(rec.failed);
        train_losses.push_back(rec.train_loss);
        eval_mads.push_back(rec.cooc_mad);
    }
    CHECK(spearman(train_losses, eval_mads) > 0.0);
}

TEST_CASE("run_experiment on a corpus file labels and splits per replica") {
    Rng rng(419);
    const HmmParams gen = build_synthetic_hmm(3, 1.0, rng);
    std::ostringstream corpus;
    for (int s = 0; s < 8; ++s) {
        const auto seq = sample(gen, 40, rng);
        for (std::size_t t = 0; t < seq.size(); ++t) {
            corpus << (t ? " " : "") << "w" << seq[t];
        }
        corpus << '\n';
    }
    TempFile file(corpus.str());

    ExperimentConfig cfg;
    cfg.source = DatasetSource::kFile;
    cfg.data_path = file.path.string();
    cfg.cells = {{2, 1}};
    cfg.replicas = 2;
    cfg.models = {ModelKind::kStand, ModelKind::kDenseDirect};
    cfg.em.max_em_iters = 3;
    cfg.direct.steps = 40;
    cfg.seed = 23;
    const auto result = run_experiment(cfg);

    CHECK(result.dataset_label == file.path.string());
    CHECK(result.warnings.empty());
    REQUIRE(result.records.size() == 4);
    for (const auto& rec : result.records) {
        CHECK_FALSE(rec.failed);
        CHECK(std::isfinite(rec.cooc_mad));
    }

    // Same file, same seed: reproducible.
    const auto again = run_experiment(cfg);
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        CHECK(result.records[i].cooc_mad == again.records[i].cooc_mad);
    }
}

TEST_CASE("failed replicas are recorded, skipped in aggregates, and do not abort the run") {
    // Every split of a corpus of singletons has no adjacent pairs, so the
    // per-replica data preparation fails for all replicas.
    TempFile file("a\nb\na\nb\n");
    ExperimentConfig cfg;
    cfg.source = DatasetSource::kFile;
    cfg.data_path = file.path.string();
    cfg.cells = {{2, 1}};
    cfg.replicas = 2;
    cfg.models = {ModelKind::kStand, ModelKind::kDenseDirect};
    cfg.seed = 29;
    const auto result = run_experiment(cfg);

    REQUIRE(result.records.size() == 4);
    for (const auto& rec : result.records) {
        CHECK(rec.failed);
        CHECK(rec.failure_message.find("data:") == 0);
    }
    CHECK(result.aggregates.empty());
    // One warning per failed record plus one per skipped aggregate.
    CHECK(result.warnings.size() == 4 + 2);
}

TEST_CASE("experiment CSV writers") {
    ExperimentConfig cfg = quick_synthetic_config();
    const auto result = run_experiment(cfg);

    std::ostringstream per_replica;
    write_experiment_csv(result, per_replica);
    const std::string text = per_replica.str();
    CHECK(text.rfind("dataset,n,l,model,replica,metric,value\n", 0) == 0);
    // 8 records x 3 metrics + 2 dense_direct train losses.
    int lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 1 + 8 * 3 + 2);
    CHECK(text.find("synthetic,2,1,stand,0,cooc_mad,") != std::string::npos);
    CHECK(text.find("train_loss") != std::string::npos);

    std::ostringstream aggregate;
    write_experiment_aggregate_csv(result, aggregate);
    CHECK(aggregate.str().rfind("dataset,n,l,model,metric,p25,median,p75\n", 0) == 0);

    std::ostringstream timings;
    write_experiment_timings_csv(result, timings);
    const std::string timing_text = timings.str();
    CHECK(timing_text.rfind("dataset,n,l,model,replica,seconds\n", 0) == 0);
    lines = 0;
    for (char c : timing_text) lines += c == '\n';
    CHECK(lines == 1 + 8);
}
