#include "densehmm/metrics.hpp"

#include "densehmm/dense_repr.hpp"
#include "densehmm/factor_study.hpp"
#include "densehmm/parallel.hpp"
#include "densehmm/stochastic.hpp"

#include <chrono>
#include <ostream>

namespace densehmm {

double cooc_mad(const CoocMatrix& a, const CoocMatrix& b) {
    require(a.omega.rows() == b.omega.rows() && a.omega.cols() == b.omega.cols(),
            "cooc_mad: shape mismatch");
    return (a.omega - b.omega).cwiseAbs().mean();
}

HmmParams build_synthetic_hmm(int n, double alpha, Rng& rng) {
    require(n >= 1, "build_synthetic_hmm: n must be >= 1");
    HmmParams params;
    params.A = sample_dirichlet_rows(n, n, alpha, rng);
    params.B = sample_dirichlet_rows(n, n, alpha, rng);
    params.pi = stationary_distribution(params.A);
    return params;
}

CoocMatrix estimate_model_cooc(const HmmParams& params, const SequenceDataset& test, Rng& rng) {
    std::vector<std::vector<std::int32_t>> samples;
    samples.reserve(test.sequences.size());
    for (const auto& seq : test.sequences) {
        samples.push_back(sample(params, static_cast<int>(seq.size()), rng));
    }
    return empirical_cooc(samples, params.num_symbols());
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::kStand: return "stand";
        case ModelKind::kStandFair: return "stand_fair";
        case ModelKind::kDenseEm: return "dense_em";
        case ModelKind::kDenseDirect: return "dense_direct";
    }
    throw std::invalid_argument("to_string: bad ModelKind");
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "stand") return ModelKind::kStand;
    if (name == "stand_fair") return ModelKind::kStandFair;
    if (name == "dense_em") return ModelKind::kDenseEm;
    if (name == "dense_direct") return ModelKind::kDenseDirect;
    throw std::invalid_argument("unknown model kind: " + name);
}

void ExperimentConfig::check() const {
    require(!cells.empty(), "ExperimentConfig: empty cell list");
    for (const auto& [n, l] : cells) {
        require(n >= 1 && l >= 1, "ExperimentConfig: cells must have n, l >= 1");
    }
    require(replicas >= 1, "ExperimentConfig: replicas must be >= 1");
    require(!models.empty(), "ExperimentConfig: empty model set");
    if (source == DatasetSource::kSynthetic) {
        require(alpha > 0.0, "ExperimentConfig: alpha must be positive");
        require(sequences_per_split >= 1, "ExperimentConfig: sequences_per_split must be >= 1");
        require(sequence_length >= 2, "ExperimentConfig: sequence_length must be >= 2");
    } else {
        require(!data_path.empty(), "ExperimentConfig: file source needs data_path");
        require(test_fraction > 0.0 && test_fraction < 1.0,
                "ExperimentConfig: test_fraction must be in (0,1)");
    }
    require(jobs >= 1, "ExperimentConfig: jobs must be >= 1");
}

namespace {

struct ReplicaData {
    SequenceDataset train;
    SequenceDataset test;
    CoocMatrix gt_cooc;      // scored against
    CoocMatrix direct_target;  // optimized by the dense-direct trainer
};

Vocabulary index_vocabulary(int m) {
    std::vector<std::string> symbols;
    symbols.reserve(m);
    for (int i = 0; i < m; ++i) symbols.push_back(std::to_string(i));
    return Vocabulary::from_symbols(std::move(symbols));
}

ReplicaData make_synthetic_data(const ExperimentConfig& cfg, int n, std::uint64_t seed) {
    Rng rng(seed);
    const HmmParams generator = build_synthetic_hmm(n, cfg.alpha, rng);
    ReplicaData data;
    data.train.vocab = index_vocabulary(n);
    data.test.vocab = data.train.vocab;
    for (int i = 0; i < cfg.sequences_per_split; ++i) {
        data.train.sequences.push_back(sample(generator, cfg.sequence_length, rng));
    }
    for (int i = 0; i < cfg.sequences_per_split; ++i) {
        data.test.sequences.push_back(sample(generator, cfg.sequence_length, rng));
    }
    data.gt_cooc = analytic_cooc(generator);
    data.direct_target = data.gt_cooc;
    return data;
}

ReplicaData make_file_data(const SequenceDataset& corpus, double test_fraction,
                           std::uint64_t seed) {
    ReplicaData data;
    std::tie(data.train, data.test) = split_train_test(corpus, test_fraction, seed);
    data.gt_cooc = empirical_cooc(data.test);
    data.direct_target = empirical_cooc(data.train);
    return data;
}

struct ModelOutcome {
    HmmParams params;
    double train_loss = 0.0;
    bool has_train_loss = false;
};

ModelOutcome train_model(ModelKind kind, const ExperimentConfig& cfg, int n, int l, int m,
                         const ReplicaData& data, std::uint64_t seed) {
    ModelOutcome out;
    switch (kind) {
        case ModelKind::kStand:
        case ModelKind::kStandFair: {
            EmConfig em = cfg.em;
            em.n = kind == ModelKind::kStand ? n : dof_report(n, m, l).n_fair;
            em.l = 1;
            em.seed = seed;
            Rng rng(seed);
            out.params = baum_welch_fit(data.train, em, rng).params;
            return out;
        }
        case ModelKind::kDenseEm: {
            EmConfig em = cfg.em;
            em.n = n;
            em.l = l;
            em.seed = seed;
            Rng rng(seed);
            out.params = dense_em_fit(data.train, em, rng).params;
            return out;
        }
        case ModelKind::kDenseDirect: {
            DirectFitConfig direct = cfg.direct;
            direct.n = n;
            direct.l = l;
            direct.seed = seed;
            const DirectFitResult fit = direct_fit(data.direct_target, direct);
            out.params = fit.params;
            out.train_loss = fit.loss_trace.back();
            out.has_train_loss = true;
            return out;
        }
    }
    throw std::invalid_argument("train_model: bad ModelKind");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.check();

    SequenceDataset corpus;
    if (cfg.source == DatasetSource::kFile) {
        corpus = load_sequences(cfg.data_path);
        if (cfg.max_len > 0) corpus = truncate(corpus, cfg.max_len);
        if (cfg.merge_threshold > 0.0) corpus = merge_rare_symbols(corpus, cfg.merge_threshold);
    }

    ExperimentResult result;
    result.dataset_label =
        cfg.source == DatasetSource::kSynthetic ? "synthetic" : cfg.data_path;

    const std::size_t models_per_task = cfg.models.size();
    const std::size_t tasks =
        cfg.cells.size() * static_cast<std::size_t>(cfg.replicas);
    result.records.resize(tasks * models_per_task);

    parallel_for_index(tasks, cfg.jobs, [&](std::size_t task) {
        const auto& [n, l] = cfg.cells[task / static_cast<std::size_t>(cfg.replicas)];
        const int replica = static_cast<int>(task % static_cast<std::size_t>(cfg.replicas));
        const std::uint64_t task_seed = Rng::derive_seed(cfg.seed, task);

        ReplicaData data;
        bool data_ok = true;
        std::string data_error;
        try {
            data = cfg.source == DatasetSource::kSynthetic
                       ? make_synthetic_data(cfg, n, Rng::derive_seed(task_seed, 0))
                       : make_file_data(corpus, cfg.test_fraction,
                                        Rng::derive_seed(task_seed, 0));
        } catch (const std::exception& e) {
            data_ok = false;
            data_error = e.what();
        }
        const int m = data_ok ? data.train.vocab.size() : 0;

        for (std::size_t k = 0; k < models_per_task; ++k) {
            ReplicaRecord& rec = result.records[task * models_per_task + k];
            rec.n = n;
            rec.l = l;
            rec.model = cfg.models[k];
            rec.replica = replica;
            if (!data_ok) {
                rec.failed = true;
                rec.failure_message = "data: " + data_error;
                continue;
            }
            const std::uint64_t model_seed = Rng::derive_seed(task_seed, 1 + k);
            const auto start = std::chrono::steady_clock::now();
            try {
                const ModelOutcome out = train_model(rec.model, cfg, n, l, m, data,
                                                     Rng::derive_seed(model_seed, 0));
                Rng eval_rng(Rng::derive_seed(model_seed, 1));
                const CoocMatrix model_cooc =
                    estimate_model_cooc(out.params, data.test, eval_rng);
                rec.cooc_mad = densehmm::cooc_mad(model_cooc, data.gt_cooc);
                const FlooredNll nll = score_nll_floored(out.params, data.test, 1e-300);
                rec.normalized_nll = nll.normalized_nll;
                rec.floored_steps = nll.floored_steps;
                if (out.has_train_loss) rec.train_loss = out.train_loss;
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.failure_message = e.what();
            }
            rec.wall_time_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
        }
    });

    for (const auto& rec : result.records) {
        if (rec.failed) {
            result.warnings.push_back("cell (" + std::to_string(rec.n) + "," +
                                      std::to_string(rec.l) + ") model " + to_string(rec.model) +
                                      " replica " + std::to_string(rec.replica) +
                                      " failed: " + rec.failure_message);
        }
    }

    for (std::size_t cell = 0; cell < cfg.cells.size(); ++cell) {
        for (std::size_t k = 0; k < models_per_task; ++k) {
            std::vector<double> mads, nlls;
            for (int r = 0; r < cfg.replicas; ++r) {
                const std::size_t task = cell * static_cast<std::size_t>(cfg.replicas) +
                                         static_cast<std::size_t>(r);
                const ReplicaRecord& rec = result.records[task * models_per_task + k];
                if (rec.failed) continue;
                mads.push_back(rec.cooc_mad);
                nlls.push_back(rec.normalized_nll);
            }
            const auto& [n, l] = cfg.cells[cell];
            if (mads.empty()) {
                result.warnings.push_back("cell (" + std::to_string(n) + "," +
                                          std::to_string(l) + ") model " +
                                          to_string(cfg.models[k]) +
                                          ": no surviving replicas, aggregate skipped");
                continue;
            }
            const auto aggregate = [&](const std::string& metric,
                                       const std::vector<double>& values) {
                AggregateRecord agg;
                agg.n = n;
                agg.l = l;
                agg.model = cfg.models[k];
                agg.metric = metric;
                agg.p25 = percentile(values, 0.25);
                agg.median = percentile(values, 0.50);
                agg.p75 = percentile(values, 0.75);
                agg.replicas_used = static_cast<int>(values.size());
                result.aggregates.push_back(std::move(agg));
            };
            aggregate("cooc_mad", mads);
            aggregate("normalized_nll", nlls);
        }
    }
    return result;
}

void write_experiment_csv(const ExperimentResult& result, std::ostream& out) {
    out.precision(17);
    out << "dataset,n,l,model,replica,metric,value\n";
    for (const auto& rec : result.records) {
        if (rec.failed) continue;
        const std::string prefix = result.dataset_label + ',' + std::to_string(rec.n) + ',' +
                                   std::to_string(rec.l) + ',' + to_string(rec.model) + ',' +
                                   std::to_string(rec.replica) + ',';
        out << prefix << "cooc_mad," << rec.cooc_mad << '\n';
        out << prefix << "normalized_nll," << rec.normalized_nll << '\n';
        out << prefix << "floored_steps," << rec.floored_steps << '\n';
        if (rec.model == ModelKind::kDenseDirect) {
            out << prefix << "train_loss," << rec.train_loss << '\n';
        }
    }
}

void write_experiment_aggregate_csv(const ExperimentResult& result, std::ostream& out) {
    out.precision(17);
    out << "dataset,n,l,model,metric,p25,median,p75\n";
    for (const auto& agg : result.aggregates) {
        out << result.dataset_label << ',' << agg.n << ',' << agg.l << ',' << to_string(agg.model)
            << ',' << agg.metric << ',' << agg.p25 << ',' << agg.median << ',' << agg.p75 << '\n';
    }
}

void write_experiment_timings_csv(const ExperimentResult& result, std::ostream& out) {
    out.precision(6);
    out << "dataset,n,l,model,replica,seconds\n";
    for (const auto& rec : result.records) {
        out << result.dataset_label << ',' << rec.n << ',' << rec.l << ',' << to_string(rec.model)
            << ',' << rec.replica << ',' << rec.wall_time_seconds << '\n';
    }
}

}  // namespace densehmm
