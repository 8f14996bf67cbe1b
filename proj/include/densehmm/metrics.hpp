#pragma once

#include "densehmm/common.hpp"
#include "densehmm/corpus.hpp"
#include "densehmm/hmm_core.hpp"
#include "densehmm/rng.hpp"
#include "densehmm/train_cooc.hpp"
#include "densehmm/train_em.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace densehmm {

/// Mean absolute entry-wise deviation between two co-occurrence matrices
/// (averaged over all m^2 entries).
double cooc_mad(const CoocMatrix& a, const CoocMatrix& b);

/// Ground-truth generator: A and B rows drawn from Dirichlet(alpha * 1), m = n
/// symbols, pi set to the stationary distribution of A. Draw order: A rows,
/// then B rows.
HmmParams build_synthetic_hmm(int n, double alpha, Rng& rng);

/// Samples one sequence per test sequence, with identical lengths, then
/// returns the empirical co-occurrence of the samples (m from params).
CoocMatrix estimate_model_cooc(const HmmParams& params, const SequenceDataset& test, Rng& rng);

enum class ModelKind { kStand, kStandFair, kDenseEm, kDenseDirect };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

enum class DatasetSource { kSynthetic, kFile };

struct ExperimentConfig {
    DatasetSource source = DatasetSource::kSynthetic;
    std::string data_path;  // file source only

    std::vector<std::pair<int, int>> cells;  // (n, l)
    int replicas = 10;
    std::vector<ModelKind> models = {ModelKind::kStand, ModelKind::kStandFair,
                                     ModelKind::kDenseEm, ModelKind::kDenseDirect};

    // Synthetic data: fresh generator per replica, train/test of
    // `sequences_per_split` sequences of length `sequence_length` each.
    double alpha = 0.1;
    int sequences_per_split = 10;
    int sequence_length = 200;

    // File data: preprocessing (truncate, then merge) and per-replica splits.
    std::size_t max_len = 0;        // 0 disables truncation
    double merge_threshold = 0.0;   // 0 disables merging
    double test_fraction = 0.5;

    // Trainer budgets; n, l and seeds are filled in per cell and replica.
    EmConfig em;
    DirectFitConfig direct;

    std::uint64_t seed = 0;
    int jobs = 1;

    void check() const;
};

/// One (cell, model, replica) outcome. `wall_time_seconds` is the only
/// non-deterministic field and is kept out of the result CSVs.
struct ReplicaRecord {
    int n = 0;
    int l = 0;
    ModelKind model = ModelKind::kStand;
    int replica = 0;
    bool failed = false;
    std::string failure_message;
    double cooc_mad = 0.0;
    double normalized_nll = 0.0;
    std::size_t floored_steps = 0;
    double train_loss = 0.0;  // dense-direct only: final co-occurrence loss
    double wall_time_seconds = 0.0;
};

struct AggregateRecord {
    int n = 0;
    int l = 0;
    ModelKind model = ModelKind::kStand;
    std::string metric;
    double p25 = 0.0;
    double median = 0.0;
    double p75 = 0.0;
    int replicas_used = 0;
};

struct ExperimentResult {
    std::string dataset_label;  // "synthetic" or the data path
    std::vector<ReplicaRecord> records;      // cells x replicas x models order
    std::vector<AggregateRecord> aggregates;
    std::vector<std::string> warnings;       // per-replica failures
};

/// The four-model comparison protocol. Per (cell, replica): fresh data
/// (synthetic generator + samples, or a fresh shuffled split of the file),
/// train every selected model, then score co-occurrence MAD against the
/// ground truth (analytic for synthetic, test-split empirical for files) and
/// floored normalized NLL on the test split. Seeds derive from cfg.seed per
/// task, so replicas are reproducible independently and in parallel; trainer
/// failures mark the replica failed and the run continues. Aggregates are
/// 25/50/75 percentiles over the non-failed replicas, reduced in replica
/// order.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Long-format CSV: dataset,n,l,model,replica,metric,value. Metrics per
/// record: cooc_mad, normalized_nll, floored_steps, and train_loss for the
/// dense-direct model. Failed replicas are omitted (they are listed in
/// `warnings`).
void write_experiment_csv(const ExperimentResult& result, std::ostream& out);

/// Aggregate CSV: dataset,n,l,model,metric,p25,median,p75.
void write_experiment_aggregate_csv(const ExperimentResult& result, std::ostream& out);

/// Wall-clock seconds per record (dataset,n,l,model,replica,seconds); the one
/// output that is not reproducible across runs.
void write_experiment_timings_csv(const ExperimentResult& result, std::ostream& out);

}  // namespace densehmm
