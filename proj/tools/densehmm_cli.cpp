// Command-line front end: train, score and sample single models, compute
// co-occurrence matrices, and run the factorization study / model-comparison
// experiment grids. Everything is seeded; reruns with identical arguments
// produce byte-identical artifacts.

#include "densehmm/common.hpp"
#include "densehmm/corpus.hpp"
#include "densehmm/dense_repr.hpp"
#include "densehmm/factor_study.hpp"
#include "densehmm/hmm_core.hpp"
#include "densehmm/io.hpp"
#include "densehmm/metrics.hpp"
#include "densehmm/rng.hpp"
#include "densehmm/train_cooc.hpp"
#include "densehmm/train_em.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace densehmm;

namespace {

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::pair<int, int>> parse_cells(const std::vector<std::string>& specs) {
    std::vector<std::pair<int, int>> cells;
    for (const auto& spec : specs) {
        const auto sep = spec.find_first_of("x:");
        std::size_t used_n = 0, used_l = 0;
        int n = 0, l = 0;
        try {
            if (sep == std::string::npos) throw std::invalid_argument("");
            n = std::stoi(spec.substr(0, sep), &used_n);
            l = std::stoi(spec.substr(sep + 1), &used_l);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad cell '" + spec + "', expected NxL (e.g. 3x2)");
        }
        if (used_n != sep || used_l != spec.size() - sep - 1 || n < 1 || l < 1) {
            throw std::invalid_argument("bad cell '" + spec + "', expected NxL (e.g. 3x2)");
        }
        cells.emplace_back(n, l);
    }
    return cells;
}

Vocabulary index_vocab(int m) {
    std::vector<std::string> symbols;
    symbols.reserve(m);
    for (int i = 0; i < m; ++i) symbols.push_back(std::to_string(i));
    return Vocabulary::from_symbols(std::move(symbols));
}

std::ofstream create_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    return out;
}

// ---------------------------------------------------------------------------
// fit

struct FitOpts {
    std::string model;
    std::string data;
    bool synthetic = false;
    int syn_n = 3;
    int syn_seqs = 10;
    int syn_len = 200;
    double syn_alpha = 0.1;
    std::size_t max_len = 0;
    double merge_threshold = 0.0;
    int n = 2;
    int l = 1;
    int em_iters = 100;
    double em_tol = 1e-6;
    int mstep_steps = 100;
    double mstep_lr = 0.01;
    int steps = 5000;
    double lr = 0.01;
    std::uint64_t seed = 0;
    std::string out;
};

void run_fit(const FitOpts& opt) {
    SequenceDataset train;
    std::optional<HmmParams> generator;
    if (opt.synthetic) {
        Rng rng(Rng::derive_seed(opt.seed, 0));
        generator = build_synthetic_hmm(opt.syn_n, opt.syn_alpha, rng);
        train.vocab = index_vocab(opt.syn_n);
        for (int i = 0; i < opt.syn_seqs; ++i) {
            train.sequences.push_back(sample(*generator, opt.syn_len, rng));
        }
    } else {
        train = load_sequences(opt.data);
    }
    if (opt.max_len > 0) train = truncate(train, opt.max_len);
    if (opt.merge_threshold > 0.0) train = merge_rare_symbols(train, opt.merge_threshold);
    const int m = train.vocab.size();

    fs::create_directories(opt.out);
    const fs::path out_dir(opt.out);
    const std::uint64_t train_seed = Rng::derive_seed(opt.seed, 1);

    HmmParams params;
    if (opt.model == "stand") {
        EmConfig cfg;
        cfg.n = opt.n;
        cfg.max_em_iters = opt.em_iters;
        cfg.em_tol = opt.em_tol;
        cfg.seed = train_seed;
        Rng rng(train_seed);
        const BaumWelchResult res = baum_welch_fit(train, cfg, rng);
        params = res.params;
        auto trace_out = create_output(out_dir / "trace.csv");
        write_em_trace_csv(res.trace, trace_out);
    } else if (opt.model == "dense-em") {
        EmConfig cfg;
        cfg.n = opt.n;
        cfg.l = opt.l;
        cfg.max_em_iters = opt.em_iters;
        cfg.em_tol = opt.em_tol;
        cfg.mstep_steps = opt.mstep_steps;
        cfg.mstep_lr = opt.mstep_lr;
        cfg.seed = train_seed;
        Rng rng(train_seed);
        const DenseEmResult res = dense_em_fit(train, cfg, rng);
        params = res.params;
        save_reps_file({res.reps, train.vocab}, out_dir / "reps.txt");
        auto trace_out = create_output(out_dir / "trace.csv");
        write_em_trace_csv(res.trace, trace_out);
    } else if (opt.model == "dense-direct") {
        const CoocMatrix target =
            generator ? analytic_cooc(*generator) : empirical_cooc(train);
        DirectFitConfig cfg;
        cfg.n = opt.n;
        cfg.l = opt.l;
        cfg.steps = opt.steps;
        cfg.learning_rate = opt.lr;
        cfg.seed = train_seed;
        const DirectFitResult res = direct_fit(target, cfg);
        params = res.params;
        save_reps_file({res.reps, train.vocab}, out_dir / "reps.txt");
        auto trace_out = create_output(out_dir / "loss_trace.csv");
        write_loss_trace_csv(res.loss_trace, trace_out);
        std::cout << "model=" << opt.model
                  << " train_nll=" << fixed6(score_nll_floored(params, train, 1e-300).normalized_nll)
                  << " final_loss=" << full(res.loss_trace.back()) << '\n';
        save_params_file({params, train.vocab}, out_dir / "params.txt");
        return;
    } else {
        throw std::invalid_argument("unknown model '" + opt.model + "'");
    }
    require(params.num_symbols() == m, "trained model has unexpected symbol count");
    save_params_file({params, train.vocab}, out_dir / "params.txt");
    std::cout << "model=" << opt.model
              << " train_nll=" << fixed6(score_nll_floored(params, train, 1e-300).normalized_nll)
              << '\n';
}

// ---------------------------------------------------------------------------
// score

struct ScoreOpts {
    std::string params;
    std::string data;
    std::size_t max_len = 0;
    std::string out;
};

void run_score(const ScoreOpts& opt) {
    ParamsFile model = load_model(opt.params);
    const Vocabulary vocab =
        model.vocab ? *model.vocab : index_vocab(model.params.num_symbols());
    SequenceDataset test = load_sequences_with_vocab(opt.data, vocab);
    if (opt.max_len > 0) test = truncate(test, opt.max_len);
    const FlooredNll nll = score_nll_floored(model.params, test, 1e-300);
    if (nll.floored_steps > 0) {
        std::cerr << "warning: " << nll.floored_steps
                  << " zero-probability steps floored at 1e-300\n";
    }
    const std::string line = fixed6(nll.normalized_nll);
    std::cout << line << '\n';
    if (!opt.out.empty()) {
        auto out = create_output(opt.out);
        out << line << '\n';
    }
}

// ---------------------------------------------------------------------------
// sample

struct SampleOpts {
    std::string params;
    int num_seqs = 10;
    int len = 200;
    std::uint64_t seed = 0;
    std::string out;
};

void run_sample(const SampleOpts& opt) {
    require(opt.num_seqs >= 1, "--num-seqs must be >= 1");
    require(opt.len >= 1, "--len must be >= 1");
    ParamsFile model = load_model(opt.params);
    SequenceDataset ds;
    ds.vocab = model.vocab ? *model.vocab : index_vocab(model.params.num_symbols());
    Rng rng(opt.seed);
    for (int i = 0; i < opt.num_seqs; ++i) {
        ds.sequences.push_back(sample(model.params, opt.len, rng));
    }
    save_sequences(ds, opt.out);
    std::cerr << "wrote " << opt.num_seqs << " sequences to " << opt.out << '\n';
}

// ---------------------------------------------------------------------------
// cooc

struct CoocOpts {
    std::string data;
    std::string params;
    bool analytic = false;
    std::string mad_other;
    std::string out;
};

void run_cooc(const CoocOpts& opt) {
    require(opt.data.empty() != opt.params.empty(),
            "exactly one of --data and --params is required");
    CoocMatrix omega;
    if (!opt.data.empty()) {
        omega = empirical_cooc(load_sequences(opt.data));
    } else {
        require(opt.analytic, "--params requires --analytic");
        omega = analytic_cooc(load_model(opt.params).params);
    }
    if (opt.out.empty()) {
        write_matrix_csv(omega.omega, std::cout);
    } else {
        auto out = create_output(opt.out);
        write_matrix_csv(omega.omega, out);
    }
    if (!opt.mad_other.empty()) {
        const CoocMatrix other{load_matrix_csv(opt.mad_other)};
        std::cout << "mad=" << full(cooc_mad(omega, other)) << '\n';
    }
}

// ---------------------------------------------------------------------------
// factor-study

struct StudyOpts {
    std::vector<std::string> cells;
    int replicas = 10;
    double alpha = 0.1;
    int steps = 10000;
    double lr = 0.05;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out;
};

void run_factor_study(const StudyOpts& opt) {
    FactorStudyConfig cfg;
    cfg.grid = parse_cells(opt.cells);
    cfg.replicas = opt.replicas;
    cfg.alpha = opt.alpha;
    cfg.steps = opt.steps;
    cfg.learning_rate = opt.lr;
    cfg.seed = opt.seed;
    cfg.jobs = opt.jobs;
    std::cerr << "factor study: " << cfg.grid.size() << " cells x 2 kernels x " << cfg.replicas
              << " replicas on " << cfg.jobs << " job(s)\n";
    const FactorStudyResult result = run_study(cfg);
    fs::create_directories(opt.out);
    const fs::path out_dir(opt.out);
    {
        auto out = create_output(out_dir / "study.csv");
        write_study_csv(result, out);
    }
    {
        auto out = create_output(out_dir / "study_aggregate.csv");
        write_study_aggregate_csv(result, out);
    }
    std::cerr << "wrote " << (out_dir / "study.csv").string() << " and "
              << (out_dir / "study_aggregate.csv").string() << '\n';
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOpts {
    std::string data;
    std::vector<std::string> cells;
    int replicas = 10;
    std::vector<std::string> models = {"stand", "stand_fair", "dense_em", "dense_direct"};
    double alpha = 0.1;
    int seqs = 10;
    int seq_len = 200;
    std::size_t max_len = 0;
    double merge_threshold = 0.0;
    double test_fraction = 0.5;
    int em_iters = 100;
    double em_tol = 1e-6;
    int mstep_steps = 100;
    double mstep_lr = 0.01;
    int steps = 5000;
    double lr = 0.01;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out;
};

void run_experiment_cmd(const ExperimentOpts& opt) {
    ExperimentConfig cfg;
    if (opt.data.empty()) {
        cfg.source = DatasetSource::kSynthetic;
    } else {
        cfg.source = DatasetSource::kFile;
        cfg.data_path = opt.data;
    }
    cfg.cells = parse_cells(opt.cells);
    cfg.replicas = opt.replicas;
    cfg.models.clear();
    for (const auto& name : opt.models) cfg.models.push_back(model_kind_from_string(name));
    cfg.alpha = opt.alpha;
    cfg.sequences_per_split = opt.seqs;
    cfg.sequence_length = opt.seq_len;
    cfg.max_len = opt.max_len;
    cfg.merge_threshold = opt.merge_threshold;
    cfg.test_fraction = opt.test_fraction;
    cfg.em.max_em_iters = opt.em_iters;
    cfg.em.em_tol = opt.em_tol;
    cfg.em.mstep_steps = opt.mstep_steps;
    cfg.em.mstep_lr = opt.mstep_lr;
    cfg.direct.steps = opt.steps;
    cfg.direct.learning_rate = opt.lr;
    cfg.seed = opt.seed;
    cfg.jobs = opt.jobs;

    std::cerr << "experiment: " << cfg.cells.size() << " cells x " << cfg.replicas
              << " replicas x " << cfg.models.size() << " models on " << cfg.jobs << " job(s)\n";
    const ExperimentResult result = run_experiment(cfg);
    for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << '\n';

    fs::create_directories(opt.out);
    const fs::path out_dir(opt.out);
    {
        auto out = create_output(out_dir / "experiment.csv");
        write_experiment_csv(result, out);
    }
    {
        auto out = create_output(out_dir / "experiment_aggregate.csv");
        write_experiment_aggregate_csv(result, out);
    }
    {
        auto out = create_output(out_dir / "timings.csv");
        write_experiment_timings_csv(result, out);
    }
    std::cerr << "wrote experiment.csv, experiment_aggregate.csv and timings.csv under "
              << out_dir.string() << '\n';
}

// ---------------------------------------------------------------------------
// Config files. Schema: one `key = value` per line, where the key is the long
// option name without the leading dashes. Lists use `key = ["a", "b"]` (for
// repeatable options), flags use true/false, values with spaces or '#' must
// be double-quoted. '#' starts a comment. Command-line flags override file
// values; unknown keys are an error.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s, const std::string& where) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    if (!s.empty() && (s.front() == '"' || s.back() == '"')) {
        throw ConfigError(where + ": unbalanced quotes in '" + s + "'");
    }
    return s;
}

std::vector<std::string> split_list(const std::string& body, const std::string& where) {
    std::vector<std::string> items;
    std::string current;
    bool quoted = false;
    for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            items.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    items.push_back(current);
    if (items.size() == 1 && trim(items[0]).empty()) return {};
    std::vector<std::string> out;
    for (const auto& item : items) {
        const std::string value = trim(item);
        if (value.empty()) throw ConfigError(where + ": empty list element");
        out.push_back(unquote(value, where));
    }
    return out;
}

struct ConfigEntry {
    std::string key;
    std::vector<std::string> values;
};

std::vector<ConfigEntry> parse_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::vector<ConfigEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const std::string text = trim(strip_comment(line));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty() || key.find(' ') != std::string::npos) {
            throw ConfigError(where + ": bad key '" + key + "'");
        }
        ConfigEntry entry{key, {}};
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') throw ConfigError(where + ": unterminated list");
            entry.values = split_list(value.substr(1, value.size() - 2), where);
        } else {
            entry.values.push_back(unquote(value, where));
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

/// Rewrites the argument list, inserting options from a `--config FILE` given
/// after a subcommand. File values are skipped for options also present on
/// the command line, so explicit flags always win.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
    std::size_t sub_pos = args.size();
    const CLI::App* sub = nullptr;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if ((sub = app.get_subcommand_no_throw(args[i])) != nullptr) {
            sub_pos = i;
            break;
        }
    }
    if (sub == nullptr) return args;

    std::string config_path;
    std::vector<std::string> given;
    for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
        const std::string& arg = args[i];
        if (arg.rfind("--", 0) != 0) continue;
        const auto eq = arg.find('=');
        const std::string name = arg.substr(2, eq == std::string::npos ? arg.npos : eq - 2);
        given.push_back(name);
        if (name == "config") {
            if (eq != std::string::npos) {
                config_path = arg.substr(eq + 1);
            } else if (i + 1 < args.size()) {
                config_path = args[i + 1];
            }
        }
    }
    if (config_path.empty()) return args;

    std::vector<std::string> inserted;
    for (const auto& entry : parse_config_file(config_path)) {
        if (entry.key == "config") {
            throw ConfigError(config_path + ": config files cannot nest");
        }
        const CLI::Option* opt = sub->get_option_no_throw("--" + entry.key);
        if (opt == nullptr) {
            throw ConfigError(config_path + ": unknown config key '" + entry.key +
                              "' for subcommand '" + sub->get_name() + "'");
        }
        if (std::find(given.begin(), given.end(), entry.key) != given.end()) continue;
        if (opt->get_expected_min() == 0) {  // flag
            if (entry.values.size() != 1 ||
                (entry.values[0] != "true" && entry.values[0] != "false" &&
                 entry.values[0] != "1" && entry.values[0] != "0")) {
                throw ConfigError(config_path + ": flag '" + entry.key +
                                  "' takes true or false");
            }
            if (entry.values[0] == "true" || entry.values[0] == "1") {
                inserted.push_back("--" + entry.key);
            }
        } else {
            if (entry.values.empty()) {
                throw ConfigError(config_path + ": key '" + entry.key + "' needs a value");
            }
            for (const auto& value : entry.values) {
                inserted.push_back("--" + entry.key);
                inserted.push_back(value);
            }
        }
    }
    args.insert(args.begin() + sub_pos + 1, inserted.begin(), inserted.end());
    return args;
}

void configure_subcommand(CLI::App* sub, std::string& sink) {
    sub->add_option("--config", sink, "Read options from a config file (flags override)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DenseHMM: hidden Markov models with dense vector representations"};
    app.require_subcommand(1);
    std::string config_sink;

    FitOpts fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Train one model and write its artifacts");
    configure_subcommand(fit_cmd, config_sink);
    fit_cmd->add_option("--model", fit.model, "Model family")
        ->required()
        ->check(CLI::IsMember({"stand", "dense-em", "dense-direct"}));
    fit_cmd->add_option("--data", fit.data, "Training sequences (one per line)");
    fit_cmd->add_flag("--synthetic", fit.synthetic, "Sample training data from a random HMM");
    fit_cmd->add_option("--syn-n", fit.syn_n, "Synthetic generator states (= symbols)");
    fit_cmd->add_option("--syn-seqs", fit.syn_seqs, "Synthetic training sequences");
    fit_cmd->add_option("--syn-len", fit.syn_len, "Synthetic sequence length");
    fit_cmd->add_option("--syn-alpha", fit.syn_alpha, "Dirichlet concentration of the generator");
    fit_cmd->add_option("--max-len", fit.max_len, "Truncate sequences to this length (0 = off)");
    fit_cmd->add_option("--merge-threshold", fit.merge_threshold,
                        "Merge rare symbols below this cumulative frequency (0 = off)");
    fit_cmd->add_option("--n", fit.n, "Hidden states");
    fit_cmd->add_option("--l", fit.l, "Representation length (dense models)");
    fit_cmd->add_option("--em-iters", fit.em_iters, "Max EM iterations");
    fit_cmd->add_option("--em-tol", fit.em_tol, "EM relative improvement threshold");
    fit_cmd->add_option("--mstep-steps", fit.mstep_steps, "Gradient steps per dense M-step");
    fit_cmd->add_option("--mstep-lr", fit.mstep_lr, "Dense M-step learning rate");
    fit_cmd->add_option("--steps", fit.steps, "Direct co-occurrence descent steps");
    fit_cmd->add_option("--lr", fit.lr, "Direct co-occurrence learning rate");
    fit_cmd->add_option("--seed", fit.seed, "RNG seed");
    fit_cmd->add_option("--out", fit.out, "Output directory")->required();
    fit_cmd->callback([&fit] {
        require(fit.synthetic == fit.data.empty(),
                "exactly one of --data and --synthetic is required");
        run_fit(fit);
    });

    ScoreOpts score;
    CLI::App* score_cmd =
        app.add_subcommand("score", "Normalized NLL of a model on test sequences");
    configure_subcommand(score_cmd, config_sink);
    score_cmd->add_option("--params", score.params, "Model file (params or reps)")->required();
    score_cmd->add_option("--data", score.data, "Test sequences")->required();
    score_cmd->add_option("--max-len", score.max_len, "Truncate sequences (0 = off)");
    score_cmd->add_option("--out", score.out, "Also write the score to this file");
    score_cmd->callback([&score] { run_score(score); });

    SampleOpts smp;
    CLI::App* sample_cmd = app.add_subcommand("sample", "Sample sequences from a saved model");
    configure_subcommand(sample_cmd, config_sink);
    sample_cmd->add_option("--params", smp.params, "Model file (params or reps)")->required();
    sample_cmd->add_option("--num-seqs", smp.num_seqs, "Number of sequences");
    sample_cmd->add_option("--len", smp.len, "Length of every sequence");
    sample_cmd->add_option("--seed", smp.seed, "RNG seed");
    sample_cmd->add_option("--out", smp.out, "Output file (line format)")->required();
    sample_cmd->callback([&smp] { run_sample(smp); });

    CoocOpts cooc;
    CLI::App* cooc_cmd = app.add_subcommand("cooc", "Co-occurrence matrix of data or a model");
    configure_subcommand(cooc_cmd, config_sink);
    cooc_cmd->add_option("--data", cooc.data, "Sequences for the empirical matrix");
    cooc_cmd->add_option("--params", cooc.params, "Model file for the analytic matrix");
    cooc_cmd->add_flag("--analytic", cooc.analytic,
                       "Compute B^T diag(pi) A B (pi must be stationary)");
    cooc_cmd->add_option("--mad", cooc.mad_other,
                         "Also print the mean absolute deviation against this CSV matrix");
    cooc_cmd->add_option("--out", cooc.out, "Output CSV (default: standard output)");
    cooc_cmd->callback([&cooc] { run_cooc(cooc); });

    StudyOpts study;
    CLI::App* study_cmd =
        app.add_subcommand("factor-study", "Softmax vs normAbsLin factorization study");
    configure_subcommand(study_cmd, config_sink);
    study_cmd->add_option("--cell", study.cells, "Grid cell NxL (repeatable)")->required();
    study_cmd->add_option("--replicas", study.replicas, "Ground truths per cell and kernel");
    study_cmd->add_option("--alpha", study.alpha, "Dirichlet concentration of ground truths");
    study_cmd->add_option("--steps", study.steps, "Adam steps per fit");
    study_cmd->add_option("--lr", study.lr, "Learning rate");
    study_cmd->add_option("--seed", study.seed, "RNG seed");
    study_cmd->add_option("--jobs", study.jobs, "Worker threads");
    study_cmd->add_option("--out", study.out, "Output directory")->required();
    study_cmd->callback([&study] { run_factor_study(study); });

    ExperimentOpts exp;
    CLI::App* exp_cmd =
        app.add_subcommand("experiment", "Four-model comparison over an (n, l) grid");
    configure_subcommand(exp_cmd, config_sink);
    exp_cmd->add_option("--data", exp.data, "Corpus file (omit for synthetic data)");
    exp_cmd->add_option("--cell", exp.cells, "Grid cell NxL (repeatable)")->required();
    exp_cmd->add_option("--replicas", exp.replicas, "Replicas per cell");
    exp_cmd->add_option("--models", exp.models, "Models to train")
        ->check(CLI::IsMember({"stand", "stand_fair", "dense_em", "dense_direct"}));
    exp_cmd->add_option("--alpha", exp.alpha, "Synthetic generator Dirichlet concentration");
    exp_cmd->add_option("--seqs", exp.seqs, "Synthetic sequences per split");
    exp_cmd->add_option("--seq-len", exp.seq_len, "Synthetic sequence length");
    exp_cmd->add_option("--max-len", exp.max_len, "Truncate corpus sequences (0 = off)");
    exp_cmd->add_option("--merge-threshold", exp.merge_threshold,
                        "Merge rare symbols below this cumulative frequency (0 = off)");
    exp_cmd->add_option("--test-fraction", exp.test_fraction, "Test share of corpus splits");
    exp_cmd->add_option("--em-iters", exp.em_iters, "Max EM iterations");
    exp_cmd->add_option("--em-tol", exp.em_tol, "EM relative improvement threshold");
    exp_cmd->add_option("--mstep-steps", exp.mstep_steps, "Gradient steps per dense M-step");
    exp_cmd->add_option("--mstep-lr", exp.mstep_lr, "Dense M-step learning rate");
    exp_cmd->add_option("--steps", exp.steps, "Direct co-occurrence descent steps");
    exp_cmd->add_option("--lr", exp.lr, "Direct co-occurrence learning rate");
    exp_cmd->add_option("--seed", exp.seed, "RNG seed");
    exp_cmd->add_option("--jobs", exp.jobs, "Worker threads");
    exp_cmd->add_option("--out", exp.out, "Output directory")->required();
    exp_cmd->callback([&exp] { run_experiment_cmd(exp); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(app, std::move(args));
        std::reverse(args.begin(), args.end());  // CLI::App::parse consumes from the back
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
