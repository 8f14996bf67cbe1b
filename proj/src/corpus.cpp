#include "densehmm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace densehmm {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

void strip_trailing_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Vocabulary Vocabulary::from_symbols(std::vector<std::string> symbols,
                                    std::optional<std::string> residual) {
    Vocabulary v;
    v.symbols = std::move(symbols);
    v.residual_symbol = std::move(residual);
    for (std::size_t i = 0; i < v.symbols.size(); ++i) {
        v.index_of[v.symbols[i]] = static_cast<int>(i);
    }
    return v;
}

std::size_t SequenceDataset::total_tokens() const {
    std::size_t total = 0;
    for (const auto& s : sequences) total += s.size();
    return total;
}

SequenceDataset load_sequences(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    SequenceDataset ds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_trailing_cr(line);
        const auto tokens = tokenize(line);
        if (tokens.empty()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": line has no tokens");
        }
        std::vector<std::int32_t> seq;
        seq.reserve(tokens.size());
        for (const auto& tok : tokens) {
            auto it = ds.vocab.index_of.find(tok);
            int idx;
            if (it == ds.vocab.index_of.end()) {
                idx = ds.vocab.size();
                ds.vocab.symbols.push_back(tok);
                ds.vocab.index_of.emplace(tok, idx);
            } else {
                idx = it->second;
            }
            seq.push_back(idx);
        }
        ds.sequences.push_back(std::move(seq));
    }
    if (ds.sequences.empty()) throw DataError(path.string() + ": file is empty");
    return ds;
}

SequenceDataset load_sequences_with_vocab(const std::filesystem::path& path,
                                          const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    int residual_idx = -1;
    if (vocab.residual_symbol) {
        auto it = vocab.index_of.find(*vocab.residual_symbol);
        if (it != vocab.index_of.end()) residual_idx = it->second;
    }

    SequenceDataset ds;
    ds.vocab = vocab;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_trailing_cr(line);
        const auto tokens = tokenize(line);
        if (tokens.empty()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": line has no tokens");
        }
        std::vector<std::int32_t> seq;
        seq.reserve(tokens.size());
        for (const auto& tok : tokens) {
            auto it = vocab.index_of.find(tok);
            if (it != vocab.index_of.end()) {
                seq.push_back(it->second);
            } else if (residual_idx >= 0) {
                seq.push_back(residual_idx);
            } else {
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": unknown symbol '" + tok + "'");
            }
        }
        ds.sequences.push_back(std::move(seq));
    }
    if (ds.sequences.empty()) throw DataError(path.string() + ": file is empty");
    return ds;
}

void save_sequences(const SequenceDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    for (const auto& seq : ds.sequences) {
        for (std::size_t t = 0; t < seq.size(); ++t) {
            if (t > 0) out << ' ';
            out << ds.vocab.symbols.at(seq[t]);
        }
        out << '\n';
    }
}

SequenceDataset truncate(const SequenceDataset& ds, std::size_t max_len) {
    require(max_len >= 1, "truncate: max_len must be >= 1");
    SequenceDataset out;
    out.vocab = ds.vocab;
    out.sequences.reserve(ds.sequences.size());
    for (const auto& seq : ds.sequences) {
        if (seq.size() <= max_len) {
            out.sequences.push_back(seq);
        } else {
            out.sequences.emplace_back(seq.begin(), seq.begin() + max_len);
        }
    }
    return out;
}

SequenceDataset merge_rare_symbols(const SequenceDataset& ds, double cumulative_threshold) {
    require(cumulative_threshold >= 0.0 && cumulative_threshold < 1.0,
            "merge_rare_symbols: threshold must be in [0,1)");
    const int m = ds.vocab.size();

    std::vector<std::size_t> counts(m, 0);
    std::size_t total = 0;
    for (const auto& seq : ds.sequences) {
        for (const auto idx : seq) {
            ++counts.at(idx);
            ++total;
        }
    }
    if (total == 0) throw DataError("merge_rare_symbols: dataset has no tokens");

    // Ascending frequency, ties by vocabulary index.
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return counts[a] < counts[b]; });

    std::vector<bool> merged(m, false);
    std::size_t cum = 0;
    int n_merged = 0;
    for (int idx : order) {
        const std::size_t next = cum + counts[idx];
        if (static_cast<double>(next) / static_cast<double>(total) < cumulative_threshold) {
            merged[idx] = true;
            cum = next;
            ++n_merged;
        } else {
            break;
        }
    }
    if (n_merged == 0) return ds;
    if (n_merged == m) {
        throw std::invalid_argument("merge_rare_symbols: threshold would merge every symbol");
    }

    std::string residual = "<rare>";
    while (ds.vocab.index_of.count(residual)) residual += '_';

    // Surviving symbols keep their relative order; residual goes last.
    std::vector<std::string> new_symbols;
    std::vector<int> remap(m, -1);
    for (int i = 0; i < m; ++i) {
        if (!merged[i]) {
            remap[i] = static_cast<int>(new_symbols.size());
            new_symbols.push_back(ds.vocab.symbols[i]);
        }
    }
    const int residual_idx = static_cast<int>(new_symbols.size());
    new_symbols.push_back(residual);
    for (int i = 0; i < m; ++i) {
        if (merged[i]) remap[i] = residual_idx;
    }

    SequenceDataset out;
    out.vocab = Vocabulary::from_symbols(std::move(new_symbols), residual);
    out.sequences.reserve(ds.sequences.size());
    for (const auto& seq : ds.sequences) {
        std::vector<std::int32_t> mapped;
        mapped.reserve(seq.size());
        for (const auto idx : seq) mapped.push_back(remap[idx]);
        out.sequences.push_back(std::move(mapped));
    }
    return out;
}

std::pair<SequenceDataset, SequenceDataset> split_train_test(const SequenceDataset& ds,
                                                             double test_fraction,
                                                             std::uint64_t seed) {
    require(test_fraction > 0.0 && test_fraction < 1.0,
            "split_train_test: test_fraction must be in (0,1)");
    const std::size_t n = ds.sequences.size();
    require(n >= 2, "split_train_test: need at least 2 sequences");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {  // Fisher-Yates
        const std::size_t j = rng.uniform_int(i + 1);
        std::swap(order[i], order[j]);
    }

    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

    SequenceDataset train, test;
    train.vocab = ds.vocab;
    test.vocab = ds.vocab;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = (i < n_test) ? test : train;
        dst.sequences.push_back(ds.sequences[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace densehmm
