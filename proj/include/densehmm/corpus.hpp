#pragma once

#include "densehmm/common.hpp"
#include "densehmm/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace densehmm {

/// Bijection between surface symbols and the contiguous index range [0, m).
struct Vocabulary {
    std::vector<std::string> symbols;                 // index -> surface string
    std::unordered_map<std::string, int> index_of;    // surface string -> index
    std::optional<std::string> residual_symbol;       // absorbs merged rare symbols

    int size() const { return static_cast<int>(symbols.size()); }

    /// Builds the reverse map from `symbols`.
    static Vocabulary from_symbols(std::vector<std::string> symbols,
                                   std::optional<std::string> residual = std::nullopt);
};

struct SequenceDataset {
    std::vector<std::vector<std::int32_t>> sequences;
    Vocabulary vocab;

    std::size_t num_sequences() const { return sequences.size(); }
    std::size_t total_tokens() const;
};

/// Reads a line-per-sequence text file: tokens separated by runs of spaces or
/// tabs, vocabulary in first-appearance order. Rejects missing/empty files and
/// lines with zero tokens (reported with their 1-based line number).
SequenceDataset load_sequences(const std::filesystem::path& path);

/// Same file format, but tokens are resolved against an existing vocabulary
/// (for scoring against a trained model). Unknown symbols map onto the
/// residual symbol when one exists, otherwise they are an error.
SequenceDataset load_sequences_with_vocab(const std::filesystem::path& path,
                                          const Vocabulary& vocab);

/// Writes the dataset back in the same line format.
void save_sequences(const SequenceDataset& ds, const std::filesystem::path& path);

/// Cuts every sequence after max_len tokens.
SequenceDataset truncate(const SequenceDataset& ds, std::size_t max_len);

/// Ranks symbols by ascending frequency (ties broken by vocabulary index) and
/// replaces the largest prefix whose cumulative relative frequency stays
/// strictly below the threshold by a single residual symbol. The vocabulary is
/// re-indexed compactly with all surviving symbols in their original order and
/// the residual appended last. Frequencies are counted over `ds` as given, so
/// the intended pipeline order is truncate first, then merge.
SequenceDataset merge_rare_symbols(const SequenceDataset& ds, double cumulative_threshold);

/// Seeded shuffle followed by a partition into (train, test). The test side
/// receives round(test_fraction * N) sequences, clamped so both sides are
/// nonempty.
std::pair<SequenceDataset, SequenceDataset> split_train_test(const SequenceDataset& ds,
                                                             double test_fraction,
                                                             std::uint64_t seed);

}  // namespace densehmm
