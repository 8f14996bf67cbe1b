#pragma once

#include "densehmm/corpus.hpp"
#include "densehmm/hmm_core.hpp"
#include "densehmm/rng.hpp"
#include "densehmm/stochastic.hpp"

#include <string>
#include <vector>

namespace testutil {

using namespace densehmm;

inline HmmParams random_params(int n, int m, Rng& rng, double alpha = 1.0) {
    HmmParams p;
    p.A = sample_dirichlet_rows(n, n, alpha, rng);
    p.B = sample_dirichlet_rows(n, m, alpha, rng);
    StochasticMatrix pi_row = sample_dirichlet_rows(1, n, alpha, rng);
    p.pi.p = pi_row.p.row(0).transpose();
    return p;
}

inline SequenceDataset make_dataset(std::vector<std::vector<std::int32_t>> seqs, int m) {
    SequenceDataset ds;
    std::vector<std::string> symbols;
    for (int i = 0; i < m; ++i) symbols.push_back(std::to_string(i));
    ds.vocab = Vocabulary::from_symbols(std::move(symbols));
    ds.sequences = std::move(seqs);
    return ds;
}

inline SequenceDataset sampled_dataset(const HmmParams& params, int num_seqs, int len, Rng& rng) {
    std::vector<std::vector<std::int32_t>> seqs;
    seqs.reserve(num_seqs);
    for (int i = 0; i < num_seqs; ++i) seqs.push_back(sample(params, len, rng));
    return make_dataset(std::move(seqs), params.num_symbols());
}

}  // namespace testutil
