#include "densehmm/hmm_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace densehmm {

void HmmParams::check() const {
    require(A.rows() == A.cols(), "HmmParams: A must be square");
    require(B.rows() == A.rows(), "HmmParams: B row count must equal state count");
    require(pi.size() == A.rows(), "HmmParams: pi length must equal state count");
    A.check();
    B.check();
    pi.check();
}

std::vector<std::int32_t> sample(const HmmParams& params, int T, Rng& rng) {
    require(T >= 1, "sample: T must be >= 1");
    std::vector<std::int32_t> obs(T);
    int state = sample_categorical(params.pi.p.transpose(), rng);
    obs[0] = static_cast<std::int32_t>(sample_categorical(params.B.p.row(state), rng));
    for (int t = 1; t < T; ++t) {
        state = sample_categorical(params.A.p.row(state), rng);
        obs[t] = static_cast<std::int32_t>(sample_categorical(params.B.p.row(state), rng));
    }
    return obs;
}

namespace {

void check_symbols(const HmmParams& params, std::span<const std::int32_t> seq) {
    require(!seq.empty(), "forward_backward: empty sequence");
    const int m = params.num_symbols();
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (seq[t] < 0 || seq[t] >= m) {
            throw DataError("symbol " + std::to_string(seq[t]) + " at position " +
                            std::to_string(t) + " outside vocabulary of size " +
                            std::to_string(m));
        }
    }
}

/// Scaled forward pass. alpha.row(t) holds the normalized forward vector,
/// scale[t] the normalizer (so log P(o) = sum log scale[t]). With floor > 0,
/// a zero-probability step is floored instead of rejected: its scale becomes
/// `floor` and the state distribution is reset from floored emissions.
struct ForwardResult {
    Matrix alpha;
    Vector scale;
    std::size_t floored_steps = 0;
};

ForwardResult scaled_forward(const HmmParams& params, std::span<const std::int32_t> seq,
                             double floor) {
    const int n = params.num_states();
    const auto T = static_cast<Eigen::Index>(seq.size());
    ForwardResult r;
    r.alpha.resize(T, n);
    r.scale.resize(T);

    Eigen::RowVectorXd v = params.pi.p.transpose().cwiseProduct(params.B.p.col(seq[0]).transpose());
    for (Eigen::Index t = 0; t < T; ++t) {
        if (t > 0) {
            v = (r.alpha.row(t - 1) * params.A.p).cwiseProduct(params.B.p.col(seq[t]).transpose());
        }
        double s = v.sum();
        if (s <= 0.0) {
            if (floor <= 0.0) {
                throw NumericError("sequence impossible under model at position " +
                                   std::to_string(t));
            }
            ++r.floored_steps;
            s = floor;
            v = params.B.p.col(seq[t]).transpose().cwiseMax(floor);
            v /= v.sum();
            r.alpha.row(t) = v;
            r.scale[t] = s;
            continue;
        }
        r.alpha.row(t) = v / s;
        r.scale[t] = s;
    }
    return r;
}

}  // namespace

PosteriorStats forward_backward(const HmmParams& params, std::span<const std::int32_t> seq) {
    check_symbols(params, seq);
    const int n = params.num_states();
    const auto T = static_cast<Eigen::Index>(seq.size());

    const ForwardResult fwd = scaled_forward(params, seq, 0.0);

    // Backward vectors share the forward scales, so gamma_t = alpha_t .* beta_t
    // without further normalization.
    Matrix beta(T, n);
    beta.row(T - 1).setOnes();
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        const Eigen::RowVectorXd weighted =
            beta.row(t + 1).cwiseProduct(params.B.p.col(seq[t + 1]).transpose());
        beta.row(t) = (params.A.p * weighted.transpose()).transpose() / fwd.scale[t + 1];
    }

    PosteriorStats stats;
    stats.gamma = fwd.alpha.cwiseProduct(beta);
    stats.xi.reserve(T - 1);
    for (Eigen::Index t = 0; t + 1 < T; ++t) {
        const Eigen::RowVectorXd weighted =
            beta.row(t + 1).cwiseProduct(params.B.p.col(seq[t + 1]).transpose()) / fwd.scale[t + 1];
        Matrix slice = fwd.alpha.row(t).transpose() * weighted;
        slice.array() *= params.A.p.array();
        stats.xi.push_back(std::move(slice));
    }
    stats.log_likelihood = fwd.scale.array().log().sum();
    return stats;
}

double sequence_log_likelihood(const HmmParams& params, std::span<const std::int32_t> seq) {
    check_symbols(params, seq);
    return scaled_forward(params, seq, 0.0).scale.array().log().sum();
}

double brute_force_log_likelihood(const HmmParams& params, std::span<const std::int32_t> seq) {
    check_symbols(params, seq);
    const int n = params.num_states();
    const auto T = seq.size();
    double paths = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
        paths *= n;
        require(paths <= 1e6, "brute_force_log_likelihood: n^T exceeds 1e6");
    }

    const auto num_paths = static_cast<std::size_t>(paths);
    Vector log_probs(num_paths);
    std::vector<int> path(T);
    for (std::size_t p = 0; p < num_paths; ++p) {
        std::size_t rem = p;
        for (std::size_t t = 0; t < T; ++t) {
            path[t] = static_cast<int>(rem % n);
            rem /= n;
        }
        double lp = std::log(params.pi.p[path[0]]) + std::log(params.B.p(path[0], seq[0]));
        for (std::size_t t = 1; t < T; ++t) {
            lp += std::log(params.A.p(path[t - 1], path[t])) +
                  std::log(params.B.p(path[t], seq[t]));
        }
        log_probs[p] = lp;
    }
    const double ll = log_sum_exp(log_probs);
    if (!std::isfinite(ll)) throw NumericError("brute_force_log_likelihood: sequence impossible");
    return ll;
}

namespace {

std::size_t max_sequence_length(const SequenceDataset& test) {
    std::size_t max_len = 0;
    for (const auto& s : test.sequences) max_len = std::max(max_len, s.size());
    return max_len;
}

}  // namespace

double score_nll(const HmmParams& params, const SequenceDataset& test) {
    require(!test.sequences.empty(), "score_nll: empty test set");
    double total = 0.0;
    for (std::size_t i = 0; i < test.sequences.size(); ++i) {
        try {
            total += sequence_log_likelihood(params, test.sequences[i]);
        } catch (const NumericError& e) {
            throw NumericError("sequence " + std::to_string(i) + ": " + e.what());
        }
    }
    const double denom =
        static_cast<double>(test.sequences.size()) * static_cast<double>(max_sequence_length(test));
    return -total / denom;
}

FlooredNll score_nll_floored(const HmmParams& params, const SequenceDataset& test, double floor) {
    require(!test.sequences.empty(), "score_nll_floored: empty test set");
    require(floor > 0.0, "score_nll_floored: floor must be positive");
    FlooredNll out;
    double total = 0.0;
    for (const auto& seq : test.sequences) {
        check_symbols(params, seq);
        const ForwardResult fwd = scaled_forward(params, seq, floor);
        total += fwd.scale.array().log().sum();
        out.floored_steps += fwd.floored_steps;
    }
    const double denom =
        static_cast<double>(test.sequences.size()) * static_cast<double>(max_sequence_length(test));
    out.normalized_nll = -total / denom;
    return out;
}

}  // namespace densehmm
