#pragma once

#include "densehmm/common.hpp"
#include "densehmm/corpus.hpp"
#include "densehmm/dense_repr.hpp"
#include "densehmm/hmm_core.hpp"
#include "densehmm/train_em.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace densehmm {

/// Checkpoint formats. Both are line-oriented UTF-8 text with numbers printed
/// as %.17g (bit-exact double round trips), matrices row-major, one row per
/// line, entries separated by single spaces.
///
///   densehmm-params v1          densehmm-reps v1
///   n <n>                       n <n>
///   m <m>                       m <m>
///   A                           l <l>
///   <n rows of n>               U
///   B                           <n rows of l>
///   <n rows of m>               Z
///   pi                          <n rows of l>
///   <1 row of n>                W
///                               <n rows of l>
///                               V
///                               <m rows of l>
///                               z_start
///                               <1 row of l>
///
/// Either file may end with an optional vocabulary block:
///   vocab <m>
///   <m symbol lines>
///   residual <symbol>           (only if a residual symbol exists)
struct ParamsFile {
    HmmParams params;
    std::optional<Vocabulary> vocab;
};

struct RepsFile {
    DenseReps reps;
    std::optional<Vocabulary> vocab;
};

void save_params_file(const ParamsFile& file, std::ostream& out);
void save_params_file(const ParamsFile& file, const std::filesystem::path& path);
ParamsFile load_params_file(std::istream& in);
ParamsFile load_params_file(const std::filesystem::path& path);

void save_reps_file(const RepsFile& file, std::ostream& out);
void save_reps_file(const RepsFile& file, const std::filesystem::path& path);
RepsFile load_reps_file(std::istream& in);
RepsFile load_reps_file(const std::filesystem::path& path);

/// Loads either format by its header line; a reps file is materialized.
/// Malformed content throws DataError.
ParamsFile load_model(const std::filesystem::path& path);

/// EM convergence trace: iteration,total_log_likelihood,lagrangian (the last
/// column is blank for Baum-Welch rows and the converged-only final row).
void write_em_trace_csv(const EmTrace& trace, std::ostream& out);

/// Descent trace: step,loss with step counting from 0 (initial loss).
void write_loss_trace_csv(const std::vector<double>& losses, std::ostream& out);

/// m x m co-occurrence values as plain CSV rows (no header).
void write_matrix_csv(const Matrix& m, std::ostream& out);
Matrix load_matrix_csv(const std::filesystem::path& path);

}  // namespace densehmm
