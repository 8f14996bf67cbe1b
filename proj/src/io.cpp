#include "densehmm/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>

namespace densehmm {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_matrix_rows(const Matrix& m, std::ostream& out, char sep) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out << sep;
            out << fmt(m(i, j));
        }
        out << '\n';
    }
}

void write_vocab_block(const std::optional<Vocabulary>& vocab, std::ostream& out) {
    if (!vocab) return;
    out << "vocab " << vocab->size() << '\n';
    for (const auto& s : vocab->symbols) out << s << '\n';
    if (vocab->residual_symbol) out << "residual " << *vocab->residual_symbol << '\n';
}

/// Line cursor over the whole document; every error carries its 1-based line.
class Parser {
  public:
    explicit Parser(std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines_.push_back(line);
        }
    }

    bool at_end() const { return pos_ >= lines_.size(); }

    const std::string& next() {
        if (at_end()) fail("unexpected end of file");
        return lines_[pos_++];
    }

    const std::string* peek() const { return at_end() ? nullptr : &lines_[pos_]; }

    void expect(const std::string& literal) {
        const std::string& line = next();
        if (line != literal) fail("expected '" + literal + "', got '" + line + "'");
    }

    int labeled_int(const std::string& label) {
        std::istringstream ss(next());
        std::string key;
        long long value = 0;
        if (!(ss >> key >> value) || key != label || !drained(ss) || value < 0) {
            fail("expected '" + label + " <count>'");
        }
        return static_cast<int>(value);
    }

    Vector row(Eigen::Index count) {
        std::istringstream ss(next());
        Vector v(count);
        for (Eigen::Index j = 0; j < count; ++j) {
            if (!(ss >> v[j])) fail("expected " + std::to_string(count) + " numbers");
        }
        if (!drained(ss)) fail("trailing data after " + std::to_string(count) + " numbers");
        return v;
    }

    Matrix matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
        expect(name);
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) m.row(i) = row(cols);
        return m;
    }

    std::optional<Vocabulary> vocab_block() {
        if (at_end()) return std::nullopt;
        std::istringstream ss(*peek());
        std::string key;
        int count = 0;
        if (!(ss >> key) || key != "vocab") fail("expected 'vocab <count>' or end of file");
        if (!(ss >> count) || !drained(ss) || count < 0) fail("malformed vocab header");
        next();
        std::vector<std::string> symbols;
        symbols.reserve(count);
        std::unordered_set<std::string> seen;
        for (int i = 0; i < count; ++i) {
            const std::string& line = next();
            if (line.empty() || line.find_first_of(" \t") != std::string::npos) {
                fail("vocab symbols are single whitespace-free tokens");
            }
            if (!seen.insert(line).second) fail("duplicate vocab symbol '" + line + "'");
            symbols.push_back(line);
        }
        std::optional<std::string> residual;
        if (!at_end()) {
            std::istringstream rs(next());
            std::string rkey, rsym;
            if (!(rs >> rkey >> rsym) || rkey != "residual" || !drained(rs)) {
                fail("expected 'residual <symbol>' or end of file");
            }
            residual = rsym;
        }
        return Vocabulary::from_symbols(std::move(symbols), std::move(residual));
    }

    void expect_end() {
        if (!at_end()) fail("trailing content");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError("line " + std::to_string(pos_ == 0 ? 1 : pos_) + ": " + msg);
    }

  private:
    static bool drained(std::istringstream& ss) {
        std::string rest;
        return !(ss >> rest);
    }

    std::vector<std::string> lines_;
    std::size_t pos_ = 0;
};

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open for reading");
    return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    return out;
}

template <typename Fn>
auto with_path_context(const std::filesystem::path& path, Fn fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace

void save_params_file(const ParamsFile& file, std::ostream& out) {
    file.params.check();
    out << "densehmm-params v1\n";
    out << "n " << file.params.num_states() << '\n';
    out << "m " << file.params.num_symbols() << '\n';
    out << "A\n";
    write_matrix_rows(file.params.A.p, out, ' ');
    out << "B\n";
    write_matrix_rows(file.params.B.p, out, ' ');
    out << "pi\n";
    write_matrix_rows(file.params.pi.p.transpose(), out, ' ');
    write_vocab_block(file.vocab, out);
}

void save_params_file(const ParamsFile& file, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    save_params_file(file, out);
    if (!out) throw DataError(path.string() + ": write failed");
}

ParamsFile load_params_file(std::istream& in) {
    Parser p(in);
    p.expect("densehmm-params v1");
    const int n = p.labeled_int("n");
    const int m = p.labeled_int("m");
    if (n < 1 || m < 1) p.fail("n and m must be >= 1");
    ParamsFile file;
    file.params.A.p = p.matrix("A", n, n);
    file.params.B.p = p.matrix("B", n, m);
    p.expect("pi");
    file.params.pi.p = p.row(n);
    file.vocab = p.vocab_block();
    p.expect_end();
    if (file.vocab && file.vocab->size() != m) p.fail("vocab size does not match m");
    file.params.check();
    return file;
}

ParamsFile load_params_file(const std::filesystem::path& path) {
    return with_path_context(path, [&] {
        auto in = open_for_read(path);
        return load_params_file(in);
    });
}

void save_reps_file(const RepsFile& file, std::ostream& out) {
    file.reps.check();
    out << "densehmm-reps v1\n";
    out << "n " << file.reps.num_states() << '\n';
    out << "m " << file.reps.num_symbols() << '\n';
    out << "l " << file.reps.rep_length() << '\n';
    out << "U\n";
    write_matrix_rows(file.reps.U, out, ' ');
    out << "Z\n";
    write_matrix_rows(file.reps.Z, out, ' ');
    out << "W\n";
    write_matrix_rows(file.reps.W, out, ' ');
    out << "V\n";
    write_matrix_rows(file.reps.V, out, ' ');
    out << "z_start\n";
    write_matrix_rows(file.reps.z_start.transpose(), out, ' ');
    write_vocab_block(file.vocab, out);
}

void save_reps_file(const RepsFile& file, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    save_reps_file(file, out);
    if (!out) throw DataError(path.string() + ": write failed");
}

RepsFile load_reps_file(std::istream& in) {
    Parser p(in);
    p.expect("densehmm-reps v1");
    const int n = p.labeled_int("n");
    const int m = p.labeled_int("m");
    const int l = p.labeled_int("l");
    if (n < 1 || m < 1 || l < 1) p.fail("n, m and l must be >= 1");
    RepsFile file;
    file.reps.U = p.matrix("U", n, l);
    file.reps.Z = p.matrix("Z", n, l);
    file.reps.W = p.matrix("W", n, l);
    file.reps.V = p.matrix("V", m, l);
    p.expect("z_start");
    file.reps.z_start = p.row(l);
    file.vocab = p.vocab_block();
    p.expect_end();
    if (file.vocab && file.vocab->size() != m) p.fail("vocab size does not match m");
    file.reps.check();
    return file;
}

RepsFile load_reps_file(const std::filesystem::path& path) {
    return with_path_context(path, [&] {
        auto in = open_for_read(path);
        return load_reps_file(in);
    });
}

ParamsFile load_model(const std::filesystem::path& path) {
    return with_path_context(path, [&]() -> ParamsFile {
        auto in = open_for_read(path);
        std::string header;
        std::getline(in, header);
        if (!header.empty() && header.back() == '\r') header.pop_back();
        in.clear();
        in.seekg(0);
        if (header == "densehmm-params v1") return load_params_file(in);
        if (header == "densehmm-reps v1") {
            RepsFile reps = load_reps_file(in);
            return ParamsFile{materialize(reps.reps), std::move(reps.vocab)};
        }
        throw DataError("unrecognized header '" + header + "'");
    });
}

void write_em_trace_csv(const EmTrace& trace, std::ostream& out) {
    out << "iteration,total_log_likelihood,lagrangian\n";
    for (const auto& row : trace.rows) {
        out << row.iteration << ',' << fmt(row.log_likelihood) << ',';
        if (row.lagrangian) out << fmt(*row.lagrangian);
        out << '\n';
    }
}

void write_loss_trace_csv(const std::vector<double>& losses, std::ostream& out) {
    out << "step,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i) {
        out << i << ',' << fmt(losses[i]) << '\n';
    }
}

void write_matrix_csv(const Matrix& m, std::ostream& out) {
    write_matrix_rows(m, out, ',');
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
    return with_path_context(path, [&]() -> Matrix {
        auto in = open_for_read(path);
        std::vector<std::vector<double>> rows;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) throw DataError("line " + std::to_string(lineno) + ": empty row");
            std::vector<double> row;
            std::istringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                std::size_t used = 0;
                double value = 0.0;
                try {
                    value = std::stod(cell, &used);
                } catch (const std::exception&) {
                    throw DataError("line " + std::to_string(lineno) + ": bad number '" + cell +
                                    "'");
                }
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) {
                    ++used;
                }
                if (used != cell.size()) {
                    throw DataError("line " + std::to_string(lineno) + ": bad number '" + cell +
                                    "'");
                }
                row.push_back(value);
            }
            if (!rows.empty() && row.size() != rows.front().size()) {
                throw DataError("line " + std::to_string(lineno) + ": ragged row");
            }
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw DataError("empty matrix file");
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < rows[i].size(); ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
        }
        return m;
    });
}

}  // namespace densehmm
