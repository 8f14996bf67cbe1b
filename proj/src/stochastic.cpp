#include "densehmm/stochastic.hpp"

#include <cmath>
#include <string>

namespace densehmm {

namespace {

void check_rows_sum_to_one(const Matrix& p, double tol, const char* what) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            const double x = p(i, j);
            if (!(x >= 0.0 && x <= 1.0)) {
                throw NumericError(std::string(what) + ": entry out of [0,1] at row " +
                                   std::to_string(i));
            }
            s += x;
        }
        if (std::abs(s - 1.0) > tol) {
            throw NumericError(std::string(what) + ": row " + std::to_string(i) +
                               " sums to " + std::to_string(s));
        }
    }
}

}  // namespace

void StochasticMatrix::check(double tol) const { check_rows_sum_to_one(p, tol, "StochasticMatrix"); }

void ProbVector::check(double tol) const {
    check_rows_sum_to_one(p.transpose(), tol, "ProbVector");
}

StochasticMatrix row_softmax(const Matrix& logits) {
    if (!logits.allFinite()) throw std::invalid_argument("row_softmax: non-finite input");
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double shift = logits.row(i).maxCoeff();
        out.row(i) = (logits.row(i).array() - shift).exp();
        out.row(i) /= out.row(i).sum();
    }
    return {out};
}

ProbVector softmax(const Vector& logits) {
    if (!logits.allFinite()) throw std::invalid_argument("softmax: non-finite input");
    Vector out = (logits.array() - logits.maxCoeff()).exp();
    out /= out.sum();
    return {out};
}

StochasticMatrix norm_abs_lin(const Matrix& m) {
    Matrix out = m.cwiseAbs();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double s = out.row(i).sum();
        if (s == 0.0) {
            throw std::invalid_argument("norm_abs_lin: row " + std::to_string(i) +
                                        " is identically zero");
        }
        out.row(i) /= s;
    }
    return {out};
}

StochasticMatrix sample_dirichlet_rows(int rows, int cols, double alpha, Rng& rng) {
    require(rows >= 1 && cols >= 1, "sample_dirichlet_rows: dimensions must be positive");
    require(alpha > 0.0, "sample_dirichlet_rows: alpha must be positive");
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        do {
            for (int j = 0; j < cols; ++j) {
                out(i, j) = rng.gamma(alpha);
                s += out(i, j);
            }
        } while (s == 0.0);  // all-underflow row, redraw
        out.row(i) /= s;
    }
    return {out};
}

ProbVector stationary_distribution(const StochasticMatrix& a) {
    require(a.rows() == a.cols(), "stationary_distribution: matrix must be square");
    const Eigen::Index n = a.rows();
    Vector pi = Vector::Constant(n, 1.0 / static_cast<double>(n));
    constexpr int kMaxIters = 10000;
    constexpr double kTol = 1e-13;
    double residual = 0.0;
    for (int it = 0; it < kMaxIters; ++it) {
        Vector next = a.p.transpose() * pi;
        next /= next.sum();
        residual = (next - pi).cwiseAbs().maxCoeff();
        pi = next;
        if (residual < kTol) return {pi};
    }
    throw NumericError("stationary_distribution: power iteration did not converge, residual " +
                       std::to_string(residual));
}

double log_sum_exp(const Vector& v) {
    require(v.size() > 0, "log_sum_exp: empty input");
    if (v.size() == 1) return v[0];
    const double shift = v.maxCoeff();
    if (!std::isfinite(shift)) return shift;  // all -inf or contains +inf
    return shift + std::log((v.array() - shift).exp().sum());
}

int sample_categorical(const Eigen::Ref<const Eigen::RowVectorXd>& probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
}

}  // namespace densehmm
