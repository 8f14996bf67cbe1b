#include "densehmm/optim.hpp"

#include <cmath>

namespace densehmm {

namespace {

Eigen::Index copy_in(Vector& dst, Eigen::Index offset, const Matrix& src) {
    for (Eigen::Index i = 0; i < src.rows(); ++i) {
        for (Eigen::Index j = 0; j < src.cols(); ++j) dst[offset++] = src(i, j);
    }
    return offset;
}

Matrix copy_out(const Vector& src, Eigen::Index& offset, Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = src[offset++];
    }
    return out;
}

}  // namespace

FlatParams pack_dense_reps(const DenseReps& reps) {
    const Eigen::Index n = reps.U.rows();
    const Eigen::Index m = reps.V.rows();
    const Eigen::Index l = reps.z_start.size();
    FlatParams flat;
    flat.layout = {{"U", n, l}, {"Z", n, l}, {"W", n, l}, {"V", m, l}, {"z_start", l, 1}};
    flat.values.resize(3 * n * l + m * l + l);
    Eigen::Index off = 0;
    off = copy_in(flat.values, off, reps.U);
    off = copy_in(flat.values, off, reps.Z);
    off = copy_in(flat.values, off, reps.W);
    off = copy_in(flat.values, off, reps.V);
    copy_in(flat.values, off, reps.z_start);
    return flat;
}

DenseReps unpack_dense_reps(const FlatParams& flat) {
    require(flat.layout.size() == 5 && flat.layout[0].name == "U",
            "unpack_dense_reps: layout does not describe DenseReps");
    Eigen::Index off = 0;
    DenseReps reps;
    reps.U = copy_out(flat.values, off, flat.layout[0].rows, flat.layout[0].cols);
    reps.Z = copy_out(flat.values, off, flat.layout[1].rows, flat.layout[1].cols);
    reps.W = copy_out(flat.values, off, flat.layout[2].rows, flat.layout[2].cols);
    reps.V = copy_out(flat.values, off, flat.layout[3].rows, flat.layout[3].cols);
    reps.z_start = copy_out(flat.values, off, flat.layout[4].rows, 1);
    return reps;
}

FlatParams pack_blocks(const std::vector<std::pair<std::string, Matrix>>& blocks) {
    FlatParams flat;
    Eigen::Index total = 0;
    for (const auto& [name, mat] : blocks) {
        flat.layout.push_back({name, mat.rows(), mat.cols()});
        total += mat.size();
    }
    flat.values.resize(total);
    Eigen::Index off = 0;
    for (const auto& [name, mat] : blocks) off = copy_in(flat.values, off, mat);
    return flat;
}

Matrix block_as_matrix(const FlatParams& flat, const std::string& name) {
    Eigen::Index off = 0;
    for (const auto& block : flat.layout) {
        if (block.name == name) return copy_out(flat.values, off, block.rows, block.cols);
        off += block.rows * block.cols;
    }
    throw std::invalid_argument("block_as_matrix: no block named " + name);
}

AdamState make_adam_state(Eigen::Index num_params, double learning_rate) {
    AdamState state;
    state.m = Vector::Zero(num_params);
    state.v = Vector::Zero(num_params);
    state.learning_rate = learning_rate;
    return state;
}

FlatParams sgd_step(const FlatParams& params, const Vector& grad, double learning_rate) {
    require(grad.size() == params.size(), "sgd_step: gradient size mismatch");
    FlatParams out = params;
    out.values -= learning_rate * grad;
    return out;
}

Vector adam_direction(const Vector& grad, AdamState& state) {
    require(grad.size() == state.m.size(), "adam_direction: gradient size mismatch");
    ++state.t;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    const double m_corr = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double v_corr = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    const Vector mhat = state.m / m_corr;
    const Vector vhat = state.v / v_corr;
    return (-state.learning_rate * mhat.array() / (vhat.array().sqrt() + state.epsilon)).matrix();
}

FlatParams adam_step(const FlatParams& params, const Vector& grad, AdamState& state) {
    require(grad.size() == params.size(), "adam_step: gradient size mismatch");
    FlatParams out = params;
    out.values += adam_direction(grad, state);
    return out;
}

GradCheckReport check_gradient(const std::function<double(const Vector&)>& f,
                               const Vector& analytic_grad, const Vector& x, double h,
                               double tol) {
    require(analytic_grad.size() == x.size(), "check_gradient: gradient size mismatch");
    GradCheckReport report;
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("check_gradient: non-finite objective at coordinate " +
                               std::to_string(i));
        }
        const double fd = (fp - fm) / (2.0 * h);
        const double rel =
            std::abs(fd - analytic_grad[i]) / std::max(1.0, std::abs(analytic_grad[i]));
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
    }
    report.passed = report.max_rel_error < tol;
    return report;
}

}  // namespace densehmm
