#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "modediag/conic.hpp"
#include "modediag/errors.hpp"
#include "modediag/interior_point.hpp"

namespace modediag {

// ---------------------------------------------------------------- LinExpr

LinExpr LinExpr::variable(int index, double coef) {
    LinExpr e;
    if (coef != 0.0) e.terms_.emplace_back(index, coef);
    return e;
}

double LinExpr::coefficient(int index) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), index,
                               [](const auto& t, int v) { return t.first < v; });
    return (it != terms_.end() && it->first == index) ? it->second : 0.0;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
    constant_ += other.constant_;
    if (other.terms_.empty()) return *this;
    std::vector<std::pair<int, double>> merged;
    merged.reserve(terms_.size() + other.terms_.size());
    auto a = terms_.begin();
    auto b = other.terms_.begin();
    while (a != terms_.end() || b != other.terms_.end()) {
        if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
            merged.push_back(*a++);
        } else if (a == terms_.end() || b->first < a->first) {
            merged.push_back(*b++);
        } else {
            const double c = a->second + b->second;
            if (c != 0.0) merged.emplace_back(a->first, c);
            ++a;
            ++b;
        }
    }
    terms_ = std::move(merged);
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) { return *this += -other; }

LinExpr& LinExpr::operator*=(double s) {
    constant_ *= s;
    if (s == 0.0) {
        terms_.clear();
    } else {
        for (auto& t : terms_) t.second *= s;
    }
    return *this;
}

double LinExpr::evaluate(const Eigen::VectorXd& x) const {
    double v = constant_;
    for (const auto& [i, c] : terms_) v += c * x(i);
    return v;
}

bool LinExpr::approx_equal(const LinExpr& other, double tol) const {
    LinExpr diff = *this - other;
    if (std::abs(diff.constant_) > tol) return false;
    return std::all_of(diff.terms_.begin(), diff.terms_.end(),
                       [tol](const auto& t) { return std::abs(t.second) <= tol; });
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator-(LinExpr a) { return a *= -1.0; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

// ---------------------------------------------------------------- ExprMatrix

ExprMatrix::ExprMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

ExprMatrix::ExprMatrix(const Eigen::MatrixXd& constant) : ExprMatrix(constant.rows(), constant.cols()) {
    for (Eigen::Index r = 0; r < rows_; ++r)
        for (Eigen::Index c = 0; c < cols_; ++c) (*this)(r, c) = LinExpr(constant(r, c));
}

ExprMatrix ExprMatrix::identity(Eigen::Index n, double scale) {
    ExprMatrix M(n, n);
    for (Eigen::Index k = 0; k < n; ++k) M(k, k) = LinExpr(scale);
    return M;
}

ExprMatrix ExprMatrix::blocks(const std::vector<std::vector<ExprMatrix>>& grid) {
    if (grid.empty()) return {};
    const std::size_t ncols = grid.front().size();
    std::vector<Eigen::Index> heights, widths(ncols, -1);
    for (const auto& row : grid) {
        if (row.size() != ncols) throw DimensionError("ragged block grid");
        heights.push_back(row.front().rows());
        for (std::size_t c = 0; c < ncols; ++c) {
            if (row[c].rows() != heights.back()) throw DimensionError("block heights disagree");
            if (widths[c] < 0) widths[c] = row[c].cols();
            if (row[c].cols() != widths[c]) throw DimensionError("block widths disagree");
        }
    }
    Eigen::Index total_r = 0, total_c = 0;
    for (auto h : heights) total_r += h;
    for (auto w : widths) total_c += w;
    ExprMatrix out(total_r, total_c);
    Eigen::Index r0 = 0;
    for (std::size_t br = 0; br < grid.size(); ++br) {
        Eigen::Index c0 = 0;
        for (std::size_t bc = 0; bc < ncols; ++bc) {
            const auto& blk = grid[br][bc];
            for (Eigen::Index r = 0; r < blk.rows(); ++r)
                for (Eigen::Index c = 0; c < blk.cols(); ++c) out(r0 + r, c0 + c) = blk(r, c);
            c0 += widths[bc];
        }
        r0 += heights[br];
    }
    return out;
}

ExprMatrix ExprMatrix::transpose() const {
    ExprMatrix t(cols_, rows_);
    for (Eigen::Index r = 0; r < rows_; ++r)
        for (Eigen::Index c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

ExprMatrix ExprMatrix::block(Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc) const {
    if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("block out of range");
    ExprMatrix b(nr, nc);
    for (Eigen::Index r = 0; r < nr; ++r)
        for (Eigen::Index c = 0; c < nc; ++c) b(r, c) = (*this)(r0 + r, c0 + c);
    return b;
}

Eigen::MatrixXd ExprMatrix::evaluate(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd M(rows_, cols_);
    for (Eigen::Index r = 0; r < rows_; ++r)
        for (Eigen::Index c = 0; c < cols_; ++c) M(r, c) = (*this)(r, c).evaluate(x);
    return M;
}

bool ExprMatrix::is_symmetric(double tol) const {
    if (rows_ != cols_) return false;
    for (Eigen::Index r = 0; r < rows_; ++r)
        for (Eigen::Index c = 0; c < r; ++c)
            if (!(*this)(r, c).approx_equal((*this)(c, r), tol)) return false;
    return true;
}

ExprMatrix& ExprMatrix::operator+=(const ExprMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("ExprMatrix sum shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

ExprMatrix& ExprMatrix::operator-=(const ExprMatrix& other) { return *this += -other; }

ExprMatrix operator+(ExprMatrix a, const ExprMatrix& b) { return a += b; }
ExprMatrix operator-(ExprMatrix a, const ExprMatrix& b) { return a -= b; }
ExprMatrix operator-(const ExprMatrix& a) { return -1.0 * a; }

ExprMatrix operator*(double s, ExprMatrix a) {
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) *= s;
    return a;
}

ExprMatrix operator*(const Eigen::MatrixXd& M, const ExprMatrix& a) {
    if (M.cols() != a.rows()) throw DimensionError("matrix * ExprMatrix shape mismatch");
    ExprMatrix out(M.rows(), a.cols());
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index k = 0; k < M.cols(); ++k) {
            const double m = M(r, k);
            if (m == 0.0) continue;
            for (Eigen::Index c = 0; c < a.cols(); ++c) out(r, c) += m * a(k, c);
        }
    return out;
}

ExprMatrix operator*(const ExprMatrix& a, const Eigen::MatrixXd& M) {
    return (M.transpose() * a.transpose()).transpose();
}

// ---------------------------------------------------------------- ConicProgram

const LinExpr& PsdConstraint::at(Eigen::Index r, Eigen::Index c) const {
    if (r < c) std::swap(r, c);
    // column-major lower triangle: column c starts after sum_{k<c} (size - k) entries
    const Eigen::Index offset = c * size - c * (c - 1) / 2;
    return lower[static_cast<std::size_t>(offset + (r - c))];
}

Eigen::MatrixXd PsdConstraint::evaluate(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd M(size, size);
    for (Eigen::Index c = 0; c < size; ++c)
        for (Eigen::Index r = c; r < size; ++r) M(r, c) = M(c, r) = at(r, c).evaluate(x);
    return M;
}

double ConstraintCheck::max_violation() const {
    return std::max({max_equality, max_inequality, std::max(0.0, -min_psd_eigenvalue)});
}

int ConicProgram::add_variable(std::string name) {
    names_.push_back(std::move(name));
    return static_cast<int>(names_.size()) - 1;
}

LinExpr ConicProgram::var(int index) const {
    if (index < 0 || index >= num_variables()) throw IndexError("undeclared variable " + std::to_string(index));
    return LinExpr::variable(index);
}

ExprMatrix ConicProgram::add_matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    ExprMatrix M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            M(r, c) = var(add_variable(name + "[" + std::to_string(r) + "," + std::to_string(c) + "]"));
    return M;
}

ExprMatrix ConicProgram::add_symmetric(const std::string& name, Eigen::Index n) {
    ExprMatrix M(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = c; r < n; ++r) {
            M(r, c) = var(add_variable(name + "[" + std::to_string(r) + "," + std::to_string(c) + "]"));
            M(c, r) = M(r, c);
        }
    return M;
}

void ConicProgram::check_declared(const LinExpr& e) const {
    for (const auto& [i, c] : e.terms()) {
        if (i < 0 || i >= num_variables()) throw IndexError("constraint references undeclared variable");
    }
}

void ConicProgram::add_equality(const LinExpr& expr, std::string label) {
    check_declared(expr);
    equalities_.push_back({expr, std::move(label)});
}

void ConicProgram::add_inequality(const LinExpr& expr, std::string label) {
    check_declared(expr);
    inequalities_.push_back({expr, std::move(label)});
}

void ConicProgram::add_psd(const ExprMatrix& M, std::string label) {
    if (M.rows() != M.cols()) throw DimensionError("PSD block must be square");
    if (!M.is_symmetric(1e-14)) throw DimensionError("PSD block '" + label + "' is not symmetric");
    PsdConstraint blk;
    blk.size = M.rows();
    blk.label = std::move(label);
    for (Eigen::Index c = 0; c < M.cols(); ++c)
        for (Eigen::Index r = c; r < M.rows(); ++r) {
            check_declared(M(r, c));
            blk.lower.push_back(M(r, c));
        }
    psd_.push_back(std::move(blk));
}

void ConicProgram::set_objective(const LinExpr& objective) {
    check_declared(objective);
    objective_ = objective;
}

ConstraintCheck ConicProgram::check(const Eigen::VectorXd& x) const {
    ConstraintCheck out;
    out.min_psd_eigenvalue = std::numeric_limits<double>::infinity();
    double worst = 0.0;
    auto note = [&](double v, const std::string& label) {
        if (v > worst) {
            worst = v;
            out.worst_label = label;
        }
    };
    for (const auto& e : equalities_) {
        const double v = std::abs(e.expr.evaluate(x));
        out.max_equality = std::max(out.max_equality, v);
        note(v, e.label);
    }
    for (const auto& e : inequalities_) {
        const double v = std::max(0.0, -e.expr.evaluate(x));
        out.max_inequality = std::max(out.max_inequality, v);
        note(v, e.label);
    }
    for (const auto& blk : psd_) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.evaluate(x), Eigen::EigenvaluesOnly);
        const double m = es.eigenvalues().minCoeff();
        out.min_psd_eigenvalue = std::min(out.min_psd_eigenvalue, m);
        note(-m, blk.label);
    }
    return out;
}

namespace {

void write_expr(std::ostringstream& os, const LinExpr& e) {
    os.precision(17);
    os << e.constant();
    for (const auto& [i, c] : e.terms()) os << (c < 0 ? " - " : " + ") << std::abs(c) << "*x" << i;
}

}  // namespace

std::string ConicProgram::dump() const {
    std::ostringstream os;
    os << "format_version 1\n";
    os << "variables " << names_.size() << "\n";
    for (std::size_t i = 0; i < names_.size(); ++i) os << "  x" << i << " " << names_[i] << "\n";
    os << "objective ";
    write_expr(os, objective_);
    os << "\nequalities " << equalities_.size() << "\n";
    for (const auto& e : equalities_) {
        os << "  [" << e.label << "] ";
        write_expr(os, e.expr);
        os << " == 0\n";
    }
    os << "inequalities " << inequalities_.size() << "\n";
    for (const auto& e : inequalities_) {
        os << "  [" << e.label << "] ";
        write_expr(os, e.expr);
        os << " >= 0\n";
    }
    os << "psd_blocks " << psd_.size() << "\n";
    for (const auto& blk : psd_) {
        os << "  block [" << blk.label << "] size " << blk.size << "\n";
        for (Eigen::Index c = 0; c < blk.size; ++c)
            for (Eigen::Index r = c; r < blk.size; ++r) {
                const auto& e = blk.at(r, c);
                if (e.is_constant() && e.constant() == 0.0) continue;
                os << "    (" << r << "," << c << ") ";
                write_expr(os, e);
                os << "\n";
            }
    }
    return os.str();
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

SolveReport solve(ConicSolver& backend, const ConicProgram& program, double tol) {
    if (!(tol > 0.0)) throw DomainError("solver tolerance must be positive");
    SolveReport report = backend.solve_raw(program, tol);
    report.tolerance = tol;
    if (report.status != SolveStatus::Optimal) return report;

    if (report.x.size() != program.num_variables() || !report.x.allFinite()) {
        report.status = SolveStatus::NumericalFailure;
        report.message = "backend returned a malformed point";
        return report;
    }
    const ConstraintCheck chk = program.check(report.x);
    report.max_violation = chk.max_violation();
    report.objective = program.objective().evaluate(report.x);
    if (report.max_violation > tol) {
        report.status = SolveStatus::NumericalFailure;
        report.message = "post-solve check failed: violation " + std::to_string(report.max_violation) + " at '" +
                         chk.worst_label + "'";
    }
    return report;
}

SolveReport solve(const ConicProgram& program, double tol) {
    InteriorPointSolver backend;
    return solve(backend, program, tol);
}

}  // namespace modediag
