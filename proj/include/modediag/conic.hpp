#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace modediag {

inline constexpr double kDefaultTolerance = 1e-8;

/// Affine expression  constant + sum coef_k * x_{var_k}. Terms are kept sorted by variable.
class LinExpr {
public:
    LinExpr() = default;
    LinExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by intent
    static LinExpr variable(int index, double coef = 1.0);

    double constant() const noexcept { return constant_; }
    const std::vector<std::pair<int, double>>& terms() const noexcept { return terms_; }
    bool is_constant() const noexcept { return terms_.empty(); }
    double coefficient(int index) const;

    LinExpr& operator+=(const LinExpr& other);
    LinExpr& operator-=(const LinExpr& other);
    LinExpr& operator*=(double s);

    double evaluate(const Eigen::VectorXd& x) const;
    /// Same constant and coefficients within `tol`.
    bool approx_equal(const LinExpr& other, double tol = 0.0) const;

private:
    double constant_ = 0.0;
    std::vector<std::pair<int, double>> terms_;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a);
LinExpr operator*(double s, LinExpr a);

/// Dense matrix whose entries are affine expressions.
class ExprMatrix {
public:
    ExprMatrix() = default;
    ExprMatrix(Eigen::Index rows, Eigen::Index cols);
    explicit ExprMatrix(const Eigen::MatrixXd& constant);

    static ExprMatrix zeros(Eigen::Index rows, Eigen::Index cols) { return ExprMatrix(rows, cols); }
    static ExprMatrix identity(Eigen::Index n, double scale = 1.0);
    /// Assembles a block matrix. Every block row must share heights, every block column widths.
    static ExprMatrix blocks(const std::vector<std::vector<ExprMatrix>>& grid);

    Eigen::Index rows() const noexcept { return rows_; }
    Eigen::Index cols() const noexcept { return cols_; }
    LinExpr& operator()(Eigen::Index r, Eigen::Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    const LinExpr& operator()(Eigen::Index r, Eigen::Index c) const {
        return data_[static_cast<std::size_t>(r * cols_ + c)];
    }

    ExprMatrix transpose() const;
    ExprMatrix block(Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc) const;
    Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
    bool is_symmetric(double tol = 0.0) const;

    ExprMatrix& operator+=(const ExprMatrix& other);
    ExprMatrix& operator-=(const ExprMatrix& other);

private:
    Eigen::Index rows_ = 0, cols_ = 0;
    std::vector<LinExpr> data_;
};

ExprMatrix operator+(ExprMatrix a, const ExprMatrix& b);
ExprMatrix operator-(ExprMatrix a, const ExprMatrix& b);
ExprMatrix operator-(const ExprMatrix& a);
ExprMatrix operator*(double s, ExprMatrix a);
ExprMatrix operator*(const Eigen::MatrixXd& M, const ExprMatrix& a);
ExprMatrix operator*(const ExprMatrix& a, const Eigen::MatrixXd& M);

struct LinearConstraint {
    LinExpr expr;
    std::string label;
};

/// Symmetric block constrained to be PSD. Only the lower triangle is stored, so entry
/// (a, b) and (b, a) are one expression.
struct PsdConstraint {
    Eigen::Index size = 0;
    std::vector<LinExpr> lower;  ///< column-major lower triangle
    std::string label;

    const LinExpr& at(Eigen::Index r, Eigen::Index c) const;
    Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
};

struct ConstraintCheck {
    double max_equality = 0.0;    ///< max |expr| over equalities
    double max_inequality = 0.0;  ///< max(0, -expr) over inequalities
    double min_psd_eigenvalue = 0.0;  ///< smallest eigenvalue over PSD blocks (+inf if none)
    std::string worst_label;

    /// Largest violation as a single nonnegative number.
    double max_violation() const;
};

/// Solver-agnostic program: minimize objective s.t. equalities == 0, inequalities >= 0,
/// PSD blocks >= 0.
class ConicProgram {
public:
    int add_variable(std::string name);
    LinExpr var(int index) const;
    ExprMatrix add_matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols);
    ExprMatrix add_symmetric(const std::string& name, Eigen::Index n);

    void add_equality(const LinExpr& expr, std::string label = {});
    void add_inequality(const LinExpr& expr, std::string label = {});
    /// Throws DimensionError unless `M` is square and symmetric.
    void add_psd(const ExprMatrix& M, std::string label = {});
    void set_objective(const LinExpr& objective);

    int num_variables() const noexcept { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& variable_names() const noexcept { return names_; }
    const std::vector<LinearConstraint>& equalities() const noexcept { return equalities_; }
    const std::vector<LinearConstraint>& inequalities() const noexcept { return inequalities_; }
    const std::vector<PsdConstraint>& psd_blocks() const noexcept { return psd_; }
    const LinExpr& objective() const noexcept { return objective_; }

    ConstraintCheck check(const Eigen::VectorXd& x) const;

    /// Plain-text dump of variables and constraint blocks for offline inspection.
    std::string dump() const;

private:
    void check_declared(const LinExpr& e) const;

    std::vector<std::string> names_;
    std::vector<LinearConstraint> equalities_;
    std::vector<LinearConstraint> inequalities_;
    std::vector<PsdConstraint> psd_;
    LinExpr objective_;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus status);

struct SolveReport {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    double objective = 0.0;
    double max_violation = 0.0;
    double tolerance = kDefaultTolerance;
    int iterations = 0;
    std::string message;

    bool optimal() const noexcept { return status == SolveStatus::Optimal; }
};

/// Backend adapter. One instance per concurrent solve.
class ConicSolver {
public:
    virtual ~ConicSolver() = default;
    /// Raw backend result. Implementations need not verify the point.
    virtual SolveReport solve_raw(const ConicProgram& program, double tol) = 0;
};

/// Solves with the default backend and re-checks every constraint at the returned point.
/// An Optimal report whose point violates a constraint by more than `tol` is downgraded to
/// NumericalFailure.
SolveReport solve(const ConicProgram& program, double tol = kDefaultTolerance);
SolveReport solve(ConicSolver& backend, const ConicProgram& program, double tol = kDefaultTolerance);

}  // namespace modediag
