#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cssav {

/// Compressed-row sparse matrix. Column indices are sorted and unique
/// within each row; the sparsity pattern is fixed at construction.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Builds an all-zero matrix with the given per-row column lists
    /// (duplicates and ordering are normalised).
    static SparseMatrix from_pattern(std::size_t rows, std::size_t cols, std::vector<std::vector<int>> row_columns);

    struct Triplet {
        int row;
        int col;
        double value;
    };
    /// Duplicate entries are summed.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& triplets);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    std::span<const int> offsets() const { return offsets_; }
    std::span<const int> indices() const { return indices_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Position of (row, col) in values(), or -1 when outside the pattern.
    long find(int row, int col) const;
    /// Entry value; zero when outside the pattern.
    double value(int row, int col) const;
    /// Adds to an entry that must exist in the pattern.
    void add(int row, int col, double v);

    void set_zero();
    bool same_pattern(const SparseMatrix& other) const;
    /// this += a * other; patterns must match.
    SparseMatrix& add_scaled(const SparseMatrix& other, double a);

    std::vector<double> diagonal() const;
    SparseMatrix transpose() const;

    /// y = A x, summing each row in stored order.
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y = A^T x.
    void multiply_transpose(std::span<const double> x, std::span<double> y) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<int> offsets_{0};
    std::vector<int> indices_;
    std::vector<double> values_;
};

/// y = A x. Throws std::invalid_argument on a dimension mismatch.
std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x);

enum class Preconditioner { None, Jacobi };

struct SolverConfig {
    double rtol = 1e-10;
    double atol = 1e-14;
    int max_iterations = 20000;
    Preconditioner preconditioner = Preconditioner::Jacobi;

    /// Throws std::invalid_argument unless both tolerances are positive.
    void validate() const;
    bool operator==(const SolverConfig&) const = default;
};

enum class Nullspace { None, Constants };

enum class SolveStatus { Converged, MaxIterations, Breakdown };

struct SolveResult {
    int iterations = 0;
    double residual_norm = 0.0;  // true residual ||b - A x|| at exit
    SolveStatus status = SolveStatus::Converged;
    bool restarted = false;
    /// Recursively updated residual norms, one per iteration (CG only).
    std::vector<double> history;

    bool converged() const { return status == SolveStatus::Converged; }
};

/// Raised by callers that treat a failed solve as fatal.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string describe(const SolveResult& r);

/// Preconditioned conjugate gradients for symmetric positive (semi)definite
/// A. `x` holds the initial guess and receives the solution (or the last
/// iterate when not converged). With Nullspace::Constants the right-hand
/// side, every iterate and every preconditioned residual are projected onto
/// vectors with zero DOF mean, and the returned x has zero mean.
/// Stops when ||b - A x|| <= rtol ||b|| + atol.
SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                     const SolverConfig& cfg, Nullspace nullspace = Nullspace::None,
                     bool record_history = false);

/// Right-preconditioned BiCGStab for general square A. On breakdown
/// (rho or omega ~ 0) the method restarts once with a perturbed shadow
/// residual, then gives up with SolveStatus::Breakdown.
SolveResult bicgstab_solve(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                           const SolverConfig& cfg);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace cssav
