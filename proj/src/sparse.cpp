#include "cssav/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cssav {

SparseMatrix SparseMatrix::from_pattern(std::size_t rows, std::size_t cols, std::vector<std::vector<int>> row_columns)
{
    if (row_columns.size() != rows) throw std::invalid_argument("pattern row count mismatch");
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.offsets_.assign(rows + 1, 0);
    for (std::size_t i = 0; i < rows; ++i) {
        auto& r = row_columns[i];
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        if (!r.empty() && (r.front() < 0 || static_cast<std::size_t>(r.back()) >= cols))
            throw std::invalid_argument("pattern column out of range");
        m.offsets_[i + 1] = m.offsets_[i] + static_cast<int>(r.size());
    }
    m.indices_.reserve(m.offsets_.back());
    for (const auto& r : row_columns) m.indices_.insert(m.indices_.end(), r.begin(), r.end());
    m.values_.assign(m.indices_.size(), 0.0);
    return m;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& triplets)
{
    std::vector<std::vector<int>> pattern(rows);
    for (const auto& t : triplets) {
        if (t.row < 0 || static_cast<std::size_t>(t.row) >= rows) throw std::invalid_argument("triplet row out of range");
        pattern[t.row].push_back(t.col);
    }
    SparseMatrix m = from_pattern(rows, cols, std::move(pattern));
    for (const auto& t : triplets) m.add(t.row, t.col, t.value);
    return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n)
{
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({static_cast<int>(i), static_cast<int>(i), 1.0});
    return from_triplets(n, n, t);
}

long SparseMatrix::find(int row, int col) const
{
    const auto begin = indices_.begin() + offsets_[row];
    const auto end = indices_.begin() + offsets_[row + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return -1;
    return static_cast<long>(it - indices_.begin());
}

double SparseMatrix::value(int row, int col) const
{
    const long k = find(row, col);
    return k < 0 ? 0.0 : values_[k];
}

void SparseMatrix::add(int row, int col, double v)
{
    const long k = find(row, col);
    if (k < 0) {
        std::ostringstream msg;
        msg << "entry (" << row << "," << col << ") is outside the sparsity pattern";
        throw std::out_of_range(msg.str());
    }
    values_[k] += v;
}

void SparseMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

bool SparseMatrix::same_pattern(const SparseMatrix& other) const
{
    return rows_ == other.rows_ && cols_ == other.cols_ && offsets_ == other.offsets_ && indices_ == other.indices_;
}

SparseMatrix& SparseMatrix::add_scaled(const SparseMatrix& other, double a)
{
    if (!same_pattern(other)) throw std::invalid_argument("add_scaled needs identical sparsity patterns");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * other.values_[k];
    return *this;
}

std::vector<double> SparseMatrix::diagonal() const
{
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = value(static_cast<int>(i), static_cast<int>(i));
    return d;
}

SparseMatrix SparseMatrix::transpose() const
{
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (std::size_t i = 0; i < rows_; ++i)
        for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) t.push_back({indices_[k], static_cast<int>(i), values_[k]});
    return from_triplets(cols_, rows_, t);
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[indices_[k]];
        y[i] = s;
    }
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const
{
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) y[indices_[k]] += values_[k] * x[i];
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x)
{
    if (x.size() != a.cols()) {
        std::ostringstream msg;
        msg << "spmv: matrix has " << a.cols() << " columns but vector has " << x.size() << " entries";
        throw std::invalid_argument(msg.str());
    }
    std::vector<double> y(a.rows());
    a.multiply(x, y);
    return y;
}

void SolverConfig::validate() const
{
    if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("solver tolerances must be positive");
    if (max_iterations < 1) throw std::invalid_argument("solver needs at least one iteration");
}

std::string describe(const SolveResult& r)
{
    std::ostringstream s;
    s << (r.status == SolveStatus::Converged       ? "converged"
          : r.status == SolveStatus::MaxIterations ? "max iterations reached"
                                                   : "breakdown")
      << " after " << r.iterations << " iterations, residual " << r.residual_norm;
    return s.str();
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

namespace {

std::vector<double> inverse_diagonal(const SparseMatrix& a, Preconditioner p)
{
    std::vector<double> inv(a.rows(), 1.0);
    if (p == Preconditioner::Jacobi) {
        const auto d = a.diagonal();
        for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = d[i] != 0.0 ? 1.0 / d[i] : 1.0;
    }
    return inv;
}

void remove_mean(std::span<double> v)
{
    if (v.empty()) return;
    double s = 0.0;
    for (double x : v) s += x;
    const double m = s / static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

double residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x, std::vector<double>& r)
{
    a.multiply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return norm2(r);
}

void check_square(const SparseMatrix& a, std::span<const double> b, std::span<double> x)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("solver needs a square matrix");
    if (b.size() != a.rows() || x.size() != a.rows()) throw std::invalid_argument("solver vector size mismatch");
}

}  // namespace

SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b_in, std::span<double> x, const SolverConfig& cfg,
                     Nullspace nullspace, bool record_history)
{
    check_square(a, b_in, x);
    cfg.validate();
    const std::size_t n = a.rows();
    const bool project = nullspace == Nullspace::Constants;
    std::vector<double> b(b_in.begin(), b_in.end());
    if (project) {
        remove_mean(b);
        remove_mean(x);
    }
    const auto inv_diag = inverse_diagonal(a, cfg.preconditioner);
    const double target = cfg.rtol * norm2(b) + cfg.atol;

    SolveResult result;
    std::vector<double> r(n), z(n), p(n), ap(n);
    double rnorm = residual(a, b, x, r);
    if (project) remove_mean(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    if (project) remove_mean(z);
    p = z;
    double rz = dot(r, z);

    while (rnorm > target) {
        if (result.iterations >= cfg.max_iterations) {
            result.status = SolveStatus::MaxIterations;
            break;
        }
        a.multiply(p, ap);
        const double pap = dot(p, ap);
        if (!std::isfinite(pap) || pap <= 0.0) {
            result.status = SolveStatus::Breakdown;
            break;
        }
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if (project) remove_mean(r);
        ++result.iterations;
        rnorm = norm2(r);
        if (record_history) result.history.push_back(rnorm);
        if (!std::isfinite(rnorm)) {
            result.status = SolveStatus::Breakdown;
            break;
        }
        if (rnorm <= target) {
            // Guard against drift of the recursive residual.
            std::vector<double> true_r(n);
            double true_norm = residual(a, b, x, true_r);
            if (project) {
                remove_mean(true_r);
                true_norm = norm2(true_r);
            }
            if (true_norm <= target) break;
            r = true_r;
            rnorm = true_norm;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        if (project) remove_mean(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (project) remove_mean(x);
    std::vector<double> true_r(n);
    result.residual_norm = residual(a, b, x, true_r);
    if (result.status == SolveStatus::Converged && !(result.residual_norm <= target))
        result.status = SolveStatus::MaxIterations;
    return result;
}

SolveResult bicgstab_solve(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                           const SolverConfig& cfg)
{
    check_square(a, b, x);
    cfg.validate();
    const std::size_t n = a.rows();
    const auto inv_diag = inverse_diagonal(a, cfg.preconditioner);
    const double target = cfg.rtol * norm2(b) + cfg.atol;
    constexpr double tiny = 1e-300;

    SolveResult result;
    std::vector<double> r(n), r_hat(n), p(n, 0.0), v(n, 0.0), y(n), s(n), zv(n), t(n);
    double rnorm = residual(a, b, x, r);
    r_hat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    bool fresh = true;  // p and v must be reset

    auto restart = [&](bool perturb) {
        rnorm = residual(a, b, x, r);
        r_hat = r;
        if (perturb) {
            const double scale = rnorm / std::sqrt(static_cast<double>(n));
            for (std::size_t i = 0; i < n; ++i) r_hat[i] += 0.5 * scale * std::sin(1.0 + static_cast<double>(i));
        }
        rho = alpha = omega = 1.0;
        fresh = true;
    };

    auto breakdown = [&]() {
        if (result.restarted) {
            result.status = SolveStatus::Breakdown;
            return true;
        }
        result.restarted = true;
        restart(true);
        return false;
    };

    while (rnorm > target) {
        if (result.iterations >= cfg.max_iterations) {
            result.status = SolveStatus::MaxIterations;
            break;
        }
        const double rho_new = dot(r_hat, r);
        if (std::abs(rho_new) < 1e-30 * norm2(r_hat) * rnorm || !std::isfinite(rho_new)) {
            if (breakdown()) break;
            continue;
        }
        if (fresh) {
            p = r;
            fresh = false;
        } else {
            const double beta = (rho_new / rho) * (alpha / omega);
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) y[i] = inv_diag[i] * p[i];
        a.multiply(y, v);
        const double rv = dot(r_hat, v);
        if (std::abs(rv) < tiny || !std::isfinite(rv)) {
            if (breakdown()) break;
            continue;
        }
        alpha = rho / rv;
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        ++result.iterations;
        const double snorm = norm2(s);
        if (snorm <= target) {
            for (std::size_t i = 0; i < n; ++i) x[i] += alpha * y[i];
            rnorm = residual(a, b, x, r);
            if (rnorm > target) restart(false);
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) zv[i] = inv_diag[i] * s[i];
        a.multiply(zv, t);
        const double tt = dot(t, t);
        if (tt < tiny || !std::isfinite(tt)) {
            if (breakdown()) break;
            continue;
        }
        omega = dot(t, s) / tt;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * y[i] + omega * zv[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm2(r);
        if (!std::isfinite(rnorm)) {
            result.status = SolveStatus::Breakdown;
            break;
        }
        if (rnorm <= target) {
            rnorm = residual(a, b, x, r);
            if (rnorm > target) restart(false);
            continue;
        }
        if (std::abs(omega) < 1e-300) {
            if (breakdown()) break;
        }
    }
    std::vector<double> true_r(n);
    result.residual_norm = residual(a, b, x, true_r);
    if (result.status == SolveStatus::Converged && !(result.residual_norm <= target))
        result.status = SolveStatus::MaxIterations;
    return result;
}

}  // namespace cssav
