#include "rembed/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rembed/error.hpp"

namespace rembed {

void SolverParams::validate() const {
    if (!(ridge >= 0.0) || !std::isfinite(ridge))
        throw InvalidArgument("solver: ridge must be a finite nonnegative number");
    if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0))
        throw InvalidArgument("solver: rel_tolerance must lie in (0, 1)");
    if (max_iterations < 1) throw InvalidArgument("solver: max_iterations must be at least 1");
}

double default_ridge(const SparseMatrix& x) { return 1e-3 * mean_squared_row_norm(x); }

bool SolveReport::all_converged() const {
    return std::all_of(columns.begin(), columns.end(), [](const auto& c) { return c.converged; });
}

std::size_t SolveReport::total_iterations() const {
    std::size_t n = 0;
    for (const auto& c : columns) n += c.iterations;
    return n;
}

std::size_t SolveReport::max_iterations_used() const {
    std::size_t n = 0;
    for (const auto& c : columns) n = std::max(n, c.iterations);
    return n;
}

double SolveReport::max_relative_residual() const {
    double r = 0.0;
    for (const auto& c : columns) r = std::max(r, c.relative_residual);
    return r;
}

void SolveReport::merge(const SolveReport& other) {
    columns.insert(columns.end(), other.columns.begin(), other.columns.end());
}

void canonicalize_signs(DenseMatrix& q) {
    for (std::size_t j = 0; j < q.cols(); ++j) {
        auto c = q.col(j);
        std::size_t best = 0;
        for (std::size_t i = 1; i < c.size(); ++i)
            if (std::abs(c[i]) > std::abs(c[best])) best = i;
        if (!c.empty() && c[best] < 0.0)
            for (double& v : c) v = -v;
    }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Two Gram-Schmidt passes of column j against columns [0, j).
void project_out_prior(DenseMatrix& q, std::size_t j) {
    auto v = q.col(j);
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
            auto u = q.col(i);
            const double h = dot(u, v);
            for (std::size_t r = 0; r < v.size(); ++r) v[r] -= h * u[r];
        }
    }
}

constexpr double kDependenceRatio = 1e-12;
constexpr int kMaxRandomRetries = 8;

}  // namespace

DenseMatrix orthonormalize(const DenseMatrix& q, RandomStream& rng) {
    if (q.cols() == 0) throw InvalidArgument("orthonormalize: need at least one column");
    if (q.rows() < q.cols())
        throw InvalidArgument("orthonormalize: " + std::to_string(q.cols()) +
                              " columns cannot be orthonormal in dimension " + std::to_string(q.rows()));
    if (!q.all_finite()) throw InvalidArgument("orthonormalize: non-finite input");

    DenseMatrix out = q;
    for (std::size_t j = 0; j < out.cols(); ++j) {
        double before = norm2(out.col(j));
        project_out_prior(out, j);
        double after = norm2(out.col(j));
        int retries = 0;
        while (!(after > kDependenceRatio * before) || after == 0.0) {
            if (retries++ == kMaxRandomRetries)
                throw Error("orthonormalize: could not complete the basis with random directions");
            auto c = out.col(j);
            for (double& v : c) v = rng.normal();
            before = norm2(c);
            project_out_prior(out, j);
            after = norm2(c);
        }
        for (double& v : out.col(j)) v /= after;
    }
    canonicalize_signs(out);
    return out;
}

EigResult symmetric_eig(const DenseMatrix& s) {
    const std::size_t m = s.rows();
    if (s.cols() != m) throw DimensionError("symmetric_eig: matrix is not square");
    if (!s.all_finite()) throw InvalidArgument("symmetric_eig: non-finite entries");

    const double scale = std::max(1.0, max_abs(s));
    DenseMatrix a(m, m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            if (std::abs(s(i, j) - s(j, i)) > 1e-10 * scale)
                throw InvalidArgument("symmetric_eig: input is not symmetric");
            a(i, j) = 0.5 * (s(i, j) + s(j, i));
        }
    }

    DenseMatrix v = DenseMatrix::identity(m);
    const double threshold = 1e-12 * frobenius_norm(a);
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < j; ++i) off = std::max(off, std::abs(a(i, j)));
        if (off <= threshold) break;

        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= threshold * 1e-3) continue;
                // Rotation zeroing a(p, q).
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::size_t k = 0; k < m; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigResult result;
    result.eigenvalues.resize(m);
    result.eigenvectors = DenseMatrix(m, m);
    for (std::size_t j = 0; j < m; ++j) {
        result.eigenvalues[j] = a(order[j], order[j]);
        std::copy(v.col(order[j]).begin(), v.col(order[j]).end(), result.eigenvectors.col(j).begin());
    }
    canonicalize_signs(result.eigenvectors);
    return result;
}

namespace {

// (XᵀX + λI)·P
DenseMatrix apply_normal_operator(const SparseMatrix& x, const DenseMatrix& p, double ridge) {
    DenseMatrix out = spmm_t(x, spmm(x, p));
    if (ridge != 0.0) {
        auto ov = out.values();
        auto pv = p.values();
        for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += ridge * pv[i];
    }
    return out;
}

DenseMatrix gather_columns(const DenseMatrix& src, const std::vector<std::size_t>& cols) {
    DenseMatrix out(src.rows(), cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k)
        std::copy(src.col(cols[k]).begin(), src.col(cols[k]).end(), out.col(k).begin());
    return out;
}

enum class ColumnState { Active, NeedsCheck, Done };

}  // namespace

RidgeSolution ridge_solve_multi(const SparseMatrix& x, const DenseMatrix& b, const SolverParams& params) {
    params.validate();
    if (b.rows() != x.rows())
        throw DimensionError("ridge_solve_multi: X has " + std::to_string(x.rows()) + " rows but B has " +
                             std::to_string(b.rows()));
    const std::size_t d = x.cols();
    const std::size_t m = b.cols();
    const double lambda = params.ridge;

    const DenseMatrix rhs = spmm_t(x, b);
    RidgeSolution sol{DenseMatrix(d, m), {}};
    sol.report.columns.resize(m);

    DenseMatrix r = rhs;
    DenseMatrix p = rhs;
    std::vector<double> rhs_norm(m), rr(m), best_true(m, std::numeric_limits<double>::infinity());
    std::vector<ColumnState> state(m, ColumnState::Active);
    for (std::size_t j = 0; j < m; ++j) {
        rhs_norm[j] = norm2(rhs.col(j));
        rr[j] = rhs_norm[j] * rhs_norm[j];
        if (rhs_norm[j] == 0.0) {
            state[j] = ColumnState::Done;
            sol.report.columns[j] = {0, 0.0, true};
        }
    }

    auto& cols = sol.report.columns;
    for (;;) {
        std::vector<std::size_t> active;
        for (std::size_t j = 0; j < m; ++j)
            if (state[j] == ColumnState::Active) active.push_back(j);
        if (active.empty()) break;

        const DenseMatrix pa = gather_columns(p, active);
        const DenseMatrix ap = apply_normal_operator(x, pa, lambda);
        for (std::size_t k = 0; k < active.size(); ++k) {
            const std::size_t j = active[k];
            auto pj = p.col(j);
            auto apj = ap.col(k);
            auto wj = sol.w.col(j);
            auto rj = r.col(j);
            const double curvature = dot(pj, apj);
            ++cols[j].iterations;
            if (!(curvature > 0.0)) {
                // Direction in the null space of a singular system; nothing more to gain.
                state[j] = ColumnState::NeedsCheck;
                continue;
            }
            const double alpha = rr[j] / curvature;
            for (std::size_t i = 0; i < d; ++i) {
                wj[i] += alpha * pj[i];
                rj[i] -= alpha * apj[i];
            }
            const double rr_new = dot(rj, rj);
            if (std::sqrt(rr_new) <= params.rel_tolerance * rhs_norm[j] ||
                cols[j].iterations >= params.max_iterations) {
                state[j] = ColumnState::NeedsCheck;
                rr[j] = rr_new;
                continue;
            }
            const double beta = rr_new / rr[j];
            rr[j] = rr_new;
            for (std::size_t i = 0; i < d; ++i) pj[i] = rj[i] + beta * pj[i];
        }

        // Recursive residuals drift from the true ones; verify and restart when they disagree.
        std::vector<std::size_t> check;
        for (std::size_t j = 0; j < m; ++j)
            if (state[j] == ColumnState::NeedsCheck) check.push_back(j);
        if (check.empty()) continue;
        const DenseMatrix wc = gather_columns(sol.w, check);
        const DenseMatrix awc = apply_normal_operator(x, wc, lambda);
        for (std::size_t k = 0; k < check.size(); ++k) {
            const std::size_t j = check[k];
            auto rj = r.col(j);
            auto rhsj = rhs.col(j);
            auto awj = awc.col(k);
            for (std::size_t i = 0; i < d; ++i) rj[i] = rhsj[i] - awj[i];
            const double true_norm = norm2(rj);
            const double rel = true_norm / rhs_norm[j];
            cols[j].relative_residual = rel;
            cols[j].converged = rel <= params.rel_tolerance;
            const bool stagnated = !(true_norm < 0.5 * best_true[j]);
            best_true[j] = std::min(best_true[j], true_norm);
            if (cols[j].converged || cols[j].iterations >= params.max_iterations || stagnated) {
                state[j] = ColumnState::Done;
                continue;
            }
            std::copy(rj.begin(), rj.end(), p.col(j).begin());
            rr[j] = true_norm * true_norm;
            state[j] = ColumnState::Active;
        }
    }
    return sol;
}

}  // namespace rembed
