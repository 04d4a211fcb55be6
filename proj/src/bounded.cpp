// SPDX-License-Identifier: MIT
#include "ouevolve/bounded.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "ouevolve/errors.hpp"

namespace ouevolve {

// A factored system matrix I - theta*step*L(tau_new). In 1-D the unknowns
// form a chain, so a tridiagonal elimination replaces the sparse LU.
struct BoundedProblem::Factorization {
    Eigen::SparseMatrix<double> A;
    // 1-D: tridiagonal bands.
    std::vector<double> lower, diag, upper;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu;
};

BoundedProblem::BoundedProblem(std::shared_ptr<const CoefficientSet> coeffs, Grid grid,
                               std::vector<char> mask, BoundedOptions options)
    : coeffs_(std::move(coeffs)), grid_(grid), mask_(std::move(mask)), options_(options) {
    if (!coeffs_) throw ConfigError("BoundedProblem needs coefficients");
    if (coeffs_->dim() != grid_.dim) throw ConfigError("coefficient dimension does not match the grid");
    if (mask_.size() != grid_.size()) throw ConfigError("bounded mask size mismatch");
    if (!(options_.theta >= 0.5 && options_.theta <= 1.0))
        throw ConfigError("theta must lie in [1/2, 1]");
    if (!(options_.dt > 0.0)) throw ConfigError("bounded dt must be positive");
    if (options_.min_steps < 0) throw ConfigError("min_steps must be non-negative");
    if (options_.startup_steps < 0) throw ConfigError("startup_steps must be non-negative");
    node_to_unknown_.assign(grid_.size(), -1);
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        if (!mask_[k]) continue;
        const auto idx = grid_.multi(k);
        bool edge = idx[0] == 0 || idx[0] == grid_.n[0] - 1;
        if (grid_.dim == 2) edge = edge || idx[1] == 0 || idx[1] == grid_.n[1] - 1;
        if (edge) continue;
        node_to_unknown_[k] = static_cast<long>(unknown_nodes_.size());
        unknown_nodes_.push_back(k);
    }
    if (unknown_nodes_.empty()) throw ConfigError("bounded domain has no interior grid points");
    if (coeffs_->autonomous()) L_const_ = assemble_L(0.0, &upwind_const_);
}

Eigen::SparseMatrix<double> BoundedProblem::operator_at(double t, int* upwind_rows) const {
    if (coeffs_->autonomous()) {
        if (upwind_rows) *upwind_rows = upwind_const_;
        return L_const_;
    }
    return assemble_L(t, upwind_rows);
}

Eigen::SparseMatrix<double> BoundedProblem::assemble_L(double t, int* upwind_rows) const {
    const int d = grid_.dim;
    const Matrix A = 0.5 * coeffs_->diffusion(t);
    const Matrix M = coeffs_->M(t);
    const Vector c = coeffs_->c(t);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(unknown_nodes_.size() * (d == 1 ? 3 : 9));
    int upwind = 0;

    auto add = [&](long row, int i, int j, double v) {
        const long col = node_to_unknown_[grid_.index(i, j)];
        if (col >= 0 && v != 0.0) trip.emplace_back(row, col, v);
    };

    for (std::size_t r = 0; r < unknown_nodes_.size(); ++r) {
        const long row = static_cast<long>(r);
        const std::size_t k = unknown_nodes_[r];
        const auto [i, j] = grid_.multi(k);
        const Vector b = M * grid_.point(k) + c;
        bool row_upwind = false;
        for (int a = 0; a < d; ++a) {
            const double h = grid_.h(a);
            const double aii = A(a, a);
            const double diff = aii / (h * h);
            const int di = a == 0 ? 1 : 0;
            const int dj = a == 1 ? 1 : 0;
            add(row, i, j, -2.0 * diff);
            add(row, i + di, j + dj, diff);
            add(row, i - di, j - dj, diff);
            const double peclet = aii > 0.0 ? std::abs(b(a)) * h / aii : std::numeric_limits<double>::infinity();
            if (peclet <= 2.0) {
                add(row, i + di, j + dj, b(a) / (2.0 * h));
                add(row, i - di, j - dj, -b(a) / (2.0 * h));
            } else {
                row_upwind = true;
                if (b(a) > 0.0) {
                    add(row, i + di, j + dj, b(a) / h);
                    add(row, i, j, -b(a) / h);
                } else {
                    add(row, i, j, b(a) / h);
                    add(row, i - di, j - dj, -b(a) / h);
                }
            }
        }
        if (d == 2) {
            const double mixed = (A(0, 1) + A(1, 0)) / (4.0 * grid_.h(0) * grid_.h(1));
            if (mixed != 0.0) {
                add(row, i + 1, j + 1, mixed);
                add(row, i - 1, j - 1, mixed);
                add(row, i + 1, j - 1, -mixed);
                add(row, i - 1, j + 1, -mixed);
            }
        }
        if (row_upwind) ++upwind;
    }
    const long n = static_cast<long>(unknown_nodes_.size());
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    if (upwind_rows) *upwind_rows = upwind;
    return L;
}

std::shared_ptr<const BoundedProblem::Factorization> BoundedProblem::factor(double tau_new, double step,
                                                                            double theta) const {
    const bool reuse = coeffs_->autonomous();
    if (reuse) {
        std::lock_guard lock(cache_mutex_);
        for (const auto& [key, fac] : factor_cache_)
            if (key.first == step && key.second == theta) return fac;
    }
    auto fac = std::make_shared<Factorization>();
    const long n = static_cast<long>(unknown_nodes_.size());
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    fac->A = I - (theta * step) * operator_at(tau_new, nullptr);
    fac->A.makeCompressed();
    if (grid_.dim == 1) {
        fac->lower.assign(static_cast<std::size_t>(n), 0.0);
        fac->diag.assign(static_cast<std::size_t>(n), 0.0);
        fac->upper.assign(static_cast<std::size_t>(n), 0.0);
        for (int col = 0; col < fac->A.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(fac->A, col); it; ++it) {
                const long r = it.row();
                if (r == col) fac->diag[static_cast<std::size_t>(r)] = it.value();
                else if (r == col + 1) fac->lower[static_cast<std::size_t>(r)] = it.value();
                else if (r + 1 == col) fac->upper[static_cast<std::size_t>(r)] = it.value();
                else throw NumericalError("1-D system is not tridiagonal");
            }
    } else {
        fac->lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        fac->lu->compute(fac->A);
        if (fac->lu->info() != Eigen::Success)
            throw SolverError("sparse LU factorization failed: " + fac->lu->lastErrorMessage());
    }
    if (reuse) {
        std::lock_guard lock(cache_mutex_);
        if (factor_cache_.size() > 16) factor_cache_.erase(factor_cache_.begin());
        factor_cache_.emplace_back(std::make_pair(step, theta), fac);
    }
    return fac;
}

namespace {

Eigen::VectorXd thomas(const std::vector<double>& lower, const std::vector<double>& diag,
                       const std::vector<double>& upper, const Eigen::VectorXd& rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    double denom = diag[0];
    if (denom == 0.0) throw SolverError("tridiagonal solve hit a zero pivot");
    c[0] = upper[0] / denom;
    d[0] = rhs(0) / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * c[i - 1];
        if (denom == 0.0) throw SolverError("tridiagonal solve hit a zero pivot");
        c[i] = upper[i] / denom;
        d[i] = (rhs(static_cast<long>(i)) - lower[i] * d[i - 1]) / denom;
    }
    Eigen::VectorXd x(static_cast<long>(n));
    x(static_cast<long>(n - 1)) = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x(static_cast<long>(i)) = d[i] - c[i] * x(static_cast<long>(i + 1));
    return x;
}

}  // namespace

std::vector<double> BoundedProblem::step_once(const std::vector<double>& u, double tau, double step,
                                              double theta, BoundedStats* stats) const {
    const long n = static_cast<long>(unknown_nodes_.size());
    Eigen::Map<const Eigen::VectorXd> un(u.data(), n);
    Eigen::VectorXd rhs = un;
    int upwind = 0;
    if (theta < 1.0) rhs += ((1.0 - theta) * step) * (operator_at(tau, &upwind) * un);
    const auto fac = factor(tau + step, step, theta);
    Eigen::VectorXd x = grid_.dim == 1 ? thomas(fac->lower, fac->diag, fac->upper, rhs)
                                       : Eigen::VectorXd(fac->lu->solve(rhs));
    const double rn = rhs.norm();
    const double res = rn > 0.0 ? (fac->A * x - rhs).norm() / rn : (fac->A * x).norm();
    if (!(res <= options_.solver_tol) || !x.allFinite())
        throw SolverError("linear solve residual " + std::to_string(res) + " exceeds tolerance");
    if (options_.check_max_principle) {
        const double before = un.cwiseAbs().maxCoeff();
        const double after = x.cwiseAbs().maxCoeff();
        if (after > before * (1.0 + 1e-12) + 1e-300)
            throw NumericalError("discrete maximum principle violated: " + std::to_string(after) +
                                 " > " + std::to_string(before));
    }
    if (stats) {
        ++stats->steps;
        stats->max_solver_residual = std::max(stats->max_solver_residual, res);
        stats->upwind_rows = upwind;
        if (theta == 0.5 && upwind > 0 && stats->warnings.empty())
            stats->warnings.push_back(
                "Crank-Nicolson with upwinded drift rows: monotonicity is not guaranteed");
    }
    return std::vector<double>(x.data(), x.data() + n);
}

GridFunction BoundedProblem::evolve(double t, double s, const GridFunction& f, BoundedStats* stats) const {
    if (!(t >= s)) throw ConfigError("bounded evolution needs t >= s");
    if (!(f.grid == grid_)) throw ConfigError("initial data lives on a different grid");
    std::vector<double> u(unknown_nodes_.size());
    for (std::size_t r = 0; r < unknown_nodes_.size(); ++r) u[r] = f.values[unknown_nodes_[r]];

    double dt = options_.dt;
    if (options_.min_steps > 0) dt = std::min(dt, (t - s) / options_.min_steps);
    double tau = s;
    if (t > s) {
        const double span = t - s;
        const auto full = static_cast<long>(std::floor(span / dt * (1.0 + 1e-12)));
        const double rest = span - static_cast<double>(full) * dt;
        // Rannacher start: the first step is replaced by implicit Euler
        // substeps, which damp the grid-scale modes Crank-Nicolson keeps.
        const int startup = options_.theta < 1.0 ? options_.startup_steps : 0;
        long k = 0;
        if (startup > 0) {
            const double first = full > 0 ? dt : span;
            for (int j = 0; j < startup; ++j)
                u = step_once(u, s + j * first / startup, first / startup, 1.0, stats);
            tau = s + first;
            if (full == 0) tau = t;
            k = full > 0 ? 1 : 0;
        }
        for (; k < full; ++k) {
            u = step_once(u, tau, dt, options_.theta, stats);
            tau = s + static_cast<double>(k + 1) * dt;
        }
        if (tau < t && rest > 1e-10 * dt) u = step_once(u, tau, t - tau, options_.theta, stats);
    }
    GridFunction out(grid_);
    out.mask = mask_;
    for (std::size_t r = 0; r < unknown_nodes_.size(); ++r) out.values[unknown_nodes_[r]] = u[r];
    return out;
}

std::vector<SmoothingRow> smoothing_probe_bounded(const BoundedProblem& problem, double p, double q,
                                                  const GridFunction& f,
                                                  const std::vector<double>& gaps, double s) {
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (i > 0 && !(gaps[i] > gaps[i - 1])) throw ConfigError("gaps must be sorted ascending");
        if (!(gaps[i] > 10.0 * std::min(problem.options().dt,
                                        problem.options().min_steps > 0
                                            ? gaps[i] / problem.options().min_steps
                                            : problem.options().dt)))
            throw ConfigError("every gap must exceed 10 time steps");
    }
    std::vector<SmoothingRow> rows;
    for (double gap : gaps) {
        const GridFunction u = problem.evolve(s + gap, s, f);
        const auto D = gradient(u);
        GridFunction mag(u.grid);
        mag.mask = u.mask;
        for (std::size_t k = 0; k < mag.values.size(); ++k) {
            double sq = 0.0;
            for (const auto& c : D) sq += c.values[k] * c.values[k];
            mag.values[k] = std::sqrt(sq);
        }
        rows.push_back({gap, lp_norm(u, q), lp_norm(mag, p)});
    }
    return rows;
}

}  // namespace ouevolve
