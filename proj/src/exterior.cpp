// SPDX-License-Identifier: MIT
#include "ouevolve/exterior.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "ouevolve/errors.hpp"
#include "ouevolve/parallel.hpp"
#include "ouevolve/quadrature.hpp"

namespace ouevolve {

double CutoffPair::phi(const Vector& x) const { return smoothstep(x.norm() - (R_ + 1.0)); }

double CutoffPair::eta(const Vector& x) const {
    return 1.0 - smoothstep(2.0 * (x.norm() - (R_ + 2.0)));
}

Vector CutoffPair::grad_phi(const Vector& x) const {
    const double r = x.norm();
    if (r == 0.0) return Vector::Zero(x.size());
    return smoothstep_d1(r - (R_ + 1.0)) / r * x;
}

Matrix CutoffPair::hess_phi(const Vector& x) const {
    const int d = static_cast<int>(x.size());
    const double r = x.norm();
    if (r == 0.0) return Matrix::Zero(d, d);
    const double p1 = smoothstep_d1(r - (R_ + 1.0));
    const double p2 = smoothstep_d2(r - (R_ + 1.0));
    const Vector e = x / r;
    const Matrix ee = e * e.transpose();
    return p2 * ee + (p1 / r) * (Matrix::Identity(d, d) - ee);
}

void CutoffPair::check_on(const Grid& g) const {
    const double tol = 1e-12;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vector x = g.point(k);
        const double r = x.norm();
        const double p = phi(x);
        const double e = eta(x);
        bool ok = p >= -tol && p <= 1.0 + tol && e >= -tol && e <= 1.0 + tol;
        if (r >= R_ + 2.0) ok = ok && std::abs(p - 1.0) <= tol;
        if (r <= R_ + 1.0) ok = ok && std::abs(p) <= tol;
        if (r <= R_ + 2.0) ok = ok && std::abs(e - 1.0) <= tol;
        if (r >= R_ + 2.5) ok = ok && std::abs(e) <= tol;
        if (p < 1.0 - tol) ok = ok && std::abs(e - 1.0) <= tol;
        const bool in_annulus = r >= R_ + 1.0 - tol && r <= R_ + 2.0 + tol;
        if (!in_annulus) ok = ok && grad_phi(x).norm() <= tol;
        if (!ok) throw NumericalError("cut-off invariants fail at |x| = " + std::to_string(r));
    }
}

ExteriorSystem::ExteriorSystem(std::shared_ptr<const PropagatorCache> cache, DomainSpec domain,
                               Grid grid, ExteriorOptions options)
    : cache_(std::move(cache)),
      domain_(domain),
      grid_(grid),
      options_(options),
      cutoffs_(domain.R),
      ws_(cache_, options.wholespace) {
    if (domain_.kind == DomainKind::whole_space)
        throw ConfigError("the exterior system needs an obstacle (interval or disc complement)");
    domain_.validate(grid_);
    if (cache_->dim() != grid_.dim) throw ConfigError("coefficient dimension does not match the grid");
    if (options_.k_max < 1 || options_.k_max > 4) throw ConfigError("k_max must lie in [1, 4]");
    if (options_.quad_nodes < 4) throw ConfigError("quad_nodes must be at least 4");
    if (options_.two_sided_levels < 0) throw ConfigError("two_sided_levels must be non-negative");
    if (options_.first_level_nodes != 0 && options_.first_level_nodes < 4)
        throw ConfigError("first_level_nodes must be 0 or at least 4");
    cutoffs_.check_on(grid_);
    omega_mask_ = domain_.omega_mask(grid_);
    annulus_mask_ = domain_.annulus_mask(grid_);
    bounded_ = std::make_unique<BoundedProblem>(cache_->coeffs_ptr(), grid_, domain_.bounded_mask(grid_),
                                                options_.bounded);
    phi_ = GridFunction(grid_);
    eta_ = GridFunction(grid_);
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        const Vector x = grid_.point(k);
        phi_.values[k] = cutoffs_.phi(x);
        eta_.values[k] = cutoffs_.eta(x);
        if (annulus_mask_[k]) {
            annulus_nodes_.push_back(k);
            annulus_points_.push_back(x);
        }
    }
    if (annulus_nodes_.empty()) throw ConfigError("the grid has no nodes in the cut-off annulus");
}

GridFunction ExteriorSystem::restrict_to_omega(const GridFunction& f) const {
    if (!(f.grid == grid_)) throw ConfigError("initial data lives on a different grid");
    return f.with_mask(omega_mask_);
}

GridFunction ExteriorSystem::apply_W(double t, double s, const GridFunction& f) const {
    const GridFunction fo = restrict_to_omega(f);
    if (t == s) return fo;
    if (!(t > s)) throw ConfigError("apply_W needs t >= s");
    const GridFunction f0 = fo.with_mask({});
    GridFunction fD = fo;
    for (std::size_t k = 0; k < fD.values.size(); ++k) fD.values[k] *= eta_.values[k];
    fD = fD.with_mask(bounded_->mask());
    const GridFunction u0 = ws_.apply(t, s, f0, grid_);
    const GridFunction uD = bounded_->evolve(t, s, fD);
    GridFunction w(grid_);
    w.mask = omega_mask_;
    for (std::size_t k = 0; k < w.values.size(); ++k)
        w.values[k] = phi_.values[k] * u0.values[k] + (1.0 - phi_.values[k]) * uD.values[k];
    w.apply_mask();
    return w;
}

GridFunction ExteriorSystem::apply_F(double t, double s, const GridFunction& f) const {
    if (!(t > s)) throw ConfigError("apply_F needs t > s");
    const GridFunction fo = restrict_to_omega(f);
    const GridFunction f0 = fo.with_mask({});
    GridFunction fD = fo;
    for (std::size_t k = 0; k < fD.values.size(); ++k) fD.values[k] *= eta_.values[k];
    fD = fD.with_mask(bounded_->mask());

    const auto u0 = ws_.apply_points(t, s, f0, annulus_points_);
    const auto du0 = ws_.gradient_points(t, s, f0, annulus_points_);
    const GridFunction uD = bounded_->evolve(t, s, fD);
    const auto duD = gradient(uD);

    const CoefficientSet& c = cache_->coeffs();
    const Matrix QQ = c.diffusion(t);
    const Matrix M = c.M(t);
    const Vector cv = c.c(t);
    GridFunction out(grid_);
    out.mask = omega_mask_;
    const int d = grid_.dim;
    for (std::size_t i = 0; i < annulus_nodes_.size(); ++i) {
        const std::size_t k = annulus_nodes_[i];
        const Vector& x = annulus_points_[i];
        const Vector gphi = cutoffs_.grad_phi(x);
        const Matrix hphi = cutoffs_.hess_phi(x);
        const double L_phi = 0.5 * (QQ * hphi).trace() + (M * x + cv).dot(gphi);
        Vector dd(d);
        for (int a = 0; a < d; ++a) dd(a) = du0[i](a) - duD[static_cast<std::size_t>(a)].values[k];
        out.values[k] = L_phi * (u0[i] - uD.values[k]) + (QQ * gphi).dot(dd);
    }
    for (std::size_t k = 0; k < out.values.size(); ++k)
        if (out.values[k] != 0.0 && !annulus_mask_[k])
            throw NumericalError("correction term escaped the cut-off annulus");
    return out;
}

std::vector<TimeNode> picard_time_rule(double t, double s, int nodes, bool two_sided) {
    std::vector<TimeNode> out;
    if (!(t > s)) return out;
    const auto& rule = gauss_legendre(nodes);
    // r = a + tau^2 on [a, b], or r = b - tau^2 when `mirrored`.
    auto half_rule = [&](double a, double b, bool mirrored) {
        const double half = 0.5 * std::sqrt(b - a);
        for (int j = 0; j < nodes; ++j) {
            const double tau = half * (1.0 + rule.nodes[static_cast<std::size_t>(j)]);
            const double w = 2.0 * tau * half * rule.weights[static_cast<std::size_t>(j)];
            out.push_back({mirrored ? b - tau * tau : a + tau * tau, w});
        }
    };
    if (!two_sided) {
        half_rule(s, t, false);
    } else {
        const double m = 0.5 * (s + t);
        half_rule(s, m, false);
        half_rule(m, t, true);
    }
    return out;
}

void ExteriorSystem::accumulate(double t, double s, const GridFunction& g, double weight, int level,
                                const std::vector<int>& nodes, std::vector<GridFunction>& terms,
                                PicardDiagnostics& diag, double skip_tol) const {
    terms[static_cast<std::size_t>(level)].axpy(weight, apply_W(t, s, g));
    ++diag.w_applications;
    if (level == static_cast<int>(nodes.size()) || t == s) return;
    const auto rule = picard_time_rule(t, s, nodes[static_cast<std::size_t>(level)],
                                       level < options_.two_sided_levels);
    for (const auto& [r, wt] : rule) {
        const GridFunction Fg = apply_F(r, s, g);
        ++diag.f_applications;
        if (lp_norm(Fg, std::numeric_limits<double>::infinity()) <= skip_tol) {
            ++diag.skipped_subtrees;
            continue;
        }
        accumulate(t, r, Fg, weight * wt, level + 1, nodes, terms, diag, skip_tol);
    }
}

PicardResult ExteriorSystem::picard_apply(double t, double s, const GridFunction& f, int k_max,
                                          int nodes) const {
    const auto start = std::chrono::steady_clock::now();
    if (k_max < 0) k_max = options_.k_max;
    if (k_max < 1 || k_max > 4) throw ConfigError("k_max must lie in [1, 4]");
    if (nodes >= 0 && nodes < 4) throw ConfigError("quadrature nodes must be at least 4");
    // Level 1 carries most of the correction and may use a finer rule.
    std::vector<int> level_nodes(static_cast<std::size_t>(k_max), nodes < 0 ? options_.quad_nodes : nodes);
    if (nodes < 0) level_nodes[0] = std::max(options_.quad_nodes, options_.first_level_nodes);
    if (!(t >= s)) throw ConfigError("picard_apply needs t >= s");
    const GridFunction fo = restrict_to_omega(f);
    const double p = options_.norm_p;
    const double skip_tol = 1e-14 * lp_norm(fo, std::numeric_limits<double>::infinity());

    PicardResult res;
    PicardDiagnostics& diag = res.diagnostics;
    auto zero = GridFunction(grid_);
    zero.mask = omega_mask_;
    res.terms.assign(static_cast<std::size_t>(k_max + 1), zero);

    // P_0 directly, then the level-1 subtrees in parallel with per-node slots.
    res.terms[0].axpy(1.0, apply_W(t, s, fo));
    diag.w_applications = 1;
    if (t > s) {
        const auto rule = picard_time_rule(t, s, level_nodes[0], options_.two_sided_levels > 0);
        const std::size_t n1 = rule.size();
        std::vector<std::vector<GridFunction>> slot_terms(n1, res.terms);
        for (auto& st : slot_terms)
            for (auto& g : st) std::fill(g.values.begin(), g.values.end(), 0.0);
        std::vector<PicardDiagnostics> slot_diag(n1);
        parallel_for(n1, [&](std::size_t j) {
            const auto [r, wt] = rule[j];
            const GridFunction Fg = apply_F(r, s, fo);
            ++slot_diag[j].f_applications;
            if (lp_norm(Fg, std::numeric_limits<double>::infinity()) <= skip_tol) {
                ++slot_diag[j].skipped_subtrees;
                return;
            }
            accumulate(t, r, Fg, wt, 1, level_nodes, slot_terms[j], slot_diag[j], skip_tol);
        });
        for (std::size_t j = 0; j < slot_terms.size(); ++j) {
            for (std::size_t k = 0; k < res.terms.size(); ++k) res.terms[k] += slot_terms[j][k];
            diag.w_applications += slot_diag[j].w_applications;
            diag.f_applications += slot_diag[j].f_applications;
            diag.skipped_subtrees += slot_diag[j].skipped_subtrees;
        }
    }

    res.solution = zero;
    for (const auto& term : res.terms) res.solution += term;
    res.solution.apply_mask();

    const double fnorm = lp_norm(fo, p);
    const double gap = t - s;
    for (const auto& term : res.terms) diag.term_norms.push_back(lp_norm(term, p));
    diag.truncation_k = k_max;
    diag.quad_nodes_per_level = level_nodes;
    diag.est_series_error = diag.term_norms.back();
    if (fnorm > 0.0) {
        double C = diag.term_norms[0] / fnorm;
        if (gap > 0.0) C = std::max(C, std::sqrt(diag.term_norms[1] / (2.0 * std::sqrt(gap) * fnorm)));
        diag.fitted_C = C;
        // Iterated-convolution bound with a bounded W (alpha = 0) and an
        // F(t,s) ~ (t-s)^{-1/2} kernel (beta = -1/2).
        for (int n = 0; n <= k_max; ++n) {
            const double b = std::pow(C, n + 1) * std::pow(gap, 0.5 * n) *
                             std::pow(std::tgamma(0.5), n) / std::tgamma(1.0 + 0.5 * n) * fnorm;
            diag.term_bound.push_back(b);
        }
        for (int n = 1; n <= k_max; ++n) {
            const double b = std::pow(C, n + 1) * std::pow(std::tgamma(0.5), n) /
                             std::tgamma(1.0 + std::floor(0.5 * (n - 1))) *
                             std::pow(gap, 0.5 * (n - 1)) * fnorm;
            diag.tail_bound.push_back(b);
        }
    }
    const double total = lp_norm(res.solution, p);
    diag.converged = diag.est_series_error <= options_.series_tol * total || total == 0.0;
    diag.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!diag.converged && options_.strict) {
        throw ToleranceNotMet("Picard series not converged at k_max = " + std::to_string(k_max) +
                                  ": last term is " + std::to_string(diag.est_series_error) +
                                  " against total " + std::to_string(total),
                              diag.est_series_error);
    }
    return res;
}

GridFunction ExteriorSystem::apply_L(double t, const GridFunction& u) const {
    return apply_operator(cache_->coeffs(), t, u.with_mask(omega_mask_));
}

double ExteriorSystem::boundary_trace(const GridFunction& u) const {
    if (!(u.grid == grid_)) throw ConfigError("boundary_trace: grid mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        if (!omega_mask_[k]) continue;
        const auto idx = grid_.multi(k);
        bool adjacent = false;
        for (int a = 0; a < grid_.dim && !adjacent; ++a)
            for (int sgn : {-1, 1}) {
                std::array<int, 2> nb = idx;
                nb[a] += sgn;
                if (nb[a] < 0 || nb[a] >= grid_.n[a]) continue;
                if (!omega_mask_[grid_.index(nb[0], nb[1])]) adjacent = true;
            }
        if (adjacent) m = std::max(m, std::abs(u.values[k]));
    }
    return m;
}

std::vector<std::size_t> ExteriorSystem::interior_probes(int cells) const {
    double h = grid_.h(0);
    if (grid_.dim == 2) h = std::max(h, grid_.h(1));
    const double R = domain_.R;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        if (!omega_mask_[k]) continue;
        const auto idx = grid_.multi(k);
        bool near_edge = false;
        for (int a = 0; a < grid_.dim; ++a)
            if (idx[a] < cells || idx[a] > grid_.n[a] - 1 - cells) near_edge = true;
        if (near_edge) continue;
        const double r = grid_.point(k).norm();
        if (r > R + 1.0 - cells * h && r < R + 2.0 + cells * h) continue;
        if (r < domain_.a + cells * h) continue;
        out.push_back(k);
    }
    return out;
}

double ExteriorSystem::probe_l2(const GridFunction& r) const {
    double sum = 0.0;
    for (std::size_t k : interior_probes(2)) sum += r.values[k] * r.values[k];
    return std::sqrt(sum * grid_.cell_volume());
}

double ExteriorSystem::t_derivative_residual(double t, double s, const GridFunction& f, double dt) const {
    if (!(dt > 0.0) || !(t - s > 2.0 * dt)) throw ConfigError("need dt > 0 and t - s > 2 dt");
    const GridFunction up = picard_apply(t + dt, s, f).solution;
    const GridFunction um = picard_apply(t - dt, s, f).solution;
    const GridFunction u = picard_apply(t, s, f).solution;
    GridFunction r = (1.0 / (2.0 * dt)) * (up - um);
    r -= apply_L(t, u);
    return probe_l2(r);
}

double ExteriorSystem::s_derivative_residual(double t, double s, const GridFunction& f, double ds) const {
    if (!(ds > 0.0) || !(t - s > 2.0 * ds) || !(s - ds >= 0.0))
        throw ConfigError("need ds > 0, s >= ds and t - s > 2 ds");
    const GridFunction up = picard_apply(t, s + ds, f).solution;
    const GridFunction um = picard_apply(t, s - ds, f).solution;
    const GridFunction Lf = apply_L(s, restrict_to_omega(f));
    const GridFunction pl = picard_apply(t, s, Lf).solution;
    GridFunction r = (1.0 / (2.0 * ds)) * (up - um);
    r += pl;
    return probe_l2(r);
}

IntegralEquationCheck ExteriorSystem::integral_equation_check(double t, double s, const GridFunction& f,
                                                              int outer_nodes) const {
    if (!(t > s)) throw ConfigError("integral_equation_check needs t > s");
    if (outer_nodes < 2) throw ConfigError("outer_nodes must be at least 2");
    const GridFunction fo = restrict_to_omega(f);
    const PicardResult lhs = picard_apply(t, s, fo);
    GridFunction rhs = apply_W(t, s, fo);
    const auto rule = picard_time_rule(t, s, outer_nodes, options_.two_sided_levels > 0);
    std::vector<GridFunction> parts(rule.size());
    parallel_for(rule.size(), [&](std::size_t j) {
        const auto [r, wt] = rule[j];
        const GridFunction Fg = apply_F(r, s, fo);
        GridFunction part = picard_apply(t, r, Fg).solution;
        part *= wt;
        parts[j] = std::move(part);
    });
    for (const auto& part : parts) rhs += part;
    IntegralEquationCheck out;
    out.defect = lp_norm(lhs.solution - rhs, options_.norm_p);
    out.est_series_error = lhs.diagnostics.est_series_error;
    out.quadrature_nodes = static_cast<int>(rule.size());
    return out;
}

}  // namespace ouevolve
