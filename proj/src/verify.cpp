// SPDX-License-Identifier: MIT
#include "ouevolve/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "ouevolve/errors.hpp"
#include "ouevolve/parallel.hpp"
#include "ouevolve/quadrature.hpp"

namespace ouevolve {

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw ConfigError("log_spaced needs 0 < lo <= hi, n >= 1");
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return out;
}

RateReport rate_fit(const std::vector<std::pair<double, double>>& samples, double target_slope,
                    double tolerance, double min_r_squared) {
    if (samples.size() < 6) throw ConfigError("rate_fit needs at least 6 samples");
    double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
    for (const auto& [g, v] : samples) {
        if (!(g > 0.0)) throw ConfigError("rate_fit: gaps must be positive");
        if (!(v > 0.0)) throw ConfigError("rate_fit: values must be positive");
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
    }
    if (std::log10(gmax / gmin) < 1.5 - 1e-12) throw ConfigError("rate_fit: gaps must span 1.5 decades");
    const double n = static_cast<double>(samples.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [g, v] : samples) {
        sx += std::log(g);
        sy += std::log(v);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [g, v] : samples) {
        const double dx = std::log(g) - mx, dy = std::log(v) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    RateReport r;
    r.pairs = samples;
    r.fitted_slope = sxy / sxx;
    r.fitted_logC = my - r.fitted_slope * mx;
    double ss_res = 0.0;
    for (const auto& [g, v] : samples) {
        const double e = std::log(v) - (r.fitted_logC + r.fitted_slope * std::log(g));
        ss_res += e * e;
    }
    r.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    r.target_slope = target_slope;
    r.tolerance = tolerance;
    r.min_r_squared = min_r_squared;
    r.r_squared_applies = target_slope != 0.0;
    r.pass = std::abs(r.fitted_slope - target_slope) <= tolerance &&
             (!r.r_squared_applies || r.r_squared >= min_r_squared);
    return r;
}

std::vector<GridFunction> Evolution::gradient(double t, double s, const GridFunction& f) const {
    return ouevolve::gradient(apply(t, s, f));
}

GridFunction WholeSpaceEvolution::apply(double t, double s, const GridFunction& f) const {
    return ws_.apply(t, s, f, grid_);
}

std::vector<GridFunction> WholeSpaceEvolution::gradient(double t, double s, const GridFunction& f) const {
    return ws_.gradient(t, s, f, grid_);
}

std::vector<GridFunction> WholeSpaceEvolution::gradient_of(double t, double s, const GridFunction& f,
                                                           const GridFunction&) const {
    return ws_.gradient(t, s, f, grid_);
}

GridFunction BoundedEvolution::apply(double t, double s, const GridFunction& f) const {
    return problem_.evolve(t, s, f.with_mask(problem_.mask()));
}

GridFunction ExteriorEvolution::apply(double t, double s, const GridFunction& f) const {
    return system_.picard_apply(t, s, f, k_max_, nodes_).solution;
}

std::vector<GridFunction> bump_family(const Grid& g, const Vector& center, double w_min, double w_max,
                                      int count) {
    std::vector<GridFunction> out;
    for (double w : log_spaced(w_min, w_max, count)) out.push_back(gaussian_bump(g, center, w));
    return out;
}

namespace {

double magnitude_norm(const std::vector<GridFunction>& D, double p) {
    GridFunction mag(D[0].grid);
    mag.mask = D[0].mask;
    for (std::size_t k = 0; k < mag.values.size(); ++k) {
        double sq = 0.0;
        for (const auto& c : D) sq += c.values[k] * c.values[k];
        mag.values[k] = std::sqrt(sq);
    }
    return lp_norm(mag, p);
}

// sup over the family of measure_m(P f) / ||f||_p, per gap, for each of the
// measures returned together.
std::vector<std::vector<std::pair<double, double>>> sup_profiles(
    const Evolution& evo, double p, const std::vector<GridFunction>& family,
    const std::vector<double>& gaps, std::size_t n_measures,
    const std::function<std::vector<double>(const GridFunction&, double)>& measure) {
    if (family.empty()) throw ConfigError("smoothing probe needs at least one initial datum");
    const std::size_t nf = family.size();
    std::vector<std::vector<double>> ratio(gaps.size() * nf, std::vector<double>(n_measures, 0.0));
    parallel_for(ratio.size(), [&](std::size_t idx) {
        const std::size_t gi = idx / nf, fi = idx % nf;
        const GridFunction f = evo.prepare(family[fi]);
        const double fn = lp_norm(f, p);
        if (fn == 0.0) return;
        const auto m = measure(f, gaps[gi]);
        for (std::size_t k = 0; k < n_measures; ++k) ratio[idx][k] = m[k] / fn;
    });
    std::vector<std::vector<std::pair<double, double>>> out(n_measures);
    for (std::size_t k = 0; k < n_measures; ++k)
        for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
            double m = 0.0;
            for (std::size_t fi = 0; fi < nf; ++fi) m = std::max(m, ratio[gi * nf + fi][k]);
            out[k].emplace_back(gaps[gi], m);
        }
    return out;
}

double lq_target(int d, double p, double q) {
    if (!(p > 1.0) || !(q >= p) || std::isinf(q)) throw ConfigError("verify_smoothing needs 1 < p <= q < inf");
    return -0.5 * d * (1.0 / p - 1.0 / q);
}

}  // namespace

RateReport verify_smoothing(const Evolution& evo, double p, double q,
                            const std::vector<GridFunction>& family, const std::vector<double>& gaps,
                            double tolerance, double s) {
    const double target = lq_target(evo.grid().dim, p, q);
    const auto samples = sup_profiles(evo, p, family, gaps, 1, [&](const GridFunction& f, double gap) {
        return std::vector<double>{lp_norm(evo.apply(s + gap, s, f), q)};
    });
    return rate_fit(samples[0], target, tolerance);
}

RateReport verify_gradient_smoothing(const Evolution& evo, double p,
                                     const std::vector<GridFunction>& family,
                                     const std::vector<double>& gaps, double tolerance, double s) {
    const auto samples = sup_profiles(evo, p, family, gaps, 1, [&](const GridFunction& f, double gap) {
        return std::vector<double>{magnitude_norm(evo.gradient(s + gap, s, f), p)};
    });
    return rate_fit(samples[0], -0.5, tolerance);
}

SmoothingReports verify_smoothing_rates(const Evolution& evo, double p, double q,
                                        const std::vector<GridFunction>& family,
                                        const std::vector<double>& gaps, double lq_tolerance,
                                        double gradient_tolerance, double s) {
    const double target = lq_target(evo.grid().dim, p, q);
    const auto samples = sup_profiles(evo, p, family, gaps, 2, [&](const GridFunction& f, double gap) {
        const GridFunction u = evo.apply(s + gap, s, f);
        return std::vector<double>{lp_norm(u, q), magnitude_norm(evo.gradient_of(s + gap, s, f, u), p)};
    });
    return {rate_fit(samples[0], target, lq_tolerance), rate_fit(samples[1], -0.5, gradient_tolerance)};
}

SobolevReport verify_sobolev_stability(const Evolution& evo, int k, double p, const GridFunction& f,
                                       const std::vector<double>& gaps, double s) {
    if (k != 1 && k != 2) throw ConfigError("verify_sobolev_stability needs k in {1, 2}");
    SobolevReport rep;
    rep.k = k;
    rep.p = p;
    const GridFunction f0 = evo.prepare(f);
    const SobolevNorms nf = sobolev_seminorms(f0, p);
    const double fk = sobolev_norm(nf, k, p);
    const double f1 = sobolev_norm(nf, 1, p);
    for (double gap : gaps) {
        SobolevRow row;
        row.gap = gap;
        if (fk > 0.0) {
            const SobolevNorms nu = sobolev_seminorms(evo.apply(s + gap, s, f0), p);
            row.ratio = sobolev_norm(nu, k, p) / fk;
            row.gain = sobolev_norm(nu, 2, p) / f1 * std::sqrt(gap);
        }
        rep.sup_ratio = std::max(rep.sup_ratio, row.ratio);
        rep.sup_gain = std::max(rep.sup_gain, row.gain);
        rep.rows.push_back(row);
    }
    return rep;
}

namespace {

// T_n(gap) by nested quadrature. Each level splits [0, gap] at gap/2 and uses
// a Gauss-Jacobi rule for the endpoint singularity of the respective factor.
class NestedLemma {
public:
    NestedLemma(double alpha, double beta, double C0, int nodes)
        : alpha_(alpha), beta_(beta), C0_(C0), left_(gauss_jacobi01(nodes, beta)) {
        for (int n = 0; n < 12; ++n) right_.push_back(gauss_jacobi01(nodes, exponent(n)));
    }

    double exponent(int n) const { return alpha_ + n * (beta_ + 1.0); }

    double term(int n, double gap) const {
        if (n == 0) return C0_ * std::pow(gap, alpha_);
        const double half = 0.5 * gap;
        // int_0^{gap/2} C0 u^beta T_{n-1}(gap - u) du
        double left = 0.0;
        for (std::size_t i = 0; i < left_.nodes.size(); ++i)
            left += left_.weights[i] * term(n - 1, gap - half * left_.nodes[i]);
        left *= C0_ * std::pow(half, beta_ + 1.0);
        // int_0^{gap/2} T_{n-1}(v) C0 (gap - v)^beta dv, T_{n-1}(v) = v^a * smooth
        const double a = exponent(n - 1);
        const auto& rule = right_[static_cast<std::size_t>(n - 1)];
        double right = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double v = half * rule.nodes[i];
            right += rule.weights[i] * term(n - 1, v) / std::pow(v, a) * C0_ * std::pow(gap - v, beta_);
        }
        right *= std::pow(half, a + 1.0);
        return left + right;
    }

private:
    double alpha_, beta_, C0_;
    QuadraturePoints left_;
    std::vector<QuadraturePoints> right_;
};

}  // namespace

Lemma32Report lemma32_demo(double alpha, double beta, double C0, double T, int n_terms, int n_quad,
                           int quad_nodes) {
    if (!(alpha > -1.0) || !(beta > -1.0)) throw ConfigError("lemma32_demo needs alpha, beta > -1");
    if (!(C0 > 0.0)) throw ConfigError("lemma32_demo needs C0 > 0");
    if (!(T > 0.0)) throw ConfigError("lemma32_demo needs T > 0");
    if (n_terms < 1 || n_quad < 0 || n_quad > 11) throw ConfigError("lemma32_demo: bad term counts");
    Lemma32Report rep;
    auto beta_fn = [](double a, double b) {
        return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    };
    double t = C0 * std::pow(T, alpha);
    for (int n = 0; n < n_terms; ++n) {
        rep.beta_terms.push_back(t);
        const double a = alpha + n * (beta + 1.0);
        t = t * C0 * std::pow(T, beta + 1.0) * beta_fn(beta + 1.0, a + 1.0);
    }
    for (int n = 0; n < n_terms; ++n) {
        const double lg = (n + 1) * std::log(C0) + (alpha + n * (beta + 1.0)) * std::log(T) +
                          n * std::lgamma(beta + 1.0) + std::lgamma(alpha + 1.0) -
                          std::lgamma(alpha + 1.0 + n * (beta + 1.0));
        rep.gamma_terms.push_back(std::exp(lg));
        rep.max_gamma_rel_diff = std::max(
            rep.max_gamma_rel_diff, std::abs(rep.gamma_terms.back() - rep.beta_terms[n]) / rep.beta_terms[n]);
    }
    const NestedLemma nested(alpha, beta, C0, quad_nodes);
    for (int n = 0; n <= std::min(n_quad, n_terms - 1); ++n) {
        rep.quadrature_terms.push_back(nested.term(n, T));
        rep.max_quadrature_rel_diff =
            std::max(rep.max_quadrature_rel_diff,
                     std::abs(rep.quadrature_terms.back() - rep.beta_terms[static_cast<std::size_t>(n)]) /
                         rep.beta_terms[static_cast<std::size_t>(n)]);
    }
    for (double v : rep.beta_terms) rep.series_sum += v;
    rep.series_bound = rep.series_sum / std::pow(T, alpha);
    rep.super_geometric = true;
    double prev_ratio = std::numeric_limits<double>::infinity();
    for (int n = 4; n + 1 < n_terms; ++n) {
        const double ratio = rep.beta_terms[n + 1] / rep.beta_terms[n];
        if (!(ratio < prev_ratio)) rep.super_geometric = false;
        prev_ratio = ratio;
    }
    const double last = rep.beta_terms.back();
    rep.uniform_flag = std::isfinite(rep.series_bound) && last <= 1e-12 * rep.series_sum;
    return rep;
}

MonteCarloReport mc_covariance_check(const PropagatorCache& cache, double t, double s, long n_paths,
                                     int n_steps, std::uint64_t seed, const Vector& x0) {
    if (n_paths < 10000) throw ConfigError("mc_covariance_check needs at least 1e4 paths");
    if (n_steps < 1) throw ConfigError("mc_covariance_check needs at least one step");
    if (!(t > s)) throw ConfigError("mc_covariance_check needs t > s");
    const int d = cache.dim();
    if (x0.size() != d) throw ConfigError("mc_covariance_check: x0 has the wrong dimension");
    const CoefficientSet& c = cache.coeffs();
    const double dr = (t - s) / n_steps;

    // Z = sum_j U(s, r_j) Q(r_j) sqrt(dr) xi_j at midpoints r_j.
    std::vector<Matrix> A(static_cast<std::size_t>(n_steps));
    for (int j = 0; j < n_steps; ++j) {
        const double r = s + (j + 0.5) * dr;
        A[static_cast<std::size_t>(j)] = cache.flow_U(s, r) * c.Q(r) * std::sqrt(dr);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector sum = Vector::Zero(d);
    Matrix sum2 = Matrix::Zero(d, d);
    Vector xi(d), z(d);
    for (long p = 0; p < n_paths; ++p) {
        z.setZero();
        for (int j = 0; j < n_steps; ++j) {
            for (int a = 0; a < d; ++a) xi(a) = normal(rng);
            z.noalias() += A[static_cast<std::size_t>(j)] * xi;
        }
        sum += z;
        sum2.noalias() += z * z.transpose();
    }
    const double n = static_cast<double>(n_paths);
    MonteCarloReport rep;
    rep.sample_mean = sum / n;
    rep.sample_cov = (sum2 - n * rep.sample_mean * rep.sample_mean.transpose()) / (n - 1.0);
    const KernelParams kp = cache.covariance_Q(t, s);
    rep.exact_cov = kp.Q_ts;
    rep.cov_err = (rep.sample_cov - kp.Q_ts).norm() / kp.Q_ts.norm();
    rep.cov_tol = 5.0 / std::sqrt(n);
    for (int a = 0; a < d; ++a)
        rep.mean_max_sigma = std::max(rep.mean_max_sigma,
                                      std::abs(rep.sample_mean(a)) / std::sqrt(kp.Q_ts(a, a) / n));

    // Characteristic y' = -(M y + c) integrated backward from y(t) = x0 to s.
    const int steps = 4000;
    const double h = (t - s) / steps;
    auto rhs = [&](double sigma, const Vector& y) -> Vector { return -(c.M(sigma) * y + c.c(sigma)); };
    Vector y = x0;
    for (int k = 0; k < steps; ++k) {
        const double sg = t - k * h;
        const double end = k + 1 == steps ? s : sg - h;
        const Vector k1 = rhs(sg, y);
        const Vector k2 = rhs(sg - 0.5 * h, y - 0.5 * h * k1);
        const Vector k3 = rhs(sg - 0.5 * h, y - 0.5 * h * k2);
        const Vector k4 = rhs(end, y - h * k3);
        y -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const Vector flow = kp.U_st * x0 + kp.g_ts;
    rep.mean_flow_err = (flow - y).norm() / (1.0 + x0.norm());
    rep.pass = rep.cov_err <= rep.cov_tol && rep.mean_max_sigma <= 5.0 && rep.mean_flow_err <= 1e-8;
    return rep;
}

double ck_defect(const Evolution& evo, double t, double r, double s, const GridFunction& f) {
    if (!(s <= r && r <= t)) throw ConfigError("ck_defect needs s <= r <= t");
    const GridFunction f0 = evo.prepare(f);
    const double fn = lp_norm(f0, 2.0);
    if (fn == 0.0) return 0.0;
    const GridFunction direct = evo.apply(t, s, f0);
    const GridFunction split = evo.apply(t, r, evo.apply(r, s, f0));
    return lp_norm(direct - split, 2.0) / fn;
}

SingularFit fit_singular_part(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 4) throw ConfigError("fit_singular_part needs at least 4 samples");
    for (const auto& [g, v] : samples)
        if (!(g > 0.0) || !(v > 0.0)) throw ConfigError("fit_singular_part needs positive data");
    SingularFit best;
    best.rms_log_residual = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 600; ++i) {
        const double gamma = -1.5 + 0.005 * i;
        // Relative least squares for (A, B) with non-negativity.
        double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
        for (const auto& [g, v] : samples) {
            const double w = 1.0 / (v * v);
            const double x = std::pow(g, gamma);
            s11 += w;
            s12 += w * x;
            s22 += w * x * x;
            r1 += w * v;
            r2 += w * x * v;
        }
        double A = 0.0, B = 0.0;
        const double det = s11 * s22 - s12 * s12;
        if (std::abs(det) > 1e-300) {
            A = (r1 * s22 - r2 * s12) / det;
            B = (s11 * r2 - s12 * r1) / det;
        }
        if (A < 0.0 || B < 0.0 || std::abs(det) <= 1e-300) {
            const double Ba = std::max(0.0, r2 / s22);
            const double Ab = std::max(0.0, r1 / s11);
            auto cost = [&](double a, double b) {
                double e = 0.0;
                for (const auto& [g, v] : samples) {
                    const double m = a + b * std::pow(g, gamma);
                    e += (m - v) * (m - v) / (v * v);
                }
                return e;
            };
            if (cost(0.0, Ba) <= cost(Ab, 0.0)) { A = 0.0; B = Ba; }
            else { A = Ab; B = 0.0; }
        }
        double e = 0.0;
        bool ok = true;
        for (const auto& [g, v] : samples) {
            const double m = A + B * std::pow(g, gamma);
            if (!(m > 0.0)) { ok = false; break; }
            e += std::pow(std::log(m / v), 2);
        }
        if (!ok) continue;
        e = std::sqrt(e / samples.size());
        if (e < best.rms_log_residual) {
            best.rms_log_residual = e;
            best.A = A;
            best.B = B;
            best.gamma = gamma;
        }
    }
    for (const auto& [g, v] : samples)
        best.envelope_C = std::max(best.envelope_C, v / (1.0 + 1.0 / std::sqrt(g)));
    return best;
}

}  // namespace ouevolve
