// SPDX-License-Identifier: MIT
#include "ouevolve/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ouevolve/errors.hpp"
#include "ouevolve/parallel.hpp"
#include "ouevolve/verify.hpp"

namespace ouevolve {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ojson matrix_json(const Matrix& m) {
    ojson rows = ojson::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ojson row = ojson::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

ojson vector_json(const Vector& v) {
    ojson out = ojson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector to_vector(const std::vector<double>& v) {
    Vector x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
    return x;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << text;
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

void write_matrix_csv(const fs::path& path, const Matrix& m) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << "i,j,value\n";
    char buf[96];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            std::snprintf(buf, sizeof buf, "%ld,%ld,%.17g\n", static_cast<long>(i), static_cast<long>(k), m(i, k));
            os << buf;
        }
}

void write_pairs_csv(const fs::path& path, const std::vector<std::pair<double, double>>& pairs) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << "gap,value\n";
    char buf[96];
    for (const auto& [gap, value] : pairs) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", gap, value);
        os << buf;
    }
}

// Wall time and timestamps live here so the other reports stay reproducible.
void write_metadata(const fs::path& dir, const std::string& command, double wall_time) {
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    ojson j;
    j["command"] = command;
    j["timestamp"] = stamp;
    j["wall_time_s"] = wall_time;
    j["workers"] = worker_count();
    write_json(dir / "metadata.json", j);
}

fs::path prepare_dir(const std::string& out) {
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
    return dir;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool exterior_geometry(const RunConfig& cfg) { return cfg.domain.kind != DomainKind::whole_space; }

std::vector<char> bounded_region(const RunConfig& cfg, const Grid& g) {
    if (exterior_geometry(cfg)) return cfg.domain.bounded_mask(g);
    return std::vector<char>(g.size(), 1);
}

double middle_time(const RunConfig& cfg) {
    return cfg.times.r >= 0.0 ? cfg.times.r : 0.5 * (cfg.times.s + cfg.times.t);
}

ojson picard_json(const PicardDiagnostics& d) {
    ojson j;
    j["term_norms"] = d.term_norms;
    j["term_bound"] = d.term_bound;
    j["tail_bound"] = d.tail_bound;
    j["quad_nodes_per_level"] = d.quad_nodes_per_level;
    j["truncation_k"] = d.truncation_k;
    j["est_series_error"] = d.est_series_error;
    j["fitted_C"] = d.fitted_C;
    j["converged"] = d.converged;
    j["w_applications"] = d.w_applications;
    j["f_applications"] = d.f_applications;
    j["skipped_subtrees"] = d.skipped_subtrees;
    return j;
}

ojson rate_json(const RateReport& r) {
    ojson j;
    j["fitted_slope"] = r.fitted_slope;
    j["target_slope"] = r.target_slope;
    j["r_squared"] = r.r_squared;
    j["r_squared_applies"] = r.r_squared_applies;
    j["fitted_logC"] = r.fitted_logC;
    return j;
}

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    ojson details = ojson::object();
};

class Suite {
public:
    Suite(const RunConfig& cfg, fs::path dir) : cfg_(cfg), dir_(std::move(dir)), cache_(build_cache(cfg)),
          grid_(build_grid(cfg)), f_(build_initial(cfg, grid_)), ws_(cache_, wholespace_options(cfg)) {}

    std::vector<Check> checks;

    void law() {
        const double t = cfg_.times.t, s = cfg_.times.s, r = middle_time(cfg_);
        require_gap("law");
        {
            const Matrix lhs = cache_->flow_U(t, s);
            const Matrix rhs = cache_->flow_U(t, r) * cache_->flow_U(r, s);
            add({"law.propagator_composition", false, (lhs - rhs).norm() / lhs.norm(), 1e-8});
        }
        const WholeSpaceEvolution evo(ws_, grid_);
        add({"law.wholespace_ck", false, ck_defect(evo, t, r, s, f_), 1e-4});
        if (exterior_geometry(cfg_)) {
            const ExteriorSystem ex = exterior();
            const ExteriorEvolution eevo(ex);
            add({"law.exterior_ck", false, ck_defect(eevo, t, r, s, ex.restrict_to_omega(f_)), 1e-2});
        }
    }

    void residuals() {
        const double t = cfg_.times.t, s = cfg_.times.s;
        const double delta = cfg_.verify.residual_delta;
        require_gap("residuals");
        if (!(t - s > 2.0 * delta)) throw ConfigError("times: residual checks need t - s > 2 verify.residual_delta");
        std::vector<Vector> probes;
        const Vector c = to_vector(cfg_.initial.center);
        if (cfg_.dim() == 1) {
            for (double x = -3.0; x <= 3.0 + 1e-12; x += 0.25) probes.push_back(c + Vector::Constant(1, x));
        } else {
            for (double x = -2.0; x <= 2.0 + 1e-12; x += 0.5)
                for (double y = -2.0; y <= 2.0 + 1e-12; y += 0.5) probes.push_back(c + Vector{{x, y}});
        }
        add({"residuals.wholespace", false, ws_.pde_residual(t, s, f_, probes, delta), 5e-3});
        if (exterior_geometry(cfg_)) {
            if (!(s - delta >= 0.0)) throw ConfigError("times.s: the exterior s-residual needs s >= verify.residual_delta");
            const ExteriorSystem ex = exterior();
            const GridFunction f = ex.restrict_to_omega(f_);
            add({"residuals.exterior_t", false, ex.t_derivative_residual(t, s, f, delta), 5e-3});
            add({"residuals.exterior_s", false, ex.s_derivative_residual(t, s, f, delta), 5e-3});
        }
    }

    void rates() {
        const auto gaps = build_gaps(cfg_);
        const VerifyConfig& v = cfg_.verify;
        const double s = cfg_.times.s;
        const auto fam = bump_family(grid_, to_vector(cfg_.initial.center), v.width_min, v.width_max, v.family_size);
        auto record = [&](const std::string& name, const RateReport& r) {
            write_pairs_csv(dir_ / ("rates_" + name + ".csv"), r.pairs);
            Check c{"rates." + name, r.pass, r.fitted_slope, r.tolerance, rate_json(r)};
            checks.push_back(c);
        };
        const WholeSpaceEvolution wevo(ws_, grid_);
        const auto w = verify_smoothing_rates(wevo, v.p, v.q, fam, gaps, v.rate_tol, v.gradient_tol, s);
        record("wholespace_lq", w.lq);
        record("wholespace_gradient", w.gradient);
        if (exterior_geometry(cfg_)) {
            const ExteriorSystem ex = exterior();
            const ExteriorEvolution eevo(ex);
            const auto e = verify_smoothing_rates(eevo, v.p, v.q, fam, gaps, v.rate_tol, v.gradient_tol, s);
            record("exterior_lq", e.lq);
            record("exterior_gradient", e.gradient);
        }
    }

    void lemma32() {
        const VerifyConfig& v = cfg_.verify;
        const Lemma32Report rep = lemma32_demo(v.lemma_alpha, v.lemma_beta, v.lemma_C0, v.lemma_T, v.lemma_terms);
        Check q{"lemma32.quadrature_agreement", false, rep.max_quadrature_rel_diff, 1e-8};
        q.details["beta_terms"] = rep.beta_terms;
        q.details["quadrature_terms"] = rep.quadrature_terms;
        add(q);
        Check g{"lemma32.super_geometric", rep.super_geometric, rep.super_geometric ? 1.0 : 0.0, 1.0};
        g.details["series_sum"] = rep.series_sum;
        g.details["series_bound"] = rep.series_bound;
        checks.push_back(g);
        const Lemma32Report flat = lemma32_demo(0.0, 0.0, 1.0, v.lemma_T, 30);
        add({"lemma32.exponential_series", false, std::abs(flat.series_sum - std::exp(v.lemma_T)), 1e-10});
    }

    void montecarlo() {
        require_gap("montecarlo");
        const MonteCarloReport rep = mc_covariance_check(*cache_, cfg_.times.t, cfg_.times.s, cfg_.verify.mc_paths,
                                                         cfg_.verify.mc_steps, cfg_.seed,
                                                         to_vector(cfg_.initial.center));
        Check c{"montecarlo.covariance", rep.pass, rep.cov_err, rep.cov_tol};
        c.details["exact_cov"] = matrix_json(rep.exact_cov);
        c.details["sample_cov"] = matrix_json(rep.sample_cov);
        c.details["sample_mean"] = vector_json(rep.sample_mean);
        c.details["mean_max_sigma"] = rep.mean_max_sigma;
        c.details["mean_flow_err"] = rep.mean_flow_err;
        checks.push_back(c);
    }

private:
    void add(Check c) {
        c.pass = std::isfinite(c.measured) && c.measured <= c.tolerance;
        checks.push_back(std::move(c));
    }

    void require_gap(const std::string& suite) const {
        if (!(cfg_.times.t > cfg_.times.s)) throw ConfigError("times.t: the " + suite + " suite needs t > s");
    }

    ExteriorSystem exterior() const { return ExteriorSystem(cache_, cfg_.domain, grid_, exterior_options(cfg_)); }

    const RunConfig& cfg_;
    fs::path dir_;
    std::shared_ptr<const PropagatorCache> cache_;
    Grid grid_;
    GridFunction f_;
    WholeSpace ws_;
};

}  // namespace

int cmd_propagator(const RunConfig& cfg, const std::string& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_dir(out_dir);
    const auto cache = build_cache(cfg);
    const double t = cfg.times.t, s = cfg.times.s;
    const KernelParams kp = cache->covariance_Q(t, s);
    const Matrix U = cache->flow_U(t, s);
    const Vector g = cache->drift_g(t, s);

    ojson j;
    j["experiment"] = cfg.experiment;
    j["t"] = t;
    j["s"] = s;
    j["U_ts"] = matrix_json(U);
    j["U_st"] = matrix_json(cache->flow_U(s, t));
    j["g_ts"] = vector_json(g);
    j["Q_ts"] = matrix_json(kp.Q_ts);
    j["mu"] = cache->coeffs().mu();
    if (t > s) {
        const ConstantsReport rep = estimate_constants(*cache, std::min(cfg.times.T, cache->coeffs().t_max()),
                                                       cfg.times.n_pairs);
        ojson samples = ojson::array();
        for (const auto& smp : rep.samples)
            samples.push_back({{"t", smp.t}, {"s", smp.s}, {"inv_sqrt_norm", smp.inv_sqrt_norm},
                               {"sqrt_det", smp.sqrt_det}});
        j["constants"] = {{"C_inv_sqrt", rep.C_inv_sqrt}, {"C_det", rep.C_det}, {"samples", samples}};
    }
    j["config"] = to_json(cfg);
    write_json(dir / "propagator.json", j);
    write_matrix_csv(dir / "U.csv", U);
    write_matrix_csv(dir / "Q_ts.csv", kp.Q_ts);
    write_matrix_csv(dir / "g.csv", g);
    write_metadata(dir, "propagator", seconds_since(start));
    return kExitPass;
}

int cmd_evolve(const RunConfig& cfg, const std::string& system, const std::string& out_dir) {
    if (system != "wholespace" && system != "bounded" && system != "exterior")
        throw ConfigError("--system must be one of wholespace, bounded, exterior");
    if (system == "exterior" && !exterior_geometry(cfg))
        throw ConfigError("geometry.kind: the exterior system needs an obstacle");
    const double t = cfg.times.t, s = cfg.times.s;
    if (t < s) throw ConfigError("times.t: must be >= times.s");
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_dir(out_dir);
    const auto cache = build_cache(cfg);
    const Grid grid = build_grid(cfg);
    GridFunction f = build_initial(cfg, grid);

    ojson diag;
    diag["experiment"] = cfg.experiment;
    diag["system"] = system;
    diag["t"] = t;
    diag["s"] = s;
    diag["grid"] = {{"dim", grid.dim}, {"points", grid.size()}, {"h", cfg.h}};
    GridFunction u;
    if (system == "wholespace") {
        const WholeSpace ws(cache, wholespace_options(cfg));
        u = ws.apply(t, s, f, grid);
    } else if (system == "bounded") {
        const BoundedProblem bp(cache->coeffs_ptr(), grid, bounded_region(cfg, grid), bounded_options(cfg));
        f = f.with_mask(bp.mask());
        BoundedStats stats;
        u = bp.evolve(t, s, f, &stats);
        diag["bounded"] = {{"unknowns", bp.unknowns()},
                           {"steps", stats.steps},
                           {"upwind_rows", stats.upwind_rows},
                           {"max_solver_residual", stats.max_solver_residual},
                           {"warnings", stats.warnings}};
    } else {
        const ExteriorSystem ex(cache, cfg.domain, grid, exterior_options(cfg));
        f = ex.restrict_to_omega(f);
        const PicardResult res = ex.picard_apply(t, s, f);
        u = res.solution;
        diag["picard"] = picard_json(res.diagnostics);
        diag["boundary_trace"] = ex.boundary_trace(u);
    }
    diag["norm_p"] = cfg.verify.p;
    diag["initial_norm"] = lp_norm(f, cfg.verify.p);
    diag["solution_norm"] = lp_norm(u, cfg.verify.p);
    diag["config"] = to_json(cfg);
    write_csv((dir / "initial.csv").string(), f);
    write_csv((dir / "solution.csv").string(), u);
    write_json(dir / "diagnostics.json", diag);
    write_metadata(dir, "evolve " + system, seconds_since(start));
    return kExitPass;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite, const std::string& out_dir) {
    static const std::vector<std::string> all{"law", "residuals", "rates", "lemma32", "montecarlo"};
    std::vector<std::string> selected;
    if (suite == "all") selected = all;
    else if (std::find(all.begin(), all.end(), suite) != all.end()) selected = {suite};
    else throw ConfigError("--suite must be one of law, residuals, rates, lemma32, montecarlo, all");

    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = prepare_dir(out_dir);
    Suite runner(cfg, dir);
    for (const auto& name : selected) {
        if (name == "law") runner.law();
        else if (name == "residuals") runner.residuals();
        else if (name == "rates") runner.rates();
        else if (name == "lemma32") runner.lemma32();
        else runner.montecarlo();
    }
    bool pass = true;
    ojson checks = ojson::array();
    for (const Check& c : runner.checks) {
        pass = pass && c.pass;
        ojson j;
        j["name"] = c.name;
        j["pass"] = c.pass;
        j["measured"] = c.measured;
        j["tolerance"] = c.tolerance;
        if (!c.details.empty()) j["details"] = c.details;
        checks.push_back(j);
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.measured << " (tolerance " << c.tolerance
                  << ")\n";
    }
    ojson report;
    report["experiment"] = cfg.experiment;
    report["suite"] = suite;
    report["pass"] = pass;
    report["checks"] = checks;
    report["config"] = to_json(cfg);
    write_json(dir / "verify.json", report);
    write_metadata(dir, "verify " + suite, seconds_since(start));
    return pass ? kExitPass : kExitCheckFailure;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Evolution systems of Ornstein-Uhlenbeck operators on R^d and exterior domains", "ou-evolve"};
    app.require_subcommand(1);
    std::string config, system = "wholespace", suite = "all", out;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config, "JSON configuration file")->required();
        cmd->add_option("--out", out, "output directory (default: the config's output_dir)");
    };
    CLI::App* prop = app.add_subcommand("propagator", "U(t,s), g(t,s), Q_{t,s} and the kernel constants");
    add_common(prop);
    CLI::App* evolve = app.add_subcommand("evolve", "apply an evolution system to the initial data");
    add_common(evolve);
    evolve->add_option("--system", system, "wholespace, bounded or exterior");
    CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
    add_common(verify);
    verify->add_option("--suite", suite, "law, residuals, rates, lemma32, montecarlo or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfig;
    }

    try {
        const RunConfig cfg = load_config(config);
        const std::string dir = out.empty() ? cfg.output_dir : out;
        if (prop->parsed()) return cmd_propagator(cfg, dir);
        if (evolve->parsed()) return cmd_evolve(cfg, system, dir);
        return cmd_verify(cfg, suite, dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace ouevolve
