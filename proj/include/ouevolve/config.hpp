// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ouevolve/bounded.hpp"
#include "ouevolve/coefficients.hpp"
#include "ouevolve/exterior.hpp"
#include "ouevolve/grid.hpp"
#include "ouevolve/propagator.hpp"
#include "ouevolve/wholespace.hpp"

namespace ouevolve {

struct CoefficientConfig {
    std::string family = "heat";  // heat, drifted, scalar_commuting, rotation, custom
    int dim = 1;
    double sigma = 1.0;
    std::string a = "0";
    std::vector<std::vector<double>> A0;
    std::string omega = "1";
    std::vector<std::string> drift;
    // custom family
    std::vector<std::vector<std::string>> Q;
    std::vector<std::vector<std::string>> M;
    std::vector<std::string> c;
    std::optional<double> mu;
    double t_max = 100.0;
};

struct InitialConfig {
    std::string kind = "gaussian_bump";  // zero, gaussian_bump, sharp_bump, smoothed_indicator, sine_mode, csv
    std::vector<double> center;
    double width = 0.5;
    std::vector<double> a;
    std::vector<double> b;
    double ramp = 0.25;
    int k = 1;
    std::string path;
};

struct TimesConfig {
    double s = 0.0;
    double t = 1.0;
    double r = -1.0;  // intermediate time for evolution-law checks; < 0 means the midpoint
    std::vector<double> gaps;  // explicit gap list, else log-spaced over gap_range
    double gap_min = 1e-3;
    double gap_max = 1.0;
    int n_gaps = 10;
    double T = 1.0;  // horizon for estimate_constants
    int n_pairs = 24;
};

struct SchemeConfig {
    double ode_tol = 1e-12;
    int quad_nodes = 8;
    double theta = 0.5;
    double dt = 1.0 / 256;
    int min_steps = 0;
    int startup_steps = 2;
    int picard_nodes = 8;
    int first_level_nodes = 16;
    int k_max = 3;
    double series_tol = 0.1;
    double kernel_cut = 8.0;
    int interp_order = 3;
};

struct VerifyConfig {
    double p = 2.0;
    double q = 4.0;
    double rate_tol = 0.1;
    double gradient_tol = 0.15;
    int family_size = 16;
    double width_min = 0.01;
    double width_max = 1.0;
    double residual_delta = 1e-3;
    long mc_paths = 100000;
    int mc_steps = 32;
    double lemma_alpha = -0.5;
    double lemma_beta = -0.5;
    double lemma_C0 = 1.0;
    double lemma_T = 1.0;
    int lemma_terms = 12;
};

/// Everything an experiment needs; built from JSON by parse_config.
struct RunConfig {
    std::string experiment = "run";
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    CoefficientConfig coefficients;
    DomainSpec domain;
    double box_lo = -20.0;
    double box_hi = 20.0;
    double h = 1.0 / 32;
    InitialConfig initial;
    TimesConfig times;
    SchemeConfig scheme;
    VerifyConfig verify;

    int dim() const { return coefficients.dim; }
};

/// Validates every field (unknown keys included) and throws ConfigError with
/// a dotted field path on the first problem.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// The config as JSON, with defaults filled in.
nlohmann::ordered_json to_json(const RunConfig& cfg);

// Builders for the library objects described by a config.
std::shared_ptr<const CoefficientSet> build_coefficients(const RunConfig& cfg);
std::shared_ptr<const PropagatorCache> build_cache(const RunConfig& cfg);
Grid build_grid(const RunConfig& cfg);
GridFunction build_initial(const RunConfig& cfg, const Grid& g);
std::vector<double> build_gaps(const RunConfig& cfg);
WholeSpaceOptions wholespace_options(const RunConfig& cfg);
BoundedOptions bounded_options(const RunConfig& cfg);
ExteriorOptions exterior_options(const RunConfig& cfg);

}  // namespace ouevolve
