// SPDX-License-Identifier: MIT
#include "ouevolve/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "ouevolve/errors.hpp"
#include "ouevolve/verify.hpp"

namespace ouevolve {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were read so that unknown
// keys can be reported afterwards.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(field(key) + ": " + msg);
    }

    std::string field(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        return has(key) ? &j_.at(key) : nullptr;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) fail(key, "must be a number");
            out = v->get<double>();
            if (!std::isfinite(out)) fail(key, "must be finite");
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) fail(key, "must be an integer");
            out = v->get<int>();
        }
    }

    void integer(const std::string& key, long& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) fail(key, "must be an integer");
            out = v->get<long>();
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) fail(key, "must be a string");
            out = v->get<std::string>();
        }
    }

    // Expressions may be given as strings or plain numbers.
    void expression(const std::string& key, std::string& out) {
        if (const json* v = get(key)) out = expression_text(*v, field(key));
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = get(key)) {
            if (!v->is_array()) fail(key, "must be an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) fail(key, "must be an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }

    void expressions(const std::string& key, std::vector<std::string>& out) {
        if (const json* v = get(key)) {
            if (!v->is_array()) fail(key, "must be an array of expressions");
            out.clear();
            for (std::size_t i = 0; i < v->size(); ++i)
                out.push_back(expression_text((*v)[i], field(key) + "[" + std::to_string(i) + "]"));
        }
    }

    void expression_matrix(const std::string& key, std::vector<std::vector<std::string>>& out) {
        if (const json* v = get(key)) {
            if (!v->is_array()) fail(key, "must be an array of rows");
            out.clear();
            for (std::size_t i = 0; i < v->size(); ++i) {
                const json& row = (*v)[i];
                if (!row.is_array()) fail(key, "row " + std::to_string(i) + " must be an array");
                std::vector<std::string> r;
                for (std::size_t k = 0; k < row.size(); ++k)
                    r.push_back(expression_text(row[k], field(key) + "[" + std::to_string(i) + "][" +
                                                            std::to_string(k) + "]"));
                out.push_back(r);
            }
        }
    }

    void number_matrix(const std::string& key, std::vector<std::vector<double>>& out) {
        if (const json* v = get(key)) {
            if (!v->is_array()) fail(key, "must be an array of rows");
            out.clear();
            for (const auto& row : *v) {
                if (!row.is_array()) fail(key, "rows must be arrays of numbers");
                std::vector<double> r;
                for (const auto& e : row) {
                    if (!e.is_number()) fail(key, "rows must be arrays of numbers");
                    r.push_back(e.get<double>());
                }
                out.push_back(r);
            }
        }
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(has(key) ? j_.at(key) : empty, field(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }

private:
    static std::string expression_text(const json& v, const std::string& where) {
        std::string text;
        if (v.is_string()) text = v.get<std::string>();
        else if (v.is_number()) text = json(v.get<double>()).dump();
        else throw ConfigError(where + ": must be a string expression or a number");
        try {
            Expression::parse(text);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
        return text;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(field + ": " + msg);
}

DomainKind domain_kind(const std::string& s, const std::string& field) {
    if (s == "whole_space") return DomainKind::whole_space;
    if (s == "interval_complement") return DomainKind::interval_complement;
    if (s == "disc_complement") return DomainKind::disc_complement;
    throw ConfigError(field + ": must be one of whole_space, interval_complement, disc_complement");
}

}  // namespace

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    Section root(j, "");
    root.text("experiment", cfg.experiment);
    root.text("output_dir", cfg.output_dir);
    if (const json* v = root.get("seed")) {
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
            root.fail("seed", "must be a non-negative integer");
        cfg.seed = v->get<std::uint64_t>();
    }

    {
        Section s = root.child("coefficients");
        CoefficientConfig& c = cfg.coefficients;
        s.text("family", c.family);
        s.integer("dim", c.dim);
        s.number("sigma", c.sigma);
        s.expression("a", c.a);
        s.number_matrix("A0", c.A0);
        s.expression("omega", c.omega);
        s.expressions("drift", c.drift);
        s.expression_matrix("Q", c.Q);
        s.expression_matrix("M", c.M);
        s.expressions("c", c.c);
        if (s.has("mu")) {
            double mu = 0.0;
            s.number("mu", mu);
            c.mu = mu;
        } else {
            s.get("mu");
        }
        s.number("t_max", c.t_max);
        s.finish();
        const std::set<std::string> families{"heat", "drifted", "scalar_commuting", "rotation", "custom"};
        require(families.count(c.family) == 1, s.field("family"),
                "must be one of heat, drifted, scalar_commuting, rotation, custom");
        require(c.dim >= 1 && c.dim <= 2, s.field("dim"), "must be 1 or 2");
        if (c.family == "rotation") require(c.dim == 2, s.field("dim"), "the rotation family needs dim = 2");
        require(c.sigma > 0.0, s.field("sigma"), "must be > 0");
        require(!c.mu || *c.mu > 0.0, s.field("mu"), "must be > 0");
        require(c.t_max > 0.0, s.field("t_max"), "must be > 0");
        if (!c.A0.empty()) {
            require(static_cast<int>(c.A0.size()) == c.dim, s.field("A0"), "must be dim x dim");
            for (const auto& row : c.A0)
                require(static_cast<int>(row.size()) == c.dim, s.field("A0"), "must be dim x dim");
        }
        if (!c.drift.empty())
            require(static_cast<int>(c.drift.size()) == c.dim, s.field("drift"), "must have dim entries");
        if (c.family == "drifted") require(!c.drift.empty(), s.field("drift"), "is required by the drifted family");
        if (c.family == "custom") {
            require(static_cast<int>(c.Q.size()) == c.dim, s.field("Q"), "must be dim x dim");
            for (const auto& row : c.Q) require(static_cast<int>(row.size()) == c.dim, s.field("Q"), "must be dim x dim");
            if (c.M.empty()) c.M.assign(static_cast<std::size_t>(c.dim), std::vector<std::string>(static_cast<std::size_t>(c.dim), "0"));
            require(static_cast<int>(c.M.size()) == c.dim, s.field("M"), "must be dim x dim");
            for (const auto& row : c.M) require(static_cast<int>(row.size()) == c.dim, s.field("M"), "must be dim x dim");
            if (c.c.empty()) c.c.assign(static_cast<std::size_t>(c.dim), "0");
            require(static_cast<int>(c.c.size()) == c.dim, s.field("c"), "must have dim entries");
        }
    }

    {
        Section s = root.child("geometry");
        std::string kind = "whole_space";
        s.text("kind", kind);
        cfg.domain.kind = domain_kind(kind, s.field("kind"));
        s.number("obstacle_radius", cfg.domain.a);
        s.number("R", cfg.domain.R);
        std::vector<double> box{cfg.box_lo, cfg.box_hi};
        s.numbers("box", box);
        s.finish();
        require(box.size() == 2 && box[0] < box[1], s.field("box"), "must be [lo, hi] with lo < hi");
        cfg.box_lo = box[0];
        cfg.box_hi = box[1];
        require(cfg.domain.a > 0.0, s.field("obstacle_radius"), "must be > 0");
        require(cfg.domain.a < cfg.domain.R, s.field("R"), "must exceed obstacle_radius");
        if (cfg.domain.kind == DomainKind::interval_complement)
            require(cfg.dim() == 1, s.field("kind"), "interval_complement needs dim = 1");
        if (cfg.domain.kind == DomainKind::disc_complement)
            require(cfg.dim() == 2, s.field("kind"), "disc_complement needs dim = 2");
    }

    {
        Section s = root.child("grid");
        s.number("h", cfg.h);
        s.finish();
        require(cfg.h > 0.0, s.field("h"), "must be > 0");
        require((cfg.box_hi - cfg.box_lo) / cfg.h >= 7.0, s.field("h"), "gives fewer than 8 points per axis");
        const double pts = (cfg.box_hi - cfg.box_lo) / cfg.h + 1.0;
        require(std::pow(pts, cfg.dim()) <= 4.2e6, s.field("h"), "grid exceeds 4.2e6 points");
    }

    {
        Section s = root.child("initial");
        InitialConfig& in = cfg.initial;
        s.text("kind", in.kind);
        s.numbers("center", in.center);
        s.number("width", in.width);
        s.numbers("a", in.a);
        s.numbers("b", in.b);
        s.number("ramp", in.ramp);
        s.integer("k", in.k);
        s.text("path", in.path);
        s.finish();
        const std::set<std::string> kinds{"zero", "gaussian_bump", "sharp_bump", "smoothed_indicator", "sine_mode", "csv"};
        require(kinds.count(in.kind) == 1, s.field("kind"),
                "must be one of zero, gaussian_bump, sharp_bump, smoothed_indicator, sine_mode, csv");
        if (in.center.empty()) in.center.assign(static_cast<std::size_t>(cfg.dim()), 0.0);
        require(static_cast<int>(in.center.size()) == cfg.dim(), s.field("center"), "must have dim entries");
        require(in.width > 0.0, s.field("width"), "must be > 0");
        require(in.ramp > 0.0, s.field("ramp"), "must be > 0");
        require(in.k >= 1, s.field("k"), "must be >= 1");
        if (in.kind == "smoothed_indicator") {
            require(static_cast<int>(in.a.size()) == cfg.dim(), s.field("a"), "must have dim entries");
            require(static_cast<int>(in.b.size()) == cfg.dim(), s.field("b"), "must have dim entries");
        }
        if (in.kind == "csv") require(!in.path.empty(), s.field("path"), "is required for csv data");
    }

    {
        Section s = root.child("times");
        TimesConfig& t = cfg.times;
        s.number("s", t.s);
        s.number("t", t.t);
        s.number("r", t.r);
        s.numbers("gaps", t.gaps);
        std::vector<double> range{t.gap_min, t.gap_max};
        s.numbers("gap_range", range);
        s.integer("n_gaps", t.n_gaps);
        s.number("T", t.T);
        s.integer("n_pairs", t.n_pairs);
        s.finish();
        require(t.s >= 0.0, s.field("s"), "must be >= 0");
        require(t.t >= t.s, s.field("t"), "must be >= times.s");
        require(t.t <= cfg.coefficients.t_max, s.field("t"), "exceeds coefficients.t_max");
        require(t.r < 0.0 || (t.r >= t.s && t.r <= t.t), s.field("r"), "must lie in [s, t]");
        require(range.size() == 2 && range[0] > 0.0 && range[0] < range[1], s.field("gap_range"),
                "must be [lo, hi] with 0 < lo < hi");
        t.gap_min = range[0];
        t.gap_max = range[1];
        require(t.n_gaps >= 2, s.field("n_gaps"), "must be >= 2");
        for (double g : t.gaps) require(g > 0.0, s.field("gaps"), "entries must be > 0");
        require(t.T > 0.0, s.field("T"), "must be > 0");
        require(t.n_pairs >= 10, s.field("n_pairs"), "must be >= 10");
    }

    {
        Section s = root.child("scheme");
        SchemeConfig& c = cfg.scheme;
        s.number("ode_tol", c.ode_tol);
        s.integer("quad_nodes", c.quad_nodes);
        s.number("theta", c.theta);
        s.number("dt", c.dt);
        s.integer("min_steps", c.min_steps);
        s.integer("startup_steps", c.startup_steps);
        s.integer("picard_nodes", c.picard_nodes);
        s.integer("first_level_nodes", c.first_level_nodes);
        s.integer("k_max", c.k_max);
        s.number("series_tol", c.series_tol);
        s.number("kernel_cut", c.kernel_cut);
        s.integer("interp_order", c.interp_order);
        s.finish();
        require(c.ode_tol > 0.0 && c.ode_tol < 1e-3, s.field("ode_tol"), "must lie in (0, 1e-3)");
        require(c.quad_nodes >= 2 && c.quad_nodes <= 64, s.field("quad_nodes"), "must lie in [2, 64]");
        require(c.theta >= 0.5 && c.theta <= 1.0, s.field("theta"), "must lie in [0.5, 1]");
        require(c.dt > 0.0, s.field("dt"), "must be > 0");
        require(c.min_steps >= 0, s.field("min_steps"), "must be >= 0");
        require(c.startup_steps >= 0, s.field("startup_steps"), "must be >= 0");
        require(c.picard_nodes >= 4, s.field("picard_nodes"), "must be >= 4");
        require(c.first_level_nodes == 0 || c.first_level_nodes >= 4, s.field("first_level_nodes"),
                "must be 0 or >= 4");
        require(c.k_max >= 1 && c.k_max <= 4, s.field("k_max"), "must lie in [1, 4]");
        require(c.series_tol > 0.0, s.field("series_tol"), "must be > 0");
        require(c.kernel_cut >= 4.0, s.field("kernel_cut"), "must be >= 4");
        require(c.interp_order == 1 || c.interp_order == 3, s.field("interp_order"), "must be 1 or 3");
    }

    {
        Section s = root.child("verify");
        VerifyConfig& v = cfg.verify;
        s.number("p", v.p);
        s.number("q", v.q);
        s.number("rate_tol", v.rate_tol);
        s.number("gradient_tol", v.gradient_tol);
        s.integer("family_size", v.family_size);
        std::vector<double> widths{v.width_min, v.width_max};
        s.numbers("widths", widths);
        s.number("residual_delta", v.residual_delta);
        s.integer("mc_paths", v.mc_paths);
        s.integer("mc_steps", v.mc_steps);
        s.number("lemma_alpha", v.lemma_alpha);
        s.number("lemma_beta", v.lemma_beta);
        s.number("lemma_C0", v.lemma_C0);
        s.number("lemma_T", v.lemma_T);
        s.integer("lemma_terms", v.lemma_terms);
        s.finish();
        require(v.p > 1.0, s.field("p"), "must be > 1");
        require(v.q >= v.p, s.field("q"), "must be >= verify.p");
        require(v.rate_tol > 0.0, s.field("rate_tol"), "must be > 0");
        require(v.gradient_tol > 0.0, s.field("gradient_tol"), "must be > 0");
        require(v.family_size >= 1, s.field("family_size"), "must be >= 1");
        require(widths.size() == 2 && widths[0] > 0.0 && widths[0] <= widths[1], s.field("widths"),
                "must be [lo, hi] with 0 < lo <= hi");
        v.width_min = widths[0];
        v.width_max = widths[1];
        require(v.residual_delta > 0.0, s.field("residual_delta"), "must be > 0");
        require(v.mc_paths >= 10000, s.field("mc_paths"), "must be >= 10000");
        require(v.mc_steps >= 1, s.field("mc_steps"), "must be >= 1");
        require(v.lemma_alpha > -1.0, s.field("lemma_alpha"), "must be > -1");
        require(v.lemma_beta > -1.0, s.field("lemma_beta"), "must be > -1");
        require(v.lemma_C0 > 0.0, s.field("lemma_C0"), "must be > 0");
        require(v.lemma_T > 0.0, s.field("lemma_T"), "must be > 0");
        require(v.lemma_terms >= 2 && v.lemma_terms <= 60, s.field("lemma_terms"), "must lie in [2, 60]");
    }
    root.finish();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["experiment"] = cfg.experiment;
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    const CoefficientConfig& c = cfg.coefficients;
    auto& cj = j["coefficients"];
    cj["family"] = c.family;
    cj["dim"] = c.dim;
    cj["sigma"] = c.sigma;
    cj["a"] = c.a;
    if (!c.A0.empty()) cj["A0"] = c.A0;
    cj["omega"] = c.omega;
    if (!c.drift.empty()) cj["drift"] = c.drift;
    if (c.family == "custom") {
        cj["Q"] = c.Q;
        cj["M"] = c.M;
        cj["c"] = c.c;
    }
    if (c.mu) cj["mu"] = *c.mu;
    cj["t_max"] = c.t_max;
    j["geometry"] = {{"kind", to_string(cfg.domain.kind)},
                     {"obstacle_radius", cfg.domain.a},
                     {"R", cfg.domain.R},
                     {"box", {cfg.box_lo, cfg.box_hi}}};
    j["grid"] = {{"h", cfg.h}};
    const InitialConfig& in = cfg.initial;
    auto& ij = j["initial"];
    ij["kind"] = in.kind;
    ij["center"] = in.center;
    ij["width"] = in.width;
    if (!in.a.empty()) ij["a"] = in.a;
    if (!in.b.empty()) ij["b"] = in.b;
    ij["ramp"] = in.ramp;
    ij["k"] = in.k;
    if (!in.path.empty()) ij["path"] = in.path;
    const TimesConfig& t = cfg.times;
    auto& tj = j["times"];
    tj["s"] = t.s;
    tj["t"] = t.t;
    tj["r"] = t.r;
    if (!t.gaps.empty()) tj["gaps"] = t.gaps;
    tj["gap_range"] = {t.gap_min, t.gap_max};
    tj["n_gaps"] = t.n_gaps;
    tj["T"] = t.T;
    tj["n_pairs"] = t.n_pairs;
    const SchemeConfig& s = cfg.scheme;
    j["scheme"] = {{"ode_tol", s.ode_tol},           {"quad_nodes", s.quad_nodes},
                   {"theta", s.theta},               {"dt", s.dt},
                   {"min_steps", s.min_steps},       {"startup_steps", s.startup_steps},
                   {"picard_nodes", s.picard_nodes}, {"first_level_nodes", s.first_level_nodes},
                   {"k_max", s.k_max},               {"series_tol", s.series_tol},
                   {"kernel_cut", s.kernel_cut},     {"interp_order", s.interp_order}};
    const VerifyConfig& v = cfg.verify;
    j["verify"] = {{"p", v.p},
                   {"q", v.q},
                   {"rate_tol", v.rate_tol},
                   {"gradient_tol", v.gradient_tol},
                   {"family_size", v.family_size},
                   {"widths", {v.width_min, v.width_max}},
                   {"residual_delta", v.residual_delta},
                   {"mc_paths", v.mc_paths},
                   {"mc_steps", v.mc_steps},
                   {"lemma_alpha", v.lemma_alpha},
                   {"lemma_beta", v.lemma_beta},
                   {"lemma_C0", v.lemma_C0},
                   {"lemma_T", v.lemma_T},
                   {"lemma_terms", v.lemma_terms}};
    return j;
}

std::shared_ptr<const CoefficientSet> build_coefficients(const RunConfig& cfg) {
    const CoefficientConfig& c = cfg.coefficients;
    auto exprs = [](const std::vector<std::string>& v) {
        std::vector<Expression> out;
        for (const auto& s : v) out.push_back(Expression::parse(s));
        return out;
    };
    std::shared_ptr<CoefficientSet> set;
    if (c.family == "custom") {
        std::vector<std::vector<Expression>> Q, M;
        for (const auto& row : c.Q) Q.push_back(exprs(row));
        for (const auto& row : c.M) M.push_back(exprs(row));
        const double scan = std::min(c.t_max, std::max(cfg.times.t, cfg.times.T));
        set = std::make_shared<CoefficientSet>(custom_family(Q, M, exprs(c.c), c.mu, scan));
    } else {
        FamilyParams fp;
        fp.dim = c.dim;
        fp.sigma = c.sigma;
        fp.a = Expression::parse(c.a);
        if (!c.A0.empty()) {
            fp.A0 = Matrix(c.dim, c.dim);
            for (int i = 0; i < c.dim; ++i)
                for (int k = 0; k < c.dim; ++k)
                    fp.A0(i, k) = c.A0[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        }
        fp.omega = Expression::parse(c.omega);
        fp.drift = exprs(c.drift);
        set = std::make_shared<CoefficientSet>(builtin_family(c.family, fp));
        if (c.mu) {
            // A user-supplied mu must hold on the working interval.
            const double scan = std::min(c.t_max, std::max(cfg.times.t, cfg.times.T));
            const auto rep = check_ellipticity(*set, 0.0, scan, 200);
            if (rep.min_singular_value < *c.mu - 1e-12)
                throw ConfigError("coefficients.mu: " + std::to_string(*c.mu) +
                                  " exceeds the smallest singular value of Q(t), " +
                                  std::to_string(rep.min_singular_value));
            set = std::make_shared<CoefficientSet>(set->dim(), [set](double t) { return set->Q(t); },
                                                   [set](double t) { return set->M(t); },
                                                   [set](double t) { return set->c(t); }, *c.mu, set->tag(),
                                                   set->autonomous(), set->t_max());
        }
    }
    if (cfg.coefficients.t_max < set->t_max()) {
        auto base = set;
        set = std::make_shared<CoefficientSet>(base->dim(), [base](double t) { return base->Q(t); },
                                               [base](double t) { return base->M(t); },
                                               [base](double t) { return base->c(t); }, base->mu(), base->tag(),
                                               base->autonomous(), cfg.coefficients.t_max);
    }
    return set;
}

std::shared_ptr<const PropagatorCache> build_cache(const RunConfig& cfg) {
    PropagatorOptions po;
    po.ode_tol = cfg.scheme.ode_tol;
    po.quad_nodes = cfg.scheme.quad_nodes;
    return std::make_shared<const PropagatorCache>(build_coefficients(cfg), po);
}

Grid build_grid(const RunConfig& cfg) { return Grid::with_spacing(cfg.dim(), cfg.box_lo, cfg.box_hi, cfg.h); }

GridFunction build_initial(const RunConfig& cfg, const Grid& g) {
    const InitialConfig& in = cfg.initial;
    auto vec = [](const std::vector<double>& v) {
        Vector x(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
        return x;
    };
    if (in.kind == "zero") return GridFunction(g);
    if (in.kind == "gaussian_bump") return gaussian_bump(g, vec(in.center), in.width);
    if (in.kind == "sharp_bump") return sharp_bump(g, vec(in.center));
    if (in.kind == "smoothed_indicator") return smoothed_indicator(g, vec(in.a), vec(in.b), in.ramp);
    if (in.kind == "sine_mode") return sine_mode(g, in.k);
    return read_csv(in.path, g);
}

std::vector<double> build_gaps(const RunConfig& cfg) {
    if (!cfg.times.gaps.empty()) return cfg.times.gaps;
    return log_spaced(cfg.times.gap_min, cfg.times.gap_max, cfg.times.n_gaps);
}

WholeSpaceOptions wholespace_options(const RunConfig& cfg) {
    WholeSpaceOptions o;
    o.kernel_cut = cfg.scheme.kernel_cut;
    o.interp_order = cfg.scheme.interp_order;
    return o;
}

BoundedOptions bounded_options(const RunConfig& cfg) {
    BoundedOptions o;
    o.theta = cfg.scheme.theta;
    o.dt = cfg.scheme.dt;
    o.min_steps = cfg.scheme.min_steps;
    o.startup_steps = cfg.scheme.startup_steps;
    return o;
}

ExteriorOptions exterior_options(const RunConfig& cfg) {
    ExteriorOptions o;
    o.quad_nodes = cfg.scheme.picard_nodes;
    o.first_level_nodes = cfg.scheme.first_level_nodes;
    o.k_max = cfg.scheme.k_max;
    o.series_tol = cfg.scheme.series_tol;
    o.norm_p = cfg.verify.p;
    o.wholespace = wholespace_options(cfg);
    o.bounded = bounded_options(cfg);
    return o;
}

}  // namespace ouevolve
