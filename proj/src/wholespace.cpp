// SPDX-License-Identifier: MIT
#include "ouevolve/wholespace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ouevolve/errors.hpp"
#include "ouevolve/parallel.hpp"

namespace ouevolve {

double kernel_eval(const KernelParams& params, const Vector& x) {
    if (params.chol.size() == 0) throw ConfigError("kernel_eval: parameters are not factorized");
    const Vector z = params.chol.triangularView<Eigen::Lower>().solve(x);
    const int d = params.dim();
    return std::exp(-0.5 * z.squaredNorm() - 0.5 * params.logdet -
                    0.5 * d * std::log(2.0 * std::numbers::pi));
}

namespace {

struct IndexBox {
    std::array<long, 2> lo{0, 0};
    std::array<long, 2> hi{-1, -1};  // inclusive
    bool empty(int dim) const {
        for (int a = 0; a < dim; ++a)
            if (hi[a] < lo[a]) return true;
        return false;
    }
};

// Values on an unbounded lattice, zero outside the stored box.
struct Lattice {
    int dim = 1;
    IndexBox box;
    long n1 = 1;
    std::vector<double> data;

    double at(long i, long j) const {
        if (i < box.lo[0] || i > box.hi[0]) return 0.0;
        if (dim == 1) return data[static_cast<std::size_t>(i - box.lo[0])];
        if (j < box.lo[1] || j > box.hi[1]) return 0.0;
        return data[static_cast<std::size_t>((i - box.lo[0]) * n1 + (j - box.lo[1]))];
    }
};

struct Stencil1D {
    long r = 0;
    std::vector<double> w;  // w[l + r]
    double operator[](long l) const { return w[static_cast<std::size_t>(l + r)]; }
};

Stencil1D value_stencil(double var, double h, double cut) {
    Stencil1D s;
    s.r = std::max(1L, static_cast<long>(std::ceil(cut * std::sqrt(var) / h)));
    s.w.resize(static_cast<std::size_t>(2 * s.r + 1));
    double sum = 0.0;
    for (long l = -s.r; l <= s.r; ++l) {
        const double z = l * h;
        s.w[static_cast<std::size_t>(l + s.r)] = std::exp(-0.5 * z * z / var);
        sum += s.w[static_cast<std::size_t>(l + s.r)];
    }
    for (double& v : s.w) v /= sum;
    return s;
}

// Derivative of the kernel, rescaled so that sum_l G[l] (l h) = -1 (the first
// moment of the continuous kernel gradient). Reduces to the central difference
// when the kernel is narrower than a cell.
Stencil1D gradient_stencil(const Stencil1D& K, double var, double h) {
    Stencil1D G;
    G.r = K.r;
    G.w.assign(K.w.size(), 0.0);
    double moment = 0.0;
    for (long l = -K.r; l <= K.r; ++l) {
        const double z = l * h;
        const double v = -z / var * K[l];
        G.w[static_cast<std::size_t>(l + K.r)] = v;
        moment += v * z;
    }
    if (K[1] / K[0] < 1e-200 || !(std::abs(moment) > 0.0)) {
        std::fill(G.w.begin(), G.w.end(), 0.0);
        G.w[static_cast<std::size_t>(K.r + 1)] = -0.5 / h;
        G.w[static_cast<std::size_t>(K.r - 1)] = 0.5 / h;
        return G;
    }
    for (double& v : G.w) v *= -1.0 / moment;
    return G;
}

// Full 2-D stencil for a non-diagonal covariance.
struct Stencil2D {
    std::array<long, 2> r{0, 0};
    std::vector<double> w;
    double at(long l0, long l1) const {
        return w[static_cast<std::size_t>((l0 + r[0]) * (2 * r[1] + 1) + (l1 + r[1]))];
    }
};

struct Stencils2D {
    Stencil2D K;
    std::array<Stencil2D, 2> G;
};

Stencils2D full_stencils(const KernelParams& kp, const Grid& g, double cut) {
    Stencils2D s;
    for (int a = 0; a < 2; ++a)
        s.K.r[a] = std::max(1L, static_cast<long>(std::ceil(cut * kp.sigma_max / g.h(a))));
    const long w0 = 2 * s.K.r[0] + 1;
    const long w1 = 2 * s.K.r[1] + 1;
    s.K.w.assign(static_cast<std::size_t>(w0 * w1), 0.0);
    s.G[0] = s.G[1] = s.K;
    double sum = 0.0;
    for (long l0 = -s.K.r[0]; l0 <= s.K.r[0]; ++l0)
        for (long l1 = -s.K.r[1]; l1 <= s.K.r[1]; ++l1) {
            Vector z(2);
            z << l0 * g.h(0), l1 * g.h(1);
            const double v = std::exp(-0.5 * z.dot(kp.Q_inv * z));
            s.K.w[static_cast<std::size_t>((l0 + s.K.r[0]) * w1 + (l1 + s.K.r[1]))] = v;
            sum += v;
        }
    for (double& v : s.K.w) v /= sum;

    Matrix moment = Matrix::Zero(2, 2);
    for (long l0 = -s.K.r[0]; l0 <= s.K.r[0]; ++l0)
        for (long l1 = -s.K.r[1]; l1 <= s.K.r[1]; ++l1) {
            Vector z(2);
            z << l0 * g.h(0), l1 * g.h(1);
            const std::size_t k = static_cast<std::size_t>((l0 + s.K.r[0]) * w1 + (l1 + s.K.r[1]));
            const Vector gv = -(kp.Q_inv * z) * s.K.w[k];
            s.G[0].w[k] = gv(0);
            s.G[1].w[k] = gv(1);
            moment += gv * z.transpose();
        }
    Eigen::FullPivLU<Matrix> lu(moment);
    if (!lu.isInvertible() || std::abs(moment.determinant()) < 1e-300) {
        for (int a = 0; a < 2; ++a) std::fill(s.G[a].w.begin(), s.G[a].w.end(), 0.0);
        auto set = [&](int comp, long l0, long l1, double v) {
            s.G[comp].w[static_cast<std::size_t>((l0 + s.K.r[0]) * w1 + (l1 + s.K.r[1]))] = v;
        };
        set(0, 1, 0, -0.5 / g.h(0));
        set(0, -1, 0, 0.5 / g.h(0));
        set(1, 0, 1, -0.5 / g.h(1));
        set(1, 0, -1, 0.5 / g.h(1));
        return s;
    }
    const Matrix corr = -lu.inverse();
    for (std::size_t k = 0; k < s.K.w.size(); ++k) {
        Vector gv(2);
        gv << s.G[0].w[k], s.G[1].w[k];
        const Vector c = corr * gv;
        s.G[0].w[k] = c(0);
        s.G[1].w[k] = c(1);
    }
    return s;
}

IndexBox support_box(const GridFunction& f, double threshold) {
    const Grid& g = f.grid;
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    IndexBox box;
    if (m == 0.0) return box;
    box.lo = {g.n[0], g.dim == 2 ? g.n[1] : 0};
    box.hi = {-1, g.dim == 2 ? -1 : 0};
    const double cut = threshold * m;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (std::abs(f.values[k]) <= cut) continue;
        const auto idx = g.multi(k);
        for (int a = 0; a < g.dim; ++a) {
            box.lo[a] = std::min<long>(box.lo[a], idx[a]);
            box.hi[a] = std::max<long>(box.hi[a], idx[a]);
        }
    }
    return box;
}

double grid_value(const GridFunction& f, long i, long j) {
    return f.values[f.grid.index(static_cast<int>(i), static_cast<int>(j))];
}

// out = (A0 x A1) * F on `target`, F read inside `src`.
Lattice convolve_separable(const GridFunction& F, const IndexBox& src, const IndexBox& target,
                           const Stencil1D& A0, const Stencil1D* A1) {
    const int dim = F.grid.dim;
    Lattice L;
    L.dim = dim;
    L.box = target;
    if (dim == 1) {
        const long n0 = target.hi[0] - target.lo[0] + 1;
        L.data.assign(static_cast<std::size_t>(n0), 0.0);
        parallel_for(static_cast<std::size_t>(n0), [&](std::size_t q) {
            const long m = target.lo[0] + static_cast<long>(q);
            const long j0 = std::max(src.lo[0], m - A0.r);
            const long j1 = std::min(src.hi[0], m + A0.r);
            double acc = 0.0;
            for (long j = j0; j <= j1; ++j) acc += A0[m - j] * grid_value(F, j, 0);
            L.data[q] = acc;
        });
        return L;
    }
    const long n0 = target.hi[0] - target.lo[0] + 1;
    const long n1 = target.hi[1] - target.lo[1] + 1;
    const long rows = src.hi[0] - src.lo[0] + 1;
    L.n1 = n1;
    // Axis 1 first, for every source row.
    std::vector<double> tmp(static_cast<std::size_t>(rows * n1), 0.0);
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t q) {
        const long i = src.lo[0] + static_cast<long>(q);
        for (long c = 0; c < n1; ++c) {
            const long m1 = target.lo[1] + c;
            const long j0 = std::max(src.lo[1], m1 - A1->r);
            const long j1 = std::min(src.hi[1], m1 + A1->r);
            double acc = 0.0;
            for (long j = j0; j <= j1; ++j) acc += (*A1)[m1 - j] * grid_value(F, i, j);
            tmp[static_cast<std::size_t>(static_cast<long>(q) * n1 + c)] = acc;
        }
    });
    L.data.assign(static_cast<std::size_t>(n0 * n1), 0.0);
    parallel_for(static_cast<std::size_t>(n0), [&](std::size_t q) {
        const long m0 = target.lo[0] + static_cast<long>(q);
        const long i0 = std::max(src.lo[0], m0 - A0.r);
        const long i1 = std::min(src.hi[0], m0 + A0.r);
        double* row = &L.data[q * static_cast<std::size_t>(n1)];
        for (long i = i0; i <= i1; ++i) {
            const double w = A0[m0 - i];
            const double* t = &tmp[static_cast<std::size_t>((i - src.lo[0]) * n1)];
            for (long c = 0; c < n1; ++c) row[c] += w * t[c];
        }
    });
    return L;
}

Lattice convolve_full(const GridFunction& F, const IndexBox& src, const IndexBox& target,
                      const Stencil2D& K) {
    Lattice L;
    L.dim = 2;
    L.box = target;
    const long n0 = target.hi[0] - target.lo[0] + 1;
    const long n1 = target.hi[1] - target.lo[1] + 1;
    L.n1 = n1;
    L.data.assign(static_cast<std::size_t>(n0 * n1), 0.0);
    parallel_for(static_cast<std::size_t>(n0), [&](std::size_t q) {
        const long m0 = target.lo[0] + static_cast<long>(q);
        const long i0 = std::max(src.lo[0], m0 - K.r[0]);
        const long i1 = std::min(src.hi[0], m0 + K.r[0]);
        for (long c = 0; c < n1; ++c) {
            const long m1 = target.lo[1] + c;
            const long j0 = std::max(src.lo[1], m1 - K.r[1]);
            const long j1 = std::min(src.hi[1], m1 + K.r[1]);
            double acc = 0.0;
            for (long i = i0; i <= i1; ++i)
                for (long j = j0; j <= j1; ++j) acc += K.at(m0 - i, m1 - j) * grid_value(F, i, j);
            L.data[static_cast<std::size_t>(static_cast<long>(q) * n1 + c)] = acc;
        }
    });
    return L;
}

struct LatticeWeights {
    long first = 0;
    int count = 0;
    std::array<double, 4> w{};
};

LatticeWeights lattice_weights(double p, int order) {
    LatticeWeights lw;
    const long f = static_cast<long>(std::floor(p));
    if (order == 1) {
        const double u = p - f;
        lw.first = f;
        lw.count = 2;
        lw.w = {1.0 - u, u, 0.0, 0.0};
    } else {
        const double u = p - (f - 1);
        lw.first = f - 1;
        lw.count = 4;
        lw.w = {-(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0, u * (u - 2.0) * (u - 3.0) / 2.0,
                -u * (u - 1.0) * (u - 3.0) / 2.0, u * (u - 1.0) * (u - 2.0) / 6.0};
    }
    return lw;
}

double lattice_interpolate(const Lattice& L, const Grid& g, const Vector& y, int order) {
    const LatticeWeights w0 = lattice_weights((y(0) - g.lo[0]) / g.h(0), order);
    if (g.dim == 1) {
        if (w0.first + w0.count - 1 < L.box.lo[0] || w0.first > L.box.hi[0]) return 0.0;
        double v = 0.0;
        for (int a = 0; a < w0.count; ++a) v += w0.w[a] * L.at(w0.first + a, 0);
        return v;
    }
    const LatticeWeights w1 = lattice_weights((y(1) - g.lo[1]) / g.h(1), order);
    if (w0.first + w0.count - 1 < L.box.lo[0] || w0.first > L.box.hi[0]) return 0.0;
    if (w1.first + w1.count - 1 < L.box.lo[1] || w1.first > L.box.hi[1]) return 0.0;
    double v = 0.0;
    for (int a = 0; a < w0.count; ++a) {
        double row = 0.0;
        for (int b = 0; b < w1.count; ++b) row += w1.w[b] * L.at(w0.first + a, w1.first + b);
        v += w0.w[a] * row;
    }
    return v;
}

bool decays_at_edge(const GridFunction& f) {
    const Grid& g = f.grid;
    double m = 0.0, edge = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double v = std::abs(f.values[k]);
        m = std::max(m, v);
        const auto idx = g.multi(k);
        bool on_edge = idx[0] == 0 || idx[0] == g.n[0] - 1;
        if (g.dim == 2) on_edge = on_edge || idx[1] == 0 || idx[1] == g.n[1] - 1;
        if (on_edge) edge = std::max(edge, v);
    }
    return edge <= 1e-8 * m;
}

std::vector<double> zero_extended(const GridFunction& f, const std::vector<Vector>& points, int order) {
    std::vector<double> out(points.size(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i)
        if (f.grid.contains(points[i], 1e-12 * (f.grid.hi[0] - f.grid.lo[0])))
            out[i] = interpolate(f, {points[i]}, order, true).values[0];
    return out;
}

}  // namespace

WholeSpace::WholeSpace(std::shared_ptr<const PropagatorCache> cache, WholeSpaceOptions options)
    : cache_(std::move(cache)), options_(options) {
    if (!cache_) throw ConfigError("WholeSpace needs a propagator cache");
    if (!(options_.kernel_cut >= 4.0)) throw ConfigError("kernel_cut must be at least 4");
    if (options_.interp_order != 1 && options_.interp_order != 3)
        throw ConfigError("interp_order must be 1 or 3");
}

std::vector<std::vector<double>> WholeSpace::evaluate(double t, double s, const GridFunction& f,
                                                      const std::vector<Vector>& points,
                                                      Kind kind) const {
    const Grid& g = f.grid;
    const int d = g.dim;
    if (cache_->dim() != d) throw ConfigError("coefficient dimension does not match the grid");
    if (!(t >= s)) throw ConfigError("whole-space evolution needs t >= s");
    const int order = options_.interp_order;
    const std::size_t np = points.size();
    const int channels = kind == Kind::value ? 1 : d;
    std::vector<std::vector<double>> out(static_cast<std::size_t>(channels),
                                         std::vector<double>(np, 0.0));

    if (t == s) {
        if (kind == Kind::value) {
            out[0] = zero_extended(f, points, 3);
        } else {
            const auto D = ouevolve::gradient(f);
            for (int a = 0; a < d; ++a) out[static_cast<std::size_t>(a)] = zero_extended(D[a], points, 3);
        }
        return out;
    }

    const KernelParams kp = cache_->covariance_Q(t, s);
    std::vector<Vector> images(np);
    for (std::size_t i = 0; i < np; ++i) images[i] = kp.U_st * points[i] + kp.g_ts;

    const bool decays = decays_at_edge(f);
    if (!decays) {
        for (const Vector& y : images)
            if (!g.contains(y, 1e-9)) {
                throw ConfigError(
                    "initial data does not vanish at the grid box edge and the affine pullback "
                    "leaves the box; enlarge the truncation box");
            }
    }

    // Inputs to convolve: f itself, or its finite-difference gradient.
    std::vector<GridFunction> inputs;
    if (kind == Kind::fd_gradient) {
        inputs = ouevolve::gradient(f);
        for (auto& in : inputs) in.mask.clear();
    } else {
        inputs.push_back(f);
        inputs.back().mask.clear();
    }

    const double cut = options_.kernel_cut;
    const double offdiag = d == 2 ? std::abs(kp.Q_ts(0, 1)) : 0.0;
    const bool separable = d == 1 || offdiag <= 1e-14 * kp.Q_ts.diagonal().maxCoeff();

    std::array<Stencil1D, 2> K1, G1;
    Stencils2D S2;
    std::array<long, 2> radius{0, 0};
    if (separable) {
        for (int a = 0; a < d; ++a) {
            K1[a] = value_stencil(kp.Q_ts(a, a), g.h(a), cut);
            G1[a] = gradient_stencil(K1[a], kp.Q_ts(a, a), g.h(a));
            radius[a] = K1[a].r;
        }
    } else {
        S2 = full_stencils(kp, g, cut);
        radius = S2.K.r;
    }

    // Lattice nodes touched by the pullback interpolation.
    IndexBox needed;
    needed.lo = {std::numeric_limits<long>::max(), d == 2 ? std::numeric_limits<long>::max() : 0};
    needed.hi = {std::numeric_limits<long>::min(), d == 2 ? std::numeric_limits<long>::min() : 0};
    for (const Vector& y : images) {
        for (int a = 0; a < d; ++a) {
            const LatticeWeights w = lattice_weights((y(a) - g.lo[a]) / g.h(a), order);
            needed.lo[a] = std::min(needed.lo[a], w.first);
            needed.hi[a] = std::max(needed.hi[a], w.first + w.count - 1);
        }
    }

    auto lattice_for = [&](const GridFunction& F, int variant) -> Lattice {
        // variant: -1 value stencil, a >= 0 kernel-gradient component a.
        const IndexBox src = support_box(F, options_.support_threshold);
        Lattice empty;
        empty.dim = d;
        if (src.empty(d)) return empty;
        IndexBox target;
        for (int a = 0; a < d; ++a) {
            target.lo[a] = std::max(needed.lo[a], src.lo[a] - radius[a]);
            target.hi[a] = std::min(needed.hi[a], src.hi[a] + radius[a]);
        }
        if (d == 1) target.lo[1] = target.hi[1] = 0;
        if (target.empty(d)) return empty;
        if (separable) {
            const Stencil1D& A0 = variant == 0 ? G1[0] : K1[0];
            const Stencil1D* A1 = d == 2 ? (variant == 1 ? &G1[1] : &K1[1]) : nullptr;
            return convolve_separable(F, src, target, A0, A1);
        }
        return convolve_full(F, src, target, variant < 0 ? S2.K : S2.G[variant]);
    };

    std::vector<Lattice> fields;
    if (kind == Kind::value) {
        fields.push_back(lattice_for(inputs[0], -1));
    } else if (kind == Kind::gradient) {
        for (int a = 0; a < d; ++a) fields.push_back(lattice_for(inputs[0], a));
    } else {
        for (int a = 0; a < d; ++a) fields.push_back(lattice_for(inputs[static_cast<std::size_t>(a)], -1));
    }

    const std::size_t chunk = 1024;
    const std::size_t nchunks = (np + chunk - 1) / chunk;
    const Matrix Ut = kp.U_st.transpose();
    parallel_for(nchunks, [&](std::size_t c) {
        const std::size_t i0 = c * chunk;
        const std::size_t i1 = std::min(np, i0 + chunk);
        for (std::size_t i = i0; i < i1; ++i) {
            if (kind == Kind::value) {
                out[0][i] = fields[0].data.empty() ? 0.0
                                                   : lattice_interpolate(fields[0], g, images[i], order);
                continue;
            }
            Vector v(d);
            for (int a = 0; a < d; ++a)
                v(a) = fields[static_cast<std::size_t>(a)].data.empty()
                           ? 0.0
                           : lattice_interpolate(fields[static_cast<std::size_t>(a)], g, images[i], order);
            const Vector r = Ut * v;
            for (int a = 0; a < d; ++a) out[static_cast<std::size_t>(a)][i] = r(a);
        }
    });
    return out;
}

std::vector<double> WholeSpace::apply_points(double t, double s, const GridFunction& f,
                                             const std::vector<Vector>& points) const {
    return evaluate(t, s, f, points, Kind::value)[0];
}

GridFunction WholeSpace::apply(double t, double s, const GridFunction& f, const Grid& out) const {
    if (t == s) return resample(f.with_mask({}), out);
    std::vector<Vector> pts(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) pts[k] = out.point(k);
    return GridFunction(out, apply_points(t, s, f, pts));
}

std::vector<Vector> WholeSpace::gradient_points(double t, double s, const GridFunction& f,
                                                const std::vector<Vector>& points,
                                                GradientPath path) const {
    const auto ch = evaluate(t, s, f, points,
                             path == GradientPath::kernel_gradient ? Kind::gradient : Kind::fd_gradient);
    std::vector<Vector> out(points.size(), Vector::Zero(f.grid.dim));
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int a = 0; a < f.grid.dim; ++a) out[i](a) = ch[static_cast<std::size_t>(a)][i];
    return out;
}

std::vector<GridFunction> WholeSpace::gradient(double t, double s, const GridFunction& f,
                                               const Grid& out, GradientPath path) const {
    std::vector<Vector> pts(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) pts[k] = out.point(k);
    const auto ch = evaluate(t, s, f, pts,
                             path == GradientPath::kernel_gradient ? Kind::gradient : Kind::fd_gradient);
    std::vector<GridFunction> res;
    for (const auto& c : ch) res.emplace_back(out, c);
    return res;
}

double WholeSpace::pde_residual(double t, double s, const GridFunction& f,
                                const std::vector<Vector>& probes, double dt) const {
    if (!(dt > 0.0) || !(t > s + 2.0 * dt))
        throw ConfigError("pde_residual needs dt > 0 and t > s + 2 dt");
    const Grid& g = f.grid;
    const GridFunction up = apply(t + dt, s, f, g);
    const GridFunction um = apply(t - dt, s, f, g);
    const GridFunction u = apply(t, s, f, g);
    const GridFunction Lu = apply_operator(cache_->coeffs(), t, u);
    GridFunction r = (1.0 / (2.0 * dt)) * (up - um);
    r -= Lu;
    const auto vals = interpolate(r, probes, 3, false).values;
    double m = 0.0;
    for (double v : vals) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace ouevolve
