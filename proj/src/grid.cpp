// SPDX-License-Identifier: MIT
#include "ouevolve/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "ouevolve/errors.hpp"

namespace ouevolve {

Grid::Grid(double lo0, double hi0, int n0) : dim(1), lo{lo0, 0.0}, hi{hi0, 1.0}, n{n0, 1} {
    if (n0 < 8) throw ConfigError("grid needs at least 8 points per axis");
    if (!(hi0 > lo0)) throw ConfigError("grid needs hi > lo");
}

Grid::Grid(std::array<double, 2> lo_, std::array<double, 2> hi_, std::array<int, 2> n_)
    : dim(2), lo(lo_), hi(hi_), n(n_) {
    for (int a = 0; a < 2; ++a) {
        if (n[a] < 8) throw ConfigError("grid needs at least 8 points per axis");
        if (!(hi[a] > lo[a])) throw ConfigError("grid needs hi > lo");
    }
}

Grid Grid::with_spacing(int dim, double lo, double hi, double h) {
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
    const int n = static_cast<int>(std::lround((hi - lo) / h)) + 1;
    if (dim == 1) return Grid(lo, hi, n);
    if (dim == 2) return Grid({lo, lo}, {hi, hi}, {n, n});
    throw ConfigError("grids support d = 1 or d = 2 only");
}

Vector Grid::point(std::size_t k) const {
    Vector x(dim);
    if (dim == 1) {
        x(0) = coord(0, static_cast<int>(k));
    } else {
        x(0) = coord(0, static_cast<int>(k / n[1]));
        x(1) = coord(1, static_cast<int>(k % n[1]));
    }
    return x;
}

std::array<int, 2> Grid::multi(std::size_t k) const {
    if (dim == 1) return {static_cast<int>(k), 0};
    return {static_cast<int>(k / n[1]), static_cast<int>(k % n[1])};
}

bool Grid::contains(const Vector& x, double slack) const {
    for (int a = 0; a < dim; ++a)
        if (x(a) < lo[a] - slack || x(a) > hi[a] + slack) return false;
    return true;
}

bool Grid::operator==(const Grid& o) const {
    if (dim != o.dim) return false;
    for (int a = 0; a < dim; ++a)
        if (lo[a] != o.lo[a] || hi[a] != o.hi[a] || n[a] != o.n[a]) return false;
    return true;
}

GridFunction::GridFunction(const Grid& g, double fill) : grid(g), values(g.size(), fill) {}

GridFunction::GridFunction(const Grid& g, std::vector<double> v, std::vector<char> m)
    : grid(g), values(std::move(v)), mask(std::move(m)) {
    if (values.size() != grid.size()) throw ConfigError("grid function size mismatch");
    if (!mask.empty() && mask.size() != grid.size()) throw ConfigError("mask size mismatch");
}

void GridFunction::apply_mask() {
    if (mask.empty()) return;
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!mask[k]) values[k] = 0.0;
}

GridFunction GridFunction::with_mask(std::vector<char> m) const {
    GridFunction out(grid, values, std::move(m));
    out.apply_mask();
    return out;
}

namespace {

void check_same(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid == b.grid)) throw ConfigError("grid functions live on different grids");
}

}  // namespace

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    check_same(*this, o);
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    check_same(*this, o);
    for (std::size_t k = 0; k < values.size(); ++k) values[k] -= o.values[k];
    return *this;
}

GridFunction& GridFunction::operator*=(double a) {
    for (double& v : values) v *= a;
    return *this;
}

void GridFunction::axpy(double a, const GridFunction& x) {
    check_same(*this, x);
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += a * x.values[k];
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double a, GridFunction f) { return f *= a; }

double lp_norm(const GridFunction& f, double p) {
    if (!(p >= 1.0)) throw ConfigError("lp_norm needs p >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t k = 0; k < f.values.size(); ++k)
            if (f.inside(k)) m = std::max(m, std::abs(f.values[k]));
        return m;
    }
    // Scale by the max first so large p cannot overflow.
    double m = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (f.inside(k)) m = std::max(m, std::abs(f.values[k]));
    if (m == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (f.inside(k)) sum += std::pow(std::abs(f.values[k]) / m, p);
    return m * std::pow(sum * f.grid.cell_volume(), 1.0 / p);
}

namespace {

// First derivative along `axis` at line position i of a line with n points.
template <class Get>
double diff1(Get get, int i, int n, double h) {
    if (i == 0) return (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h);
    if (i == n - 1) return (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / (2.0 * h);
    return (get(i + 1) - get(i - 1)) / (2.0 * h);
}

template <class Get>
double diff2(Get get, int i, int n, double h) {
    const double h2 = h * h;
    if (i == 0) return (2.0 * get(0) - 5.0 * get(1) + 4.0 * get(2) - get(3)) / h2;
    if (i == n - 1) return (2.0 * get(n - 1) - 5.0 * get(n - 2) + 4.0 * get(n - 3) - get(n - 4)) / h2;
    return (get(i + 1) - 2.0 * get(i) + get(i - 1)) / h2;
}

GridFunction derivative(const GridFunction& f, int axis, int order) {
    const Grid& g = f.grid;
    GridFunction out(g);
    out.mask = f.mask;
    const double h = g.h(axis);
    const int n = g.n[axis];
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto [i, j] = g.multi(k);
        const int pos = axis == 0 ? i : j;
        auto get = [&](int q) {
            return axis == 0 ? f.values[g.index(q, j)] : f.values[g.index(i, q)];
        };
        out.values[k] = order == 1 ? diff1(get, pos, n, h) : diff2(get, pos, n, h);
    }
    out.apply_mask();
    return out;
}

}  // namespace

std::vector<GridFunction> gradient(const GridFunction& f) {
    std::vector<GridFunction> out;
    for (int a = 0; a < f.grid.dim; ++a) out.push_back(derivative(f, a, 1));
    return out;
}

std::vector<GridFunction> hessian(const GridFunction& f) {
    if (f.grid.dim == 1) return {derivative(f, 0, 2)};
    GridFunction fx = derivative(f, 0, 1);
    fx.mask.clear();
    GridFunction fxy = derivative(fx, 1, 1);
    fxy.mask = f.mask;
    fxy.apply_mask();
    return {derivative(f, 0, 2), fxy, derivative(f, 1, 2)};
}

SobolevNorms sobolev_seminorms(const GridFunction& f, double p) {
    const Grid& g = f.grid;
    for (int a = 0; a < g.dim; ++a)
        if (g.n[a] < 5) throw ConfigError("sobolev_seminorms needs at least 3 interior points");
    const auto D = gradient(f);
    const auto H = hessian(f);
    GridFunction grad_mag(g), hess_mag(g), weighted(g);
    grad_mag.mask = hess_mag.mask = weighted.mask = f.mask;
    for (std::size_t k = 0; k < g.size(); ++k) {
        double gsq = 0.0;
        for (const auto& d : D) gsq += d.values[k] * d.values[k];
        double hsq = 0.0;
        if (g.dim == 1) {
            hsq = H[0].values[k] * H[0].values[k];
        } else {
            hsq = H[0].values[k] * H[0].values[k] + 2.0 * H[1].values[k] * H[1].values[k] +
                  H[2].values[k] * H[2].values[k];
        }
        grad_mag.values[k] = std::sqrt(gsq);
        hess_mag.values[k] = std::sqrt(hsq);
        weighted.values[k] = g.point(k).norm() * grad_mag.values[k];
    }
    return {lp_norm(f, p), lp_norm(grad_mag, p), lp_norm(hess_mag, p), lp_norm(weighted, p)};
}

double sobolev_norm(const SobolevNorms& s, int k, double p) {
    if (k < 0 || k > 2) throw ConfigError("sobolev_norm supports k in {0, 1, 2}");
    if (std::isinf(p)) {
        double m = s.value;
        if (k >= 1) m = std::max(m, s.gradient);
        if (k >= 2) m = std::max(m, s.hessian);
        return m;
    }
    double sum = std::pow(s.value, p);
    if (k >= 1) sum += std::pow(s.gradient, p);
    if (k >= 2) sum += std::pow(s.hessian, p);
    return std::pow(sum, 1.0 / p);
}

GridFunction apply_operator(const CoefficientSet& coeffs, double t, const GridFunction& u) {
    const Grid& g = u.grid;
    if (coeffs.dim() != g.dim) throw ConfigError("operator dimension does not match the grid");
    const Matrix A = 0.5 * coeffs.diffusion(t);
    const Matrix M = coeffs.M(t);
    const Vector c = coeffs.c(t);
    const auto D = gradient(u);
    const auto H = hessian(u);
    GridFunction out(g);
    out.mask = u.mask;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vector b = M * g.point(k) + c;
        double v = 0.0;
        if (g.dim == 1) {
            v = A(0, 0) * H[0].values[k] + b(0) * D[0].values[k];
        } else {
            v = A(0, 0) * H[0].values[k] + (A(0, 1) + A(1, 0)) * H[1].values[k] +
                A(1, 1) * H[2].values[k] + b(0) * D[0].values[k] + b(1) * D[1].values[k];
        }
        out.values[k] = v;
    }
    out.apply_mask();
    return out;
}

namespace {

// Lagrange weights on nodes 0..3 at local coordinate u.
std::array<double, 4> cubic_weights(double u) {
    return {-(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0, u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0, u * (u - 1.0) * (u - 2.0) / 6.0};
}

struct AxisStencil {
    int first = 0;
    int count = 0;
    std::array<double, 4> w{};
};

AxisStencil axis_stencil(const Grid& g, int axis, double x, int order) {
    const int n = g.n[axis];
    const double p = (x - g.lo[axis]) / g.h(axis);
    AxisStencil s;
    if (order == 1) {
        int i0 = std::clamp(static_cast<int>(std::floor(p)), 0, n - 2);
        const double u = p - i0;
        s.first = i0;
        s.count = 2;
        s.w = {1.0 - u, u, 0.0, 0.0};
    } else {
        int i0 = std::clamp(static_cast<int>(std::floor(p)) - 1, 0, n - 4);
        s.first = i0;
        s.count = 4;
        s.w = cubic_weights(p - i0);
    }
    return s;
}

double interpolate_one(const GridFunction& f, const Vector& x, int order) {
    const Grid& g = f.grid;
    const AxisStencil s0 = axis_stencil(g, 0, x(0), order);
    if (g.dim == 1) {
        double v = 0.0;
        for (int a = 0; a < s0.count; ++a) v += s0.w[a] * f.values[g.index(s0.first + a)];
        return v;
    }
    const AxisStencil s1 = axis_stencil(g, 1, x(1), order);
    double v = 0.0;
    for (int a = 0; a < s0.count; ++a) {
        double row = 0.0;
        for (int b = 0; b < s1.count; ++b)
            row += s1.w[b] * f.values[g.index(s0.first + a, s1.first + b)];
        v += s0.w[a] * row;
    }
    return v;
}

}  // namespace

InterpolationResult interpolate(const GridFunction& f, const std::vector<Vector>& points,
                                int order, bool clamp) {
    if (order != 1 && order != 3) throw ConfigError("interpolation order must be 1 or 3");
    const Grid& g = f.grid;
    InterpolationResult r;
    r.values.reserve(points.size());
    for (const Vector& x : points) {
        if (x.size() != g.dim) throw ConfigError("interpolation point has wrong dimension");
        Vector y = x;
        bool outside = false;
        for (int a = 0; a < g.dim; ++a) {
            const double slack = 1e-12 * (g.hi[a] - g.lo[a]);
            if (y(a) < g.lo[a] - slack || y(a) > g.hi[a] + slack) outside = true;
            y(a) = std::clamp(y(a), g.lo[a], g.hi[a]);
        }
        if (outside) {
            if (!clamp) throw ConfigError("interpolation point outside the grid box");
            r.clamped = true;
        }
        r.values.push_back(interpolate_one(f, y, order));
    }
    return r;
}

double interpolate_at(const GridFunction& f, const Vector& x, int order) {
    return interpolate(f, {x}, order, false).values.front();
}

GridFunction resample(const GridFunction& f, const Grid& out) {
    if (f.grid == out) return f;
    std::vector<Vector> pts;
    pts.reserve(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) pts.push_back(out.point(k));
    // Points beyond f's box carry the zero extension.
    GridFunction r(out);
    for (std::size_t k = 0; k < out.size(); ++k)
        if (f.grid.contains(pts[k], 1e-12)) r.values[k] = interpolate_one(f, pts[k], 3);
    return r;
}

GridFunction gaussian_bump(const Grid& g, const Vector& center, double width) {
    if (!(width > 0.0)) throw ConfigError("gaussian_bump width must be positive");
    if (center.size() != g.dim) throw ConfigError("gaussian_bump center has wrong dimension");
    GridFunction f(g);
    const double norm = std::pow(2.0 * std::numbers::pi * width * width, -0.5 * g.dim);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double r2 = (g.point(k) - center).squaredNorm();
        f.values[k] = norm * std::exp(-0.5 * r2 / (width * width));
    }
    return f;
}

GridFunction sharp_bump(const Grid& g, const Vector& center) {
    double h = g.h(0);
    if (g.dim == 2) h = std::max(h, g.h(1));
    return gaussian_bump(g, center, 4.0 * h);
}

double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

double smoothstep_d1(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return 30.0 * x * x * (x - 1.0) * (x - 1.0);
}

double smoothstep_d2(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return 60.0 * x * (2.0 * x - 1.0) * (x - 1.0);
}

GridFunction smoothed_indicator(const Grid& g, const Vector& a, const Vector& b, double ramp) {
    if (!(ramp > 0.0)) throw ConfigError("smoothed_indicator ramp must be positive");
    if (a.size() != g.dim || b.size() != g.dim)
        throw ConfigError("smoothed_indicator box has wrong dimension");
    GridFunction f(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vector x = g.point(k);
        double v = 1.0;
        for (int i = 0; i < g.dim; ++i)
            v *= smoothstep((x(i) - a(i) + ramp) / ramp) * smoothstep((b(i) + ramp - x(i)) / ramp);
        f.values[k] = v;
    }
    return f;
}

GridFunction sine_mode(const Grid& g, int k) {
    GridFunction f(g);
    for (std::size_t q = 0; q < g.size(); ++q) {
        const auto idx = g.multi(q);
        double v = 1.0;
        for (int a = 0; a < g.dim; ++a) {
            // Index-based phase keeps the endpoint values at rounding level.
            v *= std::sin(k * std::numbers::pi * idx[a] / (g.n[a] - 1));
        }
        f.values[q] = v;
    }
    return f;
}

void write_csv(std::ostream& os, const GridFunction& f) {
    const Grid& g = f.grid;
    os << (g.dim == 1 ? "x,value\n" : "x,y,value\n");
    char buf[128];
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vector x = g.point(k);
        if (g.dim == 1)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x(0), f.values[k]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x(0), x(1), f.values[k]);
        os << buf;
    }
}

void write_csv(const std::string& path, const GridFunction& f) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path);
    write_csv(os, f);
}

GridFunction read_csv(const std::string& path, const Grid& g) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path);
    std::string line;
    std::getline(is, line);
    GridFunction f(g);
    std::size_t k = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (k >= g.size()) throw ConfigError(path + ": more rows than grid points");
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != g.dim + 1)
            throw ConfigError(path + ": row " + std::to_string(k + 2) + " has wrong column count");
        const Vector x = g.point(k);
        for (int a = 0; a < g.dim; ++a)
            if (std::abs(row[a] - x(a)) > 1e-9 * (1.0 + std::abs(x(a))))
                throw ConfigError(path + ": coordinates do not match the grid at row " +
                                  std::to_string(k + 2));
        f.values[k++] = row.back();
    }
    if (k != g.size()) throw ConfigError(path + ": fewer rows than grid points");
    return f;
}

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::whole_space: return "whole_space";
        case DomainKind::interval_complement: return "interval_complement";
        case DomainKind::disc_complement: return "disc_complement";
    }
    return "whole_space";
}

bool DomainSpec::in_omega(const Vector& x) const {
    if (kind == DomainKind::whole_space) return true;
    return x.norm() > a * (1.0 + 1e-12);
}

void DomainSpec::validate(const Grid& g) const {
    if (kind == DomainKind::whole_space) return;
    if (kind == DomainKind::interval_complement && g.dim != 1)
        throw ConfigError("interval_complement needs a one-dimensional grid");
    if (kind == DomainKind::disc_complement && g.dim != 2)
        throw ConfigError("disc_complement needs a two-dimensional grid");
    if (!(a > 0.0)) throw ConfigError("obstacle radius must be positive");
    if (!(a < R)) throw ConfigError("obstacle radius must be smaller than R");
    for (int ax = 0; ax < g.dim; ++ax)
        if (!(g.lo[ax] < -(R + 3.0)) || !(g.hi[ax] > R + 3.0))
            throw ConfigError("grid box must strictly contain the ball B(R + 3)");
}

std::vector<char> DomainSpec::omega_mask(const Grid& g) const {
    std::vector<char> m(g.size(), 1);
    for (std::size_t k = 0; k < g.size(); ++k) m[k] = in_omega(g.point(k)) ? 1 : 0;
    return m;
}

std::vector<char> DomainSpec::bounded_mask(const Grid& g) const {
    std::vector<char> m(g.size(), 0);
    const double outer = (R + 3.0) * (1.0 - 1e-12);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vector x = g.point(k);
        m[k] = (in_omega(x) && x.norm() < outer) ? 1 : 0;
    }
    return m;
}

std::vector<char> DomainSpec::annulus_mask(const Grid& g) const {
    std::vector<char> m(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vector x = g.point(k);
        const double r = x.norm();
        m[k] = (in_omega(x) && r >= (R + 1.0) - 1e-12 && r <= (R + 2.0) + 1e-12) ? 1 : 0;
    }
    return m;
}

}  // namespace ouevolve
