// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "ouevolve/coefficients.hpp"

namespace ouevolve {

/// Uniform Cartesian grid in one or two dimensions. Point (i, j) has flat
/// index i * n[1] + j, so the last axis varies fastest.
struct Grid {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> n{8, 1};

    Grid() = default;
    Grid(double lo0, double hi0, int n0);
    Grid(std::array<double, 2> lo, std::array<double, 2> hi, std::array<int, 2> n);

    /// Grid on [lo, hi]^dim with spacing as close to h as divides the box evenly.
    static Grid with_spacing(int dim, double lo, double hi, double h);

    double h(int axis) const { return (hi[axis] - lo[axis]) / (n[axis] - 1); }
    double cell_volume() const { return dim == 1 ? h(0) : h(0) * h(1); }
    std::size_t size() const {
        return dim == 1 ? static_cast<std::size_t>(n[0])
                        : static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]);
    }
    std::size_t index(int i, int j = 0) const {
        return dim == 1 ? static_cast<std::size_t>(i)
                        : static_cast<std::size_t>(i) * n[1] + static_cast<std::size_t>(j);
    }
    double coord(int axis, int i) const { return lo[axis] + i * h(axis); }
    /// Coordinates of the point with flat index k.
    Vector point(std::size_t k) const;
    /// Multi-index of flat index k.
    std::array<int, 2> multi(std::size_t k) const;
    bool contains(const Vector& x, double slack = 0.0) const;

    bool operator==(const Grid& o) const;
};

/// Samples on a Grid. An empty mask means every point is inside the domain;
/// otherwise mask[k] != 0 marks interior points and masked-out points hold 0.
struct GridFunction {
    Grid grid;
    std::vector<double> values;
    std::vector<char> mask;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double fill = 0.0);
    GridFunction(const Grid& g, std::vector<double> v, std::vector<char> m = {});

    bool masked() const { return !mask.empty(); }
    bool inside(std::size_t k) const { return mask.empty() || mask[k] != 0; }
    /// Zero every masked-out value.
    void apply_mask();
    GridFunction with_mask(std::vector<char> m) const;

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double a);
    void axpy(double a, const GridFunction& x);
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double a, GridFunction f);

/// Discrete L^p norm (sum |f|^p * cell volume)^(1/p) over unmasked points,
/// or the max for p = infinity. Requires p >= 1.
double lp_norm(const GridFunction& f, double p);

/// Central differences in the interior, second-order one-sided at box edges.
std::vector<GridFunction> gradient(const GridFunction& f);
/// Second derivatives ordered (0,0) for d = 1 and (0,0), (0,1), (1,1) for d = 2.
std::vector<GridFunction> hessian(const GridFunction& f);

struct SobolevNorms {
    double value = 0.0;      // ||f||_p
    double gradient = 0.0;   // || |Df| ||_p
    double hessian = 0.0;    // || |D^2 f|_F ||_p
    double weighted = 0.0;   // || |x| |Df| ||_p
};

SobolevNorms sobolev_seminorms(const GridFunction& f, double p);

/// W^{k,p} norm built from the seminorms, k in {0, 1, 2}.
double sobolev_norm(const SobolevNorms& s, int k, double p);

/// 1/2 Tr(Q Q^T D^2 u) + <M(t) x + c(t), D u> by grid finite differences.
GridFunction apply_operator(const CoefficientSet& coeffs, double t, const GridFunction& u);

struct InterpolationResult {
    std::vector<double> values;
    bool clamped = false;
};

/// Multilinear (order 1) or tensor-cubic Lagrange (order 3) interpolation.
/// Points outside the box are clamped when allowed, else ConfigError.
InterpolationResult interpolate(const GridFunction& f, const std::vector<Vector>& points,
                                int order, bool clamp = false);
double interpolate_at(const GridFunction& f, const Vector& x, int order);

/// f sampled onto another grid (cubic); identical grids copy.
GridFunction resample(const GridFunction& f, const Grid& out);

// Test data.
GridFunction gaussian_bump(const Grid& g, const Vector& center, double width);
GridFunction sharp_bump(const Grid& g, const Vector& center);
/// 1 on the box [a, b] (per axis), 0 outside [a - ramp, b + ramp], quintic ramps.
GridFunction smoothed_indicator(const Grid& g, const Vector& a, const Vector& b, double ramp);
/// prod_i sin(k pi (x_i - lo_i) / (hi_i - lo_i)).
GridFunction sine_mode(const Grid& g, int k);

/// C^2 quintic smoothstep: 0 for x <= 0, 1 for x >= 1.
double smoothstep(double x);
double smoothstep_d1(double x);
double smoothstep_d2(double x);

// CSV with header "x[,y],value", one row per grid point in flat-index order.
void write_csv(std::ostream& os, const GridFunction& f);
void write_csv(const std::string& path, const GridFunction& f);
/// Reads values for a known grid; coordinates must match within 1e-9.
GridFunction read_csv(const std::string& path, const Grid& g);

enum class DomainKind { whole_space, interval_complement, disc_complement };

/// Omega = R^d minus a closed ball of radius a (or all of R^d), with the
/// obstacle contained in B(R).
struct DomainSpec {
    DomainKind kind = DomainKind::whole_space;
    double a = 1.0;
    double R = 2.0;

    bool in_omega(const Vector& x) const;
    /// Checks a < R and that the grid box strictly contains B(R + 3).
    void validate(const Grid& g) const;
    std::vector<char> omega_mask(const Grid& g) const;
    /// D = Omega intersected with the open ball B(R + 3).
    std::vector<char> bounded_mask(const Grid& g) const;
    /// Omega points with R + 1 <= |x| <= R + 2.
    std::vector<char> annulus_mask(const Grid& g) const;
};

std::string to_string(DomainKind kind);

}  // namespace ouevolve
