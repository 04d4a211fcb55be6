// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ouevolve/expression.hpp"

namespace ouevolve {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class FamilyTag { constant, scalar_commuting, rotation, custom };

std::string to_string(FamilyTag tag);

/// Time-dependent coefficient triple (Q, M, c) of the operator
///   1/2 Tr(Q Q^T D^2 u) + <M x + c, D u>
/// together with the ellipticity constant mu (|Q(t) x| >= mu |x|).
///
/// Immutable after construction. The evaluators check every entry for
/// finiteness and raise EvaluationError naming the offending time.
class CoefficientSet {
public:
    using MatrixFn = std::function<Matrix(double)>;
    using VectorFn = std::function<Vector(double)>;

    CoefficientSet(int dim, MatrixFn Q, MatrixFn M, VectorFn c, double mu, FamilyTag tag,
                   bool autonomous = false,
                   double t_max = std::numeric_limits<double>::infinity());

    int dim() const { return dim_; }
    double mu() const { return mu_; }
    FamilyTag tag() const { return tag_; }
    double t_max() const { return t_max_; }

    /// True when Q, M and c do not depend on t.
    bool autonomous() const { return autonomous_; }

    Matrix Q(double t) const;
    Matrix M(double t) const;
    Vector c(double t) const;

    /// Q(t) Q(t)^T.
    Matrix diffusion(double t) const;

    /// Same coefficients with c replaced.
    CoefficientSet with_drift(VectorFn c, bool drift_autonomous) const;

private:
    void check_time(double t) const;

    int dim_;
    MatrixFn Q_;
    MatrixFn M_;
    VectorFn c_;
    double mu_;
    FamilyTag tag_;
    bool autonomous_;
    double t_max_;
};

struct EllipticityReport {
    double min_singular_value = 0.0;
    double at_time = 0.0;
    bool violated = false;
};

/// Scans sigma_min(Q(t)) over n_samples equispaced times in [t0, t1].
EllipticityReport check_ellipticity(const CoefficientSet& coeffs, double t0, double t1,
                                    int n_samples);

/// Parameters of the built-in families. Unused fields are ignored by a family.
struct FamilyParams {
    int dim = 1;
    double sigma = 1.0;                    // Q = sigma * I
    Expression a = Expression::constant(0.0);      // scalar_commuting: M(t) = a(t) A0
    Matrix A0;                             // defaults to I_dim
    Expression omega = Expression::constant(1.0);  // rotation: M(t) = omega(t) J
    std::vector<Expression> drift;         // drifted: c(t); empty means c = 0
};

/// Built-in coefficient families with closed-form propagators:
///   "heat"              Q = sigma I, M = 0, c = 0
///   "scalar_commuting"  Q = sigma I, M(t) = a(t) A0
///   "rotation"          d = 2, Q = sigma I, M(t) = omega(t) J, J = [[0,-1],[1,0]]
///   "drifted"           heat family with c(t) = params.drift
/// A non-empty params.drift is added to any of them.
CoefficientSet builtin_family(const std::string& tag, const FamilyParams& params);

/// Coefficients from expression matrices. When mu is not given it defaults to
/// the smallest singular value scanned over [0, t_scan] minus a 1% margin; a
/// given mu must not exceed that scanned minimum.
CoefficientSet custom_family(const std::vector<std::vector<Expression>>& Q,
                             const std::vector<std::vector<Expression>>& M,
                             const std::vector<Expression>& c, std::optional<double> mu,
                             double t_scan);

}  // namespace ouevolve
