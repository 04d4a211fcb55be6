// SPDX-License-Identifier: MIT
#include "ouevolve/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ouevolve/errors.hpp"

namespace ouevolve {

std::string to_string(FamilyTag tag) {
    switch (tag) {
        case FamilyTag::constant: return "constant";
        case FamilyTag::scalar_commuting: return "scalar_commuting";
        case FamilyTag::rotation: return "rotation";
        case FamilyTag::custom: return "custom";
    }
    return "custom";
}

CoefficientSet::CoefficientSet(int dim, MatrixFn Q, MatrixFn M, VectorFn c, double mu,
                               FamilyTag tag, bool autonomous, double t_max)
    : dim_(dim),
      Q_(std::move(Q)),
      M_(std::move(M)),
      c_(std::move(c)),
      mu_(mu),
      tag_(tag),
      autonomous_(autonomous),
      t_max_(t_max) {
    if (dim_ < 1) throw ConfigError("coefficient dimension must be positive");
    if (!(mu_ > 0.0)) throw ConfigError("ellipticity constant mu must be positive");
}

void CoefficientSet::check_time(double t) const {
    if (!(t >= 0.0) || t > t_max_) throw EvaluationError("coefficient time outside [0, T_max]", t);
}

Matrix CoefficientSet::Q(double t) const {
    check_time(t);
    Matrix q = Q_(t);
    if (q.rows() != dim_ || q.cols() != dim_ || !q.allFinite())
        throw EvaluationError("Q(t) is not a finite " + std::to_string(dim_) + "x" +
                                  std::to_string(dim_) + " matrix",
                              t);
    return q;
}

Matrix CoefficientSet::M(double t) const {
    check_time(t);
    Matrix m = M_(t);
    if (m.rows() != dim_ || m.cols() != dim_ || !m.allFinite())
        throw EvaluationError("M(t) is not a finite " + std::to_string(dim_) + "x" +
                                  std::to_string(dim_) + " matrix",
                              t);
    return m;
}

Vector CoefficientSet::c(double t) const {
    check_time(t);
    Vector v = c_(t);
    if (v.size() != dim_ || !v.allFinite())
        throw EvaluationError("c(t) is not a finite vector of length " + std::to_string(dim_), t);
    return v;
}

Matrix CoefficientSet::diffusion(double t) const {
    const Matrix q = Q(t);
    return q * q.transpose();
}

CoefficientSet CoefficientSet::with_drift(VectorFn c, bool drift_autonomous) const {
    return CoefficientSet(dim_, Q_, M_, std::move(c), mu_, tag_, autonomous_ && drift_autonomous,
                          t_max_);
}

EllipticityReport check_ellipticity(const CoefficientSet& coeffs, double t0, double t1,
                                    int n_samples) {
    if (!(t0 <= t1)) throw ConfigError("check_ellipticity: need t0 <= t1");
    if (n_samples < 2) throw ConfigError("check_ellipticity: need at least 2 samples");
    EllipticityReport report;
    report.min_singular_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_samples; ++i) {
        const double t = t0 + (t1 - t0) * i / (n_samples - 1);
        Eigen::JacobiSVD<Matrix> svd(coeffs.Q(t));
        const double smin = svd.singularValues().minCoeff();
        if (smin < report.min_singular_value) {
            report.min_singular_value = smin;
            report.at_time = t;
        }
    }
    report.violated = report.min_singular_value < coeffs.mu() - 1e-12;
    return report;
}

namespace {

Matrix rotation_generator() {
    Matrix J(2, 2);
    J << 0.0, -1.0, 1.0, 0.0;
    return J;
}

CoefficientSet::VectorFn drift_function(const std::vector<Expression>& drift, int dim) {
    if (drift.empty()) {
        return [dim](double) { return Vector::Zero(dim); };
    }
    if (static_cast<int>(drift.size()) != dim)
        throw ConfigError("drift vector must have " + std::to_string(dim) + " entries");
    return [drift](double t) {
        Vector v(static_cast<Eigen::Index>(drift.size()));
        for (std::size_t i = 0; i < drift.size(); ++i) v(static_cast<Eigen::Index>(i)) = drift[i](t);
        return v;
    };
}

bool drift_autonomous(const std::vector<Expression>& drift) {
    return std::none_of(drift.begin(), drift.end(),
                        [](const Expression& e) { return e.depends_on_time(); });
}

}  // namespace

CoefficientSet builtin_family(const std::string& tag, const FamilyParams& params) {
    if (!(params.sigma > 0.0)) throw ConfigError("family '" + tag + "': sigma must be positive");
    const double sigma = params.sigma;

    if (tag == "heat" || tag == "drifted") {
        const int d = params.dim;
        if (d < 1) throw ConfigError("family '" + tag + "': dim must be positive");
        if (tag == "drifted" && params.drift.empty())
            throw ConfigError("family 'drifted' requires a drift vector c(t)");
        return CoefficientSet(
            d, [d, sigma](double) -> Matrix { return sigma * Matrix::Identity(d, d); },
            [d](double) -> Matrix { return Matrix::Zero(d, d); }, drift_function(params.drift, d),
            sigma, FamilyTag::constant, drift_autonomous(params.drift));
    }
    if (tag == "scalar_commuting") {
        const int d = params.dim;
        if (d < 1) throw ConfigError("family 'scalar_commuting': dim must be positive");
        Matrix A0 = params.A0.size() == 0 ? Matrix::Identity(d, d) : params.A0;
        if (A0.rows() != d || A0.cols() != d)
            throw ConfigError("family 'scalar_commuting': A0 must be " + std::to_string(d) + "x" +
                              std::to_string(d));
        Expression a = params.a;
        return CoefficientSet(
            d, [d, sigma](double) -> Matrix { return sigma * Matrix::Identity(d, d); },
            [a, A0](double t) -> Matrix { return a(t) * A0; }, drift_function(params.drift, d),
            sigma, FamilyTag::scalar_commuting,
            !a.depends_on_time() && drift_autonomous(params.drift));
    }
    if (tag == "rotation") {
        Expression omega = params.omega;
        const Matrix J = rotation_generator();
        return CoefficientSet(
            2, [sigma](double) -> Matrix { return sigma * Matrix::Identity(2, 2); },
            [omega, J](double t) -> Matrix { return omega(t) * J; },
            drift_function(params.drift, 2), sigma, FamilyTag::rotation,
            !omega.depends_on_time() && drift_autonomous(params.drift));
    }
    throw ConfigError("unknown coefficient family '" + tag + "'");
}

CoefficientSet custom_family(const std::vector<std::vector<Expression>>& Q,
                             const std::vector<std::vector<Expression>>& M,
                             const std::vector<Expression>& c, std::optional<double> mu,
                             double t_scan) {
    const int d = static_cast<int>(Q.size());
    if (d < 1) throw ConfigError("custom coefficients: Q must be a non-empty square matrix");
    auto check_square = [d](const std::vector<std::vector<Expression>>& A, const char* name) {
        if (static_cast<int>(A.size()) != d)
            throw ConfigError(std::string("custom coefficients: ") + name + " must have " +
                              std::to_string(d) + " rows");
        for (const auto& row : A)
            if (static_cast<int>(row.size()) != d)
                throw ConfigError(std::string("custom coefficients: ") + name + " must have " +
                                  std::to_string(d) + " columns");
    };
    check_square(Q, "Q");
    check_square(M, "M");

    auto as_matrix = [d](std::vector<std::vector<Expression>> A) {
        return [A = std::move(A), d](double t) {
            Matrix out(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) out(i, j) = A[i][j](t);
            return out;
        };
    };
    auto depends = [](const std::vector<std::vector<Expression>>& A) {
        for (const auto& row : A)
            for (const auto& e : row)
                if (e.depends_on_time()) return true;
        return false;
    };
    const bool autonomous = !depends(Q) && !depends(M) && drift_autonomous(c);

    // Scan with a provisional mu; the default is the observed minimum less 1%.
    CoefficientSet probe(d, as_matrix(Q), as_matrix(M), drift_function(c, d), 1.0, FamilyTag::custom,
                         autonomous);
    const auto report = check_ellipticity(probe, 0.0, t_scan, 257);
    double mu_value = 0.99 * report.min_singular_value;
    if (mu) {
        if (!(*mu > 0.0) || *mu > report.min_singular_value + 1e-12)
            throw ConfigError("custom coefficients: mu = " + std::to_string(*mu) +
                              " is not below the smallest singular value of Q(t), " +
                              std::to_string(report.min_singular_value) + " at t = " +
                              std::to_string(report.at_time));
        mu_value = *mu;
    } else if (!(mu_value > 0.0)) {
        throw ConfigError("custom coefficients: Q(t) is singular on the working interval");
    }
    return CoefficientSet(d, as_matrix(Q), as_matrix(M), drift_function(c, d), mu_value,
                          FamilyTag::custom, autonomous);
}

}  // namespace ouevolve
