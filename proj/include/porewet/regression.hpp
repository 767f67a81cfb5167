#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>

namespace porewet {

/// Weighted least-squares polynomial fit of several responses against one
/// predictor. Returns the (degree+1) x k coefficient matrix, lowest power
/// first, or nothing when the design matrix is rank deficient.
std::optional<Eigen::MatrixXd> weighted_polyfit(std::span<const double> x, const Eigen::MatrixXd& y,
                                                std::span<const double> w, int degree);

/// Evaluates every column of a polyfit coefficient matrix at x.
Eigen::RowVectorXd polyval(const Eigen::MatrixXd& coeffs, double x);

/// Tricube kernel weight of a point at distance `d` for half-width `h`.
double tricube(double d, double h);

struct LowessParams {
  /// Kernel half-width in predictor units; points at |x - x0| >= bandwidth get zero weight.
  double bandwidth = 1.0;
  /// Bisquare robustness passes after the initial fit.
  int robust_iterations = 2;
};

/// Locally weighted linear regression of y on x, evaluated at x0. Fails when
/// no point has positive kernel weight.
std::optional<double> lowess_at(std::span<const double> x, std::span<const double> y, double x0,
                                const LowessParams& params);

} // namespace porewet
