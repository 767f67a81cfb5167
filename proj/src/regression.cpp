#include "porewet/regression.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace porewet {

std::optional<Eigen::MatrixXd> weighted_polyfit(std::span<const double> x, const Eigen::MatrixXd& y,
                                                std::span<const double> w, int degree) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const int cols = degree + 1;
  if (degree < 0 || n < cols || y.rows() != n || static_cast<Eigen::Index>(w.size()) != n) return std::nullopt;

  Eigen::MatrixXd V(n, cols);
  Eigen::MatrixXd Y(n, y.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sw = std::sqrt(std::max(w[i], 0.0));
    double p = 1.0;
    for (int j = 0; j < cols; ++j) {
      V(i, j) = sw * p;
      p *= x[i];
    }
    Y.row(i) = sw * y.row(i);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) return std::nullopt;
  Eigen::MatrixXd coeffs = qr.solve(Y);
  if (!coeffs.allFinite()) return std::nullopt;
  return coeffs;
}

Eigen::RowVectorXd polyval(const Eigen::MatrixXd& coeffs, double x) {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(coeffs.cols());
  double p = 1.0;
  for (Eigen::Index j = 0; j < coeffs.rows(); ++j) {
    out += p * coeffs.row(j);
    p *= x;
  }
  return out;
}

double tricube(double d, double h) {
  const double u = std::abs(d) / h;
  if (u >= 1.0) return 0.0;
  const double t = 1.0 - u * u * u;
  return t * t * t;
}

namespace {

// Local linear fit at x0 with combined weights; falls back to the weighted
// mean when the predictor has no spread under the kernel.
std::optional<double> local_linear(std::span<const double> x, std::span<const double> y,
                                   const std::vector<double>& robust, double x0, double h) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = tricube(x[i] - x0, h) * robust[i];
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  if (!(sw > 0.0)) return std::nullopt;
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = tricube(x[i] - x0, h) * robust[i];
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-12 * sw * h * h) return my;
  return my + (sxy / sxx) * (x0 - mx);
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

} // namespace

std::optional<double> lowess_at(std::span<const double> x, std::span<const double> y, double x0,
                                const LowessParams& params) {
  if (x.empty() || x.size() != y.size() || !(params.bandwidth > 0.0)) return std::nullopt;
  std::vector<double> robust(x.size(), 1.0);
  std::vector<double> resid(x.size());
  for (int it = 0; it < params.robust_iterations; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto fit = local_linear(x, y, robust, x[i], params.bandwidth);
      resid[i] = fit ? std::abs(y[i] - *fit) : 0.0;
    }
    const double s = median(resid);
    if (!(s > 0.0)) break;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = resid[i] / (6.0 * s);
      robust[i] = u < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
    }
  }
  return local_linear(x, y, robust, x0, params.bandwidth);
}

} // namespace porewet
