#include "semistart/regression.hpp"

#include "semistart/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace semistart {

std::string_view
to_string(MeanStartKind kind)
{
  return kind == MeanStartKind::constant ? "constant" : "linear";
}

MeanStartKind
parse_mean_start_kind(std::string_view name)
{
  if (name == "constant") {
    return MeanStartKind::constant;
  }
  if (name == "linear") {
    return MeanStartKind::linear;
  }
  throw std::invalid_argument("unknown mean start '" + std::string(name) + "'");
}

double
MeanStart::operator()(double x) const
{
  const double v = raw(x);
  if (std::abs(v) >= floor) {
    return v;
  }
  return v < 0.0 ? -floor : floor;
}

MeanStart
fit_mean_start(std::span<const double> x,
               std::span<const double> y,
               MeanStartKind kind)
{
  if (x.size() != y.size()) {
    throw std::invalid_argument("x and y must have the same length");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("mean start needs at least 2 pairs");
  }
  const double n = static_cast<double>(x.size());
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double syy = 0.0;
  for (double v : y) {
    syy += (v - ybar) * (v - ybar);
  }
  MeanStart s;
  s.kind = kind;
  s.b0 = ybar;
  if (kind == MeanStartKind::linear) {
    const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - xbar) * (x[i] - xbar);
      sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (!(sxx > 0.0)) {
      throw DomainError("degenerate design: all x are equal");
    }
    s.b1 = sxy / sxx;
    s.b0 = ybar - s.b1 * xbar;
  }
  // A tiny positive floor keeps 0/0 away when y is identically zero.
  s.floor = std::max(0.05 * std::sqrt(syy / n), std::numeric_limits<double>::min());
  return s;
}

RegressionFit
make_regression(std::vector<double> x,
                std::vector<double> y,
                KernelSpec kernel,
                double h,
                MeanStartKind kind)
{
  if (!(h > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " + std::to_string(h));
  }
  RegressionFit fit;
  fit.start = fit_mean_start(x, y, kind);
  fit.x = std::move(x);
  fit.y = std::move(y);
  fit.kernel = kernel;
  fit.h = h;
  return fit;
}

double
nw_estimate(std::span<const double> xs,
            std::span<const double> ys,
            const KernelSpec& kernel,
            double h,
            double x)
{
  if (!(h > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " + std::to_string(h));
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double k = kernel((x - xs[i]) / h);
    num += ys[i] * k;
    den += k;
  }
  if (!(den / h >= 1e-300)) {
    throw DomainError("no local data at x = " + std::to_string(x));
  }
  return num / den;
}

double
gnw_estimate(const RegressionFit& fit, double x)
{
  if (fit.start.kind == MeanStartKind::constant) {
    return nw_estimate(fit.x, fit.y, fit.kernel, fit.h, x);
  }
  const double mx = fit.start(x);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < fit.x.size(); ++i) {
    const double k = fit.kernel((x - fit.x[i]) / fit.h);
    num += fit.y[i] * (mx / fit.start(fit.x[i])) * k;
    den += k;
  }
  if (!(den / fit.h >= 1e-300)) {
    throw DomainError("no local data at x = " + std::to_string(x));
  }
  return num / den;
}

} // namespace semistart
