#include "semistart/estimator.hpp"

#include "semistart/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace semistart {

double
estimate_kernel(std::span<const double> data,
                const KernelSpec& kernel,
                double h,
                double x)
{
  if (!(h > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " + std::to_string(h));
  }
  if (data.empty()) {
    throw std::invalid_argument("kernel estimate needs at least one observation");
  }
  double sum = 0.0;
  for (double xi : data) {
    sum += kernel((xi - x) / h);
  }
  return sum / (static_cast<double>(data.size()) * h);
}

DensityEstimate::DensityEstimate(std::vector<double> data,
                                 KernelSpec kernel,
                                 double h,
                                 FittedStart start,
                                 bool normalize)
  : data_(std::move(data))
  , kernel_(kernel)
  , h_(h)
  , start_(std::move(start))
  , normalize_(normalize)
{
  if (!(h_ > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " + std::to_string(h_));
  }
  if (data_.empty()) {
    throw std::invalid_argument("estimate needs at least one observation");
  }
  inv_start_.reserve(data_.size());
  for (double xi : data_) {
    inv_start_.push_back(1.0 / eval_start(start_, xi));
  }
  if (normal_gaussian()) {
    half_z2_.reserve(data_.size());
    for (double xi : data_) {
      double z = (xi - start_.mu) / start_.sd;
      if (start_.clip) {
        z = std::clamp(z, -*start_.clip, *start_.clip);
      }
      half_z2_.push_back(0.5 * z * z);
    }
  }
  if (normalize_) {
    norm_ = integral_of_estimate(*this).integral;
  }
}

bool
DensityEstimate::normal_gaussian() const
{
  return start_.family == StartFamily::normal &&
         kernel_.shape == KernelShape::gaussian;
}

double
DensityEstimate::correction(double x) const
{
  double sum = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    sum += kernel_((data_[i] - x) / h_) * inv_start_[i];
  }
  return sum / (static_cast<double>(data_.size()) * h_);
}

double
DensityEstimate::evaluate_generic(double x) const
{
  if (start_.family == StartFamily::constant) {
    return estimate_kernel(data_, kernel_, h_, x);
  }
  return eval_start(start_, x) * correction(x);
}

double
DensityEstimate::evaluate_raw(double x) const
{
  if (!normal_gaussian()) {
    return evaluate_generic(x);
  }
  // Exponent form: the start's normalizing constants cancel, and keeping
  // everything inside one exp avoids overflow of 1/f(X_i) in the tails.
  double zx = (x - start_.mu) / start_.sd;
  if (start_.clip) {
    zx = std::clamp(zx, -*start_.clip, *start_.clip);
  }
  const double half_zx2 = 0.5 * zx * zx;
  double sum = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double u = (data_[i] - x) / h_;
    sum += std::exp(half_z2_[i] - half_zx2 - 0.5 * u * u);
  }
  return kInvSqrt2Pi * sum / (static_cast<double>(data_.size()) * h_);
}

double
DensityEstimate::operator()(double x) const
{
  return evaluate_raw(x) / norm_;
}

std::vector<double>
DensityEstimate::evaluate(std::span<const double> grid) const
{
  std::vector<double> out(grid.size());
  std::transform(grid.begin(), grid.end(), out.begin(),
                 [this](double x) { return (*this)(x); });
  return out;
}

double
estimate_semiparametric(const DensityEstimate& e, double x)
{
  return e(x);
}

CorrectionCurve
correction_curve(const DensityEstimate& e, std::span<const double> grid)
{
  if (grid.empty()) {
    throw std::invalid_argument("correction curve needs a nonempty grid");
  }
  if (e.start().family == StartFamily::constant) {
    throw std::invalid_argument("correction curve needs a non-constant start");
  }
  const double nh = static_cast<double>(e.data().size()) * e.h();
  CorrectionCurve out;
  out.grid.assign(grid.begin(), grid.end());
  for (double x : grid) {
    const double r = e.correction(x);
    const double v = e.kernel().roughness / (nh * eval_start(e.start(), x));
    const double lr = std::log(r);
    out.r_hat.push_back(r);
    out.log_r.push_back(lr);
    out.z.push_back((lr + 0.5 * v) / std::sqrt(v));
  }
  return out;
}

IntegralReport
integral_of_estimate(const DensityEstimate& e)
{
  IntegralReport out;
  const auto& s = e.start();
  const auto& data = e.data();
  const double n = static_cast<double>(data.size());
  const double h = e.h();
  if (s.family == StartFamily::constant) {
    out.integral = 1.0;
    out.closed_form = true;
    return out;
  }

  const bool normal_gaussian =
    s.family == StartFamily::normal && e.kernel().shape == KernelShape::gaussian;
  if (normal_gaussian) {
    double m4 = 0.0;
    for (double x : data) {
      const double z = (x - s.mu) / s.sd;
      m4 += z * z * z * z;
    }
    const double g4 = m4 / n - 3.0;
    const double ratio = h / s.sd;
    out.kurtosis_approx = 1.0 + g4 * std::pow(ratio, 4) / 8.0;
  }

  if (normal_gaussian && !s.clip) {
    const double s2 = s.sd * s.sd;
    const double c = 0.5 * h * h / (s2 * (s2 + h * h));
    double sum = 0.0;
    for (double x : data) {
      sum += std::exp(c * (x - s.mu) * (x - s.mu));
    }
    out.integral = sum / n / std::sqrt(1.0 + h * h / s2);
    out.closed_form = true;
    return out;
  }

  // Quadrature over the data range padded by the kernel's reach, split at
  // the kinks of compact kernels and of the clipped start.
  const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
  const double reach = std::isfinite(e.kernel().support_radius())
                         ? e.kernel().support_radius() * h
                         : 15.0 * h;
  double lo = *mn - reach;
  const double hi = *mx + reach;
  const bool positive_family =
    s.family == StartFamily::lognormal || s.family == StartFamily::gamma;
  if (positive_family && !s.clip) {
    lo = std::max(lo, 0.0);
  }
  std::vector<double> breaks{ lo, hi };
  if (std::isfinite(e.kernel().support_radius()) && data.size() <= 4096) {
    for (double x : data) {
      breaks.push_back(x - reach);
      breaks.push_back(x + reach);
    }
  }
  if (s.clip && (s.family == StartFamily::normal ||
                 s.family == StartFamily::normal_mixture)) {
    breaks.push_back(s.mu - *s.clip * s.sd);
    breaks.push_back(s.mu + *s.clip * s.sd);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::erase_if(breaks, [&](double b) { return b < lo || b > hi; });
  if (breaks.size() < 2) {
    breaks = { lo, hi };
  }
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-11;
  opts.max_intervals = 200000;
  const double lo_open = positive_family && !s.clip ? std::nextafter(lo, hi) : lo;
  breaks.front() = lo_open;
  out.integral =
    integrate_pieces([&e](double x) { return e.evaluate_generic(x); }, breaks,
                     opts)
      .value;
  return out;
}

} // namespace semistart
