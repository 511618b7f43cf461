#pragma once

#include "semistart/kernels.hpp"
#include "semistart/starts.hpp"

#include <optional>
#include <span>
#include <vector>

namespace semistart {

//! Classic kernel estimator (1/n) sum K_h(X_i - x).
double
estimate_kernel(std::span<const double> data,
                const KernelSpec& kernel,
                double h,
                double x);

//! Start-times-correction estimator
//!   f_hat(x) = f(x, theta) (1/n) sum K_h(X_i - x) / f(X_i, theta),
//! with the start evaluated through eval_start (clipped unless the start's
//! clip is unset). A constant start gives the classic kernel estimator.
//! With normalize set, values are divided by the integral of the estimate.
class DensityEstimate
{
public:
  DensityEstimate(std::vector<double> data,
                  KernelSpec kernel,
                  double h,
                  FittedStart start,
                  bool normalize = false);

  const std::vector<double>& data() const { return data_; }
  const KernelSpec& kernel() const { return kernel_; }
  double h() const { return h_; }
  const FittedStart& start() const { return start_; }
  bool normalize() const { return normalize_; }

  //! f_hat(x), including the normalization if requested.
  double operator()(double x) const;

  //! r_hat(x) = (1/n) sum K_h(X_i - x) / f(X_i, theta).
  double correction(double x) const;

  //! Unnormalized f_hat(x) through the generic path, for cross-checks.
  double evaluate_generic(double x) const;

  std::vector<double> evaluate(std::span<const double> grid) const;

private:
  double evaluate_raw(double x) const;
  bool normal_gaussian() const;

  std::vector<double> data_;
  KernelSpec kernel_;
  double h_;
  FittedStart start_;
  bool normalize_;
  std::vector<double> inv_start_;   // 1 / f(X_i, theta)
  std::vector<double> half_z2_;     // (1/2) z_i^2 with clipped z, normal start
  double norm_ = 1.0;
};

//! Convenience wrapper: evaluates the estimate at x.
double
estimate_semiparametric(const DensityEstimate& e, double x);

struct CorrectionCurve
{
  std::vector<double> grid;
  std::vector<double> r_hat;
  std::vector<double> log_r;
  //! Z(x) = {log r_hat + (1/2) v(x)} / v(x)^{1/2}, v(x) = R(K) / (n h f(x, theta)).
  std::vector<double> z;
};

//! Goodness-of-fit diagnostics of the start: under the model Z(x) is
//! approximately standard normal.
CorrectionCurve
correction_curve(const DensityEstimate& e, std::span<const double> grid);

struct IntegralReport
{
  double integral = 1.0;
  bool closed_form = false;
  //! 1 + gamma4 h^4 / (8 sigma^4), for normal start with gaussian kernel.
  std::optional<double> kurtosis_approx;
};

//! Integral of the unnormalized estimate. Exact for a constant start, closed
//! form for an unclipped normal start with gaussian kernel,
//!   (1 + h^2/s^2)^{-1/2} (1/n) sum exp{h^2 (X_i - mu)^2 / (2 s^2 (s^2 + h^2))},
//! adaptive quadrature otherwise.
IntegralReport
integral_of_estimate(const DensityEstimate& e);

} // namespace semistart
