#pragma once

#include "semistart/kernels.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace semistart {

enum class MeanStartKind
{
  constant,
  linear
};

std::string_view
to_string(MeanStartKind kind);

MeanStartKind
parse_mean_start_kind(std::string_view name);

//! Least-squares mean start m(x) = b0 + b1 x (b1 = 0 for the constant kind).
//! Values are kept at least `floor` = 0.05 sd(y) away from zero, with the
//! sign preserved, because the smoother divides by them.
struct MeanStart
{
  MeanStartKind kind = MeanStartKind::constant;
  double b0 = 0.0;
  double b1 = 0.0;
  double floor = 0.0;

  double raw(double x) const { return b0 + b1 * x; }
  double operator()(double x) const;
};

MeanStart
fit_mean_start(std::span<const double> x,
               std::span<const double> y,
               MeanStartKind kind);

struct RegressionFit
{
  std::vector<double> x;
  std::vector<double> y;
  KernelSpec kernel;
  double h = 1.0;
  MeanStart start;
};

RegressionFit
make_regression(std::vector<double> x,
                std::vector<double> y,
                KernelSpec kernel,
                double h,
                MeanStartKind kind);

//! sum y_i {m(x)/m(x_i)} K_h(x - x_i) / sum K_h(x - x_i).
//! Throws DomainError("no local data") when the kernel mass is below 1e-300.
double
gnw_estimate(const RegressionFit& fit, double x);

//! Classic Nadaraya-Watson sum y_i K_h(x - x_i) / sum K_h(x - x_i).
double
nw_estimate(std::span<const double> xs,
            std::span<const double> ys,
            const KernelSpec& kernel,
            double h,
            double x);

} // namespace semistart
