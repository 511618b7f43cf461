#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semistart {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kSqrtPi = 1.772453850905516027298167483341;

//! Raised when an input violates a numeric invariant (nonpositive bandwidth,
//! degenerate variance, invalid formula domain, ...).
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

//! Raised when adaptive quadrature cannot meet its tolerance.
class QuadratureError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Standard normal density.
inline double
std_normal_pdf(double z)
{
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

//! Normal density with standard deviation `sd`, evaluated at offset `u`
//! from the mean, i.e. phi_sd(u) = phi(u / sd) / sd.
inline double
normal_pdf(double u, double sd)
{
  return std_normal_pdf(u / sd) / sd;
}

inline double
log_normal_pdf(double u, double sd)
{
  const double z = u / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * kPi);
}

//! log of int prod_j phi_{sd_j}(x - mu_j) dx, evaluated at the weighted
//! centre so that no factor underflows before the logs are summed.
double
log_gaussian_product(std::span<const double> sds, std::span<const double> mus);

struct QuadratureOptions
{
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 20000;
};

struct QuadratureResult
{
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

//! Globally adaptive 7/15-point Gauss-Kronrod quadrature on a finite interval.
//! The interval with the largest error estimate is bisected until the total
//! error is below max(abs_tol, rel_tol * |value|).
//! Throws QuadratureError when max_intervals is exhausted.
QuadratureResult
integrate(const std::function<double(double)>& f,
          double a,
          double b,
          const QuadratureOptions& opts = {});

//! Integrates over consecutive pieces [b_0, b_1], [b_1, b_2], ...
//! `breaks` must be sorted and contain at least two points.
QuadratureResult
integrate_pieces(const std::function<double(double)>& f,
                 const std::vector<double>& breaks,
                 const QuadratureOptions& opts = {});

//! Locates the sign changes of `f` on [a, b] by scanning `scan_points`
//! equally spaced values and refining each bracket by bisection.
std::vector<double>
sign_changes(const std::function<double(double)>& f,
             double a,
             double b,
             int scan_points = 4096);

//! Integral of |f| over [a, b], split at the sign changes of f.
QuadratureResult
integrate_abs(const std::function<double(double)>& f,
              double a,
              double b,
              const QuadratureOptions& opts = {},
              int scan_points = 4096);

struct Minimum
{
  double x = 0.0;
  double value = 0.0;
};

//! Golden-section search for a minimum of a unimodal function on [lo, hi],
//! stopping once the bracket is narrower than `tol`.
Minimum
golden_section(const std::function<double(double)>& f,
               double lo,
               double hi,
               double tol = 1e-7);

} // namespace semistart
