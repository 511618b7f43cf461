#pragma once

#include <span>
#include <vector>

namespace semistart {

//! Probabilists' Hermite polynomial He_j(x), defined through
//! phi^{(j)}(x) = (-1)^j phi(x) He_j(x). Three-term recurrence.
double
hermite_poly(int j, double x);

//! j-th derivative of the standard normal density.
double
std_normal_pdf_derivative(int j, double x);

//! A_{j,k} = int He_j(y) He_k(y) phi(y)^2 dy; zero when j + k is odd.
double
hermite_phi2_integral(int j, int k);

enum class HermiteKind
{
  classic_gamma,
  robust_delta
};

//! Expansion coefficients around the normal with the given center/scale.
//! classic: values = {1, 0, 0, g3, g4, g5} (g_j = E He_j((X - mu)/sigma)).
//! robust:  values = {d_0, ..., d_maxj},
//!          d_j = sqrt(2) E He_j(sqrt(2) Z) exp(-Z^2 / 2), Z = (X - mu)/sigma.
struct HermiteCoeffs
{
  HermiteKind kind = HermiteKind::classic_gamma;
  std::vector<double> values;
  double center = 0.0;
  double scale = 1.0;
};

//! Sample skewness, excess kurtosis and the fifth Hermite moment.
HermiteCoeffs
classic_coeffs(std::span<const double> data);

HermiteCoeffs
robust_coeffs(std::span<const double> data, int max_j = 5);

//! R_new implied by the expansion:
//!   classic: sigma^-5 3/(8 sqrt(pi)) (2/3 g3^2 + 1/4 g4^2 + 5/72 g5^2 - 1/3 g3 g5)
//!   robust:  sigma^-5 2/sqrt(pi) sum_{j=0}^{m-2} d_{j+2}^2 / j!
double
roughness_from_coeffs(const HermiteCoeffs& c);

//! The brace of the robust rule, sum_{j=0}^{m-2} d_{j+2}^2 / j!.
double
robust_roughness_brace(const HermiteCoeffs& c);

//! The brace of the classic rule, 2/3 g3^2 + 1/4 g4^2 + 5/72 g5^2 - 1/3 g3 g5.
double
classic_roughness_brace(const HermiteCoeffs& c);

} // namespace semistart
