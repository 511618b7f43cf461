#include "semistart/hermite.hpp"

#include "semistart/numerics.hpp"

#include <cmath>
#include <numeric>

namespace semistart {

namespace {

double
factorial(int k)
{
  double r = 1.0;
  for (int i = 2; i <= k; ++i) {
    r *= i;
  }
  return r;
}

struct Standardized
{
  double mean;
  double sd;
};

Standardized
ml_location_scale(std::span<const double> data)
{
  const double n = static_cast<double>(data.size());
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : data) {
    ss += (x - mean) * (x - mean);
  }
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) {
    throw DomainError("zero sample variance");
  }
  return { mean, sd };
}

} // namespace

double
hermite_poly(int j, double x)
{
  if (j < 0) {
    throw std::invalid_argument("Hermite degree must be nonnegative");
  }
  if (j == 0) {
    return 1.0;
  }
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < j; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double
std_normal_pdf_derivative(int j, double x)
{
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  return sign * hermite_poly(j, x) * std_normal_pdf(x);
}

double
hermite_phi2_integral(int j, int k)
{
  if ((j + k) % 2 != 0) {
    return 0.0;
  }
  const int p = (j + k) / 2;
  const double sign = ((j + p) % 2 == 0) ? 1.0 : -1.0;
  return sign / (2.0 * kSqrtPi) * factorial(2 * p) /
         (factorial(p) * std::pow(4.0, p));
}

HermiteCoeffs
classic_coeffs(std::span<const double> data)
{
  if (data.size() < 5) {
    throw std::invalid_argument("classic_coeffs needs at least 5 observations");
  }
  const auto [mean, sd] = ml_location_scale(data);
  double m3 = 0.0;
  double m4 = 0.0;
  double m5 = 0.0;
  for (double x : data) {
    const double z = (x - mean) / sd;
    const double z2 = z * z;
    m3 += z2 * z;
    m4 += z2 * z2;
    m5 += z2 * z2 * z;
  }
  const double n = static_cast<double>(data.size());
  m3 /= n;
  m4 /= n;
  m5 /= n;
  return { HermiteKind::classic_gamma,
           { 1.0, 0.0, 0.0, m3, m4 - 3.0, m5 - 10.0 * m3 },
           mean,
           sd };
}

HermiteCoeffs
robust_coeffs(std::span<const double> data, int max_j)
{
  if (data.size() < 2) {
    throw std::invalid_argument("robust_coeffs needs at least 2 observations");
  }
  if (max_j < 2) {
    throw std::invalid_argument("robust_coeffs needs max_j >= 2");
  }
  const auto [mean, sd] = ml_location_scale(data);
  std::vector<double> delta(max_j + 1, 0.0);
  const double root2 = std::sqrt(2.0);
  for (double x : data) {
    const double z = (x - mean) / sd;
    const double weight = root2 * std::exp(-0.5 * z * z);
    const double y = root2 * z;
    double prev = 1.0;
    double cur = y;
    delta[0] += weight;
    delta[1] += weight * cur;
    for (int j = 2; j <= max_j; ++j) {
      const double next = y * cur - (j - 1) * prev;
      prev = cur;
      cur = next;
      delta[j] += weight * cur;
    }
  }
  for (double& d : delta) {
    d /= static_cast<double>(data.size());
  }
  return { HermiteKind::robust_delta, std::move(delta), mean, sd };
}

double
classic_roughness_brace(const HermiteCoeffs& c)
{
  if (c.kind != HermiteKind::classic_gamma || c.values.size() < 6) {
    throw std::invalid_argument("classic brace needs gamma_3..gamma_5");
  }
  const double g3 = c.values[3];
  const double g4 = c.values[4];
  const double g5 = c.values[5];
  return 2.0 / 3.0 * g3 * g3 + 0.25 * g4 * g4 + 5.0 / 72.0 * g5 * g5 -
         g3 * g5 / 3.0;
}

double
robust_roughness_brace(const HermiteCoeffs& c)
{
  if (c.kind != HermiteKind::robust_delta || c.values.size() < 3) {
    throw std::invalid_argument("robust brace needs delta_0..delta_2 at least");
  }
  double brace = 0.0;
  const int m = static_cast<int>(c.values.size()) - 1;
  for (int j = 0; j <= m - 2; ++j) {
    brace += c.values[j + 2] * c.values[j + 2] / factorial(j);
  }
  return brace;
}

double
roughness_from_coeffs(const HermiteCoeffs& c)
{
  const double scale5 = std::pow(c.scale, -5.0);
  if (c.kind == HermiteKind::classic_gamma) {
    return scale5 * 3.0 / (8.0 * kSqrtPi) * classic_roughness_brace(c);
  }
  return scale5 * 2.0 / kSqrtPi * robust_roughness_brace(c);
}

} // namespace semistart
