#include "semistart/densities.hpp"

#include "semistart/hermite.hpp"
#include "semistart/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace semistart {

NormalMixture::NormalMixture(std::vector<MixtureComponent> components,
                             double weight_tol)
  : components_(std::move(components))
{
  if (components_.empty()) {
    throw std::invalid_argument("normal mixture needs at least one component");
  }
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0)) {
      throw std::invalid_argument("mixture weights must be positive");
    }
    if (!(c.sd > 0.0)) {
      throw std::invalid_argument("mixture component sd must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > weight_tol) {
    throw std::invalid_argument("mixture weights sum to " +
                                std::to_string(total) + ", not 1");
  }
}

double
NormalMixture::pdf(double x) const
{
  double value = 0.0;
  for (const auto& c : components_) {
    value += c.weight * normal_pdf(x - c.mean, c.sd);
  }
  return value;
}

NormalMixture
NormalMixture::affine(double c, double b) const
{
  if (c == 0.0) {
    throw std::invalid_argument("affine map needs a nonzero scale");
  }
  auto comps = components_;
  for (auto& comp : comps) {
    comp.mean = c * comp.mean + b;
    comp.sd *= std::abs(c);
  }
  return NormalMixture(std::move(comps));
}

double
mixture_pdf(const NormalMixture& m, double x)
{
  return m.pdf(x);
}

std::vector<double>
mixture_sample(const NormalMixture& m, std::size_t n, std::uint64_t seed)
{
  if (n == 0) {
    throw std::invalid_argument("sample size must be at least 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  weights.reserve(m.size());
  for (const auto& c : m.components()) {
    weights.push_back(c.weight);
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) {
    const auto& c = m.components()[pick(rng)];
    x = c.mean + c.sd * gauss(rng);
  }
  return out;
}

MixtureMoments
mixture_moments(const NormalMixture& m)
{
  double mu0 = 0.0;
  for (const auto& c : m.components()) {
    mu0 += c.weight * c.mean;
  }
  double var0 = 0.0;
  for (const auto& c : m.components()) {
    var0 += c.weight * (c.sd * c.sd + (c.mean - mu0) * (c.mean - mu0));
  }
  return { mu0, std::sqrt(var0) };
}

BiasFactors
bias_factors(const NormalMixture& m, double x)
{
  const auto [mu0, sd0] = mixture_moments(m);
  const double inv_var0 = 1.0 / (sd0 * sd0);
  BiasFactors out;
  for (const auto& c : m.components()) {
    const double fi = c.weight * normal_pdf(x - c.mean, c.sd);
    const double inv_var = 1.0 / (c.sd * c.sd);
    const double u = (x - c.mean) * inv_var;
    out.fpp += (u * (x - c.mean) - 1.0) * fi * inv_var;
    const double slope = u - (x - mu0) * inv_var0;
    out.f0rpp += fi * (inv_var0 - inv_var + slope * slope);
  }
  return out;
}

namespace {

// A^{r,s}_{i,j} = (-1)^r phi^{(r+s)}(delta) / s^{r+s+1}, with
// s^2 = sd_i^2 + sd_j^2 and delta = (mu_j - mu_i) / s.
struct PairIntegrals
{
  double s;
  double delta;

  double operator()(int r, int q) const
  {
    const double sign = (r % 2 == 0) ? 1.0 : -1.0;
    return sign * std_normal_pdf_derivative(r + q, delta) /
           std::pow(s, r + q + 1);
  }
};

} // namespace

RoughnessReport
roughness(const NormalMixture& m)
{
  const auto [mu0, sd0] = mixture_moments(m);
  const auto& comps = m.components();
  const std::size_t k = comps.size();

  // f0 r'' = sum_i p_i f_i {c_i + d_i (x - mu_i) + a_i^2 (x - mu_i)^2}
  std::vector<double> a(k), c(k), d(k), var(k);
  for (std::size_t i = 0; i < k; ++i) {
    var[i] = comps[i].sd * comps[i].sd;
    a[i] = 1.0 / var[i] - 1.0 / (sd0 * sd0);
    const double b = (comps[i].mean - mu0) / (sd0 * sd0);
    c[i] = b * b - a[i];
    d[i] = -2.0 * a[i] * b;
  }

  double r_trad = 0.0;
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0, t5 = 0.0, t6 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double s = std::sqrt(var[i] + var[j]);
      const PairIntegrals A{ s, (comps[j].mean - comps[i].mean) / s };
      const double pp = comps[i].weight * comps[j].weight;
      const double a2i = a[i] * a[i];
      const double a2j = a[j] * a[j];

      r_trad += pp * A(2, 2);

      t1 += pp * c[i] * c[j] * A(0, 0);
      t2 += 2.0 * pp * c[i] * d[j] * var[j] * A(0, 1);
      t3 += 2.0 * pp * c[i] * a2j * (var[j] * var[j] * A(0, 2) + var[j] * A(0, 0));
      t4 += pp * d[i] * d[j] * var[i] * var[j] * A(1, 1);
      t5 += 2.0 * pp * d[i] * a2j *
            (var[i] * var[j] * var[j] * A(1, 2) + var[i] * var[j] * A(1, 0));
      t6 += pp * a2i * a2j * var[i] * var[j] *
            (var[i] * var[j] * A(2, 2) + var[i] * A(2, 0) + var[j] * A(0, 2) +
             A(0, 0));
    }
  }
  // Both functionals are integrals of squares; clear rounding residue around
  // zero (a single normal has f0 r'' identically 0).
  const double r_new = std::max(0.0, t1 + t2 + t3 + t4 + t5 + t6);
  r_trad = std::max(0.0, r_trad);

  RoughnessReport out;
  out.r_trad = r_trad;
  out.r_new = r_new < 1e-14 * r_trad ? 0.0 : r_new;
  out.rho_trad = sd0 * std::pow(out.r_trad, 0.2);
  out.rho_new = sd0 * std::pow(out.r_new, 0.2);
  return out;
}

L1Report
l1_measures(const NormalMixture& m)
{
  const auto [mu0, sd0] = mixture_moments(m);
  // sqrt(f) decays like exp(-x^2 / (4 sd_i^2)), so a wide but light component
  // can leave mass outside mu0 +- 12 sd0; extend the window per component.
  double lo = mu0 - 12.0 * sd0;
  double hi = mu0 + 12.0 * sd0;
  for (const auto& c : m.components()) {
    lo = std::min(lo, c.mean - 20.0 * c.sd);
    hi = std::max(hi, c.mean + 20.0 * c.sd);
  }
  QuadratureOptions opts;
  opts.abs_tol = 1e-10;
  opts.rel_tol = 1e-12;

  L1Report out;
  out.iab_trad =
    integrate_abs([&m](double x) { return bias_factors(m, x).fpp; }, lo, hi,
                  opts)
      .value;
  if (m.size() > 1) {
    out.iab_new =
      integrate_abs([&m](double x) { return bias_factors(m, x).f0rpp; }, lo,
                    hi, opts)
        .value;
  }
  // f^{1/2} has the spread of the widest component scaled by sqrt(2)
  out.half_norm =
    integrate([&m](double x) { return std::sqrt(m.pdf(x)); }, lo, hi, opts)
      .value;
  const double lead = std::pow(out.half_norm, 0.8);
  out.rho1_trad = lead * std::pow(out.iab_trad, 0.2);
  out.rho1_new = lead * std::pow(out.iab_new, 0.2);
  return out;
}

double
mixture_r_f(const NormalMixture& m)
{
  double total = 0.0;
  for (const auto& ci : m.components()) {
    for (const auto& cj : m.components()) {
      const double s = std::sqrt(ci.sd * ci.sd + cj.sd * cj.sd);
      total += ci.weight * cj.weight * normal_pdf(cj.mean - ci.mean, s);
    }
  }
  return total;
}

NormalMixture
marron_wand(int case_id)
{
  using C = MixtureComponent;
  std::vector<C> comps;
  switch (case_id) {
    case 1:
      comps = { { 1.0, 0.0, 1.0 } };
      break;
    case 2:
      comps = { { 0.2, 0.0, 1.0 },
                { 0.2, 0.5, 2.0 / 3.0 },
                { 0.6, 13.0 / 12.0, 5.0 / 9.0 } };
      break;
    case 3:
      for (int l = 0; l <= 7; ++l) {
        const double s = std::pow(2.0 / 3.0, l);
        comps.push_back({ 1.0 / 8.0, 3.0 * (s - 1.0), s });
      }
      break;
    case 4:
      comps = { { 2.0 / 3.0, 0.0, 1.0 }, { 1.0 / 3.0, 0.0, 0.1 } };
      break;
    case 5:
      comps = { { 0.1, 0.0, 1.0 }, { 0.9, 0.0, 0.1 } };
      break;
    case 6:
      comps = { { 0.5, -1.0, 2.0 / 3.0 }, { 0.5, 1.0, 2.0 / 3.0 } };
      break;
    case 7:
      comps = { { 0.5, -1.5, 0.5 }, { 0.5, 1.5, 0.5 } };
      break;
    case 8:
      comps = { { 0.75, 0.0, 1.0 }, { 0.25, 1.5, 1.0 / 3.0 } };
      break;
    case 9:
      comps = { { 0.45, -1.2, 0.6 }, { 0.45, 1.2, 0.6 }, { 0.1, 0.0, 0.25 } };
      break;
    case 10:
      comps = { { 0.5, 0.0, 1.0 } };
      for (int l = 0; l <= 4; ++l) {
        comps.push_back({ 0.1, l / 2.0 - 1.0, 0.1 });
      }
      break;
    case 11:
      comps = { { 0.49, -1.0, 2.0 / 3.0 }, { 0.49, 1.0, 2.0 / 3.0 } };
      for (int l = 0; l <= 6; ++l) {
        comps.push_back({ 1.0 / 350.0, (l - 3) / 2.0, 0.01 });
      }
      break;
    case 12:
      comps = { { 0.5, 0.0, 1.0 } };
      for (int l = -2; l <= 2; ++l) {
        comps.push_back(
          { std::pow(2.0, 1 - l) / 31.0, l + 0.5, std::pow(2.0, -l) / 10.0 });
      }
      break;
    case 13:
      comps = { { 0.46, -1.0, 2.0 / 3.0 }, { 0.46, 1.0, 2.0 / 3.0 } };
      for (int l = 1; l <= 3; ++l) {
        comps.push_back({ 1.0 / 300.0, -l / 2.0, 0.01 });
      }
      for (int l = 1; l <= 3; ++l) {
        comps.push_back({ 7.0 / 300.0, l / 2.0, 0.07 });
      }
      break;
    case 14:
      for (int l = 0; l <= 5; ++l) {
        comps.push_back({ std::pow(2.0, 5 - l) / 63.0,
                          (65.0 - 96.0 * std::pow(0.5, l)) / 21.0,
                          (16.0 / 31.0) / std::pow(2.0, l) });
      }
      break;
    case 15:
      for (int l = 0; l <= 2; ++l) {
        comps.push_back({ 2.0 / 7.0, (12.0 * l - 15.0) / 7.0, 2.0 / 7.0 });
      }
      for (int l = 8; l <= 10; ++l) {
        comps.push_back({ 1.0 / 21.0, 2.0 * l / 7.0, 1.0 / 21.0 });
      }
      break;
    default:
      throw std::invalid_argument("Marron-Wand case must be in 1..15, got " +
                                  std::to_string(case_id));
  }
  return NormalMixture(std::move(comps), 1e-12);
}

std::string
marron_wand_name(int case_id)
{
  static const char* names[] = { "gaussian",
                                 "skewed unimodal",
                                 "strongly skewed",
                                 "kurtotic unimodal",
                                 "outlier",
                                 "bimodal",
                                 "separated bimodal",
                                 "skewed bimodal",
                                 "trimodal",
                                 "claw",
                                 "double claw",
                                 "asymmetric claw",
                                 "asymmetric double claw",
                                 "smooth comb",
                                 "discrete comb" };
  if (case_id < 1 || case_id > 15) {
    throw std::invalid_argument("Marron-Wand case must be in 1..15");
  }
  return names[case_id - 1];
}

void
to_json(nlohmann::json& j, const NormalMixture& m)
{
  auto comps = nlohmann::json::array();
  for (const auto& c : m.components()) {
    comps.push_back({ { "p", c.weight }, { "mu", c.mean }, { "sd", c.sd } });
  }
  j = nlohmann::json{ { "components", comps } };
}

NormalMixture
mixture_from_json(const nlohmann::json& j)
{
  if (!j.contains("components") || !j.at("components").is_array()) {
    throw std::invalid_argument("mixture JSON needs a 'components' array");
  }
  std::vector<MixtureComponent> comps;
  for (const auto& c : j.at("components")) {
    comps.push_back({ c.at("p").get<double>(), c.at("mu").get<double>(),
                      c.at("sd").get<double>() });
  }
  return NormalMixture(std::move(comps), 1e-9);
}

} // namespace semistart
