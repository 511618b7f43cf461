#include "semistart/bandwidth.hpp"

#include "semistart/estimator.hpp"
#include "semistart/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace semistart {

namespace {

double
start_value(const FittedStart& s, double x)
{
  return s.clip ? eval_start(s, x) : eval_start_raw(s, x);
}

bool
pairwise_closed_form(const FittedStart& s, const KernelSpec& k)
{
  return k.shape == KernelShape::gaussian &&
         (s.family == StartFamily::constant || s.family == StartFamily::normal);
}

// Stretch of the line on which s(x)^2 is either the normal density squared
// or a constant (the clipped tails and the constant start).
struct Region
{
  double lo;
  double hi;
  bool normal_factor;
  double log_s2; //!< log of the constant value of s^2 when !normal_factor
};

std::vector<Region>
start_regions(const FittedStart& s)
{
  const double inf = std::numeric_limits<double>::infinity();
  if (s.family == StartFamily::constant) {
    return { { -inf, inf, false, 0.0 } };
  }
  if (!s.clip) {
    return { { -inf, inf, true, 0.0 } };
  }
  const double c = *s.clip;
  const double lo = s.mu - c * s.sd;
  const double hi = s.mu + c * s.sd;
  const double tail = 2.0 * log_normal_pdf(c * s.sd, s.sd);
  return { { -inf, lo, false, tail }, { lo, hi, true, 0.0 }, { hi, inf, false, tail } };
}

// E[Z^k; alpha < Z < beta] for a standard normal Z, k = 0..4.
std::array<double, 5>
truncated_moments(double alpha, double beta)
{
  // Beyond 10 sd the neglected mass times z^4 is below 1e-18.
  constexpr double far = 10.0;
  if (alpha <= -far && beta >= far) {
    return { 1.0, 0.0, 1.0, 0.0, 3.0 };
  }
  if (beta <= -far || alpha >= far) {
    return {};
  }
  const auto upper = [](double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); };
  double m0 = 0.0;
  if (alpha >= 0.0) {
    m0 = upper(alpha) - upper(beta);
  } else if (beta <= 0.0) {
    m0 = upper(-beta) - upper(-alpha);
  } else {
    m0 = 1.0 - upper(beta) - upper(-alpha);
  }
  // phi(z) z^k at each end, zero past the cutoff
  const auto ends = [](double z) {
    if (!(std::abs(z) < far)) {
      return std::array<double, 4>{};
    }
    const double p = std_normal_pdf(z);
    return std::array<double, 4>{ p, p * z, p * z * z, p * z * z * z };
  };
  const auto ea = ends(alpha);
  const auto eb = ends(beta);
  std::array<double, 5> m{};
  m[0] = m0;
  m[1] = ea[0] - eb[0];
  for (int k = 2; k <= 4; ++k) {
    m[k] = (k - 1) * m[k - 2] + ea[k - 1] - eb[k - 1];
  }
  return m;
}

// Integrals of s(x)^2 phi_h(x - xi) phi_h(x - xj), optionally weighted by
// (u_i^2 - 1)(u_j^2 - 1) with u = (x - X)/h, for a gaussian kernel and a
// constant or normal start. On each region the product is exp(log_c) times a
// normal density in x, so x = centre + t Z turns the weight into a quartic in
// Z integrated against truncated normal moments.
class PairIntegrator
{
public:
  PairIntegrator(const FittedStart& s, double h)
    : regions_(start_regions(s))
    , mu_(s.mu)
    , s2_(s.sd * s.sd)
    , h_(h)
    , h2_(h * h)
  {
    tail_var_ = 0.5 * h2_;
    tail_log0_ = -0.5 * std::log(4.0 * std::numbers::pi * h2_);
    if (s.family == StartFamily::normal) {
      mid_var_ = 1.0 / (2.0 / s2_ + 2.0 / h2_);
      mid_log0_ = 0.5 * std::log(2.0 * std::numbers::pi * mid_var_) -
                  std::log(4.0 * std::numbers::pi * std::numbers::pi * s2_ * h2_);
    }
  }

  double operator()(double xi, double xj, bool quartic) const
  {
    double total = 0.0;
    for (const auto& r : regions_) {
      double log_c = 0.0;
      double centre = 0.0;
      double var = 0.0;
      if (r.normal_factor) {
        var = mid_var_;
        centre = var * (2.0 * mu_ / s2_ + (xi + xj) / h2_);
        const double dm = mu_ - centre;
        const double di = xi - centre;
        const double dj = xj - centre;
        log_c = mid_log0_ - dm * dm / s2_ - 0.5 * (di * di + dj * dj) / h2_;
      } else {
        var = tail_var_;
        centre = 0.5 * (xi + xj);
        const double d = xi - xj;
        log_c = tail_log0_ - 0.25 * d * d / h2_ + r.log_s2;
      }
      const double t = std::sqrt(var);
      const auto m = truncated_moments((r.lo - centre) / t, (r.hi - centre) / t);
      if (m[0] == 0.0 && m[2] == 0.0) {
        continue;
      }
      double w = m[0];
      if (quartic) {
        const double a = (centre - xi) / h_;
        const double b = (centre - xj) / h_;
        const double tau = t / h_;
        const double a0 = a * a - 1.0;
        const double a1 = 2.0 * a * tau;
        const double b0 = b * b - 1.0;
        const double b1 = 2.0 * b * tau;
        const double q2 = tau * tau;
        w = a0 * b0 * m[0] + (a0 * b1 + a1 * b0) * m[1] +
            (a0 * q2 + a1 * b1 + q2 * b0) * m[2] + (a1 * q2 + q2 * b1) * m[3] +
            q2 * q2 * m[4];
      }
      total += std::exp(log_c) * w;
    }
    return total;
  }

private:
  std::vector<Region> regions_;
  double mu_;
  double s2_;
  double h_;
  double h2_;
  double tail_var_ = 0.0;
  double tail_log0_ = 0.0;
  double mid_var_ = 0.0;
  double mid_log0_ = 0.0;
};

double
log_start(const FittedStart& s, double x)
{
  if (s.family == StartFamily::constant) {
    return 0.0;
  }
  if (s.family == StartFamily::normal && !s.clip) {
    return log_normal_pdf(x - s.mu, s.sd);
  }
  return std::log(eval_start(s, x));
}

void
require_smooth(const KernelSpec& kernel)
{
  if (!kernel.is_smooth()) {
    throw DomainError("roughness estimation needs a smooth kernel; " +
                      std::string(to_string(kernel.shape)) +
                      " is not allowed in this operation");
  }
}

void
check_grid(std::span<const double> grid, double cap)
{
  if (grid.empty()) {
    throw std::invalid_argument("bandwidth grid is empty");
  }
  for (double h : grid) {
    if (!(h > 0.0)) {
      throw std::invalid_argument("bandwidth grid values must be positive");
    }
    if (h > cap * (1.0 + 1e-9)) {
      throw std::invalid_argument("bandwidth grid exceeds the oversmoothing bound " +
                                  std::to_string(cap));
    }
  }
}

std::size_t
argmin_first(const std::vector<double>& v)
{
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) {
      best = i;
    }
  }
  return best;
}

// Hermite rules share the clamp logic.
BandwidthChoice
hermite_choice(std::span<const double> data,
               const KernelSpec& kernel,
               const HermiteCoeffs& c,
               double brace,
               BandwidthMethod method)
{
  const double n = static_cast<double>(data.size());
  BandwidthChoice out;
  out.method = method;
  out.h_os = h_os(kernel, c.scale, n);
  out.roughness = roughness_from_coeffs(c);
  if (!(brace > 1e-12)) {
    out.h = out.h_os;
    out.clamped = true;
    return out;
  }
  out.h_raw = hermite_rule_h(kernel, c, n);
  out.h = std::min(*out.h_raw, out.h_os);
  out.clamped = *out.h_raw > out.h_os;
  return out;
}

// Leave-one-out refits, downdating the first two moments.
class LooStarts
{
public:
  LooStarts(std::span<const double> data, const FittedStart& start)
    : data_(data)
    , start_(start)
  {
    const double n = static_cast<double>(data.size());
    const bool logs = start.family == StartFamily::lognormal;
    for (double x : data) {
      const double v = logs ? std::log(x) : x;
      mean_ += v;
    }
    mean_ /= n;
    for (double x : data) {
      const double v = (logs ? std::log(x) : x) - mean_;
      ss_ += v * v;
    }
  }

  FittedStart operator()(std::size_t i) const
  {
    const auto family = start_.family;
    if (family == StartFamily::constant ||
        family == StartFamily::normal_mixture) {
      return start_;
    }
    const double n = static_cast<double>(data_.size());
    const double v =
      family == StartFamily::lognormal ? std::log(data_[i]) : data_[i];
    const double d = v - mean_;
    const double mean = mean_ - d / (n - 1.0);
    const double var = (ss_ - d * d * n / (n - 1.0)) / (n - 1.0);
    if (!(var > 0.0)) {
      throw DomainError("zero leave-one-out variance");
    }
    switch (family) {
      case StartFamily::normal:
        return normal_start(mean, std::sqrt(var), start_.clip);
      case StartFamily::lognormal:
        return lognormal_start(mean, std::sqrt(var), start_.clip);
      case StartFamily::gamma:
        return gamma_start(mean * mean / var, mean / var, start_.clip);
      default:
        break;
    }
    return start_;
  }

private:
  std::span<const double> data_;
  const FittedStart& start_;
  double mean_ = 0.0;
  double ss_ = 0.0;
};

double
integral_sq_closed(std::span<const double> data, const FittedStart& s, double h)
{
  const std::size_t n = data.size();
  std::vector<double> inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv[i] = std::exp(-log_start(s, data[i]));
  }
  const PairIntegrator pair(s, h);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.5 * pair(data[i], data[i], false) * inv[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      row += pair(data[i], data[j], false) * inv[j];
    }
    sum += 2.0 * row * inv[i];
  }
  return sum / (static_cast<double>(n) * static_cast<double>(n));
}

double
integral_sq_quadrature(std::span<const double> data,
                       const FittedStart& s,
                       const KernelSpec& kernel,
                       double h)
{
  const DensityEstimate e(std::vector<double>(data.begin(), data.end()), kernel,
                          h, s);
  const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
  const double reach =
    std::isfinite(kernel.support_radius()) ? kernel.support_radius() * h : 15.0 * h;
  double lo = *mn - reach;
  const double hi = *mx + reach;
  const bool positive =
    s.family == StartFamily::lognormal || s.family == StartFamily::gamma;
  if (positive && !s.clip) {
    lo = std::max(lo, 0.0);
  }
  std::vector<double> breaks{ lo, hi };
  if (std::isfinite(kernel.support_radius()) && data.size() <= 4096) {
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
  if (positive && !s.clip) {
    breaks.front() = std::nextafter(lo, hi);
  }
  QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-11;
  opts.max_intervals = 200000;
  return integrate_pieces(
           [&e](double x) {
             const double v = e.evaluate_generic(x);
             return v * v;
           },
           breaks, opts)
    .value;
}

} // namespace

std::string_view
to_string(BandwidthMethod m)
{
  switch (m) {
    case BandwidthMethod::amise_oracle:
      return "amise_oracle";
    case BandwidthMethod::rule_gamma:
      return "rule_gamma";
    case BandwidthMethod::rule_delta:
      return "rule_delta";
    case BandwidthMethod::plugin:
      return "plugin";
    case BandwidthMethod::bcv:
      return "bcv";
    case BandwidthMethod::ucv:
      return "ucv";
  }
  return "unknown";
}

BandwidthMethod
parse_bandwidth_method(std::string_view name)
{
  for (auto m : { BandwidthMethod::amise_oracle, BandwidthMethod::rule_gamma,
                  BandwidthMethod::rule_delta, BandwidthMethod::plugin,
                  BandwidthMethod::bcv, BandwidthMethod::ucv }) {
    if (name == to_string(m)) {
      return m;
    }
  }
  throw std::invalid_argument("unknown bandwidth method '" + std::string(name) +
                              "'");
}

void
to_json(nlohmann::json& j, const BandwidthChoice& c)
{
  nlohmann::json diag = nlohmann::json::object();
  diag["h_os"] = c.h_os;
  diag["clamped"] = c.clamped;
  diag["fallback"] = c.fallback;
  if (c.h_raw) {
    diag["h_raw"] = *c.h_raw;
  }
  if (c.roughness) {
    diag["roughness"] = *c.roughness;
  }
  if (c.roughness_debiased) {
    diag["roughness_debiased"] = *c.roughness_debiased;
  }
  if (!c.grid.empty()) {
    diag["grid"] = c.grid;
    diag["curve"] = c.curve;
  }
  j = nlohmann::json{ { "method", std::string(to_string(c.method)) },
                      { "h", c.h },
                      { "diagnostics", diag } };
}

AmiseOptimum
amise_h(const KernelSpec& kernel, double r_new, double n)
{
  if (!(n >= 1.0)) {
    throw std::invalid_argument("amise_h needs n >= 1");
  }
  if (!(r_new > 0.0)) {
    throw DomainError("degenerate roughness: R_new must be positive");
  }
  const double s4 = kernel.sigma2 * kernel.sigma2;
  AmiseOptimum out;
  out.h = std::pow(kernel.roughness / s4, 0.2) * std::pow(r_new, -0.2) *
          std::pow(n, -0.2);
  out.amise = 1.25 * std::pow(std::sqrt(kernel.sigma2) * kernel.roughness, 0.8) *
              std::pow(r_new, 0.2) * std::pow(n, -0.8);
  return out;
}

double
amise_value(const KernelSpec& kernel, double r_new, double n, double h)
{
  const double h2 = h * h;
  return 0.25 * kernel.sigma2 * kernel.sigma2 * h2 * h2 * r_new +
         kernel.roughness / (n * h);
}

double
h_os(const KernelSpec& kernel, double sigma, double n)
{
  const double s4 = kernel.sigma2 * kernel.sigma2;
  return 3.0 * std::pow(kernel.roughness / (35.0 * s4), 0.2) * sigma *
         std::pow(n, -0.2);
}

double
sample_sd(std::span<const double> data)
{
  if (data.size() < 2) {
    throw std::invalid_argument("need at least 2 observations");
  }
  const double n = static_cast<double>(data.size());
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : data) {
    ss += (x - mean) * (x - mean);
  }
  if (!(ss > 0.0)) {
    throw DomainError("zero sample variance");
  }
  return std::sqrt(ss / n);
}

double
hermite_rule_h(const KernelSpec& kernel, const HermiteCoeffs& c, double n)
{
  return amise_h(kernel, roughness_from_coeffs(c), n).h;
}

BandwidthChoice
rule_gamma(std::span<const double> data, const KernelSpec& kernel)
{
  const auto c = classic_coeffs(data);
  return hermite_choice(data, kernel, c, classic_roughness_brace(c),
                        BandwidthMethod::rule_gamma);
}

BandwidthChoice
rule_delta(std::span<const double> data, const KernelSpec& kernel)
{
  const auto c = robust_coeffs(data, 5);
  return hermite_choice(data, kernel, c, robust_roughness_brace(c),
                        BandwidthMethod::rule_delta);
}

PluginRoughness
plugin_roughness(std::span<const double> data,
                 const FittedStart& start,
                 const KernelSpec& kernel,
                 double h)
{
  require_smooth(kernel);
  if (!(h > 0.0)) {
    throw DomainError("pilot bandwidth must be positive");
  }
  if (data.size() < 2) {
    throw std::invalid_argument("plug-in roughness needs at least 2 observations");
  }
  const std::size_t n = data.size();
  const double nd = static_cast<double>(n);
  PluginRoughness out;

  if (pairwise_closed_form(start, kernel)) {
    std::vector<double> inv(n);
    for (std::size_t i = 0; i < n; ++i) {
      inv[i] = std::exp(-log_start(start, data[i]));
    }
    const PairIntegrator pair(start, h);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.5 * pair(data[i], data[i], true) * inv[i];
      for (std::size_t j = i + 1; j < n; ++j) {
        row += pair(data[i], data[j], true) * inv[j];
      }
      sum += 2.0 * row * inv[i];
    }
    out.raw = sum * h * h / (nd * nd * std::pow(h, 6));
    out.closed_form = true;
  } else {
    std::vector<double> inv(n);
    for (std::size_t i = 0; i < n; ++i) {
      inv[i] = 1.0 / eval_start(start, data[i]);
    }
    const double scale = 1.0 / (nd * h * h * h);
    auto integrand = [&](double x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += kernel.second_derivative((x - data[i]) / h) * inv[i];
      }
      const double v = start_value(start, x) * acc * scale;
      return v * v;
    };
    const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
    double lo = *mn - 15.0 * h;
    const double hi = *mx + 15.0 * h;
    const bool positive = start.family == StartFamily::lognormal ||
                          start.family == StartFamily::gamma;
    if (positive && !start.clip) {
      lo = std::nextafter(std::max(lo, 0.0), hi);
    }
    std::vector<double> breaks{ lo, hi };
    if (start.clip && (start.family == StartFamily::normal ||
                       start.family == StartFamily::normal_mixture)) {
      for (double b : { start.mu - *start.clip * start.sd,
                        start.mu + *start.clip * start.sd }) {
        if (b > lo && b < hi) {
          breaks.push_back(b);
        }
      }
    }
    std::sort(breaks.begin(), breaks.end());
    QuadratureOptions opts;
    opts.abs_tol = 1e-12 * *kernel.roughness_dd / (nd * std::pow(h, 5));
    opts.rel_tol = 1e-10;
    opts.max_intervals = 100000;
    out.raw = integrate_pieces(integrand, breaks, opts).value;
  }

  const double bias = *kernel.roughness_dd / (nd * std::pow(h, 5));
  const double debiased = nd / (nd - 1.0) * (out.raw - bias);
  out.floored = !(debiased > 0.0);
  out.debiased = out.floored ? 0.0 : debiased;
  return out;
}

BandwidthChoice
plugin(std::span<const double> data,
       const FittedStart& start,
       const KernelSpec& kernel,
       int iterations,
       std::optional<double> h_pilot)
{
  require_smooth(kernel);
  if (iterations < 1) {
    throw std::invalid_argument("plug-in needs at least one iteration");
  }
  const double n = static_cast<double>(data.size());
  BandwidthChoice out;
  out.method = BandwidthMethod::plugin;
  out.h_os = h_os(kernel, sample_sd(data), n);
  double h = h_pilot ? *h_pilot : rule_delta(data, kernel).h;
  for (int it = 0; it < iterations; ++it) {
    const auto r = plugin_roughness(data, start, kernel, h);
    out.roughness = r.raw;
    out.roughness_debiased = r.debiased;
    if (r.floored) {
      auto fb = rule_delta(data, kernel);
      fb.method = BandwidthMethod::plugin;
      fb.fallback = true;
      fb.roughness = r.raw;
      fb.roughness_debiased = 0.0;
      return fb;
    }
    const double raw = amise_h(kernel, r.debiased, n).h;
    out.h_raw = raw;
    out.clamped = raw > out.h_os;
    h = std::min(raw, out.h_os);
  }
  out.h = h;
  return out;
}

double
bcv_value(std::span<const double> data,
          const FittedStart& start,
          const KernelSpec& kernel,
          double h)
{
  const double n = static_cast<double>(data.size());
  const auto r = plugin_roughness(data, start, kernel, h);
  const double h4 = h * h * h * h;
  return 0.25 * kernel.sigma2 * kernel.sigma2 * h4 *
           (r.raw - *kernel.roughness_dd / (n * h4 * h)) +
         kernel.roughness / (n * h);
}

BandwidthChoice
bcv(std::span<const double> data,
    const FittedStart& start,
    const KernelSpec& kernel,
    std::span<const double> h_grid)
{
  require_smooth(kernel);
  const double n = static_cast<double>(data.size());
  BandwidthChoice out;
  out.method = BandwidthMethod::bcv;
  out.h_os = h_os(kernel, sample_sd(data), n);
  check_grid(h_grid, out.h_os);
  out.grid.assign(h_grid.begin(), h_grid.end());
  for (double h : h_grid) {
    out.curve.push_back(bcv_value(data, start, kernel, h));
  }
  const auto best = argmin_first(out.curve);
  out.h = std::min(out.grid[best], out.h_os);
  out.roughness = plugin_roughness(data, start, kernel, out.h).raw;
  return out;
}

std::vector<UcvTerms>
ucv_terms(std::span<const double> data,
          const FittedStart& start,
          const KernelSpec& kernel,
          std::span<const double> h_grid)
{
  if (data.size() < 3) {
    throw std::invalid_argument("ucv needs at least 3 observations");
  }
  if (h_grid.empty()) {
    throw std::invalid_argument("bandwidth grid is empty");
  }
  for (double h : h_grid) {
    if (!(h > 0.0)) {
      throw DomainError("bandwidth must be positive");
    }
  }
  const std::size_t n = data.size();
  const std::size_t m = h_grid.size();
  std::vector<UcvTerms> out(m);

  const bool closed = pairwise_closed_form(start, kernel);
  for (std::size_t g = 0; g < m; ++g) {
    out[g].integral_sq = closed
                           ? integral_sq_closed(data, start, h_grid[g])
                           : integral_sq_quadrature(data, start, kernel, h_grid[g]);
  }

  // The start ratios do not depend on h, so each refit is used for the
  // whole grid at once.
  const LooStarts loo(data, start);
  std::vector<double> acc(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const FittedStart si = loo(i);
    const double log_si = log_start(si, data[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        continue;
      }
      const double ratio = std::exp(log_si - log_start(si, data[j]));
      const double d = data[i] - data[j];
      for (std::size_t g = 0; g < m; ++g) {
        acc[g] += eval_scaled(kernel, h_grid[g], d) * ratio;
      }
    }
  }
  const double nd = static_cast<double>(n);
  for (std::size_t g = 0; g < m; ++g) {
    out[g].loo_mean = acc[g] / (nd * (nd - 1.0));
  }
  return out;
}

BandwidthChoice
ucv(std::span<const double> data,
    const FittedStart& start,
    const KernelSpec& kernel,
    std::span<const double> h_grid)
{
  const double n = static_cast<double>(data.size());
  BandwidthChoice out;
  out.method = BandwidthMethod::ucv;
  out.h_os = h_os(kernel, sample_sd(data), n);
  check_grid(h_grid, out.h_os);
  out.grid.assign(h_grid.begin(), h_grid.end());
  for (const auto& t : ucv_terms(data, start, kernel, h_grid)) {
    out.curve.push_back(t.value());
  }
  out.h = std::min(out.grid[argmin_first(out.curve)], out.h_os);
  return out;
}

std::vector<double>
default_h_grid(std::span<const double> data, const KernelSpec& kernel, int count)
{
  if (count < 2) {
    throw std::invalid_argument("grid count must be at least 2");
  }
  const double cap = h_os(kernel, sample_sd(data), static_cast<double>(data.size()));
  std::vector<double> grid(count);
  const double lo = 0.1 * cap;
  for (int i = 0; i < count; ++i) {
    grid[i] = lo * std::pow(cap / lo, static_cast<double>(i) / (count - 1));
  }
  grid.back() = cap;
  return grid;
}

} // namespace semistart
