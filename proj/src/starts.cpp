#include "semistart/starts.hpp"

#include "semistart/numerics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace semistart {

namespace {

struct SampleMoments
{
  double mean;
  double var; // n-denominator
};

SampleMoments
sample_moments(std::span<const double> data)
{
  const double n = static_cast<double>(data.size());
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : data) {
    ss += (x - mean) * (x - mean);
  }
  return { mean, ss / n };
}

void
require_positive(std::span<const double> data, std::string_view family)
{
  for (double x : data) {
    if (!(x > 0.0)) {
      throw DomainError(std::string(family) +
                        " start needs strictly positive data");
    }
  }
}

double
lower_tail(double t)
{
  return 0.5 * std::erfc(t / std::sqrt(2.0));
}

double
gamma_pdf(double shape, double rate, double x)
{
  if (x <= 0.0) {
    return 0.0;
  }
  return std::exp(shape * std::log(rate) - std::lgamma(shape) +
                  (shape - 1.0) * std::log(x) - rate * x);
}

double
lognormal_pdf(double mu, double sd, double x)
{
  if (x <= 0.0) {
    return 0.0;
  }
  return normal_pdf(std::log(x) - mu, sd) / x;
}

double
log_sum_exp(std::span<const double> v)
{
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) {
    return top;
  }
  double acc = 0.0;
  for (double a : v) {
    acc += std::exp(a - top);
  }
  return top + std::log(acc);
}

struct EmAttempt
{
  std::vector<MixtureComponent> comps;
  std::vector<double> loglik;
  bool degenerate = false;
};

std::vector<double>
kmeanspp_centers(std::span<const double> data, int k, std::mt19937_64& rng)
{
  std::vector<double> centers;
  std::uniform_int_distribution<std::size_t> first(0, data.size() - 1);
  centers.push_back(data[first(rng)]);
  std::vector<double> d2(data.size());
  while (static_cast<int>(centers.size()) < k) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) {
        best = std::min(best, (data[i] - c) * (data[i] - c));
      }
      d2[i] = best;
    }
    if (std::accumulate(d2.begin(), d2.end(), 0.0) <= 0.0) {
      centers.push_back(data[first(rng)]);
      continue;
    }
    std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
    centers.push_back(data[pick(rng)]);
  }
  return centers;
}

EmAttempt
run_em(std::span<const double> data, int k, double sample_sd,
       std::mt19937_64& rng)
{
  const std::size_t n = data.size();
  const double floor_sd = 1e-6 * sample_sd;
  EmAttempt out;

  // Hard assignment to the seeded centers gives the starting parameters.
  const auto centers = kmeanspp_centers(data, k, rng);
  std::vector<double> cnt(k, 0.0), sum(k, 0.0), sum2(k, 0.0);
  for (double x : data) {
    int best = 0;
    for (int j = 1; j < k; ++j) {
      if (std::abs(x - centers[j]) < std::abs(x - centers[best])) {
        best = j;
      }
    }
    cnt[best] += 1.0;
    sum[best] += x;
    sum2[best] += x * x;
  }
  out.comps.resize(k);
  for (int j = 0; j < k; ++j) {
    auto& c = out.comps[j];
    if (cnt[j] >= 2.0) {
      c.mean = sum[j] / cnt[j];
      const double v = sum2[j] / cnt[j] - c.mean * c.mean;
      c.sd = v > 0.0 ? std::sqrt(v) : sample_sd;
    } else {
      c.mean = centers[j];
      c.sd = sample_sd;
    }
    c.weight = std::max(cnt[j], 1.0);
  }
  const double wsum = std::accumulate(
    out.comps.begin(), out.comps.end(), 0.0,
    [](double a, const MixtureComponent& c) { return a + c.weight; });
  for (auto& c : out.comps) {
    c.weight /= wsum;
    c.sd = std::max(c.sd, 10.0 * floor_sd);
  }

  std::vector<double> resp(n * k);
  std::vector<double> logp(k);
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    // E step
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) {
        const auto& c = out.comps[j];
        logp[j] = std::log(c.weight) + log_normal_pdf(data[i] - c.mean, c.sd);
      }
      const double lse = log_sum_exp(logp);
      ll += lse;
      for (int j = 0; j < k; ++j) {
        resp[i * k + j] = std::exp(logp[j] - lse);
      }
    }
    if (iter > 0) {
      // EM never decreases the likelihood; allow rounding noise only.
      if (ll < prev - 1e-9 * (1.0 + std::abs(prev))) {
        throw std::logic_error("EM log-likelihood decreased");
      }
      out.loglik.push_back(ll);
      if ((ll - prev) / static_cast<double>(n) < 1e-8) {
        break;
      }
    }
    prev = ll;

    // M step
    for (int j = 0; j < k; ++j) {
      double w = 0.0, m = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w += resp[i * k + j];
        m += resp[i * k + j] * data[i];
      }
      if (w <= 0.0) {
        out.degenerate = true;
        return out;
      }
      m /= w;
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v += resp[i * k + j] * (data[i] - m) * (data[i] - m);
      }
      v /= w;
      auto& c = out.comps[j];
      c.weight = w / static_cast<double>(n);
      c.mean = m;
      c.sd = std::sqrt(v);
      if (!(c.sd >= floor_sd)) {
        out.degenerate = true;
        return out;
      }
    }
    double total = 0.0;
    for (const auto& c : out.comps) {
      total += c.weight;
    }
    for (auto& c : out.comps) {
      c.weight /= total;
    }
  }
  if (out.loglik.empty()) {
    out.loglik.push_back(prev);
  }
  return out;
}

} // namespace

FittedStart
constant_start()
{
  FittedStart s;
  s.family = StartFamily::constant;
  s.clip.reset();
  return s;
}

FittedStart
normal_start(double mu, double sd, std::optional<double> clip)
{
  if (!(sd > 0.0)) {
    throw DomainError("normal start needs sd > 0");
  }
  FittedStart s;
  s.family = StartFamily::normal;
  s.mu = mu;
  s.sd = sd;
  s.clip = clip;
  return s;
}

FittedStart
lognormal_start(double mu, double sd, std::optional<double> clip)
{
  if (!(sd > 0.0)) {
    throw DomainError("lognormal start needs sd > 0");
  }
  FittedStart s;
  s.family = StartFamily::lognormal;
  s.mu = mu;
  s.sd = sd;
  s.clip = clip;
  return s;
}

FittedStart
gamma_start(double shape, double rate, std::optional<double> clip)
{
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw DomainError("gamma start needs shape > 0 and rate > 0");
  }
  FittedStart s;
  s.family = StartFamily::gamma;
  s.shape = shape;
  s.rate = rate;
  s.clip = clip;
  return s;
}

FittedStart
mixture_start(NormalMixture m, std::optional<double> clip)
{
  FittedStart s;
  s.family = StartFamily::normal_mixture;
  const auto mom = mixture_moments(m);
  s.mu = mom.mu0;
  s.sd = mom.sd0;
  s.mixture = std::move(m);
  s.clip = clip;
  return s;
}

FittedStart
fit_start(StartFamily family,
          std::span<const double> data,
          std::optional<double> clip)
{
  if (family == StartFamily::constant) {
    return constant_start();
  }
  if (data.size() < 2) {
    throw DomainError("fitting a start needs at least 2 observations");
  }
  switch (family) {
    case StartFamily::constant:
      return constant_start();
    case StartFamily::normal: {
      const auto [mean, var] = sample_moments(data);
      if (!(var > 0.0)) {
        throw DomainError("zero sample variance");
      }
      return normal_start(mean, std::sqrt(var), clip);
    }
    case StartFamily::lognormal: {
      require_positive(data, "lognormal");
      std::vector<double> logs(data.size());
      std::transform(data.begin(), data.end(), logs.begin(),
                     [](double x) { return std::log(x); });
      const auto [mean, var] = sample_moments(logs);
      if (!(var > 0.0)) {
        throw DomainError("zero sample variance");
      }
      return lognormal_start(mean, std::sqrt(var), clip);
    }
    case StartFamily::gamma: {
      require_positive(data, "gamma");
      const auto [mean, var] = sample_moments(data);
      if (!(var > 0.0)) {
        throw DomainError("zero sample variance");
      }
      return gamma_start(mean * mean / var, mean / var, clip);
    }
    case StartFamily::normal_mixture: {
      auto s = em_fit_mixture(data, 2, 0);
      s.clip = clip;
      return s;
    }
  }
  throw std::invalid_argument("unknown start family");
}

EmFit
em_fit_mixture_trace(std::span<const double> data, int k, std::uint64_t seed)
{
  if (k < 1) {
    throw std::invalid_argument("mixture needs k >= 1");
  }
  if (data.size() < 10 * static_cast<std::size_t>(k)) {
    throw DomainError("EM needs at least 10 observations per component");
  }
  const auto [mean, var] = sample_moments(data);
  if (!(var > 0.0)) {
    throw DomainError("zero sample variance");
  }
  const double sd = std::sqrt(var);

  EmFit fit;
  if (k == 1) {
    fit.start = mixture_start(NormalMixture({ { 1.0, mean, sd } }));
    double ll = 0.0;
    for (double x : data) {
      ll += log_normal_pdf(x - mean, sd);
    }
    fit.loglik.push_back(ll);
    return fit;
  }

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt <= 5; ++attempt) {
    auto run = run_em(data, k, sd, rng);
    if (!run.degenerate) {
      fit.start = mixture_start(NormalMixture(std::move(run.comps), 1e-9));
      fit.loglik = std::move(run.loglik);
      fit.iterations = static_cast<int>(fit.loglik.size());
      fit.restarts = attempt;
      return fit;
    }
  }
  throw DomainError("EM produced a degenerate component after 5 restarts");
}

FittedStart
em_fit_mixture(std::span<const double> data, int k, std::uint64_t seed)
{
  return em_fit_mixture_trace(data, k, seed).start;
}

double
eval_start_raw(const FittedStart& s, double x)
{
  switch (s.family) {
    case StartFamily::constant:
      return 1.0;
    case StartFamily::normal:
      return normal_pdf(x - s.mu, s.sd);
    case StartFamily::lognormal:
      return lognormal_pdf(s.mu, s.sd, x);
    case StartFamily::gamma:
      return gamma_pdf(s.shape, s.rate, x);
    case StartFamily::normal_mixture:
      return s.mixture->pdf(x);
  }
  return 0.0;
}

double
eval_start(const FittedStart& s, double x)
{
  if (!s.clip || s.family == StartFamily::constant) {
    const double v = eval_start_raw(s, x);
    if (!(v > 0.0)) {
      throw DomainError("start density is zero at x = " + std::to_string(x) +
                        " and clipping is disabled");
    }
    return v;
  }
  const double t = *s.clip;
  switch (s.family) {
    case StartFamily::normal:
    case StartFamily::normal_mixture:
      return eval_start_raw(s, std::clamp(x, s.mu - t * s.sd, s.mu + t * s.sd));
    case StartFamily::lognormal:
      return eval_start_raw(
        s, std::clamp(x, std::exp(s.mu - t * s.sd), std::exp(s.mu + t * s.sd)));
    case StartFamily::gamma: {
      const double lo =
        boost::math::gamma_p_inv(s.shape, lower_tail(t)) / s.rate;
      const double hi =
        boost::math::gamma_q_inv(s.shape, lower_tail(t)) / s.rate;
      return eval_start_raw(s, std::clamp(x, lo, hi));
    }
    case StartFamily::constant:
      break;
  }
  return 1.0;
}

std::vector<double>
score(const FittedStart& s, double x)
{
  switch (s.family) {
    case StartFamily::constant:
      throw std::invalid_argument("the constant start has no parameters");
    case StartFamily::normal: {
      const double u = x - s.mu;
      return { u / (s.sd * s.sd), (u * u - s.sd * s.sd) / (s.sd * s.sd * s.sd) };
    }
    case StartFamily::lognormal: {
      if (!(x > 0.0)) {
        throw DomainError("lognormal score needs x > 0");
      }
      const double u = std::log(x) - s.mu;
      return { u / (s.sd * s.sd), (u * u - s.sd * s.sd) / (s.sd * s.sd * s.sd) };
    }
    case StartFamily::gamma:
      if (!(x > 0.0)) {
        throw DomainError("gamma score needs x > 0");
      }
      return { std::log(s.rate) - boost::math::digamma(s.shape) + std::log(x),
               s.shape / s.rate - x };
    case StartFamily::normal_mixture: {
      const auto& comps = s.mixture->components();
      const std::size_t k = comps.size();
      const double f = s.mixture->pdf(x);
      std::vector<double> g(3 * k);
      for (std::size_t j = 0; j < k; ++j) {
        const auto& c = comps[j];
        const double phi = normal_pdf(x - c.mean, c.sd);
        const double tau = c.weight * phi / f;
        const double u = x - c.mean;
        g[j] = phi / f;
        g[k + j] = tau * u / (c.sd * c.sd);
        g[2 * k + j] = tau * (u * u - c.sd * c.sd) / (c.sd * c.sd * c.sd);
      }
      return g;
    }
  }
  return {};
}

std::string_view
to_string(StartFamily family)
{
  switch (family) {
    case StartFamily::constant:
      return "constant";
    case StartFamily::normal:
      return "normal";
    case StartFamily::lognormal:
      return "lognormal";
    case StartFamily::gamma:
      return "gamma";
    case StartFamily::normal_mixture:
      return "mixture";
  }
  return "unknown";
}

StartFamily
parse_start_family(std::string_view name)
{
  for (auto f : { StartFamily::constant, StartFamily::normal,
                  StartFamily::lognormal, StartFamily::gamma,
                  StartFamily::normal_mixture }) {
    if (name == to_string(f)) {
      return f;
    }
  }
  if (name == "normal_mixture") {
    return StartFamily::normal_mixture;
  }
  throw std::invalid_argument("unknown start family '" + std::string(name) + "'");
}

void
to_json(nlohmann::json& j, const FittedStart& s)
{
  j = nlohmann::json::object();
  j["family"] = std::string(to_string(s.family));
  nlohmann::json params = nlohmann::json::object();
  switch (s.family) {
    case StartFamily::constant:
      break;
    case StartFamily::normal:
    case StartFamily::lognormal:
      params["mu"] = s.mu;
      params["sd"] = s.sd;
      break;
    case StartFamily::gamma:
      params["shape"] = s.shape;
      params["rate"] = s.rate;
      break;
    case StartFamily::normal_mixture:
      to_json(params, *s.mixture);
      break;
  }
  j["params"] = params;
  j["clip"] = s.clip ? nlohmann::json(*s.clip) : nlohmann::json(nullptr);
}

FittedStart
start_from_json(const nlohmann::json& j)
{
  const auto family = parse_start_family(j.at("family").get<std::string>());
  std::optional<double> clip;
  if (j.contains("clip") && !j.at("clip").is_null()) {
    clip = j.at("clip").get<double>();
  }
  const auto& p = j.contains("params") ? j.at("params") : nlohmann::json::object();
  switch (family) {
    case StartFamily::constant:
      return constant_start();
    case StartFamily::normal:
      return normal_start(p.at("mu").get<double>(), p.at("sd").get<double>(), clip);
    case StartFamily::lognormal:
      return lognormal_start(p.at("mu").get<double>(), p.at("sd").get<double>(),
                             clip);
    case StartFamily::gamma:
      return gamma_start(p.at("shape").get<double>(), p.at("rate").get<double>(),
                         clip);
    case StartFamily::normal_mixture:
      return mixture_start(mixture_from_json(p), clip);
  }
  throw std::invalid_argument("unknown start family");
}

} // namespace semistart
