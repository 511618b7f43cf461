#include "semistart/exact_mise.hpp"

#include "semistart/numerics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <thread>

namespace semistart {

namespace {

constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

double
log_phi_at_zero_offset(double mu, double sd)
{
  // log phi_sd(mu)
  return -0.5 * (mu / sd) * (mu / sd) - std::log(sd) - kLogSqrt2Pi;
}

double
pair_sum(const NormalMixture& m, double extra_var)
{
  double total = 0.0;
  for (const auto& ci : m.components()) {
    for (const auto& cj : m.components()) {
      const double s = std::sqrt(ci.sd * ci.sd + cj.sd * cj.sd + extra_var);
      total += ci.weight * cj.weight * normal_pdf(cj.mean - ci.mean, s);
    }
  }
  return total;
}

struct ComponentTerms
{
  double inv_var;  // 1/sd_i^2
  double a;        // 1/sd_i^2 - 1/sd0^2
  double q;        // mu_i/sd_i^2 - mu0/sd0^2
  double beta;     // h^2 / b_i^2
  double b2;
  double e2;
  double log_phi;  // log phi_{sd_i}(mu_i)
};

std::vector<ComponentTerms>
component_terms(const NewMiseInputs& in)
{
  const double h2 = in.h * in.h;
  const double inv0 = 1.0 / (in.sd0 * in.sd0);
  std::vector<ComponentTerms> out;
  for (const auto& c : in.mixture.components()) {
    ComponentTerms t;
    t.inv_var = 1.0 / (c.sd * c.sd);
    t.a = t.inv_var - inv0;
    t.q = c.mean * t.inv_var - in.mu0 * inv0;
    t.b2 = 1.0 + h2 * t.a;
    t.beta = h2 / t.b2;
    t.e2 = 2.0 + h2 * t.inv_var - 2.0 * h2 * inv0;
    t.log_phi = log_phi_at_zero_offset(c.mean, c.sd);
    out.push_back(t);
  }
  return out;
}

// Radicand check without throwing; returns the name of the first failure.
std::string
first_violation(const NewMiseInputs& in)
{
  if (!(in.h > 0.0)) {
    return "h > 0";
  }
  if (!(in.sd0 > 0.0)) {
    return "sd0 > 0";
  }
  const auto t = component_terms(in);
  const double h2 = in.h * in.h;
  const double inv0 = 1.0 / (in.sd0 * in.sd0);
  const std::size_t k = t.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (!(t[i].b2 > 0.0)) {
      return "b_" + std::to_string(i + 1) + "^2";
    }
    if (!(t[i].e2 > 0.0)) {
      return "e_" + std::to_string(i + 1) + "^2";
    }
    const double alpha = t[i].inv_var - 2.0 * inv0;
    const double f2 = t[i].inv_var - alpha * alpha * h2 / t[i].e2;
    if (!(f2 > 0.0)) {
      return "f_" + std::to_string(i + 1) + "^2";
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double k2 =
        t[i].inv_var + t[j].inv_var - t[i].a * t[i].a * t[i].beta;
      if (!(k2 > 0.0)) {
        return "k_" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "^2";
      }
      const double c2 = k2 - t[j].a * t[j].a * t[j].beta;
      if (!(c2 > 0.0)) {
        return "c_" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "^2";
      }
    }
  }
  return {};
}

} // namespace

double
gaussian_product_integral(std::span<const GaussianFactor> factors, double a)
{
  if (factors.empty()) {
    throw std::invalid_argument("gaussian product needs at least one factor");
  }
  double prec = 0.0;
  double shift = 0.0;
  double prod = 1.0;
  for (const auto& f : factors) {
    if (!(f.sd > 0.0)) {
      throw DomainError("gaussian product needs positive sds");
    }
    prec += 1.0 / (f.sd * f.sd);
    shift += (f.mu - a) / (f.sd * f.sd);
    prod *= normal_pdf(f.mu - a, f.sd);
  }
  const double var = 1.0 / prec;
  return std::sqrt(2.0 * kPi * var) * prod * std::exp(0.5 * var * shift * shift);
}

double
gaussian_product_integral(std::span<const GaussianFactor> factors)
{
  std::vector<double> sds, mus;
  for (const auto& f : factors) {
    sds.push_back(f.sd);
    mus.push_back(f.mu);
  }
  return std::exp(log_gaussian_product(sds, mus));
}

double
mise_kernel(const NormalMixture& m, double h, double n)
{
  if (!(h > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " + std::to_string(h));
  }
  if (!(n >= 1.0)) {
    throw std::invalid_argument("mise needs n >= 1");
  }
  return 1.0 / (2.0 * kSqrtPi * n * h) + (1.0 - 1.0 / n) * pair_sum(m, 2.0 * h * h) -
         2.0 * pair_sum(m, h * h) + pair_sum(m, 0.0);
}

NewMiseInputs
true_parameter_inputs(const NormalMixture& m, double h)
{
  const auto mom = mixture_moments(m);
  return { m, mom.mu0, mom.sd0, h };
}

void
validate(const NewMiseInputs& in)
{
  const auto bad = first_violation(in);
  if (!bad.empty()) {
    throw DomainError("mise formula domain violated: " + bad +
                      " is not positive at h = " + std::to_string(in.h));
  }
}

NewMiseTerms
mise_new_terms(const NewMiseInputs& in)
{
  validate(in);
  const auto t = component_terms(in);
  const auto& comps = in.mixture.components();
  const std::size_t k = comps.size();
  const double h = in.h;
  const double h2 = h * h;
  const double inv0 = 1.0 / (in.sd0 * in.sd0);
  const double sqrt2pi = std::sqrt(2.0 * kPi);

  NewMiseTerms out;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& ti = t[i];
    const double mi = comps[i].mean * ti.inv_var;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& tj = t[j];
      const double mj = comps[j].mean * tj.inv_var;
      const double log_pp = std::log(comps[i].weight * comps[j].weight);

      const double c2 = ti.inv_var + tj.inv_var - ti.a * ti.a * ti.beta -
                        tj.a * tj.a * tj.beta;
      const double d = mi + mj - ti.a * ti.q * ti.beta - tj.a * tj.q * tj.beta;
      out.ea1 += std::exp(log_pp - 0.5 * std::log(ti.b2 * tj.b2 * c2) +
                          ti.log_phi + tj.log_phi + 0.5 * d * d / c2 +
                          0.5 * ti.q * ti.q * ti.beta +
                          0.5 * tj.q * tj.q * tj.beta);

      const double k2 = ti.inv_var + tj.inv_var - ti.a * ti.a * ti.beta;
      const double l = mi + mj - ti.a * ti.q * ti.beta;
      out.eb += std::exp(log_pp - 0.5 * std::log(ti.b2 * k2) + ti.log_phi +
                         tj.log_phi + 0.5 * ti.q * ti.q * ti.beta +
                         0.5 * l * l / k2);
    }

    // The g_i numerator uses mu_i/sd_i^2 - 2 mu0/sd0^2, the same quantity
    // as in the exponent.
    const double eps = h2 / ti.e2;
    const double alpha = ti.inv_var - 2.0 * inv0;
    const double q2 = mi - 2.0 * in.mu0 * inv0;
    const double f2 = ti.inv_var - alpha * alpha * eps;
    const double g = mi - alpha * q2 * eps;
    out.ea2 += comps[i].weight / (comps[i].sd * std::sqrt(ti.e2 * f2)) *
               std::exp(0.5 * g * g / f2 - 0.5 * comps[i].mean * mi +
                        0.5 * q2 * q2 * eps);
  }
  out.ea1 *= sqrt2pi;
  out.eb *= sqrt2pi;
  out.ea2 /= h * sqrt2pi;
  out.r_f = mixture_r_f(in.mixture);
  return out;
}

double
mise_new(const NewMiseInputs& in, double n)
{
  if (!(n >= 1.0)) {
    throw std::invalid_argument("mise needs n >= 1");
  }
  const auto t = mise_new_terms(in);
  return (1.0 - 1.0 / n) * t.ea1 + t.ea2 / n - 2.0 * t.eb + t.r_f;
}

double
mise_new_domain_limit(const NormalMixture& m, double mu0, double sd0, double h_max)
{
  auto ok = [&](double h) {
    return first_violation(NewMiseInputs{ m, mu0, sd0, h }).empty();
  };
  if (ok(h_max)) {
    // Radicands are monotone in h^2 for b, e and k; scan anyway for c and f.
    bool all = true;
    for (int i = 1; i <= 512 && all; ++i) {
      all = ok(h_max * i / 512.0);
    }
    if (all) {
      return h_max;
    }
  }
  double lo = 0.0;
  double hi = h_max;
  for (int i = 1; i <= 512; ++i) {
    const double h = h_max * i / 512.0;
    if (!ok(h)) {
      hi = h;
      break;
    }
    lo = h;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * h_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

double
ise_new(std::span<const double> data,
        double mu_hat,
        double sd_hat,
        double h,
        const NormalMixture& m)
{
  if (!(h > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " + std::to_string(h));
  }
  if (data.empty()) {
    throw std::invalid_argument("ise needs at least one observation");
  }
  if (!(sd_hat > 0.0)) {
    throw DomainError("start sd must be positive");
  }
  const std::size_t n = data.size();
  const double nd = static_cast<double>(n);
  std::vector<double> ls(n);
  for (std::size_t i = 0; i < n; ++i) {
    ls[i] = log_normal_pdf(data[i] - mu_hat, sd_hat);
  }

  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const std::array<double, 4> sds{ sd_hat, sd_hat, h, h };
      const std::array<double, 4> mus{ mu_hat, mu_hat, data[i], data[j] };
      const double term = std::exp(log_gaussian_product(sds, mus) - ls[i] - ls[j]);
      a += (i == j) ? term : 2.0 * term;
    }
  }
  a /= nd * nd;

  double b = 0.0;
  for (const auto& c : m.components()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::array<double, 3> sds{ h, sd_hat, c.sd };
      const std::array<double, 3> mus{ data[i], mu_hat, c.mean };
      acc += std::exp(log_gaussian_product(sds, mus) - ls[i]);
    }
    b += c.weight * acc / nd;
  }
  return a - 2.0 * b + mixture_r_f(m);
}

double
ise_kernel(std::span<const double> data, double h, const NormalMixture& m)
{
  if (!(h > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " + std::to_string(h));
  }
  if (data.empty()) {
    throw std::invalid_argument("ise needs at least one observation");
  }
  const double nd = static_cast<double>(data.size());
  const double s2 = std::sqrt(2.0) * h;
  double a = 0.0;
  for (double xi : data) {
    for (double xj : data) {
      a += normal_pdf(xi - xj, s2);
    }
  }
  double b = 0.0;
  for (double xi : data) {
    for (const auto& c : m.components()) {
      b += c.weight * normal_pdf(xi - c.mean, std::sqrt(h * h + c.sd * c.sd));
    }
  }
  return a / (nd * nd) - 2.0 * b / nd + mixture_r_f(m);
}

OptimalH
optimal_h(const std::function<double(double)>& curve, double lo, double hi)
{
  if (!(lo > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("optimal_h: invalid bracket");
  }
  auto scan = [&](int points) {
    std::vector<std::pair<double, double>> pts(points);
    for (int i = 0; i < points; ++i) {
      const double h =
        i == points - 1 ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
      pts[i] = { h, curve(h) };
    }
    return pts;
  };
  auto local_minima = [](const std::vector<std::pair<double, double>>& pts) {
    std::vector<std::size_t> idx;
    const std::size_t m = pts.size();
    for (std::size_t i = 0; i < m; ++i) {
      const bool left = i == 0 || pts[i].second < pts[i - 1].second;
      const bool right = i + 1 == m || pts[i].second <= pts[i + 1].second;
      if (left && right) {
        idx.push_back(i);
      }
    }
    return idx;
  };
  auto refine = [&](const std::vector<std::pair<double, double>>& pts,
                    std::size_t i) {
    const double a = pts[i == 0 ? 0 : i - 1].first;
    const double b = pts[std::min(i + 1, pts.size() - 1)].first;
    if (!(b > a)) {
      return Minimum{ pts[i].first, pts[i].second };
    }
    auto m = golden_section(curve, a, b, 1e-10 * b);
    if (pts[i].second < m.value) {
      m = { pts[i].first, pts[i].second };
    }
    return m;
  };

  auto coarse = scan(64);
  auto minima = local_minima(coarse);
  OptimalH out;
  if (minima.size() == 1) {
    const auto m = refine(coarse, minima.front());
    out.h = m.x;
    out.value = m.value;
    return out;
  }
  out.unimodal = false;
  auto fine = scan(1024);
  minima = local_minima(fine);
  bool first = true;
  for (auto i : minima) {
    const auto m = refine(fine, i);
    if (first || m.value < out.value ||
        (m.value == out.value && m.x < out.h)) {
      out.h = m.x;
      out.value = m.value;
      first = false;
    }
  }
  return out;
}

unsigned
worker_count(std::size_t tasks)
{
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SEMISTART_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) {
      cap = std::min<unsigned>(cap, static_cast<unsigned>(v));
    }
  }
  return static_cast<unsigned>(
    std::max<std::size_t>(1, std::min<std::size_t>(cap, tasks)));
}

std::vector<MiseReport>
benchmark_table(std::span<const int> cases, std::span<const int> ns)
{
  for (int c : cases) {
    if (c < 1 || c > 15) {
      throw std::invalid_argument("case must lie in 1..15");
    }
  }
  for (int n : ns) {
    if (n < 1) {
      throw std::invalid_argument("sample sizes must be positive");
    }
  }
  std::vector<MiseReport> rows(cases.size() * ns.size());
  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr failure;
  std::atomic<bool> failed{ false };

  auto work = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= rows.size() || failed.load()) {
        return;
      }
      try {
        const int case_id = cases[idx / ns.size()];
        const int n = ns[idx % ns.size()];
        const auto m = marron_wand(case_id);
        const auto mom = mixture_moments(m);
        const double lo = 0.01 * mom.sd0;
        const double hi = 3.0 * mom.sd0;
        const double nd = static_cast<double>(n);

        MiseReport r;
        r.case_id = case_id;
        r.n = n;
        const auto trad = optimal_h(
          [&](double h) { return mise_kernel(m, h, nd); }, lo, hi);
        r.h_star_trad = trad.h;
        r.mise_star_trad = trad.value;

        const double limit = mise_new_domain_limit(m, mom.mu0, mom.sd0, hi);
        const double hi_new = limit < hi ? limit * (1.0 - 1e-9) : hi;
        const auto fresh = optimal_h(
          [&](double h) {
            return mise_new(NewMiseInputs{ m, mom.mu0, mom.sd0, h }, nd);
          },
          lo, hi_new);
        r.h_star_new = fresh.h;
        r.mise_star_new = fresh.value;
        r.new_at_domain_limit = limit < hi && fresh.h > 0.999 * hi_new;
        r.ratio = r.mise_star_new / r.mise_star_trad;
        rows[idx] = r;
      } catch (...) {
        if (!failed.exchange(true)) {
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  const unsigned workers = worker_count(rows.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back(work);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return rows;
}

void
write_benchmark_csv(std::ostream& out,
                    std::span<const MiseReport> rows,
                    int precision,
                    bool header)
{
  if (header) {
    out << "case,n,h_new,mise_new,h_trad,mise_trad,ratio\n";
  }
  const auto old = out.precision(precision);
  for (const auto& r : rows) {
    out << r.case_id << ',' << r.n << ',' << r.h_star_new << ','
        << r.mise_star_new << ',' << r.h_star_trad << ',' << r.mise_star_trad
        << ',' << r.ratio << '\n';
  }
  out.precision(old);
}

} // namespace semistart
