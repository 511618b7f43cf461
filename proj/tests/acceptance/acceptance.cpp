// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include "semistart/bandwidth.hpp"
#include "semistart/densities.hpp"
#include "semistart/estimator.hpp"
#include "semistart/exact_mise.hpp"
#include "semistart/hermite.hpp"
#include "semistart/kernels.hpp"
#include "semistart/multivariate.hpp"
#include "semistart/starts.hpp"

#include "oracles.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace semistart;

namespace {

const KernelSpec kGauss = kernel_props(KernelShape::gaussian);

// Collects the outcome of one criterion along with a short summary.
class Verdict
{
public:
  void expect(bool ok, const std::string& what)
  {
    if (!ok) {
      pass_ = false;
      failures_.push_back(what);
    }
  }

  void note(const std::string& s) { notes_.push_back(s); }

  bool pass() const { return pass_; }

  std::string summary() const
  {
    std::ostringstream out;
    for (std::size_t i = 0; i < notes_.size(); ++i) {
      out << (i ? "; " : "") << notes_[i];
    }
    for (std::size_t i = 0; i < failures_.size() && i < 6; ++i) {
      out << (out.tellp() > 0 ? "; " : "") << "failed: " << failures_[i];
    }
    if (failures_.size() > 6) {
      out << "; " << failures_.size() - 6 << " more failures";
    }
    return out.str();
  }

private:
  bool pass_ = true;
  std::vector<std::string> notes_;
  std::vector<std::string> failures_;
};

std::string
fmt(const char* pattern, auto... args)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double
elapsed(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Quadrature breaks around every component, wide enough for any tail that
// matters to a squared mixture functional.
std::vector<double>
mixture_breaks(const NormalMixture& m)
{
  const auto mm = mixture_moments(m);
  std::vector<double> b{ mm.mu0 - 12.0 * mm.sd0, mm.mu0 + 12.0 * mm.sd0 };
  for (const auto& c : m.components()) {
    for (double k : { 0.0, 1.0, 2.0, 4.0, 8.0, 20.0 }) {
      b.push_back(c.mean + k * c.sd);
      b.push_back(c.mean - k * c.sd);
    }
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

// Gauss-Kronrod over consecutive sorted breaks with shallow refinement.
// Spans are a few scale units wide, so deep bisection only chases round-off
// in negligible tails.
double
quad_spans(const std::function<double(double)>& f, std::vector<double> breaks, int pieces)
{
  std::sort(breaks.begin(), breaks.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double w = (breaks[i + 1] - breaks[i]) / pieces;
    for (int k = 0; k < pieces; ++k) {
      const double a = breaks[i] + k * w;
      s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, a + w, 4, 1e-14);
    }
  }
  return s;
}

struct Literal
{
  double f = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
};

// f, f' and f'' of the mixture written out term by term.
Literal
literal_derivatives(const NormalMixture& m, double x)
{
  Literal out;
  for (const auto& c : m.components()) {
    const double u = (x - c.mean) / c.sd;
    const double p = c.weight * oracle::phi(u) / c.sd;
    out.f += p;
    out.f1 += -p * u / c.sd;
    out.f2 += p * (u * u - 1.0) / (c.sd * c.sd);
  }
  return out;
}

// Reference difficulty scores: rho_trad, rho_new, rho1_trad, rho1_new.
constexpr std::array<std::array<double, 4>, 15> kRhoTable{ {
  { 0.7330, 0.0, 1.8933, 0.0 },
  { 0.8921, 0.6739, 2.0343, 1.7910 },
  { 5.6070, 5.5985, 3.4988, 3.5202 },
  { 3.8664, 3.8354, 3.5512, 3.5369 },
  { 2.3201, 2.2088, 2.9388, 2.9042 },
  { 1.1183, 1.0615, 2.1786, 2.0575 },
  { 2.0215, 1.9579, 2.4701, 2.4177 },
  { 1.3753, 1.3468, 2.3095, 2.1998 },
  { 1.5600, 1.5335, 2.4608, 2.3763 },
  { 3.5571, 3.5421, 3.8812, 3.8674 },
  { 12.4450, 12.4447, 5.5611, 5.5590 },
  { 6.4350, 6.4382, 4.0978, 4.0909 },
  { 11.1149, 11.1147, 4.9481, 4.9465 },
  { 14.6610, 14.6615, 4.8733, 4.8703 },
  { 9.6259, 9.6261, 4.3863, 4.3821 },
} };

struct MiseRow
{
  int case_id;
  int n;
  double h_new, mise_new, h_trad, mise_trad, ratio;
};

constexpr std::array<MiseRow, 15> kMiseTable{ {
  { 1, 25, 0.7071, 0.0113, 0.6094, 0.0137, 0.8217 },
  { 1, 100, 0.7071, 0.0028, 0.4455, 0.0054, 0.5215 },
  { 1, 1000, 0.7071, 0.0003, 0.2723, 0.0010, 0.2740 },
  { 2, 25, 0.3928, 0.0228, 0.4251, 0.0211, 1.0772 },
  { 2, 100, 0.3544, 0.0068, 0.3054, 0.0083, 0.8250 },
  { 2, 1000, 0.2381, 0.0012, 0.1841, 0.0016, 0.7396 },
  { 6, 25, 0.5568, 0.0197, 0.6028, 0.0182, 1.0792 },
  { 6, 100, 0.3823, 0.0075, 0.3854, 0.0075, 1.0067 },
  { 6, 1000, 0.2278, 0.0013, 0.2208, 0.0014, 0.9663 },
  { 7, 25, 0.3701, 0.0303, 0.3661, 0.0306, 0.9881 },
  { 7, 100, 0.2674, 0.0110, 0.2616, 0.0112, 0.9768 },
  { 7, 1000, 0.1620, 0.0019, 0.1575, 0.0020, 0.9700 },
  { 12, 25, 0.7289, 0.0363, 0.6657, 0.0359, 1.0121 },
  { 12, 100, 0.1989, 0.0232, 0.2016, 0.0229, 1.0115 },
  { 12, 1000, 0.0675, 0.0064, 0.0678, 0.0064, 1.0043 },
} };

Verdict
criterion1()
{
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  double worst_rho = 0.0;
  double worst_rho1 = 0.0;
  for (int c = 1; c <= 15; ++c) {
    const auto m = marron_wand(c);
    const auto r = roughness(m);
    const auto l = l1_measures(m);
    const auto& ref = kRhoTable[c - 1];
    const double e_rho = std::max(std::abs(r.rho_trad - ref[0]), std::abs(r.rho_new - ref[1]));
    const double e_rho1 = std::max(std::abs(l.rho1_trad - ref[2]), std::abs(l.rho1_new - ref[3]));
    worst_rho = std::max(worst_rho, e_rho);
    worst_rho1 = std::max(worst_rho1, e_rho1);
    v.expect(e_rho <= 0.0005, fmt("case %d rho off by %.2e", c, e_rho));
    v.expect(e_rho1 <= 0.005, fmt("case %d rho1 off by %.2e", c, e_rho1));
  }
  const double t = elapsed(t0);
  v.expect(t < 10.0, fmt("runtime %.1f s", t));
  v.note(fmt("max |rho err| %.1e, max |rho1 err| %.1e, %.2f s", worst_rho, worst_rho1, t));
  return v;
}

Verdict
criterion2()
{
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> cases{ 1, 2, 6, 7, 12 };
  const std::vector<int> ns{ 25, 100, 1000 };
  const auto rows = benchmark_table(cases, ns);
  const double t = elapsed(t0);
  double wh = 0.0;
  double wm = 0.0;
  double wr = 0.0;
  v.expect(rows.size() == kMiseTable.size(), "row count");
  for (std::size_t i = 0; i < rows.size() && i < kMiseTable.size(); ++i) {
    const auto& r = rows[i];
    const auto& ref = kMiseTable[i];
    v.expect(r.case_id == ref.case_id && r.n == ref.n, "row order");
    const double eh = std::max(std::abs(r.h_star_new - ref.h_new), std::abs(r.h_star_trad - ref.h_trad));
    const double em = std::max(std::abs(r.mise_star_new - ref.mise_new),
                               std::abs(r.mise_star_trad - ref.mise_trad));
    const double er = std::abs(r.ratio - ref.ratio);
    wh = std::max(wh, eh);
    wm = std::max(wm, em);
    wr = std::max(wr, er);
    v.expect(eh <= 0.001, fmt("case %d n %d h off by %.2e", ref.case_id, ref.n, eh));
    v.expect(em <= 0.0002, fmt("case %d n %d mise off by %.2e", ref.case_id, ref.n, em));
    v.expect(er <= 0.005, fmt("case %d n %d ratio off by %.2e", ref.case_id, ref.n, er));
  }
  v.expect(t < 60.0, fmt("runtime %.1f s", t));
  v.note(fmt("max err h %.1e, mise %.1e, ratio %.1e, %.2f s", wh, wm, wr, t));
  return v;
}

Verdict
criterion3()
{
  Verdict v;
  double wh = 0.0;
  double wm = 0.0;
  for (double sigma : { 0.5, 1.0, 3.0 }) {
    const NormalMixture m({ { 1.0, 0.0, sigma } });
    const double hi = mise_new_domain_limit(m, 0.0, sigma, 3.0 * sigma) * (1.0 - 1e-9);
    for (double n : { 25.0, 1000.0 }) {
      const auto best = optimal_h(
        [&](double h) { return mise_new(true_parameter_inputs(m, h), n); }, 0.01 * sigma, hi);
      const double eh = std::abs(best.h - sigma / std::numbers::sqrt2);
      const double expect = 1.0 / (2.0 * std::sqrt(std::numbers::pi) * sigma * n);
      const double em = std::abs(best.value - expect) / expect;
      wh = std::max(wh, eh);
      wm = std::max(wm, em);
      v.expect(eh <= 1e-4, fmt("sigma %g n %g argmin off by %.2e", sigma, n, eh));
      v.expect(em <= 1e-9, fmt("sigma %g n %g mise* rel err %.2e", sigma, n, em));
    }
  }
  v.note(fmt("max |h err| %.1e, max rel mise err %.1e", wh, wm));
  return v;
}

Verdict
criterion4()
{
  Verdict v;
  double worst = 0.0;
  for (int c = 1; c <= 15; ++c) {
    const auto m = marron_wand(c);
    const auto mm = mixture_moments(m);
    for (double h : { 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0 }) {
      auto in = true_parameter_inputs(m, h);
      in.sd0 = 1e4 * mm.sd0;
      for (double n : { 25.0, 100.0, 1000.0 }) {
        const double d = std::abs(mise_new(in, n) - mise_kernel(m, h, n));
        worst = std::max(worst, d);
        v.expect(d < 1e-6, fmt("case %d h %g n %g diff %.2e", c, h, n, d));
      }
    }
  }
  v.note(fmt("max |diff| %.1e over 15 cases x 7 h x 3 n", worst));
  return v;
}

Verdict
criterion5()
{
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = marron_wand(6);
  const auto mm = mixture_moments(m);
  const double h = 0.4;
  std::vector<double> ise;
  ise.reserve(2000);
  for (std::uint64_t rep = 0; rep < 2000; ++rep) {
    const auto x = mixture_sample(m, 100, 90000 + rep);
    ise.push_back(ise_new(x, mm.mu0, mm.sd0, h, m));
  }
  const auto s = oracle::summarize(ise);
  const double exact = mise_new(true_parameter_inputs(m, h), 100.0);
  const double z = (s.mean - exact) / s.se;
  const double t = elapsed(t0);
  v.expect(std::abs(z) <= 3.0, fmt("|z| = %.2f", std::abs(z)));
  v.expect(t < 120.0, fmt("runtime %.1f s", t));
  v.note(fmt("mean ise %.6f, mise %.6f, se %.1e, z %.2f, %.2f s", s.mean, exact, s.se, z, t));
  return v;
}

Verdict
criterion6()
{
  Verdict v;
  const auto m = marron_wand(6);
  const auto mm = mixture_moments(m);
  const double h = 0.3;
  const std::size_t n = 10000;
  const std::array<double, 3> xs{ -1.0, 0.0, 1.0 };
  std::array<std::vector<double>, 3> values;
  const auto start = normal_start(mm.mu0, mm.sd0);
  for (std::uint64_t rep = 0; rep < 400; ++rep) {
    const DensityEstimate e(mixture_sample(m, n, 70000 + rep), kGauss, h, start);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      values[k].push_back(e(xs[k]));
    }
  }
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k];
    const double f = mixture_pdf(m, x);
    const auto s = oracle::summarize(values[k]);
    const double bias = s.mean - f;
    const double bias_asym = 0.5 * kGauss.sigma2 * h * h * bias_factors(m, x).f0rpp;
    const double zb = (bias - bias_asym) / s.se;
    const double var_asym = kGauss.roughness * f / (nd * h) - f * f / nd;
    const double zv = (s.var - var_asym) / s.var_se;
    v.expect(std::abs(zb) <= 3.0, fmt("bias at x=%g: MC %.5f vs %.5f (z %.1f)", x, bias, bias_asym, zb));
    v.expect(std::abs(zv) <= 3.0, fmt("variance at x=%g: MC %.3e vs %.3e (z %.1f)", x, s.var, var_asym, zv));
    v.note(fmt("x=%g bias z %.1f, var z %.1f", x, zb, zv));
  }
  return v;
}

Verdict
criterion7()
{
  Verdict v;

  // roughness functionals and R(f) from literal derivatives
  double w_rough = 0.0;
  double w_rf = 0.0;
  for (int c = 1; c <= 15; ++c) {
    const auto m = marron_wand(c);
    const auto mm = mixture_moments(m);
    const auto br = mixture_breaks(m);
    const double v0 = mm.sd0 * mm.sd0;
    const auto trad = [&](double x) {
      const auto d = literal_derivatives(m, x);
      return d.f2 * d.f2;
    };
    // f0 r'' = f'' - 2 a f' + (a^2 + 1/sd0^2) f with a = f0'/f0
    const auto fresh = [&](double x) {
      const auto d = literal_derivatives(m, x);
      const double a = -(x - mm.mu0) / v0;
      const double g = d.f2 - 2.0 * a * d.f1 + (a * a + 1.0 / v0) * d.f;
      return g * g;
    };
    const auto sq = [&](double x) {
      const double f = literal_derivatives(m, x).f;
      return f * f;
    };
    const auto r = roughness(m);
    const double qt = quad_spans(trad, br, 4);
    const double qn = quad_spans(fresh, br, 4);
    const double qf = quad_spans(sq, br, 4);
    const double et = std::abs(r.r_trad - qt) / qt;
    const double en = std::abs(r.r_new - qn) / std::max(qn, 1e-300);
    const double ef = std::abs(mixture_r_f(m) - qf) / qf;
    w_rough = std::max({ w_rough, et, qn > 1e-20 ? en : 0.0 });
    w_rf = std::max(w_rf, ef);
    v.expect(et <= 1e-5, fmt("case %d r_trad rel err %.2e", c, et));
    v.expect(qn <= 1e-20 ? std::abs(r.r_new) <= 1e-12 : en <= 1e-5,
             fmt("case %d r_new rel err %.2e", c, en));
    v.expect(ef <= 1e-10, fmt("case %d R(f) rel err %.2e", c, ef));
  }
  v.note(fmt("roughness %.1e, R(f) %.1e", w_rough, w_rf));

  // gaussian product identity
  double w_prod = 0.0;
  const std::vector<std::vector<GaussianFactor>> fixtures{
    { { 1.0, 0.0 }, { 0.5, 1.0 } },
    { { 0.3, -1.0 }, { 2.0, 0.5 }, { 1.1, 2.0 } },
    { { 0.8, 3.0 }, { 0.8, 3.5 }, { 1.5, -0.5 }, { 4.0, 0.0 } },
  };
  for (const auto& fs : fixtures) {
    const auto prod = [&](double x) {
      double p = 1.0;
      for (const auto& g : fs) {
        p *= oracle::phi((x - g.mu) / g.sd) / g.sd;
      }
      return p;
    };
    const double q = quad_spans(prod, { -30.0, 30.0 }, 120);
    for (double a : { 0.0, -2.0, 5.0 }) {
      const double e = std::abs(gaussian_product_integral(fs, a) - q) / q;
      w_prod = std::max(w_prod, e);
      v.expect(e <= 1e-10, fmt("product integral rel err %.2e", e));
    }
    const double e = std::abs(gaussian_product_integral(fs) - q) / q;
    w_prod = std::max(w_prod, e);
    v.expect(e <= 1e-10, fmt("product integral rel err %.2e", e));
  }
  v.note(fmt("products %.1e", w_prod));

  // integral of the unclipped normal-start estimate
  double w_int = 0.0;
  for (std::uint64_t seed : { 1, 2, 3 }) {
    const auto x = oracle::normal_draws(25, 0.5, 1.7, seed);
    const auto start = fit_start(StartFamily::normal, x, std::nullopt);
    for (double h : { 0.2, 0.6, 1.5 }) {
      const DensityEstimate e(x, kGauss, h, start);
      const auto rep = integral_of_estimate(e);
      std::vector<double> br{ start.mu - 40.0 * start.sd, start.mu + 40.0 * start.sd };
      br.insert(br.end(), x.begin(), x.end());
      const double q = quad_spans([&](double t) { return e(t); }, br, 4);
      const double err = std::abs(rep.integral - q) / q;
      w_int = std::max(w_int, err);
      v.expect(rep.closed_form, "integral not in closed form");
      v.expect(err <= 1e-8, fmt("estimate integral rel err %.2e", err));
    }
  }
  v.note(fmt("estimate integral %.1e", w_int));

  // the integral of the squared estimate inside ucv
  double w_ucv = 0.0;
  for (std::uint64_t seed : { 4, 5 }) {
    const auto x = oracle::normal_draws(30, -1.0, 0.8, seed);
    const std::vector<double> grid{ 0.15, 0.4, 0.9 };
    for (const auto& start : { fit_start(StartFamily::normal, x),
                               fit_start(StartFamily::normal, x, std::nullopt),
                               constant_start() }) {
      const auto terms = ucv_terms(x, start, kGauss, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const DensityEstimate e(x, kGauss, grid[i], start);
        std::vector<double> br{ -30.0, 30.0 };
        br.insert(br.end(), x.begin(), x.end());
        if (start.family == StartFamily::normal) {
          br.push_back(start.mu - 2.5 * start.sd);
          br.push_back(start.mu + 2.5 * start.sd);
        }
        const double q = quad_spans(
          [&](double t) {
            const double f = e(t);
            return f * f;
          },
          br, 4);
        const double err = std::abs(terms[i].integral_sq - q) / q;
        w_ucv = std::max(w_ucv, err);
        v.expect(err <= 1e-8, fmt("ucv integral rel err %.2e", err));
      }
    }
  }
  v.note(fmt("ucv integral %.1e", w_ucv));
  return v;
}

Verdict
criterion8()
{
  Verdict v;

  // rho and rho1 are scale invariant
  double w_rho = 0.0;
  for (int c = 1; c <= 15; ++c) {
    const auto m = marron_wand(c);
    const auto r = roughness(m);
    const auto l = l1_measures(m);
    for (double s : { 0.1, 3.0 }) {
      const auto ms = m.affine(s);
      const auto rs = roughness(ms);
      const auto ls = l1_measures(ms);
      const double e = std::max({ std::abs(rs.rho_trad - r.rho_trad), std::abs(rs.rho_new - r.rho_new),
                                  std::abs(ls.rho1_trad - l.rho1_trad),
                                  std::abs(ls.rho1_new - l.rho1_new) });
      w_rho = std::max(w_rho, e);
      v.expect(e <= 1e-8, fmt("case %d scale %g rho diff %.2e", c, s, e));
    }
  }
  v.note(fmt("rho scale %.1e", w_rho));

  // multivariate estimate under invertible affine maps
  double w_aff = 0.0;
  for (int d : { 2, 3 }) {
    std::mt19937_64 rng(40 + d);
    std::normal_distribution<double> z;
    Eigen::MatrixXd x(80, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        x(i, k) = z(rng) + (k > 0 ? 0.5 * x(i, k - 1) : 0.0);
      }
    }
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        a(i, k) = (i == k ? 1.5 + i : 0.3 * (i - k));
      }
    }
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(d, -2.0, 4.0);
    Eigen::MatrixXd y = x * a.transpose();
    y.rowwise() += b.transpose();
    const double jac = std::abs(a.determinant());
    const MvEstimate ex(x, 0.6);
    const MvEstimate ey(y, 0.6);
    for (int i = 0; i < 20; ++i) {
      Eigen::VectorXd p(d);
      for (Eigen::Index k = 0; k < d; ++k) {
        p(k) = 1.5 * z(rng);
      }
      const double fx = mv_estimate(ex, p) / jac;
      const double fy = mv_estimate(ey, a * p + b);
      const double e = std::abs(fy - fx) / std::max(fx, 1e-300);
      w_aff = std::max(w_aff, e);
      v.expect(e <= 1e-8, fmt("affine d=%d rel err %.2e", d, e));
    }
    const double hb = mv_bandwidth(x).h;
    v.expect(std::abs(mv_bandwidth(y).h - hb) <= 1e-8 * hb, "mv bandwidth not affine invariant");
  }
  v.note(fmt("affine %.1e", w_aff));

  // every bandwidth rule scales with the data
  double w_bw = 0.0;
  const auto base = mixture_sample(marron_wand(6), 150, 11);
  const double n = static_cast<double>(base.size());
  const auto grid = default_h_grid(base, kGauss, 40);
  const double r_ref = roughness(marron_wand(6)).r_new;
  for (double c : { 0.1, 3.0 }) {
    std::vector<double> sc;
    std::vector<double> sg;
    for (double t : base) {
      sc.push_back(c * t + 7.0);
    }
    for (double g : grid) {
      sg.push_back(c * g);
    }
    const auto s0 = fit_start(StartFamily::normal, base);
    const auto s1 = fit_start(StartFamily::normal, sc);
    const std::vector<std::pair<std::string, std::pair<double, double>>> pairs{
      { "amise_oracle", { amise_h(kGauss, r_ref, n).h, amise_h(kGauss, r_ref * std::pow(c, -5.0), n).h } },
      { "h_os", { h_os(kGauss, sample_sd(base), n), h_os(kGauss, sample_sd(sc), n) } },
      { "rule_gamma", { rule_gamma(base, kGauss).h, rule_gamma(sc, kGauss).h } },
      { "rule_delta", { rule_delta(base, kGauss).h, rule_delta(sc, kGauss).h } },
      { "plugin", { plugin(base, s0, kGauss).h, plugin(sc, s1, kGauss).h } },
      { "bcv", { bcv(base, s0, kGauss, grid).h, bcv(sc, s1, kGauss, sg).h } },
      { "ucv", { ucv(base, s0, kGauss, grid).h, ucv(sc, s1, kGauss, sg).h } },
    };
    for (const auto& [name, hs] : pairs) {
      const double e = std::abs(hs.second - c * hs.first) / (c * hs.first);
      w_bw = std::max(w_bw, e);
      v.expect(e <= 1e-8, fmt("%s scale %g rel err %.2e", name.c_str(), c, e));
    }
  }
  v.note(fmt("bandwidth scale %.1e", w_bw));

  // Hermite recurrence against (-1)^j phi^(j) / phi by central differences
  using big = boost::multiprecision::cpp_bin_float_50;
  const auto phi_big = [](big t) {
    return big(exp(-t * t / 2) / sqrt(2 * boost::math::constants::pi<big>()));
  };
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-2.5, 2.5);
  const big step("1e-4");
  double w_her = 0.0;
  for (int j = 0; j <= 8; ++j) {
    for (int i = 0; i < 50; ++i) {
      const double x = unif(rng);
      big s = 0;
      big binom = 1;
      for (int k = 0; k <= j; ++k) {
        const big term = binom * phi_big(big(x) + (big(j) / 2 - k) * step);
        s += (k % 2 == 0) ? term : big(-term);
        binom = binom * (j - k) / (k + 1);
      }
      big deriv = s;
      for (int k = 0; k < j; ++k) {
        deriv /= step;
      }
      const double identity = static_cast<double>((j % 2 ? -deriv : deriv) / phi_big(big(x)));
      const double e = std::abs(identity - hermite_poly(j, x));
      w_her = std::max(w_her, e);
      v.expect(e <= 1e-4, fmt("He_%d(%g) err %.2e", j, x, e));
    }
  }
  v.note(fmt("hermite %.1e", w_her));
  return v;
}

Verdict
criterion9()
{
  Verdict v;
  const auto m = NormalMixture::standard_normal();
  const double h = 0.5;
  const std::vector<double> grid{ h };
  std::vector<double> vals;
  for (std::uint64_t rep = 0; rep < 400; ++rep) {
    const auto x = mixture_sample(m, 100, 30000 + rep);
    const auto start = fit_start(StartFamily::normal, x, std::nullopt);
    vals.push_back(ucv_terms(x, start, kGauss, grid)[0].value());
  }
  const auto s = oracle::summarize(vals);
  const double est = s.mean + mixture_r_f(m);
  const double exact = mise_new(true_parameter_inputs(m, h), 100.0);
  const double z = (est - exact) / s.se;
  v.expect(std::abs(z) <= 3.0, fmt("|z| = %.2f", std::abs(z)));
  v.note(fmt("E ucv + R(f) %.6f, mise %.6f, se %.1e, z %.2f", est, exact, s.se, z));
  return v;
}

} // namespace

int
main(int argc, char** argv)
{
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
    { "density difficulty table (rho, rho1) for the 15 test densities", criterion1 },
    { "exact mise table for cases 1, 2, 6, 7, 12", criterion2 },
    { "home turf: argmin sigma/sqrt(2) and mise* = 1/(2 sqrt(pi) sigma n)", criterion3 },
    { "wide start reproduces the kernel estimator's mise", criterion4 },
    { "Monte Carlo mean ise matches exact mise (case 6, n=100, h=0.4)", criterion5 },
    { "pointwise bias and variance asymptotics (case 6, n=1e4, h=0.3)", criterion6 },
    { "closed forms agree with independent quadrature", criterion7 },
    { "invariance and equivariance properties", criterion8 },
    { "ucv is nearly unbiased for mise - R(f) (N(0,1), n=100, h=0.5)", criterion9 },
  };
  // optional arguments pick criteria by number
  std::vector<std::size_t> picked;
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << argv[a] << "\n";
      return 2;
    }
    picked.push_back(static_cast<std::size_t>(k - 1));
  }
  if (picked.empty()) {
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      picked.push_back(i);
    }
  }
  std::size_t failed = 0;
  for (std::size_t i : picked) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.expect(false, std::string("exception: ") + e.what());
    }
    const double t = elapsed(t0);
    failed += !v.pass();
    std::cout << (v.pass() ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first
              << " [" << fmt("%.2f s", t) << "]\n    " << v.summary() << std::endl;
  }
  std::cout << (picked.size() - failed) << "/" << picked.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
