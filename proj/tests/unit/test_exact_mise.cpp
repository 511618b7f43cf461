#include "semistart/densities.hpp"
#include "semistart/exact_mise.hpp"
#include "semistart/numerics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace semistart;

namespace {

const double kRootPi = std::sqrt(std::numbers::pi);

double
normal_pdf(double x, double mu, double sd)
{
  return oracle::phi((x - mu) / sd) / sd;
}

// The unclipped normal-start estimator written out literally.
double
literal_new(const std::vector<double>& x, double mu, double sd, double h, double t)
{
  double s = 0.0;
  for (double xi : x) {
    s += normal_pdf(t, xi, h) / normal_pdf(xi, mu, sd);
  }
  return normal_pdf(t, mu, sd) * s / static_cast<double>(x.size());
}

double
literal_kernel(const std::vector<double>& x, double h, double t)
{
  double s = 0.0;
  for (double xi : x) {
    s += normal_pdf(t, xi, h);
  }
  return s / static_cast<double>(x.size());
}

} // namespace

TEST_CASE("gaussian product integral")
{
  const std::vector<GaussianFactor> one{ { 1.7, -0.4 } };
  CHECK(gaussian_product_integral(one, -0.4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gaussian_product_integral(one) == doctest::Approx(1.0).epsilon(1e-14));

  const std::vector<GaussianFactor> two{ { 1.0, 0.0 }, { 1.0, 0.0 } };
  CHECK(gaussian_product_integral(two) == doctest::Approx(1.0 / (2.0 * kRootPi)).epsilon(1e-14));
  CHECK(gaussian_product_integral(two) == doctest::Approx(0.2820948).epsilon(1e-7));

  const std::vector<GaussianFactor> three{ { 1.0, 0.0 }, { 1.0, 1.0 }, { 2.0, -1.0 } };
  const double q = oracle::quad(
    [](double x) { return normal_pdf(x, 0, 1) * normal_pdf(x, 1, 1) * normal_pdf(x, -1, 2); },
    -20.0, 20.0);
  CHECK(gaussian_product_integral(three) == doctest::Approx(q).epsilon(1e-10));

  // free reference point
  for (double a : { -3.0, 0.0, 0.7, 4.0 }) {
    CHECK(gaussian_product_integral(three, a) ==
          doctest::Approx(gaussian_product_integral(three)).epsilon(1e-10));
  }
  const std::vector<GaussianFactor> bad{ { 0.0, 0.0 } };
  CHECK_THROWS_AS(gaussian_product_integral(bad), DomainError);
}

TEST_CASE("exact mise of the kernel estimator")
{
  const auto n01 = NormalMixture::standard_normal();
  CHECK(mise_kernel(n01, 0.4455, 100) == doctest::Approx(0.0054).epsilon(0.00005 / 0.0054));
  const double limit = 1.0 / (2.0 * kRootPi * 100.0 * 1e-4);
  CHECK(mise_kernel(n01, 1e-4, 100) == doctest::Approx(limit).epsilon(1e-3));
  CHECK_THROWS_AS(mise_kernel(n01, 0.0, 100), DomainError);

  // exact ise against quadrature, then its Monte-Carlo mean against the formula
  const auto x = mixture_sample(marron_wand(6), 10, 5);
  const double q = oracle::trapezoid(
    [&](double t) {
      const double d = literal_kernel(x, 0.5, t) - marron_wand(6).pdf(t);
      return d * d;
    },
    -12.0, 12.0, 4000);
  CHECK(ise_kernel(x, 0.5, marron_wand(6)) == doctest::Approx(q).epsilon(1e-6));

  std::vector<double> ises;
  for (std::uint64_t rep = 0; rep < 2000; ++rep) {
    ises.push_back(ise_kernel(oracle::normal_draws(50, 0.0, 1.0, 1000 + rep), 0.5, n01));
  }
  const auto s = oracle::summarize(ises);
  CHECK(std::abs(s.mean - mise_kernel(n01, 0.5, 50)) < 3.0 * s.se);
}

TEST_CASE("exact mise of the normal-start estimator")
{
  const auto n01 = NormalMixture::standard_normal();
  const auto home = true_parameter_inputs(n01, 1.0 / std::numbers::sqrt2);
  CHECK(home.mu0 == doctest::Approx(0.0));
  CHECK(home.sd0 == doctest::Approx(1.0));
  CHECK(mise_new(home, 100) == doctest::Approx(1.0 / (2.0 * kRootPi * 100.0)).epsilon(1e-9));
  CHECK(mise_new(home, 100) == doctest::Approx(0.0028209).epsilon(1e-5));

  // R(f) term against quadrature on every case
  for (int c = 1; c <= 15; ++c) {
    const auto m = marron_wand(c);
    const auto mom = mixture_moments(m);
    const double h = 0.5 * mise_new_domain_limit(m, mom.mu0, mom.sd0, 0.3);
    const auto t = mise_new_terms(true_parameter_inputs(m, h));
    const double q = oracle::quad_pieces([&](double x) { return m.pdf(x) * m.pdf(x); },
                                         -8.0, 8.0, 60);
    CHECK(t.r_f == doctest::Approx(q).epsilon(1e-10));
  }

  // a nearly flat start gives back the classic estimator on every case
  for (int c = 1; c <= 15; ++c) {
    const auto m = marron_wand(c);
    const auto mom = mixture_moments(m);
    for (double h : { 0.2, 0.5, 1.0 }) {
      const double nw = mise_new(NewMiseInputs{ m, mom.mu0, 1e4 * mom.sd0, h }, 100);
      CHECK(std::abs(nw - mise_kernel(m, h, 100)) < 1e-6);
    }
  }

  // domain check names the radicand
  const NewMiseInputs bad{ n01, 0.0, 0.5, 2.0 };
  CHECK_THROWS_AS(validate(bad), DomainError);
  try {
    mise_new(bad, 100);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("mise formula domain violated") != std::string::npos);
  }
  const double lim = mise_new_domain_limit(n01, 0.0, 0.5, 3.0);
  CHECK(lim < 3.0);
  CHECK_NOTHROW(validate(NewMiseInputs{ n01, 0.0, 0.5, 0.99 * lim }));
  CHECK_THROWS_AS(validate(NewMiseInputs{ n01, 0.0, 0.5, 1.01 * lim }), DomainError);
  CHECK(mise_new_domain_limit(n01, 0.0, 1e4, 3.0) == 3.0);
}

TEST_CASE("exact ise of the normal-start estimator")
{
  const auto m = marron_wand(6);
  const auto x = mixture_sample(m, 10, 11);
  for (double h : { 0.3, 0.8 }) {
    const double q = oracle::trapezoid(
      [&](double t) {
        const double d = literal_new(x, 0.4, 1.3, h, t) - m.pdf(t);
        return d * d;
      },
      -12.0, 12.0, 4000);
    CHECK(ise_new(x, 0.4, 1.3, h, m) == doctest::Approx(q).epsilon(1e-6));
  }
  const std::vector<double> one{ 0.5 };
  CHECK(ise_new(one, 0.5, 2.0, 0.4, NormalMixture({ { 1.0, 0.5, 2.0 } })) > 0.0);
  CHECK_THROWS_AS(ise_new(x, 0.0, 1.0, 0.0, m), DomainError);

  // Monte-Carlo mean of the true-parameter ise reproduces the formula
  const auto mom = mixture_moments(m);
  std::vector<double> ises;
  for (std::uint64_t rep = 0; rep < 2000; ++rep) {
    ises.push_back(ise_new(mixture_sample(m, 100, 5000 + rep), mom.mu0, mom.sd0, 0.4, m));
  }
  const auto s = oracle::summarize(ises);
  const double exact = mise_new(NewMiseInputs{ m, mom.mu0, mom.sd0, 0.4 }, 100);
  CHECK(std::abs(s.mean - exact) < 3.0 * s.se);
}

TEST_CASE("optimal bandwidth search")
{
  const auto quad = optimal_h([](double h) { return (h - 2.0) * (h - 2.0) + 1.0; }, 0.1, 5.0);
  CHECK(quad.h == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(quad.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(quad.unimodal);

  const auto n01 = NormalMixture::standard_normal();
  // the formula is finite only for h below sd0 here
  CHECK(mise_new_domain_limit(n01, 0.0, 1.0, 3.0) == doctest::Approx(1.0).epsilon(1e-9));
  const auto hn = optimal_h(
    [&](double h) { return mise_new(true_parameter_inputs(n01, h), 100); }, 0.01,
    1.0 - 1e-9);
  CHECK(std::abs(hn.h - 0.7071) < 0.0005);
  const auto hk = optimal_h([&](double h) { return mise_kernel(n01, h, 1000); }, 0.01, 3.0);
  CHECK(std::abs(hk.h - 0.2723) < 0.0005);
  CHECK(std::abs(hk.value - 0.0010) < 0.00005);

  // two minima: the lower one wins, ties go to the smaller h
  const auto two = optimal_h(
    [](double h) { return std::min((h - 1.0) * (h - 1.0), (h - 3.0) * (h - 3.0) + 0.1); },
    0.1, 5.0);
  CHECK_FALSE(two.unimodal);
  CHECK(two.h == doctest::Approx(1.0).epsilon(1e-5));
  const auto tie = optimal_h(
    [](double h) { return std::min((h - 1.0) * (h - 1.0), (h - 3.0) * (h - 3.0)); }, 0.1, 5.0);
  CHECK(tie.h == doctest::Approx(1.0).epsilon(1e-5));

  CHECK_THROWS_AS(optimal_h([](double h) { return h; }, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_h([](double h) { return h; }, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("normal truth is the home turf for every n")
{
  for (double sd : { 1.0, 2.5 }) {
    const NormalMixture m({ { 1.0, 0.0, sd } });
    for (int n : { 25, 100, 1000 }) {
      const double hi = mise_new_domain_limit(m, 0.0, sd, 3.0 * sd) * (1.0 - 1e-9);
      const auto o = optimal_h(
        [&](double h) { return mise_new(true_parameter_inputs(m, h), n); }, 0.01 * sd, hi);
      CHECK(std::abs(o.h - sd / std::numbers::sqrt2) < 1e-4);
      CHECK(o.value == doctest::Approx(1.0 / (2.0 * kRootPi * sd * n)).epsilon(1e-9));
    }
  }
}

TEST_CASE("benchmark table")
{
  const std::vector<int> cases{ 1, 2, 7 };
  const std::vector<int> ns{ 25, 100, 1000 };
  const auto rows = benchmark_table(cases, ns);
  REQUIRE(rows.size() == 9);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].case_id == cases[i / 3]);
    CHECK(rows[i].n == ns[i % 3]);
    CHECK(rows[i].mise_star_new > 0.0);
    CHECK(rows[i].mise_star_trad > 0.0);
    CHECK(rows[i].ratio == doctest::Approx(rows[i].mise_star_new / rows[i].mise_star_trad).epsilon(1e-12));
  }
  const auto& r1 = rows[0];
  CHECK(std::abs(r1.h_star_new - 0.7071) < 0.001);
  CHECK(std::abs(r1.mise_star_new - 0.0113) < 0.0002);
  CHECK(std::abs(r1.h_star_trad - 0.6094) < 0.001);
  CHECK(std::abs(r1.mise_star_trad - 0.0137) < 0.0002);
  CHECK(std::abs(r1.ratio - 0.8217) < 0.005);
  CHECK(std::abs(rows[7].ratio - 0.9768) < 0.005);
  CHECK(std::abs(rows[5].ratio - 0.7396) < 0.005);

  std::ostringstream out;
  write_benchmark_csv(out, rows);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "case,n,h_new,mise_new,h_trad,mise_trad,ratio");
  int count = 0;
  while (std::getline(in, line)) {
    ++count;
    std::istringstream fields(line);
    std::string f;
    while (std::getline(fields, f, ',')) {
      CHECK(std::isfinite(std::stod(f)));
    }
  }
  CHECK(count == 9);

  std::ostringstream bare;
  write_benchmark_csv(bare, rows, 6, false);
  CHECK(bare.str().rfind("1,25,", 0) == 0);

  CHECK_THROWS(benchmark_table(std::vector<int>{ 16 }, ns));
  CHECK(worker_count(1) == 1);
  CHECK(worker_count(100) >= 1);
}
