#pragma once

#include "semistart/densities.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace semistart {

enum class StartFamily
{
  constant,
  normal,
  lognormal,
  gamma,
  normal_mixture
};

inline constexpr double kDefaultClip = 2.5;

//! A parametric start f(x, theta_hat).
//!
//! Parameters by family:
//!   normal          mu, sd
//!   lognormal       mu, sd of log X
//!   gamma           shape (alpha), rate (beta)
//!   normal_mixture  mixture
//!
//! `clip` is a threshold in standard units. The normal start is held at its
//! value at mu +- clip * sd outside that band. Lognormal and gamma starts are
//! held at their values at the Phi(-clip) and Phi(clip) quantiles outside
//! those quantiles. Mixture starts use the normal rule around the mixture's
//! overall mean and sd. No clip means the raw family density.
struct FittedStart
{
  StartFamily family = StartFamily::constant;
  double mu = 0.0;
  double sd = 1.0;
  double shape = 1.0;
  double rate = 1.0;
  std::optional<NormalMixture> mixture;
  std::optional<double> clip = kDefaultClip;
};

FittedStart
constant_start();

FittedStart
normal_start(double mu, double sd, std::optional<double> clip = kDefaultClip);

FittedStart
lognormal_start(double mu, double sd, std::optional<double> clip = kDefaultClip);

FittedStart
gamma_start(double shape, double rate, std::optional<double> clip = kDefaultClip);

FittedStart
mixture_start(NormalMixture m, std::optional<double> clip = kDefaultClip);

//! Fits the family to data. Normal and lognormal use the mean and the ML
//! (n-denominator) variance, gamma uses moment estimates alpha = m^2 / v,
//! beta = m / v. normal_mixture runs em_fit_mixture with k = 2, seed 0.
FittedStart
fit_start(StartFamily family,
          std::span<const double> data,
          std::optional<double> clip = kDefaultClip);

struct EmFit
{
  FittedStart start;
  std::vector<double> loglik; //!< total log-likelihood after each iteration
  int iterations = 0;
  int restarts = 0;
};

//! EM for a k-component normal mixture with k-means++ seeding, at most 200
//! iterations, stopping once the mean log-likelihood gains less than 1e-8.
//! A component whose sd collapses below 1e-6 of the sample sd triggers a
//! reseed; after 5 restarts a DomainError is thrown.
EmFit
em_fit_mixture_trace(std::span<const double> data, int k, std::uint64_t seed);

FittedStart
em_fit_mixture(std::span<const double> data, int k, std::uint64_t seed);

//! f(x, theta_hat), clipped when s.clip is set.
double
eval_start(const FittedStart& s, double x);

//! Unclipped family density.
double
eval_start_raw(const FittedStart& s, double x);

//! Gradient of log f(x, theta) in the family's parameters:
//!   normal, lognormal  (d/dmu, d/dsd)
//!   gamma              (d/dshape, d/drate)
//!   normal_mixture     (d/dp_1..p_k, d/dmu_1..mu_k, d/dsd_1..sd_k), with the
//!                      weights treated as free coordinates
std::vector<double>
score(const FittedStart& s, double x);

std::string_view
to_string(StartFamily family);

StartFamily
parse_start_family(std::string_view name);

void
to_json(nlohmann::json& j, const FittedStart& s);

FittedStart
start_from_json(const nlohmann::json& j);

} // namespace semistart
