#pragma once

#include "semistart/hermite.hpp"
#include "semistart/kernels.hpp"
#include "semistart/starts.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace semistart {

enum class BandwidthMethod
{
  amise_oracle,
  rule_gamma,
  rule_delta,
  plugin,
  bcv,
  ucv
};

std::string_view
to_string(BandwidthMethod m);

BandwidthMethod
parse_bandwidth_method(std::string_view name);

//! A selected bandwidth with whatever the method produced along the way.
struct BandwidthChoice
{
  double h = 0.0;
  BandwidthMethod method = BandwidthMethod::rule_delta;
  double h_os = 0.0;
  bool clamped = false;          //!< raw value exceeded h_os or was degenerate
  bool fallback = false;         //!< plug-in fell back to rule_delta
  std::optional<double> roughness;          //!< estimated R_new
  std::optional<double> roughness_debiased; //!< plug-in only
  std::optional<double> h_raw;              //!< before clamping
  std::vector<double> grid;                 //!< bcv / ucv only
  std::vector<double> curve;
};

void
to_json(nlohmann::json& j, const BandwidthChoice& c);

struct AmiseOptimum
{
  double h = 0.0;
  double amise = 0.0;
};

//! h* = {R(K) / sigma_K^4}^{1/5} R^{-1/5} n^{-1/5} and the minimal amise
//! (5/4) {sigma_K R(K)}^{4/5} R^{1/5} n^{-4/5}.
//! Throws DomainError("degenerate roughness") when r_new <= 0.
AmiseOptimum
amise_h(const KernelSpec& kernel, double r_new, double n);

//! The amise expression (1/4) sigma_K^4 h^4 R + R(K) / (n h).
double
amise_value(const KernelSpec& kernel, double r_new, double n, double h);

//! Oversmoothing bound 3 {R(K) / (35 sigma_K^4)}^{1/5} sigma n^{-1/5}
//! (1.144 sigma n^{-1/5} for the gaussian kernel).
double
h_os(const KernelSpec& kernel, double sigma, double n);

//! ML standard deviation (n-denominator); throws on zero variance.
double
sample_sd(std::span<const double> data);

//! The Hermite plug-in formulas without clamping: amise_h with R_new from
//! roughness_from_coeffs. For the gaussian kernel these are
//!   classic (4/3)^{1/5} {brace}^{-1/5} sigma n^{-1/5}
//!   robust  (1/4)^{1/5} {d2^2 + d3^2 + d4^2/2 + d5^2/6}^{-1/5} sigma n^{-1/5}
double
hermite_rule_h(const KernelSpec& kernel, const HermiteCoeffs& c, double n);

//! Data-driven rules; the result is clamped to (0, h_os].
BandwidthChoice
rule_gamma(std::span<const double> data, const KernelSpec& kernel);

BandwidthChoice
rule_delta(std::span<const double> data, const KernelSpec& kernel);

struct PluginRoughness
{
  double raw = 0.0;       //!< int {f(x, theta) r_hat''(x)}^2 dx
  double debiased = 0.0;  //!< n/(n-1) {raw - R(K'')/(n h^5)}, floored at 0
  bool floored = false;
  bool closed_form = false;
};

//! Nonparametric roughness estimate for a smooth kernel. Normal (clipped or
//! not) and constant starts with the gaussian kernel are summed pairwise in
//! closed form, the clip regions handled by truncated normal moments. Other
//! combinations integrate (f r_hat'')^2 adaptively.
PluginRoughness
plugin_roughness(std::span<const double> data,
                 const FittedStart& start,
                 const KernelSpec& kernel,
                 double h_pilot);

//! Plug-in rule: pilot from rule_delta unless given, then `iterations`
//! rounds of h <- amise_h(debiased roughness at h). A nonpositive debiased
//! roughness falls back to rule_delta.
BandwidthChoice
plugin(std::span<const double> data,
       const FittedStart& start,
       const KernelSpec& kernel,
       int iterations = 1,
       std::optional<double> h_pilot = std::nullopt);

//! bcv(h) = (1/4) sigma_K^4 h^4 {R_hat(h) - R(K'')/(n h^5)} + R(K)/(n h).
double
bcv_value(std::span<const double> data,
          const FittedStart& start,
          const KernelSpec& kernel,
          double h);

BandwidthChoice
bcv(std::span<const double> data,
    const FittedStart& start,
    const KernelSpec& kernel,
    std::span<const double> h_grid);

struct UcvTerms
{
  double integral_sq = 0.0; //!< int f_hat_h^2
  double loo_mean = 0.0;    //!< (1/n) sum f_hat_{h,(i)}(X_i)
  double value() const { return integral_sq - 2.0 * loo_mean; }
};

//! ucv terms for each h in the grid. The leave-one-out estimate at X_i
//! refits the start without X_i (normal, lognormal and gamma fits are
//! downdated in O(1); mixture starts keep the full-data fit) and uses that
//! refit in numerator and denominator alike.
std::vector<UcvTerms>
ucv_terms(std::span<const double> data,
          const FittedStart& start,
          const KernelSpec& kernel,
          std::span<const double> h_grid);

BandwidthChoice
ucv(std::span<const double> data,
    const FittedStart& start,
    const KernelSpec& kernel,
    std::span<const double> h_grid);

//! Geometric grid of `count` bandwidths from 0.1 h_os to h_os.
std::vector<double>
default_h_grid(std::span<const double> data, const KernelSpec& kernel,
               int count = 60);

} // namespace semistart
