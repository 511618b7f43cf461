#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace semistart {

struct MixtureComponent
{
  double weight = 1.0;
  double mean = 0.0;
  double sd = 1.0;
};

//! Finite normal mixture sum_i p_i phi_{sd_i}(x - mu_i).
//! Weights must be positive and sum to one within `weight_tol`.
class NormalMixture
{
public:
  explicit NormalMixture(std::vector<MixtureComponent> components,
                         double weight_tol = 1e-12);

  static NormalMixture standard_normal() { return NormalMixture({ { 1.0, 0.0, 1.0 } }); }

  const std::vector<MixtureComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

  double pdf(double x) const;

  //! The mixture of c * X + b.
  NormalMixture affine(double c, double b = 0.0) const;

private:
  std::vector<MixtureComponent> components_;
};

double
mixture_pdf(const NormalMixture& m, double x);

//! n i.i.d. draws; the component is picked by weight, then a Gaussian draw
//! is made. Identical (m, n, seed) give identical sequences.
std::vector<double>
mixture_sample(const NormalMixture& m, std::size_t n, std::uint64_t seed);

//! Mean and standard deviation of the mixture; the normal with these
//! parameters is the Kullback-Leibler best normal approximant.
struct MixtureMoments
{
  double mu0 = 0.0;
  double sd0 = 1.0;
};

MixtureMoments
mixture_moments(const NormalMixture& m);

//! Kernel-estimator bias factor f''(x) and semiparametric bias factor
//! f0(x) r''(x), with f0 the best normal approximant and r = f / f0.
struct BiasFactors
{
  double fpp = 0.0;
  double f0rpp = 0.0;
};

BiasFactors
bias_factors(const NormalMixture& m, double x);

struct RoughnessReport
{
  double r_trad = 0.0;  //!< int (f'')^2
  double r_new = 0.0;   //!< int (f0 r'')^2
  double rho_trad = 0.0;
  double rho_new = 0.0;
};

//! Closed-form roughness functionals of a normal mixture together with the
//! scale-free scores rho = sd(f) R^{1/5}.
RoughnessReport
roughness(const NormalMixture& m);

struct L1Report
{
  double iab_trad = 0.0;  //!< int |f''|
  double iab_new = 0.0;   //!< int |f0 r''|
  double half_norm = 0.0; //!< int f^{1/2}
  double rho1_trad = 0.0;
  double rho1_new = 0.0;
};

//! L1 bias measures by adaptive quadrature over mu0 +- 12 sd0, widened to
//! cover every component +- 20 sd_i.
L1Report
l1_measures(const NormalMixture& m);

//! Integral of f^2 in closed form.
double
mixture_r_f(const NormalMixture& m);

//! The fifteen Marron-Wand test densities, case 1..15.
NormalMixture
marron_wand(int case_id);

std::string
marron_wand_name(int case_id);

void
to_json(nlohmann::json& j, const NormalMixture& m);

//! Parses {"components":[{"p":..,"mu":..,"sd":..},...]}; weights must sum to
//! one within 1e-9.
NormalMixture
mixture_from_json(const nlohmann::json& j);

} // namespace semistart
