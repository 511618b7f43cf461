#pragma once

#include "semistart/densities.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace semistart {

struct GaussianFactor
{
  double sd = 1.0;
  double mu = 0.0;
};

//! int prod_j phi_{sd_j}(x - mu_j) dx through the product identity
//!   sqrt(2 pi) s [prod_j phi_{sd_j}(mu_j - a)] exp[(1/2) s^2 {sum_j (mu_j - a)/sd_j^2}^2],
//! 1/s^2 = sum_j 1/sd_j^2, for a free reference point a.
double
gaussian_product_integral(std::span<const GaussianFactor> factors, double a);

//! Same integral with a chosen at the weighted centre (no overflow).
double
gaussian_product_integral(std::span<const GaussianFactor> factors);

//! Exact mise of the gaussian-kernel estimator for a normal-mixture truth:
//!   (2 sqrt(pi) n h)^{-1} + (1 - 1/n) W(2h^2) - 2 W(h^2) + W(0),
//!   W(t) = sum_{i,j} p_i p_j phi_{(sd_i^2 + sd_j^2 + t)^{1/2}}(mu_j - mu_i).
double
mise_kernel(const NormalMixture& m, double h, double n);

//! Inputs of the exact mise of the normal-start estimator that uses fixed
//! start parameters (mu0, sd0).
struct NewMiseInputs
{
  NormalMixture mixture;
  double mu0 = 0.0;
  double sd0 = 1.0;
  double h = 1.0;
};

//! Inputs with (mu0, sd0) set to the mixture's own mean and sd.
NewMiseInputs
true_parameter_inputs(const NormalMixture& m, double h);

//! Throws DomainError naming the first nonpositive radicand
//! (b_i^2, c_ij^2, e_i^2, f_i^2 or k_ij^2).
void
validate(const NewMiseInputs& in);

struct NewMiseTerms
{
  double ea1 = 0.0;
  double ea2 = 0.0;
  double eb = 0.0;
  double r_f = 0.0;
};

NewMiseTerms
mise_new_terms(const NewMiseInputs& in);

//! mise(h) = (1 - 1/n) E A_1 + (1/n) E A_2 - 2 E B + R(f).
double
mise_new(const NewMiseInputs& in, double n);

//! Largest h below which every radicand of mise_new stays positive (capped
//! at h_max).
double
mise_new_domain_limit(const NormalMixture& m, double mu0, double sd0,
                      double h_max);

//! Exact ise of the unclipped normal-start gaussian-kernel estimator built
//! from `data` with start parameters (mu_hat, sd_hat).
double
ise_new(std::span<const double> data,
        double mu_hat,
        double sd_hat,
        double h,
        const NormalMixture& m);

//! Exact ise of the classic gaussian-kernel estimator.
double
ise_kernel(std::span<const double> data, double h, const NormalMixture& m);

struct OptimalH
{
  double h = 0.0;
  double value = 0.0;
  bool unimodal = true;
};

//! Minimizes a curve on [lo, hi]: a 64-point geometric scan checks for a
//! single local minimum; otherwise a 1024-point scan locates all of them.
//! Each candidate is refined by golden section; ties go to the smaller h.
OptimalH
optimal_h(const std::function<double(double)>& curve, double lo, double hi);

struct MiseReport
{
  int case_id = 0;
  int n = 0;
  double h_star_new = 0.0;
  double mise_star_new = 0.0;
  double h_star_trad = 0.0;
  double mise_star_trad = 0.0;
  double ratio = 0.0;
  bool new_at_domain_limit = false;
};

//! One report per (case, n), true mixture moments as start parameters.
//! Rows are computed in parallel (capped by SEMISTART_THREADS) and returned
//! in case-major order.
std::vector<MiseReport>
benchmark_table(std::span<const int> cases, std::span<const int> ns);

//! CSV with header case,n,h_new,mise_new,h_trad,mise_trad,ratio.
void
write_benchmark_csv(std::ostream& out,
                    std::span<const MiseReport> rows,
                    int precision = 6,
                    bool header = true);

//! Worker count: hardware concurrency capped by SEMISTART_THREADS.
unsigned
worker_count(std::size_t tasks);

} // namespace semistart
