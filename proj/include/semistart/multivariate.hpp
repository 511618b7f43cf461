#pragma once

#include <optional>

#include <Eigen/Dense>

namespace semistart {

//! Product gaussian kernel estimate (1/n) sum prod_k phi_{h_k}(X_ik - x_k);
//! data is n x d.
double
mv_kernel_estimate(const Eigen::MatrixXd& data,
                   const Eigen::VectorXd& bandwidths,
                   const Eigen::VectorXd& x);

struct Sphering
{
  Eigen::MatrixXd y;        //!< n x d sphered data
  Eigen::VectorXd mean;     //!< sample mean
  Eigen::MatrixXd cov;      //!< ML (n-denominator) covariance
  Eigen::MatrixXd inv_root; //!< symmetric cov^{-1/2}
  Eigen::MatrixXd root;     //!< symmetric cov^{1/2}
};

//! Y_i = cov^{-1/2} (X_i - mean) via a symmetric eigendecomposition.
//! Throws DomainError when the smallest eigenvalue is below 1e-10 of the
//! largest, and invalid_argument when n < d + 1.
Sphering
sphere(const Eigen::MatrixXd& data);

struct MvOptions
{
  //! Mahalanobis radius beyond which the start is held constant.
  std::optional<double> clip = 2.5;
  //! Include |cov|^{-1/2} in the kernel factor so the estimate integrates
  //! to about one. Off gives the display without the determinant.
  bool normalized = true;
};

//! Multinormal-start estimator
//!   f(x) = (1/n) sum K_i(x) exp{-D(x)^2 / 2} / exp{-D(X_i)^2 / 2},
//!   K_i(x) = exp{-(x - X_i)' S^{-1} (x - X_i) / (2 h^2)} / ((2 pi)^{d/2} h^d |S|^{1/2}),
//! with D the Mahalanobis distance to the sample mean under S.
class MvEstimate
{
public:
  MvEstimate(Eigen::MatrixXd data, double h, MvOptions options = {});

  double operator()(const Eigen::VectorXd& x) const;

  const Eigen::MatrixXd& data() const { return data_; }
  const Eigen::VectorXd& mean() const { return sph_.mean; }
  const Eigen::MatrixXd& cov() const { return sph_.cov; }
  double h() const { return h_; }

private:
  double half_d2(const Eigen::VectorXd& y) const;

  Eigen::MatrixXd data_;
  double h_;
  MvOptions options_;
  Sphering sph_;
  Eigen::VectorXd half_d2_data_;
  double log_norm_ = 0.0;
};

double
mv_estimate(const MvEstimate& e, const Eigen::VectorXd& x);

struct MvBandwidth
{
  double h = 0.0;
  double cap = 0.0;   //!< 1.144 n^{-1/(d+4)}
  double brace = 0.0;
  bool clamped = false;
};

//! Sphered-scale bandwidth from the robust multivariate Hermite coefficients
//!   d_m = 2^{d/2} (1/n) sum_i exp(-|Y_i|^2 / 2) prod_k He_{m_k}(sqrt(2) Y_ik),
//!   brace = sum_{|j| <= max_degree} (sum_k d_{j + 2 e_k})^2 / (j_1! ... j_d!),
//!   h = (d/4)^{1/(d+4)} brace^{-1/(d+4)} n^{-1/(d+4)}, capped.
MvBandwidth
mv_bandwidth(const Eigen::MatrixXd& data, int max_degree = 4);

} // namespace semistart
