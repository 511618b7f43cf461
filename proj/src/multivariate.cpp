#include "semistart/multivariate.hpp"

#include "semistart/hermite.hpp"
#include "semistart/numerics.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace semistart {

double
mv_kernel_estimate(const Eigen::MatrixXd& data,
                   const Eigen::VectorXd& bandwidths,
                   const Eigen::VectorXd& x)
{
  const auto d = data.cols();
  if (bandwidths.size() != d || x.size() != d) {
    throw std::invalid_argument("dimension mismatch in product kernel estimate");
  }
  if (data.rows() == 0) {
    throw std::invalid_argument("estimate needs at least one observation");
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(bandwidths[k] > 0.0)) {
      throw DomainError("bandwidths must be positive");
    }
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      prod *= normal_pdf(data(i, k) - x[k], bandwidths[k]);
    }
    sum += prod;
  }
  return sum / static_cast<double>(data.rows());
}

Sphering
sphere(const Eigen::MatrixXd& data)
{
  const auto n = data.rows();
  const auto d = data.cols();
  if (d < 1 || n < d + 1) {
    throw std::invalid_argument("sphering needs n >= d + 1 observations");
  }
  Sphering s;
  s.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centred = data.rowwise() - s.mean.transpose();
  s.cov = centred.transpose() * centred / static_cast<double>(n);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.cov);
  const Eigen::VectorXd ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-10 * ev.maxCoeff())) {
    throw DomainError("covariance is rank deficient");
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  s.inv_root = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  s.root = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
  s.y = centred * s.inv_root;
  return s;
}

MvEstimate::MvEstimate(Eigen::MatrixXd data, double h, MvOptions options)
  : data_(std::move(data))
  , h_(h)
  , options_(options)
  , sph_(sphere(data_))
{
  if (!(h_ > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " + std::to_string(h_));
  }
  half_d2_data_.resize(data_.rows());
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    half_d2_data_[i] = half_d2(sph_.y.row(i).transpose());
  }
  const double d = static_cast<double>(data_.cols());
  log_norm_ = -0.5 * d * std::log(2.0 * kPi) - d * std::log(h_);
  if (options_.normalized) {
    log_norm_ -= 0.5 * std::log(sph_.cov.determinant());
  }
}

double
MvEstimate::half_d2(const Eigen::VectorXd& y) const
{
  double r2 = y.squaredNorm();
  if (options_.clip) {
    r2 = std::min(r2, *options_.clip * *options_.clip);
  }
  return 0.5 * r2;
}

double
MvEstimate::operator()(const Eigen::VectorXd& x) const
{
  if (x.size() != data_.cols()) {
    throw std::invalid_argument("query point has the wrong dimension");
  }
  // Sphered coordinates turn every quadratic form into a squared norm.
  const Eigen::VectorXd yx = sph_.inv_root * (x - sph_.mean);
  const double hx = half_d2(yx);
  const double inv_h2 = 1.0 / (h_ * h_);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    const double u2 = (sph_.y.row(i).transpose() - yx).squaredNorm() * inv_h2;
    sum += std::exp(log_norm_ - 0.5 * u2 - hx + half_d2_data_[i]);
  }
  return sum / static_cast<double>(data_.rows());
}

double
mv_estimate(const MvEstimate& e, const Eigen::VectorXd& x)
{
  return e(x);
}

namespace {

void
enumerate_indices(int d, int budget, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out)
{
  if (static_cast<int>(cur.size()) == d) {
    out.push_back(cur);
    return;
  }
  for (int j = 0; j <= budget; ++j) {
    cur.push_back(j);
    enumerate_indices(d, budget - j, cur, out);
    cur.pop_back();
  }
}

double
factorial(int k)
{
  double r = 1.0;
  for (int i = 2; i <= k; ++i) {
    r *= i;
  }
  return r;
}

} // namespace

MvBandwidth
mv_bandwidth(const Eigen::MatrixXd& data, int max_degree)
{
  if (max_degree < 0) {
    throw std::invalid_argument("max_degree must be nonnegative");
  }
  const auto sph = sphere(data);
  const auto n = data.rows();
  const int d = static_cast<int>(data.cols());
  const int top = max_degree + 2;

  // Per-point weights and He_k(sqrt(2) Y_ik) tables.
  std::vector<double> w(n);
  std::vector<std::vector<std::vector<double>>> herm(
    n, std::vector<std::vector<double>>(d, std::vector<double>(top + 1)));
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = std::exp(-0.5 * sph.y.row(i).squaredNorm());
    for (int k = 0; k < d; ++k) {
      for (int j = 0; j <= top; ++j) {
        herm[i][k][j] = hermite_poly(j, std::sqrt(2.0) * sph.y(i, k));
      }
    }
  }
  const double scale = std::pow(2.0, 0.5 * d) / static_cast<double>(n);
  std::map<std::vector<int>, double> cache;
  auto delta = [&](const std::vector<int>& m) {
    const auto it = cache.find(m);
    if (it != cache.end()) {
      return it->second;
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double prod = w[i];
      for (int k = 0; k < d; ++k) {
        prod *= herm[i][k][m[k]];
      }
      sum += prod;
    }
    return cache[m] = scale * sum;
  };

  std::vector<std::vector<int>> indices;
  std::vector<int> cur;
  enumerate_indices(d, max_degree, cur, indices);
  MvBandwidth out;
  for (const auto& j : indices) {
    double s = 0.0;
    double fact = 1.0;
    for (int k = 0; k < d; ++k) {
      auto m = j;
      m[k] += 2;
      s += delta(m);
      fact *= factorial(j[k]);
    }
    out.brace += s * s / fact;
  }
  const double nd = static_cast<double>(n);
  const double p = 1.0 / (d + 4.0);
  out.cap = 1.144 * std::pow(nd, -p);
  if (!(out.brace > 1e-12)) {
    out.h = out.cap;
    out.clamped = true;
    return out;
  }
  const double raw =
    std::pow(d / 4.0, p) * std::pow(out.brace, -p) * std::pow(nd, -p);
  out.clamped = raw > out.cap;
  out.h = std::min(raw, out.cap);
  return out;
}

} // namespace semistart
