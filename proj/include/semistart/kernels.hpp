#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace semistart {

enum class KernelShape
{
  gaussian,
  epanechnikov,
  uniform
};

//! A symmetric probability kernel together with its moment constants.
//!
//! The compact kernels live on [-1/2, 1/2]; the Epanechnikov kernel is
//! K(z) = (3/2)(1 - 4z^2) there. Any rescaling K_c(z) = K(z/c)/c is
//! equivalent once the bandwidth is rescaled by c, so the choice of
//! support only fixes the units of h.
struct KernelSpec
{
  KernelShape shape = KernelShape::gaussian;
  double sigma2 = 1.0;             //!< int z^2 K(z) dz
  double roughness = 0.0;          //!< R(K) = int K(z)^2 dz
  std::optional<double> roughness_dd; //!< R(K'') = int K''(z)^2 dz, smooth kernels only

  //! Unscaled kernel K(z).
  double operator()(double z) const;

  //! Second derivative K''(z); only defined for the gaussian shape.
  double second_derivative(double z) const;

  //! Half-width of the support (infinity for the gaussian).
  double support_radius() const;

  bool is_smooth() const { return roughness_dd.has_value(); }
};

KernelSpec
kernel_props(KernelShape shape);

//! K_h(z) = K(z / h) / h. Throws DomainError for h <= 0.
double
eval_scaled(const KernelSpec& k, double h, double z);

std::string_view
to_string(KernelShape shape);

KernelShape
parse_kernel_shape(std::string_view name);

} // namespace semistart
