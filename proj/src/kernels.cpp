#include "semistart/kernels.hpp"

#include "semistart/numerics.hpp"

#include <cmath>
#include <limits>

namespace semistart {

double
KernelSpec::operator()(double z) const
{
  switch (shape) {
    case KernelShape::gaussian:
      return std_normal_pdf(z);
    case KernelShape::epanechnikov:
      return std::abs(z) <= 0.5 ? 1.5 * (1.0 - 4.0 * z * z) : 0.0;
    case KernelShape::uniform:
      return std::abs(z) <= 0.5 ? 1.0 : 0.0;
  }
  return 0.0;
}

double
KernelSpec::second_derivative(double z) const
{
  if (shape != KernelShape::gaussian) {
    throw DomainError("K'' requires a smooth kernel; " +
                      std::string(to_string(shape)) +
                      " is not allowed in this operation");
  }
  return (z * z - 1.0) * std_normal_pdf(z);
}

double
KernelSpec::support_radius() const
{
  return shape == KernelShape::gaussian
           ? std::numeric_limits<double>::infinity()
           : 0.5;
}

KernelSpec
kernel_props(KernelShape shape)
{
  switch (shape) {
    case KernelShape::gaussian:
      return { shape, 1.0, 1.0 / (2.0 * kSqrtPi), 3.0 / (8.0 * kSqrtPi) };
    case KernelShape::epanechnikov:
      return { shape, 0.05, 1.2, std::nullopt };
    case KernelShape::uniform:
      return { shape, 1.0 / 12.0, 1.0, std::nullopt };
  }
  throw std::invalid_argument("unknown kernel shape");
}

double
eval_scaled(const KernelSpec& k, double h, double z)
{
  if (!(h > 0.0)) {
    throw DomainError("bandwidth must be positive, got h = " +
                      std::to_string(h));
  }
  return k(z / h) / h;
}

std::string_view
to_string(KernelShape shape)
{
  switch (shape) {
    case KernelShape::gaussian:
      return "gaussian";
    case KernelShape::epanechnikov:
      return "epanechnikov";
    case KernelShape::uniform:
      return "uniform";
  }
  return "unknown";
}

KernelShape
parse_kernel_shape(std::string_view name)
{
  if (name == "gaussian") {
    return KernelShape::gaussian;
  }
  if (name == "epanechnikov") {
    return KernelShape::epanechnikov;
  }
  if (name == "uniform") {
    return KernelShape::uniform;
  }
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

} // namespace semistart
