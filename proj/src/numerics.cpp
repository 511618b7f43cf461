#include "semistart/numerics.hpp"

#include <algorithm>
#include <array>
#include <queue>

namespace semistart {

namespace {

// Kronrod 15-point abscissae (nonnegative half) and weights, with the
// embedded 7-point Gauss weights.
constexpr std::array<double, 8> kXgk = {
  0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
  0.207784955007898467600689403773245, 0.000000000000000000000000000000000
};
constexpr std::array<double, 8> kWgk = {
  0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
  0.204432940075298892414161999234649, 0.209482141084727828012999174891714
};
constexpr std::array<double, 4> kWg = {
  0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
  0.381830050505118944950369775488975, 0.417959183673469387755102040816327
};

struct Segment
{
  double a;
  double b;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment
gk15(const std::function<double(double)>& f, double a, double b)
{
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) {
      gauss += kWg[j / 2] * sum;
    }
  }
  return { a, b, kronrod * half, std::abs((kronrod - gauss) * half) };
}

} // namespace

QuadratureResult
integrate(const std::function<double(double)>& f,
          double a,
          double b,
          const QuadratureOptions& opts)
{
  if (!(b > a)) {
    if (a == b) {
      return {};
    }
    auto r = integrate(f, b, a, opts);
    r.value = -r.value;
    return r;
  }

  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  heap.push(first);
  double total = first.value;
  double error = first.error;
  int intervals = 1;
  if (!std::isfinite(total) || !std::isfinite(error)) {
    throw QuadratureError("integrand is not finite on [" + std::to_string(a) +
                          ", " + std::to_string(b) + "]");
  }

  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (intervals >= opts.max_intervals) {
      throw QuadratureError("adaptive quadrature did not converge on [" +
                            std::to_string(a) + ", " + std::to_string(b) +
                            "], error estimate " + std::to_string(error));
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gk15(f, worst.a, mid);
    const Segment right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
    if (!std::isfinite(total) || !std::isfinite(error)) {
      throw QuadratureError("integrand is not finite on [" + std::to_string(a) +
                            ", " + std::to_string(b) + "]");
    }
  }

  // Re-sum to shed accumulated rounding from the running updates.
  double value = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return { value, err, intervals };
}

QuadratureResult
integrate_pieces(const std::function<double(double)>& f,
                 const std::vector<double>& breaks,
                 const QuadratureOptions& opts)
{
  if (breaks.size() < 2) {
    throw std::invalid_argument("integrate_pieces: need at least two breaks");
  }
  QuadratureResult total;
  const double pieces = static_cast<double>(breaks.size() - 1);
  QuadratureOptions piece_opts = opts;
  piece_opts.abs_tol = opts.abs_tol / pieces;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const auto r = integrate(f, breaks[k], breaks[k + 1], piece_opts);
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
  }
  return total;
}

std::vector<double>
sign_changes(const std::function<double(double)>& f,
             double a,
             double b,
             int scan_points)
{
  std::vector<double> roots;
  const double step = (b - a) / (scan_points - 1);
  double x_prev = a;
  double f_prev = f(a);
  for (int k = 1; k < scan_points; ++k) {
    const double x = (k == scan_points - 1) ? b : a + k * step;
    const double fx = f(x);
    if ((f_prev < 0.0 && fx > 0.0) || (f_prev > 0.0 && fx < 0.0)) {
      double lo = x_prev;
      double hi = x;
      double f_lo = f_prev;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo));
           ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (f_lo < 0.0)) {
          lo = mid;
          f_lo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    if (fx != 0.0) {
      x_prev = x;
      f_prev = fx;
    }
  }
  return roots;
}

QuadratureResult
integrate_abs(const std::function<double(double)>& f,
              double a,
              double b,
              const QuadratureOptions& opts,
              int scan_points)
{
  std::vector<double> breaks{ a };
  for (double r : sign_changes(f, a, b, scan_points)) {
    if (r > breaks.back() && r < b) {
      breaks.push_back(r);
    }
  }
  breaks.push_back(b);
  return integrate_pieces([&f](double x) { return std::abs(f(x)); }, breaks,
                          opts);
}

Minimum
golden_section(const std::function<double(double)>& f,
               double lo,
               double hi,
               double tol)
{
  if (!(hi > lo)) {
    throw std::invalid_argument("golden_section: invalid bracket");
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    // ties move toward the smaller abscissa
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  const double x = 0.5 * (lo + hi);
  const double fx = f(x);
  if (f1 < fx && f1 <= f2) {
    return { x1, f1 };
  }
  if (f2 < fx) {
    return { x2, f2 };
  }
  return { x, fx };
}

double
log_gaussian_product(std::span<const double> sds, std::span<const double> mus)
{
  if (sds.size() != mus.size() || sds.empty()) {
    throw std::invalid_argument("gaussian product needs matching nonempty factors");
  }
  double prec = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < sds.size(); ++j) {
    if (!(sds[j] > 0.0)) {
      throw DomainError("gaussian product needs positive sds");
    }
    prec += 1.0 / (sds[j] * sds[j]);
    weighted += mus[j] / (sds[j] * sds[j]);
  }
  const double var = 1.0 / prec;
  const double centre = weighted * var;
  double out = 0.5 * std::log(2.0 * kPi * var);
  for (std::size_t j = 0; j < sds.size(); ++j) {
    out += log_normal_pdf(mus[j] - centre, sds[j]);
  }
  return out;
}

} // namespace semistart
