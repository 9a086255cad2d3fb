#include "tltk/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tltk/constants.hpp"
#include "tltk/errors.hpp"

namespace tltk::special {

namespace {
constexpr double kPi = tltk::constants::pi;
}

double generating_coefficient(int n, double p, double q) {
  if (n < 0) {
    std::swap(p, q);
    n = -n;
  }
  const double t = p * q;
  double term = std::pow(q, n) / std::tgamma(static_cast<double>(n) + 1.0);
  double s = term;
  for (int a = 1; a < 400; ++a) {
    term *= t / (static_cast<double>(a) * (a + n));
    s += term;
    if (std::abs(term) <= 1e-18 * std::abs(s) + 1e-300) break;
  }
  return s;
}

double log_ive(int n, double x) {
  // Scaled I_0: e^{-x} I_0(x) ~ (2 pi x)^{-1/2} sum_k prod_j (2j-1)^2/(8xj),
  // truncated at the smallest term.
  double s = 1.0, term = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * x * k);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    s += term;
    if (std::abs(term) < 1e-18 * std::abs(s)) break;
  }
  double acc = -0.5 * std::log(2.0 * kPi * x) + std::log(s);
  // Ratio ladder r_v = I_{v+1}(x)/I_v(x) via the continued fraction
  // r_v = 1/(2(v+1)/x + 1/(2(v+2)/x + ...)) evaluated with modified Lentz.
  for (int v = 0; v < n; ++v) {
    const double tiny = 1e-300;
    double f = tiny, cc = f, dd = 0.0;
    for (int j = 1; j < 200; ++j) {
      const double b = 2.0 * (v + j) / x;
      dd = b + dd;
      if (dd == 0.0) dd = tiny;
      cc = b + 1.0 / cc;
      if (cc == 0.0) cc = tiny;
      dd = 1.0 / dd;
      const double delta = cc * dd;
      f *= delta;
      if (std::abs(delta - 1.0) < 1e-16) break;
    }
    acc += std::log(f);
  }
  return acc;
}

double bessel_j(int n, double x) {
  const int m = n < 0 ? -n : n;
  double sign = 1.0;
  if (n < 0 && (m & 1)) sign = -sign;
  if (x < 0.0) {
    x = -x;
    if (m & 1) sign = -sign;
  }
  return sign * std::cyl_bessel_j(static_cast<double>(m), x);
}

double bessel_i(int n, double x) {
  const int m = n < 0 ? -n : n;
  double sign = 1.0;
  if (x < 0.0) {
    x = -x;
    if (m & 1) sign = -sign;
  }
  return sign * std::cyl_bessel_i(static_cast<double>(m), x);
}

double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x == 0.0) return 0.0;
  if (x <= 20.0) {
    // Maclaurin: sum (-1)^k x^{2k+1} / ((2k+1)(2k+1)!)
    double term = x;  // k = 0
    double s = x;
    for (int k = 1; k < 60; ++k) {
      const double tk = 2.0 * k;
      term *= -x * x / (tk * (tk + 1.0));
      s += term / (tk + 1.0);
      if (std::abs(term) < 1e-18 * std::abs(s)) break;
    }
    return s;
  }
  // Asymptotic: Si = pi/2 - cos(x)/x P(x) - sin(x)/x^2 Q(x) with
  // P = sum (-1)^k (2k)!/x^{2k}, Q = sum (-1)^k (2k+1)!/x^{2k}, both
  // truncated at their smallest term.
  const double x2 = x * x;
  double p = 1.0, tp = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double next = tp * (2.0 * k - 1.0) * (2.0 * k) / x2;
    if (std::abs(next) >= std::abs(tp)) break;
    tp = next;
    p += (k & 1) ? -tp : tp;
  }
  double q = 1.0, tq = 1.0;
  for (int k = 1; k < 40; ++k) {
    const double next = tq * (2.0 * k) * (2.0 * k + 1.0) / x2;
    if (std::abs(next) >= std::abs(tq)) break;
    tq = next;
    q += (k & 1) ? -tq : tq;
  }
  return 0.5 * kPi - std::cos(x) / x * p - std::sin(x) / x2 * q;
}

double spherical_j1(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-3) return x / 3.0 - x * x * x / 30.0;
  return std::sin(x) / (x * x) - std::cos(x) / x;
}

double one_minus_si_over_x(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-3) return x * x / 18.0;
  return 1.0 - sine_integral(x) / x;
}

namespace {

double simpson_panel(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double fa, double b, double fb, double m, double fm,
                     double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_panel(a, fa, m, fm, flm);
  const double right = simpson_panel(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  // Stop on convergence, depth exhaustion, or panels too narrow for the
  // midpoints to remain distinct in double precision.
  if (!(std::abs(delta) > 15.0 * tol) || depth <= 0 || lm <= a || b <= rm) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson_panel(a, fa, b, fb, fm);
  return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 24);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n) {
  if (n < 1) throw ValidationError("gauss_hermite: need at least one node");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Eigen::VectorXd x = es.eigenvalues();
  Eigen::VectorXd w(n);
  const double sqrt_pi = std::sqrt(kPi);
  for (int k = 0; k < n; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    w(k) = sqrt_pi * v0 * v0;
  }
  return {std::move(x), std::move(w)};
}

PchipInterpolant::PchipInterpolant(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y)
    : x_(x), y_(y) {
  const Eigen::Index n = x.size();
  if (n < 2 || y.size() != n)
    throw ValidationError("PchipInterpolant: need matching grids, size >= 2");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(x(i) > x(i - 1)))
      throw ValidationError("PchipInterpolant: grid must strictly increase");
  Eigen::VectorXd h(n - 1), delta(n - 1);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    h(i) = x(i + 1) - x(i);
    delta(i) = (y(i + 1) - y(i)) / h(i);
  }
  slope_.resize(n);
  // Interior slopes: weighted harmonic mean where secants share a sign,
  // zero otherwise (Fritsch-Carlson monotone rule).
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    if (delta(i - 1) == 0.0 || delta(i) == 0.0 ||
        (delta(i - 1) > 0.0) != (delta(i) > 0.0)) {
      slope_(i) = 0.0;
    } else {
      const double w1 = 2.0 * h(i) + h(i - 1);
      const double w2 = h(i) + 2.0 * h(i - 1);
      slope_(i) = (w1 + w2) / (w1 / delta(i - 1) + w2 / delta(i));
    }
  }
  // One-sided three-point endpoint slopes, clipped for monotonicity.
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if ((m > 0.0) != (d0 > 0.0) || d0 == 0.0)
      m = 0.0;
    else if ((d0 > 0.0) != (d1 > 0.0) && std::abs(m) > 3.0 * std::abs(d0))
      m = 3.0 * d0;
    return m;
  };
  if (n == 2) {
    slope_(0) = slope_(1) = delta(0);
  } else {
    slope_(0) = endpoint(h(0), h(1), delta(0), delta(1));
    slope_(n - 1) = endpoint(h(n - 2), h(n - 3), delta(n - 2), delta(n - 3));
  }
}

double PchipInterpolant::operator()(double xq) const {
  const Eigen::Index n = x_.size();
  if (xq <= x_(0)) return y_(0);
  if (xq >= x_(n - 1)) return y_(n - 1);
  // Binary search for the containing interval.
  Eigen::Index lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (x_(mid) <= xq)
      lo = mid;
    else
      hi = mid;
  }
  const double h = x_(lo + 1) - x_(lo);
  const double t = (xq - x_(lo)) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_(lo) + h10 * h * slope_(lo) + h01 * y_(lo + 1) +
         h11 * h * slope_(lo + 1);
}

}  // namespace tltk::special
