#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

// Numerical kernels: Bessel-type series, sine integral, adaptive quadrature,
// Gauss-Hermite nodes, and monotone cubic interpolation. Everything here is
// deterministic, allocation-light, and independent of the physics layer.

namespace tltk::special {

// Coefficient of w^{-n} in exp(p w + q / w); equals q^n sum_a (pq)^a / (a!(a+n)!)
// for n >= 0, with c_{-n}(p, q) = c_n(q, p). Direct summation; accurate for
// moderate |pq| (the caller switches to Bessel branches for large |pq|).
double generating_coefficient(int n, double p, double q);

// ln( e^{-x} I_n(x) ) for x > 0, n >= 0: asymptotic series for the scaled
// I_0 plus a continued-fraction ladder for the ratios I_{v+1}/I_v (modified
// Lentz). Intended for x > 30 where exp overflow rules out direct I_n.
double log_ive(int n, double x);

// Integer-order Bessel functions J_n(x) and I_n(x) for x >= 0, any integer n.
double bessel_j(int n, double x);
double bessel_i(int n, double x);

// Sine integral Si(x) = int_0^x sin(t)/t dt. Maclaurin series for |x| <= 20,
// min-term-truncated asymptotic expansion beyond; odd in x.
double sine_integral(double x);

// Spherical Bessel j1(x) = sin(x)/x^2 - cos(x)/x with small-x series below 1e-3.
double spherical_j1(double x);

// f(x) = 1 - Si(x)/x with small-x series x^2/18 below 1e-3; f(0) = 0.
double one_minus_si_over_x(double x);

// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

// Gauss-Hermite nodes/weights for int e^{-t^2} g(t) dt ~ sum w_i g(t_i),
// computed by Golub-Welsch eigen-decomposition of the Jacobi matrix.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n);

// Monotone cubic (Fritsch-Carlson) interpolant on a strictly increasing grid.
// Evaluation clamps to the end values outside the grid.
class PchipInterpolant {
 public:
  PchipInterpolant() = default;
  PchipInterpolant(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
  double operator()(double xq) const;

 private:
  Eigen::VectorXd x_, y_, slope_;
};

}  // namespace tltk::special
