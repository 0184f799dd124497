#ifndef QKD_MATH_HPP
#define QKD_MATH_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "qkd/errors.hpp"

namespace qkd {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;

// z_{1-eps}: upper quantile of the standard normal distribution,
// equal to sqrt(2) * erfinv(1 - 2 eps). Accurate to ~1e-15 down to
// eps ~ 1e-300 (rational approximation refined by one Halley step).
double normal_quantile(double eps);

// Shannon binary entropy, log base 2. h2(0) = h2(1) = 0.
double binary_entropy(double x);

// Numerically stable piecewise-linear interpolation through sorted (x, y)
// knots; clamps outside the knot range.
double lerp_table(const std::vector<std::pair<double, double>>& knots, double x,
                  bool* clamped = nullptr);

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-11;
    int max_depth = 48;
};

// Adaptive Simpson quadrature. Throws NumericalError when the recursion
// depth limit is reached before the tolerance is met.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opt = {});

// Same, but the interval is pre-split at the given interior seed points so
// narrow features are not skipped by the first coarse estimates.
double integrate_adaptive_seeded(const std::function<double(double)>& f, double a, double b,
                                 const std::vector<double>& seeds,
                                 const QuadratureOptions& opt = {});

// Kummer's confluent hypergeometric function 1F1(a; b; x) by forward series
// with term-ratio stopping at relative 1e-12. Throws NumericalError if the
// series needs more than max_terms terms or overflows; callers fall back to
// quadrature in that case.
double hyp1f1_series(double a, double b, double x, int max_terms = 10000);

// Bracketed bisection for a continuous function with f(lo) and f(hi) of
// opposite sign. Throws NumericalError when the bracket does not change sign.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_tol = 1e-10, int max_iter = 200);

} // namespace qkd

#endif // QKD_MATH_HPP
