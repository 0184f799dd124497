#include "qkd/math.hpp"

#include <algorithm>
#include <cmath>

namespace qkd {

namespace {

// Acklam's rational approximation to the inverse normal CDF.
double inv_norm_cdf_approx(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

struct SimpsonCtx {
    const std::function<double(double)>* f;
    double abs_tol;
    double rel_tol;
    int max_depth;
    double whole_scale; // |I| estimate for relative refinement
};

double simpson(double fa, double fm, double fb, double h6) {
    return h6 * (fa + 4.0 * fm + fb);
}

// len is carried down explicitly (halving is exact in floating point) so the
// parent's child estimates and the child's own whole estimate use identical
// weights; recomputing b - a at depth breaks down once the interval is a few
// ULPs wide.
double adapt(const SimpsonCtx& ctx, double a, double b, double len, double fa, double fm,
             double fb, double s_whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = (*ctx.f)(lm);
    const double frm = (*ctx.f)(rm);
    const double h12 = len / 12.0;
    const double s_left = simpson(fa, flm, fm, h12);
    const double s_right = simpson(fm, frm, fb, h12);
    const double s2 = s_left + s_right;
    const double err = s2 - s_whole;
    const double ulp_floor =
        8.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(a), std::abs(b), 1.0});
    if (std::abs(err) <= 15.0 * tol || len <= ulp_floor) {
        return s2 + err / 15.0;
    }
    if (depth >= ctx.max_depth) {
        throw NumericalError("adaptive quadrature failed to converge (depth limit)");
    }
    // Children keep the parent's tolerance; the factor-15 acceptance margin of
    // the Richardson estimate keeps the summed error near the requested one.
    const double half = 0.5 * len;
    return adapt(ctx, a, m, half, fa, flm, fm, s_left, tol, depth + 1) +
           adapt(ctx, m, b, half, fm, frm, fb, s_right, tol, depth + 1);
}

double integrate_segment(const SimpsonCtx& ctx, double a, double b) {
    const double m = 0.5 * (a + b);
    const double fa = (*ctx.f)(a);
    const double fm = (*ctx.f)(m);
    const double fb = (*ctx.f)(b);
    const double len = b - a;
    const double s = simpson(fa, fm, fb, len / 6.0);
    return adapt(ctx, a, b, len, fa, fm, fb, s, ctx.abs_tol, 0);
}

} // namespace

double normal_quantile(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw DomainError("normal_quantile: epsilon must be in (0, 1)");
    }
    double p = 1.0 - eps; // want Phi^{-1}(1 - eps)
    double x;
    if (eps < 1e-16) {
        // 1 - eps rounds to 1; work in the lower tail by symmetry.
        x = -inv_norm_cdf_approx(eps);
        // Halley refinement on the tail: Phi(-x) = eps
        for (int i = 0; i < 2; ++i) {
            double e = norm_cdf(-x) - eps;
            double u = e / norm_pdf(x);
            x += u / (1.0 - 0.5 * x * u); // note d/dx Phi(-x) = -pdf(x)
        }
        return x;
    }
    x = inv_norm_cdf_approx(p);
    for (int i = 0; i < 2; ++i) {
        double e = norm_cdf(x) - p;
        double u = e / norm_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) {
        throw DomainError("binary_entropy: argument outside [0, 1]");
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double lerp_table(const std::vector<std::pair<double, double>>& knots, double x,
                  bool* clamped) {
    if (knots.empty()) throw DomainError("lerp_table: empty table");
    if (clamped) *clamped = false;
    if (x <= knots.front().first) {
        if (clamped && x < knots.front().first) *clamped = true;
        return knots.front().second;
    }
    if (x >= knots.back().first) {
        if (clamped && x > knots.back().first) *clamped = true;
        return knots.back().second;
    }
    auto it = std::upper_bound(knots.begin(), knots.end(), x,
                               [](double v, const auto& k) { return v < k.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (x - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& opt) {
    return integrate_adaptive_seeded(f, a, b, {}, opt);
}

double integrate_adaptive_seeded(const std::function<double(double)>& f, double a, double b,
                                 const std::vector<double>& seeds,
                                 const QuadratureOptions& opt) {
    if (!(b > a)) return 0.0;
    std::vector<double> pts;
    pts.push_back(a);
    for (double s : seeds) {
        if (s > a && s < b) pts.push_back(s);
    }
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    SimpsonCtx ctx{&f, opt.abs_tol, opt.rel_tol, opt.max_depth, 0.0};

    // First pass at the absolute tolerance to learn the magnitude, second
    // pass with the relative tolerance anchored to it. The second pass only
    // matters when |I| << abs_tol, where the first pass is already cheap.
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        total += integrate_segment(ctx, pts[i], pts[i + 1]);
    }
    const double rel_floor = opt.rel_tol * std::abs(total);
    if (rel_floor > 0.0 && rel_floor < opt.abs_tol) {
        ctx.whole_scale = total;
        ctx.abs_tol = rel_floor;
        total = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            total += integrate_segment(ctx, pts[i], pts[i + 1]);
        }
    }
    return total;
}

double hyp1f1_series(double a, double b, double x, int max_terms) {
    if (b <= 0.0 && b == std::floor(b)) {
        throw DomainError("hyp1f1: b must not be a non-positive integer");
    }
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < max_terms; ++k) {
        term *= (a + k) / (b + k) * x / (k + 1);
        sum += term;
        if (!std::isfinite(sum)) {
            throw NumericalError("hyp1f1: series overflow");
        }
        if (std::abs(term) <= 1e-12 * std::abs(sum)) {
            return sum;
        }
    }
    throw NumericalError("hyp1f1: series did not converge within term limit");
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tol,
              int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw NumericalError("bisect: bracket does not change sign");
    }
    double a = lo, b = hi;
    for (int i = 0; i < max_iter; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0 || (b - a) * 0.5 < x_tol) return m;
        if ((fm > 0.0) == (flo > 0.0)) {
            a = m;
            flo = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

} // namespace qkd
