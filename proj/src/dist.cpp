#include "plrm/dist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace plrm {

namespace {

constexpr double sqrt2 = 1.4142135623730951;

// Acklam's rational approximation to the normal quantile (abs error ~1e-9
// before refinement).
double normal_quantile_initial(double p) {
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
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_pdf(double z) {
    return 0.3989422804014327 * std::exp(-0.5 * z * z);
}

// P(a, x) by power series, x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 1000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by Lentz continued fraction, x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    double z = normal_quantile_initial(p);
    // Halley refinement against the erfc-based CDF.
    for (int it = 0; it < 3; ++it) {
        const double e = normal_cdf(z) - p;
        const double u = e / normal_pdf(z);
        z -= u / (1.0 + 0.5 * z * u);
    }
    return z;
}

double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_p: need x >= 0, a > 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chisq_cdf(double x, int r) {
    if (r < 1) throw std::domain_error("chisq_cdf: need r >= 1");
    if (x < 0.0) throw std::domain_error("chisq_cdf: need x >= 0");
    return gamma_p(0.5 * r, 0.5 * x);
}

double chisq_quantile(double p, int r) {
    if (r < 1) throw std::domain_error("chisq_quantile: need r >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("chisq_quantile: p must lie in (0,1)");
    // Wilson-Hilferty start, then bracketed Newton on the CDF.
    const double z = normal_quantile(p);
    const double t = 1.0 - 2.0 / (9.0 * r) + z * std::sqrt(2.0 / (9.0 * r));
    double x = r * t * t * t;
    if (!(x > 0.0)) x = 0.5;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = chisq_cdf(x, r) - p;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        const double logpdf =
            (0.5 * r - 1.0) * std::log(x) - 0.5 * x - std::lgamma(0.5 * r) - 0.5 * r * std::log(2.0);
        const double pdf = std::exp(logpdf);
        double next = x - f / pdf;
        if (!(next > lo && (next < hi))) {
            next = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
        }
        if (std::fabs(next - x) < 1e-14 * (1.0 + x) && std::fabs(f) < 1e-11) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

double noncentral_chisq_cdf(double x, int r, double delta) {
    if (r < 1) throw std::domain_error("noncentral_chisq_cdf: need r >= 1");
    if (x < 0.0 || delta < 0.0)
        throw std::domain_error("noncentral_chisq_cdf: need x >= 0, delta >= 0");
    if (delta == 0.0) return chisq_cdf(x, r);
    if (x == 0.0) return 0.0;
    const double half = 0.5 * delta;
    double weight = std::exp(-half);  // Poisson(half) pmf at m = 0
    if (weight == 0.0)
        throw std::domain_error("noncentral_chisq_cdf: delta too large for the series");
    // F_m = ChiSqCDF(x; r + 2m); step down with
    // P(a+1, y) = P(a, y) - y^a e^{-y} / Gamma(a+1).
    const double y = 0.5 * x;
    double a = 0.5 * r;
    double f = gamma_p(a, y);
    double tail_step = std::exp(a * std::log(y) - y - std::lgamma(a + 1.0));
    double cum_weight = weight;
    double sum = weight * f;
    for (int m = 1; m < 100000; ++m) {
        f -= tail_step;
        if (f < 0.0) f = 0.0;
        a += 1.0;
        tail_step *= y / a;
        weight *= half / m;
        sum += weight * f;
        cum_weight += weight;
        if (1.0 - cum_weight < 1e-14 && m > half) break;
    }
    if (sum < 0.0) sum = 0.0;
    if (sum > 1.0) sum = 1.0;
    return sum;
}

}  // namespace plrm
