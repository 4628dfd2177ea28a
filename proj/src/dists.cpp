#include "gwp/dists.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwp {

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Wichura (1988), algorithm AS 241, PPND16 variant. Relative accuracy
// about 1e-16 away from the endpoints.
double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("norm_quantile: p must lie in (0,1)");

    const double q = p - 0.5;
    double r;

    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }

    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -x : x;
}

namespace {

// Continued fraction for inc_beta, modified Lentz method.
double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = std::numeric_limits<double>::epsilon();
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;

    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;

    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double inc_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0)
        throw std::invalid_argument("inc_beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_cdf(double x, double df) {
    if (!(df > 0.0))
        throw std::invalid_argument("t_cdf: df must be positive");
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    const double p = 0.5 * inc_beta(0.5 * df, 0.5, df / (df + x * x));
    return x > 0.0 ? 1.0 - p : p;
}

double t_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("t_quantile: p must lie in (0,1)");
    if (!(df > 0.0))
        throw std::invalid_argument("t_quantile: df must be positive");
    if (p == 0.5) return 0.0;

    // Bracket around the normal quantile, then bisect. t has heavier
    // tails than the normal, so widen until the bracket holds.
    const double z = norm_quantile(p);
    double lo, hi;
    if (p > 0.5) {
        lo = 0.0;
        hi = std::max(2.0 * z, 2.0);
        while (t_cdf(hi, df) < p) hi *= 2.0;
    } else {
        hi = 0.0;
        lo = std::min(2.0 * z, -2.0);
        while (t_cdf(lo, df) > p) lo *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (t_cdf(mid, df) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Genz (2004) algorithm for the bivariate normal upper-tail probability
// P(Z1 > h, Z2 > k); Gauss-Legendre quadrature of the Drezner-Wesolowsky
// integrand, with the |r| > 0.925 tail expansion.
double bvnu(double h, double k, double r) {
    static const double w6[3] = {0.1713244923791705, 0.3607615730481384,
                                 0.4679139345726904};
    static const double x6[3] = {0.9324695142031522, 0.6612093864662647,
                                 0.2386191860831970};
    static const double w12[6] = {0.04717533638651177, 0.1069393259953183,
                                  0.1600783285433464,  0.2031674267230659,
                                  0.2334925365383547,  0.2491470458134029};
    static const double x12[6] = {0.9815606342467191, 0.9041172563704750,
                                  0.7699026741943050, 0.5873179542866171,
                                  0.3678314989981802, 0.1252334085114692};
    static const double w20[10] = {
        0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
        0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
        0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
        0.1527533871307259};
    static const double x20[10] = {
        0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
        0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
        0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
        0.07652652113349733};

    const double twopi = 6.283185307179586476925286766559;
    const double* w;
    const double* x;
    int lg;
    if (std::fabs(r) < 0.3) {
        w = w6; x = x6; lg = 3;
    } else if (std::fabs(r) < 0.75) {
        w = w12; x = x12; lg = 6;
    } else {
        w = w20; x = x20; lg = 10;
    }

    double hk = h * k;
    double bvn = 0.0;

    if (std::fabs(r) < 0.925) {
        if (std::fabs(r) > 0.0) {
            const double hs = 0.5 * (h * h + k * k);
            const double asr = std::asin(r);
            for (int i = 0; i < lg; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    const double sn = std::sin(0.5 * asr * (is * x[i] + 1.0));
                    bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
                }
            }
            bvn = bvn * asr / (2.0 * twopi);
        }
        bvn += norm_cdf(-h) * norm_cdf(-k);
        return bvn;
    }

    // |r| >= 0.925
    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (std::fabs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        const double asq = -(bs / as + hk) / 2.0;
        if (asq > -100.0)
            bvn = a * std::exp(asq) *
                  (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
                   c * d * as * as / 5.0);
        if (-hk < 100.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-hk / 2.0) * std::sqrt(twopi) * norm_cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for (int i = 0; i < lg; ++i) {
            for (int is = -1; is <= 1; is += 2) {
                const double xs = a * (is * x[i] + 1.0);
                const double xsq = xs * xs;
                const double rs = std::sqrt(1.0 - xsq);
                const double asq2 = -(bs / xsq + hk) / 2.0;
                if (asq2 > -100.0) {
                    bvn += a * w[i] * std::exp(asq2) *
                           (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                            (1.0 + c * xsq * (1.0 + d * xsq)));
                }
            }
        }
        bvn = -bvn / twopi;
    }
    if (r > 0.0)
        return bvn + norm_cdf(-std::max(h, k));
    bvn = -bvn;
    if (k > h) bvn += norm_cdf(k) - norm_cdf(h);
    return bvn;
}

} // namespace

double bvn_cdf(double h, double k, double r) {
    if (!(std::fabs(r) <= 1.0))
        throw std::invalid_argument("bvn_cdf: |r| must be <= 1");
    if (std::isinf(h) || std::isinf(k)) {
        if (h == -std::numeric_limits<double>::infinity() ||
            k == -std::numeric_limits<double>::infinity())
            return 0.0;
        if (std::isinf(h) && std::isinf(k)) return 1.0;
        return std::isinf(h) ? norm_cdf(k) : norm_cdf(h);
    }
    if (r == 1.0) return norm_cdf(std::min(h, k));
    if (r == -1.0) return std::max(0.0, norm_cdf(h) + norm_cdf(k) - 1.0);
    return bvnu(-h, -k, r);
}

} // namespace gwp
