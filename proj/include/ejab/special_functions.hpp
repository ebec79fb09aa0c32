#pragma once
// Chi-squared distribution functions, incomplete gamma/beta and the
// quantile lower bound used in the consistency argument for eJAB.
//
// Everything here is a pure function of its arguments. Tail probabilities
// are carried in pairs (lower, upper) wherever a single double would round
// to 1 and lose the information needed to invert the CDF.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ejab {

class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Smallest upper-tail probability the quantile inverts without saturating.
inline constexpr double kMinTailProbability = 1e-300;

/// Both tails of a distribution function evaluated at one point.
/// `lower + upper == 1` up to rounding, but each tail is accurate on its own.
struct TailPair {
    double lower = 0.0;
    double upper = 1.0;
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = 1e-300;
inline constexpr int kMaxIter = 100000;

// Stirling series for ln Gamma, valid for a >= 10.
inline double stirling_log_gamma(double a) {
    const double inv = 1.0 / a;
    const double inv2 = inv * inv;
    // Bernoulli coefficients B_{2k} / (2k (2k-1)), k = 1..8
    const double series =
        inv * (1.0 / 12.0 +
               inv2 * (-1.0 / 360.0 +
                       inv2 * (1.0 / 1260.0 +
                               inv2 * (-1.0 / 1680.0 +
                                       inv2 * (1.0 / 1188.0 +
                                               inv2 * (-691.0 / 360360.0 +
                                                       inv2 * (1.0 / 156.0 + inv2 * (-3617.0 / 122400.0))))))));
    return (a - 0.5) * std::log(a) - a + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

// ln of x^a e^-x / Gamma(a)
double log_gamma_prefactor(double a, double x);

// Series for P(a, x); returns ln P. Accurate for x < a + 1.
inline double log_gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return log_gamma_prefactor(a, x) + std::log(sum);
}

// Modified Lentz continued fraction for Q(a, x); returns ln Q. Accurate for x >= a + 1.
inline double log_gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return log_gamma_prefactor(a, x) + std::log(h);
}

// Continued fraction for the incomplete beta function (Lentz).
inline double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return h;
}

inline void require_df(int q) {
    if (q < 1) throw DomainError("degrees of freedom must be >= 1, got " + std::to_string(q));
}

}  // namespace detail

/// ln Gamma(a) for a > 0.
inline double log_gamma(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("log_gamma requires a > 0");
    if (a >= 10.0) return detail::stirling_log_gamma(a);
    // Shift into the Stirling range: Gamma(a) = Gamma(a + k) / (a (a+1) ... (a+k-1)).
    double product = 1.0;
    double shifted = a;
    while (shifted < 10.0) {
        product *= shifted;
        shifted += 1.0;
    }
    return detail::stirling_log_gamma(shifted) - std::log(product);
}

inline double detail::log_gamma_prefactor(double a, double x) { return a * std::log(x) - x - log_gamma(a); }

/// Regularized incomplete gamma, both tails: lower = P(a, x), upper = Q(a, x).
inline TailPair regularized_gamma(double a, double x) {
    if (!(a > 0.0)) throw DomainError("regularized_gamma requires a > 0");
    if (x < 0.0 || std::isnan(x)) throw DomainError("regularized_gamma requires x >= 0");
    if (x == 0.0) return {0.0, 1.0};
    if (std::isinf(x)) return {1.0, 0.0};
    if (x < a + 1.0) {
        const double lower = std::exp(detail::log_gamma_p_series(a, x));
        return {lower, 1.0 - lower};
    }
    const double upper = std::exp(detail::log_gamma_q_fraction(a, x));
    return {1.0 - upper, upper};
}

/// Natural log of the smaller-tail-accurate pair; `upper_side` selects ln Q instead of ln P.
inline double log_regularized_gamma(double a, double x, bool upper_side) {
    if (x < a + 1.0) {
        const double log_p = detail::log_gamma_p_series(a, x);
        return upper_side ? std::log1p(-std::exp(log_p)) : log_p;
    }
    const double log_q = detail::log_gamma_q_fraction(a, x);
    return upper_side ? log_q : std::log1p(-std::exp(log_q));
}

/// Both tails of the chi-squared distribution with q degrees of freedom at x.
inline TailPair chi2_tails(double x, int q) {
    detail::require_df(q);
    if (x < 0.0 || std::isnan(x)) throw DomainError("chi2 argument must be >= 0");
    return regularized_gamma(0.5 * q, 0.5 * x);
}

inline double chi2_cdf(double x, int q) { return chi2_tails(x, q).lower; }

/// Upper tail 1 - F(x), accurate where the CDF rounds to 1.
inline double chi2_sf(double x, int q) { return chi2_tails(x, q).upper; }

inline double chi2_log_pdf(double x, int q) {
    const double a = 0.5 * q;
    return (a - 1.0) * std::log(x) - 0.5 * x - a * std::numbers::ln2 - log_gamma(a);
}

namespace detail {

// Solve for x with (upper_side ? Q : P)(x) = target, target in (0, 1).
// Geometric bracket growth followed by Newton on the log tail, falling back
// to bisection whenever a step leaves the bracket.
inline double chi2_invert(double target, int q, bool upper_side) {
    const double a = 0.5 * q;
    const double log_target = std::log(target);
    // g(x) = ln tail(x) - ln target; increasing in x for the lower tail.
    auto g = [&](double x) { return log_regularized_gamma(a, 0.5 * x, upper_side) - log_target; };
    auto passed = [&](double value) { return upper_side ? value <= 0.0 : value >= 0.0; };

    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(q));
    while (!passed(g(hi))) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw DomainError("chi2 quantile bracket overflow");
    }

    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 500; ++iter) {
        const double gx = g(x);
        if (gx == 0.0) return x;
        if (passed(gx)) {
            hi = x;
        } else {
            lo = x;
        }
        // d/dx ln P = pdf / P,  d/dx ln Q = -pdf / Q
        const double log_pdf = chi2_log_pdf(x, q);
        const double log_tail = gx + log_target;
        const double slope = (upper_side ? -1.0 : 1.0) * std::exp(log_pdf - log_tail);
        double next = x - gx / slope;
        if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
        const double step = std::fabs(next - x);
        x = next;
        if (step <= 1e-15 * x || hi - lo <= 1e-15 * hi) break;
    }
    return x;
}

}  // namespace detail

/// Quantile result for an upper-tail probability, with a flag when the
/// probability was below kMinTailProbability and the result was clamped.
struct QuantileResult {
    double value = 0.0;
    bool saturated = false;
};

/// x such that 1 - F(x) = p, i.e. Q_{chi2_q}(1 - p), evaluated without
/// forming 1 - p. Probabilities below kMinTailProbability saturate.
inline QuantileResult chi2_upper_quantile(double p, int q) {
    detail::require_df(q);
    if (!(p > 0.0) || p > 1.0) throw DomainError("upper-tail probability must lie in (0, 1]");
    if (p == 1.0) return {0.0, false};
    bool saturated = false;
    if (p < kMinTailProbability) {
        p = kMinTailProbability;
        saturated = true;
    }
    if (q == 2) return {-2.0 * std::log(p), saturated};
    const bool use_upper = p < 0.5;
    const double x = use_upper ? detail::chi2_invert(p, q, true) : detail::chi2_invert(1.0 - p, q, false);
    return {x, saturated};
}

/// Quantile from a tail pair; inverts whichever tail is smaller.
inline double chi2_quantile(TailPair u, int q) {
    detail::require_df(q);
    if (!(u.lower >= 0.0) || !(u.upper > 0.0)) throw DomainError("chi2 quantile requires 0 <= u < 1");
    if (u.lower == 0.0) return 0.0;
    if (u.upper < u.lower) return chi2_upper_quantile(u.upper, q).value;
    if (q == 2) return -2.0 * std::log1p(-u.lower);
    return detail::chi2_invert(u.lower, q, false);
}

/// Quantile function of chi-squared with q df, for 0 <= u < 1.
inline double chi2_quantile(double u, int q) {
    detail::require_df(q);
    if (!(u >= 0.0) || !(u < 1.0)) throw DomainError("chi2 quantile requires 0 <= u < 1");
    // 1 - u is exact for u >= 0.5 (Sterbenz).
    return chi2_quantile(TailPair{u, 1.0 - u}, q);
}

/// f(x) = -2 ln(1 - x) - 2 ln(-ln(1 - x)), a lower bound on chi-squared
/// quantiles as x -> 1. Defined and positive for x > 1 - e^-1.
inline double lemma_lower_bound(double x) {
    if (!(x < 1.0)) throw DomainError("lemma_lower_bound requires x < 1");
    const double neg_log_tail = -std::log1p(-x);
    if (!(neg_log_tail > 0.0)) throw DomainError("lemma_lower_bound requires -ln(1 - x) > 0");
    return 2.0 * neg_log_tail - 2.0 * std::log(neg_log_tail);
}

/// Regularized incomplete beta I_x(a, b), both tails.
inline TailPair regularized_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("regularized_beta requires a, b > 0");
    if (x < 0.0 || x > 1.0 || std::isnan(x)) throw DomainError("regularized_beta requires x in [0, 1]");
    if (x == 0.0) return {0.0, 1.0};
    if (x == 1.0) return {1.0, 0.0};
    const double log_front =
        log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double lower = std::exp(log_front) * detail::beta_fraction(a, b, x) / a;
        return {lower, 1.0 - lower};
    }
    const double upper = std::exp(log_front) * detail::beta_fraction(b, a, 1.0 - x) / b;
    return {1.0 - upper, upper};
}

/// Two-sided p-value of a Student t statistic.
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw DomainError("t test requires df > 0");
    if (std::isnan(t)) throw DomainError("t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    return regularized_beta(df / (df + t * t), 0.5 * df, 0.5).lower;
}

/// Upper-tail p-value of an F statistic.
inline double f_upper_p(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("F test requires positive df");
    if (!(f >= 0.0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    return regularized_beta(df2 / (df2 + df1 * f), 0.5 * df2, 0.5 * df1).lower;
}

}  // namespace ejab
