#pragma once
// eJAB: approximate objective Bayes factor from (p-value, sample size, test
// dimension), plus the classification predicates built on it.
//
//   eJAB01 = sqrt(n) * exp{ -1/2 * (n^{1/q} - 1) / n^{1/q} * Q_{chi2_q}(1 - p) }
//
// For a Wald p-value this equals the Savage-Dickey ratio under a normal
// prior centred at the MLE with covariance n^{1/q} J_n^{-1}. For other tests
// the same number is used as a heuristic; consistency still holds whenever
// the p-value is asymptotically uniform under H0 and -sqrt(n) p ln p -> 0
// under H1.

#include <cmath>
#include <string>
#include <string_view>

#include "ejab/special_functions.hpp"

namespace ejab {

struct EvidenceInput {
    double p = 1.0;
    double n = 1.0;  // effective sample size; integral in every supported test family
    int q = 1;
};

enum class Category {
    ExtremeForAlternative,
    VeryStrongForAlternative,
    StrongForAlternative,
    ModerateForAlternative,
    AnecdotalForAlternative,
    NoEvidence,
    AnecdotalForNull,
    ModerateForNull,
    StrongForNull,
    VeryStrongForNull,
    ExtremeForNull,
};

inline std::string_view to_string(Category c) {
    switch (c) {
        case Category::ExtremeForAlternative: return "extreme-for-alternative";
        case Category::VeryStrongForAlternative: return "very-strong-for-alternative";
        case Category::StrongForAlternative: return "strong-for-alternative";
        case Category::ModerateForAlternative: return "moderate-for-alternative";
        case Category::AnecdotalForAlternative: return "anecdotal-for-alternative";
        case Category::NoEvidence: return "no-evidence";
        case Category::AnecdotalForNull: return "anecdotal-for-null";
        case Category::ModerateForNull: return "moderate-for-null";
        case Category::StrongForNull: return "strong-for-null";
        case Category::VeryStrongForNull: return "very-strong-for-null";
        case Category::ExtremeForNull: return "extreme-for-null";
    }
    return "unknown";
}

/// Jeffreys-style bins on BF01: (1,3] anecdotal, (3,10] moderate,
/// (10,30] strong, (30,100] very strong, >100 extreme; mirrored on the
/// reciprocal for the alternative. Exactly 1 is no evidence.
inline Category categorize(double ejab01) {
    if (ejab01 == 1.0) return Category::NoEvidence;
    if (ejab01 > 1.0) {
        if (ejab01 <= 3.0) return Category::AnecdotalForNull;
        if (ejab01 <= 10.0) return Category::ModerateForNull;
        if (ejab01 <= 30.0) return Category::StrongForNull;
        if (ejab01 <= 100.0) return Category::VeryStrongForNull;
        return Category::ExtremeForNull;
    }
    const double ejab10 = 1.0 / ejab01;
    if (ejab10 <= 3.0) return Category::AnecdotalForAlternative;
    if (ejab10 <= 10.0) return Category::ModerateForAlternative;
    if (ejab10 <= 30.0) return Category::StrongForAlternative;
    if (ejab10 <= 100.0) return Category::VeryStrongForAlternative;
    return Category::ExtremeForAlternative;
}

struct EvidenceAssessment {
    double ejab01 = 1.0;
    double ejab10 = 1.0;
    double ln_ejab01 = 0.0;
    Category category = Category::NoEvidence;
    bool saturated = false;  // p was below kMinTailProbability and got clamped
    bool p_is_one = false;
};

inline void validate(const EvidenceInput& in) {
    if (!(in.p > 0.0) || in.p > 1.0) throw DomainError("p must lie in (0, 1]");
    if (!(in.n >= 1.0) || !std::isfinite(in.n)) throw DomainError("n must be >= 1");
    if (in.q < 1) throw DomainError("q must be >= 1");
}

namespace detail {

struct LogEjab {
    double value;
    bool saturated;
};

inline LogEjab log_ejab01(const EvidenceInput& in) {
    validate(in);
    if (in.n == 1.0) return {0.0, false};
    const auto wald = chi2_upper_quantile(in.p, in.q);
    // (n^{1/q} - 1) / n^{1/q} = 1 - n^{-1/q}, formed with expm1 to keep small-n accuracy
    const double shrink = -std::expm1(-std::log(in.n) / in.q);
    return {0.5 * std::log(in.n) - 0.5 * shrink * wald.value, wald.saturated};
}

}  // namespace detail

inline double ejab01(const EvidenceInput& in) { return std::exp(detail::log_ejab01(in).value); }

inline double ejab01(double p, double n, int q) { return ejab01(EvidenceInput{p, n, q}); }

inline EvidenceAssessment assess(const EvidenceInput& in) {
    const auto log_value = detail::log_ejab01(in);
    EvidenceAssessment out;
    out.ln_ejab01 = log_value.value;
    out.ejab01 = std::exp(log_value.value);
    out.ejab10 = 1.0 / out.ejab01;
    out.category = categorize(out.ejab01);
    out.saturated = log_value.saturated;
    out.p_is_one = in.p == 1.0;
    return out;
}

/// Candidate type I error at level alpha: p <= alpha and eJAB01 > 1.
inline bool is_candidate_t1e(double p, double ejab01_value, double alpha) {
    return p <= alpha && ejab01_value > 1.0;
}

inline constexpr double kJlpAlpha = 0.05;
inline constexpr double kJlpThreshold = 3.0;

/// Jeffreys-Lindley paradox: significant at .05 while eJAB01 > 3.
inline bool is_jlp(double p, double ejab01_value) { return p <= kJlpAlpha && ejab01_value > kJlpThreshold; }

/// D_n = -sqrt(n) p ln p, which must vanish in probability under H1.
inline double dn_statistic(double p, double n) {
    if (!(p > 0.0) || p > 1.0) throw DomainError("p must lie in (0, 1]");
    if (!(n >= 1.0)) throw DomainError("n must be >= 1");
    if (p == 1.0) return 0.0;
    return -std::sqrt(n) * p * std::log(p);
}

/// Range of |theta_hat - theta_0| for which a q = 1 Wald test at level alpha
/// rejects while eJAB01 still exceeds 1.
struct CandidateInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool valid = false;
    double alpha = 0.0;
    double n = 0.0;
    double fisher_info_1 = 1.0;
};

inline CandidateInterval candidate_interval(double n, double alpha, double fisher_info_1) {
    if (!(n >= 2.0)) throw DomainError("candidate_interval requires n >= 2");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw DomainError("candidate_interval requires 0 < alpha < 1");
    if (!(fisher_info_1 > 0.0)) throw DomainError("candidate_interval requires positive Fisher information");
    const double scale = 1.0 / std::sqrt(fisher_info_1);
    CandidateInterval out;
    out.alpha = alpha;
    out.n = n;
    out.fisher_info_1 = fisher_info_1;
    out.lo = std::sqrt(chi2_upper_quantile(alpha, 1).value / n) * scale;
    out.hi = std::sqrt(std::log(n) / (n - 1.0)) * scale;
    out.valid = alpha > chi2_sf(n * std::log(n) / (n - 1.0), 1);
    return out;
}

}  // namespace ejab
