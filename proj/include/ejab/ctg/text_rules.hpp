#pragma once
// Free-text clean-up for registry analyses: reported p-values, statistical
// method labels and one-sided flags. All matching is case-insensitive
// ECMAScript regex; rules are applied in order and the first match wins.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace ejab::ctg {

enum class Method {
    OneSampleT,
    TwoSampleT,
    ConditionalLogistic,
    Logistic,
    Cox,
    Logrank,
    MannWhitney,
    WilcoxonSignedRank,
    KruskalWallis,
    ChiSquared,
    RepeatedMeasures,
    LinearRegression,
    Anova,
};

inline constexpr std::string_view to_label(Method m) {
    switch (m) {
        case Method::OneSampleT: return "1-ttest";
        case Method::TwoSampleT: return "2-ttest";
        case Method::ConditionalLogistic: return "clogit";
        case Method::Logistic: return "glm";
        case Method::Cox: return "cox";
        case Method::Logrank: return "logrank";
        case Method::MannWhitney: return "Utest";
        case Method::WilcoxonSignedRank: return "wilcox";
        case Method::KruskalWallis: return "Htest";
        case Method::ChiSquared: return "chisq";
        case Method::RepeatedMeasures: return "rANOVA";
        case Method::LinearRegression: return "lm";
        case Method::Anova: return "ANOVA";
    }
    return "";
}

inline constexpr Method kAllMethods[] = {
    Method::OneSampleT,  Method::TwoSampleT,         Method::ConditionalLogistic, Method::Logistic,
    Method::Cox,         Method::Logrank,            Method::MannWhitney,         Method::WilcoxonSignedRank,
    Method::KruskalWallis, Method::ChiSquared,       Method::RepeatedMeasures,    Method::LinearRegression,
    Method::Anova,
};

inline std::optional<Method> method_from_label(std::string_view label) {
    for (Method m : kAllMethods) {
        if (to_label(m) == label) return m;
    }
    return std::nullopt;
}

struct StandardizedP {
    double p = 0.0;
    bool has_less_than = false;
};

namespace detail {

inline std::regex icase(const char* pattern) {
    return std::regex(pattern, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
}

inline bool detect(const std::string& text, const std::regex& re) { return std::regex_search(text, re); }

struct MethodPatterns {
    std::regex t_test = icase(R"(\bt[- ]?test)");
    std::regex one_sample = icase(R"(one[- ]?sample)");
    std::regex paired = icase("paired");
    std::regex logistic = icase("logistic");
    std::regex regression = icase("regression");
    std::regex conditional = icase("conditional");
    std::regex cox = icase("cox");
    std::regex cox_exclusions = icase("wilcoxon|mantel|signed|rank");
    std::regex logrank = icase(R"(log ?rank|mantel[- ]?cox)");
    std::regex wilcoxon_or_signed = icase("wilcoxon|signed");
    std::regex mann_whitney = icase(R"(mann[- ]?whitney)");
    std::regex wilcoxon = icase("wilcoxon");
    std::regex rank = icase("rank");
    std::regex signed_ = icase("signed");
    std::regex kruskal = icase("kruskal|wallis");
    std::regex chi_square = icase("chi[- ]?square|\xCF\x87" "2|chi2|chisq");
    std::regex repeated = icase(R"(repeated[- ]?measures?)");
    std::regex linear = icase("linear");
    std::regex anova = icase("anova|analysis of variance");
    std::regex one_sided = icase("one-sided|1-sided");
    std::regex numeric = std::regex(R"([0-9]*\.?[0-9]+)", std::regex::ECMAScript | std::regex::optimize);
};

inline const MethodPatterns& patterns() {
    static const MethodPatterns instance;
    return instance;
}

}  // namespace detail

/// Reported p-value text to a probability in (0, 1); nullopt means drop.
inline std::optional<StandardizedP> standardize_p(const std::string& raw) {
    StandardizedP out;
    out.has_less_than = raw.find('<') != std::string::npos;
    std::smatch match;
    if (!std::regex_search(raw, match, detail::patterns().numeric)) return std::nullopt;
    const std::string token = match.str();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) return std::nullopt;
    if (!(value > 0.0 && value < 1.0)) return std::nullopt;
    out.p = value;
    return out;
}

/// Free-text method to a canonical family; nullopt when no rule matches.
inline std::optional<Method> harmonize_method(const std::string& raw) {
    const auto& re = detail::patterns();
    using detail::detect;
    const bool t_test = detect(raw, re.t_test);
    if (t_test && detect(raw, re.one_sample)) return Method::OneSampleT;
    if (t_test && detect(raw, re.paired)) return Method::OneSampleT;
    if (t_test) return Method::TwoSampleT;

    const bool logistic_regression = detect(raw, re.logistic) && detect(raw, re.regression);
    if (logistic_regression && detect(raw, re.conditional)) return Method::ConditionalLogistic;
    if (logistic_regression) return Method::Logistic;

    if (detect(raw, re.cox) && !detect(raw, re.cox_exclusions)) return Method::Cox;
    if (detect(raw, re.logrank) && !detect(raw, re.wilcoxon_or_signed)) return Method::Logrank;

    const bool wilcoxon = detect(raw, re.wilcoxon);
    const bool rank = detect(raw, re.rank);
    const bool signed_ = detect(raw, re.signed_);
    if (detect(raw, re.mann_whitney) || (wilcoxon && rank && !signed_)) return Method::MannWhitney;
    if (wilcoxon && signed_ && rank) return Method::WilcoxonSignedRank;

    if (detect(raw, re.kruskal)) return Method::KruskalWallis;
    if (detect(raw, re.chi_square)) return Method::ChiSquared;
    if (detect(raw, re.repeated)) return Method::RepeatedMeasures;
    if (detect(raw, re.linear) && detect(raw, re.regression)) return Method::LinearRegression;
    if (detect(raw, re.anova)) return Method::Anova;
    return std::nullopt;
}

struct AdjustedP {
    double p = 0.0;
    bool adjusted = false;
};

/// Convert a one-sided p-value to two-sided, min(2p, 1), when the method text says so.
inline AdjustedP adjust_one_sided(double p, const std::string& raw_method) {
    if (detail::detect(raw_method, detail::patterns().one_sided)) return {std::min(2.0 * p, 1.0), true};
    return {p, false};
}

}  // namespace ejab::ctg
