#pragma once
// Row and record types for the registry pipeline, and the test-family rules
// that turn per-group participant counts into (n, q).

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ejab/ctg/text_rules.hpp"

namespace ejab::ctg {

inline constexpr std::string_view kPhaseNames[] = {"EARLY_PHASE1", "PHASE1", "PHASE2", "PHASE3", "PHASE4"};
inline constexpr std::size_t kPhaseCount = std::size(kPhaseNames);

/// Study-level fields copied onto every row and record.
struct StudyMetadata {
    std::string nct_id;
    std::string brief_title;
    std::string study_type;
    std::string allocation;
    std::string intervention_model;
    std::string observational_model;
    std::string time_perspective;
    bool phases[kPhaseCount] = {};
    std::vector<std::string> condition_mesh;
    std::vector<std::string> condition_ids;
    std::vector<std::string> intervention_mesh;
    std::vector<std::string> intervention_ids;
    bool has_results_or_derived = false;
};

/// One denominator count of one outcome-analysis pair.
struct RawAnalysisRow {
    std::string analysis_id;
    std::size_t row_index = 0;  // position in export document order
    std::string row_ref;        // nctId:outcome:analysis:groupId
    std::string outcome_type;
    std::string outcome_title;
    std::string group_description;
    std::string units;
    std::string group_id;
    std::string value;
    std::string p_value;
    std::string statistical_method;
    std::shared_ptr<const StudyMetadata> study;
};

/// One cleaned test, ready for eJAB.
struct AnalysisRecord {
    std::string analysis_id;
    std::string outcome_type;
    std::string outcome_title;
    std::string group_description;
    std::string original_method;
    Method method = Method::TwoSampleT;
    std::string model;
    double p = 0.0;
    bool has_less_than = false;
    bool one_sided_adjusted = false;
    double n = 0.0;
    int q = 1;
    std::optional<int> groups;  // I
    std::optional<int> rows;    // R
    std::optional<int> cols;    // C
    double ejab01 = 0.0;
    StudyMetadata study;
    std::size_t source_rows = 0;  // rows aggregated into this record; not serialized
};

/// Row count for families whose record must come from a single denominator.
inline bool requires_single_row(Method m) { return m == Method::OneSampleT || m == Method::WilcoxonSignedRank; }

/// Effective sample size from the per-group counts, in document order.
inline double effective_sample_size(Method m, std::span<const double> values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    double max = values.front();
    for (double v : values) {
        sum += v;
        if (v > max) max = v;
    }
    switch (m) {
        case Method::OneSampleT:
        case Method::WilcoxonSignedRank: return values.front();
        case Method::ConditionalLogistic: return max;
        case Method::Cox:
        case Method::Logrank: return 0.5 * sum;
        default: return sum;
    }
}

struct DesignParameters {
    std::optional<int> groups;
    std::optional<int> rows;
    std::optional<int> cols;
};

inline DesignParameters design_parameters(Method m, int row_count) {
    switch (m) {
        case Method::Anova:
        case Method::KruskalWallis:
        case Method::RepeatedMeasures: return {row_count, std::nullopt, std::nullopt};
        case Method::ChiSquared: return {std::nullopt, row_count, 2};
        default: return {};
    }
}

enum class MappingFailure { Excluded, MissingGroups };

struct ModelMapping {
    std::string model;
    int q = 1;
};

/// Canonical family to eJAB model string and test dimension. Survival,
/// chi-squared and repeated-measures families are excluded from scoring.
inline std::optional<ModelMapping> map_model(Method m, std::optional<int> groups, MappingFailure* why = nullptr) {
    auto fail = [&](MappingFailure reason) -> std::optional<ModelMapping> {
        if (why) *why = reason;
        return std::nullopt;
    };
    switch (m) {
        case Method::OneSampleT:
        case Method::TwoSampleT: return ModelMapping{"t-test", 1};
        case Method::LinearRegression: return ModelMapping{"linear_regression", 1};
        case Method::Logistic:
        case Method::ConditionalLogistic: return ModelMapping{"logistic_regression", 1};
        case Method::MannWhitney: return ModelMapping{"mann_whitney", 1};
        case Method::WilcoxonSignedRank: return ModelMapping{"wilcoxon", 1};
        case Method::Anova:
        case Method::KruskalWallis: {
            if (!groups || *groups < 2) return fail(MappingFailure::MissingGroups);
            return ModelMapping{m == Method::Anova ? "anova" : "kruskal_wallis", *groups - 1};
        }
        case Method::Cox:
        case Method::Logrank:
        case Method::ChiSquared:
        case Method::RepeatedMeasures: return fail(MappingFailure::Excluded);
    }
    return fail(MappingFailure::Excluded);
}

/// Machine-readable reasons a row or analysis leaves the pipeline.
namespace reason {
inline constexpr std::string_view kPValue = "p_value";
inline constexpr std::string_view kValueParse = "value_parse";
inline constexpr std::string_view kZeroSampleSize = "zero_sample_size";
inline constexpr std::string_view kMethod = "method";
inline constexpr std::string_view kQcMultiRow = "qc_multirow";
inline constexpr std::string_view kModelExcluded = "model_excluded";
inline constexpr std::string_view kDesignParams = "design_params";
inline constexpr std::string_view kSampleSize = "sample_size";
}  // namespace reason

struct Drop {
    std::string ref;  // analysisId, or a row reference for row-level drops
    std::string reason;
    std::size_t rows = 1;
    std::string detail;  // offending text or derived values, for review
};

}  // namespace ejab::ctg
