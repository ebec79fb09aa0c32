#pragma once
// Rows -> scored analysis records. Per analysisId: standardize the reported
// p-value, drop zero/unparseable counts, harmonize the method, enforce
// single-row families, aggregate counts into (n, I, R, C), drop n <= 1, undo
// one-sided reporting, then map to a model and q and compute eJAB01.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ejab/csv.hpp"
#include "ejab/ctg/flatten.hpp"
#include "ejab/ctg/records.hpp"
#include "ejab/ctg/text_rules.hpp"
#include "ejab/evidence.hpp"

namespace ejab::ctg {

struct AggregateOutcome {
    std::optional<AnalysisRecord> record;
    std::vector<Drop> drops;
};

namespace detail {

inline std::optional<double> parse_count(const std::string& text) {
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos) return std::nullopt;
    const auto last = text.find_last_not_of(" \t");
    double value = 0.0;
    const char* begin = text.data() + first;
    const char* end = text.data() + last + 1;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value) || value < 0.0) return std::nullopt;
    return value;
}

}  // namespace detail

/// Reduce the rows of one analysisId (in document order) to a record or
/// drops. The record carries (p, n, I, R, C) but no model or q yet. Every
/// input row ends up either in the record or in a drop.
inline AggregateOutcome aggregate(std::vector<RawAnalysisRow> rows) {
    AggregateOutcome out;
    if (rows.empty()) return out;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.row_index < b.row_index; });
    const RawAnalysisRow& first = rows.front();
    const std::string& id = first.analysis_id;
    auto drop_all = [&](std::string_view why, std::size_t count, std::string detail) {
        out.drops.push_back(Drop{id, std::string(why), count, std::move(detail)});
    };

    const auto standardized = standardize_p(first.p_value);
    if (!standardized) {
        drop_all(reason::kPValue, rows.size(), first.p_value);
        return out;
    }

    std::vector<double> values;
    std::vector<const RawAnalysisRow*> kept;
    for (const auto& row : rows) {
        const auto value = detail::parse_count(row.value);
        if (!value) {
            out.drops.push_back(Drop{row.row_ref, std::string(reason::kValueParse), 1, row.value});
        } else if (*value == 0.0) {
            out.drops.push_back(Drop{row.row_ref, std::string(reason::kZeroSampleSize), 1, row.value});
        } else {
            values.push_back(*value);
            kept.push_back(&row);
        }
    }
    if (kept.empty()) return out;

    const auto method = harmonize_method(first.statistical_method);
    if (!method) {
        drop_all(reason::kMethod, kept.size(), first.statistical_method);
        return out;
    }
    const std::string label(to_label(*method));
    if (requires_single_row(*method) && kept.size() > 1) {
        drop_all(reason::kQcMultiRow, kept.size(), label + " rows=" + std::to_string(kept.size()));
        return out;
    }

    const double n = effective_sample_size(*method, values);
    if (!(n > 1.0)) {
        drop_all(reason::kSampleSize, kept.size(), label + " n=" + format_number(n));
        return out;
    }
    const auto adjusted = adjust_one_sided(standardized->p, first.statistical_method);
    const auto design = design_parameters(*method, static_cast<int>(kept.size()));

    AnalysisRecord record;
    record.analysis_id = id;
    record.outcome_type = first.outcome_type;
    record.outcome_title = first.outcome_title;
    record.group_description = kept.front()->group_description;
    record.original_method = first.statistical_method;
    record.method = *method;
    record.p = adjusted.p;
    record.has_less_than = standardized->has_less_than;
    record.one_sided_adjusted = adjusted.adjusted;
    record.n = n;
    record.q = 0;
    record.groups = design.groups;
    record.rows = design.rows;
    record.cols = design.cols;
    record.source_rows = kept.size();
    if (first.study) record.study = *first.study;
    out.record = std::move(record);
    return out;
}

/// Attach model and q to an aggregated record and compute eJAB01; returns
/// the drop instead when the family is excluded or lacks design parameters.
inline std::optional<Drop> finalize(AnalysisRecord& record) {
    MappingFailure failure{};
    const auto mapping = map_model(record.method, record.groups, &failure);
    if (!mapping) {
        const std::string label(to_label(record.method));
        std::string detail = label + " n=" + format_number(record.n);
        if (record.groups) detail += " I=" + std::to_string(*record.groups);
        if (record.rows) detail += " R=" + std::to_string(*record.rows) + " C=" + std::to_string(*record.cols);
        return Drop{record.analysis_id,
                    std::string(failure == MappingFailure::Excluded ? reason::kModelExcluded : reason::kDesignParams),
                    record.source_rows, std::move(detail)};
    }
    record.model = mapping->model;
    record.q = mapping->q;
    record.ejab01 = ejab01(EvidenceInput{record.p, record.n, record.q});
    return std::nullopt;
}

struct IngestResult {
    std::vector<AnalysisRecord> records;  // sorted by analysisId
    std::vector<Drop> drops;
    std::vector<std::string> warnings;
    std::size_t input_rows = 0;

    std::size_t rows_in_records() const {
        std::size_t total = 0;
        for (const auto& r : records) total += r.source_rows;
        return total;
    }
    std::size_t rows_dropped() const {
        std::size_t total = 0;
        for (const auto& d : drops) total += d.rows;
        return total;
    }
};

/// Run every stage over already-flattened rows.
inline IngestResult ingest_rows(std::vector<RawAnalysisRow> rows) {
    IngestResult result;
    result.input_rows = rows.size();
    std::map<std::string, std::vector<RawAnalysisRow>> by_id;
    for (auto& row : rows) by_id[row.analysis_id].push_back(std::move(row));
    for (auto& [id, group] : by_id) {
        auto outcome = aggregate(std::move(group));
        for (auto& d : outcome.drops) result.drops.push_back(std::move(d));
        if (!outcome.record) continue;
        if (auto drop = finalize(*outcome.record)) {
            result.drops.push_back(std::move(*drop));
        } else {
            result.records.push_back(std::move(*outcome.record));
        }
    }
    return result;
}

inline IngestResult ingest(const nlohmann::json& document) {
    auto flat = flatten(document);
    auto result = ingest_rows(std::move(flat.rows));
    result.warnings = std::move(flat.warnings);
    return result;
}

}  // namespace ejab::ctg
