#pragma once
// JSONL serialization of analysis records and the CSV drop log.
//
// Field names follow the registry schema (statisticalMethod, pValue, ...).
// Doubles are written in shortest round-trip form, so reading a file back
// reproduces every numeric field bit for bit.

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ejab/csv.hpp"
#include "ejab/ctg/records.hpp"

namespace ejab::ctg {

namespace detail {

inline nlohmann::ordered_json optional_int(const std::optional<int>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::optional<int> read_optional_int(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<int>();
}

inline std::string read_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return {};
    return j[key].get<std::string>();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const AnalysisRecord& r) {
    nlohmann::ordered_json j;
    j["analysisId"] = r.analysis_id;
    j["nctId"] = r.study.nct_id;
    j["briefTitle"] = r.study.brief_title;
    j["studyType"] = r.study.study_type;
    j["outcomeType"] = r.outcome_type;
    j["outcomeTitle"] = r.outcome_title;
    j["groupDescription"] = r.group_description;
    j["statisticalMethod"] = std::string(to_label(r.method));
    j["originalMethod"] = r.original_method;
    j["model"] = r.model;
    j["pValue"] = r.p;
    j["has_less_than"] = r.has_less_than;
    j["one_sided_adjusted"] = r.one_sided_adjusted;
    j["n"] = r.n;
    j["q"] = r.q;
    j["I"] = detail::optional_int(r.groups);
    j["R"] = detail::optional_int(r.rows);
    j["C"] = detail::optional_int(r.cols);
    for (std::size_t i = 0; i < kPhaseCount; ++i) j[std::string(kPhaseNames[i])] = r.study.phases[i];
    j["allocation"] = r.study.allocation;
    j["interventionModel"] = r.study.intervention_model;
    j["observationalModel"] = r.study.observational_model;
    j["timePerspective"] = r.study.time_perspective;
    j["condition_mesh"] = r.study.condition_mesh;
    j["condition_ids"] = r.study.condition_ids;
    j["intervention_mesh"] = r.study.intervention_mesh;
    j["intervention_ids"] = r.study.intervention_ids;
    j["hasResultsOrDerived"] = r.study.has_results_or_derived;
    j["ejab01"] = r.ejab01;
    return j;
}

inline AnalysisRecord record_from_json(const nlohmann::json& j) {
    AnalysisRecord r;
    r.analysis_id = j.at("analysisId").get<std::string>();
    r.study.nct_id = j.at("nctId").get<std::string>();
    r.study.brief_title = detail::read_string(j, "briefTitle");
    r.study.study_type = detail::read_string(j, "studyType");
    r.outcome_type = detail::read_string(j, "outcomeType");
    r.outcome_title = detail::read_string(j, "outcomeTitle");
    r.group_description = detail::read_string(j, "groupDescription");
    const auto label = j.at("statisticalMethod").get<std::string>();
    const auto method = method_from_label(label);
    if (!method) throw std::runtime_error("unknown statisticalMethod '" + label + "'");
    r.method = *method;
    r.original_method = detail::read_string(j, "originalMethod");
    r.model = detail::read_string(j, "model");
    r.p = j.at("pValue").get<double>();
    r.has_less_than = j.value("has_less_than", false);
    r.one_sided_adjusted = j.value("one_sided_adjusted", false);
    r.n = j.at("n").get<double>();
    r.q = j.at("q").get<int>();
    r.groups = detail::read_optional_int(j, "I");
    r.rows = detail::read_optional_int(j, "R");
    r.cols = detail::read_optional_int(j, "C");
    for (std::size_t i = 0; i < kPhaseCount; ++i) r.study.phases[i] = j.value(std::string(kPhaseNames[i]), false);
    r.study.allocation = detail::read_string(j, "allocation");
    r.study.intervention_model = detail::read_string(j, "interventionModel");
    r.study.observational_model = detail::read_string(j, "observationalModel");
    r.study.time_perspective = detail::read_string(j, "timePerspective");
    r.study.condition_mesh = j.value("condition_mesh", std::vector<std::string>{});
    r.study.condition_ids = j.value("condition_ids", std::vector<std::string>{});
    r.study.intervention_mesh = j.value("intervention_mesh", std::vector<std::string>{});
    r.study.intervention_ids = j.value("intervention_ids", std::vector<std::string>{});
    r.study.has_results_or_derived = j.value("hasResultsOrDerived", false);
    r.ejab01 = j.value("ejab01", 0.0);
    return r;
}

inline void write_jsonl(std::ostream& out, const std::vector<AnalysisRecord>& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<AnalysisRecord> read_jsonl(std::istream& in) {
    std::vector<AnalysisRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("records line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    return records;
}

inline std::vector<AnalysisRecord> read_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records file " + path);
    return read_jsonl(in);
}

inline void write_drop_log(std::ostream& out, const std::vector<Drop>& drops) {
    CsvWriter csv(out);
    csv.row({"ref", "reason", "rows", "detail"});
    for (const auto& d : drops) csv.row({d.ref, d.reason, std::to_string(d.rows), d.detail});
}

}  // namespace ejab::ctg
