#pragma once
// Registry results export -> flat analysis-level rows. One row per
// (outcome, analysis, denominator count) where the count's units are
// "Participants" and its groupId is one of the analysis's groupIds.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ejab/ctg/analysis_id.hpp"
#include "ejab/ctg/records.hpp"

namespace ejab::ctg {

class MalformedDocument : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct FlattenResult {
    std::vector<RawAnalysisRow> rows;
    std::vector<std::string> warnings;
};

namespace detail {

using nlohmann::json;

inline const json* find_path(const json& root, std::initializer_list<std::string_view> path) {
    const json* node = &root;
    for (std::string_view key : path) {
        if (!node->is_object()) return nullptr;
        const auto it = node->find(std::string(key));
        if (it == node->end()) return nullptr;
        node = &*it;
    }
    return node;
}

inline std::string string_at(const json& root, std::initializer_list<std::string_view> path) {
    const json* node = find_path(root, path);
    if (!node || node->is_null()) return {};
    if (node->is_string()) return node->get<std::string>();
    return node->dump();
}

// Counts arrive as strings in the export but tolerate plain numbers.
inline std::string scalar_text(const json& node) {
    if (node.is_string()) return node.get<std::string>();
    if (node.is_null()) return {};
    return node.dump();
}

inline void read_meshes(const json& study, std::string_view module, std::vector<std::string>& terms,
                        std::vector<std::string>& ids) {
    const json* meshes = find_path(study, {"derivedSection", module, "meshes"});
    if (!meshes || !meshes->is_array()) return;
    for (const auto& mesh : *meshes) {
        if (!mesh.is_object()) continue;
        ids.push_back(string_at(mesh, {"id"}));
        terms.push_back(string_at(mesh, {"term"}));
    }
}

inline StudyMetadata read_metadata(const json& study, std::string nct_id) {
    StudyMetadata meta;
    meta.nct_id = std::move(nct_id);
    meta.brief_title = string_at(study, {"protocolSection", "identificationModule", "briefTitle"});
    meta.study_type = string_at(study, {"protocolSection", "designModule", "studyType"});
    meta.allocation = string_at(study, {"protocolSection", "designModule", "designInfo", "allocation"});
    meta.intervention_model = string_at(study, {"protocolSection", "designModule", "designInfo", "interventionModel"});
    meta.observational_model =
        string_at(study, {"protocolSection", "designModule", "designInfo", "observationalModel"});
    meta.time_perspective = string_at(study, {"protocolSection", "designModule", "designInfo", "timePerspective"});
    if (const json* phases = find_path(study, {"protocolSection", "designModule", "phases"});
        phases && phases->is_array()) {
        for (const auto& phase : *phases) {
            if (!phase.is_string()) continue;
            for (std::size_t i = 0; i < kPhaseCount; ++i) {
                if (phase.get<std::string>() == kPhaseNames[i]) meta.phases[i] = true;
            }
        }
    }
    read_meshes(study, "conditionBrowseModule", meta.condition_mesh, meta.condition_ids);
    read_meshes(study, "interventionBrowseModule", meta.intervention_mesh, meta.intervention_ids);
    if (const json* refs = find_path(study, {"protocolSection", "referencesModule", "references"});
        refs && refs->is_array()) {
        for (const auto& ref : *refs) {
            const std::string type = string_at(ref, {"type"});
            if (type == "RESULT" || type == "RESULTS" || type == "DERIVED") meta.has_results_or_derived = true;
        }
    }
    return meta;
}

}  // namespace detail

/// Flatten one study. `next_row_index` carries document order across studies.
inline void flatten_study(const nlohmann::json& study, std::size_t study_index, std::size_t& next_row_index,
                          FlattenResult& out) {
    using detail::json;
    if (!study.is_object()) {
        throw MalformedDocument("study #" + std::to_string(study_index) + " is not a JSON object");
    }
    const json* nct = detail::find_path(study, {"protocolSection", "identificationModule", "nctId"});
    if (!nct || !nct->is_string() || nct->get<std::string>().empty()) {
        throw MalformedDocument("study #" + std::to_string(study_index) + " has no nctId");
    }
    const std::string nct_id = nct->get<std::string>();
    auto meta = std::make_shared<const StudyMetadata>(detail::read_metadata(study, nct_id));

    const json* outcomes = detail::find_path(study, {"resultsSection", "outcomeMeasuresModule", "outcomeMeasures"});
    if (!outcomes) return;
    if (!outcomes->is_array()) {
        out.warnings.push_back(nct_id + ": outcomeMeasures is not an array; study skipped");
        return;
    }

    for (std::size_t oi = 0; oi < outcomes->size(); ++oi) {
        const json& outcome = (*outcomes)[oi];
        const std::string where = nct_id + ":" + std::to_string(oi);
        if (!outcome.is_object()) {
            out.warnings.push_back(where + ": outcome is not an object; skipped");
            continue;
        }
        const json* analyses = detail::find_path(outcome, {"analyses"});
        if (!analyses || (analyses->is_array() && analyses->empty())) continue;
        const json* denoms = detail::find_path(outcome, {"denoms"});
        if (!analyses->is_array() || (denoms && !denoms->is_array())) {
            out.warnings.push_back(where + ": malformed analyses/denoms; outcome skipped");
            continue;
        }

        std::unordered_map<std::string, std::string> group_descriptions;
        if (const json* groups = detail::find_path(outcome, {"groups"}); groups && groups->is_array()) {
            for (const auto& g : *groups) {
                group_descriptions[detail::string_at(g, {"id"})] = detail::string_at(g, {"description"});
            }
        }
        const std::string outcome_type = detail::string_at(outcome, {"type"});
        const std::string outcome_title = detail::string_at(outcome, {"title"});

        for (std::size_t ai = 0; ai < analyses->size(); ++ai) {
            const json& analysis = (*analyses)[ai];
            if (!analysis.is_object()) {
                out.warnings.push_back(where + ":" + std::to_string(ai) + ": analysis is not an object; skipped");
                continue;
            }
            std::unordered_set<std::string> declared;
            if (const json* ids = detail::find_path(analysis, {"groupIds"}); ids && ids->is_array()) {
                for (const auto& id : *ids) {
                    if (id.is_string()) declared.insert(id.get<std::string>());
                }
            }
            const std::string id = analysis_id(nct_id, outcome, analysis);
            const std::string p_value = detail::string_at(analysis, {"pValue"});
            const std::string method = detail::string_at(analysis, {"statisticalMethod"});
            if (!denoms) continue;
            for (const auto& denom : *denoms) {
                const std::string units = detail::string_at(denom, {"units"});
                if (units != "Participants") continue;
                const json* counts = detail::find_path(denom, {"counts"});
                if (!counts || !counts->is_array()) continue;
                for (const auto& count : *counts) {
                    const std::string group_id = detail::string_at(count, {"groupId"});
                    if (!declared.contains(group_id)) continue;
                    RawAnalysisRow row;
                    row.analysis_id = id;
                    row.row_index = next_row_index++;
                    row.row_ref = where + ":" + std::to_string(ai) + ":" + group_id;
                    row.outcome_type = outcome_type;
                    row.outcome_title = outcome_title;
                    const auto desc = group_descriptions.find(group_id);
                    if (desc != group_descriptions.end()) row.group_description = desc->second;
                    row.units = units;
                    row.group_id = group_id;
                    row.value = count.is_object() && count.contains("value") ? detail::scalar_text(count["value"]) : "";
                    row.p_value = p_value;
                    row.statistical_method = method;
                    row.study = meta;
                    out.rows.push_back(std::move(row));
                }
            }
        }
    }
}

/// Studies contained in an export: a JSON array of studies, an object with
/// a "studies" array, or a single study object.
inline std::vector<const nlohmann::json*> studies_in(const nlohmann::json& document) {
    std::vector<const nlohmann::json*> studies;
    const nlohmann::json* list = nullptr;
    if (document.is_array()) {
        list = &document;
    } else if (document.is_object() && document.contains("studies") && document["studies"].is_array()) {
        list = &document["studies"];
    } else if (document.is_object() && document.contains("protocolSection")) {
        studies.push_back(&document);
        return studies;
    } else {
        throw MalformedDocument("export is neither a study, an array of studies, nor {\"studies\": [...]}");
    }
    for (const auto& s : *list) studies.push_back(&s);
    return studies;
}

inline FlattenResult flatten(const nlohmann::json& document) {
    FlattenResult out;
    std::size_t next_row_index = 0;
    const auto studies = studies_in(document);
    for (std::size_t i = 0; i < studies.size(); ++i) flatten_study(*studies[i], i, next_row_index, out);
    return out;
}

}  // namespace ejab::ctg
