#pragma once
// Corpus-level summaries over scored analysis records: candidate type I
// error catalog, alpha and K threshold sweeps, per-study counts for the
// hierarchical proportion estimate, and grouped medians.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ejab/csv.hpp"
#include "ejab/ctg/records.hpp"
#include "ejab/evidence.hpp"

namespace ejab::corpus {

using ctg::AnalysisRecord;

/// A record together with its recomputed evidence.
struct Scored {
    const AnalysisRecord* record = nullptr;
    EvidenceAssessment assessment;
};

inline std::vector<Scored> score(const std::vector<AnalysisRecord>& records) {
    std::vector<Scored> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({&r, assess(EvidenceInput{r.p, r.n, r.q})});
    return out;
}

// p = .05 exactly is the usual heaping value; "<" p-values are censored
inline bool is_complete_case(const AnalysisRecord& r) { return !r.has_less_than && r.p != 0.05; }

struct CatalogEntry {
    const AnalysisRecord* record = nullptr;
    EvidenceAssessment assessment;
    bool candidate_t1e = false;
    bool jlp = false;
};

/// Records with p <= alpha and eJAB01 > 1, in input order.
inline std::vector<CatalogEntry> catalog_candidates(const std::vector<AnalysisRecord>& records, double alpha) {
    std::vector<CatalogEntry> out;
    for (const auto& s : score(records)) {
        const double p = s.record->p;
        if (!is_candidate_t1e(p, s.assessment.ejab01, alpha)) continue;
        out.push_back({s.record, s.assessment, true, is_jlp(p, s.assessment.ejab01)});
    }
    return out;
}

inline void write_catalog_csv(std::ostream& out, const std::vector<CatalogEntry>& entries) {
    CsvWriter csv(out);
    std::vector<std::string> header = {"analysisId", "nctId", "method", "p", "has_less_than", "n", "q",
                                       "ejab01", "ln_ejab01", "category", "candidate_t1e", "jlp"};
    for (auto name : ctg::kPhaseNames) header.emplace_back(name);
    header.insert(header.end(), {"outcomeType", "briefTitle"});
    csv.row(header);
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    for (const auto& e : entries) {
        const auto& r = *e.record;
        std::vector<std::string> row = {r.analysis_id,
                                        r.study.nct_id,
                                        std::string(ctg::to_label(r.method)),
                                        format_number(r.p),
                                        flag(r.has_less_than),
                                        format_number(r.n),
                                        std::to_string(r.q),
                                        format_number(e.assessment.ejab01),
                                        format_number(e.assessment.ln_ejab01),
                                        std::string(to_string(e.assessment.category)),
                                        flag(e.candidate_t1e),
                                        flag(e.jlp)};
        for (bool phase : r.study.phases) row.push_back(flag(phase));
        row.push_back(r.outcome_type);
        row.push_back(r.study.brief_title);
        csv.row(row);
    }
}

struct SweepCurve {
    std::string statistic;  // "alpha" or "K"
    std::vector<double> thresholds;
    std::vector<double> proportions;
    std::size_t denominator = 0;
    bool complete_cases = false;
    double alpha = 0.0;  // fixed alpha of a K sweep
};

namespace detail {

inline void require_ascending(std::span<const double> grid, double lo, double hi, const char* what) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > lo && grid[i] < hi)) throw std::domain_error(std::string(what) + " grid value out of range");
        if (i && !(grid[i] > grid[i - 1])) throw std::domain_error(std::string(what) + " grid must be ascending");
    }
}

}  // namespace detail

/// Share of all records (or complete cases) with p <= alpha and eJAB01 > 1.
inline SweepCurve alpha_sweep(const std::vector<AnalysisRecord>& records, std::span<const double> grid,
                              bool complete_cases = false) {
    detail::require_ascending(grid, 0.0, 1.0, "alpha");
    SweepCurve curve;
    curve.statistic = "alpha";
    curve.complete_cases = complete_cases;
    curve.thresholds.assign(grid.begin(), grid.end());
    // p of every record whose eJAB01 exceeds 1, sorted, then one binary search per alpha
    std::vector<double> contradicting;
    for (const auto& s : score(records)) {
        if (complete_cases && !is_complete_case(*s.record)) continue;
        ++curve.denominator;
        if (s.assessment.ejab01 > 1.0) contradicting.push_back(s.record->p);
    }
    std::sort(contradicting.begin(), contradicting.end());
    for (double alpha : grid) {
        const auto count = std::upper_bound(contradicting.begin(), contradicting.end(), alpha) - contradicting.begin();
        curve.proportions.push_back(curve.denominator ? static_cast<double>(count) / curve.denominator : 0.0);
    }
    return curve;
}

/// Share of all records with p <= alpha and eJAB01 >= K.
inline SweepCurve k_sweep(const std::vector<AnalysisRecord>& records, std::span<const double> k_grid,
                          double alpha = kJlpAlpha) {
    detail::require_ascending(k_grid, 0.0, INFINITY, "K");
    SweepCurve curve;
    curve.statistic = "K";
    curve.alpha = alpha;
    curve.thresholds.assign(k_grid.begin(), k_grid.end());
    std::vector<double> significant;
    for (const auto& s : score(records)) {
        ++curve.denominator;
        if (s.record->p <= alpha) significant.push_back(s.assessment.ejab01);
    }
    std::sort(significant.begin(), significant.end());
    for (double k : k_grid) {
        const auto count = significant.end() - std::lower_bound(significant.begin(), significant.end(), k);
        curve.proportions.push_back(curve.denominator ? static_cast<double>(count) / curve.denominator : 0.0);
    }
    return curve;
}

/// Jeffreys-Lindley instances: p <= .05 with eJAB01 > 3.
inline std::size_t jlp_count(const std::vector<AnalysisRecord>& records) {
    std::size_t count = 0;
    for (const auto& s : score(records)) count += is_jlp(s.record->p, s.assessment.ejab01);
    return count;
}

/// Evenly spaced grid strictly inside (lo, hi): lo + (hi-lo) i/(points+1).
inline std::vector<double> open_grid(double lo, double hi, std::size_t points) {
    std::vector<double> grid;
    for (std::size_t i = 1; i <= points; ++i) grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (points + 1));
    return grid;
}

inline void write_sweep_csv(std::ostream& out, const SweepCurve& curve) {
    CsvWriter csv(out);
    csv.row({curve.statistic, "proportion"});
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        csv.row({format_number(curve.thresholds[i]), format_number(curve.proportions[i])});
    }
}

inline nlohmann::ordered_json sweep_sidecar(const SweepCurve& curve) {
    nlohmann::ordered_json j;
    j["statistic"] = curve.statistic;
    j["denominator"] = curve.denominator;
    j["points"] = curve.thresholds.size();
    if (curve.statistic == "alpha") {
        j["filters"] = {{"complete_cases", curve.complete_cases}};
        j["numerator"] = "p <= alpha and ejab01 > 1";
    } else {
        j["filters"] = {{"complete_cases", false}};
        j["alpha"] = curve.alpha;
        j["numerator"] = "p <= alpha and ejab01 >= K";
    }
    return j;
}

// hierarchical proportion

struct StudyCount {
    std::string nct_id;
    std::uint64_t m = 0;  // results with p <= alpha
    std::uint64_t k = 0;  // of those, eJAB01 above the threshold
};

/// Per-study (m, k) with m = #{p <= alpha} and k = #{p <= alpha, eJAB01 > threshold}.
/// Studies with m = 0 are omitted. Sorted by nctId.
inline std::vector<StudyCount> study_counts(const std::vector<AnalysisRecord>& records, double alpha = kJlpAlpha,
                                            double threshold = 1.0 / 3.0, bool complete_cases = false) {
    std::map<std::string, StudyCount> by_study;
    for (const auto& s : score(records)) {
        const auto& r = *s.record;
        if (complete_cases && !is_complete_case(r)) continue;
        if (!(r.p <= alpha)) continue;
        auto& c = by_study[r.study.nct_id];
        c.nct_id = r.study.nct_id;
        ++c.m;
        if (s.assessment.ejab01 > threshold) ++c.k;
    }
    std::vector<StudyCount> out;
    for (auto& [id, c] : by_study) out.push_back(std::move(c));
    return out;
}

struct PosteriorSummary {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
    bool weighted = true;
    std::size_t studies = 0;
};

inline constexpr std::size_t kDefaultDraws = 20000;

/// Flat Beta(1, 1) prior per study, posterior Beta(1 + k, 1 + m - k).
/// Each draw combines the study proportions as sum m_i pi_i / sum m_i (or a
/// plain average when unweighted). Studies are put in canonical (m, k) order
/// first, so the result depends only on the multiset of counts and the seed.
inline PosteriorSummary hierarchical_proportion(std::span<const StudyCount> counts, std::size_t draws = kDefaultDraws,
                                                std::uint64_t seed = 1, bool weighted = true) {
    if (draws < 2) throw std::domain_error("need at least 2 posterior draws");
    std::vector<std::pair<std::uint64_t, std::uint64_t>> mk;
    std::uint64_t total_m = 0;
    for (const auto& c : counts) {
        if (c.k > c.m) throw std::domain_error("study " + c.nct_id + ": k exceeds m");
        if (c.m == 0) continue;
        mk.emplace_back(c.m, c.k);
        total_m += c.m;
    }
    if (mk.empty()) throw std::domain_error("no study has a significant result");
    std::sort(mk.begin(), mk.end());

    std::mt19937_64 rng(seed);
    std::vector<std::gamma_distribution<double>> ga, gb;
    ga.reserve(mk.size());
    gb.reserve(mk.size());
    for (const auto& [m, k] : mk) {
        ga.emplace_back(1.0 + static_cast<double>(k), 1.0);
        gb.emplace_back(1.0 + static_cast<double>(m - k), 1.0);
    }
    // Welford over draws
    double mean = 0.0, m2 = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        double acc = 0.0;
        for (std::size_t i = 0; i < mk.size(); ++i) {
            const double x = ga[i](rng);
            const double y = gb[i](rng);
            const double pi = x / (x + y);
            acc += weighted ? static_cast<double>(mk[i].first) * pi : pi;
        }
        const double overall = acc / (weighted ? static_cast<double>(total_m) : static_cast<double>(mk.size()));
        const double delta = overall - mean;
        mean += delta / static_cast<double>(d + 1);
        m2 += delta * (overall - mean);
    }
    PosteriorSummary out;
    out.mean = mean;
    out.sd = std::sqrt(m2 / static_cast<double>(draws - 1));
    out.draws = draws;
    out.seed = seed;
    out.weighted = weighted;
    out.studies = mk.size();
    return out;
}

// grouped medians

enum class GroupBy { Phase, Mesh, OutcomeType };

inline std::optional<GroupBy> group_by_from_string(std::string_view s) {
    if (s == "phase") return GroupBy::Phase;
    if (s == "mesh") return GroupBy::Mesh;
    if (s == "outcomeType") return GroupBy::OutcomeType;
    return std::nullopt;
}

struct GroupSummary {
    std::string key;
    std::size_t count = 0;
    double median_ln_ejab01 = 0.0;
    double median_ln_p = 0.0;
    double mean_n = 0.0;
};

inline constexpr const char* kMissingGroup = "NA";

inline double median(std::vector<double> v) {
    if (v.empty()) return NAN;
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double upper = v[mid];
    if (v.size() % 2) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

/// One row per non-empty group. A record joins every group it belongs to
/// (each phase flag, each condition MeSH term); records with none go to "NA".
/// Phase rows follow phase order, other keys sort bytewise.
inline std::vector<GroupSummary> group_summaries(const std::vector<AnalysisRecord>& records, GroupBy by) {
    struct Acc {
        std::vector<double> ln_ejab, ln_p;
        double n_sum = 0.0;
    };
    std::map<std::string, Acc> groups;
    auto add = [&](const std::string& key, const Scored& s) {
        auto& a = groups[key];
        a.ln_ejab.push_back(s.assessment.ln_ejab01);
        a.ln_p.push_back(std::log(s.record->p));
        a.n_sum += s.record->n;
    };
    for (const auto& s : score(records)) {
        const auto& r = *s.record;
        std::vector<std::string> keys;
        switch (by) {
            case GroupBy::Phase:
                for (std::size_t i = 0; i < ctg::kPhaseCount; ++i) {
                    if (r.study.phases[i]) keys.emplace_back(ctg::kPhaseNames[i]);
                }
                break;
            case GroupBy::Mesh:
                keys = r.study.condition_mesh;
                std::sort(keys.begin(), keys.end());
                keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
                break;
            case GroupBy::OutcomeType:
                if (!r.outcome_type.empty()) keys.push_back(r.outcome_type);
                break;
        }
        if (keys.empty()) keys.emplace_back(kMissingGroup);
        for (const auto& key : keys) add(key, s);
    }
    auto summarize = [](const std::string& key, const Acc& a) {
        GroupSummary g;
        g.key = key;
        g.count = a.ln_p.size();
        g.median_ln_ejab01 = median(a.ln_ejab);
        g.median_ln_p = median(a.ln_p);
        g.mean_n = a.n_sum / static_cast<double>(g.count);
        return g;
    };
    std::vector<GroupSummary> out;
    if (by == GroupBy::Phase) {
        for (auto name : ctg::kPhaseNames) {
            if (auto it = groups.find(std::string(name)); it != groups.end()) out.push_back(summarize(it->first, it->second));
        }
        if (auto it = groups.find(kMissingGroup); it != groups.end()) out.push_back(summarize(it->first, it->second));
    } else {
        for (const auto& [key, acc] : groups) out.push_back(summarize(key, acc));
    }
    return out;
}

inline void write_group_csv(std::ostream& out, const std::vector<GroupSummary>& groups) {
    CsvWriter csv(out);
    csv.row({"group", "count", "median_ln_ejab01", "median_ln_p", "mean_n"});
    for (const auto& g : groups) {
        csv.row({g.key, std::to_string(g.count), format_number(g.median_ln_ejab01), format_number(g.median_ln_p),
                 format_number(g.mean_n)});
    }
}

}  // namespace ejab::corpus
