#pragma once
// Bodies of the `ejab` subcommands. Each takes parsed options and output
// streams and returns the process exit code: 0 ok, 1 unusable input files,
// 2 invalid arguments.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ejab/api.hpp"
#include "ejab/corpus.hpp"
#include "ejab/csv.hpp"
#include "ejab/ctg/pipeline.hpp"
#include "ejab/ctg/record_io.hpp"
#include "ejab/simulation.hpp"

namespace ejab::cli {

inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kUsageError = 2;

/// "-" is stdout; anything else is opened for writing.
class Output {
  public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") {
            stream_ = &std::cout;
        } else {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
            stream_ = file_.get();
        }
    }
    std::ostream& operator*() { return *stream_; }

  private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

inline bool read_text(const std::string& path, std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    return !in.bad();
}

// calc

struct CalcOptions {
    std::optional<double> p;
    std::optional<double> n;
    std::optional<int> q;
    std::optional<std::string> family;
    std::vector<double> values;
    std::optional<int> groups;
    std::optional<double> alpha;
    bool json = false;
};

inline nlohmann::json calc_request(const CalcOptions& o) {
    nlohmann::json req = nlohmann::json::object();
    if (o.p) req["p"] = *o.p;
    if (o.n) req["n"] = *o.n;
    if (o.q) req["q"] = *o.q;
    if (o.family) req["family"] = *o.family;
    if (!o.values.empty()) req["values"] = o.values;
    if (o.groups) req["I"] = *o.groups;
    if (o.alpha) req["alpha"] = *o.alpha;
    return req;
}

inline int cmd_calc(const CalcOptions& o, std::ostream& out, std::ostream& err) {
    if (!o.p) {
        err << "error: --p is required\n";
        return kUsageError;
    }
    api::Json result;
    try {
        result = api::evaluate(calc_request(o));
    } catch (const api::RequestError& e) {
        err << "error: " << e.what() << " (" << e.field() << ")\n";
        return kUsageError;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    if (o.json) {
        out << result.dump() << '\n';
        return kOk;
    }
    auto line = [&](const char* key, const std::string& value) {
        out << std::left << std::setw(15) << key << value << '\n';
    };
    auto num = [&](const char* key) { return format_number(result[key].get<double>()); };
    auto flag = [&](const char* key) { return std::string(result[key].get<bool>() ? "yes" : "no"); };
    if (result.contains("family")) {
        line("family", result["family"].get<std::string>() + " (" + result["model"].get<std::string>() + ")");
    }
    line("p", num("p"));
    line("n", num("n"));
    line("q", std::to_string(result["q"].get<int>()));
    line("ejab01", result["ejab01"].is_number() ? num("ejab01") : "0");
    line("ejab10", result["ejab10"].is_number() ? num("ejab10") : "inf");
    line("ln_ejab01", num("ln_ejab01"));
    line("category", result["category"].get<std::string>());
    line("candidate_t1e", flag("candidate_t1e") + " (alpha " + num("alpha") + ")");
    line("jlp", flag("jlp"));
    if (result["saturated"].get<bool>()) line("note", "p below 1e-300 was clamped");
    if (result["p_is_one"].get<bool>()) line("note", "p = 1 reported");
    return kOk;
}

// ingest

struct IngestOptions {
    std::vector<std::string> inputs;
    std::string output = "-";
    std::string drops;  // default: <output>.drops.csv, or none when writing to stdout
};

inline int cmd_ingest(const IngestOptions& o, std::ostream& log, std::ostream& err) {
    ctg::FlattenResult flat;
    std::size_t next_row = 0;
    std::size_t study_offset = 0;
    for (const auto& path : o.inputs) {
        std::string text;
        if (!read_text(path, text)) {
            err << "error: cannot read " << path << "\n";
            return kInputError;
        }
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        try {
            const auto doc = nlohmann::json::parse(text);
            const auto studies = ctg::studies_in(doc);
            for (std::size_t i = 0; i < studies.size(); ++i) {
                ctg::flatten_study(*studies[i], study_offset + i, next_row, flat);
            }
            study_offset += studies.size();
        } catch (const nlohmann::json::parse_error& e) {
            err << "error: " << path << " is not valid JSON: " << e.what() << "\n";
            return kInputError;
        } catch (const ctg::MalformedDocument& e) {
            err << "error: " << path << ": " << e.what() << "\n";
            return kInputError;
        }
    }
    auto result = ctg::ingest_rows(std::move(flat.rows));
    result.warnings = std::move(flat.warnings);
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";

    try {
        Output records(o.output);
        ctg::write_jsonl(*records, result.records);
        std::string drops_path = o.drops;
        if (drops_path.empty() && o.output != "-") drops_path = o.output + ".drops.csv";
        if (!drops_path.empty()) {
            Output drops(drops_path);
            ctg::write_drop_log(*drops, result.drops);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    std::map<std::string, std::pair<std::size_t, std::size_t>> by_reason;  // analyses/rows
    for (const auto& d : result.drops) {
        auto& slot = by_reason[d.reason];
        ++slot.first;
        slot.second += d.rows;
    }
    log << "rows read      " << result.input_rows << "\n";
    log << "records        " << result.records.size() << " (" << result.rows_in_records() << " rows)\n";
    log << "dropped rows   " << result.rows_dropped() << "\n";
    for (const auto& [why, counts] : by_reason) {
        log << "  " << std::left << std::setw(18) << why << counts.first << " drops, " << counts.second << " rows\n";
    }
    return kOk;
}

inline std::optional<std::vector<ctg::AnalysisRecord>> load_records(const std::string& path, std::ostream& err) {
    try {
        return ctg::read_jsonl_file(path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return std::nullopt;
    }
}

// scan

struct ScanOptions {
    std::string records;
    double alpha = 0.05;
    std::string output = "-";
};

inline int cmd_scan(const ScanOptions& o, std::ostream& log, std::ostream& err) {
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) {
        err << "error: --alpha must lie in (0, 1)\n";
        return kUsageError;
    }
    const auto records = load_records(o.records, err);
    if (!records) return kInputError;
    const auto catalog = corpus::catalog_candidates(*records, o.alpha);
    try {
        Output out(o.output);
        corpus::write_catalog_csv(*out, catalog);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    std::size_t jlp = 0;
    for (const auto& e : catalog) jlp += e.jlp;
    log << "candidates " << catalog.size() << " of " << records->size() << " at alpha " << format_number(o.alpha)
        << " (" << jlp << " also JLP)\n";
    return kOk;
}

// sweep

struct SweepOptions {
    std::string records;
    std::string mode = "alpha";  // alpha | k
    std::vector<double> alpha_grid;
    std::vector<double> k_grid;
    double alpha = 0.05;  // fixed alpha of the K sweep
    bool complete_cases = false;
    std::string output = "-";
    std::string sidecar;  // default <output>.json
};

inline std::vector<double> default_alpha_grid() { return corpus::open_grid(0.0, 1.0, 199); }
inline std::vector<double> default_k_grid() { return corpus::open_grid(0.0, 300.0, 299); }

inline int cmd_sweep(const SweepOptions& o, std::ostream& log, std::ostream& err) {
    if (o.mode != "alpha" && o.mode != "k") {
        err << "error: --mode must be alpha or k\n";
        return kUsageError;
    }
    if (o.mode == "k" && o.complete_cases) {
        err << "error: --complete-cases applies to the alpha sweep\n";
        return kUsageError;
    }
    const auto records = load_records(o.records, err);
    if (!records) return kInputError;
    corpus::SweepCurve curve;
    try {
        if (o.mode == "alpha") {
            const auto grid = o.alpha_grid.empty() ? default_alpha_grid() : o.alpha_grid;
            curve = corpus::alpha_sweep(*records, grid, o.complete_cases);
        } else {
            const auto grid = o.k_grid.empty() ? default_k_grid() : o.k_grid;
            curve = corpus::k_sweep(*records, grid, o.alpha);
        }
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    try {
        Output out(o.output);
        corpus::write_sweep_csv(*out, curve);
        std::string sidecar = o.sidecar;
        if (sidecar.empty() && o.output != "-") sidecar = o.output + ".json";
        if (!sidecar.empty()) {
            Output side(sidecar);
            *side << corpus::sweep_sidecar(curve).dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    log << o.mode << " sweep over " << curve.denominator << " records, " << curve.thresholds.size() << " points";
    if (o.mode == "k") log << "; JLP instances " << corpus::jlp_count(*records);
    log << "\n";
    return kOk;
}

// simulate

struct SimulateOptions {
    std::string family = "two-sample-t";
    std::optional<double> effect;  // default: 0, or the medium effect with --medium
    bool medium = false;
    std::vector<int> n = {100};
    int groups = 3;
    std::optional<double> kappa;
    std::size_t reps = 2000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string output = "-";
    std::string summary;
    std::string metadata;
};

inline int cmd_simulate(const SimulateOptions& o, std::ostream& log, std::ostream& err) {
    const auto family = sim::family_from_string(o.family);
    if (!family) {
        err << "error: unknown family " << o.family << "\n";
        return kUsageError;
    }
    if (o.medium && o.effect) {
        err << "error: give either --effect or --medium\n";
        return kUsageError;
    }
    std::vector<sim::SimResult> results;
    try {
        for (int n : o.n) {
            sim::SimDesign d;
            d.family = *family;
            d.effect = o.medium ? sim::medium_effect(*family) : o.effect.value_or(0.0);
            d.n = n;
            d.groups = o.groups;
            d.local_exponent = o.kappa;
            results.push_back(sim::generate_and_test(d, o.reps, o.seed, o.threads));
        }
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    try {
        Output out(o.output);
        sim::write_replicates_csv(*out, results);
        if (!o.summary.empty()) {
            Output s(o.summary);
            sim::write_summary_csv(*s, results);
        }
        if (!o.metadata.empty()) {
            Output m(o.metadata);
            *m << sim::metadata(results).dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    for (const auto& r : results) {
        log << sim::to_string(r.design.family) << " n=" << r.design.n << " median p " << format_number(r.p.q50)
            << ", median eJAB01 " << format_number(r.ejab01.q50) << ", median D_n " << format_number(r.dn.q50)
            << "\n";
    }
    return kOk;
}

// estimate

struct EstimateOptions {
    std::string records;
    std::size_t draws = corpus::kDefaultDraws;
    std::uint64_t seed = 1;
    bool unweighted = false;
    double alpha = 0.05;
    double threshold = 1.0 / 3.0;
    bool complete_cases = false;
};

inline int cmd_estimate(const EstimateOptions& o, std::ostream& out, std::ostream& err) {
    const auto records = load_records(o.records, err);
    if (!records) return kInputError;
    const auto counts = corpus::study_counts(*records, o.alpha, o.threshold, o.complete_cases);
    corpus::PosteriorSummary post;
    try {
        post = corpus::hierarchical_proportion(counts, o.draws, o.seed, !o.unweighted);
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    std::uint64_t m = 0, k = 0;
    for (const auto& c : counts) {
        m += c.m;
        k += c.k;
    }
    nlohmann::ordered_json j;
    j["mean"] = post.mean;
    j["sd"] = post.sd;
    j["draws"] = post.draws;
    j["seed"] = post.seed;
    j["weighted"] = post.weighted;
    j["studies"] = post.studies;
    j["significant"] = m;
    j["above_threshold"] = k;
    j["alpha"] = o.alpha;
    j["threshold"] = o.threshold;
    j["complete_cases"] = o.complete_cases;
    out << j.dump(2) << '\n';
    return kOk;
}

// groups

struct GroupOptions {
    std::string records;
    std::string by = "phase";
    std::string output = "-";
};

inline int cmd_groups(const GroupOptions& o, std::ostream& err) {
    const auto by = corpus::group_by_from_string(o.by);
    if (!by) {
        err << "error: --by must be phase, mesh or outcomeType\n";
        return kUsageError;
    }
    const auto records = load_records(o.records, err);
    if (!records) return kInputError;
    try {
        Output out(o.output);
        corpus::write_group_csv(*out, corpus::group_summaries(*records, *by));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kOk;
}

}  // namespace ejab::cli
