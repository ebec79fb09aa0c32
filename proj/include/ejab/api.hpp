#pragma once
// Request handling shared by the `calc` command and the HTTP service.
// Handlers are pure functions of the request body.
//
//   POST /api/ejab    {p, n, q} or {p, family, values | n [, I]} [, alpha]
//   POST /api/whatif  {p, q, n_min, n_max [, steps]}
//   GET  /api/health

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ejab/ctg/records.hpp"
#include "ejab/ctg/text_rules.hpp"
#include "ejab/evidence.hpp"

namespace ejab::api {

using Json = nlohmann::ordered_json;

/// Invalid request; `field` names the offending member.
class RequestError : public std::runtime_error {
  public:
    RequestError(std::string field, const std::string& message) : std::runtime_error(message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

struct Response {
    int status = 200;
    Json body;
};

/// A calculator request after (n, q) have been resolved.
struct CalcRequest {
    EvidenceInput input;
    double alpha = kJlpAlpha;
    std::optional<ctg::Method> family;
    std::string model;
    std::optional<int> groups;
};

namespace detail {

inline double number(const nlohmann::json& req, const char* field) {
    if (!req.contains(field)) throw RequestError(field, std::string("missing ") + field);
    const auto& v = req[field];
    if (!v.is_number()) throw RequestError(field, std::string(field) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw RequestError(field, std::string(field) + " must be finite");
    return x;
}

inline int positive_int(const nlohmann::json& req, const char* field) {
    const double x = number(req, field);
    if (x < 1.0 || x != std::floor(x) || x > 2147483647.0) {
        throw RequestError(field, std::string(field) + " must be a positive integer");
    }
    return static_cast<int>(x);
}

inline double probability(const nlohmann::json& req, const char* field, bool allow_one) {
    const double p = number(req, field);
    if (!(p > 0.0) || p > 1.0 || (!allow_one && p == 1.0)) {
        throw RequestError(field, std::string(field) + (allow_one ? " must lie in (0, 1]" : " must lie in (0, 1)"));
    }
    return p;
}

inline std::optional<ctg::Method> parse_family(const std::string& text) {
    if (auto m = ctg::method_from_label(text)) return m;
    return ctg::harmonize_method(text);
}

inline double count_n(const nlohmann::json& req) {
    const double n = number(req, "n");
    if (n < 1.0 || n != std::floor(n)) throw RequestError("n", "n must be a positive integer");
    return n;
}

}  // namespace detail

/// Validate a calculator request and derive (n, q). With a family, n comes
/// from the per-group `values` (or is given as n) and q from the group count,
/// using the same rules as the registry pipeline.
inline CalcRequest parse_calc_request(const nlohmann::json& req) {
    if (!req.is_object()) throw RequestError("body", "request body must be a JSON object");
    CalcRequest out;
    out.input.p = detail::probability(req, "p", true);
    if (req.contains("alpha")) out.alpha = detail::probability(req, "alpha", false);

    const bool direct = req.contains("q");
    const bool by_family = req.contains("family");
    if (direct && by_family) throw RequestError("family", "give either q or family, not both");
    if (!direct && !by_family) throw RequestError("q", "missing q (or family)");

    if (direct) {
        for (const char* extra : {"values", "I"}) {
            if (req.contains(extra)) throw RequestError(extra, std::string(extra) + " only applies with family");
        }
        out.input.n = detail::count_n(req);
        out.input.q = detail::positive_int(req, "q");
        return out;
    }

    if (!req["family"].is_string()) throw RequestError("family", "family must be a string");
    const auto family = detail::parse_family(req["family"].get<std::string>());
    if (!family) throw RequestError("family", "unrecognized test family");
    out.family = family;

    std::optional<int> groups;
    if (req.contains("values")) {
        if (req.contains("n")) throw RequestError("n", "give either n or values, not both");
        const auto& values = req["values"];
        if (!values.is_array() || values.empty()) throw RequestError("values", "values must be a non-empty array");
        std::vector<double> counts;
        for (const auto& v : values) {
            if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>())) {
                throw RequestError("values", "values must be positive numbers");
            }
            counts.push_back(v.get<double>());
        }
        if (ctg::requires_single_row(*family) && counts.size() > 1) {
            throw RequestError("values", "this family takes a single group count");
        }
        out.input.n = ctg::effective_sample_size(*family, counts);
        groups = ctg::design_parameters(*family, static_cast<int>(counts.size())).groups;
        if (req.contains("I")) {
            if (!groups || detail::positive_int(req, "I") != *groups) {
                throw RequestError("I", "I disagrees with the number of values");
            }
        }
    } else {
        out.input.n = detail::count_n(req);
        if (req.contains("I")) groups = detail::positive_int(req, "I");
    }
    if (!(out.input.n >= 1.0)) throw RequestError("values", "effective sample size must be >= 1");

    ctg::MappingFailure why{};
    const auto mapping = ctg::map_model(*family, groups, &why);
    if (!mapping) {
        if (why == ctg::MappingFailure::Excluded) throw RequestError("family", "family is not scored by eJAB");
        throw RequestError("I", "family needs I >= 2 groups");
    }
    out.model = mapping->model;
    out.input.q = mapping->q;
    out.groups = groups;
    return out;
}

inline Json assessment_json(const CalcRequest& req, const EvidenceAssessment& a) {
    Json j;
    j["ejab01"] = a.ejab01;
    j["ejab10"] = a.ejab10;
    j["ln_ejab01"] = a.ln_ejab01;
    j["category"] = to_string(a.category);
    j["saturated"] = a.saturated;
    j["p_is_one"] = a.p_is_one;
    j["p"] = req.input.p;
    j["n"] = req.input.n;
    j["q"] = req.input.q;
    j["alpha"] = req.alpha;
    j["candidate_t1e"] = is_candidate_t1e(req.input.p, a.ejab01, req.alpha);
    j["jlp"] = is_jlp(req.input.p, a.ejab01);
    if (req.family) {
        j["family"] = ctg::to_label(*req.family);
        j["model"] = req.model;
        if (req.groups) j["I"] = *req.groups;
    }
    return j;
}

inline Json error_json(const std::string& message, const std::string& field) {
    Json j;
    j["error"] = message;
    j["field"] = field;
    return j;
}

/// Parse, score, and describe one calculator request.
inline Json evaluate(const nlohmann::json& request) {
    const auto req = parse_calc_request(request);
    return assessment_json(req, assess(req.input));
}

inline constexpr int kDefaultWhatifSteps = 60;
inline constexpr int kMaxWhatifSteps = 2000;

/// eJAB01 along a log-spaced grid of integer n at fixed (p, q).
inline Json whatif(const nlohmann::json& req) {
    if (!req.is_object()) throw RequestError("body", "request body must be a JSON object");
    const double p = detail::probability(req, "p", true);
    const int q = detail::positive_int(req, "q");
    const int n_min = detail::positive_int(req, "n_min");
    const int n_max = detail::positive_int(req, "n_max");
    if (n_max < n_min) throw RequestError("n_max", "n_max must be >= n_min");
    const int steps = req.contains("steps") ? detail::positive_int(req, "steps") : kDefaultWhatifSteps;
    if (steps < 2 || steps > kMaxWhatifSteps) {
        throw RequestError("steps", "steps must be between 2 and " + std::to_string(kMaxWhatifSteps));
    }
    std::set<long long> grid;
    const double ratio = std::log(static_cast<double>(n_max) / n_min);
    for (int i = 0; i < steps; ++i) {
        grid.insert(std::llround(n_min * std::exp(ratio * i / (steps - 1))));
    }
    grid.insert(n_min);
    grid.insert(n_max);
    Json out = Json::array();
    for (long long n : grid) {
        const double value = ejab01(EvidenceInput{p, static_cast<double>(n), q});
        Json point;
        point["n"] = n;
        point["ejab01"] = value;
        point["jlp"] = is_jlp(p, value);
        out.push_back(std::move(point));
    }
    return out;
}

namespace detail {

template <class F>
Response guarded(std::string_view body, F&& handler) {
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
        return {400, error_json("request body is not valid JSON", "body")};
    }
    try {
        return {200, handler(parsed)};
    } catch (const RequestError& e) {
        return {400, error_json(e.what(), e.field())};
    } catch (const DomainError& e) {
        return {400, error_json(e.what(), "body")};
    }
}

}  // namespace detail

inline Response handle_ejab(std::string_view body) { return detail::guarded(body, evaluate); }
inline Response handle_whatif(std::string_view body) { return detail::guarded(body, whatif); }
inline Response handle_health() { return {200, Json{{"status", "ok"}}}; }

/// Dispatch by method and path; the HTTP server is a thin shell over this.
inline Response route(std::string_view method, std::string_view path, std::string_view body) {
    if (path == "/api/ejab" && method == "POST") return handle_ejab(body);
    if (path == "/api/whatif" && method == "POST") return handle_whatif(body);
    if (path == "/api/health" && method == "GET") return handle_health();
    if (path == "/api/ejab" || path == "/api/whatif" || path == "/api/health") {
        return {405, error_json("method not allowed", "method")};
    }
    return {404, error_json("no such route", "path")};
}

}  // namespace ejab::api
