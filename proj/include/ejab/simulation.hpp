#pragma once
// Monte-Carlo checks of eJAB's large-sample behaviour on three designs:
// pooled two-sample t, simple linear regression slope t, and one-way ANOVA F.
//
// Each replicate has its own RNG stream seeded from (seed, replicate index),
// so results do not depend on how replicates are split across threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ejab/csv.hpp"
#include "ejab/evidence.hpp"
#include "ejab/special_functions.hpp"

namespace ejab::sim {

enum class Family { TwoSampleT, LinearRegression, OneWayAnova };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::TwoSampleT: return "two-sample-t";
        case Family::LinearRegression: return "linear-regression";
        case Family::OneWayAnova: return "one-way-anova";
    }
    return "";
}

inline std::optional<Family> family_from_string(std::string_view s) {
    if (s == "two-sample-t" || s == "t") return Family::TwoSampleT;
    if (s == "linear-regression" || s == "lm") return Family::LinearRegression;
    if (s == "one-way-anova" || s == "anova") return Family::OneWayAnova;
    return std::nullopt;
}

/// Conventional "medium" effects: Cohen's d, standardized slope, Cohen's f.
inline double medium_effect(Family f) {
    switch (f) {
        case Family::TwoSampleT: return 0.5;
        case Family::LinearRegression: return 0.3;
        case Family::OneWayAnova: return 0.25;
    }
    return 0.0;
}

struct SimDesign {
    Family family = Family::TwoSampleT;
    double effect = 0.0;  // 0 under H0; the constant c when local_exponent is set
    int n = 100;          // total sample size
    int groups = 3;       // anova only
    std::optional<double> local_exponent;  // effect becomes c / n^kappa

    double realized_effect() const {
        return local_exponent ? effect / std::pow(static_cast<double>(n), *local_exponent) : effect;
    }
    int q() const { return family == Family::OneWayAnova ? groups - 1 : 1; }
};

inline void validate(const SimDesign& d) {
    if (d.n < 4) throw DomainError("simulation needs n >= 4");
    if (!std::isfinite(d.effect)) throw DomainError("effect must be finite");
    if (d.family == Family::OneWayAnova) {
        if (d.groups < 3) throw DomainError("anova needs at least 3 groups");
        if (d.n < 2 * d.groups) throw DomainError("anova needs at least 2 observations per group");
    }
    if (d.local_exponent && !(*d.local_exponent >= 0.0)) throw DomainError("local exponent must be >= 0");
}

struct Replicate {
    double statistic = 0.0;
    double p = 1.0;
    double ejab01 = 1.0;
    double dn = 0.0;
};

struct Quantiles {
    double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
};

struct SimResult {
    SimDesign design;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::vector<Replicate> replicates;
    Quantiles p, ejab01, dn;
};

/// -sqrt(n) p ln p, with the p -> 0 limit 0.
inline double dn_value(double p, double n) { return p > 0.0 ? dn_statistic(p, n) : 0.0; }

/// Sample quantile with linear interpolation between order statistics (R type 7).
inline double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline Quantiles summarize(const std::vector<double>& values) {
    return {quantile(values, 0.05), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75),
            quantile(values, 0.95)};
}

/// Stream seed for one replicate: splitmix64 over seed and index.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

inline double two_sample_t(const SimDesign& d, double effect, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    const int n1 = d.n / 2;
    const int n2 = d.n - n1;
    double s1 = 0, ss1 = 0, s2 = 0, ss2 = 0;
    for (int i = 0; i < n1; ++i) {
        const double x = noise(rng);
        s1 += x;
        ss1 += x * x;
    }
    for (int i = 0; i < n2; ++i) {
        const double x = effect + noise(rng);
        s2 += x;
        ss2 += x * x;
    }
    const double m1 = s1 / n1, m2 = s2 / n2;
    const double sse = (ss1 - n1 * m1 * m1) + (ss2 - n2 * m2 * m2);
    const double pooled = sse / (d.n - 2);
    return (m2 - m1) / std::sqrt(pooled * (1.0 / n1 + 1.0 / n2));
}

inline double regression_t(const SimDesign& d, double slope, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x(d.n), y(d.n);
    double sx = 0, sy = 0;
    for (int i = 0; i < d.n; ++i) {
        x[i] = noise(rng);
        y[i] = slope * x[i] + noise(rng);
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / d.n, my = sy / d.n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < d.n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double b = sxy / sxx;
    const double sse = std::max(syy - b * sxy, 0.0);
    const double se = std::sqrt(sse / (d.n - 2) / sxx);
    return b / se;
}

// cell means a * (j - (g - 1) / 2), so the sd of the means equals f
inline double anova_f(const SimDesign& d, double f, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    const int g = d.groups;
    const double spacing = f / std::sqrt((static_cast<double>(g) * g - 1.0) / 12.0);
    double grand = 0, between = 0, within = 0;
    std::vector<double> sums(g, 0.0);
    std::vector<int> sizes(g, d.n / g);
    for (int j = 0; j < d.n % g; ++j) ++sizes[j];
    for (int j = 0; j < g; ++j) {
        const double mean = spacing * (j - 0.5 * (g - 1));
        double s = 0, ss = 0;
        for (int i = 0; i < sizes[j]; ++i) {
            const double v = mean + noise(rng);
            s += v;
            ss += v * v;
        }
        sums[j] = s;
        grand += s;
        within += ss - s * s / sizes[j];
    }
    grand /= d.n;
    for (int j = 0; j < g; ++j) {
        const double m = sums[j] / sizes[j];
        between += sizes[j] * (m - grand) * (m - grand);
    }
    return (between / (g - 1)) / (within / (d.n - g));
}

}  // namespace detail

/// One dataset, one classical test, one eJAB.
inline Replicate run_replicate(const SimDesign& d, std::uint64_t seed, std::uint64_t index) {
    std::mt19937_64 rng(stream_seed(seed, index));
    const double effect = d.realized_effect();
    Replicate r;
    switch (d.family) {
        case Family::TwoSampleT:
            r.statistic = detail::two_sample_t(d, effect, rng);
            r.p = student_t_two_sided_p(r.statistic, d.n - 2);
            break;
        case Family::LinearRegression:
            r.statistic = detail::regression_t(d, effect, rng);
            r.p = student_t_two_sided_p(r.statistic, d.n - 2);
            break;
        case Family::OneWayAnova:
            r.statistic = detail::anova_f(d, effect, rng);
            r.p = f_upper_p(r.statistic, d.groups - 1, d.n - d.groups);
            break;
    }
    // an underflowed p is reported as the smallest normal double
    r.p = std::clamp(r.p, std::numeric_limits<double>::min(), 1.0);
    r.ejab01 = ejab01(EvidenceInput{r.p, static_cast<double>(d.n), d.q()});
    r.dn = dn_value(r.p, d.n);
    return r;
}

/// `threads` = 0 picks the hardware concurrency.
inline SimResult generate_and_test(const SimDesign& design, std::size_t reps, std::uint64_t seed,
                                   unsigned threads = 1) {
    validate(design);
    if (reps == 0) throw DomainError("need at least one replicate");
    SimResult out;
    out.design = design;
    out.replications = reps;
    out.seed = seed;
    out.replicates.resize(reps);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out.replicates[i] = run_replicate(design, seed, i);
    };
    if (threads <= 1) {
        work(0, reps);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (reps + threads - 1) / threads;
        for (std::size_t begin = 0; begin < reps; begin += chunk) pool.emplace_back(work, begin, std::min(reps, begin + chunk));
    }
    std::vector<double> p, e, dn;
    p.reserve(reps);
    e.reserve(reps);
    dn.reserve(reps);
    for (const auto& r : out.replicates) {
        p.push_back(r.p);
        e.push_back(r.ejab01);
        dn.push_back(r.dn);
    }
    out.p = summarize(p);
    out.ejab01 = summarize(e);
    out.dn = summarize(dn);
    return out;
}

/// Two-sample t with mean gap c / n^kappa at each n of the grid.
inline std::vector<SimResult> local_alternative_sweep(double c, double kappa, const std::vector<int>& n_grid,
                                                      std::size_t reps, std::uint64_t seed, unsigned threads = 1) {
    if (!(c >= 0.0)) throw DomainError("local alternative needs c >= 0");
    std::vector<SimResult> out;
    for (int n : n_grid) {
        SimDesign d;
        d.family = Family::TwoSampleT;
        d.effect = c;
        d.n = n;
        d.local_exponent = kappa;
        out.push_back(generate_and_test(d, reps, seed, threads));
    }
    return out;
}

/// Savage-Dickey ratio under the unit-information normal prior for a Wald
/// statistic z: sqrt(n) exp(-(n - 1) z^2 / (2 n)).
inline double conjugate_oracle_bf(double z, double n) {
    if (!(n >= 2.0)) throw DomainError("oracle needs n >= 2");
    return std::sqrt(n) * std::exp(-0.5 * (n - 1.0) / n * z * z);
}

/// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
inline double ks_uniform(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("KS of empty sample");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double u = std::clamp(values[i], 0.0, 1.0);
        d = std::max({d, (i + 1) / n - u, u - i / n});
    }
    return d;
}

/// Asymptotic 1% critical value of the one-sample KS distance.
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

inline std::vector<double> p_values(const SimResult& r) {
    std::vector<double> p;
    p.reserve(r.replicates.size());
    for (const auto& rep : r.replicates) p.push_back(rep.p);
    return p;
}

/// Share of replicates with eJAB01 below `bound`.
inline double fraction_below(const SimResult& r, double bound) {
    std::size_t count = 0;
    for (const auto& rep : r.replicates) count += rep.ejab01 < bound;
    return static_cast<double>(count) / static_cast<double>(r.replicates.size());
}

inline void write_replicates_csv(std::ostream& out, const std::vector<SimResult>& results) {
    CsvWriter csv(out);
    csv.row({"family", "n", "effect", "replicate", "statistic", "p", "ejab01", "dn"});
    for (const auto& res : results) {
        for (std::size_t i = 0; i < res.replicates.size(); ++i) {
            const auto& r = res.replicates[i];
            csv.row({std::string(to_string(res.design.family)), std::to_string(res.design.n),
                     format_number(res.design.realized_effect()), std::to_string(i), format_number(r.statistic),
                     format_number(r.p), format_number(r.ejab01), format_number(r.dn)});
        }
    }
}

inline void write_summary_csv(std::ostream& out, const std::vector<SimResult>& results) {
    CsvWriter csv(out);
    csv.row({"family", "n", "effect", "reps", "seed", "quantity", "q05", "q25", "q50", "q75", "q95"});
    for (const auto& res : results) {
        const std::pair<const char*, const Quantiles*> rows[] = {{"p", &res.p}, {"ejab01", &res.ejab01}, {"dn", &res.dn}};
        for (const auto& [name, q] : rows) {
            csv.row({std::string(to_string(res.design.family)), std::to_string(res.design.n),
                     format_number(res.design.realized_effect()), std::to_string(res.replications),
                     std::to_string(res.seed), name, format_number(q->q05), format_number(q->q25),
                     format_number(q->q50), format_number(q->q75), format_number(q->q95)});
        }
    }
}

/// Run metadata. Effect sizes are conventional benchmarks, not values from
/// any published design file, and say so.
inline nlohmann::ordered_json metadata(const std::vector<SimResult>& results) {
    nlohmann::ordered_json j;
    j["generator"] = "mt19937_64 per replicate, seeded by splitmix64(seed, index)";
    j["effects_are_conventional_benchmarks"] = true;
    j["medium_effects"] = {{"two-sample-t", medium_effect(Family::TwoSampleT)},
                           {"linear-regression", medium_effect(Family::LinearRegression)},
                           {"one-way-anova", medium_effect(Family::OneWayAnova)}};
    auto& runs = j["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json run;
        run["family"] = to_string(r.design.family);
        run["n"] = r.design.n;
        run["effect"] = r.design.effect;
        run["realized_effect"] = r.design.realized_effect();
        if (r.design.family == Family::OneWayAnova) run["groups"] = r.design.groups;
        if (r.design.local_exponent) run["kappa"] = *r.design.local_exponent;
        run["q"] = r.design.q();
        run["reps"] = r.replications;
        run["seed"] = r.seed;
        runs.push_back(run);
    }
    return j;
}

}  // namespace ejab::sim
