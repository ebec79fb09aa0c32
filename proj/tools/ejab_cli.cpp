#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ejab/cli.hpp"
#include "ejab/server.hpp"

namespace {

int serve(const std::string& host, int port) {
    httplib::Server server;
    ejab::api::install_routes(server);
    if (port == 0) {
        port = server.bind_to_any_port(host);
        if (port < 0) {
            std::cerr << "error: cannot bind " << host << "\n";
            return ejab::cli::kInputError;
        }
    } else if (!server.bind_to_port(host, port)) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return ejab::cli::kInputError;
    }
    std::cerr << "listening on http://" << host << ":" << port << "\n";
    return server.listen_after_bind() ? ejab::cli::kOk : ejab::cli::kInputError;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace ejab::cli;
    CLI::App app{"eJAB: approximate objective Bayes factors from p-values"};
    app.require_subcommand(1);

    CalcOptions calc;
    auto* c = app.add_subcommand("calc", "eJAB01 for one result");
    c->add_option("--p", calc.p, "p-value in (0, 1]");
    c->add_option("--n", calc.n, "sample size");
    c->add_option("--q", calc.q, "test dimension");
    c->add_option("--family", calc.family, "test family (ANOVA, Htest, 2-ttest, glm, ... or free text)");
    c->add_option("--values", calc.values, "per-group participant counts")->delimiter(',');
    c->add_option("--groups,-I", calc.groups, "number of groups");
    c->add_option("--alpha", calc.alpha, "significance level for the candidate flag");
    c->add_flag("--json", calc.json, "print JSON");

    IngestOptions ingest;
    auto* i = app.add_subcommand("ingest", "registry JSON export(s) -> analysis records (JSONL)");
    i->add_option("inputs", ingest.inputs, "export files")->required();
    i->add_option("-o,--output", ingest.output, "records JSONL (- for stdout)");
    i->add_option("--drops", ingest.drops, "drop log CSV (default <output>.drops.csv)");

    ScanOptions scan;
    auto* s = app.add_subcommand("scan", "catalog candidate type I errors");
    s->add_option("records", scan.records, "records JSONL")->required();
    s->add_option("--alpha", scan.alpha, "significance level");
    s->add_option("-o,--output", scan.output, "catalog CSV");

    SweepOptions sweep;
    auto* w = app.add_subcommand("sweep", "alpha or K threshold sweep");
    w->add_option("records", sweep.records, "records JSONL")->required();
    w->add_option("--mode", sweep.mode, "alpha or k")->check(CLI::IsMember({"alpha", "k"}));
    w->add_option("--alpha-grid", sweep.alpha_grid, "alpha values, ascending")->delimiter(',');
    w->add_option("--k-grid", sweep.k_grid, "K values, ascending")->delimiter(',');
    w->add_option("--alpha", sweep.alpha, "fixed alpha for the K sweep");
    w->add_flag("--complete-cases", sweep.complete_cases, "drop '<' p-values and p = .05");
    w->add_option("-o,--output", sweep.output, "curve CSV");
    w->add_option("--sidecar", sweep.sidecar, "JSON sidecar (default <output>.json)");

    SimulateOptions simulate;
    auto* m = app.add_subcommand("simulate", "Monte-Carlo replicates for one design");
    m->add_option("--family", simulate.family, "two-sample-t, linear-regression or one-way-anova");
    m->add_option("--effect", simulate.effect, "effect size (c when --kappa is set)");
    m->add_flag("--medium", simulate.medium, "use the conventional medium effect");
    m->add_option("--n", simulate.n, "total sample size(s)")->delimiter(',');
    m->add_option("--groups", simulate.groups, "anova groups");
    m->add_option("--kappa", simulate.kappa, "local alternative exponent");
    m->add_option("--reps", simulate.reps, "replicates per n");
    m->add_option("--seed", simulate.seed, "seed");
    m->add_option("--threads", simulate.threads, "worker threads (0 = all cores)");
    m->add_option("-o,--output", simulate.output, "per-replicate CSV");
    m->add_option("--summary", simulate.summary, "summary quantiles CSV");
    m->add_option("--metadata", simulate.metadata, "run metadata JSON");

    EstimateOptions estimate;
    auto* e = app.add_subcommand("estimate", "hierarchical share of weak evidence among significant results");
    e->add_option("records", estimate.records, "records JSONL")->required();
    e->add_option("--draws", estimate.draws, "posterior draws");
    e->add_option("--seed", estimate.seed, "seed");
    e->add_flag("--unweighted", estimate.unweighted, "average studies equally");
    e->add_option("--alpha", estimate.alpha, "significance level");
    e->add_option("--threshold", estimate.threshold, "eJAB01 threshold");
    e->add_flag("--complete-cases", estimate.complete_cases, "drop '<' p-values and p = .05");

    GroupOptions groups;
    auto* g = app.add_subcommand("groups", "medians of ln eJAB01 and ln p by group");
    g->add_option("records", groups.records, "records JSONL")->required();
    g->add_option("--by", groups.by, "phase, mesh or outcomeType");
    g->add_option("-o,--output", groups.output, "CSV");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* v = app.add_subcommand("serve", "HTTP JSON API");
    v->add_option("--host", host, "bind address");
    v->add_option("--port", port, "port (0 picks a free one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kUsageError;
    }

    if (c->parsed()) return cmd_calc(calc, std::cout, std::cerr);
    if (i->parsed()) return cmd_ingest(ingest, std::cerr, std::cerr);
    if (s->parsed()) return cmd_scan(scan, std::cerr, std::cerr);
    if (w->parsed()) return cmd_sweep(sweep, std::cerr, std::cerr);
    if (m->parsed()) return cmd_simulate(simulate, std::cerr, std::cerr);
    if (e->parsed()) return cmd_estimate(estimate, std::cout, std::cerr);
    if (g->parsed()) return cmd_groups(groups, std::cerr);
    if (v->parsed()) return serve(host, port);
    return kUsageError;
}
