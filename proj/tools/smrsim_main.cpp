// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/checker.hpp"
#include "smrsim/fuzz.hpp"
#include "smrsim/simnet.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace
{

using nlohmann::json;

std::optional<std::string> readFile(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool writeFile(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        return false;
    out << content;
    return bool(out);
}

json checksToJson(const smrsim::CheckReport& report)
{
    json arr = json::array();
    for (const smrsim::CheckResult& c : report.checks)
        arr.push_back(json{{"name", c.name}, {"verdict", c.verdict}, {"details", c.details}});
    return arr;
}

// One report shape for both the run path and the offline check path: built
// from the trace and its verification alone, so the two paths emit
// byte-identical documents for the same trace.
json reportToJson(const smrsim::TraceLog& trace, const smrsim::CheckReport& report)
{
    const smrsim::TraceMeta& meta = trace.meta();
    json latencies = json::array();
    for (const smrsim::HeightLatency& hl : report.stats.latencies)
        latencies.push_back(json{{"height", hl.height},
                                 {"proposed_at", hl.proposedAt},
                                 {"committed_at", hl.committedAt},
                                 {"ticks", hl.ticks},
                                 {"delta_units", hl.rounds},
                                 {"rounds", hl.rounds}});
    return json{
        {"scenario", meta.scenario},
        {"params",
         {{"n", meta.params.n},
          {"f", meta.params.f},
          {"delta", meta.params.delta},
          {"validity", smrsim::validityRuleName(meta.params.validity)},
          {"mutation", smrsim::mutationName(meta.params.mutation)}}},
        {"gst", meta.gst},
        {"horizon", meta.horizon},
        {"policy", meta.policy},
        {"seed", meta.seed},
        {"adversary", {{"strategy", meta.strategy}, {"corrupt", meta.corrupt}}},
        {"trace", {{"records", report.stats.records}, {"digest", smrsim::toHex(trace.digest())}}},
        {"stats",
         {{"view_changes", report.stats.viewChanges},
          {"highest_view", report.stats.highestView},
          {"honest_timeouts", report.stats.honestTimeouts},
          {"sends_by_kind", report.stats.sendsByKind},
          {"latencies", latencies}}},
        {"checks", checksToJson(report)},
        {"ok", report.ok()},
    };
}

void printSummary(const smrsim::TraceLog& trace, const smrsim::CheckReport& report)
{
    const smrsim::TraceMeta& meta = trace.meta();
    std::cout << "scenario " << meta.scenario << ": n=" << meta.params.n << " f=" << meta.params.f
              << " delta=" << meta.params.delta << " gst=" << meta.gst
              << " horizon=" << meta.horizon << " policy=" << meta.policy << " seed=" << meta.seed
              << "\n";
    std::cout << "trace: " << report.stats.records << " records, digest "
              << smrsim::toHex(trace.digest()) << "\n";
    for (const smrsim::CheckResult& c : report.checks)
    {
        std::cout << c.name << ": " << c.verdict << "\n";
        if (c.verdict == "fail")
            for (const std::string& d : c.details)
                std::cout << "  " << d << "\n";
    }
    if (!report.stats.latencies.empty())
    {
        double worst = 0;
        for (const smrsim::HeightLatency& hl : report.stats.latencies)
            worst = std::max(worst, hl.rounds);
        std::cout << "committed heights with full coverage: " << report.stats.latencies.size()
                  << ", worst latency " << worst << " rounds\n";
    }
    std::cout << (report.ok() ? "ok" : "CHECKS FAILED") << "\n";
}

int cmdRun(const std::string& scenarioPath, std::optional<uint64_t> seedOverride,
           const std::string& traceOut, const std::string& reportOut)
{
    std::string err;
    std::optional<smrsim::Scenario> sc = smrsim::loadScenario(scenarioPath, err);
    if (!sc)
    {
        std::cerr << "error: " << err << "\n";
        return 2;
    }
    uint64_t seed = seedOverride.value_or(sc->seed);
    smrsim::TraceLog trace = smrsim::runScenario(*sc, seed);
    smrsim::CheckReport report = smrsim::checkTrace(trace);
    if (!traceOut.empty() && !writeFile(traceOut, trace.render()))
    {
        std::cerr << "error: cannot write " << traceOut << "\n";
        return 2;
    }
    if (!reportOut.empty() && !writeFile(reportOut, reportToJson(trace, report).dump(2) + "\n"))
    {
        std::cerr << "error: cannot write " << reportOut << "\n";
        return 2;
    }
    printSummary(trace, report);
    return report.ok() ? 0 : 1;
}

int cmdFuzz(const std::string& scenarioPath, uint64_t runsOverride,
            std::optional<uint64_t> seedBaseOverride, const std::string& reportOut)
{
    std::string err;
    std::optional<smrsim::Scenario> sc = smrsim::loadScenario(scenarioPath, err);
    if (!sc)
    {
        std::cerr << "error: " << err << "\n";
        return 2;
    }
    uint64_t runs = runsOverride != 0 ? runsOverride : sc->fuzz.runs;
    uint64_t seedBase = seedBaseOverride.value_or(sc->seed);
    smrsim::FuzzSummary summary = smrsim::fuzzScenario(*sc, runs, seedBase);

    json j{{"template", sc->name},
           {"runs", summary.runs},
           {"failures", summary.failures},
           {"runs_by_strategy", summary.runsByStrategy},
           {"failures_by_check", summary.failuresByCheck},
           {"ok", summary.ok()}};
    if (summary.first)
    {
        const smrsim::FuzzFailure& f = *summary.first;
        j["first_failure"] = json{{"index", f.index},
                                  {"derivation_seed", f.derivationSeed},
                                  {"sim_seed", f.simSeed},
                                  {"strategy", f.strategy},
                                  {"corrupt", f.corrupt},
                                  {"gst", f.gst},
                                  {"failed_checks", f.failedChecks},
                                  {"first_detail", f.firstDetail}};
    }
    else
    {
        j["first_failure"] = nullptr;
    }
    if (!reportOut.empty() && !writeFile(reportOut, j.dump(2) + "\n"))
    {
        std::cerr << "error: cannot write " << reportOut << "\n";
        return 2;
    }

    std::cout << "fuzz " << sc->name << ": " << summary.runs << " runs, " << summary.failures
              << " failures\n";
    for (const auto& [name, count] : summary.runsByStrategy)
        std::cout << "  strategy " << name << ": " << count << " runs\n";
    if (summary.first)
        std::cout << "first failure: run " << summary.first->index << " strategy "
                  << summary.first->strategy << " checks";
    if (summary.first)
    {
        for (const std::string& name : summary.first->failedChecks)
            std::cout << " " << name;
        std::cout << "\n  " << summary.first->firstDetail << "\n";
    }
    std::cout << (summary.ok() ? "ok" : "FUZZ FAILURES") << "\n";
    return summary.ok() ? 0 : 1;
}

int cmdCheck(const std::string& tracePath, const std::string& reportOut)
{
    std::optional<std::string> text = readFile(tracePath);
    if (!text)
    {
        std::cerr << "error: cannot read " << tracePath << "\n";
        return 2;
    }
    std::string err;
    std::optional<smrsim::TraceLog> trace = smrsim::TraceLog::parse(*text, err);
    if (!trace)
    {
        std::cerr << "error: " << err << "\n";
        return 2;
    }
    smrsim::CheckReport report = smrsim::checkTrace(*trace);
    if (!reportOut.empty() && !writeFile(reportOut, reportToJson(*trace, report).dump(2) + "\n"))
    {
        std::cerr << "error: cannot write " << reportOut << "\n";
        return 2;
    }
    printSummary(*trace, report);
    return report.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"chained BFT state-machine-replication simulator and trace verifier"};
    app.require_subcommand(1);

    std::string scenarioPath;
    std::string tracePath;
    std::string traceOut;
    std::string reportOut;
    uint64_t seed = 0;
    bool seedSet = false;
    uint64_t runs = 0;
    uint64_t seedBase = 0;
    bool seedBaseSet = false;

    CLI::App* run = app.add_subcommand("run", "execute one scenario and verify its trace");
    run->add_option("scenario", scenarioPath, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario's simulation seed")
        ->each([&](const std::string&) { seedSet = true; });
    run->add_option("--trace-out", traceOut, "write the rendered trace to this file");
    run->add_option("--report-out", reportOut, "write the JSON report to this file");

    CLI::App* fuzz = app.add_subcommand("fuzz", "run randomized adversarial exploration");
    fuzz->add_option("scenario", scenarioPath, "fuzz template scenario file")->required();
    fuzz->add_option("--runs", runs, "number of runs (default: the template's fuzz runs)");
    fuzz->add_option("--seed-base", seedBase, "seed for run 0; run i uses seed-base + i")
        ->each([&](const std::string&) { seedBaseSet = true; });
    fuzz->add_option("--report-out", reportOut, "write the JSON summary to this file");

    CLI::App* check = app.add_subcommand("check", "verify a previously recorded trace");
    check->add_option("trace", tracePath, "trace file to verify")->required();
    check->add_option("--report-out", reportOut, "write the JSON report to this file");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (run->parsed())
            return cmdRun(scenarioPath, seedSet ? std::optional<uint64_t>(seed) : std::nullopt,
                          traceOut, reportOut);
        if (fuzz->parsed())
            return cmdFuzz(scenarioPath,
                           runs, seedBaseSet ? std::optional<uint64_t>(seedBase) : std::nullopt,
                           reportOut);
        if (check->parsed())
            return cmdCheck(tracePath, reportOut);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
