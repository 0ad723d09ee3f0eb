// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/fuzz.hpp"

#include "smrsim/adversary.hpp"
#include "smrsim/checker.hpp"
#include "smrsim/simnet.hpp"

#include <algorithm>
#include <random>

namespace smrsim
{

namespace
{

// The check names whose failure fails a fuzz run. Latency and liveness are
// reported by the scenario runner but not gated here: adversarial schedules
// may legitimately stall progress without breaking agreement.
const char* const kGatedChecks[] = {"trace-decode", "check_safety", "check_lemma1_lemma3",
                                    "check_lemma2", "check_external_validity"};

struct RunOutcome
{
    std::string strategy{"none"};
    std::vector<ReplicaId> corrupt;
    Tick gst{0};
    uint64_t simSeed{0};
    std::vector<std::string> failedChecks;
    std::string firstDetail;
};

Scenario deriveScenario(const Scenario& base, uint64_t derivationSeed, RunOutcome& out)
{
    std::mt19937_64 rng(derivationSeed);
    const std::vector<std::string>& pool =
        base.fuzz.strategies.empty() ? strategyCatalog() : base.fuzz.strategies;

    Scenario sc = base;
    sc.policy = "random";
    sc.adversary = AdversarySpec{};
    if (!pool.empty() && rng() % 8 != 0)
    {
        sc.adversary.strategy = pool[rng() % pool.size()];
        uint32_t count = 1 + static_cast<uint32_t>(rng() % base.params.f);
        std::vector<ReplicaId> ids(base.params.n);
        for (ReplicaId r = 1; r <= base.params.n; ++r)
            ids[r - 1] = r;
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(count);
        std::sort(ids.begin(), ids.end());
        sc.adversary.corrupt = ids;
    }
    sc.gst = base.fuzz.maxGst == 0 ? 0 : rng() % (base.fuzz.maxGst + 1);
    sc.seed = rng();

    out.strategy = sc.adversary.strategy;
    out.corrupt = sc.adversary.corrupt;
    out.gst = sc.gst;
    out.simSeed = sc.seed;
    return sc;
}

RunOutcome runOne(const Scenario& base, uint64_t derivationSeed)
{
    RunOutcome out;
    Scenario sc = deriveScenario(base, derivationSeed, out);
    try
    {
        TraceLog trace = runScenario(sc, sc.seed);
        CheckReport report = checkTrace(trace);
        for (const char* name : kGatedChecks)
        {
            const CheckResult* res = report.find(name);
            if (res && res->verdict == "fail")
            {
                out.failedChecks.push_back(name);
                if (out.firstDetail.empty() && !res->details.empty())
                    out.firstDetail = res->details.front();
            }
        }
    }
    catch (const std::exception& e)
    {
        out.failedChecks.push_back("run-crashed");
        out.firstDetail = e.what();
    }
    return out;
}

} // namespace

FuzzSummary fuzzScenario(const Scenario& base, uint64_t runs, uint64_t seedBase)
{
    std::vector<RunOutcome> outcomes(runs);

#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(runs); ++i)
        outcomes[static_cast<uint64_t>(i)] = runOne(base, seedBase + static_cast<uint64_t>(i));

    FuzzSummary summary;
    summary.runs = runs;
    for (uint64_t i = 0; i < runs; ++i)
    {
        const RunOutcome& out = outcomes[i];
        summary.runsByStrategy[out.strategy]++;
        if (out.failedChecks.empty())
            continue;
        summary.failures++;
        for (const std::string& name : out.failedChecks)
            summary.failuresByCheck[name]++;
        if (!summary.first)
        {
            FuzzFailure f;
            f.index = i;
            f.derivationSeed = seedBase + i;
            f.simSeed = out.simSeed;
            f.strategy = out.strategy;
            f.corrupt = out.corrupt;
            f.gst = out.gst;
            f.failedChecks = out.failedChecks;
            f.firstDetail = out.firstDetail;
            summary.first = f;
        }
    }
    return summary;
}

} // namespace smrsim
