// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/checker.hpp"

#include "smrsim/simnet.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <string>
#include <vector>

using namespace smrsim;

namespace
{

Bytes asBytes(const std::string& s)
{
    return Bytes(s.begin(), s.end());
}

Scenario baseScenario(const std::string& name)
{
    Scenario sc;
    sc.name = name;
    sc.params.n = 4;
    sc.params.f = 1;
    sc.params.delta = 10;
    sc.gst = 0;
    sc.horizon = 120;
    sc.policy = "max";
    sc.seed = 7;
    return sc;
}

// Copy a trace record by record, letting `edit` tamper with each copy.
TraceLog rebuild(const TraceLog& source, const std::function<void(TraceRecord&)>& edit)
{
    TraceLog out(source.meta());
    for (TraceRecord rec : source.records())
    {
        edit(rec);
        out.append(rec.t, rec.r, rec.ev, rec.kv);
    }
    return out;
}

const std::string& verdictOf(const CheckReport& report, const std::string& name)
{
    const CheckResult* res = report.find(name);
    REQUIRE(res != nullptr);
    return res->verdict;
}

} // namespace

TEST_CASE("an honest good-case trace passes every applicable check")
{
    TraceLog trace = runScenario(baseScenario("checker-goodcase"), 7);
    CheckReport report = checkTrace(trace);

    CHECK(report.ok());
    CHECK(verdictOf(report, "trace-decode") == "pass");
    CHECK(verdictOf(report, "check_safety") == "pass");
    CHECK(verdictOf(report, "check_lemma1_lemma3") == "pass");
    // No timeout message ever circulates and no replica leaves view 1, so
    // the view-change audit has nothing to enumerate.
    CHECK(verdictOf(report, "check_lemma2") == "vacuous-pass");
    CHECK(verdictOf(report, "check_external_validity") == "pass");
    CHECK(verdictOf(report, "check_latency") == "pass");
    CHECK(verdictOf(report, "check_liveness") == "vacuous-pass");

    CHECK(report.stats.highestView == 1);
    CHECK(report.stats.viewChanges == 0);
    CHECK(report.stats.honestTimeouts == 0);
    CHECK(report.stats.records == trace.records().size());
    CHECK(report.stats.sendsByKind.at("propose") == 6);
    CHECK(report.stats.sendsByKind.count("vote") == 1);
    CHECK(report.stats.sendsByKind.count("status") == 1);
    CHECK(report.stats.sendsByKind.count("qc-forward") == 1);

    // Pipelined heights 1..4 commit in exactly two delay bounds; the
    // re-proposed bootstrap block commits early through carried
    // certificates.
    REQUIRE(report.stats.latencies.size() == 5); // heights 0..4
    for (const HeightLatency& hl : report.stats.latencies)
    {
        CAPTURE(hl.height);
        CHECK(hl.proposedAt == (2 * hl.height + 1) * 10);
        if (hl.height == 0)
        {
            CHECK(hl.ticks <= 20);
        }
        else
        {
            CHECK(hl.ticks == 20);
            CHECK(hl.rounds == 2.0);
        }
    }
}

TEST_CASE("a tampered commit digest fails the agreement check")
{
    TraceLog trace = runScenario(baseScenario("checker-tamper"), 7);
    std::string genesisDigest = toHex(blockDigest(makeGenesis(Params{}).block));

    bool tampered = false;
    TraceLog bad = rebuild(trace,
                           [&](TraceRecord& rec)
                           {
                               if (tampered || rec.ev != "commit" || rec.r != 2)
                                   return;
                               for (auto& [k, v] : rec.kv)
                                   if (k == "h" && v == "1")
                                   {
                                       for (auto& [k2, v2] : rec.kv)
                                           if (k2 == "d")
                                               v2 = genesisDigest;
                                       tampered = true;
                                   }
                           });
    REQUIRE(tampered);

    CheckReport report = checkTrace(bad);
    CHECK_FALSE(report.ok());
    CHECK(verdictOf(report, "check_safety") == "fail");
    CHECK_FALSE(report.find("check_safety")->details.empty());
}

TEST_CASE("a vote carrying unexplained honest signatures fails the isolation audit")
{
    TraceLog trace = runScenario(baseScenario("checker-forged"), 7);
    GenesisBundle gen = makeGenesis(Params{});

    // A vote by replica 2 for a block only a forger could have signed:
    // neither signature matches anything replica 1 or 2 ever sent.
    Block fake{blockDigest(gen.block), 1, Payload{asBytes("forged")}};
    ProposalTuple tuple{fake, 1, makeSignature(1, tupleSignDigest(fake, 1))};
    VoteMsg forged{tuple, makeSignature(2, voteSignDigest(tuple))};

    TraceLog bad = rebuild(trace, [](TraceRecord&) {});
    bad.append(trace.meta().horizon, 1, "deliver",
               {{"src", "3"}, {"msg", toHex(serializeMessage(Message{forged}))}});

    CheckReport report = checkTrace(bad);
    CHECK_FALSE(report.ok());
    CHECK(verdictOf(report, "check_safety") == "fail");
}

TEST_CASE("truncated and mislabeled traces are refused")
{
    TraceLog trace = runScenario(baseScenario("checker-refuse"), 7);
    std::string text = trace.render();

    SECTION("missing end line")
    {
        std::string cut = text.substr(0, text.rfind("# end"));
        std::string err;
        CHECK_FALSE(TraceLog::parse(cut, err).has_value());
        CHECK(err == "incomplete trace");
    }
    SECTION("unknown digest algorithm")
    {
        std::string swapped = text;
        auto pos = swapped.find("hash=sha-256");
        REQUIRE(pos != std::string::npos);
        swapped.replace(pos, 12, "hash=crc32\t\t");
        std::string err;
        CHECK_FALSE(TraceLog::parse(swapped, err).has_value());
        CHECK(err.rfind("unknown hash algorithm", 0) == 0);
    }
    SECTION("wrong banner")
    {
        std::string err;
        CHECK_FALSE(TraceLog::parse("# other format\n", err).has_value());
        CHECK(err == "not a smrsim v1 trace");
    }
}

TEST_CASE("the view-change lock audit steps aside beyond its enumeration size")
{
    Scenario sc = baseScenario("checker-nine");
    sc.params.n = 9;
    sc.params.f = 2;
    TraceLog trace = runScenario(sc, 7);
    CheckReport report = checkTrace(trace);
    CHECK(report.ok());
    CHECK(verdictOf(report, "check_lemma2") == "not-applicable");
    CHECK(verdictOf(report, "check_safety") == "pass");
    CHECK(verdictOf(report, "check_latency") == "pass");
}

TEST_CASE("latency and liveness checks know their scope")
{
    Scenario sc = baseScenario("checker-async");
    sc.policy = "random";
    sc.gst = 500;
    sc.horizon = 200; // stabilization never happens inside the run
    TraceLog trace = runScenario(sc, 21);
    CheckReport report = checkTrace(trace);

    CHECK(verdictOf(report, "check_latency") == "not-applicable");
    CHECK(verdictOf(report, "check_liveness") == "vacuous-pass");
    CHECK(verdictOf(report, "check_safety") == "pass");
    CHECK(report.ok());
}

TEST_CASE("a silent leader's view change passes the lock audit with real work")
{
    Scenario sc = baseScenario("checker-silent");
    sc.horizon = 300;
    sc.adversary.corrupt = {1};
    sc.adversary.strategy = "silent-leader";
    TraceLog trace = runScenario(sc, 7);
    CheckReport report = checkTrace(trace);

    CHECK(report.ok());
    // Honest replicas entered view 2, so the certificate-before-entry rule
    // was actually exercised.
    CHECK(verdictOf(report, "check_lemma2") == "pass");
    CHECK(report.stats.highestView == 2);
    CHECK(report.stats.viewChanges == 1);
    CHECK(report.stats.honestTimeouts == 3);
}

TEST_CASE("an equivocating leader is tolerated without a safety violation")
{
    Scenario sc = baseScenario("checker-equivocation");
    sc.horizon = 400;
    sc.adversary.corrupt = {1};
    sc.adversary.strategy = "equivocating-leader";
    TraceLog trace = runScenario(sc, 7);
    CheckReport report = checkTrace(trace);

    CHECK(verdictOf(report, "check_safety") == "pass");
    CHECK(verdictOf(report, "check_lemma1_lemma3") != "fail");
    CHECK(verdictOf(report, "check_lemma2") != "fail");
    CHECK(verdictOf(report, "check_external_validity") != "fail");
}

TEST_CASE("report helpers expose verdicts uniformly")
{
    TraceLog trace = runScenario(baseScenario("checker-helpers"), 7);
    CheckReport report = checkTrace(trace);
    CHECK(report.find("no-such-check") == nullptr);
    REQUIRE(report.checks.size() == 7);
    CHECK(report.checks.front().name == "trace-decode");
    CHECK(report.checks.back().name == "check_liveness");
}
