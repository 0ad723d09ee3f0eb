// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

// Regenerates the committed trace fixtures under tests/fixtures/. The good
// trace is a deterministic small run; the failing ones are derived from it
// by targeted surgery so each exercises one verifier failure mode.

#include "smrsim/certs.hpp"
#include "smrsim/messages.hpp"
#include "smrsim/simnet.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace smrsim;

namespace
{

bool writeFile(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        return false;
    out << content;
    return bool(out);
}

Scenario fixtureScenario()
{
    Scenario sc;
    sc.name = "fixture-goodcase";
    sc.params.n = 4;
    sc.params.f = 1;
    sc.params.delta = 10;
    sc.gst = 0;
    sc.horizon = 120;
    sc.policy = "max";
    sc.seed = 7;
    return sc;
}

// Rebuild a parsed trace record-for-record, letting `edit` adjust each
// record's fields before appending.
template <typename Edit>
TraceLog rebuild(const TraceLog& source, Edit&& edit)
{
    TraceLog log(source.meta());
    for (const TraceRecord& rec : source.records())
    {
        TraceRecord copy = rec;
        edit(copy);
        log.append(copy.t, copy.r, copy.ev, copy.kv);
    }
    return log;
}

std::string forgedVoteHex(const Params& p)
{
    GenesisBundle genesis = makeGenesis(p);
    Block fake;
    fake.parent = blockDigest(genesis.block);
    fake.height = 1;
    std::string tag = "forged";
    fake.txns.push_back(Bytes(tag.begin(), tag.end()));

    ProposalTuple tuple;
    tuple.block = fake;
    tuple.view = 1;
    tuple.leaderSig = makeSignature(p.leaderOf(1), tupleSignDigest(fake, 1));

    VoteMsg vote;
    vote.tuple = tuple;
    vote.voterSig = makeSignature(2, voteSignDigest(tuple));
    return toHex(serializeMessage(Message{vote}));
}

} // namespace

int main(int argc, char** argv)
{
    std::filesystem::path outDir = argc > 1 ? argv[1] : "tests/fixtures";
    std::error_code ec;
    std::filesystem::create_directories(outDir, ec);

    Scenario sc = fixtureScenario();
    TraceLog good = runScenario(sc, sc.seed);
    std::string goodText = good.render();

    // A verbatim good run: every check passes.
    if (!writeFile(outDir / "goodcase_small.trace", goodText))
        return 1;

    // Height-1 commit of replica 2 redirected to the height-0 block:
    // committed-height agreement and chain shape both break.
    Digest genesisDigest = blockDigest(makeGenesis(sc.params).block);
    bool done = false;
    TraceLog disagreement = rebuild(good, [&](TraceRecord& rec) {
        if (done || rec.ev != "commit" || rec.r != 2)
            return;
        for (auto& [k, v] : rec.kv)
            if (k == "h" && v != "1")
                return;
        for (auto& [k, v] : rec.kv)
            if (k == "d")
            {
                v = toHex(genesisDigest);
                done = true;
            }
    });
    if (!writeFile(outDir / "disagreement.trace", disagreement.render()))
        return 1;

    // A delivered vote carrying signatures no honest replica ever emitted:
    // the signature-isolation audit must flag it.
    TraceLog forged = rebuild(good, [](TraceRecord&) {});
    forged.append(sc.horizon, 1, "deliver", {{"src", "3"}, {"msg", forgedVoteHex(sc.params)}});
    if (!writeFile(outDir / "forged_signature.trace", forged.render()))
        return 1;

    // The same good trace without its end line: refused as incomplete.
    std::string truncated = goodText;
    std::size_t lastLine = truncated.rfind("# end");
    if (lastLine == std::string::npos)
        return 1;
    truncated.resize(lastLine);
    if (!writeFile(outDir / "incomplete.trace", truncated))
        return 1;

    // A trace naming an unknown digest algorithm: refused outright.
    std::string unknownHash = goodText;
    std::size_t hashPos = unknownHash.find("hash=sha-256");
    if (hashPos == std::string::npos)
        return 1;
    unknownHash.replace(hashPos, std::string("hash=sha-256").size(), "hash=crc32");
    if (!writeFile(outDir / "unknown_hash.trace", unknownHash))
        return 1;

    std::cout << "fixtures written to " << outDir.string() << "\n";
    return 0;
}
