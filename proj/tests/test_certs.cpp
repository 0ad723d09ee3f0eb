// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/certs.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

using namespace smrsim;

namespace
{

Bytes asBytes(const std::string& s)
{
    return Bytes(s.begin(), s.end());
}

Block makeBlock(const Digest& parent, Height h, const std::string& tag)
{
    return Block{parent, h, Payload{asBytes(tag)}};
}

ProposalTuple tupleFor(const Params& p, const Block& b, View v)
{
    return ProposalTuple{b, v, makeSignature(p.leaderOf(v), tupleSignDigest(b, v))};
}

Signature voteBy(ReplicaId r, const ProposalTuple& t)
{
    return makeSignature(r, voteSignDigest(t));
}

TimeoutMsg timeoutBy(ReplicaId r, View v, std::optional<ProposalTuple> inner)
{
    Digest over = timeoutSignDigest(v, inner);
    return TimeoutMsg{v, std::move(inner), makeSignature(r, over)};
}

// Independent lock oracle. Classifies every certificate entry against the
// candidate into an explicit record list and decides the two lock
// conditions with set-style queries over that list, instead of the
// library's single-pass tally. Reported blocks resolve through a local
// store copy augmented with the certificate's own reports, mirroring the
// documented contract that a lock must be provable from the certificate
// itself.
struct OracleEntry
{
    bool fromLeader{false};
    bool supports{false};
    bool clashes{false};
};

bool oracleLocks(const Params& p, const BlockStore& store, const TimeoutCert& tc, const Block& b)
{
    BlockStore augmented = store;
    for (const TimeoutMsg& t : tc.entries)
    {
        if (t.inner)
        {
            augmented.put(t.inner->block);
        }
    }

    std::vector<OracleEntry> entries;
    for (const TimeoutMsg& t : tc.entries)
    {
        OracleEntry e;
        e.fromLeader = t.senderSig.signer == p.leaderOf(tc.view);
        if (t.inner)
        {
            ChainRelation rel = relate(augmented, t.inner->block, b);
            e.supports = rel == ChainRelation::equal ||
                         (rel == ChainRelation::firstExtendsSecond &&
                          directlyExtends(t.inner->block, b));
            // A report above the candidate that does not *directly* extend
            // it lends no support; only provable compatibility avoids the
            // conflict flag.
            e.clashes = !e.supports && rel != ChainRelation::secondExtendsFirst &&
                        rel != ChainRelation::firstExtendsSecond;
        }
        entries.push_back(e);
    }

    auto supporters = static_cast<uint32_t>(
        std::count_if(entries.begin(), entries.end(), [](const OracleEntry& e) {
            return e.supports;
        }));
    bool anyClash = std::any_of(entries.begin(), entries.end(),
                                [](const OracleEntry& e) { return e.clashes; });
    bool leaderAbsent = std::none_of(entries.begin(), entries.end(),
                                     [](const OracleEntry& e) { return e.fromLeader; });

    bool cond1 = supporters >= p.lockSupportCompat() && !anyClash;
    bool cond2 = leaderAbsent && supporters >= p.lockSupportNoLeader();
    return cond1 || cond2;
}

std::vector<Block> oracleLockedBlocks(const Params& p, const BlockStore& store,
                                      const TimeoutCert& tc)
{
    BlockStore augmented = store;
    for (const TimeoutMsg& t : tc.entries)
    {
        if (t.inner)
        {
            augmented.put(t.inner->block);
        }
    }
    std::map<Digest, Block> candidates;
    for (const TimeoutMsg& t : tc.entries)
    {
        if (!t.inner)
        {
            continue;
        }
        candidates.emplace(blockDigest(t.inner->block), t.inner->block);
        if (const Block* parent = augmented.get(t.inner->block.parent))
        {
            candidates.emplace(blockDigest(*parent), *parent);
        }
    }
    std::vector<Block> out;
    for (const auto& [dg, blk] : candidates)
    {
        if (oracleLocks(p, store, tc, blk))
        {
            out.push_back(blk);
        }
    }
    std::sort(out.begin(), out.end(), [](const Block& a, const Block& b) {
        if (a.height != b.height)
        {
            return a.height > b.height;
        }
        return blockDigest(a) > blockDigest(b);
    });
    return out;
}

} // namespace

TEST_CASE("certificate ranks order by view then height")
{
    CHECK(CertRank{1, 1} < CertRank{1, 2});
    CHECK(CertRank{1, 9} < CertRank{2, 1}); // view dominates
    CHECK(CertRank{2, 3} == CertRank{2, 3});
    CHECK(CertRank{3, 1} > CertRank{2, 9});

    Params p;
    GenesisBundle gen = makeGenesis(p);
    CHECK(rankOf(gen.qc) == CertRank{0, 0});
}

TEST_CASE("quorum certificates form from exactly the valid distinct votes")
{
    Params p; // n=4, f=1, quorum 3
    GenesisBundle gen = makeGenesis(p);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    ProposalTuple tuple = tupleFor(p, b1, 1);

    std::vector<Signature> votes{voteBy(3, tuple), voteBy(1, tuple), voteBy(2, tuple)};
    auto qc = formQc(p, tuple, votes);
    REQUIRE(qc.has_value());
    CHECK(validateQc(p, *qc));
    REQUIRE(qc->votes.size() == 3);
    CHECK(qc->votes[0].signer == 1); // sorted by signer on output
    CHECK(qc->votes[1].signer == 2);
    CHECK(qc->votes[2].signer == 3);
    CHECK(qc->view() == 1);
    CHECK(qc->height() == 1);

    SECTION("duplicate signers collapse to one vote")
    {
        std::vector<Signature> dup{voteBy(1, tuple), voteBy(1, tuple), voteBy(2, tuple)};
        CHECK_FALSE(formQc(p, tuple, dup).has_value());
    }
    SECTION("votes over a different tuple are discarded")
    {
        ProposalTuple other = tupleFor(p, makeBlock(blockDigest(gen.block), 1, "other"), 1);
        std::vector<Signature> mixed{voteBy(1, tuple), voteBy(2, tuple), voteBy(3, other)};
        CHECK_FALSE(formQc(p, tuple, mixed).has_value());
    }
    SECTION("votes from out-of-range ids are discarded")
    {
        std::vector<Signature> bad{voteBy(1, tuple), voteBy(2, tuple),
                                   makeSignature(0, voteSignDigest(tuple)),
                                   makeSignature(9, voteSignDigest(tuple))};
        CHECK_FALSE(formQc(p, tuple, bad).has_value());
    }
    SECTION("surplus valid votes are all retained")
    {
        std::vector<Signature> four{voteBy(4, tuple), voteBy(2, tuple), voteBy(1, tuple),
                                    voteBy(3, tuple)};
        auto full = formQc(p, tuple, four);
        REQUIRE(full.has_value());
        CHECK(full->votes.size() == 4);
        CHECK(validateQc(p, *full));
    }
}

TEST_CASE("quorum certificate validation rejects every tampering")
{
    Params p;
    GenesisBundle gen = makeGenesis(p);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    ProposalTuple tuple = tupleFor(p, b1, 1);
    auto qc = formQc(p, tuple, {voteBy(1, tuple), voteBy(2, tuple), voteBy(3, tuple)});
    REQUIRE(qc.has_value());

    SECTION("wrong leader on the tuple")
    {
        QuorumCert bad = *qc;
        bad.tuple.leaderSig = makeSignature(2, tupleSignDigest(b1, 1));
        CHECK_FALSE(validateQc(p, bad));
    }
    SECTION("leader signature over a different block")
    {
        QuorumCert bad = *qc;
        bad.tuple.leaderSig =
            makeSignature(1, tupleSignDigest(makeBlock(blockDigest(gen.block), 1, "x"), 1));
        CHECK_FALSE(validateQc(p, bad));
    }
    SECTION("dropped vote falls under quorum")
    {
        QuorumCert bad = *qc;
        bad.votes.pop_back();
        CHECK_FALSE(validateQc(p, bad));
    }
    SECTION("duplicated signer padding is rejected")
    {
        QuorumCert bad = *qc;
        bad.votes.back() = bad.votes.front();
        CHECK_FALSE(validateQc(p, bad));
    }
    SECTION("unsorted votes are rejected")
    {
        QuorumCert bad = *qc;
        std::swap(bad.votes[0], bad.votes[2]);
        CHECK_FALSE(validateQc(p, bad));
    }
    SECTION("empty payload fails external validity")
    {
        Block empty{blockDigest(gen.block), 1, Payload{}};
        ProposalTuple et = tupleFor(p, empty, 1);
        auto eqc = formQc(p, et, {voteBy(1, et), voteBy(2, et), voteBy(3, et)});
        REQUIRE(eqc.has_value()); // formation does not re-check validity
        CHECK_FALSE(validateQc(p, *eqc));
        p.validity = ValidityRule::acceptAll;
        CHECK(validateQc(p, *eqc));
    }
}

TEST_CASE("lowered-quorum fault accepts certificates one vote short")
{
    Params pristine; // quorum 3
    Params mutated = pristine;
    mutated.mutation = Mutation::lowerQuorum; // quorum 2

    GenesisBundle gen = makeGenesis(pristine);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    ProposalTuple tuple = tupleFor(pristine, b1, 1);
    std::vector<Signature> two{voteBy(1, tuple), voteBy(2, tuple)};

    CHECK_FALSE(formQc(pristine, tuple, two).has_value());
    auto thin = formQc(mutated, tuple, two);
    REQUIRE(thin.has_value());
    CHECK(validateQc(mutated, *thin));
    CHECK_FALSE(validateQc(pristine, *thin));
}

TEST_CASE("timeout certificates form from valid distinct-sender entries")
{
    Params p;
    GenesisBundle gen = makeGenesis(p);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    ProposalTuple tuple = tupleFor(p, b1, 1);

    TimeoutMsg t2 = timeoutBy(2, 1, tuple);
    TimeoutMsg t3 = timeoutBy(3, 1, std::nullopt);
    TimeoutMsg t4 = timeoutBy(4, 1, tuple);

    auto tc = formTc(p, 1, {t4, t2, t3});
    REQUIRE(tc.has_value());
    CHECK(validateTc(p, *tc));
    REQUIRE(tc->entries.size() == 3);
    CHECK(tc->entries[0].senderSig.signer == 2); // sorted by sender
    CHECK(tc->entries[1].senderSig.signer == 3);
    CHECK(tc->entries[2].senderSig.signer == 4);

    SECTION("wrong-view entries are filtered")
    {
        TimeoutMsg stale = timeoutBy(1, 2, std::nullopt);
        CHECK_FALSE(formTc(p, 1, {t2, t3, stale}).has_value());
    }
    SECTION("duplicate senders are filtered")
    {
        CHECK_FALSE(formTc(p, 1, {t2, t2, t3}).has_value());
    }
    SECTION("a forged sender signature is filtered")
    {
        TimeoutMsg forged = t4;
        forged.senderSig = makeSignature(4, sha256(asBytes("not-the-preimage")));
        CHECK_FALSE(formTc(p, 1, {t2, t3, forged}).has_value());
    }
    SECTION("an inner tuple from the wrong view is filtered")
    {
        ProposalTuple crossView = tupleFor(p, b1, 2);
        TimeoutMsg cross{1, crossView, makeSignature(4, timeoutSignDigest(1, crossView))};
        CHECK_FALSE(formTc(p, 1, {t2, t3, cross}).has_value());
    }
    SECTION("an inner tuple signed by a non-leader is filtered")
    {
        ProposalTuple fake = tuple;
        fake.leaderSig = makeSignature(3, tupleSignDigest(b1, 1)); // 3 is not view 1's leader
        TimeoutMsg bad{1, fake, makeSignature(4, timeoutSignDigest(1, fake))};
        CHECK_FALSE(formTc(p, 1, {t2, t3, bad}).has_value());
    }
    SECTION("validation rejects unsorted or duplicated entries")
    {
        TimeoutCert bad = *tc;
        std::swap(bad.entries[0], bad.entries[2]);
        CHECK_FALSE(validateTc(p, bad));
        bad = *tc;
        bad.entries[1] = bad.entries[0];
        CHECK_FALSE(validateTc(p, bad));
        bad = *tc;
        bad.entries.pop_back();
        CHECK_FALSE(validateTc(p, bad));
    }
}

TEST_CASE("a unanimous-report certificate locks the reported block")
{
    // View-1 leader is replica 1 and is absent; two reports for the same
    // block plus one empty report lock it under both conditions.
    Params p;
    GenesisBundle gen = makeGenesis(p);
    BlockStore store;
    store.put(gen.block);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    ProposalTuple tuple = tupleFor(p, b1, 1);

    auto tc = formTc(p, 1, {timeoutBy(2, 1, tuple), timeoutBy(3, 1, tuple),
                            timeoutBy(4, 1, std::nullopt)});
    REQUIRE(tc.has_value());

    CHECK(tcLocks(p, store, *tc, b1));
    // The b1 reports directly extend genesis, so the parent locks too.
    CHECK(tcLocks(p, store, *tc, gen.block));

    auto top = lockedBlock(p, store, *tc);
    REQUIRE(top.has_value());
    CHECK(*top == b1);
    auto all = lockedBlocks(p, store, *tc);
    REQUIRE(all.size() == 2); // b1 plus its resolvable parent (genesis)
    CHECK(all[0] == b1);
    CHECK(all[1] == gen.block);
}

TEST_CASE("a conflicting report blocks the compatible-majority condition")
{
    // Leader replica 1 reports nothing; replicas 2 and 3 split between two
    // sibling blocks. With the leader present no condition fires for either
    // sibling — but both reports directly extend the shared parent, which
    // conflicts with nothing, so the split still locks genesis.
    Params p;
    GenesisBundle gen = makeGenesis(p);
    BlockStore store;
    store.put(gen.block);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    Block b1p = makeBlock(blockDigest(gen.block), 1, "b1-prime");

    auto tc = formTc(p, 1, {timeoutBy(1, 1, std::nullopt), timeoutBy(2, 1, tupleFor(p, b1, 1)),
                            timeoutBy(3, 1, tupleFor(p, b1p, 1))});
    REQUIRE(tc.has_value());

    CHECK_FALSE(tcLocks(p, store, *tc, b1));
    CHECK_FALSE(tcLocks(p, store, *tc, b1p));
    auto all = lockedBlocks(p, store, *tc);
    REQUIRE(all.size() == 1);
    CHECK(all[0] == gen.block);
}

TEST_CASE("a direct-extension report supports both child and parent")
{
    // One report for b2 (child of b1), one for b1, one empty: b2 gets one
    // supporter, b1 gets two (b2 directly extends it), nothing conflicts,
    // and both lock. The child ranks first.
    Params p;
    GenesisBundle gen = makeGenesis(p);
    BlockStore store;
    store.put(gen.block);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    Block b2 = makeBlock(blockDigest(b1), 2, "b2");

    auto tc = formTc(p, 1, {timeoutBy(2, 1, tupleFor(p, b2, 1)),
                            timeoutBy(3, 1, tupleFor(p, b1, 1)),
                            timeoutBy(4, 1, std::nullopt)});
    REQUIRE(tc.has_value());

    CHECK(tcLocks(p, store, *tc, b2));
    CHECK(tcLocks(p, store, *tc, b1));
    auto all = lockedBlocks(p, store, *tc);
    REQUIRE(all.size() >= 2);
    CHECK(all[0] == b2); // highest locked block wins
    CHECK(all[1] == b1);
    auto top = lockedBlock(p, store, *tc);
    REQUIRE(top.has_value());
    CHECK(*top == b2);
}

TEST_CASE("the leaderless condition locks through a conflicting report")
{
    // All three senders exclude the leader; two report b1, one reports a
    // sibling. The compatible-majority condition is blocked by the
    // conflict, but the leaderless condition still locks b1 with two
    // supporters. The lone sibling supporter stays below both thresholds.
    Params p; // 2f = 2
    GenesisBundle gen = makeGenesis(p);
    BlockStore store;
    store.put(gen.block);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    Block b1p = makeBlock(blockDigest(gen.block), 1, "b1-prime");

    auto tc = formTc(p, 1, {timeoutBy(2, 1, tupleFor(p, b1, 1)),
                            timeoutBy(3, 1, tupleFor(p, b1, 1)),
                            timeoutBy(4, 1, tupleFor(p, b1p, 1))});
    REQUIRE(tc.has_value());

    CHECK(tcLocks(p, store, *tc, b1));
    CHECK_FALSE(tcLocks(p, store, *tc, b1p));
    auto top = lockedBlock(p, store, *tc);
    REQUIRE(top.has_value());
    CHECK(*top == b1);
}

TEST_CASE("a lone uncontradicted report meets the compatible threshold at n=4")
{
    // Only the view leader reports a block; everyone else reports nothing.
    // With n=4, f=1 the compatible-majority threshold n-3f is 1, so the
    // single report locks as long as nothing conflicts. This is a property
    // of the rule itself: at this size a lock can rest on one report.
    Params p;
    GenesisBundle gen = makeGenesis(p);
    BlockStore store;
    store.put(gen.block);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "solo");

    auto tc = formTc(p, 1, {timeoutBy(1, 1, tupleFor(p, b1, 1)), timeoutBy(3, 1, std::nullopt),
                            timeoutBy(4, 1, std::nullopt)});
    REQUIRE(tc.has_value());

    CHECK(tcLocks(p, store, *tc, b1));
    auto top = lockedBlock(p, store, *tc);
    REQUIRE(top.has_value());
    CHECK(*top == b1);
}

TEST_CASE("unresolvable ancestry counts as a conflict, never as support")
{
    // Replica 3 reports a block whose ancestry cannot be resolved from the
    // store or the certificate. Its relation to every candidate is unknown,
    // which blocks the compatible-majority condition; with the leader
    // present the leaderless condition is unavailable, so nothing locks.
    Params p;
    GenesisBundle gen = makeGenesis(p);
    BlockStore store;
    store.put(gen.block);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    Block phantom = makeBlock(sha256(asBytes("no-such-parent")), 3, "floating");

    auto tc = formTc(p, 1, {timeoutBy(1, 1, std::nullopt), timeoutBy(2, 1, tupleFor(p, b1, 1)),
                            timeoutBy(3, 1, tupleFor(p, phantom, 1))});
    REQUIRE(tc.has_value());

    CHECK_FALSE(tcLocks(p, store, *tc, b1));
    CHECK_FALSE(tcLocks(p, store, *tc, phantom));
    CHECK(lockedBlocks(p, store, *tc).empty());
}

TEST_CASE("lowered lock support locks both sides of a split")
{
    // Leader-absent certificate with a one-one split and one empty report.
    // Pristine thresholds lock nothing; the lowered leaderless threshold
    // locks both conflicting siblings at once, the safety hole the fault
    // checks must surface.
    Params pristine;
    Params mutated = pristine;
    mutated.mutation = Mutation::lowerLockSupport;

    GenesisBundle gen = makeGenesis(pristine);
    BlockStore store;
    store.put(gen.block);
    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    Block b1p = makeBlock(blockDigest(gen.block), 1, "b1-prime");

    auto tc = formTc(pristine, 1,
                     {timeoutBy(2, 1, tupleFor(pristine, b1, 1)),
                      timeoutBy(3, 1, tupleFor(pristine, b1p, 1)),
                      timeoutBy(4, 1, std::nullopt)});
    REQUIRE(tc.has_value());

    CHECK_FALSE(tcLocks(pristine, store, *tc, b1));
    CHECK_FALSE(tcLocks(pristine, store, *tc, b1p));
    CHECK(tcLocks(mutated, store, *tc, b1));
    CHECK(tcLocks(mutated, store, *tc, b1p));

    auto both = lockedBlocks(mutated, store, *tc);
    std::vector<Block> expect{b1, b1p};
    std::sort(expect.begin(), expect.end(), [](const Block& a, const Block& b) {
        return blockDigest(a) > blockDigest(b); // equal heights: digest decides
    });
    REQUIRE(both.size() == 3); // the two siblings plus their shared locked parent
    CHECK(both[0] == expect[0]);
    CHECK(both[1] == expect[1]);
    CHECK(both[2] == gen.block);
}

TEST_CASE("the genesis certificate locks the genesis block")
{
    Params p;
    GenesisBundle gen = makeGenesis(p);
    BlockStore store;
    store.put(gen.block);

    CHECK(tcLocks(p, store, gen.tc, gen.block));
    auto top = lockedBlock(p, store, gen.tc);
    REQUIRE(top.has_value());
    CHECK(*top == gen.block);
}

TEST_CASE("lock predicates agree with the subset-classification oracle")
{
    // Exhaustive sweep: every sender subset of size >= quorum, every
    // per-sender report choice out of {none, b1, sibling, child-of-b1},
    // checked against the oracle for five candidate blocks and for the full
    // locked-block listing.
    Params p;
    GenesisBundle gen = makeGenesis(p);
    BlockStore store;
    store.put(gen.block);

    Block b1 = makeBlock(blockDigest(gen.block), 1, "b1");
    Block b1p = makeBlock(blockDigest(gen.block), 1, "b1-prime");
    Block b2 = makeBlock(blockDigest(b1), 2, "b2");
    Block stranger = makeBlock(sha256(asBytes("elsewhere")), 2, "stranger");

    std::vector<std::optional<ProposalTuple>> choices{
        std::nullopt, tupleFor(p, b1, 1), tupleFor(p, b1p, 1), tupleFor(p, b2, 1)};
    const std::vector<std::vector<ReplicaId>> senderSets{
        {1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}, {1, 2, 3, 4}};
    const Block* const candidates[] = {&gen.block, &b1, &b1p, &b2, &stranger};

    uint64_t checked = 0;
    for (const auto& senders : senderSets)
    {
        std::vector<std::size_t> pick(senders.size(), 0);
        while (true)
        {
            std::vector<TimeoutMsg> entries;
            for (std::size_t i = 0; i < senders.size(); ++i)
            {
                entries.push_back(timeoutBy(senders[i], 1, choices[pick[i]]));
            }
            TimeoutCert tc{1, entries};
            REQUIRE(validateTc(p, tc));

            for (const Block* cand : candidates)
            {
                bool expect = oracleLocks(p, store, tc, *cand);
                if (tcLocks(p, store, tc, *cand) != expect)
                {
                    CAPTURE(toHex(blockDigest(*cand)), pick, senders);
                    REQUIRE(tcLocks(p, store, tc, *cand) == expect);
                }
                ++checked;
            }
            {
                std::vector<Block> got = lockedBlocks(p, store, tc);
                std::vector<Block> expect = oracleLockedBlocks(p, store, tc);
                if (got != expect)
                {
                    CAPTURE(pick, senders);
                    REQUIRE(got == expect);
                }
            }

            std::size_t i = 0;
            for (; i < pick.size(); ++i)
            {
                if (++pick[i] < choices.size())
                {
                    break;
                }
                pick[i] = 0;
            }
            if (i == pick.size())
            {
                break;
            }
        }
    }
    CHECK(checked == (4 * 64 + 256) * 5); // 512 certificates, 5 candidates each
}
