// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/certs.hpp"

#include <algorithm>
#include <string>

namespace smrsim
{

// --- Quorum certificates ---------------------------------------------------

void serialize(ByteWriter& w, const QuorumCert& qc)
{
    w.u8(kTagQuorumCert);
    serialize(w, qc.tuple);
    w.u32(static_cast<uint32_t>(qc.votes.size()));
    for (const Signature& s : qc.votes)
        serialize(w, s);
}

QuorumCert deserializeQuorumCert(ByteReader& r)
{
    if (r.u8() != kTagQuorumCert)
        throw WireError("bad quorum-cert tag");
    QuorumCert qc;
    qc.tuple = deserializeProposalTuple(r);
    uint32_t count = r.u32();
    qc.votes.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
        qc.votes.push_back(deserializeSignature(r));
    return qc;
}

Digest qcDigest(const QuorumCert& qc)
{
    ByteWriter w;
    serialize(w, qc);
    return sha256(w.data());
}

// Canonical signature lists are strictly increasing by signer; this both
// guarantees distinctness and gives every certificate a unique byte form
// for a given vote set.
template <typename T, typename GetSigner>
static bool strictlyIncreasingSigners(const std::vector<T>& xs, const Params& p,
                                      GetSigner signerOf)
{
    ReplicaId prev = 0;
    for (const T& x : xs)
    {
        ReplicaId s = signerOf(x);
        if (!p.validId(s) || s <= prev)
            return false;
        prev = s;
    }
    return true;
}

bool validateQc(const Params& p, const QuorumCert& qc)
{
    const ProposalTuple& t = qc.tuple;
    if (!isExternallyValid(p, t.block.txns))
        return false;
    if (t.leaderSig.signer != p.leaderOf(t.view))
        return false;
    if (!verifySignature(t.leaderSig, tupleSignDigest(t.block, t.view)))
        return false;
    if (qc.votes.size() < p.quorum())
        return false;
    if (!strictlyIncreasingSigners(qc.votes, p, [](const Signature& s) { return s.signer; }))
        return false;
    Digest vd = voteSignDigest(t);
    for (const Signature& s : qc.votes)
        if (!verifySignature(s, vd))
            return false;
    return true;
}

std::optional<QuorumCert> formQc(const Params& p, const ProposalTuple& tuple,
                                 const std::vector<Signature>& votes)
{
    Digest vd = voteSignDigest(tuple);
    std::vector<Signature> kept;
    for (const Signature& s : votes)
    {
        if (!p.validId(s.signer) || !verifySignature(s, vd))
            continue;
        bool dup = false;
        for (const Signature& k : kept)
            dup = dup || k.signer == s.signer;
        if (!dup)
            kept.push_back(s);
    }
    if (kept.size() < p.quorum())
        return std::nullopt;
    std::sort(kept.begin(), kept.end(),
              [](const Signature& a, const Signature& b) { return a.signer < b.signer; });
    return QuorumCert{tuple, std::move(kept)};
}

// --- Timeout messages and certificates -------------------------------------

static void serializeTimeoutBody(ByteWriter& w, View view,
                                 const std::optional<ProposalTuple>& inner)
{
    w.u64(view);
    w.u8(inner.has_value() ? 1 : 0);
    if (inner)
        serialize(w, *inner);
}

void serialize(ByteWriter& w, const TimeoutMsg& t)
{
    w.u8(kTagMsgTimeout);
    serializeTimeoutBody(w, t.view, t.inner);
    serialize(w, t.senderSig);
}

TimeoutMsg deserializeTimeoutMsg(ByteReader& r)
{
    if (r.u8() != kTagMsgTimeout)
        throw WireError("bad timeout tag");
    TimeoutMsg t;
    t.view = r.u64();
    uint8_t has = r.u8();
    if (has > 1)
        throw WireError("bad optional flag");
    if (has)
        t.inner = deserializeProposalTuple(r);
    t.senderSig = deserializeSignature(r);
    return t;
}

Digest timeoutSignDigest(View view, const std::optional<ProposalTuple>& inner)
{
    ByteWriter w;
    w.u8(kTagTimeoutSign);
    serializeTimeoutBody(w, view, inner);
    return sha256(w.data());
}

void serialize(ByteWriter& w, const TimeoutCert& tc)
{
    w.u8(kTagTimeoutCert);
    w.u64(tc.view);
    w.u32(static_cast<uint32_t>(tc.entries.size()));
    for (const TimeoutMsg& t : tc.entries)
        serialize(w, t);
}

TimeoutCert deserializeTimeoutCert(ByteReader& r)
{
    if (r.u8() != kTagTimeoutCert)
        throw WireError("bad timeout-cert tag");
    TimeoutCert tc;
    tc.view = r.u64();
    uint32_t count = r.u32();
    tc.entries.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
        tc.entries.push_back(deserializeTimeoutMsg(r));
    return tc;
}

Digest tcDigest(const TimeoutCert& tc)
{
    ByteWriter w;
    serialize(w, tc);
    return sha256(w.data());
}

bool timeoutEntryValid(const Params& p, View view, const TimeoutMsg& t)
{
    if (t.view != view)
        return false;
    if (!p.validId(t.senderSig.signer))
        return false;
    if (!verifySignature(t.senderSig, timeoutSignDigest(t.view, t.inner)))
        return false;
    if (t.inner)
    {
        if (t.inner->view != view)
            return false;
        if (!isExternallyValid(p, t.inner->block.txns))
            return false;
        if (t.inner->leaderSig.signer != p.leaderOf(view))
            return false;
        if (!verifySignature(t.inner->leaderSig, tupleSignDigest(t.inner->block, t.inner->view)))
            return false;
    }
    return true;
}

bool validateTc(const Params& p, const TimeoutCert& tc)
{
    if (tc.entries.size() < p.quorum())
        return false;
    if (!strictlyIncreasingSigners(tc.entries, p,
                                   [](const TimeoutMsg& t) { return t.senderSig.signer; }))
        return false;
    for (const TimeoutMsg& t : tc.entries)
        if (!timeoutEntryValid(p, tc.view, t))
            return false;
    return true;
}

std::optional<TimeoutCert> formTc(const Params& p, View view,
                                  const std::vector<TimeoutMsg>& timeouts)
{
    std::vector<TimeoutMsg> kept;
    for (const TimeoutMsg& t : timeouts)
    {
        if (!timeoutEntryValid(p, view, t))
            continue;
        bool dup = false;
        for (const TimeoutMsg& k : kept)
            dup = dup || k.senderSig.signer == t.senderSig.signer;
        if (!dup)
            kept.push_back(t);
    }
    if (kept.size() < p.quorum())
        return std::nullopt;
    std::sort(kept.begin(), kept.end(), [](const TimeoutMsg& a, const TimeoutMsg& b) {
        return a.senderSig.signer < b.senderSig.signer;
    });
    return TimeoutCert{view, std::move(kept)};
}

// --- Lock predicates -------------------------------------------------------

// The blocks carried inside a certificate's reports are part of the
// evidence; fold them into a working copy of the store so chain walks can
// use them.
static BlockStore augmentWithReports(const BlockStore& store, const TimeoutCert& tc)
{
    BlockStore s = store;
    for (const TimeoutMsg& t : tc.entries)
        if (t.inner)
            s.put(t.inner->block);
    return s;
}

struct LockTally
{
    uint32_t support{0};          // reports equal to B or directly extending B
    uint32_t nonLeaderEntries{0}; // all entries from senders other than the leader
    bool conflict{false};         // some report provably or unprovably conflicts with B
};

static LockTally tallyFor(const Params& p, const BlockStore& augmented, const TimeoutCert& tc,
                          const Block& b)
{
    LockTally tally;
    ReplicaId leader = p.leaderOf(tc.view);
    Digest db = blockDigest(b);
    for (const TimeoutMsg& t : tc.entries)
    {
        if (t.senderSig.signer != leader)
            tally.nonLeaderEntries++;
        if (!t.inner)
            continue;
        const Block& rb = t.inner->block;
        if (blockDigest(rb) == db || directlyExtends(rb, b))
        {
            tally.support++;
        }
        else
        {
            ChainRelation rel = relate(augmented, rb, b);
            // Unresolvable ancestry counts as a conflict: a lock must be
            // provable from the certificate itself.
            if (rel == ChainRelation::conflicting || rel == ChainRelation::unknown)
                tally.conflict = true;
        }
    }
    return tally;
}

static bool locksWith(const Params& p, const BlockStore& augmented, const TimeoutCert& tc,
                      const Block& b)
{
    LockTally tally = tallyFor(p, augmented, tc, b);
    bool cond1 = tally.support >= p.lockSupportCompat() && !tally.conflict;
    bool leaderAbsent = tally.nonLeaderEntries == tc.entries.size();
    bool cond2 = leaderAbsent && tally.support >= p.lockSupportNoLeader();
    return cond1 || cond2;
}

bool tcLocks(const Params& p, const BlockStore& store, const TimeoutCert& tc, const Block& b)
{
    BlockStore augmented = augmentWithReports(store, tc);
    return locksWith(p, augmented, tc, b);
}

std::vector<Block> lockedBlocks(const Params& p, const BlockStore& store, const TimeoutCert& tc)
{
    BlockStore augmented = augmentWithReports(store, tc);

    // Candidates: every reported block, plus every reported block's parent
    // when it is resolvable (a "directly extends" supporter names its
    // parent as the locked block).
    std::map<Digest, Block> candidates;
    for (const TimeoutMsg& t : tc.entries)
    {
        if (!t.inner)
            continue;
        const Block& rb = t.inner->block;
        candidates.emplace(blockDigest(rb), rb);
        if (const Block* parent = augmented.get(rb.parent))
            candidates.emplace(rb.parent, *parent);
    }

    std::vector<Block> locked;
    for (const auto& [d, blk] : candidates)
        if (locksWith(p, augmented, tc, blk))
            locked.push_back(blk);

    std::sort(locked.begin(), locked.end(), [](const Block& a, const Block& b) {
        if (a.height != b.height)
            return a.height > b.height;
        return blockDigest(a) > blockDigest(b);
    });
    return locked;
}

std::optional<Block> lockedBlock(const Params& p, const BlockStore& store, const TimeoutCert& tc)
{
    std::vector<Block> locked = lockedBlocks(p, store, tc);
    if (locked.empty())
        return std::nullopt;
    return locked.front();
}

// --- Genesis ---------------------------------------------------------------

GenesisBundle makeGenesis(const Params& p)
{
    GenesisBundle g;
    g.block.parent = zeroDigest();
    g.block.height = 0;
    std::string tag = "genesis";
    g.block.txns.push_back(Bytes(tag.begin(), tag.end()));

    ReplicaId leader0 = p.leaderOf(0); // replica n
    g.tuple.block = g.block;
    g.tuple.view = 0;
    g.tuple.leaderSig = makeSignature(leader0, tupleSignDigest(g.block, 0));

    uint32_t q = p.n - p.f; // pristine quorum regardless of mutation
    Digest vd = voteSignDigest(g.tuple);
    for (ReplicaId r = 1; r <= q; ++r)
        g.qc.votes.push_back(makeSignature(r, vd));
    g.qc.tuple = g.tuple;

    g.tc.view = 0;
    for (ReplicaId r = 1; r <= q; ++r)
    {
        TimeoutMsg t;
        t.view = 0;
        t.inner = g.tuple;
        t.senderSig = makeSignature(r, timeoutSignDigest(0, t.inner));
        g.tc.entries.push_back(t);
    }
    return g;
}

} // namespace smrsim
