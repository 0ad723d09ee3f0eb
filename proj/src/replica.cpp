// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/replica.hpp"

#include <algorithm>
#include <cassert>

namespace smrsim
{

namespace
{

bool sameBlock(const Block& a, const Block& b)
{
    return blockDigest(a) == blockDigest(b);
}

bool sameTuple(const ProposalTuple& a, const ProposalTuple& b)
{
    return a.view == b.view && sameBlock(a.block, b.block) && a.leaderSig == b.leaderSig;
}

// Lexicographic rank of a lock-bearing timeout certificate; used both when
// adopting a certificate and when selecting among reported ones.
struct LockRank
{
    View view;
    Height height;
    Digest digest;

    friend bool operator<(const LockRank& a, const LockRank& b)
    {
        if (a.view != b.view)
            return a.view < b.view;
        if (a.height != b.height)
            return a.height < b.height;
        return a.digest < b.digest;
    }
};

LockRank rankOfLock(const TimeoutCert& tc, const Block& lock)
{
    return LockRank{tc.view, lock.height, tcDigest(tc)};
}

} // namespace

Replica::Replica(ReplicaId id, Params params, GenesisBundle genesis, PayloadSchedule schedule)
    : mId(id), mParams(params), mGenesis(std::move(genesis)), mSchedule(std::move(schedule)),
      mHighQc(mGenesis.qc), mHighTc(mGenesis.tc), mHighTcLock(mGenesis.block)
{
    mStore.put(mGenesis.block);
    rememberCert(mGenesis.qc);
}

std::vector<ReplicaId> Replica::allReplicas() const
{
    std::vector<ReplicaId> out;
    for (ReplicaId r = 1; r <= mParams.n; ++r)
        out.push_back(r);
    return out;
}

std::vector<ReplicaId> Replica::allOthers() const
{
    std::vector<ReplicaId> out;
    for (ReplicaId r = 1; r <= mParams.n; ++r)
        if (r != mId)
            out.push_back(r);
    return out;
}

// --- certificate bookkeeping -------------------------------------------------

void Replica::rememberCert(const QuorumCert& qc)
{
    mCerts[blockDigest(qc.tuple.block)].emplace(qc.view(), qc);
}

const QuorumCert* Replica::certFor(const Digest& block, View view) const
{
    auto it = mCerts.find(block);
    if (it == mCerts.end())
        return nullptr;
    auto jt = it->second.find(view);
    return jt == it->second.end() ? nullptr : &jt->second;
}

const QuorumCert* Replica::bestCertFor(const Digest& block) const
{
    auto it = mCerts.find(block);
    if (it == mCerts.end() || it->second.empty())
        return nullptr;
    return &it->second.rbegin()->second;
}

// --- locks -------------------------------------------------------------------

std::optional<Block> Replica::distinguishedLock(const TimeoutCert& tc) const
{
    return lockedBlock(mParams, mStore, tc);
}

void Replica::maybeAdoptTc(const TimeoutCert& tc)
{
    auto lock = distinguishedLock(tc);
    if (!lock)
        return;
    if (rankOfLock(mHighTc, mHighTcLock) < rankOfLock(tc, *lock))
    {
        mHighTc = tc;
        mHighTcLock = *lock;
    }
}

const QuorumCert* Replica::parentCertForLock(const Block& lock) const
{
    // The genesis block stands as its own parent: reporting or re-proposing it
    // is backed by a certificate for the block itself.
    if (lock.height == 0)
        return bestCertFor(blockDigest(lock));
    return bestCertFor(lock.parent);
}

bool Replica::qcCertifiesParentOf(const QuorumCert& qc, const Block& b) const
{
    if (b.height == 0)
        return sameBlock(qc.tuple.block, b);
    return blockDigest(qc.tuple.block) == b.parent && qc.height() + 1 == b.height;
}

// --- lifecycle ---------------------------------------------------------------

std::vector<Action> Replica::onStart(Tick now)
{
    std::vector<Action> out;
    enterView(now, 1, out);
    return out;
}

Tick Replica::progressDeadline() const
{
    auto c = static_cast<Tick>(mCertifiedHeightsThisView.size());
    return mViewEntryTime + (2 * (c + 1) + 2) * mParams.delta;
}

void Replica::enterView(Tick now, View v, std::vector<Action>& out)
{
    mCurrentView = v;
    mViewEntryTime = now;
    mCertifiedHeightsThisView.clear();
    out.push_back(EnterViewAction{v});

    // Report our highest adopted timeout certificate to the new leader,
    // together with a best-effort certificate for its locked block's parent.
    const QuorumCert* parentQc = parentCertForLock(mHighTcLock);
    StatusMsg status;
    status.prevView = v - 1;
    status.parentQc = parentQc ? *parentQc : mGenesis.qc;
    status.highTc = mHighTc;
    status.senderSig =
        makeSignature(mId, statusSignDigest(status.prevView, status.parentQc, status.highTc));
    out.push_back(SendAction{{mParams.leaderOf(v)}, Message{status}});

    out.push_back(SetTimerAction{v, progressDeadline()});

    // Pools for views below v-1 can no longer influence behaviour.
    for (auto it = mTimeoutPools.begin(); it != mTimeoutPools.end();)
        it = (it->first + 1 < v) ? mTimeoutPools.erase(it) : std::next(it);
    for (auto it = mStatusPools.begin(); it != mStatusPools.end();)
        it = (it->first + 1 < v) ? mStatusPools.erase(it) : std::next(it);

    tryFormQcs(now, out);
    if (mParams.leaderOf(v) == mId)
        evaluateFirstProposal(now, out);

    auto buffered = mProposalBuffer.find(v);
    if (buffered != mProposalBuffer.end())
    {
        auto msgs = std::move(buffered->second);
        mProposalBuffer.erase(buffered);
        for (const auto& m : msgs)
            handlePropose(now, m, out);
    }
    for (auto it = mProposalBuffer.begin(); it != mProposalBuffer.end();)
        it = (it->first <= v) ? mProposalBuffer.erase(it) : std::next(it);
}

std::vector<Action> Replica::onTimer(Tick now, View view)
{
    std::vector<Action> out;
    if (view != mCurrentView || mTimedOut.count(view) != 0)
        return out;
    Tick due = progressDeadline();
    if (now < due)
    {
        // Progress since this timer was armed moved the deadline; re-arm.
        out.push_back(SetTimerAction{view, due});
        return out;
    }
    emitOwnTimeout(now, view, out);
    return out;
}

void Replica::emitOwnTimeout(Tick now, View v, std::vector<Action>& out)
{
    (void)now;
    if (mTimedOut.count(v) != 0)
        return;
    mTimedOut.insert(v);
    TimeoutMsg msg;
    msg.view = v;
    auto voted = mHighestVoted.find(v);
    if (voted != mHighestVoted.end())
        msg.inner = voted->second;
    msg.senderSig = makeSignature(mId, timeoutSignDigest(msg.view, msg.inner));
    out.push_back(TimedOutAction{v});
    out.push_back(SendAction{allReplicas(), Message{msg}});
}

// --- message dispatch --------------------------------------------------------

std::vector<Action> Replica::onMessage(Tick now, ReplicaId src, const Message& m)
{
    (void)src; // authentication is by the signatures carried inside messages
    std::vector<Action> out;
    std::visit(
        [&](const auto& msg)
        {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, ProposeMsg>)
                handlePropose(now, msg, out);
            else if constexpr (std::is_same_v<T, VoteMsg>)
                handleVote(now, msg, out);
            else if constexpr (std::is_same_v<T, TimeoutMsg>)
                handleTimeout(now, msg, out);
            else if constexpr (std::is_same_v<T, StatusMsg>)
                handleStatus(now, msg, out);
            else if constexpr (std::is_same_v<T, QcForwardMsg>)
            {
                if (validateQc(mParams, msg.qc))
                    ingestQc(now, msg.qc, out);
            }
            else if constexpr (std::is_same_v<T, TimeoutForwardMsg>)
            {
                for (const auto& t : msg.timeouts)
                    handleTimeout(now, t, out);
            }
        },
        m);
    return out;
}

// --- certificates and commits ------------------------------------------------

void Replica::ingestQc(Tick now, const QuorumCert& qc, std::vector<Action>& out)
{
    mStore.put(qc.tuple.block);
    rememberCert(qc);
    if (rankOf(mHighQc) < rankOf(qc))
        mHighQc = qc;
    if (qc.view() == mCurrentView)
        mCertifiedHeightsThisView.insert(qc.height());
    commitViaQc(qc, out);
    if (mParams.leaderOf(mCurrentView) == mId)
    {
        if (mFirstProposalSent.count(mCurrentView) != 0)
            proposeNextIfReady(now, qc, out);
        else
            evaluateFirstProposal(now, out); // a certificate may corroborate a lock
    }
}

void Replica::commitViaQc(const QuorumCert& qc, std::vector<Action>& out)
{
    const Block& head = qc.tuple.block;
    if (!mCommitted.empty() && head.height <= mCommitted.back().height)
        return; // at or below the committed tip: nothing new to append
    // Walk ancestors down to the first uncommitted height; defer the commit
    // when the chain cannot yet be resolved from the local store. A walked
    // segment whose bottom does not attach to the tip is still recorded: the
    // resulting disagreement is exactly what the checkers look for.
    Height stopHeight = mCommitted.empty() ? 0 : mCommitted.back().height + 1;
    std::vector<Block> segment;
    Block cur = head;
    while (true)
    {
        segment.push_back(cur);
        if (cur.height <= stopHeight)
            break;
        auto parent = mStore.get(cur.parent);
        if (!parent)
            return;
        cur = *parent;
    }
    std::reverse(segment.begin(), segment.end());
    for (const auto& b : segment)
    {
        if (!mCommitted.empty() && b.height <= mCommitted.back().height)
            continue;
        mCommitted.push_back(b);
        out.push_back(CommitAction{b, sameBlock(b, head), qc.view()});
    }
}

void Replica::tryFormQcs(Tick now, std::vector<Action>& out)
{
    for (auto& [digest, pool] : mVotePools)
    {
        if (pool.formed || pool.votes.size() < mParams.quorum())
            continue;
        std::vector<Signature> votes;
        for (const auto& [id, sig] : pool.votes)
            votes.push_back(sig);
        auto qc = formQc(mParams, pool.tuple, votes);
        if (!qc)
            continue;
        pool.formed = true;
        out.push_back(QcFormedAction{*qc});
        if (qc->view() == mCurrentView)
            out.push_back(SendAction{allOthers(), Message{QcForwardMsg{*qc}}});
        ingestQc(now, *qc, out);
    }
}

void Replica::handleVote(Tick now, const VoteMsg& m, std::vector<Action>& out)
{
    const auto& tuple = m.tuple;
    if (!mParams.validId(m.voterSig.signer))
        return;
    if (!verifySignature(tuple.leaderSig, tupleSignDigest(tuple.block, tuple.view)) ||
        tuple.leaderSig.signer != mParams.leaderOf(tuple.view))
        return;
    if (!verifySignature(m.voterSig, voteSignDigest(tuple)))
        return;
    if (!isExternallyValid(mParams, tuple.block.txns))
        return;
    mStore.put(tuple.block);
    auto& pool = mVotePools[voteSignDigest(tuple)];
    if (pool.votes.empty())
        pool.tuple = tuple;
    pool.votes.emplace(m.voterSig.signer, m.voterSig);
    tryFormQcs(now, out);
}

// --- proposals ---------------------------------------------------------------

void Replica::handlePropose(Tick now, const ProposeMsg& m, std::vector<Action>& out)
{
    const auto& tuple = m.tuple;
    if (tuple.view == 0)
        return;
    ReplicaId leader = mParams.leaderOf(tuple.view);
    if (tuple.leaderSig.signer != leader ||
        !verifySignature(tuple.leaderSig, tupleSignDigest(tuple.block, tuple.view)))
        return;
    if (m.outerSig.signer != leader ||
        !verifySignature(m.outerSig, proposeSignDigest(tuple, m.parentQc, m.proof)))
        return;
    if (!isExternallyValid(mParams, tuple.block.txns))
        return;
    if (!mStore.put(tuple.block))
        return;

    // Ingest carried certificates regardless of whether we end up voting.
    if (validateQc(mParams, m.parentQc))
        ingestQc(now, m.parentQc, out);
    if (const auto* tc = std::get_if<TimeoutCert>(&m.proof))
    {
        if (validateTc(mParams, *tc))
            maybeAdoptTc(*tc);
        for (const auto& t : tc->entries)
            handleTimeout(now, t, out);
    }
    else if (const auto* statuses = std::get_if<std::vector<StatusMsg>>(&m.proof))
    {
        for (const auto& s : *statuses)
        {
            if (validateQc(mParams, s.parentQc))
                ingestQc(now, s.parentQc, out);
            if (validateTc(mParams, s.highTc))
                maybeAdoptTc(s.highTc);
        }
    }

    if (tuple.view > mCurrentView)
    {
        mProposalBuffer[tuple.view].push_back(m);
        return;
    }
    if (tuple.view < mCurrentView)
        return;
    if (mTimedOut.count(tuple.view) != 0)
        return;

    auto& votedHeights = mVoted[tuple.view];
    auto prior = votedHeights.find(tuple.block.height);
    if (prior != votedHeights.end())
    {
        if (prior->second == blockDigest(tuple.block))
            return; // duplicate of a proposal we already voted for
        if (mParams.mutation != Mutation::noVoteDedup)
        {
            out.push_back(NoteAction{"equivocation-detected"});
            return;
        }
    }

    bool ok = std::holds_alternative<std::monostate>(m.proof)
                  ? voteChecksLater(m)
                  : voteChecksFirst(m, out);
    if (!ok)
        return;
    castVote(now, tuple, out);
}

bool Replica::voteChecksLater(const ProposeMsg& m) const
{
    // Follow-up proposals must extend the highest certified block, which must
    // itself be from the current view.
    if (mHighQc.view() != mCurrentView)
        return false;
    return extendsOrEquals(mStore, m.tuple.block, mHighQc.tuple.block);
}

bool Replica::voteChecksFirst(const ProposeMsg& m, std::vector<Action>& out)
{
    (void)out;
    const Block& proposed = m.tuple.block;
    const QuorumCert& parentQc = m.parentQc;
    if (!validateQc(mParams, parentQc) || !qcCertifiesParentOf(parentQc, proposed))
        return false;

    if (const auto* tc = std::get_if<TimeoutCert>(&m.proof))
    {
        if (tc->view + 1 != mCurrentView || !validateTc(mParams, *tc))
            return false;
        auto lock = distinguishedLock(*tc);
        return lock && sameBlock(*lock, proposed);
    }
    const auto* statuses = std::get_if<std::vector<StatusMsg>>(&m.proof);
    if (statuses == nullptr)
        return false;
    std::map<ReplicaId, const StatusMsg*> distinct;
    for (const auto& s : *statuses)
        if (statusValid(s, mCurrentView - 1))
            distinct.emplace(s.senderSig.signer, &s);
    if (distinct.size() < mParams.quorum())
        return false;
    // The proposal must carry the lock of the highest-ranked reported
    // certificate; ranking matches the leader's own selection so an honest
    // leader's choice over the same report set always passes here.
    const StatusMsg* best = nullptr;
    std::optional<LockRank> bestRank;
    for (const auto& [id, s] : distinct)
    {
        auto lock = distinguishedLock(s->highTc);
        if (!lock)
            continue; // statusValid guarantees a lock; defensive only
        LockRank r = rankOfLock(s->highTc, *lock);
        if (!bestRank || *bestRank < r)
        {
            bestRank = r;
            best = s;
        }
    }
    if (best == nullptr)
        return false;
    auto lock = distinguishedLock(best->highTc);
    return lock && sameBlock(*lock, proposed);
}

void Replica::castVote(Tick now, const ProposalTuple& tuple, std::vector<Action>& out)
{
    (void)now;
    mVoted[tuple.view][tuple.block.height] = blockDigest(tuple.block);
    auto hv = mHighestVoted.find(tuple.view);
    if (hv == mHighestVoted.end() || tuple.block.height >= hv->second.block.height)
        mHighestVoted[tuple.view] = tuple;
    VoteMsg vote;
    vote.tuple = tuple;
    vote.voterSig = makeSignature(mId, voteSignDigest(tuple));
    out.push_back(VoteCastAction{tuple});
    out.push_back(SendAction{allReplicas(), Message{vote}});
}

// --- timeouts and view change ------------------------------------------------

void Replica::handleTimeout(Tick now, const TimeoutMsg& m, std::vector<Action>& out)
{
    if (m.view + 1 < mCurrentView)
        return;
    if (!timeoutEntryValid(mParams, m.view, m))
        return;
    if (m.inner)
        mStore.put(m.inner->block);
    mTimeoutPools[m.view].emplace(m.senderSig.signer, m);
    if (m.view >= mCurrentView && mTriggered.count(m.view) == 0)
        evaluateNewViewTrigger(now, m.view, out);
    if (m.view + 1 == mCurrentView && mParams.leaderOf(mCurrentView) == mId &&
        mFirstProposalSent.count(mCurrentView) == 0)
        evaluateFirstProposal(now, out);
}

std::optional<Replica::WitnessChoice> Replica::selectWitness(View v) const
{
    auto poolIt = mTimeoutPools.find(v);
    if (poolIt == mTimeoutPools.end())
        return std::nullopt;
    const auto& pool = poolIt->second;
    if (pool.size() < mParams.quorum())
        return std::nullopt;
    ReplicaId leader = mParams.leaderOf(v);

    // Relations are evaluated over the store augmented with every reported
    // block, so chain membership of reported tuples is decidable.
    BlockStore aug = mStore;
    for (const auto& [id, t] : pool)
        if (t.inner)
            aug.put(t.inner->block);

    auto orderedSubset = [&](const std::optional<Block>& candidate,
                             bool excludeLeader) -> std::vector<TimeoutMsg>
    {
        std::vector<TimeoutMsg> supporters;
        std::vector<TimeoutMsg> chain;
        std::vector<TimeoutMsg> bottoms;
        for (const auto& [id, t] : pool)
        {
            if (excludeLeader && id == leader)
                continue;
            if (!t.inner)
            {
                bottoms.push_back(t);
                continue;
            }
            if (!candidate)
                continue; // only bottom entries join a candidate-less witness
            if (sameBlock(t.inner->block, *candidate))
            {
                supporters.push_back(t);
                continue;
            }
            auto rel = relate(aug, t.inner->block, *candidate);
            if (rel == ChainRelation::secondExtendsFirst)
                chain.push_back(t);
        }
        std::stable_sort(chain.begin(), chain.end(),
                         [](const TimeoutMsg& a, const TimeoutMsg& b)
                         {
                             Height ha = a.inner ? a.inner->block.height : 0;
                             Height hb = b.inner ? b.inner->block.height : 0;
                             if (ha != hb)
                                 return ha > hb;
                             return a.senderSig.signer < b.senderSig.signer;
                         });
        std::vector<TimeoutMsg> out;
        out.insert(out.end(), supporters.begin(), supporters.end());
        out.insert(out.end(), chain.begin(), chain.end());
        out.insert(out.end(), bottoms.begin(), bottoms.end());
        if (out.size() < mParams.quorum())
            return {};
        out.resize(mParams.quorum());
        return out;
    };

    auto locksABlock = [&](const std::vector<TimeoutMsg>& entries) -> bool
    {
        auto tc = formTc(mParams, v, entries);
        return tc && distinguishedLock(*tc).has_value();
    };

    // Candidate deepest blocks, deepest first; for each the chain-compatible
    // subset is tried. The first candidate whose certificate locks a block
    // wins; otherwise the deepest valid witness is kept as fallback.
    std::vector<Block> candidates;
    for (const auto& [id, t] : pool)
        if (t.inner)
            candidates.push_back(t.inner->block);
    std::sort(candidates.begin(), candidates.end(),
              [](const Block& a, const Block& b)
              {
                  if (a.height != b.height)
                      return a.height > b.height;
                  return blockDigest(a) > blockDigest(b);
              });
    candidates.erase(std::unique(candidates.begin(), candidates.end(),
                                 [](const Block& a, const Block& b) { return sameBlock(a, b); }),
                     candidates.end());

    std::optional<WitnessChoice> fallback;
    for (const auto& cand : candidates)
    {
        auto subset = orderedSubset(cand, /*excludeLeader=*/false);
        if (subset.empty())
            continue;
        WitnessChoice choice{subset, false};
        if (locksABlock(subset))
            return choice;
        if (!fallback)
            fallback = choice;
    }
    {
        auto subset = orderedSubset(std::nullopt, /*excludeLeader=*/false);
        if (!subset.empty() && !fallback)
            fallback = WitnessChoice{subset, false};
    }
    // Leaderless witness: any n-f entries not from the leader qualify.
    {
        std::map<ReplicaId, TimeoutMsg> nonLeader;
        for (const auto& [id, t] : pool)
            if (id != leader)
                nonLeader.emplace(id, t);
        if (nonLeader.size() >= mParams.quorum())
        {
            std::vector<TimeoutMsg> entries;
            for (const auto& [id, t] : nonLeader)
                entries.push_back(t);
            std::stable_sort(entries.begin(), entries.end(),
                             [](const TimeoutMsg& a, const TimeoutMsg& b)
                             {
                                 bool ai = a.inner.has_value();
                                 bool bi = b.inner.has_value();
                                 if (ai != bi)
                                     return ai > bi;
                                 if (ai && bi && a.inner->block.height != b.inner->block.height)
                                     return a.inner->block.height > b.inner->block.height;
                                 return a.senderSig.signer < b.senderSig.signer;
                             });
            entries.resize(mParams.quorum());
            WitnessChoice choice{entries, true};
            if (locksABlock(entries))
                return choice;
            if (!fallback)
                fallback = choice;
        }
    }
    return fallback;
}

void Replica::evaluateNewViewTrigger(Tick now, View v, std::vector<Action>& out)
{
    auto choice = selectWitness(v);
    if (!choice)
        return;
    mTriggered.insert(v);
    out.push_back(SendAction{allOthers(), Message{TimeoutForwardMsg{choice->entries}}});
    auto tc = formTc(mParams, v, choice->entries);
    if (tc)
    {
        mFormedTcs[v] = *tc;
        out.push_back(TcFormedAction{*tc});
        maybeAdoptTc(*tc);
    }
    emitOwnTimeout(now, v, out);
    enterView(now, v + 1, out);
}

// --- status step and leader proposals ----------------------------------------

bool Replica::statusValid(const StatusMsg& s, View prevView) const
{
    if (s.prevView != prevView)
        return false;
    if (!mParams.validId(s.senderSig.signer))
        return false;
    if (!verifySignature(s.senderSig, statusSignDigest(s.prevView, s.parentQc, s.highTc)))
        return false;
    if (s.highTc.view > prevView)
        return false;
    if (!validateTc(mParams, s.highTc))
        return false;
    // A well-formed report always carries a locking certificate (the genesis
    // certificate locks the genesis block), so a lockless one is discounted
    // rather than allowed to outrank locking reports of lower views.
    return lockedBlock(mParams, mStore, s.highTc).has_value();
}

void Replica::handleStatus(Tick now, const StatusMsg& m, std::vector<Action>& out)
{
    if (!mParams.validId(m.senderSig.signer))
        return;
    if (!verifySignature(m.senderSig, statusSignDigest(m.prevView, m.parentQc, m.highTc)))
        return;
    if (validateQc(mParams, m.parentQc))
        ingestQc(now, m.parentQc, out);
    for (const auto& t : m.highTc.entries)
        if (t.inner)
            mStore.put(t.inner->block);
    if (validateTc(mParams, m.highTc))
        maybeAdoptTc(m.highTc);
    mStatusPools[m.prevView].emplace(m.senderSig.signer, m);
    if (mParams.leaderOf(m.prevView + 1) == mId && mCurrentView == m.prevView + 1 &&
        mFirstProposalSent.count(mCurrentView) == 0)
        evaluateFirstProposal(now, out);
}

void Replica::evaluateFirstProposal(Tick now, std::vector<Action>& out)
{
    View w = mCurrentView;
    if (mParams.leaderOf(w) != mId || mFirstProposalSent.count(w) != 0 ||
        mTimedOut.count(w) != 0)
        return;
    View prev = w - 1;
    auto poolIt = mStatusPools.find(prev);
    if (poolIt == mStatusPools.end())
        return;
    std::vector<const StatusMsg*> valid;
    for (const auto& [id, s] : poolIt->second)
        if (statusValid(s, prev))
            valid.push_back(&s);
    if (valid.size() < mParams.quorum())
        return;

    // First bullet: a timeout certificate of the previous view that locks a
    // block selects the block to re-propose. Candidates come from our own
    // formed certificate, a fresh witness over the timeout pool, the reported
    // certificates, and the adopted one.
    std::vector<TimeoutCert> tcs;
    auto consider = [&](const TimeoutCert& tc)
    {
        if (tc.view != prev || !validateTc(mParams, tc))
            return;
        for (const auto& existing : tcs)
            if (tcDigest(existing) == tcDigest(tc))
                return;
        tcs.push_back(tc);
    };
    auto formed = mFormedTcs.find(prev);
    if (formed != mFormedTcs.end())
        consider(formed->second);
    if (auto fresh = selectWitness(prev))
        if (auto tc = formTc(mParams, prev, fresh->entries))
            consider(*tc);
    for (const auto* s : valid)
        consider(s->highTc);
    consider(mHighTc);

    const TimeoutCert* bestTc = nullptr;
    std::optional<Block> bestLock;
    for (const auto& tc : tcs)
    {
        auto lock = distinguishedLock(tc);
        if (!lock)
            continue;
        if (bestTc == nullptr || bestLock->height < lock->height ||
            (bestLock->height == lock->height && tcDigest(*bestTc) < tcDigest(tc)))
        {
            bestTc = &tc;
            bestLock = lock;
        }
    }
    if (bestTc != nullptr)
    {
        const QuorumCert* parentQc = parentCertForLock(*bestLock);
        if (parentQc == nullptr)
            return; // parent certificate still in flight; re-evaluated on arrival
        mFirstProposalSent.insert(w);
        sendProposal(now, *bestLock, *parentQc, StatusProof{*bestTc}, out);
        return;
    }

    // Second bullet: no certificate of the previous view locks a block; act
    // on the highest certificate reported across the statuses. Every valid
    // report's certificate locks a block, so a best one always exists.
    const StatusMsg* best = nullptr;
    std::optional<LockRank> bestRank;
    for (const auto* s : valid)
    {
        auto lock = distinguishedLock(s->highTc);
        if (!lock)
            continue; // statusValid guarantees a lock; defensive only
        LockRank r = rankOfLock(s->highTc, *lock);
        if (!bestRank || *bestRank < r)
        {
            bestRank = r;
            best = s;
        }
    }
    if (best == nullptr)
        return;
    auto lock = distinguishedLock(best->highTc);
    if (!lock)
        return;
    const QuorumCert* parentQc = parentCertForLock(*lock);
    if (parentQc == nullptr)
        return;
    std::vector<StatusMsg> proof;
    proof.push_back(*best);
    for (const auto* s : valid)
    {
        if (proof.size() >= mParams.quorum())
            break;
        if (s->senderSig.signer != best->senderSig.signer)
            proof.push_back(*s);
    }
    if (proof.size() < mParams.quorum())
        return;
    std::sort(proof.begin(), proof.end(), [](const StatusMsg& a, const StatusMsg& b)
              { return a.senderSig.signer < b.senderSig.signer; });
    mFirstProposalSent.insert(w);
    sendProposal(now, *lock, *parentQc, StatusProof{std::move(proof)}, out);
}

void Replica::proposeNextIfReady(Tick now, const QuorumCert& qc, std::vector<Action>& out)
{
    View w = mCurrentView;
    if (mTimedOut.count(w) != 0 || qc.view() != w)
        return;
    auto last = mLastProposed.find(w);
    if (last == mLastProposed.end() || !sameTuple(qc.tuple, last->second))
        return;
    Block next;
    next.parent = blockDigest(last->second.block);
    next.height = last->second.block.height + 1;
    next.txns = mSchedule(next.height);
    if (!isExternallyValid(mParams, next.txns))
        return;
    sendProposal(now, next, qc, StatusProof{std::monostate{}}, out);
}

void Replica::sendProposal(Tick now, const Block& b, const QuorumCert& parentQc, StatusProof proof,
                           std::vector<Action>& out)
{
    (void)now;
    ProposeMsg m;
    m.tuple.block = b;
    m.tuple.view = mCurrentView;
    m.tuple.leaderSig = makeSignature(mId, tupleSignDigest(b, mCurrentView));
    m.parentQc = parentQc;
    m.proof = std::move(proof);
    m.outerSig = makeSignature(mId, proposeSignDigest(m.tuple, m.parentQc, m.proof));
    mLastProposed[mCurrentView] = m.tuple;
    mStore.put(b);
    out.push_back(SendAction{allReplicas(), Message{m}});
}

} // namespace smrsim
