// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/messages.hpp"

#include <functional>
#include <set>

namespace smrsim
{

// Client batch injected at each height; deterministic function of the height.
using PayloadSchedule = std::function<Payload(Height)>;

// --- Actions ----------------------------------------------------------------
// A replica is a deterministic state machine: (state, input) -> (state',
// actions). The simulator interprets actions; the replica performs no I/O.

struct SendAction
{
    std::vector<ReplicaId> dests; // sorted; may include self (delivered with zero delay)
    Message msg;
};

struct CommitAction
{
    Block block;
    bool direct; // true when this block is the certified block itself, not an ancestor
    View qcView; // view of the certificate that triggered the commit
};

struct SetTimerAction
{
    View view;
    Tick fireAt;
};

struct EnterViewAction
{
    View view;
};

struct QcFormedAction
{
    QuorumCert qc;
};

struct TcFormedAction
{
    TimeoutCert tc;
};

struct TimedOutAction // own timeout emitted for this view
{
    View view;
};

struct VoteCastAction
{
    ProposalTuple tuple;
};

struct NoteAction
{
    std::string text;
};

using Action = std::variant<SendAction, CommitAction, SetTimerAction, EnterViewAction,
                            QcFormedAction, TcFormedAction, TimedOutAction, VoteCastAction,
                            NoteAction>;

// --- Replica ----------------------------------------------------------------

class Replica
{
  public:
    Replica(ReplicaId id, Params params, GenesisBundle genesis, PayloadSchedule schedule);

    // Protocol start: enter view 1 and send the bootstrap status.
    std::vector<Action> onStart(Tick now);

    // A message delivered from `src` (transport identity; authentication is
    // by the signatures inside the message, not by `src`).
    std::vector<Action> onMessage(Tick now, ReplicaId src, const Message& m);

    // A progress-deadline timer for `view` fires. Deadlines are evaluated
    // lazily: the handler re-derives the currently effective deadline from
    // the certified-height count and either re-arms or times out.
    std::vector<Action> onTimer(Tick now, View view);

    View currentView() const
    {
        return mCurrentView;
    }
    const std::vector<Block>& committedChain() const
    {
        return mCommitted;
    }
    const Params& params() const
    {
        return mParams;
    }

  private:
    // -- helpers over certificates and locks --
    void rememberCert(const QuorumCert& qc);
    const QuorumCert* certFor(const Digest& block, View view) const; // exact view
    const QuorumCert* bestCertFor(const Digest& block) const;       // highest view

    // The TC's single distinguished lock: the highest block the lock
    // predicate derives from the certificate's own reports.
    std::optional<Block> distinguishedLock(const TimeoutCert& tc) const;

    // Replace the retained highest locking timeout certificate when `tc` is
    // a validated certificate that locks a block and outranks the current
    // one (certificate view first, then lock height, then a digest
    // tie-break so all replicas resolve same-rank races identically).
    void maybeAdoptTc(const TimeoutCert& tc);

    // Parent certificate required to propose / report a lock: a QC for the
    // lock's parent, with the genesis block standing as its own parent.
    const QuorumCert* parentCertForLock(const Block& lock) const;
    bool qcCertifiesParentOf(const QuorumCert& qc, const Block& b) const;

    // -- protocol steps --
    void enterView(Tick now, View v, std::vector<Action>& out);
    void ingestQc(Tick now, const QuorumCert& qc, std::vector<Action>& out);
    void commitViaQc(const QuorumCert& qc, std::vector<Action>& out);
    void handlePropose(Tick now, const ProposeMsg& m, std::vector<Action>& out);
    void handleVote(Tick now, const VoteMsg& m, std::vector<Action>& out);
    void handleTimeout(Tick now, const TimeoutMsg& m, std::vector<Action>& out);
    void handleStatus(Tick now, const StatusMsg& m, std::vector<Action>& out);
    void tryFormQcs(Tick now, std::vector<Action>& out);
    void evaluateNewViewTrigger(Tick now, View v, std::vector<Action>& out);
    void emitOwnTimeout(Tick now, View v, std::vector<Action>& out);
    void evaluateFirstProposal(Tick now, std::vector<Action>& out);
    void proposeNextIfReady(Tick now, const QuorumCert& qc, std::vector<Action>& out);
    void sendProposal(Tick now, const Block& b, const QuorumCert& parentQc, StatusProof proof,
                      std::vector<Action>& out);
    bool statusValid(const StatusMsg& s, View prevView) const;
    bool voteChecksFirst(const ProposeMsg& m, std::vector<Action>& out);
    bool voteChecksLater(const ProposeMsg& m) const;
    void castVote(Tick now, const ProposalTuple& tuple, std::vector<Action>& out);

    // New-view witness selection: a deterministic choice of exactly n-f
    // collected timeouts satisfying one of the two trigger predicates,
    // preferring (trigger-A over trigger-B over nothing) a witness whose
    // formed certificate yields a usable lock.
    struct WitnessChoice
    {
        std::vector<TimeoutMsg> entries;
        bool leaderless{false};
    };
    std::optional<WitnessChoice> selectWitness(View v) const;

    std::vector<ReplicaId> allReplicas() const;
    std::vector<ReplicaId> allOthers() const;
    Tick progressDeadline() const; // effective deadline for the current view

    // -- identity and configuration --
    ReplicaId mId;
    Params mParams;
    GenesisBundle mGenesis;
    PayloadSchedule mSchedule;

    // -- protocol state --
    View mCurrentView{0};
    Tick mViewEntryTime{0};
    BlockStore mStore;
    std::map<Digest, std::map<View, QuorumCert>> mCerts; // block digest -> view -> QC
    QuorumCert mHighQc;
    TimeoutCert mHighTc;
    Block mHighTcLock;
    std::vector<Block> mCommitted;

    std::map<View, std::map<Height, Digest>> mVoted;
    std::map<View, ProposalTuple> mHighestVoted;
    std::set<View> mTimedOut;
    std::set<Height> mCertifiedHeightsThisView;

    struct VotePool
    {
        ProposalTuple tuple;
        std::map<ReplicaId, Signature> votes;
        bool formed{false};
    };
    std::map<Digest, VotePool> mVotePools; // keyed by vote sign digest

    std::map<View, std::map<ReplicaId, TimeoutMsg>> mTimeoutPools;
    std::set<View> mTriggered;                       // witness forwarded for this view
    std::map<View, TimeoutCert> mFormedTcs;          // own witness TCs by view
    std::map<View, std::map<ReplicaId, StatusMsg>> mStatusPools; // keyed by prevView
    std::set<View> mFirstProposalSent;
    std::map<View, ProposalTuple> mLastProposed;
    std::map<View, std::vector<ProposeMsg>> mProposalBuffer; // future views
};

} // namespace smrsim
