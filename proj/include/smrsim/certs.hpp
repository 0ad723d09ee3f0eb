// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/core.hpp"

namespace smrsim
{

// ---------------------------------------------------------------------------
// Quorum certificates
// ---------------------------------------------------------------------------

// n-f distinct-replica votes on one leader-signed (block, view) tuple.
struct QuorumCert
{
    ProposalTuple tuple;
    std::vector<Signature> votes; // sorted by signer, each over voteSignDigest(tuple)

    View view() const
    {
        return tuple.view;
    }
    Height height() const
    {
        return tuple.block.height;
    }
    bool operator==(const QuorumCert&) const = default;
};

void serialize(ByteWriter& w, const QuorumCert& qc);
QuorumCert deserializeQuorumCert(ByteReader& r);
Digest qcDigest(const QuorumCert& qc);

// Certificate ranking: by view, then by height, lexicographically. Total on
// valid certificates.
struct CertRank
{
    View view{0};
    Height height{0};
    auto operator<=>(const CertRank&) const = default;
};

inline CertRank rankOf(const QuorumCert& qc)
{
    return CertRank{qc.view(), qc.height()};
}

// Validate a quorum certificate against pristine parameters:
//   - the tuple's leader signature is by leaderOf(view) over the tuple digest
//   - >= quorum() votes from distinct valid replica ids, each over the
//     vote digest of that exact tuple
// @post true iff the certificate proves >= quorum() distinct replicas voted
//       for this tuple
bool validateQc(const Params& p, const QuorumCert& qc);

// Assemble a certificate from collected votes (replica-side; applies the
// possibly-mutated quorum size in p). Votes must already be verified.
// Returns nullopt if fewer than p.quorum() distinct signers are present.
std::optional<QuorumCert> formQc(const Params& p, const ProposalTuple& tuple,
                                 const std::vector<Signature>& votes);

// ---------------------------------------------------------------------------
// Timeout messages and timeout certificates
// ---------------------------------------------------------------------------

// A replica's timeout for view `view`: it stops voting in that view and
// reports the highest tuple it voted for there (or nothing, if it never
// voted). The signature covers the report and binds it to the sender.
struct TimeoutMsg
{
    View view{0};
    std::optional<ProposalTuple> inner; // highest view-`view` tuple voted for
    Signature senderSig;                // over timeoutSignDigest(view, inner)

    bool operator==(const TimeoutMsg&) const = default;
};

void serialize(ByteWriter& w, const TimeoutMsg& t);
TimeoutMsg deserializeTimeoutMsg(ByteReader& r);
Digest timeoutSignDigest(View view, const std::optional<ProposalTuple>& inner);

// n-f distinct-replica timeouts for one view.
struct TimeoutCert
{
    View view{0};
    std::vector<TimeoutMsg> entries; // sorted by sender

    bool operator==(const TimeoutCert&) const = default;
};

void serialize(ByteWriter& w, const TimeoutCert& tc);
TimeoutCert deserializeTimeoutCert(ByteReader& r);
Digest tcDigest(const TimeoutCert& tc);

// A timeout entry is well-formed for view w when it is for w, its sender
// signature covers its report, and any non-empty report is an externally
// valid view-w tuple carrying a valid signature from that view's leader.
bool timeoutEntryValid(const Params& p, View view, const TimeoutMsg& t);

// Validate a timeout certificate against pristine parameters:
//   - >= quorum() entries from distinct valid replica ids
//   - every entry passes timeoutEntryValid for tc.view
bool validateTc(const Params& p, const TimeoutCert& tc);

std::optional<TimeoutCert> formTc(const Params& p, View view,
                                  const std::vector<TimeoutMsg>& timeouts);

// ---------------------------------------------------------------------------
// Lock predicates over timeout certificates
// ---------------------------------------------------------------------------

// tcLocks(tc, B): the certificate locks block B when either
//   (1) >= n-3f entries report B or a block directly extending B, and no
//       entry reports a block conflicting with B; or
//   (2) the view's leader is not among the senders at all, and >= 2f
//       entries report B or a block directly extending B.
// Condition (2) carries no conflict clause: its higher threshold plus the
// leader's absence already rule out a conflicting lock whenever a block of
// the view was certified, and weakening the threshold is one of the
// injectable faults the harness must be able to surface.
// Reports whose relation to B cannot be resolved from `store` plus the
// blocks carried in the certificate count as conflicting for condition (1):
// unprovable compatibility never creates a lock.
bool tcLocks(const Params& p, const BlockStore& store, const TimeoutCert& tc, const Block& b);

// Highest block locked by the certificate, if any. Candidate blocks are
// drawn from the certificate's own reports (a lock needs >= 1 supporting
// report, and a supporter names the locked block either as itself or as its
// direct parent). Under the unweakened thresholds two same-height blocks
// are never locked by one certificate; if a threshold mutation makes that
// possible anyway, preference at equal height is by larger digest for
// determinism.
std::optional<Block> lockedBlock(const Params& p, const BlockStore& store, const TimeoutCert& tc);

// All blocks the certificate locks, highest first. Locked blocks of one
// certificate form a chain under the unweakened thresholds, so the list
// reads tip-to-ancestor.
std::vector<Block> lockedBlocks(const Params& p, const BlockStore& store, const TimeoutCert& tc);

// ---------------------------------------------------------------------------
// Genesis
// ---------------------------------------------------------------------------

// Bootstrap state shared by all replicas: a fixed height-0 block together
// with a synthetic view-0 certificate pair. The genesis certificate serves
// as every replica's initial highest certificate (its own parent
// certificate is itself), and the synthetic view-0 timeout certificate
// locks the genesis block so view 1 starts with the uniform status
// exchange. View-0 signatures are the one sanctioned exception to the
// signature-isolation audit.
struct GenesisBundle
{
    Block block;
    ProposalTuple tuple;
    QuorumCert qc;
    TimeoutCert tc;
};

GenesisBundle makeGenesis(const Params& p);

} // namespace smrsim
