// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/certs.hpp"

#include <variant>

namespace smrsim
{

// Proof attached to a proposal. Empty for every block after the first of a
// view; a previous-view timeout certificate or a set of >= n-f status
// messages for the first block.
struct StatusMsg;
using StatusProof = std::variant<std::monostate, TimeoutCert, std::vector<StatusMsg>>;

// First-block-of-view proposal carries the proof; every proposal carries the
// parent certificate and an outer leader signature over the whole message.
struct ProposeMsg
{
    ProposalTuple tuple;
    QuorumCert parentQc;
    StatusProof proof;
    Signature outerSig; // by the tuple's view leader, over proposeSignDigest

    bool operator==(const ProposeMsg&) const = default;
};

struct VoteMsg
{
    ProposalTuple tuple;
    Signature voterSig; // over voteSignDigest(tuple)

    bool operator==(const VoteMsg&) const = default;
};

// Sent to the new leader on view entry: the sender's highest locking TC plus
// a best-effort QC for the parent of that TC's locked block (the genesis QC
// stands in when the sender does not hold the parent certificate).
struct StatusMsg
{
    View prevView{0};
    QuorumCert parentQc;
    TimeoutCert highTc;
    Signature senderSig; // over statusSignDigest

    bool operator==(const StatusMsg&) const = default;
};

// A freshly formed QC is forwarded to all other replicas (Commit step).
struct QcForwardMsg
{
    QuorumCert qc;

    bool operator==(const QcForwardMsg&) const = default;
};

// The new-view trigger set is forwarded once so laggards can follow.
struct TimeoutForwardMsg
{
    std::vector<TimeoutMsg> timeouts;

    bool operator==(const TimeoutForwardMsg&) const = default;
};

using Message =
    std::variant<ProposeMsg, VoteMsg, TimeoutMsg, StatusMsg, QcForwardMsg, TimeoutForwardMsg>;

void serialize(ByteWriter& w, const StatusProof& p);
StatusProof deserializeStatusProof(ByteReader& r);

void serialize(ByteWriter& w, const ProposeMsg& m);
ProposeMsg deserializeProposeMsg(ByteReader& r);
void serialize(ByteWriter& w, const VoteMsg& m);
VoteMsg deserializeVoteMsg(ByteReader& r);
void serialize(ByteWriter& w, const StatusMsg& m);
StatusMsg deserializeStatusMsg(ByteReader& r);

// Signing pre-images.
Digest proposeSignDigest(const ProposalTuple& tuple, const QuorumCert& parentQc,
                         const StatusProof& proof);
Digest statusSignDigest(View prevView, const QuorumCert& parentQc, const TimeoutCert& highTc);

// Whole-message wire form: one tag byte plus the variant body. This byte
// string is what trace records embed (hex-encoded).
Bytes serializeMessage(const Message& m);
Message deserializeMessage(const Bytes& wire); // throws WireError

// Human-oriented one-word label for reports and diagnostics.
std::string messageKind(const Message& m);

// The view a message pertains to (tuple view, timeout view, status prevView+1,
// certificate view). Used for routing and bookkeeping, not validation.
View messageView(const Message& m);

} // namespace smrsim
