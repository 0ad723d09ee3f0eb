// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/messages.hpp"

namespace smrsim
{

void serialize(ByteWriter& w, const StatusProof& p)
{
    if (std::holds_alternative<std::monostate>(p))
    {
        w.u8(0x00);
    }
    else if (const TimeoutCert* tc = std::get_if<TimeoutCert>(&p))
    {
        serialize(w, *tc); // leads with kTagTimeoutCert
    }
    else
    {
        const auto& statuses = std::get<std::vector<StatusMsg>>(p);
        w.u8(kTagStatusSet);
        w.u32(static_cast<uint32_t>(statuses.size()));
        for (const StatusMsg& s : statuses)
            serialize(w, s);
    }
}

StatusProof deserializeStatusProof(ByteReader& r)
{
    uint8_t kind = r.u8();
    if (kind == 0x00)
        return std::monostate{};
    if (kind == kTagTimeoutCert)
    {
        TimeoutCert tc;
        tc.view = r.u64();
        uint32_t count = r.u32();
        tc.entries.reserve(count);
        for (uint32_t i = 0; i < count; ++i)
            tc.entries.push_back(deserializeTimeoutMsg(r));
        return tc;
    }
    if (kind == kTagStatusSet)
    {
        uint32_t count = r.u32();
        std::vector<StatusMsg> statuses;
        statuses.reserve(count);
        for (uint32_t i = 0; i < count; ++i)
            statuses.push_back(deserializeStatusMsg(r));
        return statuses;
    }
    throw WireError("bad status-proof kind");
}

void serialize(ByteWriter& w, const ProposeMsg& m)
{
    w.u8(kTagMsgPropose);
    serialize(w, m.tuple);
    serialize(w, m.parentQc);
    serialize(w, m.proof);
    serialize(w, m.outerSig);
}

ProposeMsg deserializeProposeMsg(ByteReader& r)
{
    if (r.u8() != kTagMsgPropose)
        throw WireError("bad propose tag");
    ProposeMsg m;
    m.tuple = deserializeProposalTuple(r);
    m.parentQc = deserializeQuorumCert(r);
    m.proof = deserializeStatusProof(r);
    m.outerSig = deserializeSignature(r);
    return m;
}

void serialize(ByteWriter& w, const VoteMsg& m)
{
    w.u8(kTagMsgVote);
    serialize(w, m.tuple);
    serialize(w, m.voterSig);
}

VoteMsg deserializeVoteMsg(ByteReader& r)
{
    if (r.u8() != kTagMsgVote)
        throw WireError("bad vote tag");
    VoteMsg m;
    m.tuple = deserializeProposalTuple(r);
    m.voterSig = deserializeSignature(r);
    return m;
}

void serialize(ByteWriter& w, const StatusMsg& m)
{
    w.u8(kTagMsgStatus);
    w.u64(m.prevView);
    serialize(w, m.parentQc);
    serialize(w, m.highTc);
    serialize(w, m.senderSig);
}

StatusMsg deserializeStatusMsg(ByteReader& r)
{
    if (r.u8() != kTagMsgStatus)
        throw WireError("bad status tag");
    StatusMsg m;
    m.prevView = r.u64();
    m.parentQc = deserializeQuorumCert(r);
    m.highTc = deserializeTimeoutCert(r);
    m.senderSig = deserializeSignature(r);
    return m;
}

Digest proposeSignDigest(const ProposalTuple& tuple, const QuorumCert& parentQc,
                         const StatusProof& proof)
{
    ByteWriter w;
    w.u8(kTagProposeSign);
    serialize(w, tuple);
    serialize(w, parentQc);
    serialize(w, proof);
    return sha256(w.data());
}

Digest statusSignDigest(View prevView, const QuorumCert& parentQc, const TimeoutCert& highTc)
{
    ByteWriter w;
    w.u8(kTagStatusSign);
    w.u64(prevView);
    serialize(w, parentQc);
    serialize(w, highTc);
    return sha256(w.data());
}

Bytes serializeMessage(const Message& m)
{
    ByteWriter w;
    std::visit(
        [&w](const auto& inner)
        {
            using T = std::decay_t<decltype(inner)>;
            if constexpr (std::is_same_v<T, QcForwardMsg>)
            {
                w.u8(kTagMsgQcForward);
                serialize(w, inner.qc);
            }
            else if constexpr (std::is_same_v<T, TimeoutForwardMsg>)
            {
                w.u8(kTagMsgTimeoutForward);
                w.u32(static_cast<uint32_t>(inner.timeouts.size()));
                for (const TimeoutMsg& t : inner.timeouts)
                    serialize(w, t);
            }
            else
            {
                serialize(w, inner); // self-tagging variants
            }
        },
        m);
    return w.take();
}

Message deserializeMessage(const Bytes& wire)
{
    ByteReader r(wire);
    if (wire.empty())
        throw WireError("empty message");
    Message out;
    switch (wire[0])
    {
    case kTagMsgPropose:
        out = deserializeProposeMsg(r);
        break;
    case kTagMsgVote:
        out = deserializeVoteMsg(r);
        break;
    case kTagMsgTimeout:
        out = deserializeTimeoutMsg(r);
        break;
    case kTagMsgStatus:
        out = deserializeStatusMsg(r);
        break;
    case kTagMsgQcForward:
    {
        r.u8();
        QcForwardMsg m;
        m.qc = deserializeQuorumCert(r);
        out = m;
        break;
    }
    case kTagMsgTimeoutForward:
    {
        r.u8();
        TimeoutForwardMsg m;
        uint32_t count = r.u32();
        m.timeouts.reserve(count);
        for (uint32_t i = 0; i < count; ++i)
            m.timeouts.push_back(deserializeTimeoutMsg(r));
        out = m;
        break;
    }
    default:
        throw WireError("unknown message tag");
    }
    r.expectEnd();
    return out;
}

std::string messageKind(const Message& m)
{
    struct Visitor
    {
        std::string operator()(const ProposeMsg&) const
        {
            return "propose";
        }
        std::string operator()(const VoteMsg&) const
        {
            return "vote";
        }
        std::string operator()(const TimeoutMsg&) const
        {
            return "timeout";
        }
        std::string operator()(const StatusMsg&) const
        {
            return "status";
        }
        std::string operator()(const QcForwardMsg&) const
        {
            return "qc-forward";
        }
        std::string operator()(const TimeoutForwardMsg&) const
        {
            return "timeout-forward";
        }
    };
    return std::visit(Visitor{}, m);
}

View messageView(const Message& m)
{
    struct Visitor
    {
        View operator()(const ProposeMsg& x) const
        {
            return x.tuple.view;
        }
        View operator()(const VoteMsg& x) const
        {
            return x.tuple.view;
        }
        View operator()(const TimeoutMsg& x) const
        {
            return x.view;
        }
        View operator()(const StatusMsg& x) const
        {
            return x.prevView + 1;
        }
        View operator()(const QcForwardMsg& x) const
        {
            return x.qc.view();
        }
        View operator()(const TimeoutForwardMsg& x) const
        {
            return x.timeouts.empty() ? 0 : x.timeouts.front().view;
        }
    };
    return std::visit(Visitor{}, m);
}

} // namespace smrsim
