// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/adversary.hpp"

#include <algorithm>

namespace smrsim
{

void Strategy::init(StrategyCtx& ctx)
{
    GenesisBundle g = ctx.genesis();
    for (ReplicaId id : ctx.corrupt())
        mWrapped.emplace(id, Replica(id, ctx.params(), g, ctx.schedule()));
}

Replica* Strategy::wrapped(ReplicaId id)
{
    auto it = mWrapped.find(id);
    return it == mWrapped.end() ? nullptr : &it->second;
}

std::vector<ReplicaId> Strategy::honestIds(const StrategyCtx& ctx) const
{
    std::vector<ReplicaId> out;
    const auto& corrupt = ctx.corrupt();
    for (ReplicaId r = 1; r <= ctx.params().n; ++r)
        if (std::find(corrupt.begin(), corrupt.end(), r) == corrupt.end())
            out.push_back(r);
    return out;
}

std::vector<Action> Strategy::corruptStart(StrategyCtx& ctx, ReplicaId self, Tick now)
{
    Replica* r = wrapped(self);
    return r ? transform(ctx, self, now, r->onStart(now)) : std::vector<Action>{};
}

std::vector<Action> Strategy::corruptMessage(StrategyCtx& ctx, ReplicaId self, Tick now,
                                             ReplicaId src, const Message& m)
{
    Replica* r = wrapped(self);
    return r ? transform(ctx, self, now, r->onMessage(now, src, m)) : std::vector<Action>{};
}

std::vector<Action> Strategy::corruptTimer(StrategyCtx& ctx, ReplicaId self, Tick now, View view)
{
    Replica* r = wrapped(self);
    return r ? transform(ctx, self, now, r->onTimer(now, view)) : std::vector<Action>{};
}

namespace
{

// Build a sibling of the proposed block: same parent and height, different
// transaction batch, re-signed by the corrupt proposer.
ProposeMsg siblingProposal(StrategyCtx& ctx, ReplicaId self, const ProposeMsg& m)
{
    ProposeMsg alt = m;
    std::string tag = "alt-" + std::to_string(m.tuple.block.height);
    alt.tuple.block.txns = {Bytes(tag.begin(), tag.end())};
    alt.tuple.leaderSig = ctx.sign(self, tupleSignDigest(alt.tuple.block, alt.tuple.view));
    alt.outerSig = ctx.sign(self, proposeSignDigest(alt.tuple, alt.parentQc, alt.proof));
    return alt;
}

class CrashStrategy : public Strategy
{
  protected:
    std::vector<Action> transform(StrategyCtx&, ReplicaId, Tick, std::vector<Action>) override
    {
        return {};
    }
};

class SilentLeaderStrategy : public Strategy
{
  protected:
    std::vector<Action> transform(StrategyCtx& ctx, ReplicaId self, Tick,
                                  std::vector<Action> honest) override
    {
        std::vector<Action> out;
        for (auto& a : honest)
        {
            auto* send = std::get_if<SendAction>(&a);
            if (send != nullptr && std::holds_alternative<ProposeMsg>(send->msg))
            {
                ctx.note(self, "proposal-withheld");
                continue;
            }
            out.push_back(std::move(a));
        }
        return out;
    }
};

class EquivocatingLeaderStrategy : public Strategy
{
  protected:
    std::vector<Action> transform(StrategyCtx& ctx, ReplicaId self, Tick,
                                  std::vector<Action> honest) override
    {
        std::vector<Action> out;
        for (auto& a : honest)
        {
            auto* send = std::get_if<SendAction>(&a);
            if (send != nullptr)
            {
                if (const auto* p = std::get_if<ProposeMsg>(&send->msg))
                {
                    ProposeMsg alt = siblingProposal(ctx, self, *p);
                    out.push_back(a);
                    out.push_back(SendAction{send->dests, Message{alt}});
                    ctx.note(self, "equivocating-proposal");
                    continue;
                }
            }
            out.push_back(std::move(a));
        }
        return out;
    }
};

// Proposes sibling blocks to two disjoint halves of the honest replicas and
// votes both ways, delivering each vote only to the matching half. Designed
// to surface quorum-size weaknesses: with the certificate quorum lowered by
// one, both halves can assemble certificates for conflicting blocks.
class SplitVotesStrategy : public Strategy
{
  public:
    std::map<Digest, ProposeMsg> mAlternates; // keyed by original tuple sign digest

  protected:
    std::vector<Action> transform(StrategyCtx& ctx, ReplicaId self, Tick,
                                  std::vector<Action> honest) override
    {
        std::vector<ReplicaId> hon = honestIds(ctx);
        std::vector<ReplicaId> half1(hon.begin(), hon.begin() + hon.size() / 2 + hon.size() % 2);
        std::vector<ReplicaId> half2(hon.begin() + half1.size(), hon.end());

        std::vector<Action> out;
        for (auto& a : honest)
        {
            auto* send = std::get_if<SendAction>(&a);
            if (send == nullptr)
            {
                out.push_back(std::move(a));
                continue;
            }
            if (const auto* p = std::get_if<ProposeMsg>(&send->msg))
            {
                ProposeMsg alt = siblingProposal(ctx, self, *p);
                mAlternates[tupleSignDigest(p->tuple.block, p->tuple.view)] = alt;
                std::vector<ReplicaId> g1 = half1;
                g1.push_back(self);
                std::sort(g1.begin(), g1.end());
                out.push_back(SendAction{g1, Message{*p}});
                out.push_back(SendAction{half2, Message{alt}});
                ctx.note(self, "split-proposal");
                continue;
            }
            if (const auto* v = std::get_if<VoteMsg>(&send->msg))
            {
                auto alt =
                    mAlternates.find(tupleSignDigest(v->tuple.block, v->tuple.view));
                if (alt != mAlternates.end())
                {
                    VoteMsg altVote;
                    altVote.tuple = alt->second.tuple;
                    altVote.voterSig = ctx.sign(self, voteSignDigest(altVote.tuple));
                    std::vector<ReplicaId> g1 = half1;
                    g1.push_back(self);
                    std::sort(g1.begin(), g1.end());
                    out.push_back(SendAction{g1, Message{*v}});
                    out.push_back(SendAction{half2, Message{altVote}});
                    ctx.note(self, "split-vote");
                    continue;
                }
            }
            out.push_back(std::move(a));
        }
        return out;
    }
};

// Tells one half of the replicas it voted and the other half that it did
// not: two signed timeout variants for the same view.
class ConflictingTimeoutsStrategy : public Strategy
{
  protected:
    std::vector<Action> transform(StrategyCtx& ctx, ReplicaId self, Tick,
                                  std::vector<Action> honest) override
    {
        std::vector<ReplicaId> hon = honestIds(ctx);
        std::vector<ReplicaId> half1(hon.begin(), hon.begin() + hon.size() / 2 + hon.size() % 2);
        std::vector<ReplicaId> half2(hon.begin() + half1.size(), hon.end());

        std::vector<Action> out;
        for (auto& a : honest)
        {
            auto* send = std::get_if<SendAction>(&a);
            if (send != nullptr)
            {
                if (const auto* t = std::get_if<TimeoutMsg>(&send->msg))
                {
                    if (t->inner)
                    {
                        TimeoutMsg bare;
                        bare.view = t->view;
                        bare.senderSig = ctx.sign(self, timeoutSignDigest(bare.view, bare.inner));
                        std::vector<ReplicaId> g1 = half1;
                        g1.push_back(self);
                        std::sort(g1.begin(), g1.end());
                        out.push_back(SendAction{g1, Message{*t}});
                        out.push_back(SendAction{half2, Message{bare}});
                        ctx.note(self, "conflicting-timeouts");
                        continue;
                    }
                }
            }
            out.push_back(std::move(a));
        }
        return out;
    }
};

// Swaps the carried parent certificate for the genesis certificate on every
// proposal above height 1, exercising the voters' refusal paths.
class StaleQcProposerStrategy : public Strategy
{
  protected:
    std::vector<Action> transform(StrategyCtx& ctx, ReplicaId self, Tick,
                                  std::vector<Action> honest) override
    {
        std::vector<Action> out;
        for (auto& a : honest)
        {
            auto* send = std::get_if<SendAction>(&a);
            if (send != nullptr)
            {
                if (const auto* p = std::get_if<ProposeMsg>(&send->msg))
                {
                    if (p->tuple.block.height >= 2)
                    {
                        ProposeMsg stale = *p;
                        stale.parentQc = ctx.genesis().qc;
                        stale.outerSig = ctx.sign(
                            self, proposeSignDigest(stale.tuple, stale.parentQc, stale.proof));
                        out.push_back(SendAction{send->dests, Message{stale}});
                        ctx.note(self, "stale-parent-certificate");
                        continue;
                    }
                }
            }
            out.push_back(std::move(a));
        }
        return out;
    }
};

// Follows every status with a second one claiming the genesis certificate:
// the leader's first-kept pooling and status validation absorb it.
class StatusEquivocatorStrategy : public Strategy
{
  protected:
    std::vector<Action> transform(StrategyCtx& ctx, ReplicaId self, Tick,
                                  std::vector<Action> honest) override
    {
        std::vector<Action> out;
        for (auto& a : honest)
        {
            auto* send = std::get_if<SendAction>(&a);
            bool duplicated = false;
            if (send != nullptr)
            {
                if (const auto* s = std::get_if<StatusMsg>(&send->msg))
                {
                    StatusMsg old;
                    old.prevView = s->prevView;
                    old.parentQc = ctx.genesis().qc;
                    old.highTc = ctx.genesis().tc;
                    old.senderSig = ctx.sign(
                        self, statusSignDigest(old.prevView, old.parentQc, old.highTc));
                    out.push_back(a);
                    out.push_back(SendAction{send->dests, Message{old}});
                    ctx.note(self, "status-equivocation");
                    duplicated = true;
                }
            }
            if (!duplicated)
                out.push_back(std::move(a));
        }
        return out;
    }
};

} // namespace

const std::vector<std::string>& strategyCatalog()
{
    static const std::vector<std::string> names = {
        "crash",
        "silent-leader",
        "equivocating-leader",
        "split-votes",
        "conflicting-timeouts",
        "stale-qc-proposer",
        "status-equivocator",
    };
    return names;
}

std::unique_ptr<Strategy> makeStrategy(const std::string& name)
{
    if (name == "crash")
        return std::make_unique<CrashStrategy>();
    if (name == "silent-leader")
        return std::make_unique<SilentLeaderStrategy>();
    if (name == "equivocating-leader")
        return std::make_unique<EquivocatingLeaderStrategy>();
    if (name == "split-votes")
        return std::make_unique<SplitVotesStrategy>();
    if (name == "conflicting-timeouts")
        return std::make_unique<ConflictingTimeoutsStrategy>();
    if (name == "stale-qc-proposer")
        return std::make_unique<StaleQcProposerStrategy>();
    if (name == "status-equivocator")
        return std::make_unique<StatusEquivocatorStrategy>();
    return nullptr;
}

} // namespace smrsim
