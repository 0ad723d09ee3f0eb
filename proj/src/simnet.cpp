// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/simnet.hpp"

#include "smrsim/adversary.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <queue>
#include <random>

namespace smrsim
{

PayloadSchedule defaultSchedule()
{
    return [](Height h) {
        std::string tag = "txn-" + std::to_string(h);
        return Payload{Bytes(tag.begin(), tag.end())};
    };
}

namespace
{

struct DeliverBody
{
    ReplicaId dst{0};
    ReplicaId src{0};
    Message msg;
};

struct TimerBody
{
    ReplicaId r{0};
    View view{0};
};

// Event class order at equal times: deliveries before timers before
// injections; ties broken by scheduling sequence.
enum EventClass : int
{
    kClassDeliver = 0,
    kClassTimer = 1,
    kClassInject = 2,
};

struct Event
{
    Tick t{0};
    int klass{kClassDeliver};
    uint64_t seq{0};
    std::variant<DeliverBody, TimerBody> body;
};

struct EventAfter
{
    bool operator()(const Event& a, const Event& b) const
    {
        if (a.t != b.t)
            return a.t > b.t;
        if (a.klass != b.klass)
            return a.klass > b.klass;
        return a.seq > b.seq;
    }
};

class Sim final : public StrategyCtx
{
  public:
    Sim(const Scenario& sc, uint64_t seed)
        : mScenario(sc), mSeed(seed), mRng(seed), mGenesis(makeGenesis(sc.params)),
          mTrace(TraceMeta{sc.name, sc.params, sc.gst, sc.horizon, sc.policy, seed,
                           sc.adversary.corrupt, sc.adversary.strategy})
    {
        for (ReplicaId r = 1; r <= sc.params.n; ++r)
            if (!isCorrupt(r))
                mHonest.emplace(r, Replica(r, sc.params, mGenesis, defaultSchedule()));
        if (sc.adversary.strategy != "none")
        {
            mStrategy = makeStrategy(sc.adversary.strategy);
            if (!mStrategy)
                throw std::runtime_error("unknown adversary strategy: " + sc.adversary.strategy);
            mStrategy->init(*this);
        }
        else if (!sc.adversary.corrupt.empty())
        {
            throw std::runtime_error("corrupt replicas declared without a strategy");
        }
    }

    TraceLog run()
    {
        for (ReplicaId r = 1; r <= mScenario.params.n; ++r)
        {
            mNow = 0;
            auto actions = isCorrupt(r) ? mStrategy->corruptStart(*this, r, 0)
                                        : mHonest.at(r).onStart(0);
            interpret(r, actions);
        }
        while (!mQueue.empty())
        {
            Event ev = mQueue.top();
            if (ev.t > mScenario.horizon)
                break;
            mQueue.pop();
            mNow = ev.t;
            if (auto* d = std::get_if<DeliverBody>(&ev.body))
            {
                mTrace.append(ev.t, d->dst, "deliver",
                              {{"src", std::to_string(d->src)},
                               {"msg", toHex(serializeMessage(d->msg))}});
                auto actions = isCorrupt(d->dst)
                                   ? mStrategy->corruptMessage(*this, d->dst, ev.t, d->src, d->msg)
                                   : mHonest.at(d->dst).onMessage(ev.t, d->src, d->msg);
                interpret(d->dst, actions);
            }
            else if (auto* tm = std::get_if<TimerBody>(&ev.body))
            {
                auto actions = isCorrupt(tm->r)
                                   ? mStrategy->corruptTimer(*this, tm->r, ev.t, tm->view)
                                   : mHonest.at(tm->r).onTimer(ev.t, tm->view);
                interpret(tm->r, actions);
            }
        }
        return std::move(mTrace);
    }

    // --- StrategyCtx ---
    const Params& params() const override
    {
        return mScenario.params;
    }
    const GenesisBundle& genesis() const override
    {
        return mGenesis;
    }
    const std::vector<ReplicaId>& corrupt() const override
    {
        return mScenario.adversary.corrupt;
    }
    PayloadSchedule schedule() const override
    {
        return defaultSchedule();
    }
    Signature sign(ReplicaId id, const Digest& over) override
    {
        if (!isCorrupt(id))
            throw UnforgeabilityBreach("adversary requested a signature for honest replica " +
                                       std::to_string(id));
        return makeSignature(id, over);
    }
    uint64_t rng() override
    {
        return mRng();
    }
    void note(ReplicaId r, const std::string& text) override
    {
        mTrace.append(mNow, r, "adversary-action", {{"note", text}});
    }

  private:
    bool isCorrupt(ReplicaId r) const
    {
        const auto& c = mScenario.adversary.corrupt;
        return std::find(c.begin(), c.end(), r) != c.end();
    }

    Tick deliveryTime(Tick sent, ReplicaId src, ReplicaId dst)
    {
        if (src == dst)
            return sent;
        Tick delta = mScenario.params.delta;
        if (mScenario.policy == "max")
            return sent + delta;
        Tick raw = sent + 1 + mRng() % (3 * delta);
        if (raw < mScenario.gst)
            return raw;
        return std::min(raw, std::max(sent, mScenario.gst) + delta);
    }

    void schedule(Tick t, int klass, std::variant<DeliverBody, TimerBody> body)
    {
        mQueue.push(Event{t, klass, mNextSeq++, std::move(body)});
    }

    void interpret(ReplicaId r, const std::vector<Action>& actions)
    {
        for (const Action& a : actions)
        {
            if (const auto* send = std::get_if<SendAction>(&a))
            {
                Bytes wire = serializeMessage(send->msg);
                bool toAll = send->dests.size() == mScenario.params.n;
                mTrace.append(mNow, r, "send",
                              {{"dst", toAll ? std::string("*") : joinIds(send->dests)},
                               {"msg", toHex(wire)}});
                for (ReplicaId dst : send->dests)
                    schedule(deliveryTime(mNow, r, dst), kClassDeliver,
                             DeliverBody{dst, r, send->msg});
            }
            else if (const auto* commit = std::get_if<CommitAction>(&a))
            {
                mTrace.append(mNow, r, "commit",
                              {{"h", std::to_string(commit->block.height)},
                               {"d", toHex(blockDigest(commit->block))},
                               {"direct", commit->direct ? "1" : "0"},
                               {"qcview", std::to_string(commit->qcView)}});
            }
            else if (const auto* timer = std::get_if<SetTimerAction>(&a))
            {
                schedule(timer->fireAt, kClassTimer, TimerBody{r, timer->view});
            }
            else if (const auto* enter = std::get_if<EnterViewAction>(&a))
            {
                mTrace.append(mNow, r, "view-enter", {{"v", std::to_string(enter->view)}});
            }
            else if (const auto* qc = std::get_if<QcFormedAction>(&a))
            {
                ByteWriter w;
                serialize(w, qc->qc);
                mTrace.append(mNow, r, "qc-formed", {{"msg", toHex(w.data())}});
            }
            else if (const auto* tc = std::get_if<TcFormedAction>(&a))
            {
                ByteWriter w;
                serialize(w, tc->tc);
                mTrace.append(mNow, r, "tc-formed", {{"msg", toHex(w.data())}});
            }
            else if (const auto* to = std::get_if<TimedOutAction>(&a))
            {
                mTrace.append(mNow, r, "timeout", {{"v", std::to_string(to->view)}});
            }
            else if (const auto* vote = std::get_if<VoteCastAction>(&a))
            {
                mTrace.append(mNow, r, "vote",
                              {{"v", std::to_string(vote->tuple.view)},
                               {"h", std::to_string(vote->tuple.block.height)},
                               {"d", toHex(blockDigest(vote->tuple.block))}});
            }
            else if (const auto* noteAct = std::get_if<NoteAction>(&a))
            {
                mTrace.append(mNow, r, "adversary-action", {{"note", noteAct->text}});
            }
        }
    }

    Scenario mScenario;
    uint64_t mSeed;
    std::mt19937_64 mRng;
    GenesisBundle mGenesis;
    TraceLog mTrace;
    std::map<ReplicaId, Replica> mHonest;
    std::unique_ptr<Strategy> mStrategy;
    std::priority_queue<Event, std::vector<Event>, EventAfter> mQueue;
    uint64_t mNextSeq{0};
    Tick mNow{0};
};

} // namespace

TraceLog runScenario(const Scenario& sc, uint64_t seed)
{
    Sim sim(sc, seed);
    return sim.run();
}

} // namespace smrsim
