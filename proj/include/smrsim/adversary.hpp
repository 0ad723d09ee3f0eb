// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/replica.hpp"

#include <memory>
#include <stdexcept>

namespace smrsim
{

// Thrown when a strategy asks the harness to sign for an honest replica.
// Signatures are idealized, so unforgeability is enforced here: the signing
// oracle covers corrupt ids only, and the trace checker audits that every
// honest signature first appears in an emission by its signer.
struct UnforgeabilityBreach : std::runtime_error
{
    explicit UnforgeabilityBreach(const std::string& what) : std::runtime_error(what)
    {
    }
};

// Harness services available to a strategy. All randomness must come from
// rng() so runs stay reproducible.
class StrategyCtx
{
  public:
    virtual ~StrategyCtx() = default;
    virtual const Params& params() const = 0;
    virtual const GenesisBundle& genesis() const = 0;
    virtual const std::vector<ReplicaId>& corrupt() const = 0;
    virtual PayloadSchedule schedule() const = 0;
    // @pre id is corrupt; throws UnforgeabilityBreach otherwise
    virtual Signature sign(ReplicaId id, const Digest& over) = 0;
    virtual uint64_t rng() = 0;
    virtual void note(ReplicaId r, const std::string& text) = 0;
};

// A corrupt replica runs a full honest state machine internally; the
// strategy transforms that machine's would-be actions into what actually
// happens. This keeps every strategy protocol-plausible by construction:
// deviations are edits of real behaviour, not hand-built message soup.
class Strategy
{
  public:
    virtual ~Strategy() = default;

    void init(StrategyCtx& ctx);
    std::vector<Action> corruptStart(StrategyCtx& ctx, ReplicaId self, Tick now);
    std::vector<Action> corruptMessage(StrategyCtx& ctx, ReplicaId self, Tick now, ReplicaId src,
                                       const Message& m);
    std::vector<Action> corruptTimer(StrategyCtx& ctx, ReplicaId self, Tick now, View view);

  protected:
    virtual std::vector<Action> transform(StrategyCtx& ctx, ReplicaId self, Tick now,
                                          std::vector<Action> honest) = 0;
    Replica* wrapped(ReplicaId id);
    std::vector<ReplicaId> honestIds(const StrategyCtx& ctx) const;

  private:
    std::map<ReplicaId, Replica> mWrapped;
};

// Known strategy names:
//   crash                  emits nothing at all
//   silent-leader          suppresses its own proposals, otherwise honest
//   equivocating-leader    proposes two sibling blocks to everyone
//   split-votes            proposes siblings to disjoint halves and votes
//                          both ways, one per half
//   conflicting-timeouts   reports different timeout contents to each half
//   stale-qc-proposer      proposes with an outdated parent certificate
//   status-equivocator     sends the leader a second, older status
std::unique_ptr<Strategy> makeStrategy(const std::string& name);
const std::vector<std::string>& strategyCatalog();

} // namespace smrsim
