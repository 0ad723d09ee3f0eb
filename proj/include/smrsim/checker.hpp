// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/trace.hpp"

#include <map>
#include <string>
#include <vector>

namespace smrsim
{

// Outcome of one invariant check over a trace.
//   pass           the property was exercised and held everywhere
//   fail           at least one violation; see details
//   not-applicable the trace's configuration is outside the check's domain
//   vacuous-pass   nothing in the trace exercised the property
struct CheckResult
{
    std::string name;
    std::string verdict;
    std::vector<std::string> details; // violations or warnings, capped
};

// Commit latency of one height, measured from the first proposal carrying
// the block to the last honest replica's commit of it.
struct HeightLatency
{
    Height height{0};
    Tick proposedAt{0};
    Tick committedAt{0}; // last honest commit
    Tick ticks{0};
    double rounds{0}; // ticks divided by the delivery bound
};

struct TraceStats
{
    uint64_t records{0};
    std::map<std::string, uint64_t> sendsByKind; // messages sent, by kind
    View highestView{1};                         // highest view any honest replica entered
    uint64_t viewChanges{0};                     // highestView - 1
    uint64_t honestTimeouts{0};
    std::vector<HeightLatency> latencies; // heights committed by every honest replica
};

struct CheckReport
{
    std::vector<CheckResult> checks;
    TraceStats stats;

    bool ok() const; // no check failed
    const CheckResult* find(const std::string& name) const;
};

// Re-derive and verify the protocol's invariants from a trace alone.
//
// The verifier is independent of the replica implementation: it rebuilds a
// global block store and the full certificate universe from the bytes
// embedded in the trace, then replays the invariants against pristine
// parameters (any fault-injection mutation in the recorded parameters is
// switched off, so a mutated run is judged by the unmutated rules).
//
// Checks, in report order:
//   trace-decode             every embedded byte string decodes
//   check_safety             committed-height agreement across honest
//                            replicas, per-replica chain shape, and the
//                            signature-isolation audit (no honest replica's
//                            signature may circulate before that replica
//                            first emitted it; the synthetic view-0
//                            bootstrap signatures are exempt)
//   check_lemma1_lemma3      every valid certificate ranking at or above a
//                            direct commit certifies the committed block or
//                            a descendant of it
//   check_lemma2             view-change lock audit (small n only): no
//                            formable timeout certificate of a view locks a
//                            block conflicting that view's highest
//                            certified block, and every honest replica
//                            enters the next view holding a formed timeout
//                            certificate that keeps any directly committed
//                            block locked
//   check_external_validity  committed and honest-voted blocks satisfy the
//                            configured transaction-validity rule
//   check_latency            under the worst-case delay policy, a block
//                            proposed by an honest leader after GST in a
//                            view nobody honest timed out commits at every
//                            honest replica within two delivery bounds
//   check_liveness           every window of f+2 consecutive post-GST view
//                            entries at an honest replica contains a commit
CheckReport checkTrace(const TraceLog& trace);

} // namespace smrsim
