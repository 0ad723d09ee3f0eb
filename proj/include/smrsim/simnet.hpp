// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/replica.hpp"
#include "smrsim/scenario.hpp"
#include "smrsim/trace.hpp"

namespace smrsim
{

// Execute one scenario with the given seed and return the full trace.
//
// Discrete-event semantics, all deterministic for a fixed (scenario, seed):
//   - integer ticks; events ordered by (time, class, schedule sequence) with
//     class order deliver < timer < inject
//   - a replica's message to itself is delivered at the same tick
//   - delay policy "max": every other delivery takes exactly delta
//   - delay policy "random": raw delay is 1 + (rng mod 3*delta); deliveries
//     that would land at or after GST are clamped to
//     min(raw, max(send-time, GST) + delta), so every message sent at or
//     after GST - and every message still in flight at GST - arrives within
//     delta of max(send-time, GST)
//   - the run stops after the horizon tick or when no events remain
//
// Throws UnforgeabilityBreach if the adversary attempts to sign for an
// honest replica. Throws std::runtime_error on an unknown strategy name.
TraceLog runScenario(const Scenario& sc, uint64_t seed);

// The transaction batch injected at each height: a single marker transaction
// derived from the height, identical across replicas.
PayloadSchedule defaultSchedule();

} // namespace smrsim
