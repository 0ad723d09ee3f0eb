// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/scenario.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smrsim
{

// One fuzz run that tripped the verifier (or crashed), with everything
// needed to reproduce it: run index i uses seed seedBase + i to derive the
// adversary configuration and the simulation seed.
struct FuzzFailure
{
    uint64_t index{0};
    uint64_t derivationSeed{0};
    uint64_t simSeed{0};
    std::string strategy;
    std::vector<ReplicaId> corrupt;
    Tick gst{0};
    std::vector<std::string> failedChecks;
    std::string firstDetail;
};

struct FuzzSummary
{
    uint64_t runs{0};
    uint64_t failures{0};
    std::optional<FuzzFailure> first; // lowest failing run index
    std::map<std::string, uint64_t> runsByStrategy;
    std::map<std::string, uint64_t> failuresByCheck;

    bool ok() const
    {
        return failures == 0;
    }
};

// Randomized adversarial exploration of one configuration. Each run i
// derives deterministically from seedBase + i:
//   - strategy: one draw from the template's strategy pool (the full
//     catalog when the template lists none), with roughly one run in eight
//     kept fully honest
//   - corrupt set: between 1 and f distinct replica ids (empty when honest)
//   - GST: uniform over [0, template max-gst]
//   - delay policy: "random"
// A run fails when the trace verifier reports a violation of trace
// decoding, safety, certificate consistency, external validity, or (for
// n <= 6) the view-change lock audit. Runs execute in parallel when OpenMP
// is available; results are independent of thread count.
FuzzSummary fuzzScenario(const Scenario& base, uint64_t runs, uint64_t seedBase);

} // namespace smrsim
