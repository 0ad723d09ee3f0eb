// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/core.hpp"

#include <string>
#include <vector>

namespace smrsim
{

// Which replicas are faulty and how they behave. Strategy names are resolved
// by the adversary module; "none" means every replica is honest.
struct AdversarySpec
{
    std::vector<ReplicaId> corrupt; // sorted, distinct, |corrupt| <= f
    std::string strategy{"none"};
};

// Template knobs for randomized runs: each run draws a strategy from the
// pool, a corrupt set of the drawn size, and a GST in [0, maxGst].
struct FuzzSpec
{
    uint32_t runs{100};
    std::vector<std::string> strategies; // empty = full catalog
    Tick maxGst{0};
};

// A parsed scenario file. Sections: [scenario] (system size, timing, delay
// policy, validity rule, mutation), [adversary], [fuzz].
struct Scenario
{
    std::string name{"unnamed"};
    Params params;
    Tick gst{0};
    Tick horizon{0};   // run until simulated time exceeds this
    std::string policy{"max"};
    uint64_t seed{1};  // default; the command line overrides
    AdversarySpec adversary;
    FuzzSpec fuzz;
};

// Parse scenario text. `fallbackName` names the scenario when the file does
// not. On failure returns nullopt and sets `err` to a one-line description.
// Environment variables SMRSIM_DELTA and SMRSIM_HORIZON override the
// defaults for keys the file does not set; explicit file values always win.
std::optional<Scenario> parseScenario(const std::string& text, const std::string& fallbackName,
                                      std::string& err);

// Load and parse a scenario file.
std::optional<Scenario> loadScenario(const std::string& path, std::string& err);

} // namespace smrsim
