// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "smrsim/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace smrsim
{

// Effective run configuration, echoed into the trace header so a trace is
// self-contained: the checkers re-derive everything they need from the trace
// alone.
struct TraceMeta
{
    std::string scenario{"unnamed"};
    Params params;
    Tick gst{0};
    Tick horizon{0};
    std::string policy{"max"}; // delay policy: "max" or "random"
    uint64_t seed{0};
    std::vector<ReplicaId> corrupt; // sorted
    std::string strategy{"none"};
};

// One observable event. `kv` preserves emission order; values never contain
// spaces (enforced by sanitizing at append time).
struct TraceRecord
{
    uint64_t seq{0};
    Tick t{0};
    ReplicaId r{0};
    std::string ev;
    std::vector<std::pair<std::string, std::string>> kv;
};

// Event categories:
//   send             dst=<id,id,..|*> msg=<hex>
//   deliver          src=<id> msg=<hex>
//   vote             v=<view> h=<height> d=<block digest hex>
//   commit           h=<height> d=<block digest hex> direct=<0|1> qcview=<view>
//   view-enter       v=<view>
//   timeout          v=<view>
//   qc-formed        msg=<hex of the certificate>
//   tc-formed        msg=<hex of the certificate>
//   adversary-action note=<token>
//
// Text form:
//   line 1: "# smrsim trace v1"
//   line 2: "meta <key>=<value> ..." (fixed key order, hash=sha-256 names the
//           digest algorithm; parsers refuse traces naming an unknown one)
//   then one "seq=.. t=.. r=.. ev=.. .." line per record, seq contiguous
//   from 0, and a final "# end records=<count>" line. A trace missing its
//   end line is incomplete and is refused by the offline checker.
class TraceLog
{
  public:
    explicit TraceLog(TraceMeta meta);

    void append(Tick t, ReplicaId r, const std::string& ev,
                std::vector<std::pair<std::string, std::string>> kv);

    const TraceMeta& meta() const
    {
        return mMeta;
    }
    const std::vector<TraceRecord>& records() const
    {
        return mRecords;
    }

    std::string render() const;
    Digest digest() const; // sha-256 of the rendered text

    // Parse a rendered trace. On failure returns nullopt and sets `err`
    // ("incomplete trace" when the end line is missing or the record count
    // disagrees; a description of the defect otherwise).
    static std::optional<TraceLog> parse(const std::string& text, std::string& err);

  private:
    TraceMeta mMeta;
    std::vector<TraceRecord> mRecords;
};

// Helpers shared by the emitters.
std::string joinIds(const std::vector<ReplicaId>& ids); // "1,3,4"; "" when empty
std::string sanitizeToken(const std::string& s);

} // namespace smrsim
