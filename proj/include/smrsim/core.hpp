// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smrsim
{

using ReplicaId = uint32_t; // replicas are numbered 1..n; 0 is never a valid id
using View = uint64_t;      // views are numbered 1,2,...; view 0 is the synthetic genesis view
using Height = uint64_t;
using Tick = uint64_t;      // integer simulation time

using Bytes = std::vector<uint8_t>;
using Payload = std::vector<Bytes>; // a batch of opaque transactions

constexpr std::size_t kDigestSize = 32;
using Digest = std::array<uint8_t, kDigestSize>;

Digest sha256(const uint8_t* data, std::size_t len);
Digest sha256(const Bytes& data);
std::string toHex(const Digest& d);
std::string toHex(const Bytes& b);
std::optional<Digest> digestFromHex(const std::string& s);
std::optional<Bytes> bytesFromHex(const std::string& s);

inline Digest zeroDigest()
{
    return Digest{};
}

// ---------------------------------------------------------------------------
// Canonical serialization: little-endian fixed-width integers, u32
// length-prefixed byte strings, fields concatenated in declaration order,
// each top-level structure introduced by a one-byte type tag. This byte form
// is both the signing pre-image domain and the trace-embedded wire form; the
// full layout is documented in docs/formats.md.
// ---------------------------------------------------------------------------

struct WireError : std::runtime_error
{
    explicit WireError(const std::string& what) : std::runtime_error(what)
    {
    }
};

class ByteWriter
{
  public:
    void u8(uint8_t v);
    void u32(uint32_t v);
    void u64(uint64_t v);
    void digest(const Digest& d);
    void bytes(const Bytes& b); // u32 length prefix + raw bytes
    Bytes const& data() const
    {
        return mBuf;
    }
    Bytes take()
    {
        return std::move(mBuf);
    }

  private:
    Bytes mBuf;
};

class ByteReader
{
  public:
    explicit ByteReader(const Bytes& buf) : mBuf(buf)
    {
    }
    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    Digest digest();
    Bytes bytes();
    bool atEnd() const
    {
        return mPos == mBuf.size();
    }
    void expectEnd() const;

  private:
    void need(std::size_t k) const;
    const Bytes& mBuf;
    std::size_t mPos{0};
};

// Type tags for the signing/wire domains. Distinct tags keep the pre-images
// of different structures disjoint.
enum WireTag : uint8_t
{
    kTagBlock = 0x01,
    kTagProposalTuple = 0x02,
    kTagVoteSign = 0x03,
    kTagTimeoutSign = 0x04,
    kTagStatusSign = 0x05,
    kTagQuorumCert = 0x06,
    kTagTimeoutCert = 0x07,
    kTagProposeSign = 0x08,
    kTagStatusSet = 0x09,
    kTagMsgPropose = 0x10,
    kTagMsgVote = 0x11,
    kTagMsgTimeout = 0x12,
    kTagMsgStatus = 0x13,
    kTagMsgQcForward = 0x14,
    kTagMsgTimeoutForward = 0x15,
};

// ---------------------------------------------------------------------------
// Blocks and signatures
// ---------------------------------------------------------------------------

// A block at height k carries the digest of its height-(k-1) parent, so
// every block pins its entire ancestor chain. The genesis block has height 0
// and the all-zero parent digest.
struct Block
{
    Digest parent{};
    Height height{0};
    Payload txns;

    bool operator==(const Block&) const = default;
};

void serialize(ByteWriter& w, const Block& b);
Block deserializeBlock(ByteReader& r);

// Digest of the canonical serialization; the identity of a block.
Digest blockDigest(const Block& b);

// Idealized signature: (signer, digest-signed-over). Verification recomputes
// the expected digest and compares. Unforgeability of honest-replica
// signatures is a harness-enforced property: the simulator only hands
// adversaries a signing oracle for corrupt ids, and the trace checker audits
// that every honest signature first appears in an emission by its signer.
struct Signature
{
    ReplicaId signer{0};
    Digest over{};

    bool operator==(const Signature&) const = default;
    auto operator<=>(const Signature&) const = default;
};

void serialize(ByteWriter& w, const Signature& s);
Signature deserializeSignature(ByteReader& r);

Signature makeSignature(ReplicaId signer, const Digest& over);
bool verifySignature(const Signature& s, const Digest& expected);

// A leader-signed (block, view) pair: the unit that gets voted on and the
// only form in which blocks travel inside timeout messages.
struct ProposalTuple
{
    Block block;
    View view{0};
    Signature leaderSig; // over tupleSignDigest(block, view)

    bool operator==(const ProposalTuple&) const = default;
};

void serialize(ByteWriter& w, const ProposalTuple& t);
ProposalTuple deserializeProposalTuple(ByteReader& r);

// Signing pre-image digests.
Digest tupleSignDigest(const Block& b, View v);
Digest voteSignDigest(const ProposalTuple& t);

// ---------------------------------------------------------------------------
// Protocol parameters
// ---------------------------------------------------------------------------

// Known-bad protocol mutations used to demonstrate checker sensitivity.
// They weaken the replica-side logic only; checkers always evaluate with
// Mutation::none.
enum class Mutation
{
    none,
    lowerQuorum,      // certificate quorum n-f  ->  n-f-1
    lowerLockSupport, // lock support threshold without the leader 2f -> 2f-1
    noVoteDedup,      // drop the one-vote-per-(view,height) rule
};

std::optional<Mutation> mutationFromName(const std::string& name);
std::string mutationName(Mutation m);

enum class ValidityRule
{
    nonEmpty, // a block is externally valid iff its batch has >= 1 transaction
    acceptAll,
};

std::optional<ValidityRule> validityRuleFromName(const std::string& name);
std::string validityRuleName(ValidityRule r);

struct Params
{
    uint32_t n{4};
    uint32_t f{1};
    ValidityRule validity{ValidityRule::nonEmpty};
    Mutation mutation{Mutation::none};
    Tick delta{10}; // post-GST delivery bound, in ticks; drives progress deadlines

    // Fault bound: safety and liveness require n >= 5f-1.
    bool wellFormed() const
    {
        return f >= 1 && n >= 5 * f - 1;
    }

    // Votes (or timeout messages) from distinct replicas needed to form a
    // certificate.
    uint32_t quorum() const
    {
        return n - f - (mutation == Mutation::lowerQuorum ? 1 : 0);
    }

    // Lock support needed when the timeout set contains no conflicting
    // blocks (lock condition 1).
    uint32_t lockSupportCompat() const
    {
        return n - 3 * f;
    }

    // Lock support needed when the timeout set excludes the leader
    // (lock condition 2).
    uint32_t lockSupportNoLeader() const
    {
        return 2 * f - (mutation == Mutation::lowerLockSupport ? 1 : 0);
    }

    // Round-robin leader schedule over views 1,2,...; view 0 (the synthetic
    // genesis view) maps to replica n, so it never collides with view 1.
    ReplicaId leaderOf(View w) const
    {
        return static_cast<ReplicaId>((w + n - 1) % n + 1);
    }

    bool validId(ReplicaId r) const
    {
        return r >= 1 && r <= n;
    }
};

bool isExternallyValid(const Params& p, const Payload& txns);

// ---------------------------------------------------------------------------
// Block store and chain relations
// ---------------------------------------------------------------------------

enum class ChainRelation
{
    equal,
    firstExtendsSecond,  // strict descendant
    secondExtendsFirst,  // strict ancestor
    conflicting,         // on provably different branches
    unknown,             // an intermediate ancestor is not resolvable
};

// Content-addressed block storage. Inserts are idempotent and reject blocks
// whose height contradicts an already-known parent.
class BlockStore
{
  public:
    // @post returns false iff the block's parent is known and
    //       parent.height + 1 != b.height (malformed chain link)
    bool put(const Block& b);
    const Block* get(const Digest& d) const;
    bool contains(const Digest& d) const
    {
        return get(d) != nullptr;
    }
    std::size_t size() const
    {
        return mBlocks.size();
    }

  private:
    std::map<Digest, Block> mBlocks;
};

// Relate two blocks by walking parent digests from the higher block down to
// the lower height.
//
// @pre  a and b are structurally valid blocks
// @post equal iff identical digests; firstExtendsSecond iff b is on a's
//       ancestor chain (strictly); conflicting iff the chains provably
//       diverge; unknown iff the walk needs a block the store cannot resolve
ChainRelation relate(const BlockStore& store, const Block& a, const Block& b);

// "a equals or extends b", the ordering used throughout vote validation.
// Unknown ancestry is NOT extension: callers that must be conservative in
// the other direction use relate() directly.
bool extendsOrEquals(const BlockStore& store, const Block& a, const Block& b);

// Definite conflict: provably on different branches.
bool conflicts(const BlockStore& store, const Block& a, const Block& b);

// One-step extension decidable from the child's own fields: the child's
// parent digest names the candidate and heights are adjacent.
bool directlyExtends(const Block& child, const Block& candidate);

} // namespace smrsim
