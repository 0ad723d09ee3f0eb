// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/core.hpp"

#include <sodium.h>

#include <algorithm>

namespace smrsim
{

Digest sha256(const uint8_t* data, std::size_t len)
{
    Digest out{};
    crypto_hash_sha256(out.data(), data, static_cast<unsigned long long>(len));
    return out;
}

Digest sha256(const Bytes& data)
{
    return sha256(data.data(), data.size());
}

static const char* kHexDigits = "0123456789abcdef";

std::string toHex(const Bytes& b)
{
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t c : b)
    {
        s.push_back(kHexDigits[c >> 4]);
        s.push_back(kHexDigits[c & 0x0f]);
    }
    return s;
}

std::string toHex(const Digest& d)
{
    return toHex(Bytes(d.begin(), d.end()));
}

static int hexVal(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::optional<Bytes> bytesFromHex(const std::string& s)
{
    if (s.size() % 2 != 0)
        return std::nullopt;
    Bytes out;
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2)
    {
        int hi = hexVal(s[i]), lo = hexVal(s[i + 1]);
        if (hi < 0 || lo < 0)
            return std::nullopt;
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

std::optional<Digest> digestFromHex(const std::string& s)
{
    auto b = bytesFromHex(s);
    if (!b || b->size() != kDigestSize)
        return std::nullopt;
    Digest d{};
    std::copy(b->begin(), b->end(), d.begin());
    return d;
}

// --- ByteWriter / ByteReader -----------------------------------------------

void ByteWriter::u8(uint8_t v)
{
    mBuf.push_back(v);
}

void ByteWriter::u32(uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        mBuf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        mBuf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::digest(const Digest& d)
{
    mBuf.insert(mBuf.end(), d.begin(), d.end());
}

void ByteWriter::bytes(const Bytes& b)
{
    u32(static_cast<uint32_t>(b.size()));
    mBuf.insert(mBuf.end(), b.begin(), b.end());
}

void ByteReader::need(std::size_t k) const
{
    if (mBuf.size() - mPos < k)
        throw WireError("truncated input");
}

uint8_t ByteReader::u8()
{
    need(1);
    return mBuf[mPos++];
}

uint32_t ByteReader::u32()
{
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<uint32_t>(mBuf[mPos + i]) << (8 * i);
    mPos += 4;
    return v;
}

uint64_t ByteReader::u64()
{
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(mBuf[mPos + i]) << (8 * i);
    mPos += 8;
    return v;
}

Digest ByteReader::digest()
{
    need(kDigestSize);
    Digest d{};
    std::copy_n(mBuf.begin() + static_cast<std::ptrdiff_t>(mPos), kDigestSize, d.begin());
    mPos += kDigestSize;
    return d;
}

Bytes ByteReader::bytes()
{
    uint32_t len = u32();
    need(len);
    Bytes b(mBuf.begin() + static_cast<std::ptrdiff_t>(mPos),
            mBuf.begin() + static_cast<std::ptrdiff_t>(mPos + len));
    mPos += len;
    return b;
}

void ByteReader::expectEnd() const
{
    if (!atEnd())
        throw WireError("trailing bytes");
}

// --- Blocks and signatures -------------------------------------------------

void serialize(ByteWriter& w, const Block& b)
{
    w.u8(kTagBlock);
    w.digest(b.parent);
    w.u64(b.height);
    w.u32(static_cast<uint32_t>(b.txns.size()));
    for (const Bytes& t : b.txns)
        w.bytes(t);
}

Block deserializeBlock(ByteReader& r)
{
    if (r.u8() != kTagBlock)
        throw WireError("bad block tag");
    Block b;
    b.parent = r.digest();
    b.height = r.u64();
    uint32_t count = r.u32();
    b.txns.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
        b.txns.push_back(r.bytes());
    return b;
}

Digest blockDigest(const Block& b)
{
    ByteWriter w;
    serialize(w, b);
    return sha256(w.data());
}

void serialize(ByteWriter& w, const Signature& s)
{
    w.u32(s.signer);
    w.digest(s.over);
}

Signature deserializeSignature(ByteReader& r)
{
    Signature s;
    s.signer = r.u32();
    s.over = r.digest();
    return s;
}

Signature makeSignature(ReplicaId signer, const Digest& over)
{
    return Signature{signer, over};
}

bool verifySignature(const Signature& s, const Digest& expected)
{
    return s.signer != 0 && s.over == expected;
}

void serialize(ByteWriter& w, const ProposalTuple& t)
{
    w.u8(kTagProposalTuple);
    serialize(w, t.block);
    w.u64(t.view);
    serialize(w, t.leaderSig);
}

ProposalTuple deserializeProposalTuple(ByteReader& r)
{
    if (r.u8() != kTagProposalTuple)
        throw WireError("bad proposal-tuple tag");
    ProposalTuple t;
    t.block = deserializeBlock(r);
    t.view = r.u64();
    t.leaderSig = deserializeSignature(r);
    return t;
}

Digest tupleSignDigest(const Block& b, View v)
{
    ByteWriter w;
    w.u8(kTagProposalTuple);
    serialize(w, b);
    w.u64(v);
    return sha256(w.data());
}

Digest voteSignDigest(const ProposalTuple& t)
{
    ByteWriter w;
    w.u8(kTagVoteSign);
    serialize(w, t);
    return sha256(w.data());
}

// --- Parameters ------------------------------------------------------------

std::optional<Mutation> mutationFromName(const std::string& name)
{
    if (name == "none")
        return Mutation::none;
    if (name == "lower-quorum")
        return Mutation::lowerQuorum;
    if (name == "lower-lock-support")
        return Mutation::lowerLockSupport;
    if (name == "no-vote-dedup")
        return Mutation::noVoteDedup;
    return std::nullopt;
}

std::string mutationName(Mutation m)
{
    switch (m)
    {
    case Mutation::none:
        return "none";
    case Mutation::lowerQuorum:
        return "lower-quorum";
    case Mutation::lowerLockSupport:
        return "lower-lock-support";
    case Mutation::noVoteDedup:
        return "no-vote-dedup";
    }
    return "none";
}

std::optional<ValidityRule> validityRuleFromName(const std::string& name)
{
    if (name == "nonempty")
        return ValidityRule::nonEmpty;
    if (name == "all")
        return ValidityRule::acceptAll;
    return std::nullopt;
}

std::string validityRuleName(ValidityRule r)
{
    return r == ValidityRule::nonEmpty ? "nonempty" : "all";
}

bool isExternallyValid(const Params& p, const Payload& txns)
{
    switch (p.validity)
    {
    case ValidityRule::nonEmpty:
        return !txns.empty();
    case ValidityRule::acceptAll:
        return true;
    }
    return false;
}

// --- Block store and chain relations ---------------------------------------

bool BlockStore::put(const Block& b)
{
    if (const Block* parent = get(b.parent))
    {
        if (parent->height + 1 != b.height)
            return false;
    }
    mBlocks.emplace(blockDigest(b), b);
    return true;
}

const Block* BlockStore::get(const Digest& d) const
{
    auto it = mBlocks.find(d);
    return it == mBlocks.end() ? nullptr : &it->second;
}

ChainRelation relate(const BlockStore& store, const Block& a, const Block& b)
{
    Digest da = blockDigest(a), db = blockDigest(b);
    if (da == db)
        return ChainRelation::equal;
    if (a.height == b.height)
        return ChainRelation::conflicting;

    // Walk the higher block's parent digests down to the lower height. The
    // first step is free (the parent digest is a field of the block itself);
    // each further step resolves the current digest in the store.
    const Block* high = a.height > b.height ? &a : &b;
    const Block* low = a.height > b.height ? &b : &a;
    Digest lowDigest = a.height > b.height ? db : da;

    Digest cursor = high->parent;
    Height cursorHeight = high->height; // height of the block whose parent is `cursor`
    while (cursorHeight > low->height + 1)
    {
        const Block* blk = store.get(cursor);
        if (blk == nullptr)
            return ChainRelation::unknown;
        if (blk->height + 1 != cursorHeight)
            return ChainRelation::unknown; // malformed link; ancestry unprovable
        cursor = blk->parent;
        cursorHeight = blk->height;
    }
    if (cursor == lowDigest)
        return a.height > b.height ? ChainRelation::firstExtendsSecond
                                   : ChainRelation::secondExtendsFirst;
    return ChainRelation::conflicting;
}

bool extendsOrEquals(const BlockStore& store, const Block& a, const Block& b)
{
    ChainRelation rel = relate(store, a, b);
    return rel == ChainRelation::equal || rel == ChainRelation::firstExtendsSecond;
}

bool conflicts(const BlockStore& store, const Block& a, const Block& b)
{
    return relate(store, a, b) == ChainRelation::conflicting;
}

bool directlyExtends(const Block& child, const Block& candidate)
{
    return child.height == candidate.height + 1 && child.parent == blockDigest(candidate);
}

} // namespace smrsim
