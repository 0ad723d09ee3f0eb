// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/trace.hpp"

#include <charconv>
#include <sstream>

namespace smrsim
{

namespace
{

constexpr const char* kHeaderLine = "# smrsim trace v1";

bool parseU64(const std::string& s, uint64_t& out)
{
    if (s.empty())
        return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

// Split "k1=v1 k2=v2 ..." into ordered pairs; returns false on malformed
// tokens.
bool splitKv(const std::string& line, std::size_t startAt,
             std::vector<std::pair<std::string, std::string>>& out)
{
    std::istringstream in(line.substr(startAt));
    std::string tok;
    while (in >> tok)
    {
        auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0)
            return false;
        out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
    return true;
}

std::optional<std::vector<ReplicaId>> idsFromJoined(const std::string& s)
{
    std::vector<ReplicaId> out;
    if (s.empty())
        return out;
    std::size_t pos = 0;
    while (pos <= s.size())
    {
        auto comma = s.find(',', pos);
        std::string part = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        uint64_t v = 0;
        if (!parseU64(part, v) || v == 0 || v > 0xffffffffull)
            return std::nullopt;
        out.push_back(static_cast<ReplicaId>(v));
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    return out;
}

} // namespace

std::string joinIds(const std::vector<ReplicaId>& ids)
{
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i)
    {
        if (i)
            out += ',';
        out += std::to_string(ids[i]);
    }
    return out;
}

std::string sanitizeToken(const std::string& s)
{
    std::string out = s;
    for (char& c : out)
    {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_' || c == '.' || c == ',' || c == ':' || c == '*' || c == '+';
        if (!ok)
            c = '-';
    }
    return out;
}

TraceLog::TraceLog(TraceMeta meta) : mMeta(std::move(meta))
{
}

void TraceLog::append(Tick t, ReplicaId r, const std::string& ev,
                      std::vector<std::pair<std::string, std::string>> kv)
{
    TraceRecord rec;
    rec.seq = mRecords.size();
    rec.t = t;
    rec.r = r;
    rec.ev = ev;
    for (auto& [k, v] : kv)
        rec.kv.emplace_back(k, sanitizeToken(v));
    mRecords.push_back(std::move(rec));
}

std::string TraceLog::render() const
{
    std::ostringstream out;
    out << kHeaderLine << '\n';
    out << "meta scenario=" << sanitizeToken(mMeta.scenario) << " n=" << mMeta.params.n
        << " f=" << mMeta.params.f << " delta=" << mMeta.params.delta
        << " validity=" << validityRuleName(mMeta.params.validity)
        << " mutation=" << mutationName(mMeta.params.mutation) << " gst=" << mMeta.gst
        << " horizon=" << mMeta.horizon << " policy=" << sanitizeToken(mMeta.policy)
        << " seed=" << mMeta.seed << " corrupt=" << joinIds(mMeta.corrupt)
        << " strategy=" << sanitizeToken(mMeta.strategy)
        << " hash=sha-256 tiebreak=deliver-timer-inject\n";
    for (const TraceRecord& rec : mRecords)
    {
        out << "seq=" << rec.seq << " t=" << rec.t << " r=" << rec.r << " ev=" << rec.ev;
        for (const auto& [k, v] : rec.kv)
            out << ' ' << k << '=' << v;
        out << '\n';
    }
    out << "# end records=" << mRecords.size() << '\n';
    return out.str();
}

Digest TraceLog::digest() const
{
    std::string text = render();
    return sha256(reinterpret_cast<const uint8_t*>(text.data()), text.size());
}

std::optional<TraceLog> TraceLog::parse(const std::string& text, std::string& err)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeaderLine)
    {
        err = "not a smrsim v1 trace";
        return std::nullopt;
    }
    if (!std::getline(in, line) || line.rfind("meta ", 0) != 0)
    {
        err = "missing meta line";
        return std::nullopt;
    }
    std::vector<std::pair<std::string, std::string>> metaKv;
    if (!splitKv(line, 5, metaKv))
    {
        err = "malformed meta line";
        return std::nullopt;
    }
    TraceMeta meta;
    bool sawHash = false;
    for (const auto& [k, v] : metaKv)
    {
        uint64_t num = 0;
        if (k == "scenario")
            meta.scenario = v;
        else if (k == "n" && parseU64(v, num))
            meta.params.n = static_cast<uint32_t>(num);
        else if (k == "f" && parseU64(v, num))
            meta.params.f = static_cast<uint32_t>(num);
        else if (k == "delta" && parseU64(v, num))
            meta.params.delta = num;
        else if (k == "validity")
        {
            auto r = validityRuleFromName(v);
            if (!r)
            {
                err = "unknown validity rule: " + v;
                return std::nullopt;
            }
            meta.params.validity = *r;
        }
        else if (k == "mutation")
        {
            auto m = mutationFromName(v);
            if (!m)
            {
                err = "unknown mutation: " + v;
                return std::nullopt;
            }
            meta.params.mutation = *m;
        }
        else if (k == "gst" && parseU64(v, num))
            meta.gst = num;
        else if (k == "horizon" && parseU64(v, num))
            meta.horizon = num;
        else if (k == "policy")
            meta.policy = v;
        else if (k == "seed" && parseU64(v, num))
            meta.seed = num;
        else if (k == "corrupt")
        {
            auto ids = idsFromJoined(v);
            if (!ids)
            {
                err = "malformed corrupt list";
                return std::nullopt;
            }
            meta.corrupt = *ids;
        }
        else if (k == "strategy")
            meta.strategy = v;
        else if (k == "hash")
        {
            if (v != "sha-256")
            {
                err = "unknown hash algorithm: " + v;
                return std::nullopt;
            }
            sawHash = true;
        }
        else if (k == "tiebreak")
        {
            if (v != "deliver-timer-inject")
            {
                err = "unknown tiebreak order: " + v;
                return std::nullopt;
            }
        }
        else
        {
            err = "malformed meta field: " + k;
            return std::nullopt;
        }
    }
    if (!sawHash)
    {
        err = "meta line names no hash algorithm";
        return std::nullopt;
    }

    TraceLog log(meta);
    bool sawEnd = false;
    uint64_t declared = 0;
    while (std::getline(in, line))
    {
        if (line.rfind("# end records=", 0) == 0)
        {
            if (!parseU64(line.substr(14), declared))
            {
                err = "malformed end line";
                return std::nullopt;
            }
            sawEnd = true;
            break;
        }
        std::vector<std::pair<std::string, std::string>> kv;
        if (!splitKv(line, 0, kv) || kv.size() < 4 || kv[0].first != "seq" ||
            kv[1].first != "t" || kv[2].first != "r" || kv[3].first != "ev")
        {
            err = "malformed record at line: " + line;
            return std::nullopt;
        }
        TraceRecord rec;
        uint64_t num = 0;
        if (!parseU64(kv[0].second, num) || num != log.mRecords.size())
        {
            err = "record sequence break";
            return std::nullopt;
        }
        rec.seq = num;
        if (!parseU64(kv[1].second, num))
        {
            err = "malformed record time";
            return std::nullopt;
        }
        rec.t = num;
        if (!parseU64(kv[2].second, num))
        {
            err = "malformed record replica";
            return std::nullopt;
        }
        rec.r = static_cast<ReplicaId>(num);
        rec.ev = kv[3].second;
        rec.kv.assign(kv.begin() + 4, kv.end());
        log.mRecords.push_back(std::move(rec));
    }
    if (!sawEnd || declared != log.mRecords.size())
    {
        err = "incomplete trace";
        return std::nullopt;
    }
    return log;
}

} // namespace smrsim
