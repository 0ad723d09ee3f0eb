// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace smrsim
{

namespace
{

std::string trim(const std::string& s)
{
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parseU64(const std::string& s, uint64_t& out)
{
    if (s.empty())
        return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string> splitList(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
    {
        cur = trim(cur);
        if (!cur.empty())
            out.push_back(cur);
    }
    return out;
}

std::optional<Tick> envTick(const char* name)
{
    const char* v = std::getenv(name);
    if (v == nullptr)
        return std::nullopt;
    uint64_t out = 0;
    if (!parseU64(v, out))
        return std::nullopt;
    return out;
}

} // namespace

std::optional<Scenario> parseScenario(const std::string& text, const std::string& fallbackName,
                                      std::string& err)
{
    Scenario sc;
    sc.name = fallbackName;
    bool sawDelta = false;
    bool sawHorizon = false;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineNo = 0;
    while (std::getline(in, raw))
    {
        ++lineNo;
        std::string line = raw;
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
            {
                err = "line " + std::to_string(lineNo) + ": unterminated section header";
                return std::nullopt;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "scenario" && section != "adversary" && section != "fuzz")
            {
                err = "line " + std::to_string(lineNo) + ": unknown section [" + section + "]";
                return std::nullopt;
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
        {
            err = "line " + std::to_string(lineNo) + ": expected key = value";
            return std::nullopt;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        uint64_t num = 0;
        bool isNum = parseU64(value, num);

        auto bad = [&](const std::string& why) {
            err = "line " + std::to_string(lineNo) + ": " + why;
            return std::nullopt;
        };

        if (section == "scenario")
        {
            if (key == "name")
                sc.name = value;
            else if (key == "n" && isNum)
                sc.params.n = static_cast<uint32_t>(num);
            else if (key == "f" && isNum)
                sc.params.f = static_cast<uint32_t>(num);
            else if (key == "delta" && isNum)
            {
                sc.params.delta = num;
                sawDelta = true;
            }
            else if (key == "gst" && isNum)
                sc.gst = num;
            else if (key == "horizon" && isNum)
            {
                sc.horizon = num;
                sawHorizon = true;
            }
            else if (key == "policy")
            {
                if (value != "max" && value != "random")
                    return bad("unknown delay policy '" + value + "'");
                sc.policy = value;
            }
            else if (key == "seed" && isNum)
                sc.seed = num;
            else if (key == "validity")
            {
                auto r = validityRuleFromName(value);
                if (!r)
                    return bad("unknown validity rule '" + value + "'");
                sc.params.validity = *r;
            }
            else if (key == "mutation")
            {
                auto m = mutationFromName(value);
                if (!m)
                    return bad("unknown mutation '" + value + "'");
                sc.params.mutation = *m;
            }
            else
                return bad("unknown or malformed [scenario] key '" + key + "'");
        }
        else if (section == "adversary")
        {
            if (key == "corrupt")
            {
                sc.adversary.corrupt.clear();
                for (const std::string& part : splitList(value))
                {
                    uint64_t id = 0;
                    if (!parseU64(part, id) || id == 0)
                        return bad("malformed corrupt id '" + part + "'");
                    sc.adversary.corrupt.push_back(static_cast<ReplicaId>(id));
                }
            }
            else if (key == "strategy")
                sc.adversary.strategy = value;
            else
                return bad("unknown [adversary] key '" + key + "'");
        }
        else if (section == "fuzz")
        {
            if (key == "runs" && isNum)
                sc.fuzz.runs = static_cast<uint32_t>(num);
            else if (key == "strategies")
                sc.fuzz.strategies = splitList(value);
            else if (key == "max-gst" && isNum)
                sc.fuzz.maxGst = num;
            else
                return bad("unknown or malformed [fuzz] key '" + key + "'");
        }
        else
        {
            err = "line " + std::to_string(lineNo) + ": key outside any section";
            return std::nullopt;
        }
    }

    if (!sawDelta)
        if (auto d = envTick("SMRSIM_DELTA"))
            sc.params.delta = *d;
    if (!sawHorizon)
    {
        if (auto h = envTick("SMRSIM_HORIZON"))
            sc.horizon = *h;
        else
            sc.horizon = 40 * sc.params.delta;
    }

    if (!sc.params.wellFormed())
    {
        err = "invalid system size: the protocol requires n >= 5f-1 and f >= 1 (got n=" +
              std::to_string(sc.params.n) + ", f=" + std::to_string(sc.params.f) + ")";
        return std::nullopt;
    }
    if (sc.params.delta == 0)
    {
        err = "delta must be positive";
        return std::nullopt;
    }
    std::sort(sc.adversary.corrupt.begin(), sc.adversary.corrupt.end());
    sc.adversary.corrupt.erase(
        std::unique(sc.adversary.corrupt.begin(), sc.adversary.corrupt.end()),
        sc.adversary.corrupt.end());
    for (ReplicaId id : sc.adversary.corrupt)
        if (!sc.params.validId(id))
        {
            err = "corrupt id " + std::to_string(id) + " out of range 1.." +
                  std::to_string(sc.params.n);
            return std::nullopt;
        }
    if (sc.adversary.corrupt.size() > sc.params.f)
    {
        err = "corrupt set larger than f=" + std::to_string(sc.params.f);
        return std::nullopt;
    }
    if (sc.adversary.strategy == "none" && !sc.adversary.corrupt.empty())
    {
        err = "corrupt replicas listed but strategy is 'none'";
        return std::nullopt;
    }
    return sc;
}

std::optional<Scenario> loadScenario(const std::string& path, std::string& err)
{
    std::ifstream in(path);
    if (!in)
    {
        err = "cannot open scenario file: " + path;
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string stem = path;
    auto slash = stem.find_last_of('/');
    if (slash != std::string::npos)
        stem = stem.substr(slash + 1);
    auto dot = stem.find_last_of('.');
    if (dot != std::string::npos)
        stem = stem.substr(0, dot);
    return parseScenario(buf.str(), stem, err);
}

} // namespace smrsim
