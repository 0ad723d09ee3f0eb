// Copyright 2026 smrsim contributors. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "smrsim/checker.hpp"

#include "smrsim/certs.hpp"
#include "smrsim/messages.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace smrsim
{

namespace
{

constexpr std::size_t kMaxDetails = 25;

void addDetail(std::vector<std::string>& details, std::size_t& suppressed, const std::string& msg)
{
    if (details.size() < kMaxDetails)
        details.push_back(msg);
    else
        suppressed++;
}

void sealDetails(std::vector<std::string>& details, std::size_t suppressed)
{
    if (suppressed > 0)
        details.push_back("... " + std::to_string(suppressed) + " further violations suppressed");
}

const std::string* kvGet(const TraceRecord& rec, const std::string& key)
{
    for (const auto& [k, v] : rec.kv)
        if (k == key)
            return &v;
    return nullptr;
}

std::optional<uint64_t> parseU64(const std::string& s)
{
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        return std::nullopt;
    try
    {
        return std::stoull(s);
    }
    catch (const std::exception&)
    {
        return std::nullopt;
    }
}

// --- Per-category record views ---------------------------------------------

struct SendRec
{
    uint64_t seq{0};
    Tick t{0};
    ReplicaId r{0};
    Message msg;
};

struct CommitRec
{
    uint64_t seq{0};
    Tick t{0};
    ReplicaId r{0};
    Height h{0};
    Digest d{};
    bool direct{false};
    View qcView{0};
};

struct VoteRec
{
    uint64_t seq{0};
    Tick t{0};
    ReplicaId r{0};
    View v{0};
    Height h{0};
    Digest d{};
};

struct ViewEnterRec
{
    uint64_t seq{0};
    Tick t{0};
    ReplicaId r{0};
    View v{0};
};

struct TimeoutRec
{
    uint64_t seq{0};
    Tick t{0};
    ReplicaId r{0};
    View v{0};
};

struct TcFormedRec
{
    uint64_t seq{0};
    Tick t{0};
    ReplicaId r{0};
    TimeoutCert tc;
};

// Signatures observed in one record, for the isolation audit. A replica's
// own send legitimizes its signatures; every other appearance must already
// be legitimate.
struct SigCarrier
{
    uint64_t seq{0};
    Tick t{0};
    ReplicaId r{0};
    bool isSend{false};
    std::vector<Signature> sigs;
};

// Everything the checks consume, rebuilt from the trace alone.
struct Universe
{
    Params pristine;
    GenesisBundle genesis;
    std::set<ReplicaId> honest;
    BlockStore store;
    std::map<Digest, QuorumCert> qcs;  // every certificate seen anywhere
    std::map<Digest, TimeoutCert> tcs; // every timeout certificate seen anywhere
    std::map<View, std::map<ReplicaId, std::vector<TimeoutMsg>>> timeouts; // distinct variants

    std::vector<SendRec> sends;
    std::vector<CommitRec> commits;
    std::vector<VoteRec> votes;
    std::vector<ViewEnterRec> viewEnters;
    std::vector<TimeoutRec> timeoutRecs;
    std::vector<TcFormedRec> tcFormeds;
    std::vector<SigCarrier> sigCarriers;

    std::vector<std::string> decodeErrors;

    bool isHonest(ReplicaId r) const
    {
        return honest.count(r) > 0;
    }
};

// --- Universe construction --------------------------------------------------

void addBlock(Universe& u, const Block& b)
{
    u.store.put(b);
}

void addTimeout(Universe& u, const TimeoutMsg& t)
{
    if (t.inner)
        addBlock(u, t.inner->block);
    auto& variants = u.timeouts[t.view][t.senderSig.signer];
    for (const TimeoutMsg& seen : variants)
        if (seen == t)
            return;
    variants.push_back(t);
}

void addQc(Universe& u, const QuorumCert& qc)
{
    addBlock(u, qc.tuple.block);
    u.qcs.emplace(qcDigest(qc), qc);
}

void addTc(Universe& u, const TimeoutCert& tc)
{
    for (const TimeoutMsg& t : tc.entries)
        addTimeout(u, t);
    u.tcs.emplace(tcDigest(tc), tc);
}

void addStatus(Universe& u, const StatusMsg& m)
{
    addQc(u, m.parentQc);
    addTc(u, m.highTc);
}

void addMessage(Universe& u, const Message& m)
{
    if (const auto* p = std::get_if<ProposeMsg>(&m))
    {
        addBlock(u, p->tuple.block);
        addQc(u, p->parentQc);
        if (const auto* tc = std::get_if<TimeoutCert>(&p->proof))
            addTc(u, *tc);
        else if (const auto* statuses = std::get_if<std::vector<StatusMsg>>(&p->proof))
            for (const StatusMsg& s : *statuses)
                addStatus(u, s);
    }
    else if (const auto* v = std::get_if<VoteMsg>(&m))
    {
        addBlock(u, v->tuple.block);
    }
    else if (const auto* t = std::get_if<TimeoutMsg>(&m))
    {
        addTimeout(u, *t);
    }
    else if (const auto* s = std::get_if<StatusMsg>(&m))
    {
        addStatus(u, *s);
    }
    else if (const auto* qf = std::get_if<QcForwardMsg>(&m))
    {
        addQc(u, qf->qc);
    }
    else if (const auto* tf = std::get_if<TimeoutForwardMsg>(&m))
    {
        for (const TimeoutMsg& to : tf->timeouts)
            addTimeout(u, to);
    }
}

// --- Signature enumeration ---------------------------------------------------

void collectSigs(const QuorumCert& qc, std::vector<Signature>& out)
{
    out.push_back(qc.tuple.leaderSig);
    for (const Signature& s : qc.votes)
        out.push_back(s);
}

void collectSigs(const TimeoutMsg& t, std::vector<Signature>& out)
{
    out.push_back(t.senderSig);
    if (t.inner)
        out.push_back(t.inner->leaderSig);
}

void collectSigs(const TimeoutCert& tc, std::vector<Signature>& out)
{
    for (const TimeoutMsg& t : tc.entries)
        collectSigs(t, out);
}

void collectSigs(const StatusMsg& m, std::vector<Signature>& out)
{
    out.push_back(m.senderSig);
    collectSigs(m.parentQc, out);
    collectSigs(m.highTc, out);
}

void collectSigs(const Message& m, std::vector<Signature>& out)
{
    if (const auto* p = std::get_if<ProposeMsg>(&m))
    {
        out.push_back(p->tuple.leaderSig);
        out.push_back(p->outerSig);
        collectSigs(p->parentQc, out);
        if (const auto* tc = std::get_if<TimeoutCert>(&p->proof))
            collectSigs(*tc, out);
        else if (const auto* statuses = std::get_if<std::vector<StatusMsg>>(&p->proof))
            for (const StatusMsg& s : *statuses)
                collectSigs(s, out);
    }
    else if (const auto* v = std::get_if<VoteMsg>(&m))
    {
        out.push_back(v->tuple.leaderSig);
        out.push_back(v->voterSig);
    }
    else if (const auto* t = std::get_if<TimeoutMsg>(&m))
    {
        collectSigs(*t, out);
    }
    else if (const auto* s = std::get_if<StatusMsg>(&m))
    {
        collectSigs(*s, out);
    }
    else if (const auto* qf = std::get_if<QcForwardMsg>(&m))
    {
        collectSigs(qf->qc, out);
    }
    else if (const auto* tf = std::get_if<TimeoutForwardMsg>(&m))
    {
        for (const TimeoutMsg& to : tf->timeouts)
            collectSigs(to, out);
    }
}

std::string describe(const TraceRecord& rec)
{
    return "record seq=" + std::to_string(rec.seq) + " t=" + std::to_string(rec.t) +
           " r=" + std::to_string(rec.r) + " ev=" + rec.ev;
}

Universe buildUniverse(const TraceLog& trace)
{
    Universe u;
    u.pristine = trace.meta().params;
    u.pristine.mutation = Mutation::none;
    u.genesis = makeGenesis(u.pristine);
    for (ReplicaId r = 1; r <= u.pristine.n; ++r)
        u.honest.insert(r);
    for (ReplicaId r : trace.meta().corrupt)
        u.honest.erase(r);

    addBlock(u, u.genesis.block);
    addQc(u, u.genesis.qc);
    addTc(u, u.genesis.tc);

    for (const TraceRecord& rec : trace.records())
    {
        if (rec.ev == "send" || rec.ev == "deliver")
        {
            const std::string* hex = kvGet(rec, "msg");
            if (!hex)
            {
                u.decodeErrors.push_back(describe(rec) + ": missing msg field");
                continue;
            }
            std::optional<Bytes> wire = bytesFromHex(*hex);
            if (!wire)
            {
                u.decodeErrors.push_back(describe(rec) + ": msg is not valid hex");
                continue;
            }
            try
            {
                Message m = deserializeMessage(*wire);
                addMessage(u, m);
                SigCarrier carrier{rec.seq, rec.t, rec.r, rec.ev == "send", {}};
                collectSigs(m, carrier.sigs);
                u.sigCarriers.push_back(std::move(carrier));
                if (rec.ev == "send")
                    u.sends.push_back(SendRec{rec.seq, rec.t, rec.r, std::move(m)});
            }
            catch (const WireError& e)
            {
                u.decodeErrors.push_back(describe(rec) + ": " + e.what());
            }
        }
        else if (rec.ev == "qc-formed" || rec.ev == "tc-formed")
        {
            const std::string* hex = kvGet(rec, "msg");
            std::optional<Bytes> wire = hex ? bytesFromHex(*hex) : std::nullopt;
            if (!wire)
            {
                u.decodeErrors.push_back(describe(rec) + ": missing or malformed msg field");
                continue;
            }
            try
            {
                ByteReader rd(*wire);
                SigCarrier carrier{rec.seq, rec.t, rec.r, false, {}};
                if (rec.ev == "qc-formed")
                {
                    QuorumCert qc = deserializeQuorumCert(rd);
                    addQc(u, qc);
                    collectSigs(qc, carrier.sigs);
                }
                else
                {
                    TimeoutCert tc = deserializeTimeoutCert(rd);
                    addTc(u, tc);
                    collectSigs(tc, carrier.sigs);
                    u.tcFormeds.push_back(TcFormedRec{rec.seq, rec.t, rec.r, std::move(tc)});
                }
                u.sigCarriers.push_back(std::move(carrier));
            }
            catch (const WireError& e)
            {
                u.decodeErrors.push_back(describe(rec) + ": " + e.what());
            }
        }
        else if (rec.ev == "commit")
        {
            const std::string* h = kvGet(rec, "h");
            const std::string* d = kvGet(rec, "d");
            const std::string* direct = kvGet(rec, "direct");
            const std::string* qcv = kvGet(rec, "qcview");
            auto hv = h ? parseU64(*h) : std::nullopt;
            auto qv = qcv ? parseU64(*qcv) : std::nullopt;
            auto dv = d ? digestFromHex(*d) : std::nullopt;
            if (!hv || !qv || !dv || !direct || (*direct != "0" && *direct != "1"))
            {
                u.decodeErrors.push_back(describe(rec) + ": malformed commit fields");
                continue;
            }
            u.commits.push_back(
                CommitRec{rec.seq, rec.t, rec.r, *hv, *dv, *direct == "1", *qv});
        }
        else if (rec.ev == "vote")
        {
            const std::string* v = kvGet(rec, "v");
            const std::string* h = kvGet(rec, "h");
            const std::string* d = kvGet(rec, "d");
            auto vv = v ? parseU64(*v) : std::nullopt;
            auto hv = h ? parseU64(*h) : std::nullopt;
            auto dv = d ? digestFromHex(*d) : std::nullopt;
            if (!vv || !hv || !dv)
            {
                u.decodeErrors.push_back(describe(rec) + ": malformed vote fields");
                continue;
            }
            u.votes.push_back(VoteRec{rec.seq, rec.t, rec.r, *vv, *hv, *dv});
        }
        else if (rec.ev == "view-enter" || rec.ev == "timeout")
        {
            const std::string* v = kvGet(rec, "v");
            auto vv = v ? parseU64(*v) : std::nullopt;
            if (!vv)
            {
                u.decodeErrors.push_back(describe(rec) + ": malformed view field");
                continue;
            }
            if (rec.ev == "view-enter")
                u.viewEnters.push_back(ViewEnterRec{rec.seq, rec.t, rec.r, *vv});
            else
                u.timeoutRecs.push_back(TimeoutRec{rec.seq, rec.t, rec.r, *vv});
        }
        // adversary-action records carry no protocol content
    }
    return u;
}

// --- Individual checks -------------------------------------------------------

CheckResult checkDecode(const Universe& u)
{
    CheckResult res{"trace-decode", "pass", {}};
    std::size_t suppressed = 0;
    for (const std::string& e : u.decodeErrors)
        addDetail(res.details, suppressed, e);
    sealDetails(res.details, suppressed);
    if (!u.decodeErrors.empty())
        res.verdict = "fail";
    return res;
}

CheckResult checkSafety(const Universe& u)
{
    CheckResult res{"check_safety", "pass", {}};
    std::size_t suppressed = 0;

    // Committed-height agreement across honest replicas.
    std::map<Height, std::pair<Digest, const CommitRec*>> canonical;
    for (const CommitRec& c : u.commits)
    {
        if (!u.isHonest(c.r))
            continue;
        auto [it, fresh] = canonical.emplace(c.h, std::make_pair(c.d, &c));
        if (!fresh && it->second.first != c.d)
            addDetail(res.details, suppressed,
                      "height " + std::to_string(c.h) + ": replica " +
                          std::to_string(it->second.second->r) + " committed " +
                          toHex(it->second.first).substr(0, 12) + " at t=" +
                          std::to_string(it->second.second->t) + " but replica " +
                          std::to_string(c.r) + " committed " + toHex(c.d).substr(0, 12) +
                          " at t=" + std::to_string(c.t));
    }

    // Per-replica chain shape: heights contiguous from zero, each block's
    // parent the previously committed block.
    std::map<ReplicaId, std::vector<const CommitRec*>> byReplica;
    for (const CommitRec& c : u.commits)
        if (u.isHonest(c.r))
            byReplica[c.r].push_back(&c);
    for (const auto& [r, seq] : byReplica)
    {
        for (std::size_t i = 0; i < seq.size(); ++i)
        {
            const CommitRec& c = *seq[i];
            Height expect = static_cast<Height>(i);
            if (c.h != expect)
            {
                addDetail(res.details, suppressed,
                          "replica " + std::to_string(r) + ": commit #" + std::to_string(i) +
                              " is height " + std::to_string(c.h) + ", expected " +
                              std::to_string(expect));
                break;
            }
            const Block* b = u.store.get(c.d);
            if (!b)
            {
                addDetail(res.details, suppressed,
                          "replica " + std::to_string(r) + ": committed block " +
                              toHex(c.d).substr(0, 12) + " never appeared in any message");
                continue;
            }
            if (b->height != c.h)
                addDetail(res.details, suppressed,
                          "replica " + std::to_string(r) + ": committed digest at height " +
                              std::to_string(c.h) + " names a block of height " +
                              std::to_string(b->height));
            if (i > 0 && b->parent != seq[i - 1]->d)
                addDetail(res.details, suppressed,
                          "replica " + std::to_string(r) + ": block at height " +
                              std::to_string(c.h) + " does not extend the replica's height-" +
                              std::to_string(c.h - 1) + " commit");
        }
    }

    // Signature-isolation audit. The synthetic view-0 bootstrap signatures
    // are pre-shared and exempt.
    std::set<Digest> exempt{tupleSignDigest(u.genesis.block, 0), voteSignDigest(u.genesis.tuple),
                            timeoutSignDigest(0, u.genesis.tuple)};
    std::set<std::pair<ReplicaId, Digest>> legitimate;
    std::set<std::pair<ReplicaId, Digest>> flagged;
    for (const SigCarrier& carrier : u.sigCarriers)
    {
        if (carrier.isSend)
            for (const Signature& s : carrier.sigs)
                if (s.signer == carrier.r)
                    legitimate.emplace(s.signer, s.over);
        for (const Signature& s : carrier.sigs)
        {
            if (!u.isHonest(s.signer) || (carrier.isSend && s.signer == carrier.r))
                continue;
            if (exempt.count(s.over) || legitimate.count({s.signer, s.over}))
                continue;
            if (flagged.emplace(s.signer, s.over).second)
                addDetail(res.details, suppressed,
                          "signature by honest replica " + std::to_string(s.signer) + " over " +
                              toHex(s.over).substr(0, 12) +
                              " circulates before that replica emitted it (first seen seq=" +
                              std::to_string(carrier.seq) + ")");
        }
    }

    sealDetails(res.details, suppressed);
    if (!res.details.empty())
        res.verdict = "fail";
    return res;
}

CheckResult checkCerts(const Universe& u)
{
    CheckResult res{"check_lemma1_lemma3", "pass", {}};
    std::size_t suppressed = 0;

    std::vector<const QuorumCert*> valid;
    for (const auto& [d, qc] : u.qcs)
        if (validateQc(u.pristine, qc))
            valid.push_back(&qc);

    std::vector<const CommitRec*> directs;
    for (const CommitRec& c : u.commits)
        if (u.isHonest(c.r) && c.direct)
            directs.push_back(&c);

    if (directs.empty())
    {
        res.verdict = "vacuous-pass";
        res.details.push_back("no honest replica committed directly");
        return res;
    }

    for (const CommitRec* c : directs)
    {
        const Block* committed = u.store.get(c->d);
        if (!committed)
        {
            addDetail(res.details, suppressed,
                      "directly committed block " + toHex(c->d).substr(0, 12) +
                          " never appeared in any message");
            continue;
        }
        CertRank commitRank{c->qcView, c->h};
        for (const QuorumCert* qc : valid)
        {
            if (rankOf(*qc) < commitRank)
                continue;
            if (!extendsOrEquals(u.store, qc->tuple.block, *committed))
                addDetail(res.details, suppressed,
                          "certificate view=" + std::to_string(qc->view()) +
                              " height=" + std::to_string(qc->height()) + " for " +
                              toHex(blockDigest(qc->tuple.block)).substr(0, 12) +
                              " does not extend the block committed directly at view=" +
                              std::to_string(c->qcView) + " height=" + std::to_string(c->h));
        }
    }

    sealDetails(res.details, suppressed);
    if (!res.details.empty())
        res.verdict = "fail";
    return res;
}

// Enumerates every timeout certificate formable from the view's observed
// timeout messages (at most one entry per sender, exactly quorum() entries;
// larger certificates lock no additional blocks because supporters can be
// kept and conflict-free subsets stay conflict-free).
struct FormableTcProbe
{
    const Universe& u;
    View view;
    std::vector<std::vector<TimeoutMsg>> variants; // per sender, validity-filtered
    uint64_t budget{200000};

    template <typename Fn>
    bool enumerate(Fn&& fn)
    {
        std::vector<TimeoutMsg> chosen;
        return rec(0, chosen, fn);
    }

  private:
    template <typename Fn>
    bool rec(std::size_t i, std::vector<TimeoutMsg>& chosen, Fn& fn)
    {
        uint32_t q = u.pristine.quorum();
        if (chosen.size() == q)
        {
            if (budget-- == 0)
                return false;
            std::optional<TimeoutCert> tc = formTc(u.pristine, view, chosen);
            if (tc && validateTc(u.pristine, *tc))
                fn(*tc);
            return true;
        }
        if (i >= variants.size() || chosen.size() + (variants.size() - i) < q)
            return true;
        if (!rec(i + 1, chosen, fn)) // skip this sender
            return false;
        for (const TimeoutMsg& t : variants[i])
        {
            chosen.push_back(t);
            bool cont = rec(i + 1, chosen, fn);
            chosen.pop_back();
            if (!cont)
                return false;
        }
        return true;
    }
};

CheckResult checkViewChangeLocks(const Universe& u)
{
    CheckResult res{"check_lemma2", "pass", {}};
    if (u.pristine.n > 6)
    {
        res.verdict = "not-applicable";
        res.details.push_back("exhaustive lock enumeration is limited to n <= 6");
        return res;
    }
    std::size_t suppressed = 0;
    bool exercised = false;

    // Highest pristine-valid certificate per view.
    std::map<View, const QuorumCert*> highestCertified;
    for (const auto& [d, qc] : u.qcs)
    {
        if (!validateQc(u.pristine, qc))
            continue;
        auto [it, fresh] = highestCertified.emplace(qc.view(), &qc);
        if (!fresh && (qc.height() > it->second->height() ||
                       (qc.height() == it->second->height() &&
                        blockDigest(qc.tuple.block) > blockDigest(it->second->tuple.block))))
            it->second = &qc;
    }

    // Clause 1: no formable certificate of view w may lock a block
    // conflicting the view's highest certified block.
    std::set<View> views;
    for (const auto& [w, bySender] : u.timeouts)
        if (w >= 1)
            views.insert(w);
    for (View w : views)
    {
        auto certIt = highestCertified.find(w);
        if (certIt == highestCertified.end())
            continue;
        const Block& certified = certIt->second->tuple.block;

        FormableTcProbe probe{u, w, {}, 200000};
        for (const auto& [sender, variants] : u.timeouts.at(w))
        {
            std::vector<TimeoutMsg> validVariants;
            for (const TimeoutMsg& t : variants)
                if (timeoutEntryValid(u.pristine, w, t))
                    validVariants.push_back(t);
            if (!validVariants.empty())
                probe.variants.push_back(std::move(validVariants));
        }

        std::set<Digest> flaggedLocks;
        bool complete = probe.enumerate([&](const TimeoutCert& tc) {
            exercised = true;
            for (const Block& locked : lockedBlocks(u.pristine, u.store, tc))
            {
                ChainRelation rel = relate(u.store, locked, certified);
                if (rel == ChainRelation::conflicting || rel == ChainRelation::unknown)
                    if (flaggedLocks.insert(blockDigest(locked)).second)
                        addDetail(res.details, suppressed,
                                  "view " + std::to_string(w) +
                                      ": a formable timeout certificate locks " +
                                      toHex(blockDigest(locked)).substr(0, 12) + " (height " +
                                      std::to_string(locked.height) +
                                      ") conflicting the certified " +
                                      toHex(blockDigest(certified)).substr(0, 12) + " (height " +
                                      std::to_string(certified.height) + ")");
            }
        });
        if (!complete)
            addDetail(res.details, suppressed,
                      "view " + std::to_string(w) +
                          ": enumeration budget exhausted; lock audit incomplete");
    }

    // Clause 2: entering view w+1 requires a previously formed certificate
    // of view w, and when some honest replica committed directly in view w
    // that certificate must keep the committed block locked.
    std::map<View, const CommitRec*> directTop;
    for (const CommitRec& c : u.commits)
    {
        if (!u.isHonest(c.r) || !c.direct)
            continue;
        auto [it, fresh] = directTop.emplace(c.qcView, &c);
        if (!fresh && c.h > it->second->h)
            it->second = &c;
    }

    for (const ViewEnterRec& enter : u.viewEnters)
    {
        if (!u.isHonest(enter.r) || enter.v < 2)
            continue;
        exercised = true;
        View w = enter.v - 1;
        const TcFormedRec* trigger = nullptr;
        for (const TcFormedRec& f : u.tcFormeds)
            if (f.r == enter.r && f.seq < enter.seq && f.tc.view == w)
                trigger = &f;
        if (!trigger)
        {
            addDetail(res.details, suppressed,
                      "replica " + std::to_string(enter.r) + " entered view " +
                          std::to_string(enter.v) +
                          " without first forming a timeout certificate for view " +
                          std::to_string(w));
            continue;
        }
        auto topIt = directTop.find(w);
        if (topIt == directTop.end())
            continue;
        const Block* committed = u.store.get(topIt->second->d);
        if (!committed)
            continue; // flagged by check_safety / check_lemma1_lemma3
        std::vector<Block> locked = lockedBlocks(u.pristine, u.store, trigger->tc);
        bool keeps = false;
        bool conflictsCommitted = false;
        for (const Block& L : locked)
        {
            ChainRelation rel = relate(u.store, L, *committed);
            if (rel == ChainRelation::equal || rel == ChainRelation::firstExtendsSecond)
                keeps = true;
            if (rel == ChainRelation::conflicting || rel == ChainRelation::unknown)
                conflictsCommitted = true;
        }
        if (!keeps || conflictsCommitted)
            addDetail(res.details, suppressed,
                      "replica " + std::to_string(enter.r) + " entered view " +
                          std::to_string(enter.v) + " with a certificate that " +
                          (conflictsCommitted ? "locks a block conflicting" : "fails to keep") +
                          " the block committed directly in view " + std::to_string(w) +
                          " (height " + std::to_string(topIt->second->h) + ")");
    }

    sealDetails(res.details, suppressed);
    if (!res.details.empty() && res.verdict == "pass")
        res.verdict = "fail";
    else if (!exercised)
        res.verdict = "vacuous-pass";
    return res;
}

CheckResult checkExternalValidity(const Universe& u)
{
    CheckResult res{"check_external_validity", "pass", {}};
    std::size_t suppressed = 0;
    bool exercised = false;

    auto audit = [&](ReplicaId r, const char* verb, Height h, const Digest& d) {
        exercised = true;
        const Block* b = u.store.get(d);
        if (!b)
        {
            addDetail(res.details, suppressed,
                      "replica " + std::to_string(r) + " " + verb + " height " +
                          std::to_string(h) + " block " + toHex(d).substr(0, 12) +
                          " that never appeared in any message");
            return;
        }
        if (!isExternallyValid(u.pristine, b->txns))
            addDetail(res.details, suppressed,
                      "replica " + std::to_string(r) + " " + verb + " height " +
                          std::to_string(h) + " block " + toHex(d).substr(0, 12) +
                          " whose transactions fail the validity rule");
    };

    for (const CommitRec& c : u.commits)
        if (u.isHonest(c.r))
            audit(c.r, "committed", c.h, c.d);
    for (const VoteRec& v : u.votes)
        if (u.isHonest(v.r))
            audit(v.r, "voted for", v.h, v.d);

    sealDetails(res.details, suppressed);
    if (!res.details.empty())
        res.verdict = "fail";
    else if (!exercised)
        res.verdict = "vacuous-pass";
    return res;
}

CheckResult checkLatency(const Universe& u, const TraceMeta& meta)
{
    CheckResult res{"check_latency", "pass", {}};
    if (meta.policy != "max")
    {
        res.verdict = "not-applicable";
        res.details.push_back("latency bound applies to the worst-case delay policy only");
        return res;
    }
    std::size_t suppressed = 0;
    bool exercised = false;

    std::set<View> honestTimeoutViews;
    for (const TimeoutRec& t : u.timeoutRecs)
        if (u.isHonest(t.r))
            honestTimeoutViews.insert(t.v);

    std::map<ReplicaId, std::map<Digest, Tick>> firstCommit;
    for (const CommitRec& c : u.commits)
        if (u.isHonest(c.r))
            firstCommit[c.r].emplace(c.d, c.t);

    std::set<Digest> audited;
    for (const SendRec& s : u.sends)
    {
        const auto* p = std::get_if<ProposeMsg>(&s.msg);
        if (!p || !u.isHonest(s.r) || s.r != u.pristine.leaderOf(p->tuple.view))
            continue;
        if (s.t < meta.gst || honestTimeoutViews.count(p->tuple.view))
            continue;
        Tick deadline = s.t + 2 * u.pristine.delta;
        if (deadline > meta.horizon)
            continue; // the window extends past the recorded run
        Digest d = blockDigest(p->tuple.block);
        if (!audited.insert(d).second)
            continue;
        exercised = true;
        for (ReplicaId r : u.honest)
        {
            bool committed = false;
            Tick when = 0;
            if (auto itR = firstCommit.find(r); itR != firstCommit.end())
                if (auto itD = itR->second.find(d); itD != itR->second.end())
                {
                    committed = true;
                    when = itD->second;
                }
            if (!committed || when > deadline)
                addDetail(res.details, suppressed,
                          "block " + toHex(d).substr(0, 12) + " (height " +
                              std::to_string(p->tuple.block.height) + ") proposed at t=" +
                              std::to_string(s.t) + ": replica " + std::to_string(r) +
                              (committed ? " committed at t=" + std::to_string(when)
                                         : " never committed") +
                              ", bound was t=" + std::to_string(deadline));
        }
    }

    sealDetails(res.details, suppressed);
    if (!res.details.empty())
        res.verdict = "fail";
    else if (!exercised)
        res.verdict = "vacuous-pass";
    return res;
}

CheckResult checkLiveness(const Universe& u, const TraceMeta& meta)
{
    CheckResult res{"check_liveness", "pass", {}};
    if (meta.gst >= meta.horizon)
    {
        res.verdict = "vacuous-pass";
        res.details.push_back("warning: GST at or beyond the horizon leaves no synchronous window");
        return res;
    }
    std::size_t suppressed = 0;
    bool exercised = false;

    uint32_t window = u.pristine.f + 2;
    for (ReplicaId r : u.honest)
    {
        std::vector<const ViewEnterRec*> entries;
        for (const ViewEnterRec& e : u.viewEnters)
            if (e.r == r && e.t >= meta.gst)
                entries.push_back(&e);
        if (entries.size() < window)
            continue;
        std::vector<uint64_t> commitSeqs;
        for (const CommitRec& c : u.commits)
            if (c.r == r)
                commitSeqs.push_back(c.seq);
        for (std::size_t i = 0; i + window <= entries.size(); ++i)
        {
            exercised = true;
            uint64_t lo = entries[i]->seq;
            uint64_t hi = entries[i + window - 1]->seq;
            bool progressed = std::any_of(commitSeqs.begin(), commitSeqs.end(),
                                          [&](uint64_t s) { return s > lo && s < hi; });
            if (!progressed)
                addDetail(res.details, suppressed,
                          "replica " + std::to_string(r) + " entered views " +
                              std::to_string(entries[i]->v) + ".." +
                              std::to_string(entries[i + window - 1]->v) +
                              " after GST without committing anything in between");
        }
    }

    sealDetails(res.details, suppressed);
    if (!res.details.empty())
        res.verdict = "fail";
    else if (!exercised)
        res.verdict = "vacuous-pass";
    return res;
}

TraceStats computeStats(const TraceLog& trace, const Universe& u)
{
    TraceStats stats;
    stats.records = trace.records().size();
    for (const SendRec& s : u.sends)
        stats.sendsByKind[messageKind(s.msg)]++;
    for (const ViewEnterRec& e : u.viewEnters)
        if (u.isHonest(e.r) && e.v > stats.highestView)
            stats.highestView = e.v;
    stats.viewChanges = stats.highestView - 1;
    for (const TimeoutRec& t : u.timeoutRecs)
        if (u.isHonest(t.r))
            stats.honestTimeouts++;

    // Latency per height: first proposal carrying the block to the last
    // honest commit, over heights every honest replica committed.
    std::map<Digest, Tick> firstProposed;
    for (const SendRec& s : u.sends)
        if (const auto* p = std::get_if<ProposeMsg>(&s.msg))
            firstProposed.emplace(blockDigest(p->tuple.block), s.t);
    std::map<Digest, std::map<ReplicaId, Tick>> commitTimes;
    std::map<Digest, Height> heights;
    for (const CommitRec& c : u.commits)
    {
        if (!u.isHonest(c.r))
            continue;
        commitTimes[c.d].emplace(c.r, c.t);
        heights.emplace(c.d, c.h);
    }
    for (const auto& [d, byReplica] : commitTimes)
    {
        if (byReplica.size() != u.honest.size())
            continue;
        auto itP = firstProposed.find(d);
        if (itP == firstProposed.end())
            continue; // the bootstrap block is committed without a proposal
        Tick last = 0;
        for (const auto& [r, t] : byReplica)
            last = std::max(last, t);
        HeightLatency hl;
        hl.height = heights[d];
        hl.proposedAt = itP->second;
        hl.committedAt = last;
        hl.ticks = last - itP->second;
        hl.rounds = u.pristine.delta == 0
                        ? 0.0
                        : static_cast<double>(hl.ticks) / static_cast<double>(u.pristine.delta);
        stats.latencies.push_back(hl);
    }
    std::sort(stats.latencies.begin(), stats.latencies.end(),
              [](const HeightLatency& a, const HeightLatency& b) { return a.height < b.height; });
    return stats;
}

} // namespace

bool CheckReport::ok() const
{
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckResult& c) { return c.verdict == "fail"; });
}

const CheckResult* CheckReport::find(const std::string& name) const
{
    for (const CheckResult& c : checks)
        if (c.name == name)
            return &c;
    return nullptr;
}

CheckReport checkTrace(const TraceLog& trace)
{
    Universe u = buildUniverse(trace);
    CheckReport report;
    report.stats = computeStats(trace, u);
    report.checks.push_back(checkDecode(u));
    report.checks.push_back(checkSafety(u));
    report.checks.push_back(checkCerts(u));
    report.checks.push_back(checkViewChangeLocks(u));
    report.checks.push_back(checkExternalValidity(u));
    report.checks.push_back(checkLatency(u, trace.meta()));
    report.checks.push_back(checkLiveness(u, trace.meta()));
    return report;
}

} // namespace smrsim
