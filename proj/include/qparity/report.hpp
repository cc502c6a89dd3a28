#pragma once

#include "qparity/energy_parity.hpp"
#include "qparity/mp_parity.hpp"
#include "qparity/strategy.hpp"

#include <json.hpp>

#include <set>

namespace qparity {

using Json = nlohmann::ordered_json;

inline const char* kReportSchema = "qparity-report/1";

inline Json json_states(const Model& m, const std::vector<StateId>& states) {
    Json a = Json::array();
    for (StateId q : states)
        a.push_back(m.display_name(q));
    return a;
}

inline Json json_model_summary(const Model& m) {
    Json j;
    j["kind"] = m.kind == ModelKind::Mdp ? "mdp" : "game";
    j["states"] = m.num_states();
    j["edges"] = m.num_edges();
    j["maxWeight"] = m.max_weight;
    j["maxPriority"] = m.max_priority;
    return j;
}

inline Json json_credits(const Model& m, const std::vector<std::optional<std::int64_t>>& credits) {
    Json j = Json::object();
    for (StateId q = 0; q < m.num_states(); ++q)
        if (credits[q])
            j[m.display_name(q)] = *credits[q];
    return j;
}

inline Json json_values(const Model& m, const std::vector<Rat>& values) {
    Json j = Json::object();
    for (StateId q = 0; q < m.num_states(); ++q)
        j[m.display_name(q)] = rat_str(values[q]);
    return j;
}

inline Json json_strategy_tables(const Model& m, const StrategyTables& t,
                                 const std::map<StateId, std::uint32_t>* initial_per_state =
                                     nullptr,
                                 const std::vector<std::string>* mem_names = nullptr) {
    Json j;
    j["memCount"] = t.mem_count;
    j["initialMem"] = t.initial_mem;
    if (initial_per_state) {
        Json init = Json::object();
        for (auto& [q, mem] : *initial_per_state)
            init[m.display_name(q)] = mem;
        j["initialMemPerState"] = std::move(init);
    }
    if (mem_names)
        j["memNames"] = *mem_names;
    // update[mem] lists the successor memory per canonical edge index
    Json upd = Json::array();
    for (std::uint32_t mem = 0; mem < t.mem_count; ++mem) {
        Json row = Json::array();
        for (std::size_t e = 0; e < m.num_edges(); ++e)
            row.push_back(t.update.empty() ? mem : t.update[mem * m.num_edges() + e]);
        upd.push_back(std::move(row));
    }
    j["update"] = std::move(upd);
    Json nxt = Json::array();
    for (std::uint32_t mem = 0; mem < t.mem_count; ++mem) {
        Json row = Json::object();
        if (mem < t.next.size())
            for (auto& [q, dist] : t.next[mem]) {
                Json moves = Json::array();
                for (auto& [dst, p] : dist.support)
                    moves.push_back(Json{{"to", m.display_name(dst)}, {"prob", rat_str(p)}});
                row[m.display_name(q)] = std::move(moves);
            }
        nxt.push_back(std::move(row));
    }
    j["next"] = std::move(nxt);
    return j;
}

inline StrategyTables strategy_tables_from_json(const Model& m, const Json& j) {
    StrategyTables t;
    t.mem_count = j.at("memCount").get<std::uint32_t>();
    t.initial_mem = j.at("initialMem").get<std::uint32_t>();
    std::map<std::string, StateId> by_name;
    for (StateId q = 0; q < m.num_states(); ++q)
        by_name[m.display_name(q)] = q;
    const auto& upd = j.at("update");
    t.update.assign(static_cast<std::size_t>(t.mem_count) * m.num_edges(), 0);
    for (std::uint32_t mem = 0; mem < t.mem_count; ++mem)
        for (std::size_t e = 0; e < m.num_edges(); ++e)
            t.update[mem * m.num_edges() + e] = upd.at(mem).at(e).get<std::uint32_t>();
    t.next.resize(t.mem_count);
    const auto& nxt = j.at("next");
    for (std::uint32_t mem = 0; mem < t.mem_count; ++mem) {
        for (auto it = nxt.at(mem).begin(); it != nxt.at(mem).end(); ++it) {
            Dist d;
            for (const auto& mv : it.value())
                d.support.push_back(
                    {by_name.at(mv.at("to").get<std::string>()),
                     rat_parse(mv.at("prob").get<std::string>())});
            t.next[mem][by_name.at(it.key())] = std::move(d);
        }
    }
    return t;
}

/// Flattens the two-phase energy parity witness into one transducer over
/// its reachable (phase, energy) memory values.
struct WitnessTables {
    StrategyTables tables;
    std::map<StateId, std::uint32_t> initial; // per winning state
    std::vector<std::string> mem_names;
};

inline WitnessTables materialize_witness(const Model& m, const EnergyParityWitness& w) {
    // enumerate reachable (phase, credit) pairs
    std::set<std::pair<std::int32_t, std::int64_t>> mems;
    auto entry_mem = [&](StateId q, std::int64_t c) -> std::pair<std::int32_t, std::int64_t> {
        if (w.cont[q] >= 0 && c >= w.cont[q]) {
            std::int32_t ph = w.chosen_phase[q];
            return {ph, std::min(c, w.copies[ph].cap)};
        }
        return {-1, std::min(c, w.reach.cap)};
    };
    {
        std::set<std::tuple<std::int32_t, std::int64_t, StateId>> seen;
        std::vector<std::tuple<std::int32_t, std::int64_t, StateId>> work;
        auto push = [&](StateId q, std::pair<std::int32_t, std::int64_t> mem) {
            if (seen.insert({mem.first, mem.second, q}).second) {
                work.push_back({mem.first, mem.second, q});
                mems.insert(mem);
            }
        };
        for (StateId q = 0; q < m.num_states(); ++q)
            if (w.credits[q])
                push(q, entry_mem(q, *w.credits[q]));
        while (!work.empty()) {
            auto [ph, c, q] = work.back();
            work.pop_back();
            auto step = [&](StateId to) {
                auto e = m.find_edge(q, to);
                std::int64_t weight = m.edges[*e].weight;
                const std::int64_t cap = ph < 0 ? w.reach.cap : w.copies[ph].cap;
                std::int64_t c2 = std::max<std::int64_t>(0, std::min(cap, c + weight));
                push(to, ph < 0 ? entry_mem(to, c2) : std::make_pair(ph, c2));
            };
            if (m.owner(q) == Owner::Player1) {
                const auto& tab = ph < 0 ? w.reach : w.copies[ph];
                std::uint32_t nxt = tab.next[static_cast<std::size_t>(q) * (tab.cap + 1) + c];
                if (nxt != kNoNode)
                    step(nxt);
            } else {
                for (const Edge& e : m.out(q))
                    step(e.dst);
            }
        }
    }

    std::map<std::pair<std::int32_t, std::int64_t>, std::uint32_t> index;
    WitnessTables out;
    for (auto& mem : mems) {
        index[mem] = static_cast<std::uint32_t>(out.mem_names.size());
        std::string name = mem.first < 0
                               ? "reach@" + std::to_string(mem.second)
                               : "copy" + std::to_string(w.copy_priority[mem.first]) + "@" +
                                     std::to_string(mem.second);
        out.mem_names.push_back(std::move(name));
    }
    auto clamp_mem = [&](std::int32_t ph, std::int64_t c) {
        auto it = index.find({ph, c});
        return it == index.end() ? 0u : it->second;
    };

    out.tables.mem_count = static_cast<std::uint32_t>(mems.size());
    out.tables.initial_mem = 0;
    out.tables.update.assign(static_cast<std::size_t>(out.tables.mem_count) * m.num_edges(), 0);
    out.tables.next.resize(out.tables.mem_count);
    for (auto& [mem, idx] : index) {
        auto [ph, c] = mem;
        for (std::size_t e = 0; e < m.num_edges(); ++e) {
            const Edge& edge = m.edges[e];
            const std::int64_t cap = ph < 0 ? w.reach.cap : w.copies[ph].cap;
            std::int64_t c2 = std::max<std::int64_t>(0, std::min(cap, c + edge.weight));
            auto mem2 = ph < 0 ? entry_mem(edge.dst, c2) : std::make_pair(ph, c2);
            out.tables.update[static_cast<std::size_t>(idx) * m.num_edges() + e] =
                clamp_mem(mem2.first, mem2.second);
        }
        const auto& tab = ph < 0 ? w.reach : w.copies[ph];
        for (StateId q = 0; q < m.num_states(); ++q) {
            if (m.owner(q) != Owner::Player1)
                continue;
            std::uint32_t nxt = tab.next[static_cast<std::size_t>(q) * (tab.cap + 1) + c];
            if (nxt != kNoNode)
                out.tables.next[idx][q] = Dist::point(nxt);
        }
    }
    for (StateId q = 0; q < m.num_states(); ++q)
        if (w.credits[q]) {
            auto mem = entry_mem(q, *w.credits[q]);
            out.initial[q] = index.at(mem);
        }
    return out;
}

inline Json json_energy_parity(const Model& m, const EnergyParityResult& r,
                               bool with_strategy) {
    Json j;
    j["winning"] = json_states(m, r.winning);
    j["credits"] = json_credits(m, r.credits);
    Json committed = Json::object();
    for (StateId q = 0; q < m.num_states(); ++q)
        if (r.committed[q])
            committed[m.display_name(q)] = *r.committed[q];
    j["committedPriority"] = std::move(committed);
    j["memorySize"] = r.memory_size;
    j["memoryBound"] = r.memory_bound;
    j["routesVerified"] = r.routes_verified;
    if (with_strategy && r.witness && !r.winning.empty()) {
        auto wt = materialize_witness(m, *r.witness);
        j["strategy"] = json_strategy_tables(m, wt.tables, &wt.initial, &wt.mem_names);
    } else {
        j["strategy"] = nullptr;
    }
    return j;
}

inline Json json_mp_parity(const Model& m, const MpParityResult& r) {
    Json j;
    j["win"] = json_states(m, r.report.win);
    j["almostSure"] = json_states(m, r.almost_sure);
    if (r.values)
        j["values"] = json_values(m, *r.values);
    Json trace = Json::array();
    for (const auto& it : r.report.iterations) {
        Json ji;
        ji["committedPriority"] = it.committed;
        Json cands = Json::array();
        for (auto& u : it.candidates)
            cands.push_back(json_states(m, u));
        ji["candidates"] = std::move(cands);
        Json quals = Json::array();
        for (std::size_t i = 0; i < it.qualified.size(); ++i)
            quals.push_back(Json{{"states", json_states(m, it.qualified[i])},
                                 {"gain", rat_str(it.qualified_gain[i])}});
        ji["qualified"] = std::move(quals);
        ji["win"] = json_states(m, it.win);
        ji["attractor"] = json_states(m, it.attractor);
        ji["remaining"] = json_states(m, it.remaining);
        trace.push_back(std::move(ji));
    }
    j["trace"] = std::move(trace);
    // the memoryless witness toward the winning union
    // memoryless qualitative witness: head for the winning union, then
    // play its internal edges uniformly (every bottom class of that chain
    // is a full winning component, so the parity half holds almost surely;
    // the quantitative half needs the round-based strategy)
    StrategyTables t;
    t.mem_count = 1;
    t.initial_mem = 0;
    t.next.resize(1);
    for (auto& [q, dst] : r.reach_witness)
        t.next[0][q] = Dist::point(dst);
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (!r.report.win_mask[q] || m.owner(q) != Owner::Player1)
            continue;
        std::vector<StateId> inside;
        for (const Edge& e : m.out(q))
            if (r.report.win_mask[e.dst])
                inside.push_back(e.dst);
        if (!inside.empty())
            t.next[0][q] = Dist::uniform(inside);
    }
    j["reachStrategy"] = json_strategy_tables(m, t);
    return j;
}

inline Json json_objective(const Objective& o) {
    Json j;
    switch (o.kind) {
    case Objective::Kind::Parity:
        j["kind"] = "parity";
        break;
    case Objective::Kind::Energy:
        j["kind"] = "energy";
        j["initialCredit"] = o.initial_credit;
        break;
    case Objective::Kind::MeanPayoff:
        j["kind"] = "mean-payoff";
        j["threshold"] = rat_str(o.threshold);
        j["strict"] = o.strict;
        break;
    case Objective::Kind::EnergyParity:
        j["kind"] = "energy-parity";
        break;
    case Objective::Kind::MeanPayoffParity:
        j["kind"] = "mean-payoff-parity";
        j["threshold"] = rat_str(o.threshold);
        j["strict"] = o.strict;
        break;
    case Objective::Kind::DisjunctionMpParity:
        j["kind"] = "disjunction-mp-parity";
        j["threshold"] = rat_str(o.threshold);
        j["strict"] = o.strict;
        break;
    case Objective::Kind::DisjunctionEnergyParity:
        j["kind"] = "disjunction-energy-parity";
        break;
    }
    return j;
}

inline Json make_report(const std::string& command, const Model& m, Json result) {
    Json j;
    j["schema"] = kReportSchema;
    j["command"] = command;
    j["model"] = json_model_summary(m);
    j["result"] = std::move(result);
    return j;
}

} // namespace qparity
