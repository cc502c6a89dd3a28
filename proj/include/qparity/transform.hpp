#pragma once

#include "qparity/model.hpp"

#include <limits>

namespace qparity {

/// Result of a state-inserting rewrite. Input states keep their indices;
/// fresh states are appended. forward_to maps a fresh single-target relay to
/// the input state it stands in front of (no_target for split nodes, which
/// fan out).
struct Rewrite {
    Model model;
    std::uint32_t original_count = 0;
    std::vector<StateId> forward_to;

    static constexpr StateId no_target = std::numeric_limits<StateId>::max();

    bool is_fresh(StateId q) const { return q >= original_count; }

    /// Maps a successor chosen in the rewritten model back to the input
    /// model's successor.
    StateId resolve(StateId q) const {
        while (q >= original_count) {
            StateId t = forward_to[q];
            if (t == no_target)
                throw std::logic_error("resolve: state has no single forwarding target");
            q = t;
        }
        return q;
    }
};

/// Inserts a relay of the opposite owner on every edge joining two
/// same-owner states, so that player-1 and probabilistic states alternate.
/// Relays carry the source state's priority and a single weight-0 exit, so
/// energy levels at input states and the minimum priority seen infinitely
/// often are unchanged.
inline Rewrite make_alternating(const Model& m) {
    require_valid(m, "make_alternating");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("make_alternating: expected an MDP");
    Rewrite r;
    r.model.kind = ModelKind::Mdp;
    r.model.states = m.states;
    r.model.names = m.names;
    r.original_count = static_cast<std::uint32_t>(m.num_states());
    r.forward_to.assign(m.num_states(), Rewrite::no_target);
    for (const Edge& e : m.edges) {
        if (m.owner(e.src) != m.owner(e.dst)) {
            r.model.edges.push_back(e);
            continue;
        }
        Owner relay_owner =
            m.owner(e.src) == Owner::Player1 ? Owner::Probabilistic : Owner::Player1;
        StateId relay = r.model.add_state(relay_owner, m.priority(e.src));
        r.forward_to.push_back(e.dst);
        Edge in = e;
        in.dst = relay;
        r.model.edges.push_back(in);
        if (relay_owner == Owner::Probabilistic)
            r.model.add_edge(relay, e.dst, 0, Rat(1));
        else
            r.model.add_edge(relay, e.dst, 0);
    }
    r.model.finalize();
    return r;
}

namespace detail {

struct SuccEntry {
    StateId dst;
    std::int64_t weight;
    Rat prob;
};

} // namespace detail

/// Normalizes an MDP for the energy pipeline:
///  - every probabilistic state carries the model's maximum priority, its
///    original priority hoisted onto a fresh player-1 predecessor through
///    which all in-edges are redirected;
///  - every probabilistic state ends up with exactly two successors (binary
///    split chains with exact rationals, first-vs-rest; non-dyadic masses
///    stay as unbalanced pairs, single successors split through a fresh
///    player-1 relay).
/// Split and relay edges have weight 0 except the final edge of each chain,
/// which carries the original edge weight. Energy levels of corresponding
/// plays and the set of priorities visited infinitely often are preserved.
inline Rewrite normalize_for_energy(const Model& m) {
    require_valid(m, "normalize_for_energy");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("normalize_for_energy: expected an MDP");
    const std::uint32_t d = m.max_priority;
    Rewrite r;
    r.model.kind = ModelKind::Mdp;
    r.model.states = m.states;
    r.model.names = m.names;
    r.original_count = static_cast<std::uint32_t>(m.num_states());
    r.forward_to.assign(m.num_states(), Rewrite::no_target);

    // Hoist: fresh player-1 predecessor keeps the old priority, the
    // probabilistic state itself moves to the maximum priority.
    std::vector<StateId> hoist(m.num_states(), Rewrite::no_target);
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (m.is_prob(q) && m.priority(q) != d) {
            StateId relay = r.model.add_state(Owner::Player1, m.priority(q));
            r.forward_to.push_back(q);
            hoist[q] = relay;
            r.model.states[q].priority = d;
            r.model.add_edge(relay, q, 0);
        }
    }
    auto redirect = [&](StateId v) { return hoist[v] != Rewrite::no_target ? hoist[v] : v; };

    for (StateId q = 0; q < m.num_states(); ++q) {
        if (!m.is_prob(q)) {
            for (const Edge& e : m.out(q))
                r.model.add_edge(q, redirect(e.dst), e.weight);
            continue;
        }
        std::vector<detail::SuccEntry> succ;
        for (const Edge& e : m.out(q))
            succ.push_back({redirect(e.dst), e.weight, e.prob});
        if (succ.size() == 1) {
            // two half-edges, one through a fresh relay (parallel edges are
            // not representable)
            StateId relay = r.model.add_state(Owner::Player1, d);
            r.forward_to.push_back(succ[0].dst);
            r.model.add_edge(q, succ[0].dst, succ[0].weight, Rat(1, 2));
            r.model.add_edge(q, relay, 0, Rat(1, 2));
            r.model.add_edge(relay, succ[0].dst, succ[0].weight);
            continue;
        }
        if (succ.size() == 2) {
            for (const auto& s : succ)
                r.model.add_edge(q, s.dst, s.weight, s.prob);
            continue;
        }
        // first-vs-rest chain of fresh probabilistic split nodes
        StateId cur = q;
        Rat mass(1);
        for (std::size_t j = 0; j + 2 < succ.size(); ++j) {
            StateId next_node = r.model.add_state(Owner::Probabilistic, d);
            r.forward_to.push_back(Rewrite::no_target);
            Rat take = succ[j].prob / mass;
            r.model.add_edge(cur, succ[j].dst, succ[j].weight, take);
            r.model.add_edge(cur, next_node, 0, Rat(1) - take);
            mass -= succ[j].prob;
            cur = next_node;
        }
        const auto& a = succ[succ.size() - 2];
        const auto& b = succ[succ.size() - 1];
        r.model.add_edge(cur, a.dst, a.weight, a.prob / mass);
        r.model.add_edge(cur, b.dst, b.weight, b.prob / mass);
    }
    r.model.finalize();
    return r;
}

/// Image of one input edge (u, v) under a rewrite: the full node sequence
/// u ... v in the rewritten model, passing only through fresh nodes.
/// Used to lift plays across transforms.
inline std::vector<StateId> map_edge_path(const Rewrite& r, StateId u, StateId v) {
    std::vector<StateId> path{u};
    StateId cur = u;
    auto reaches_v_via_fresh = [&](StateId from) {
        // chains are short; a bounded walk is enough
        std::vector<StateId> stack{from};
        std::vector<StateId> seen;
        while (!stack.empty()) {
            StateId x = stack.back();
            stack.pop_back();
            if (x == v)
                return true;
            if (!r.is_fresh(x))
                continue;
            if (std::find(seen.begin(), seen.end(), x) != seen.end())
                continue;
            seen.push_back(x);
            for (const Edge& e : r.model.out(x))
                stack.push_back(e.dst);
        }
        return false;
    };
    bool first = true; // self-loop images still traverse at least one edge
    while (first || cur != v) {
        first = false;
        bool advanced = false;
        for (const Edge& e : r.model.out(cur)) {
            if (e.dst == v) {
                path.push_back(v);
                cur = v;
                advanced = true;
                break;
            }
            if (r.is_fresh(e.dst) && reaches_v_via_fresh(e.dst)) {
                path.push_back(e.dst);
                cur = e.dst;
                advanced = true;
                break;
            }
        }
        if (!advanced)
            throw std::logic_error("map_edge_path: no image for edge");
    }
    return path;
}

} // namespace qparity
