#pragma once

#include "qparity/linear.hpp"
#include "qparity/model.hpp"

#include <map>
#include <numeric>

namespace qparity {

inline std::vector<bool> mask_of(std::size_t n, std::span<const StateId> ids) {
    std::vector<bool> mask(n, false);
    for (StateId q : ids) {
        if (q >= n)
            throw std::invalid_argument("state id out of range: " + std::to_string(q));
        mask[q] = true;
    }
    return mask;
}

inline std::vector<StateId> ids_of(const std::vector<bool>& mask) {
    std::vector<StateId> ids;
    for (StateId q = 0; q < mask.size(); ++q)
        if (mask[q])
            ids.push_back(q);
    return ids;
}

/// Strongly connected components of the subgraph induced by `alive`,
/// iterative Tarjan. Components are returned with sorted member lists.
inline std::vector<std::vector<StateId>> sccs_within(const Model& m,
                                                     const std::vector<bool>& alive) {
    const std::size_t n = m.num_states();
    constexpr std::uint32_t undef = 0xffffffffu;
    std::vector<std::uint32_t> index(n, undef), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<StateId> stack;
    std::vector<std::vector<StateId>> comps;
    std::uint32_t next_index = 0;

    struct Frame {
        StateId q;
        std::uint32_t edge;
    };
    std::vector<Frame> call;
    for (StateId root = 0; root < n; ++root) {
        if (!alive[root] || index[root] != undef)
            continue;
        call.push_back({root, m.first_out[root]});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge < m.first_out[f.q + 1]) {
                StateId w = m.edges[f.edge].dst;
                ++f.edge;
                if (!alive[w])
                    continue;
                if (index[w] == undef) {
                    call.push_back({w, m.first_out[w]});
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                } else if (on_stack[w]) {
                    low[f.q] = std::min(low[f.q], index[w]);
                }
            } else {
                StateId q = f.q;
                call.pop_back();
                if (!call.empty())
                    low[call.back().q] = std::min(low[call.back().q], low[q]);
                if (low[q] == index[q]) {
                    std::vector<StateId> comp;
                    for (;;) {
                        StateId w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp.push_back(w);
                        if (w == q)
                            break;
                    }
                    std::sort(comp.begin(), comp.end());
                    comps.push_back(std::move(comp));
                }
            }
        }
    }
    return comps;
}

/// Least fixpoint of the random-attractor operator within `alive`:
/// player-1 states whose alive successors all lie inside, probabilistic
/// states with some alive successor inside. Player-1 states without alive
/// successors are attracted vacuously.
inline std::vector<bool> random_attractor_mask(const Model& m, const std::vector<bool>& target,
                                               const std::vector<bool>* alive = nullptr) {
    const std::size_t n = m.num_states();
    auto live = [&](StateId q) { return !alive || (*alive)[q]; };
    std::vector<std::vector<StateId>> preds(n);
    for (const Edge& e : m.edges)
        if (live(e.src) && live(e.dst))
            preds[e.dst].push_back(e.src);
    std::vector<std::uint32_t> cnt(n, 0);
    std::vector<bool> attr(n, false);
    std::vector<StateId> work;
    for (StateId q = 0; q < n; ++q) {
        if (!live(q))
            continue;
        std::uint32_t alive_succ = 0;
        for (const Edge& e : m.out(q))
            if (live(e.dst))
                ++alive_succ;
        cnt[q] = alive_succ;
        if (target[q] || (m.owner(q) != Owner::Probabilistic && alive_succ == 0)) {
            attr[q] = true;
            work.push_back(q);
        }
    }
    while (!work.empty()) {
        StateId t = work.back();
        work.pop_back();
        for (StateId p : preds[t]) {
            if (attr[p])
                continue;
            if (m.owner(p) == Owner::Probabilistic) {
                attr[p] = true;
                work.push_back(p);
            } else if (--cnt[p] == 0) {
                attr[p] = true;
                work.push_back(p);
            }
        }
    }
    return attr;
}

inline std::vector<StateId> random_attractor(const Model& m, std::span<const StateId> target) {
    require_valid(m, "random_attractor");
    return ids_of(random_attractor_mask(m, mask_of(m.num_states(), target)));
}

/// Maximal end-component state sets within `alive0`: repeated SCC
/// refinement, removing the random attractor of probabilistic states whose
/// support escapes their component.
inline std::vector<std::vector<StateId>> mecs_within(const Model& m,
                                                     std::vector<bool> alive) {
    const std::size_t n = m.num_states();
    std::vector<std::int32_t> comp(n, -1);
    for (;;) {
        auto sccs = sccs_within(m, alive);
        std::fill(comp.begin(), comp.end(), -1);
        for (std::size_t c = 0; c < sccs.size(); ++c)
            for (StateId q : sccs[c])
                comp[q] = static_cast<std::int32_t>(c);
        std::vector<bool> bad(n, false);
        bool any_bad = false;
        for (StateId q = 0; q < n; ++q) {
            if (!alive[q] || !m.is_prob(q))
                continue;
            for (const Edge& e : m.out(q)) {
                if (!alive[e.dst] || comp[e.dst] != comp[q]) {
                    bad[q] = true;
                    any_bad = true;
                    break;
                }
            }
        }
        if (!any_bad)
            break;
        auto attr = random_attractor_mask(m, bad, &alive);
        for (StateId q = 0; q < n; ++q)
            if (attr[q])
                alive[q] = false;
    }
    std::vector<std::vector<StateId>> result;
    for (auto& scc : sccs_within(m, alive)) {
        if (scc.size() == 1) {
            StateId q = scc[0];
            if (!m.find_edge(q, q))
                continue;
        }
        result.push_back(std::move(scc));
    }
    return result;
}

struct EndComponent {
    std::vector<StateId> states; // sorted
    // internal successors of each player-1 member
    std::map<StateId, std::vector<StateId>> retained;
};

struct MecDecomposition {
    std::vector<EndComponent> components;
    std::vector<std::int32_t> membership; // state -> component index or -1
};

inline EndComponent make_end_component(const Model& m, std::vector<StateId> states) {
    EndComponent ec;
    ec.states = std::move(states);
    auto member = mask_of(m.num_states(), ec.states);
    for (StateId q : ec.states) {
        if (m.owner(q) == Owner::Probabilistic)
            continue;
        std::vector<StateId> inside;
        for (const Edge& e : m.out(q))
            if (member[e.dst])
                inside.push_back(e.dst);
        ec.retained[q] = std::move(inside);
    }
    return ec;
}

inline MecDecomposition mec_decompose(const Model& m) {
    require_valid(m, "mec_decompose");
    MecDecomposition d;
    d.membership.assign(m.num_states(), -1);
    for (auto& states : mecs_within(m, std::vector<bool>(m.num_states(), true))) {
        for (StateId q : states)
            d.membership[q] = static_cast<std::int32_t>(d.components.size());
        d.components.push_back(make_end_component(m, std::move(states)));
    }
    return d;
}

/// Checks the end-component definition directly: delta-closed, every state
/// keeps an internal edge, induced subgraph strongly connected.
inline bool is_end_component(const Model& m, std::span<const StateId> states) {
    if (states.empty())
        return false;
    auto member = mask_of(m.num_states(), states);
    for (StateId q : states) {
        bool internal = false;
        for (const Edge& e : m.out(q)) {
            if (member[e.dst])
                internal = true;
            else if (m.is_prob(q))
                return false; // support escapes
        }
        if (!internal)
            return false;
    }
    auto sccs = sccs_within(m, member);
    return sccs.size() == 1 && sccs[0].size() == states.size();
}

struct Restriction {
    Model model;
    std::vector<StateId> to_sub;  // original -> sub index, or npos
    std::vector<StateId> to_orig; // sub index -> original

    static constexpr StateId npos = std::numeric_limits<StateId>::max();
};

/// Sub-model induced by a delta-closed set whose states all keep an
/// internal edge. Distributions are untouched.
inline Restriction restrict_to(const Model& m, std::span<const StateId> states) {
    auto member = mask_of(m.num_states(), states);
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (!member[q])
            continue;
        bool internal = false;
        for (const Edge& e : m.out(q)) {
            if (member[e.dst])
                internal = true;
            else if (m.is_prob(q))
                throw ModelError("restrict: set is not delta-closed, support of " +
                                 m.display_name(q) + " escapes at " + m.display_name(e.dst));
        }
        if (!internal)
            throw ModelError("restrict: state " + m.display_name(q) +
                             " keeps no internal edge");
    }
    Restriction r;
    r.model.kind = m.kind;
    r.to_sub.assign(m.num_states(), Restriction::npos);
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (!member[q])
            continue;
        r.to_sub[q] = static_cast<StateId>(r.to_orig.size());
        r.to_orig.push_back(q);
        r.model.add_state(m.owner(q), m.priority(q),
                          q < m.names.size() ? m.names[q] : std::string());
    }
    for (const Edge& e : m.edges)
        if (member[e.src] && member[e.dst])
            r.model.edges.push_back({r.to_sub[e.src], r.to_sub[e.dst], e.weight, e.prob});
    r.model.finalize();
    return r;
}

/// Copy of m where every target state keeps only a weight-0 self-loop.
inline Model with_absorbing(const Model& m, const std::vector<bool>& target) {
    Model a;
    a.kind = m.kind;
    a.states = m.states;
    a.names = m.names;
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (target[q]) {
            if (m.is_prob(q))
                a.add_edge(q, q, 0, Rat(1));
            else
                a.add_edge(q, q, 0);
        } else {
            for (const Edge& e : m.out(q))
                a.edges.push_back(e);
        }
    }
    a.finalize();
    return a;
}

struct ReachResult {
    std::vector<StateId> almost_sure;      // sorted
    std::vector<bool> almost_sure_mask;
    std::map<StateId, StateId> witness;    // player-1 move toward the target
};

/// States from which some strategy reaches the target with probability 1.
/// Pure graph fixpoint: repeatedly remove the random attractor of the
/// states that cannot reach the target inside the surviving sub-MDP.
inline ReachResult almost_sure_reach(const Model& m, std::span<const StateId> target) {
    require_valid(m, "almost_sure_reach");
    const std::size_t n = m.num_states();
    auto tmask = mask_of(n, target);
    Model abs = with_absorbing(m, tmask);

    std::vector<std::vector<StateId>> preds(n);
    for (const Edge& e : abs.edges)
        preds[e.dst].push_back(e.src);

    std::vector<bool> alive(n, true);
    for (;;) {
        // backward reachability to the target within alive
        std::vector<bool> can_reach(n, false);
        std::vector<StateId> work;
        for (StateId q : target)
            if (alive[q]) {
                can_reach[q] = true;
                work.push_back(q);
            }
        while (!work.empty()) {
            StateId t = work.back();
            work.pop_back();
            for (StateId p : preds[t])
                if (alive[p] && !can_reach[p]) {
                    can_reach[p] = true;
                    work.push_back(p);
                }
        }
        std::vector<bool> zero(n, false);
        bool any = false;
        for (StateId q = 0; q < n; ++q)
            if (alive[q] && !can_reach[q]) {
                zero[q] = true;
                any = true;
            }
        if (!any)
            break;
        auto attr = random_attractor_mask(abs, zero, &alive);
        for (StateId q = 0; q < n; ++q)
            if (attr[q])
                alive[q] = false;
    }

    ReachResult res;
    res.almost_sure_mask = alive;
    res.almost_sure = ids_of(alive);

    // memoryless witness: BFS layers toward the target inside the fixpoint
    std::vector<std::uint32_t> dist(n, 0xffffffffu);
    std::vector<StateId> queue;
    for (StateId q : target)
        if (alive[q]) {
            dist[q] = 0;
            queue.push_back(q);
        }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        StateId t = queue[head];
        for (StateId p : preds[t])
            if (alive[p] && dist[p] == 0xffffffffu) {
                dist[p] = dist[t] + 1;
                queue.push_back(p);
            }
    }
    for (StateId q = 0; q < n; ++q) {
        if (!alive[q] || tmask[q] || m.owner(q) == Owner::Probabilistic)
            continue;
        StateId best = Restriction::npos;
        std::uint32_t best_d = 0xffffffffu;
        for (const Edge& e : m.out(q))
            if (alive[e.dst] && dist[e.dst] < best_d) {
                best_d = dist[e.dst];
                best = e.dst;
            }
        if (best != Restriction::npos)
            res.witness[q] = best;
    }
    return res;
}

/// sup over strategies of Pr(Reach(target)), exact, per state. Qualitative
/// sets are fixed first, then policy iteration on the MEC quotient with
/// exact linear solves; ties in policy improvement break toward the
/// smallest node index.
inline std::vector<Rat> reach_value(const Model& m, std::span<const StateId> target) {
    require_valid(m, "reach_value");
    const std::size_t n = m.num_states();
    auto tmask = mask_of(n, target);
    Model abs = with_absorbing(m, tmask);

    // MEC quotient of the absorbing model
    auto mecs = mecs_within(abs, std::vector<bool>(n, true));
    std::vector<std::int32_t> mec_of(n, -1);
    for (std::size_t c = 0; c < mecs.size(); ++c)
        for (StateId q : mecs[c])
            mec_of[q] = static_cast<std::int32_t>(c);

    const std::size_t num_nodes = mecs.size() + std::count(mec_of.begin(), mec_of.end(), -1);
    std::vector<std::uint32_t> node_of(n);
    {
        std::uint32_t next = static_cast<std::uint32_t>(mecs.size());
        for (StateId q = 0; q < n; ++q)
            node_of[q] = mec_of[q] >= 0 ? static_cast<std::uint32_t>(mec_of[q]) : next++;
    }

    std::vector<bool> node_target(num_nodes, false);
    for (StateId q = 0; q < n; ++q)
        if (tmask[q])
            node_target[node_of[q]] = true;

    Model quot(ModelKind::Mdp);
    for (std::uint32_t v = 0; v < num_nodes; ++v)
        quot.add_state(Owner::Player1, 0);
    for (StateId q = 0; q < n; ++q)
        if (mec_of[q] < 0 && m.owner(q) == Owner::Probabilistic)
            quot.states[node_of[q]].owner = Owner::Probabilistic;

    std::vector<std::map<std::uint32_t, Rat>> prob_edges(num_nodes);
    std::vector<std::vector<bool>> seen(num_nodes);
    for (auto& s : seen)
        s.assign(num_nodes, false);
    for (StateId q = 0; q < n; ++q) {
        std::uint32_t u = node_of[q];
        if (node_target[u])
            continue; // becomes absorbing
        if (mec_of[q] < 0 && m.owner(q) == Owner::Probabilistic) {
            for (const Edge& e : abs.out(q))
                prob_edges[u][node_of[e.dst]] += e.prob;
        } else {
            // player-1 state or a member of a MEC node: exit edges only
            for (const Edge& e : abs.out(q)) {
                std::uint32_t v = node_of[e.dst];
                if (v == u || seen[u][v])
                    continue;
                seen[u][v] = true;
                quot.add_edge(u, v, 0);
            }
        }
    }
    for (std::uint32_t u = 0; u < num_nodes; ++u) {
        for (auto& [v, p] : prob_edges[u])
            quot.add_edge(u, v, 0, p);
        bool has_edge = !prob_edges[u].empty();
        if (!has_edge)
            for (std::uint32_t v = 0; v < num_nodes && !has_edge; ++v)
                has_edge = seen[u][v];
        if (node_target[u] || !has_edge) {
            if (quot.states[u].owner == Owner::Probabilistic)
                quot.add_edge(u, u, 0, Rat(1));
            else
                quot.add_edge(u, u, 0);
        }
    }
    quot.finalize();

    std::vector<StateId> qtargets;
    for (std::uint32_t v = 0; v < num_nodes; ++v)
        if (node_target[v])
            qtargets.push_back(v);

    auto sure = almost_sure_reach(quot, qtargets);

    // can-reach set of the quotient; everything else has value 0
    std::vector<bool> can_reach(num_nodes, false);
    {
        std::vector<std::vector<StateId>> preds(num_nodes);
        for (const Edge& e : quot.edges)
            preds[e.dst].push_back(e.src);
        std::vector<StateId> work(qtargets.begin(), qtargets.end());
        for (StateId t : qtargets)
            can_reach[t] = true;
        while (!work.empty()) {
            StateId t = work.back();
            work.pop_back();
            for (StateId p : preds[t])
                if (!can_reach[p]) {
                    can_reach[p] = true;
                    work.push_back(p);
                }
        }
    }

    std::vector<Rat> value(num_nodes, Rat(0));
    std::vector<bool> fixed(num_nodes, false);
    for (std::uint32_t v = 0; v < num_nodes; ++v) {
        if (sure.almost_sure_mask[v]) {
            value[v] = Rat(1);
            fixed[v] = true;
        } else if (!can_reach[v]) {
            fixed[v] = true; // value 0
        }
    }

    std::vector<std::uint32_t> unknown;
    std::vector<std::int32_t> slot(num_nodes, -1);
    for (std::uint32_t v = 0; v < num_nodes; ++v)
        if (!fixed[v]) {
            slot[v] = static_cast<std::int32_t>(unknown.size());
            unknown.push_back(v);
        }

    if (!unknown.empty()) {
        std::vector<StateId> choice(num_nodes, 0);
        for (std::uint32_t v : unknown)
            if (quot.owner(v) == Owner::Player1)
                choice[v] = quot.out(v).front().dst;
        for (;;) {
            const std::size_t k = unknown.size();
            std::vector<std::vector<Rat>> a(k, std::vector<Rat>(k, Rat(0)));
            std::vector<Rat> b(k, Rat(0));
            for (std::size_t i = 0; i < k; ++i) {
                std::uint32_t v = unknown[i];
                a[i][i] = Rat(1);
                auto add_term = [&](std::uint32_t dst, const Rat& p) {
                    if (slot[dst] >= 0)
                        a[i][slot[dst]] -= p;
                    else
                        b[i] += p * value[dst];
                };
                if (quot.owner(v) == Owner::Player1)
                    add_term(choice[v], Rat(1));
                else
                    for (const Edge& e : quot.out(v))
                        add_term(e.dst, e.prob);
            }
            auto x = solve_linear(std::move(a), std::move(b));
            if (!x)
                throw std::logic_error("reach_value: singular policy evaluation");
            for (std::size_t i = 0; i < k; ++i)
                value[unknown[i]] = (*x)[i];
            bool improved = false;
            for (std::uint32_t v : unknown) {
                if (quot.owner(v) != Owner::Player1)
                    continue;
                StateId best = choice[v];
                Rat best_val = value[best];
                for (const Edge& e : quot.out(v))
                    if (value[e.dst] > best_val) {
                        best_val = value[e.dst];
                        best = e.dst;
                    }
                if (best != choice[v] && best_val > value[choice[v]]) {
                    choice[v] = best;
                    improved = true;
                }
            }
            if (!improved)
                break;
        }
    }

    std::vector<Rat> out(n);
    for (StateId q = 0; q < n; ++q)
        out[q] = value[node_of[q]];
    return out;
}

} // namespace qparity
