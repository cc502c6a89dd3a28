#pragma once

#include "qparity/linear.hpp"
#include "qparity/model.hpp"

#include <map>
#include <set>

// Brute-force reference implementations used for differential testing.
// These deliberately do not share graph code with the main pipeline: SCCs
// are Kosaraju instead of Tarjan, reachability and end-component pruning
// are plain rescan loops, and quantities come from enumeration instead of
// iteration. Only the exact-arithmetic primitives are shared.

namespace qparity::oracle {

class GuardError : public std::runtime_error {
public:
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

inline std::vector<std::vector<StateId>> kosaraju_sccs(const Model& m,
                                                       const std::vector<bool>& alive) {
    const std::size_t n = m.num_states();
    std::vector<StateId> order;
    std::vector<bool> seen(n, false);
    for (StateId root = 0; root < n; ++root) {
        if (!alive[root] || seen[root])
            continue;
        std::vector<std::pair<StateId, std::size_t>> stack{{root, 0}};
        seen[root] = true;
        while (!stack.empty()) {
            auto& [q, i] = stack.back();
            auto es = m.out(q);
            if (i < es.size()) {
                StateId dst = es[i++].dst;
                if (alive[dst] && !seen[dst]) {
                    seen[dst] = true;
                    stack.push_back({dst, 0});
                }
            } else {
                order.push_back(q);
                stack.pop_back();
            }
        }
    }
    std::vector<std::vector<StateId>> rev(n);
    for (const Edge& e : m.edges)
        if (alive[e.src] && alive[e.dst])
            rev[e.dst].push_back(e.src);
    std::vector<std::vector<StateId>> comps;
    std::vector<bool> assigned(n, false);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (assigned[*it])
            continue;
        std::vector<StateId> comp, stack{*it};
        assigned[*it] = true;
        while (!stack.empty()) {
            StateId q = stack.back();
            stack.pop_back();
            comp.push_back(q);
            for (StateId p : rev[q])
                if (!assigned[p]) {
                    assigned[p] = true;
                    stack.push_back(p);
                }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

/// Maximal end components within `alive` by plain rescan: drop
/// probabilistic states whose support leaves their component and states
/// without an edge inside their component, until stable.
inline std::vector<std::vector<StateId>> simple_mecs_within(const Model& m,
                                                            std::vector<bool> alive) {
    const std::size_t n = m.num_states();
    for (;;) {
        auto comps = kosaraju_sccs(m, alive);
        std::vector<std::int32_t> comp(n, -1);
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (StateId q : comps[c])
                comp[q] = static_cast<std::int32_t>(c);
        bool changed = false;
        for (StateId q = 0; q < n; ++q) {
            if (!alive[q])
                continue;
            bool internal = false;
            bool escapes = false;
            for (const Edge& e : m.out(q)) {
                bool inside = alive[e.dst] && comp[e.dst] == comp[q];
                internal = internal || inside;
                escapes = escapes || !inside;
            }
            if ((m.is_prob(q) && escapes) || !internal) {
                alive[q] = false;
                changed = true;
            }
        }
        if (!changed) {
            std::vector<std::vector<StateId>> out;
            for (auto& c : comps) {
                bool keep = true;
                for (StateId q : c)
                    keep = keep && alive[q];
                if (keep)
                    out.push_back(std::move(c));
            }
            return out;
        }
    }
}

inline std::vector<std::vector<StateId>> simple_mecs(const Model& m) {
    return simple_mecs_within(m, std::vector<bool>(m.num_states(), true));
}

/// Direct end-component test: delta-closed, internal edge everywhere,
/// strongly connected.
inline bool is_ec(const Model& m, const std::vector<StateId>& states) {
    if (states.empty())
        return false;
    std::set<StateId> set(states.begin(), states.end());
    for (StateId q : states) {
        bool internal = false;
        for (const Edge& e : m.out(q)) {
            if (set.count(e.dst))
                internal = true;
            else if (m.is_prob(q))
                return false;
        }
        if (!internal)
            return false;
    }
    // strong connectivity by |states| forward searches
    for (StateId from : states) {
        std::set<StateId> seen{from};
        std::vector<StateId> stack{from};
        while (!stack.empty()) {
            StateId q = stack.back();
            stack.pop_back();
            for (const Edge& e : m.out(q))
                if (set.count(e.dst) && seen.insert(e.dst).second)
                    stack.push_back(e.dst);
        }
        if (seen.size() != states.size())
            return false;
    }
    return true;
}

/// Almost-sure reachability by definition-level rescan: repeatedly delete
/// states that cannot reach the target inside the remainder, then anything
/// forced into the deleted region; targets are absorbing.
inline std::vector<bool> as_reach(const Model& m, const std::vector<bool>& target) {
    const std::size_t n = m.num_states();
    std::vector<bool> good(n, true);
    for (;;) {
        // can-reach by backward rescan
        std::vector<bool> reach = target;
        for (bool grew = true; grew;) {
            grew = false;
            for (StateId q = 0; q < n; ++q) {
                if (!good[q] || reach[q] || target[q])
                    continue;
                for (const Edge& e : m.out(q))
                    if (good[e.dst] && reach[e.dst]) {
                        reach[q] = true;
                        grew = true;
                        break;
                    }
            }
        }
        std::vector<bool> doomed(n, false);
        bool any = false;
        for (StateId q = 0; q < n; ++q)
            if (good[q] && !reach[q] && !target[q]) {
                doomed[q] = true;
                any = true;
            }
        if (!any)
            break;
        for (bool grew = true; grew;) {
            grew = false;
            for (StateId q = 0; q < n; ++q) {
                if (!good[q] || doomed[q] || target[q])
                    continue;
                bool all_bad = true, some_bad = false;
                for (const Edge& e : m.out(q)) {
                    bool bad = !good[e.dst] || doomed[e.dst];
                    all_bad = all_bad && bad;
                    some_bad = some_bad || bad;
                }
                if ((m.is_prob(q) && some_bad) || all_bad) {
                    doomed[q] = true;
                    grew = true;
                }
            }
        }
        for (StateId q = 0; q < n; ++q)
            if (doomed[q])
                good[q] = false;
    }
    return good;
}

/// Almost-sure parity winning set, definition level. The union of all
/// end components with an even least priority equals, level by level, the
/// union of the maximal end components of the restriction to states of
/// priority >= 2i that touch priority 2i; then almost-sure reachability.
inline std::vector<bool> as_parity(const Model& m) {
    const std::size_t n = m.num_states();
    std::vector<bool> win(n, false);
    for (std::uint32_t level = 0; level <= m.max_priority; level += 2) {
        std::vector<bool> alive(n);
        for (StateId q = 0; q < n; ++q)
            alive[q] = m.priority(q) >= level;
        for (auto& c : simple_mecs_within(m, std::move(alive))) {
            bool touches = false;
            for (StateId q : c)
                touches = touches || m.priority(q) == level;
            if (touches)
                for (StateId q : c)
                    win[q] = true;
        }
    }
    return as_reach(m, win);
}

/// Saturated credit product of an MDP: states (q, c) for c in [0, cap]
/// plus an absorbing odd sink absorbing every energy violation. Since an
/// energy violation is a finite prefix event of positive probability,
/// almost-sure energy parity with initial credit c coincides with
/// almost-sure parity on the product from (q, c), once cap is generous
/// enough; differential tests pit this against the main pipeline.
struct ProductEnergyOracle {
    std::int64_t cap = 0;
    // win[q][c]: almost-sure energy parity from q with initial credit c
    std::vector<std::vector<bool>> win;

    std::optional<std::int64_t> min_credit(StateId q) const {
        for (std::int64_t c = 0; c <= cap; ++c)
            if (win[q][c])
                return c;
        return std::nullopt;
    }
};

inline ProductEnergyOracle product_energy_oracle(const Model& m, std::int64_t cap) {
    require_valid(m, "product_energy_oracle");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("product_energy_oracle: expected an MDP");
    const std::size_t n = m.num_states();
    if ((static_cast<std::uint64_t>(cap) + 2) * n > 100'000)
        throw GuardError("product_energy_oracle: (cap+2)*|Q| exceeds the guard");

    Model prod(ModelKind::Mdp);
    auto node = [&](StateId q, std::int64_t c) {
        return static_cast<StateId>(q * (cap + 1) + c);
    };
    for (StateId q = 0; q < n; ++q)
        for (std::int64_t c = 0; c <= cap; ++c)
            prod.add_state(m.owner(q), m.priority(q));
    StateId bot = prod.add_state(Owner::Player1, 1);
    for (StateId q = 0; q < n; ++q) {
        for (std::int64_t c = 0; c <= cap; ++c) {
            if (m.is_prob(q)) {
                std::map<StateId, Rat> acc;
                for (const Edge& e : m.out(q)) {
                    std::int64_t c2 = c + e.weight;
                    StateId dst = c2 < 0 ? bot : node(e.dst, std::min(cap, c2));
                    acc[dst] += e.prob;
                }
                for (auto& [dst, p] : acc)
                    prod.add_edge(node(q, c), dst, 0, p);
            } else {
                std::set<StateId> targets;
                for (const Edge& e : m.out(q)) {
                    std::int64_t c2 = c + e.weight;
                    targets.insert(c2 < 0 ? bot : node(e.dst, std::min(cap, c2)));
                }
                for (StateId dst : targets)
                    prod.add_edge(node(q, c), dst, 0);
            }
        }
    }
    prod.add_edge(bot, bot, 0);
    prod.finalize();

    auto winset = as_parity(prod);
    ProductEnergyOracle r;
    r.cap = cap;
    r.win.assign(n, std::vector<bool>(cap + 1, false));
    for (StateId q = 0; q < n; ++q)
        for (std::int64_t c = 0; c <= cap; ++c)
            r.win[q][c] = winset[node(q, c)];
    return r;
}

/// Exact optimal gain of an end component by enumerating every pure
/// memoryless policy and taking the best bottom-class stationary gain.
inline Rat policy_enum_mp_oracle(const Model& m, const std::vector<StateId>& states,
                                 std::uint64_t policy_guard = 10'000) {
    require_valid(m, "policy_enum_mp_oracle");
    if (!is_ec(m, states))
        throw ModelError("policy_enum_mp_oracle: set is not an end component");
    std::set<StateId> set(states.begin(), states.end());

    std::vector<StateId> deciders;
    std::vector<std::vector<std::uint32_t>> options; // edge indices into m.edges
    std::uint64_t count = 1;
    for (StateId q : states) {
        if (m.is_prob(q))
            continue;
        std::vector<std::uint32_t> opts;
        for (std::uint32_t i = m.first_out[q]; i < m.first_out[q + 1]; ++i)
            if (set.count(m.edges[i].dst))
                opts.push_back(i);
        deciders.push_back(q);
        options.push_back(opts);
        count *= opts.size();
        if (count > policy_guard)
            throw GuardError("policy_enum_mp_oracle: policy count exceeds the guard");
    }

    std::vector<StateId> local(m.num_states());
    for (std::size_t i = 0; i < states.size(); ++i)
        local[states[i]] = static_cast<StateId>(i);
    const std::size_t k = states.size();

    std::optional<Rat> best;
    std::vector<std::size_t> pick(deciders.size(), 0);
    for (;;) {
        // induced chain rows and rewards
        std::vector<std::vector<std::pair<StateId, Rat>>> row(k);
        std::vector<Rat> reward(k, Rat(0));
        for (std::size_t i = 0; i < k; ++i) {
            StateId q = states[i];
            if (m.is_prob(q)) {
                for (const Edge& e : m.out(q)) {
                    row[i].push_back({local[e.dst], e.prob});
                    reward[i] += e.prob * Rat(e.weight);
                }
            }
        }
        for (std::size_t d = 0; d < deciders.size(); ++d) {
            const Edge& e = m.edges[options[d][pick[d]]];
            row[local[e.src]].push_back({local[e.dst], Rat(1)});
            reward[local[e.src]] = Rat(e.weight);
        }
        // bottom classes of the chain
        Model chain(ModelKind::Mdp);
        for (std::size_t i = 0; i < k; ++i)
            chain.add_state(Owner::Player1, 0);
        for (std::size_t i = 0; i < k; ++i)
            for (auto& [dst, p] : row[i])
                chain.add_edge(static_cast<StateId>(i), dst, 0);
        chain.finalize();
        auto comps = kosaraju_sccs(chain, std::vector<bool>(k, true));
        for (auto& c : comps) {
            bool bottom = true;
            std::set<StateId> cset(c.begin(), c.end());
            for (StateId i : c)
                for (auto& [dst, p] : row[i])
                    bottom = bottom && cset.count(dst) > 0;
            if (!bottom)
                continue;
            // stationary distribution of the class
            const std::size_t b = c.size();
            std::vector<std::int32_t> pos(k, -1);
            for (std::size_t i = 0; i < b; ++i)
                pos[c[i]] = static_cast<std::int32_t>(i);
            std::vector<std::vector<Rat>> a(b, std::vector<Rat>(b, Rat(0)));
            std::vector<Rat> rhs(b, Rat(0));
            for (std::size_t j = 0; j + 1 < b; ++j) {
                a[j][j] -= 1;
                for (std::size_t i = 0; i < b; ++i)
                    for (auto& [dst, p] : row[c[i]])
                        if (dst == c[j])
                            a[j][i] += p;
            }
            for (std::size_t i = 0; i < b; ++i)
                a[b - 1][i] = Rat(1);
            rhs[b - 1] = Rat(1);
            auto pi = solve_linear(std::move(a), std::move(rhs));
            if (!pi)
                throw std::logic_error("policy_enum_mp_oracle: singular stationary system");
            Rat gain(0);
            for (std::size_t i = 0; i < b; ++i)
                gain += (*pi)[i] * reward[c[i]];
            if (!best || gain > *best)
                best = gain;
        }
        // next policy
        std::size_t d = 0;
        while (d < pick.size() && ++pick[d] == options[d].size()) {
            pick[d] = 0;
            ++d;
        }
        if (d == pick.size())
            break;
    }
    if (!best)
        throw std::logic_error("policy_enum_mp_oracle: no policy evaluated");
    return *best;
}

/// Union of all winning end components by subset enumeration (guarded to
/// small models): an end component qualifies when its least priority is
/// even and (conjunction) its enumerated gain meets the threshold, or
/// (disjunction) either of the two holds.
inline std::vector<bool> enumerate_winning_union(const Model& m, const Rat& nu, bool strict,
                                                 bool disjunction) {
    const std::size_t n = m.num_states();
    if (n > 16)
        throw GuardError("enumerate_winning_union: too many states for subset enumeration");
    std::vector<bool> win(n, false);
    for (std::uint32_t bits = 1; bits < (1u << n); ++bits) {
        std::vector<StateId> states;
        for (StateId q = 0; q < n; ++q)
            if (bits & (1u << q))
                states.push_back(q);
        if (!is_ec(m, states))
            continue;
        std::uint32_t least = m.priority(states[0]);
        for (StateId q : states)
            least = std::min(least, m.priority(q));
        bool parity_ok = least % 2 == 0;
        if (!disjunction && !parity_ok)
            continue;
        if (disjunction && parity_ok) {
            for (StateId q : states)
                win[q] = true;
            continue;
        }
        Rat gain = policy_enum_mp_oracle(m, states);
        bool mp_ok = strict ? gain > nu : gain >= nu;
        if ((disjunction && mp_ok) || (!disjunction && mp_ok))
            for (StateId q : states)
                win[q] = true;
    }
    return win;
}

} // namespace qparity::oracle
