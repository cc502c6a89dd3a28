#pragma once

#include "qparity/model.hpp"
#include "qparity/strategy.hpp"

#include <functional>
#include <limits>
#include <map>

namespace qparity {

constexpr std::uint32_t kNoNode = std::numeric_limits<std::uint32_t>::max();

/// Two-player Buchi arena in CSR form. Attractors only walk predecessor
/// lists; successor enumeration is needed rarely and goes through a
/// callback so unfolded arenas do not have to materialize forward edges.
struct Arena {
    std::uint32_t n = 0;
    std::vector<std::uint8_t> p2;     // owner bit, 1 = player 2
    std::vector<std::uint8_t> buchi;  // priority-0 bit
    std::vector<std::uint32_t> outdeg;
    std::vector<std::uint32_t> pred_head; // n+1
    std::vector<std::uint32_t> pred;
    std::function<void(std::uint32_t, const std::function<void(std::uint32_t)>&)> for_succ;
};

inline Arena arena_from_model(const Model& g) {
    Arena a;
    a.n = static_cast<std::uint32_t>(g.num_states());
    a.p2.resize(a.n);
    a.buchi.resize(a.n);
    a.outdeg.resize(a.n);
    for (StateId q = 0; q < a.n; ++q) {
        a.p2[q] = g.owner(q) != Owner::Player1;
        a.buchi[q] = g.priority(q) == 0;
        a.outdeg[q] = static_cast<std::uint32_t>(g.out(q).size());
    }
    a.pred_head.assign(a.n + 1, 0);
    for (const Edge& e : g.edges)
        ++a.pred_head[e.dst + 1];
    for (std::uint32_t q = 0; q < a.n; ++q)
        a.pred_head[q + 1] += a.pred_head[q];
    a.pred.resize(g.num_edges());
    std::vector<std::uint32_t> fill(a.pred_head.begin(), a.pred_head.end() - 1);
    for (const Edge& e : g.edges)
        a.pred[fill[e.dst]++] = e.src;
    const Model* gp = &g;
    a.for_succ = [gp](std::uint32_t u, const std::function<void(std::uint32_t)>& f) {
        for (const Edge& e : gp->out(u))
            f(e.dst);
    };
    return a;
}

struct BuchiSolveResult {
    std::vector<std::uint8_t> win;     // player-1 winning bit per node
    std::vector<std::uint32_t> choice; // witness successor for winning player-1 nodes
};

namespace detail {

/// Attractor for one player within `alive`. The attracting player's nodes
/// join on the first marked successor (recording it), the opponent's when
/// all alive successors are marked. cnt must enter as a copy of the alive
/// out-degrees and is consumed.
inline void attract(const Arena& a, const std::vector<std::uint8_t>& alive,
                    std::vector<std::uint32_t>& cnt, std::vector<std::uint8_t>& inset,
                    std::vector<std::uint32_t>& work, bool attracting_p2,
                    std::vector<std::uint32_t>* choice) {
    while (!work.empty()) {
        std::uint32_t t = work.back();
        work.pop_back();
        for (std::uint32_t i = a.pred_head[t]; i < a.pred_head[t + 1]; ++i) {
            std::uint32_t p = a.pred[i];
            if (!alive[p] || inset[p])
                continue;
            const bool p_attracts = (a.p2[p] != 0) == attracting_p2;
            if (p_attracts) {
                inset[p] = 1;
                if (choice)
                    (*choice)[p] = t;
                work.push_back(p);
            } else if (--cnt[p] == 0) {
                inset[p] = 1;
                work.push_back(p);
            }
        }
    }
}

} // namespace detail

/// Classical repeated-attractor fixpoint for Buchi games: player 1 wins
/// exactly the nodes from which it can force visiting Buchi nodes
/// infinitely often. Returns a memoryless witness on the winning region.
inline BuchiSolveResult solve_buchi_arena(const Arena& a) {
    const std::uint32_t n = a.n;
    std::vector<std::uint8_t> alive(n, 1);
    std::vector<std::uint32_t> alive_out(a.outdeg);
    std::vector<std::uint32_t> cnt(n);
    std::vector<std::uint8_t> in_a(n), in_d(n);
    std::vector<std::uint32_t> work;
    std::vector<std::uint32_t> choice(n, kNoNode);

    std::uint64_t alive_count = n;
    for (;;) {
        // A = player-1 attractor of the alive Buchi nodes
        cnt = alive_out;
        std::fill(in_a.begin(), in_a.end(), 0);
        std::fill(choice.begin(), choice.end(), kNoNode);
        work.clear();
        for (std::uint32_t u = 0; u < n; ++u)
            if (alive[u] && a.buchi[u]) {
                in_a[u] = 1;
                work.push_back(u);
            }
        detail::attract(a, alive, cnt, in_a, work, false, &choice);

        // U: alive nodes player 1 cannot even reach a Buchi node from
        bool any_u = false;
        std::fill(in_d.begin(), in_d.end(), 0);
        work.clear();
        for (std::uint32_t u = 0; u < n; ++u)
            if (alive[u] && !in_a[u]) {
                in_d[u] = 1;
                work.push_back(u);
                any_u = true;
            }
        if (!any_u)
            break;

        // remove the player-2 attractor of U
        cnt = alive_out;
        detail::attract(a, alive, cnt, in_d, work, true, nullptr);
        for (std::uint32_t u = 0; u < n; ++u) {
            if (!in_d[u] || !alive[u])
                continue;
            alive[u] = 0;
            --alive_count;
            for (std::uint32_t i = a.pred_head[u]; i < a.pred_head[u + 1]; ++i) {
                std::uint32_t p = a.pred[i];
                if (alive[p])
                    --alive_out[p];
            }
        }
        if (alive_count == 0)
            break;
    }

    BuchiSolveResult r;
    r.win.assign(n, 0);
    r.choice.assign(n, kNoNode);
    for (std::uint32_t u = 0; u < n; ++u)
        if (alive[u])
            r.win[u] = 1;
    for (std::uint32_t u = 0; u < n; ++u) {
        if (!alive[u] || a.p2[u])
            continue;
        if (a.buchi[u]) {
            // rank 0: any move staying in the winning region re-arms the
            // attractor; pick the smallest such successor
            std::uint32_t best = kNoNode;
            a.for_succ(u, [&](std::uint32_t v) {
                if (alive[v] && v < best)
                    best = v;
            });
            r.choice[u] = best;
        } else {
            r.choice[u] = choice[u];
        }
    }
    return r;
}

struct BuchiGameResult {
    std::vector<StateId> winning;
    std::vector<bool> winning_mask;
    std::map<StateId, StateId> strategy; // memoryless witness on winning player-1 states
};

/// Winning set of a two-player Buchi game given as a Model with priorities
/// in {0,1}.
inline BuchiGameResult solve_buchi_game(const Model& g) {
    require_valid(g, "solve_buchi_game");
    if (g.kind != ModelKind::Game)
        throw ModelError("solve_buchi_game: expected a game");
    if (g.max_priority > 1)
        throw ModelError("solve_buchi_game: priorities must be within {0,1}");
    Arena a = arena_from_model(g);
    auto sr = solve_buchi_arena(a);
    BuchiGameResult r;
    r.winning_mask.assign(g.num_states(), false);
    for (StateId q = 0; q < g.num_states(); ++q)
        if (sr.win[q]) {
            r.winning_mask[q] = true;
            r.winning.push_back(q);
            if (g.owner(q) == Owner::Player1 && sr.choice[q] != kNoNode)
                r.strategy[q] = sr.choice[q];
        }
    return r;
}

/// Per-state absorbing overrides applied while unfolding.
struct UnfoldOverrides {
    // admitted: node (q, c) with c >= threshold[q] becomes an absorbing
    // priority-0 node (threshold < 0 means no admission at q)
    std::vector<std::int64_t> admit_threshold;
    // free win: (q, any c) absorbing priority-0; energy-violating moves
    // into q land in a winning sink instead of the losing one
    std::vector<std::uint8_t> freewin;
};

/// Credit-unfolded arena over an energy game. Node (q, c) = q*(cap+1)+c,
/// then the losing sink, then (when needed) the winning sink.
struct UnfoldedArena {
    Arena arena;
    std::uint32_t base_n = 0;
    std::int64_t cap = 0;
    std::uint32_t bot = 0;
    std::uint32_t winsink = kNoNode;

    std::uint32_t node_of(StateId q, std::int64_t c) const {
        return static_cast<std::uint32_t>(q * (cap + 1) + c);
    }
    StateId state_of(std::uint32_t node) const {
        return static_cast<StateId>(node / (cap + 1));
    }
    std::int64_t credit_of(std::uint32_t node) const {
        return static_cast<std::int64_t>(node % (cap + 1));
    }
    bool is_state_node(std::uint32_t node) const { return node < base_n * (cap + 1); }
};

inline UnfoldedArena build_unfolded_arena(const Model& g, std::int64_t cap,
                                          const UnfoldOverrides* ov = nullptr) {
    if (cap < 1)
        throw ModelError("unfold: cap must be at least 1");
    UnfoldedArena ua;
    ua.base_n = static_cast<std::uint32_t>(g.num_states());
    ua.cap = cap;
    const std::uint64_t state_nodes = static_cast<std::uint64_t>(ua.base_n) * (cap + 1);
    if (state_nodes > 400'000'000ull)
        throw ModelError("unfold: arena too large");
    ua.bot = static_cast<std::uint32_t>(state_nodes);
    bool need_winsink = false;
    if (ov)
        for (std::uint8_t f : ov->freewin)
            need_winsink |= f != 0;
    ua.winsink = need_winsink ? ua.bot + 1 : kNoNode;
    const std::uint32_t n = ua.bot + 1 + (need_winsink ? 1 : 0);

    Arena& a = ua.arena;
    a.n = n;
    a.p2.assign(n, 0);
    a.buchi.assign(n, 0);
    a.outdeg.assign(n, 0);

    auto absorbing = [&](StateId q, std::int64_t c) -> bool {
        if (!ov)
            return false;
        if (!ov->freewin.empty() && ov->freewin[q])
            return true;
        if (!ov->admit_threshold.empty() && ov->admit_threshold[q] >= 0 &&
            c >= ov->admit_threshold[q])
            return true;
        return false;
    };
    auto node_buchi = [&](StateId q, std::int64_t c) -> bool {
        return absorbing(q, c) || g.priority(q) == 0;
    };
    auto target_of = [&](const Edge& e, std::int64_t c) -> std::uint32_t {
        std::int64_t c2 = c + e.weight;
        if (c2 < 0)
            return (ov && !ov->freewin.empty() && ov->freewin[e.dst]) ? ua.winsink : ua.bot;
        return ua.node_of(e.dst, std::min(cap, c2));
    };

    for (StateId q = 0; q < ua.base_n; ++q) {
        const bool p2bit = g.owner(q) != Owner::Player1;
        for (std::int64_t c = 0; c <= cap; ++c) {
            std::uint32_t u = ua.node_of(q, c);
            a.p2[u] = p2bit;
            a.buchi[u] = node_buchi(q, c);
            a.outdeg[u] = absorbing(q, c) ? 1 : static_cast<std::uint32_t>(g.out(q).size());
        }
    }
    a.p2[ua.bot] = 1;
    a.outdeg[ua.bot] = 1;
    if (need_winsink) {
        a.p2[ua.winsink] = 1;
        a.buchi[ua.winsink] = 1;
        a.outdeg[ua.winsink] = 1;
    }

    // predecessor CSR in two passes
    a.pred_head.assign(static_cast<std::size_t>(n) + 1, 0);
    auto count_edge = [&](std::uint32_t dst) { ++a.pred_head[dst + 1]; };
    for (StateId q = 0; q < ua.base_n; ++q) {
        for (std::int64_t c = 0; c <= cap; ++c) {
            std::uint32_t u = ua.node_of(q, c);
            if (absorbing(q, c)) {
                count_edge(u);
                continue;
            }
            for (const Edge& e : g.out(q))
                count_edge(target_of(e, c));
        }
    }
    count_edge(ua.bot);
    if (need_winsink)
        count_edge(ua.winsink);
    for (std::uint32_t u = 0; u < n; ++u)
        a.pred_head[u + 1] += a.pred_head[u];
    a.pred.resize(a.pred_head[n]);
    std::vector<std::uint32_t> fill(a.pred_head.begin(), a.pred_head.end() - 1);
    auto put_edge = [&](std::uint32_t src, std::uint32_t dst) { a.pred[fill[dst]++] = src; };
    for (StateId q = 0; q < ua.base_n; ++q) {
        for (std::int64_t c = 0; c <= cap; ++c) {
            std::uint32_t u = ua.node_of(q, c);
            if (absorbing(q, c)) {
                put_edge(u, u);
                continue;
            }
            for (const Edge& e : g.out(q))
                put_edge(u, target_of(e, c));
        }
    }
    put_edge(ua.bot, ua.bot);
    if (need_winsink)
        put_edge(ua.winsink, ua.winsink);

    const Model* gp = &g;
    const std::int64_t capc = cap;
    const std::uint32_t base_n = ua.base_n;
    const std::uint32_t bot = ua.bot;
    const std::uint32_t winsink = ua.winsink;
    UnfoldOverrides ovcopy = ov ? *ov : UnfoldOverrides{};
    a.for_succ = [gp, capc, base_n, bot, winsink, ovcopy](
                     std::uint32_t u, const std::function<void(std::uint32_t)>& f) {
        if (u >= static_cast<std::uint64_t>(base_n) * (capc + 1)) {
            f(u); // sinks self-loop
            return;
        }
        StateId q = static_cast<StateId>(u / (capc + 1));
        std::int64_t c = static_cast<std::int64_t>(u % (capc + 1));
        bool abs = (!ovcopy.freewin.empty() && ovcopy.freewin[q]) ||
                   (!ovcopy.admit_threshold.empty() && ovcopy.admit_threshold[q] >= 0 &&
                    c >= ovcopy.admit_threshold[q]);
        if (abs) {
            f(u);
            return;
        }
        for (const Edge& e : gp->out(q)) {
            std::int64_t c2 = c + e.weight;
            if (c2 < 0)
                f(!ovcopy.freewin.empty() && ovcopy.freewin[e.dst] ? winsink : bot);
            else
                f(static_cast<std::uint32_t>(e.dst * (capc + 1) + std::min(capc, c2)));
        }
    };
    return ua;
}

/// Materialized credit unfolding, for inspection and small-scale solving:
/// nodes (q, c) for c in [0, cap] plus an absorbing losing sink; moves
/// follow (q, c) -> (q', min(cap, c+w)) when c+w >= 0 and fall to the sink
/// otherwise. Buchi nodes are the (q, c) with priority(q) = 0.
struct UnfoldedGame {
    Model game;
    std::int64_t cap = 0;
    std::uint32_t base_states = 0;
    StateId bot = 0;

    StateId node_of(StateId q, std::int64_t c) const {
        return static_cast<StateId>(q * (cap + 1) + c);
    }
};

inline UnfoldedGame unfold_energy(const Model& g, std::int64_t cap) {
    require_valid(g, "unfold_energy");
    if (g.kind != ModelKind::Game)
        throw ModelError("unfold_energy: expected a game");
    if (cap < 1)
        throw ModelError("unfold_energy: cap must be at least 1");
    UnfoldedGame u;
    u.cap = cap;
    u.base_states = static_cast<std::uint32_t>(g.num_states());
    u.game.kind = ModelKind::Game;
    for (StateId q = 0; q < g.num_states(); ++q)
        for (std::int64_t c = 0; c <= cap; ++c)
            u.game.add_state(g.owner(q) == Owner::Player1 ? Owner::Player1 : Owner::Player2,
                             g.priority(q) == 0 ? 0 : 1,
                             g.display_name(q) + "@" + std::to_string(c));
    u.bot = u.game.add_state(Owner::Player2, 1, "bot");
    std::set<std::pair<StateId, StateId>> seen;
    for (StateId q = 0; q < g.num_states(); ++q) {
        for (std::int64_t c = 0; c <= cap; ++c) {
            for (const Edge& e : g.out(q)) {
                std::int64_t c2 = c + e.weight;
                StateId dst = c2 < 0 ? u.bot : u.node_of(e.dst, std::min(cap, c2));
                // distinct base edges can collapse onto the sink
                if (seen.insert({u.node_of(q, c), dst}).second)
                    u.game.add_edge(u.node_of(q, c), dst, 0);
            }
        }
    }
    u.game.add_edge(u.bot, u.bot, 0);
    u.game.finalize();
    return u;
}

/// Minimum initial credits and an energy-based witness for a two-player
/// energy Buchi game. The witness's memory is the saturated energy level.
struct EnergyGameResult {
    std::int64_t cap = 0;
    std::vector<std::optional<std::int64_t>> credits; // per state; nullopt = unwinnable
    std::vector<std::uint8_t> win;                    // per unfolded node q*(cap+1)+c
    std::vector<std::uint32_t> choice;                // witness successor per winning p1 node

    bool node_wins(StateId q, std::int64_t c) const {
        if (c > cap)
            c = cap;
        return win[static_cast<std::size_t>(q) * (cap + 1) + c] != 0;
    }
};

inline std::int64_t default_energy_cap(const Model& g) {
    return std::max<std::int64_t>(
        1, 2 * static_cast<std::int64_t>(g.num_states()) * std::max<std::int64_t>(g.max_weight, 1));
}

inline EnergyGameResult solve_energy_buchi_game(const Model& g, std::int64_t cap = 0) {
    require_valid(g, "solve_energy_buchi_game");
    if (g.kind != ModelKind::Game)
        throw ModelError("solve_energy_buchi_game: expected a game");
    if (g.max_priority > 1)
        throw ModelError("solve_energy_buchi_game: priorities must be within {0,1}");
    if (cap <= 0)
        cap = default_energy_cap(g);
    UnfoldedArena ua = build_unfolded_arena(g, cap, nullptr);
    auto sr = solve_buchi_arena(ua.arena);
    EnergyGameResult r;
    r.cap = cap;
    r.credits.assign(g.num_states(), std::nullopt);
    for (StateId q = 0; q < g.num_states(); ++q)
        for (std::int64_t c = 0; c <= cap; ++c)
            if (sr.win[ua.node_of(q, c)]) {
                r.credits[q] = c;
                break;
            }
    r.win.assign(sr.win.begin(), sr.win.begin() + static_cast<std::size_t>(g.num_states()) * (cap + 1));
    r.choice.assign(sr.choice.begin(),
                    sr.choice.begin() + static_cast<std::size_t>(g.num_states()) * (cap + 1));
    return r;
}

/// Wraps an energy-game witness as a transducer over the game: memory is
/// the saturated energy level, updates follow traversed edge weights.
inline FiniteMemoryStrategy energy_game_strategy(const Model& g, const EnergyGameResult& r,
                                                 std::int64_t initial_credit) {
    FiniteMemoryStrategy s;
    s.mem_count = static_cast<std::uint32_t>(r.cap + 1);
    s.initial_mem = static_cast<std::uint32_t>(std::min(initial_credit, r.cap));
    auto win = std::make_shared<std::vector<std::uint32_t>>(r.choice);
    const Model* gp = &g;
    const std::int64_t cap = r.cap;
    s.update = [gp, cap](std::uint32_t mem, StateId src, StateId dst) {
        auto e = gp->find_edge(src, dst);
        if (!e)
            throw std::logic_error("energy strategy observed a non-edge");
        std::int64_t c = std::min<std::int64_t>(cap, mem + gp->edges[*e].weight);
        return static_cast<std::uint32_t>(std::max<std::int64_t>(0, c));
    };
    s.next = [win, cap](std::uint32_t mem, StateId q) {
        std::uint32_t node = static_cast<std::uint32_t>(q * (cap + 1) + mem);
        std::uint32_t succ = (*win)[node];
        if (succ == kNoNode)
            throw std::logic_error("energy strategy consulted at a losing node");
        return Dist::point(static_cast<StateId>(succ / (cap + 1)));
    };
    return s;
}

} // namespace qparity
