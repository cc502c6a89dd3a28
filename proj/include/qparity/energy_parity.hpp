#pragma once

#include "qparity/decomposition.hpp"
#include "qparity/energy_game.hpp"
#include "qparity/transform.hpp"

#include <set>

namespace qparity {

/// Two-player game obtained by replacing every probabilistic state q of a
/// normalized MDP with a player-2 choice between a parity-checking branch
/// (q, L) and an energy-checking branch (q, R). Input states keep their
/// indices; q itself becomes a player-2 state.
struct GadgetGame {
    enum class Tag : std::uint8_t { Original, Left, Right };

    Model game;
    std::vector<Tag> tag;      // per game state
    std::vector<StateId> base; // per game state: the MDP state it derives from
};

inline GadgetGame gadgetize(const Model& m) {
    require_valid(m, "gadgetize");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("gadgetize: expected an MDP");
    if (m.max_priority > 1)
        throw ModelError("gadgetize: priorities must be within {0,1}");
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (!m.is_prob(q))
            continue;
        if (m.out(q).size() != 2)
            throw ModelError("gadgetize: probabilistic state " + m.display_name(q) +
                             " is not binary; normalize first");
        if (m.priority(q) != m.max_priority)
            throw ModelError("gadgetize: probabilistic state " + m.display_name(q) +
                             " does not carry the maximum priority; normalize first");
    }
    GadgetGame g;
    g.game.kind = ModelKind::Game;
    for (StateId q = 0; q < m.num_states(); ++q) {
        g.game.add_state(m.is_prob(q) ? Owner::Player2 : Owner::Player1, m.priority(q),
                         q < m.names.size() ? m.names[q] : std::string());
        g.tag.push_back(GadgetGame::Tag::Original);
        g.base.push_back(q);
    }
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (!m.is_prob(q)) {
            for (const Edge& e : m.out(q))
                g.game.add_edge(q, e.dst, e.weight);
            continue;
        }
        StateId left = g.game.add_state(Owner::Player1, 1, m.display_name(q) + "_L");
        g.tag.push_back(GadgetGame::Tag::Left);
        g.base.push_back(q);
        StateId right = g.game.add_state(Owner::Player2, 0, m.display_name(q) + "_R");
        g.tag.push_back(GadgetGame::Tag::Right);
        g.base.push_back(q);
        g.game.add_edge(q, left, 0);
        g.game.add_edge(q, right, 0);
        for (const Edge& e : m.out(q)) {
            g.game.add_edge(left, e.dst, e.weight);
            g.game.add_edge(right, e.dst, e.weight);
        }
    }
    g.game.finalize();
    return g;
}

/// Product of an alternating MDP with committed even priorities: state
/// (q, 2i) means player 1 has committed to visiting priority 2i infinitely
/// often and nothing smaller. Copies escape to an absorbing losing sink
/// when a smaller priority could occur; Buchi states are the (q, 2i) with
/// priority(q) = 2i.
struct CopiedMdp {
    enum class Tag : std::uint8_t { Original, Copy, Sink };

    Model mdp;
    std::vector<Tag> tag;
    std::vector<StateId> base;                // originating state for Original/Copy
    std::vector<std::uint32_t> committed;     // committed priority for Copy states
    std::vector<std::uint32_t> evens;         // committed priorities, ascending
    StateId sink = 0;
    std::uint32_t base_count = 0;

    StateId copy_node(StateId q, std::size_t even_index) const {
        return static_cast<StateId>(base_count * (1 + even_index) + q);
    }
};

inline CopiedMdp parity_to_buchi_copies(const Model& m) {
    require_valid(m, "parity_to_buchi_copies");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("parity_to_buchi_copies: expected an MDP");
    for (const Edge& e : m.edges)
        if (m.owner(e.src) == m.owner(e.dst))
            throw ModelError("parity_to_buchi_copies: model is not alternating at edge " +
                             m.display_name(e.src) + " -> " + m.display_name(e.dst));

    CopiedMdp c;
    c.base_count = static_cast<std::uint32_t>(m.num_states());
    std::uint32_t max_even = 0;
    bool has_even = false;
    for (const StateInfo& s : m.states)
        if (s.priority % 2 == 0) {
            has_even = true;
            max_even = std::max(max_even, s.priority);
        }
    if (has_even)
        for (std::uint32_t i = 0; i <= max_even; i += 2)
            c.evens.push_back(i);

    c.mdp.kind = ModelKind::Mdp;
    for (StateId q = 0; q < m.num_states(); ++q) {
        c.mdp.add_state(m.owner(q), 1, q < m.names.size() ? m.names[q] : std::string());
        c.tag.push_back(CopiedMdp::Tag::Original);
        c.base.push_back(q);
        c.committed.push_back(0);
    }
    for (std::size_t k = 0; k < c.evens.size(); ++k) {
        for (StateId q = 0; q < m.num_states(); ++q) {
            bool buchi = m.priority(q) == c.evens[k];
            c.mdp.add_state(m.owner(q), buchi ? 0 : 1,
                            m.display_name(q) + "#" + std::to_string(c.evens[k]));
            c.tag.push_back(CopiedMdp::Tag::Copy);
            c.base.push_back(q);
            c.committed.push_back(c.evens[k]);
        }
    }
    c.sink = c.mdp.add_state(Owner::Player1, 1, "sink");
    c.tag.push_back(CopiedMdp::Tag::Sink);
    c.base.push_back(c.sink);
    c.committed.push_back(0);

    for (StateId q = 0; q < m.num_states(); ++q) {
        for (const Edge& e : m.out(q))
            c.mdp.edges.push_back(e); // originals keep their edges
        if (m.owner(q) == Owner::Player1) {
            c.mdp.add_edge(q, c.sink, 0);
            for (std::size_t k = 0; k < c.evens.size(); ++k) {
                c.mdp.add_edge(c.copy_node(q, k), c.sink, 0);
                for (const Edge& e : m.out(q))
                    if (m.priority(e.dst) >= c.evens[k]) {
                        c.mdp.add_edge(q, c.copy_node(e.dst, k), e.weight);
                        c.mdp.add_edge(c.copy_node(q, k), c.copy_node(e.dst, k), e.weight);
                    }
            }
        } else {
            for (std::size_t k = 0; k < c.evens.size(); ++k) {
                bool all_high = true;
                for (const Edge& e : m.out(q))
                    if (m.priority(e.dst) < c.evens[k]) {
                        all_high = false;
                        break;
                    }
                if (all_high) {
                    for (const Edge& e : m.out(q))
                        c.mdp.add_edge(c.copy_node(q, k), c.copy_node(e.dst, k), e.weight, e.prob);
                } else {
                    c.mdp.add_edge(c.copy_node(q, k), c.sink, 0, Rat(1));
                }
            }
        }
    }
    c.mdp.add_edge(c.sink, c.sink, 0);
    c.mdp.finalize();
    return c;
}

/// Energy Buchi solve of an MDP through the gadget game. Credits are read
/// back through the provenance maps at the input states.
struct EnergyMdpSolve {
    std::int64_t cap = 0;
    std::vector<std::optional<std::int64_t>> credits; // per input state
    Rewrite norm;
    GadgetGame gadget;
    EnergyGameResult game;

    bool wins(StateId q, std::int64_t c) const { return game.node_wins(q, c); }

    /// Witness move at an input player-1 state with saturated energy c.
    StateId successor(StateId q, std::int64_t c) const {
        if (c > cap)
            c = cap;
        std::uint32_t node = static_cast<std::uint32_t>(q * (cap + 1) + c);
        std::uint32_t sn = game.choice[node];
        if (sn == kNoNode)
            throw std::logic_error("energy witness consulted at a losing node");
        StateId gs = static_cast<StateId>(sn / (cap + 1));
        return norm.resolve(gs);
    }
};

namespace detail {

inline EnergyMdpSolve solve_energy_buchi_core(const Model& m, std::int64_t cap,
                                              const std::vector<std::int64_t>* admit,
                                              const std::vector<std::uint8_t>* freewin,
                                              bool flatten_priorities) {
    EnergyMdpSolve r;
    Model adjusted;
    const Model* input = &m;
    if (flatten_priorities) {
        // reach mode: only override nodes and the gadget's energy-checking
        // branches are Buchi
        adjusted = m;
        for (auto& s : adjusted.states)
            s.priority = 1;
        adjusted.finalize();
        input = &adjusted;
    }
    r.cap = cap > 0 ? cap : default_energy_cap(m);
    r.norm = normalize_for_energy(*input);
    r.gadget = gadgetize(r.norm.model);

    UnfoldOverrides ov;
    bool use_ov = admit || freewin;
    if (use_ov) {
        const std::size_t gn = r.gadget.game.num_states();
        ov.admit_threshold.assign(gn, -1);
        ov.freewin.assign(gn, 0);
        for (StateId gs = 0; gs < gn; ++gs) {
            if (r.gadget.tag[gs] != GadgetGame::Tag::Original)
                continue;
            // map through the normalization to an input state, when the
            // node stands for exactly one
            StateId ns = r.gadget.base[gs];
            StateId orig;
            try {
                orig = r.norm.resolve(ns);
            } catch (const std::logic_error&) {
                continue; // split nodes represent no single input state
            }
            if (admit && (*admit)[orig] >= 0 && !r.norm.is_fresh(ns))
                ov.admit_threshold[gs] = (*admit)[orig];
            if (freewin && (*freewin)[orig])
                ov.freewin[gs] = 1;
        }
    }

    UnfoldedArena ua = build_unfolded_arena(r.gadget.game, r.cap, use_ov ? &ov : nullptr);
    auto sr = solve_buchi_arena(ua.arena);
    r.credits.assign(m.num_states(), std::nullopt);
    for (StateId q = 0; q < m.num_states(); ++q)
        for (std::int64_t c = 0; c <= r.cap; ++c)
            if (sr.win[ua.node_of(q, c)]) {
                r.credits[q] = c;
                break;
            }
    const std::size_t keep = static_cast<std::size_t>(r.gadget.game.num_states()) * (r.cap + 1);
    r.game.cap = r.cap;
    r.game.win.assign(sr.win.begin(), sr.win.begin() + keep);
    r.game.choice.assign(sr.choice.begin(), sr.choice.begin() + keep);
    r.game.credits.assign(r.gadget.game.num_states(), std::nullopt);
    for (StateId gs = 0; gs < r.gadget.game.num_states(); ++gs)
        for (std::int64_t c = 0; c <= r.cap; ++c)
            if (r.game.win[gs * (r.cap + 1) + c]) {
                r.game.credits[gs] = c;
                break;
            }
    return r;
}

} // namespace detail

/// Minimum initial credits of an energy Buchi MDP (priorities in {0,1}):
/// normalize, gadgetize, unfold, solve.
inline EnergyMdpSolve solve_energy_buchi_mdp(const Model& m, std::int64_t cap = 0) {
    require_valid(m, "solve_energy_buchi_mdp");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("solve_energy_buchi_mdp: expected an MDP");
    if (m.max_priority > 1)
        throw ModelError("solve_energy_buchi_mdp: priorities must be within {0,1}");
    return detail::solve_energy_buchi_core(m, cap, nullptr, nullptr, false);
}

/// Almost-sure energy reachability: priorities are ignored, a play wins by
/// reaching some state q with saturated energy at least admit[q] (admit[q]
/// < 0 means q is not a target), or any freewin state at any energy; moves
/// that would underflow into a freewin state win as well.
inline EnergyMdpSolve solve_energy_reach(const Model& m, const std::vector<std::int64_t>& admit,
                                         const std::vector<std::uint8_t>& freewin,
                                         std::int64_t cap = 0) {
    require_valid(m, "solve_energy_reach");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("solve_energy_reach: expected an MDP");
    return detail::solve_energy_buchi_core(m, cap, &admit, &freewin, true);
}

/// Executable witness for the energy parity objective: an energy-tracking
/// reach phase that switches, on arrival at a winning state with enough
/// credit, to the strategy of that state's committed copy.
class EnergyParityWitness {
public:
    struct PhaseTable {
        std::int64_t cap = -1;
        std::vector<std::uint32_t> next; // [q * (cap+1) + c] -> successor state
    };

    const Model* model = nullptr; // must outlive the witness
    PhaseTable reach;
    std::vector<PhaseTable> copies;            // one per used committed priority
    std::vector<std::uint32_t> copy_priority;  // committed even priority per phase
    std::vector<std::int64_t> cont;            // admission threshold per state, -1 = none
    std::vector<std::int32_t> chosen_phase;    // per state: index into copies, or -1
    std::vector<std::optional<std::int64_t>> credits;

    class Session : public StrategySession {
    public:
        explicit Session(const EnergyParityWitness& w) : w_(&w) {}

        void reset(StateId start) override {
            if (!w_->credits[start])
                throw std::logic_error("witness started at a losing state");
            enter(start, *w_->credits[start]);
        }

        Dist choose(StateId q) override {
            const auto& tab = phase_ < 0 ? w_->reach : w_->copies[phase_];
            std::uint32_t nxt = tab.next[static_cast<std::size_t>(q) * (tab.cap + 1) + credit_];
            if (nxt == kNoNode)
                throw std::logic_error("witness consulted outside its winning region");
            return Dist::point(nxt);
        }

        void observe(StateId from, StateId to) override {
            auto e = w_->model->find_edge(from, to);
            if (!e)
                throw std::logic_error("witness observed a non-edge");
            std::int64_t w = w_->model->edges[*e].weight;
            const std::int64_t cap = phase_ < 0 ? w_->reach.cap : w_->copies[phase_].cap;
            std::int64_t c = std::max<std::int64_t>(0, std::min(cap, credit_ + w));
            if (phase_ < 0)
                enter(to, c);
            else
                credit_ = c;
        }

        std::int32_t phase() const { return phase_; }
        std::int64_t credit() const { return credit_; }

    private:
        void enter(StateId q, std::int64_t c) {
            if (w_->cont[q] >= 0 && c >= w_->cont[q]) {
                phase_ = w_->chosen_phase[q];
                credit_ = std::min(c, w_->copies[phase_].cap);
            } else {
                phase_ = -1;
                credit_ = std::min(c, w_->reach.cap);
            }
        }

        const EnergyParityWitness* w_;
        std::int32_t phase_ = -1;
        std::int64_t credit_ = 0;
    };

    Session session() const { return Session(*this); }

    /// Distinct reachable (phase, memory) pairs over plays started at every
    /// winning state with its minimal credit. This is the strategy's |Mem|
    /// after dropping unreachable rows.
    std::uint32_t reachable_memory_size() const {
        const Model& m = *model;
        std::set<std::pair<std::int32_t, std::int64_t>> mems;
        std::set<std::tuple<std::int32_t, std::int64_t, StateId>> seen;
        std::vector<std::tuple<std::int32_t, std::int64_t, StateId>> work;
        auto push = [&](StateId q, std::int32_t ph, std::int64_t c) {
            if (seen.insert({ph, c, q}).second) {
                work.push_back({ph, c, q});
                mems.insert({ph, c});
            }
        };
        auto entry = [&](StateId q, std::int64_t c) {
            if (cont[q] >= 0 && c >= cont[q]) {
                std::int32_t ph = chosen_phase[q];
                push(q, ph, std::min(c, copies[ph].cap));
            } else {
                push(q, -1, std::min(c, reach.cap));
            }
        };
        for (StateId q = 0; q < m.num_states(); ++q)
            if (credits[q])
                entry(q, *credits[q]);
        while (!work.empty()) {
            auto [ph, c, q] = work.back();
            work.pop_back();
            auto step = [&](StateId to) {
                auto e = m.find_edge(q, to);
                std::int64_t w = m.edges[*e].weight;
                const std::int64_t cap = ph < 0 ? reach.cap : copies[ph].cap;
                std::int64_t c2 = std::max<std::int64_t>(0, std::min(cap, c + w));
                if (ph < 0)
                    entry(to, c2);
                else
                    push(to, ph, c2);
            };
            if (m.owner(q) == Owner::Player1) {
                const auto& tab = ph < 0 ? reach : copies[ph];
                std::uint32_t nxt = tab.next[static_cast<std::size_t>(q) * (tab.cap + 1) + c];
                if (nxt == kNoNode)
                    throw std::logic_error("witness table has a hole in its winning region");
                step(nxt);
            } else {
                for (const Edge& e : m.out(q))
                    step(e.dst);
            }
        }
        return static_cast<std::uint32_t>(mems.size());
    }
};

/// Answer of the energy parity pipeline: the almost-sure winning set Z, the
/// minimum initial credits on Z, the committed copy per winning-core state,
/// and an executable witness.
struct EnergyParityResult {
    std::vector<StateId> winning; // Z, sorted
    std::vector<bool> winning_mask;
    std::vector<std::optional<std::int64_t>> credits;
    std::vector<std::optional<std::uint32_t>> committed; // chosen even priority on Win
    std::uint32_t memory_size = 0;
    std::uint64_t memory_bound = 0; // 2 (|Z|+1) W
    bool routes_verified = false;
    std::shared_ptr<EnergyParityWitness> witness;
};

struct EnergyParityOptions {
    // run the one-shot solve over the whole copied MDP and assert that it
    // matches the two-phase answer; automatic guard by default
    enum class RouteCheck { Auto, Always, Never } route_check = RouteCheck::Auto;
    std::uint64_t route_check_budget = 2'000'000; // copied states x cap
    bool build_witness = true;
};

inline EnergyParityResult solve_energy_parity(const Model& m,
                                              const EnergyParityOptions& opt = {}) {
    require_valid(m, "solve_energy_parity");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("solve_energy_parity: expected an MDP");
    const std::size_t n = m.num_states();
    const std::int64_t W = m.max_weight;

    EnergyParityResult res;
    res.winning_mask.assign(n, false);
    res.credits.assign(n, std::nullopt);
    res.committed.assign(n, std::nullopt);
    res.memory_bound = 2 * (0 + 1) * static_cast<std::uint64_t>(W);

    Rewrite alt = make_alternating(m);
    CopiedMdp copied = parity_to_buchi_copies(alt.model);

    bool run_route_a = opt.route_check == EnergyParityOptions::RouteCheck::Always;
    if (opt.route_check == EnergyParityOptions::RouteCheck::Auto) {
        std::uint64_t cap_a = static_cast<std::uint64_t>(default_energy_cap(copied.mdp));
        run_route_a = copied.mdp.num_states() * cap_a <= opt.route_check_budget;
    }
    // one-shot solve over the whole copied MDP, asserted equal
    auto verify_routes = [&]() {
        if (!run_route_a)
            return false;
        EnergyMdpSolve one_shot = solve_energy_buchi_mdp(copied.mdp);
        for (StateId q = 0; q < n; ++q)
            if (one_shot.credits[q] != res.credits[q])
                throw std::logic_error(
                    "energy parity route mismatch at state " + m.display_name(q) + ": one-shot " +
                    (one_shot.credits[q] ? std::to_string(*one_shot.credits[q]) : "unwinnable") +
                    " vs two-phase " +
                    (res.credits[q] ? std::to_string(*res.credits[q]) : "unwinnable"));
        return true;
    };

    if (copied.evens.empty()) {
        // no even priority anywhere: every state is losing
        res.routes_verified = verify_routes();
        return res;
    }

    // per-copy energy Buchi solves
    std::vector<Restriction> subs;
    std::vector<EnergyMdpSolve> copy_solve;
    for (std::size_t k = 0; k < copied.evens.size(); ++k) {
        std::vector<StateId> states;
        for (StateId q = 0; q < alt.model.num_states(); ++q)
            states.push_back(copied.copy_node(q, k));
        states.push_back(copied.sink);
        subs.push_back(restrict_to(copied.mdp, states));
        copy_solve.push_back(solve_energy_buchi_mdp(subs.back().model));
    }

    // project onto the input states: continuation credit and committed copy
    std::vector<std::int64_t> cont(n, -1);
    std::vector<std::int32_t> chosen(n, -1);
    for (StateId q = 0; q < n; ++q) {
        for (std::size_t k = 0; k < copied.evens.size(); ++k) {
            StateId su = subs[k].to_sub[copied.copy_node(q, k)];
            auto cr = copy_solve[k].credits[su];
            if (cr && (cont[q] < 0 || *cr < cont[q])) {
                cont[q] = *cr;
                chosen[q] = static_cast<std::int32_t>(k);
            }
        }
    }
    bool any_win = false;
    std::int64_t max_cont = 0;
    for (StateId q = 0; q < n; ++q)
        if (cont[q] >= 0) {
            any_win = true;
            max_cont = std::max(max_cont, cont[q]);
        }
    if (!any_win) {
        res.routes_verified = verify_routes();
        return res;
    }

    std::int64_t reach_cap =
        max_cont + std::max<std::int64_t>(1, 2 * static_cast<std::int64_t>(n) *
                                                 std::max<std::int64_t>(W, 1));
    EnergyMdpSolve reach = solve_energy_reach(m, cont, std::vector<std::uint8_t>(n, 0), reach_cap);

    for (StateId q = 0; q < n; ++q) {
        res.credits[q] = reach.credits[q];
        if (reach.credits[q]) {
            res.winning_mask[q] = true;
            res.winning.push_back(q);
        }
        if (cont[q] >= 0)
            res.committed[q] = copied.evens[chosen[q]];
    }
    res.memory_bound = 2 * (res.winning.size() + 1) * static_cast<std::uint64_t>(W);
    res.routes_verified = verify_routes();

    if (!opt.build_witness)
        return res;

    // assemble the witness: reach table plus one table per used copy, each
    // re-solved at the tightest cap that still reproduces its credits so
    // the combined memory respects the 2 (|Z|+1) W accounting
    auto w = std::make_shared<EnergyParityWitness>();
    w->model = &m;
    w->cont.assign(cont.begin(), cont.end());
    w->credits = res.credits;
    w->chosen_phase.assign(n, -1);

    const std::int64_t weight_unit = std::max<std::int64_t>(W, 1);
    std::vector<std::int32_t> phase_of_copy(copied.evens.size(), -1);
    for (std::size_t k = 0; k < copied.evens.size(); ++k) {
        std::vector<StateId> assigned;
        std::int64_t need = 0;
        for (StateId q = 0; q < n; ++q)
            if (chosen[q] == static_cast<std::int32_t>(k)) {
                assigned.push_back(q);
                need = std::max(need, cont[q]);
            }
        if (assigned.empty())
            continue;
        std::int64_t cap_k =
            std::max<std::int64_t>({1, 2 * static_cast<std::int64_t>(assigned.size()) * weight_unit - 1, need});
        EnergyMdpSolve tight = solve_energy_buchi_mdp(subs[k].model, cap_k);
        for (int rounds = 0; rounds < 4; ++rounds) {
            bool ok = true;
            for (StateId q : assigned) {
                StateId su = subs[k].to_sub[copied.copy_node(q, k)];
                ok = ok && tight.credits[su] == std::optional<std::int64_t>(cont[q]);
            }
            if (ok)
                break;
            cap_k *= 2;
            tight = solve_energy_buchi_mdp(subs[k].model, cap_k);
        }

        phase_of_copy[k] = static_cast<std::int32_t>(w->copies.size());
        w->copy_priority.push_back(copied.evens[k]);
        w->copies.emplace_back();
        EnergyParityWitness::PhaseTable& tab = w->copies.back();
        tab.cap = tight.cap;
        tab.next.assign(n * (tab.cap + 1), kNoNode);
        for (StateId v = 0; v < n; ++v) {
            if (m.owner(v) != Owner::Player1)
                continue;
            StateId su = subs[k].to_sub[copied.copy_node(v, k)];
            for (std::int64_t c = 0; c <= tab.cap; ++c) {
                if (!tight.wins(su, c))
                    continue;
                StateId sv = tight.successor(su, c);
                StateId cv = subs[k].to_orig[sv];
                if (copied.tag[cv] != CopiedMdp::Tag::Copy)
                    throw std::logic_error("copy witness moved into the sink");
                tab.next[static_cast<std::size_t>(v) * (tab.cap + 1) + c] =
                    alt.resolve(copied.base[cv]);
            }
        }
        for (StateId q : assigned)
            w->chosen_phase[q] = phase_of_copy[k];
    }

    std::size_t outside = 0;
    std::int64_t need_r = 0;
    for (StateId q = 0; q < n; ++q) {
        if (res.credits[q])
            need_r = std::max(need_r, *res.credits[q]);
        if (res.winning_mask[q] && cont[q] < 0)
            ++outside;
        if (cont[q] >= 0)
            need_r = std::max(need_r, cont[q]);
    }
    std::int64_t cap_r = std::max<std::int64_t>(
        {1, 2 * static_cast<std::int64_t>(outside + 1) * weight_unit - 1, need_r});
    EnergyMdpSolve tight_reach =
        solve_energy_reach(m, cont, std::vector<std::uint8_t>(n, 0), cap_r);
    for (int rounds = 0; rounds < 4; ++rounds) {
        bool ok = true;
        for (StateId q = 0; q < n; ++q)
            if (res.winning_mask[q])
                ok = ok && tight_reach.credits[q] == res.credits[q];
        if (ok)
            break;
        cap_r *= 2;
        tight_reach = solve_energy_reach(m, cont, std::vector<std::uint8_t>(n, 0), cap_r);
    }

    w->reach.cap = tight_reach.cap;
    w->reach.next.assign(n * (tight_reach.cap + 1), kNoNode);
    for (StateId q = 0; q < n; ++q) {
        if (m.owner(q) != Owner::Player1)
            continue;
        for (std::int64_t c = 0; c <= tight_reach.cap; ++c) {
            if (cont[q] >= 0 && c >= cont[q])
                continue; // the session switches phase before consulting
            if (!tight_reach.wins(q, c))
                continue;
            w->reach.next[static_cast<std::size_t>(q) * (tight_reach.cap + 1) + c] =
                tight_reach.successor(q, c);
        }
    }

    res.witness = w;
    res.memory_size = res.winning.empty() ? 0 : w->reachable_memory_size();
    return res;
}

} // namespace qparity
