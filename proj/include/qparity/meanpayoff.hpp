#pragma once

#include "qparity/decomposition.hpp"
#include "qparity/strategy.hpp"

#include <map>

namespace qparity {

/// Expected mean-payoff value of an end component: the constant optimal
/// gain, a pure memoryless optimal strategy, and a bias vector certifying
/// optimality through the average-reward optimality equations.
struct MecValue {
    Rat gain;
    std::map<StateId, StateId> strategy; // player-1 member -> internal choice
    std::map<StateId, Rat> bias;
};

/// The memoryless strategy that plays, in every player-1 state of the
/// component, all internal edges uniformly at random. |Mem| = 1.
inline FiniteMemoryStrategy uniform_strategy(const Model& m, const EndComponent& ec) {
    if (!is_end_component(m, ec.states))
        throw ModelError("uniform_strategy: set is not an end component");
    std::map<StateId, Dist> choices;
    for (const auto& [q, inside] : ec.retained)
        choices[q] = Dist::uniform(inside);
    return make_memoryless(std::move(choices));
}

namespace detail {

struct ChainEval {
    std::vector<Rat> gain;
    std::vector<Rat> bias;
};

/// Exact gain/bias of the Markov chain induced by a pure memoryless policy
/// on a sub-model. choice[q] is the successor of each player-1 state.
inline ChainEval evaluate_policy(const Model& sub, const std::vector<StateId>& choice) {
    const std::size_t n = sub.num_states();
    // chain transition rows and expected one-step reward
    std::vector<std::vector<std::pair<StateId, Rat>>> row(n);
    std::vector<Rat> reward(n, Rat(0));
    for (StateId q = 0; q < n; ++q) {
        if (sub.owner(q) == Owner::Player1) {
            auto e = sub.find_edge(q, choice[q]);
            if (!e)
                throw std::logic_error("evaluate_policy: choice is not an edge");
            row[q].push_back({choice[q], Rat(1)});
            reward[q] = Rat(sub.edges[*e].weight);
        } else {
            for (const Edge& e : sub.out(q)) {
                row[q].push_back({e.dst, e.prob});
                reward[q] += e.prob * Rat(e.weight);
            }
        }
    }

    // recurrent classes: bottom SCCs of the chain digraph
    Model chain(ModelKind::Mdp);
    for (StateId q = 0; q < n; ++q)
        chain.add_state(Owner::Player1, 0);
    for (StateId q = 0; q < n; ++q)
        for (auto& [dst, p] : row[q])
            chain.add_edge(q, dst, 0);
    chain.finalize();
    auto sccs = sccs_within(chain, std::vector<bool>(n, true));
    std::vector<std::int32_t> comp(n, -1);
    for (std::size_t c = 0; c < sccs.size(); ++c)
        for (StateId q : sccs[c])
            comp[q] = static_cast<std::int32_t>(c);
    std::vector<bool> bottom(sccs.size(), true);
    for (StateId q = 0; q < n; ++q)
        for (auto& [dst, p] : row[q])
            if (comp[dst] != comp[q])
                bottom[comp[q]] = false;

    ChainEval ev;
    ev.gain.assign(n, Rat(0));
    ev.bias.assign(n, Rat(0));
    std::vector<bool> recurrent(n, false);

    for (std::size_t c = 0; c < sccs.size(); ++c) {
        if (!bottom[c])
            continue;
        const auto& cls = sccs[c];
        const std::size_t k = cls.size();
        std::vector<std::int32_t> pos(n, -1);
        for (std::size_t i = 0; i < k; ++i)
            pos[cls[i]] = static_cast<std::int32_t>(i);
        // stationary distribution: pi P = pi, sum pi = 1
        std::vector<std::vector<Rat>> a(k, std::vector<Rat>(k, Rat(0)));
        std::vector<Rat> b(k, Rat(0));
        for (std::size_t j = 0; j + 1 < k; ++j) {
            a[j][j] = Rat(-1);
            for (std::size_t i = 0; i < k; ++i)
                for (auto& [dst, p] : row[cls[i]])
                    if (dst == cls[j])
                        a[j][i] += p;
        }
        for (std::size_t i = 0; i < k; ++i)
            a[k - 1][i] = Rat(1);
        b[k - 1] = Rat(1);
        auto pi = solve_linear(std::move(a), std::move(b));
        if (!pi)
            throw std::logic_error("evaluate_policy: singular stationary system");
        Rat g(0);
        for (std::size_t i = 0; i < k; ++i)
            g += (*pi)[i] * reward[cls[i]];
        for (StateId q : cls) {
            ev.gain[q] = g;
            recurrent[q] = true;
        }
        // bias on the class: h = r - g + P h, pinned at the smallest member
        std::vector<std::vector<Rat>> ah(k, std::vector<Rat>(k, Rat(0)));
        std::vector<Rat> bh(k, Rat(0));
        for (std::size_t i = 0; i < k; ++i) {
            if (i == 0) {
                ah[0][0] = Rat(1); // h(cls[0]) = 0
                continue;
            }
            ah[i][i] = Rat(1);
            StateId q = cls[i];
            for (auto& [dst, p] : row[q])
                ah[i][pos[dst]] -= p;
            bh[i] = reward[q] - g;
        }
        auto h = solve_linear(std::move(ah), std::move(bh));
        if (!h)
            throw std::logic_error("evaluate_policy: singular bias system");
        for (std::size_t i = 0; i < k; ++i)
            ev.bias[cls[i]] = (*h)[i];
    }

    // transient part: g = P g, then h = r - g + P h
    std::vector<std::uint32_t> trans;
    std::vector<std::int32_t> slot(n, -1);
    for (StateId q = 0; q < n; ++q)
        if (!recurrent[q]) {
            slot[q] = static_cast<std::int32_t>(trans.size());
            trans.push_back(q);
        }
    if (!trans.empty()) {
        const std::size_t k = trans.size();
        std::vector<std::vector<Rat>> a(k, std::vector<Rat>(k, Rat(0)));
        std::vector<Rat> bg(k, Rat(0));
        for (std::size_t i = 0; i < k; ++i) {
            a[i][i] = Rat(1);
            for (auto& [dst, p] : row[trans[i]]) {
                if (slot[dst] >= 0)
                    a[i][slot[dst]] -= p;
                else
                    bg[i] += p * ev.gain[dst];
            }
        }
        auto acopy = a;
        auto g = solve_linear(std::move(acopy), std::move(bg));
        if (!g)
            throw std::logic_error("evaluate_policy: singular transient gain system");
        for (std::size_t i = 0; i < k; ++i)
            ev.gain[trans[i]] = (*g)[i];
        std::vector<Rat> bh(k, Rat(0));
        for (std::size_t i = 0; i < k; ++i) {
            StateId q = trans[i];
            bh[i] = reward[q] - ev.gain[q];
            for (auto& [dst, p] : row[q])
                if (slot[dst] < 0)
                    bh[i] += p * ev.bias[dst];
        }
        auto h = solve_linear(std::move(a), std::move(bh));
        if (!h)
            throw std::logic_error("evaluate_policy: singular transient bias system");
        for (std::size_t i = 0; i < k; ++i)
            ev.bias[trans[i]] = (*h)[i];
    }
    return ev;
}

} // namespace detail

/// Optimal expected mean payoff of an end component: policy iteration with
/// gain-then-bias improvement, exact rational solves, deterministic
/// tie-breaking by state index.
inline MecValue mec_value(const Model& m, const EndComponent& ec) {
    if (!is_end_component(m, ec.states))
        throw ModelError("mec_value: set is not an end component");
    Restriction sub = restrict_to(m, ec.states);
    const std::size_t n = sub.model.num_states();

    std::vector<StateId> choice(n, 0);
    for (StateId q = 0; q < n; ++q)
        if (sub.model.owner(q) == Owner::Player1)
            choice[q] = sub.model.out(q).front().dst;

    detail::ChainEval ev;
    const std::size_t iteration_cap = 1000 * (n + 1);
    std::size_t iterations = 0;
    for (;;) {
        if (++iterations > iteration_cap)
            throw std::logic_error("mec_value: policy iteration did not converge");
        ev = detail::evaluate_policy(sub.model, choice);
        bool improved = false;
        // gain stage
        for (StateId q = 0; q < n; ++q) {
            if (sub.model.owner(q) != Owner::Player1)
                continue;
            StateId best = choice[q];
            Rat best_g = ev.gain[best];
            for (const Edge& e : sub.model.out(q))
                if (ev.gain[e.dst] > best_g) {
                    best_g = ev.gain[e.dst];
                    best = e.dst;
                }
            if (best != choice[q] && best_g > ev.gain[choice[q]]) {
                choice[q] = best;
                improved = true;
            }
        }
        if (improved)
            continue;
        // bias stage, restricted to gain-maximizing successors
        for (StateId q = 0; q < n; ++q) {
            if (sub.model.owner(q) != Owner::Player1)
                continue;
            StateId best = choice[q];
            Rat best_v = ev.bias[q]; // value of the current choice by evaluation
            for (const Edge& e : sub.model.out(q)) {
                if (ev.gain[e.dst] != ev.gain[q])
                    continue;
                Rat v = Rat(e.weight) - ev.gain[q] + ev.bias[e.dst];
                if (v > best_v) {
                    best_v = v;
                    best = e.dst;
                }
            }
            if (best != choice[q]) {
                choice[q] = best;
                improved = true;
            }
        }
        if (!improved)
            break;
    }

    for (StateId q = 1; q < n; ++q)
        if (ev.gain[q] != ev.gain[0])
            throw std::logic_error("mec_value: gain not constant on an end component");

    MecValue v;
    v.gain = ev.gain[0];
    for (StateId q = 0; q < n; ++q) {
        v.bias[sub.to_orig[q]] = ev.bias[q];
        if (sub.model.owner(q) == Owner::Player1)
            v.strategy[sub.to_orig[q]] = sub.to_orig[choice[q]];
    }
    return v;
}

/// Checks the optimality-equation residuals of a MecValue: at player-1
/// members gain + bias dominates every internal one-step lookahead with
/// equality under the strategy, at probabilistic members the averaged
/// equation holds exactly.
inline bool certify_gain(const Model& m, const EndComponent& ec, const MecValue& v) {
    auto member = mask_of(m.num_states(), ec.states);
    for (StateId q : ec.states) {
        auto hq = v.bias.find(q);
        if (hq == v.bias.end())
            return false;
        if (m.owner(q) == Owner::Player1) {
            auto pick = v.strategy.find(q);
            if (pick == v.strategy.end() || !member[pick->second])
                return false;
            bool choice_tight = false;
            for (const Edge& e : m.out(q)) {
                if (!member[e.dst])
                    continue;
                auto hd = v.bias.find(e.dst);
                if (hd == v.bias.end())
                    return false;
                Rat lookahead = Rat(e.weight) + hd->second;
                if (v.gain + hq->second < lookahead)
                    return false;
                if (e.dst == pick->second) {
                    if (v.gain + hq->second != lookahead)
                        return false;
                    choice_tight = true;
                }
            }
            if (!choice_tight)
                return false;
        } else {
            Rat acc(0);
            for (const Edge& e : m.out(q)) {
                auto hd = v.bias.find(e.dst);
                if (hd == v.bias.end())
                    return false;
                acc += e.prob * (Rat(e.weight) + hd->second);
            }
            if (v.gain + hq->second != acc)
                return false;
        }
    }
    return true;
}

} // namespace qparity
