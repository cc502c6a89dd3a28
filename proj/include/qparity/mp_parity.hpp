#pragma once

#include "qparity/decomposition.hpp"
#include "qparity/energy_parity.hpp"
#include "qparity/meanpayoff.hpp"

#include <functional>

namespace qparity {

/// Trace of the iterated winning-end-component computation: per committed
/// even priority 2i, the candidate components of the surviving sub-MDP
/// restricted to priorities >= 2i, the ones whose optimal gain qualifies,
/// their union, the removed random attractor, and the remaining sub-MDP.
struct WinningEcReport {
    struct Iteration {
        std::uint32_t committed = 0;
        std::vector<std::vector<StateId>> candidates;
        std::vector<std::vector<StateId>> qualified;
        std::vector<Rat> qualified_gain;
        std::vector<StateId> win;
        std::vector<StateId> attractor;
        std::vector<StateId> remaining;
    };
    std::vector<Iteration> iterations;
    std::vector<StateId> win;
    std::vector<bool> win_mask;
};

namespace detail {

/// Shared skeleton: iterate committed even priorities from 0 upward; at
/// each round decompose the surviving sub-MDP restricted to states of
/// priority >= 2i, keep components that touch priority 2i and satisfy the
/// qualifier, and peel off their random attractor.
inline WinningEcReport iterate_winning_ecs(
    const Model& m,
    const std::function<std::optional<Rat>(const std::vector<StateId>&)>& qualify) {
    require_valid(m, "winning_end_components");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("winning_end_components: expected an MDP");
    const std::size_t n = m.num_states();
    WinningEcReport rep;
    rep.win_mask.assign(n, false);
    std::vector<bool> alive(n, true);
    for (std::uint32_t two_i = 0; two_i <= m.max_priority; two_i += 2) {
        WinningEcReport::Iteration it;
        it.committed = two_i;
        std::vector<bool> subset(n, false);
        for (StateId q = 0; q < n; ++q)
            subset[q] = alive[q] && m.priority(q) >= two_i;
        std::vector<bool> win_here(n, false);
        for (auto& comp : mecs_within(m, subset)) {
            bool touches = false;
            for (StateId q : comp)
                touches = touches || m.priority(q) == two_i;
            if (!touches)
                continue;
            it.candidates.push_back(comp);
            auto gain = qualify(comp);
            if (gain) {
                it.qualified.push_back(comp);
                it.qualified_gain.push_back(*gain);
                for (StateId q : comp) {
                    win_here[q] = true;
                    rep.win_mask[q] = true;
                }
            }
        }
        it.win = ids_of(win_here);
        auto attr = random_attractor_mask(m, win_here, &alive);
        for (StateId q = 0; q < n; ++q)
            if (attr[q] && alive[q]) {
                it.attractor.push_back(q);
                alive[q] = false;
            }
        it.remaining = ids_of(alive);
        rep.iterations.push_back(std::move(it));
    }
    rep.win = ids_of(rep.win_mask);
    return rep;
}

} // namespace detail

/// Winning end components for the mean-payoff parity conjunction: least
/// priority even (by construction of the iteration) and optimal gain
/// meeting the threshold.
inline WinningEcReport winning_end_components(const Model& m, const Rat& nu, bool strict) {
    return detail::iterate_winning_ecs(
        m, [&](const std::vector<StateId>& comp) -> std::optional<Rat> {
            MecValue v = mec_value(m, make_end_component(m, comp));
            if (!certify_gain(m, make_end_component(m, comp), v))
                throw std::logic_error("winning_end_components: gain certificate failed");
            bool ok = strict ? v.gain > nu : v.gain >= nu;
            return ok ? std::optional<Rat>(v.gain) : std::nullopt;
        });
}

/// Union of end components winning the parity objective alone.
inline WinningEcReport winning_parity_ecs(const Model& m) {
    return detail::iterate_winning_ecs(
        m, [](const std::vector<StateId>&) { return std::optional<Rat>(Rat(0)); });
}

struct MpParityResult {
    WinningEcReport report;
    std::vector<StateId> almost_sure;
    std::vector<bool> almost_sure_mask;
    std::map<StateId, StateId> reach_witness;
    std::optional<std::vector<Rat>> values; // sup Pr(Parity and MeanPayoff)
};

/// Almost-sure winning set of the mean-payoff parity objective: the
/// winning end components, then almost-sure reachability to their union.
/// With with_values, the per-state optimal satisfaction probability is the
/// exact reachability value of that union.
inline MpParityResult solve_mp_parity(const Model& m, const Rat& nu, bool strict,
                                      bool with_values = false) {
    MpParityResult r;
    r.report = winning_end_components(m, nu, strict);
    auto reach = almost_sure_reach(m, r.report.win);
    r.almost_sure = std::move(reach.almost_sure);
    r.almost_sure_mask = std::move(reach.almost_sure_mask);
    r.reach_witness = std::move(reach.witness);
    if (with_values)
        r.values = reach_value(m, r.report.win);
    return r;
}

/// Round-based strategy for a qualifying end component: seek the least
/// priority with a memoryless almost-sure-reach strategy, then play the
/// optimal gain strategy for max(i^3, i * k_i * W) steps, round after
/// round. Infinite memory lives in the round counter.
class RoundStrategy : public StrategySession {
public:
    enum class Stage { SeekPriority, PlayGain };

    RoundStrategy(const Model& m, const EndComponent& ec, const Rat& nu, bool strict = false)
        : model_(&m) {
        if (!is_end_component(m, ec.states))
            throw ModelError("round_strategy: set is not an end component");
        min_priority_ = m.priority(ec.states[0]);
        for (StateId q : ec.states)
            min_priority_ = std::min(min_priority_, m.priority(q));
        if (min_priority_ % 2 != 0)
            throw ModelError("round_strategy: least priority of the component is odd");
        MecValue v = mec_value(m, ec);
        if (strict ? !(v.gain > nu) : !(v.gain >= nu))
            throw ModelError("round_strategy: optimal gain misses the threshold");
        gain_ = v.gain;
        sigma_m_ = std::move(v.strategy);
        weight_bound_ = std::max<std::int64_t>(1, m.max_weight);

        Restriction sub = restrict_to(m, ec.states);
        std::vector<StateId> targets;
        for (StateId q : ec.states)
            if (m.priority(q) == min_priority_)
                targets.push_back(sub.to_sub[q]);
        auto reach = almost_sure_reach(sub.model, targets);
        if (reach.almost_sure.size() != ec.states.size())
            throw std::logic_error("round_strategy: component misses its own least priority");
        for (auto& [q, dst] : reach.witness)
            sigma_q_[sub.to_orig[q]] = sub.to_orig[dst];
    }

    void reset(StateId start) override {
        round_ = 1;
        stage_ = Stage::SeekPriority;
        steps_ = 0;
        k_ = 0;
        ell_ = 0;
        arrived(start);
    }

    Dist choose(StateId q) override {
        if (stage_ == Stage::PlayGain) {
            auto it = sigma_m_.find(q);
            if (it == sigma_m_.end())
                throw std::logic_error("round_strategy: gain strategy undefined at state");
            return Dist::point(it->second);
        }
        auto it = sigma_q_.find(q);
        if (it != sigma_q_.end())
            return Dist::point(it->second);
        // at a least-priority state the stage flips on arrival; fall back
        // to the gain strategy's move
        return Dist::point(sigma_m_.at(q));
    }

    void observe(StateId, StateId to) override {
        ++steps_;
        arrived(to);
    }

    std::uint64_t round() const { return round_; }
    Stage stage() const { return stage_; }
    std::uint64_t k() const { return k_; }
    std::uint64_t ell() const { return ell_; }
    Rat epsilon() const { return Rat(1, static_cast<std::int64_t>(round_)); }
    const Rat& gain() const { return gain_; }
    const std::map<StateId, StateId>& sigma_q() const { return sigma_q_; }
    const std::map<StateId, StateId>& sigma_m() const { return sigma_m_; }

private:
    void arrived(StateId q) {
        if (stage_ == Stage::SeekPriority) {
            if (model_->priority(q) == min_priority_) {
                k_ = steps_;
                std::uint64_t floor = round_ * round_ * round_;
                ell_ = std::max<std::uint64_t>(floor, round_ * k_ * weight_bound_);
                stage_ = Stage::PlayGain;
                steps_ = 0;
            }
        } else if (steps_ >= ell_) {
            ++round_;
            stage_ = Stage::SeekPriority;
            steps_ = 0;
            arrived(q); // a least-priority state starts the next round at k = 0
        }
    }

    const Model* model_;
    std::uint32_t min_priority_ = 0;
    Rat gain_;
    std::int64_t weight_bound_ = 1;
    std::map<StateId, StateId> sigma_q_;
    std::map<StateId, StateId> sigma_m_;

    std::uint64_t round_ = 1;
    Stage stage_ = Stage::SeekPriority;
    std::uint64_t steps_ = 0;
    std::uint64_t k_ = 0;
    std::uint64_t ell_ = 0;
};

struct DisjunctionMpResult {
    std::vector<StateId> win_union;
    std::vector<StateId> almost_sure;
    std::vector<bool> almost_sure_mask;
};

/// Disjunction of mean payoff and parity: an end component wins when the
/// parity objective alone can be ensured almost surely or the optimal gain
/// meets the threshold, then almost-sure reachability to the union. Pure
/// memoryless witnesses exist.
inline DisjunctionMpResult solve_disjunction_mp_parity(const Model& m, const Rat& nu,
                                                       bool strict) {
    auto parity = winning_parity_ecs(m);
    std::vector<bool> win = parity.win_mask;
    for (const auto& comp : mec_decompose(m).components) {
        MecValue v = mec_value(m, comp);
        if (strict ? v.gain > nu : v.gain >= nu)
            for (StateId q : comp.states)
                win[q] = true;
    }
    DisjunctionMpResult r;
    r.win_union = ids_of(win);
    auto reach = almost_sure_reach(m, r.win_union);
    r.almost_sure = std::move(reach.almost_sure);
    r.almost_sure_mask = std::move(reach.almost_sure_mask);
    return r;
}

struct DisjunctionEnergyResult {
    std::vector<StateId> winning;
    std::vector<bool> winning_mask;
    // minimum credit per winning state; 0 on the parity route
    std::vector<std::optional<std::int64_t>> credits;
};

/// Disjunction of energy and parity: W1 collects the end components that
/// win parity almost surely, W2 the states of remaining components that win
/// the energy objective when the probabilistic states turn adversarial.
/// The answer combines almost-sure reachability to W1 with almost-sure
/// energy reachability to W2; underflows into the W1-attracted region win
/// through the parity route.
inline DisjunctionEnergyResult solve_disjunction_energy_parity(const Model& m) {
    require_valid(m, "solve_disjunction_energy_parity");
    if (m.kind != ModelKind::Mdp)
        throw ModelError("solve_disjunction_energy_parity: expected an MDP");
    const std::size_t n = m.num_states();
    DisjunctionEnergyResult r;
    r.winning_mask.assign(n, false);
    r.credits.assign(n, std::nullopt);

    auto parity = winning_parity_ecs(m);
    auto sure = almost_sure_reach(m, parity.win);
    std::vector<std::uint8_t> freewin(n, 0);
    bool any_free = false;
    for (StateId q = 0; q < n; ++q)
        if (sure.almost_sure_mask[q]) {
            freewin[q] = 1;
            any_free = true;
        }

    std::vector<std::int64_t> admit(n, -1);
    std::int64_t max_admit = 0;
    bool any_admit = false;
    for (const auto& comp : mec_decompose(m).components) {
        Restriction sub = restrict_to(m, comp.states);
        Model game(ModelKind::Game);
        for (StateId q = 0; q < sub.model.num_states(); ++q)
            game.add_state(sub.model.is_prob(q) ? Owner::Player2 : Owner::Player1, 0);
        for (const Edge& e : sub.model.edges)
            game.add_edge(e.src, e.dst, e.weight);
        game.finalize();
        auto eg = solve_energy_buchi_game(game);
        for (StateId q = 0; q < sub.model.num_states(); ++q) {
            StateId orig = sub.to_orig[q];
            if (eg.credits[q] && !freewin[orig]) {
                admit[orig] = *eg.credits[q];
                max_admit = std::max(max_admit, admit[orig]);
                any_admit = true;
            }
        }
    }

    if (!any_free && !any_admit)
        return r;

    std::int64_t cap = max_admit + std::max<std::int64_t>(
                                       1, 2 * static_cast<std::int64_t>(n) *
                                              std::max<std::int64_t>(m.max_weight, 1));
    EnergyMdpSolve reach = solve_energy_reach(m, admit, freewin, cap);
    for (StateId q = 0; q < n; ++q)
        if (reach.credits[q]) {
            r.winning_mask[q] = true;
            r.winning.push_back(q);
            r.credits[q] = reach.credits[q];
        }
    return r;
}

} // namespace qparity
