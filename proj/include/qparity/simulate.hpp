#pragma once

#include "qparity/model.hpp"
#include "qparity/strategy.hpp"

#include <map>

namespace qparity {

/// Counter-based generator: the i-th draw is a pure function of (seed, i),
/// so runs are reproducible and parallelizable by seed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : base_(mix(seed ^ 0x8e4c'61a2'33f1'9d07ull)) {}

    std::uint64_t next() { return mix(base_ + 0xa076'1d64'78bd'642full * ++counter_); }

    /// uniform draw in [0, bound)
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e37'79b9'7f4a'7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58'476d'1ce4'e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d0'49bb'1331'11ebull;
        return x ^ (x >> 31);
    }
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

namespace detail {

/// Exact inverse-CDF pick: smallest k with u < cum_k for u = r / 2^64.
/// u < a/b  iff  r * b < a * 2^64, compared in 128-bit or exact integers.
inline bool u64_below(std::uint64_t r, const Rat& threshold) {
    const BigInt& num = numerator(threshold);
    const BigInt& den = denominator(threshold);
    if (num >= den)
        return true; // threshold >= 1
    if (den <= std::numeric_limits<std::uint64_t>::max()) {
        unsigned __int128 lhs = static_cast<unsigned __int128>(r) *
                                static_cast<std::uint64_t>(den);
        unsigned __int128 rhs = static_cast<unsigned __int128>(static_cast<std::uint64_t>(num))
                                << 64;
        return lhs < rhs;
    }
    BigInt lhs = BigInt(r) * den;
    BigInt rhs = num << 64;
    return lhs < rhs;
}

inline StateId sample_dist(const Dist& d, std::uint64_t r) {
    Rat cum(0);
    for (std::size_t i = 0; i < d.support.size(); ++i) {
        cum += d.support[i].second;
        if (i + 1 == d.support.size() || u64_below(r, cum))
            return d.support[i].first;
    }
    throw std::logic_error("sample_dist: empty distribution");
}

} // namespace detail

/// Observables of one seeded play: minimum energy level over all prefixes,
/// the running mean at the horizon, the priority histogram of the final 10%
/// window, and the number of visits to priority-0 states.
struct RunStats {
    std::uint64_t seed = 0;
    std::uint64_t horizon = 0;
    std::int64_t min_energy = 0;
    Rat running_mean;
    std::map<std::uint32_t, std::uint64_t> tail_priorities;
    std::uint64_t buchi_visits = 0;
    StateId final_state = 0;
};

/// Runs one play of `horizon` steps from `start`. Player-1 moves come from
/// the session; probabilistic states sample their exact distribution and
/// player-2 states (in games) move uniformly at random, both driven by the
/// counter-based generator.
inline RunStats simulate(const Model& m, StrategySession& session, StateId start,
                         std::uint64_t seed, std::uint64_t horizon) {
    if (horizon == 0)
        throw std::invalid_argument("simulate: horizon must be positive");
    require_valid(m, "simulate");

    // per-state cumulative thresholds, precomputed once
    std::vector<std::vector<Rat>> cum(m.num_states());
    for (StateId q = 0; q < m.num_states(); ++q) {
        if (!m.is_prob(q))
            continue;
        Rat acc(0);
        for (const Edge& e : m.out(q)) {
            acc += e.prob;
            cum[q].push_back(acc);
        }
    }

    CounterRng rng(seed);
    RunStats st;
    st.seed = seed;
    st.horizon = horizon;
    session.reset(start);

    StateId cur = start;
    std::int64_t el = 0;
    st.min_energy = 0;
    if (m.priority(cur) == 0)
        ++st.buchi_visits;
    const std::uint64_t tail_from = horizon - horizon / 10;
    if (tail_from == 0)
        ++st.tail_priorities[m.priority(cur)];

    for (std::uint64_t step = 1; step <= horizon; ++step) {
        StateId succ;
        switch (m.owner(cur)) {
        case Owner::Player1: {
            Dist d = session.choose(cur);
            succ = d.support.size() == 1 ? d.support[0].first
                                         : detail::sample_dist(d, rng.next());
            break;
        }
        case Owner::Probabilistic: {
            std::uint64_t r = rng.next();
            auto es = m.out(cur);
            succ = es.back().dst;
            for (std::size_t i = 0; i + 1 < es.size(); ++i)
                if (detail::u64_below(r, cum[cur][i])) {
                    succ = es[i].dst;
                    break;
                }
            break;
        }
        case Owner::Player2: {
            auto es = m.out(cur);
            succ = es[rng.below(es.size())].dst;
            break;
        }
        default:
            throw std::logic_error("simulate: unknown owner");
        }
        auto e = m.find_edge(cur, succ);
        if (!e)
            throw std::logic_error("simulate: strategy proposed a non-edge");
        session.observe(cur, succ);
        el += m.edges[*e].weight;
        st.min_energy = std::min(st.min_energy, el);
        cur = succ;
        if (m.priority(cur) == 0)
            ++st.buchi_visits;
        if (step >= tail_from)
            ++st.tail_priorities[m.priority(cur)];
    }
    st.running_mean = Rat(el, static_cast<std::int64_t>(horizon));
    st.final_state = cur;
    return st;
}

struct GenParams {
    std::uint32_t states = 6;
    std::uint32_t max_priority = 4; // d
    std::int64_t max_weight = 3;    // W
    std::uint32_t min_out = 1;
    std::uint32_t max_out = 2;
    std::uint32_t nonplayer_percent = 50; // probabilistic (mdp) / player-2 (game) share
    std::uint32_t denom_max = 8;          // distribution granularity
    ModelKind kind = ModelKind::Mdp;
    std::uint64_t seed = 1;
};

/// Seed-reproducible random model. States that end up without successors
/// are repaired with a weight-0 self-loop and moved to the maximum
/// priority; if every drawn weight is 0 and weights were requested, one
/// edge is bumped to 1 so the recorded W is positive.
inline Model random_instance(const GenParams& p) {
    if (p.states == 0)
        throw std::invalid_argument("random_instance: need at least one state");
    if (p.max_out > p.states)
        throw std::invalid_argument("random_instance: max_out exceeds state count");
    if (p.min_out > p.max_out)
        throw std::invalid_argument("random_instance: min_out exceeds max_out");
    if (p.denom_max == 0)
        throw std::invalid_argument("random_instance: denom_max must be positive");
    CounterRng rng(p.seed);
    Model m(p.kind);
    Owner other = p.kind == ModelKind::Mdp ? Owner::Probabilistic : Owner::Player2;
    for (StateId q = 0; q < p.states; ++q) {
        Owner o = rng.below(100) < p.nonplayer_percent ? other : Owner::Player1;
        m.add_state(o, static_cast<std::uint32_t>(rng.below(p.max_priority + 1)));
    }
    for (StateId q = 0; q < p.states; ++q) {
        std::uint32_t deg =
            p.min_out + static_cast<std::uint32_t>(rng.below(p.max_out - p.min_out + 1));
        std::vector<StateId> succs;
        for (std::uint32_t tries = 0; succs.size() < deg && tries < 4 * deg + 8; ++tries) {
            StateId dst = static_cast<StateId>(rng.below(p.states));
            if (std::find(succs.begin(), succs.end(), dst) == succs.end())
                succs.push_back(dst);
        }
        if (succs.empty()) {
            m.states[q].priority = p.max_priority;
            m.add_edge(q, q, 0, m.is_prob(q) ? Rat(1) : Rat(0));
            continue;
        }
        std::sort(succs.begin(), succs.end());
        std::vector<std::int64_t> weights;
        for (std::size_t i = 0; i < succs.size(); ++i)
            weights.push_back(static_cast<std::int64_t>(rng.below(2 * p.max_weight + 1)) -
                              p.max_weight);
        if (m.is_prob(q)) {
            std::vector<std::uint64_t> shares;
            std::uint64_t total = 0;
            for (std::size_t i = 0; i < succs.size(); ++i) {
                shares.push_back(1 + rng.below(p.denom_max));
                total += shares.back();
            }
            for (std::size_t i = 0; i < succs.size(); ++i)
                m.add_edge(q, succs[i], weights[i],
                           Rat(static_cast<std::int64_t>(shares[i]),
                               static_cast<std::int64_t>(total)));
        } else {
            for (std::size_t i = 0; i < succs.size(); ++i)
                m.add_edge(q, succs[i], weights[i]);
        }
    }
    if (p.max_weight > 0) {
        bool all_zero = true;
        for (const Edge& e : m.edges)
            all_zero = all_zero && e.weight == 0;
        if (all_zero)
            m.edges.front().weight = 1;
    }
    m.finalize();
    return m;
}

/// Random finite-memory strategy (for empirical end-component checks):
/// random memory updates, random distributions over successors.
inline FiniteMemoryStrategy random_finite_memory_strategy(const Model& m,
                                                          std::uint32_t mem_count,
                                                          std::uint64_t seed) {
    CounterRng rng(seed);
    StrategyTables t;
    t.mem_count = mem_count;
    t.initial_mem = 0;
    t.update.resize(static_cast<std::size_t>(mem_count) * m.num_edges());
    for (auto& u : t.update)
        u = static_cast<std::uint32_t>(rng.below(mem_count));
    t.next.resize(mem_count);
    for (std::uint32_t mem = 0; mem < mem_count; ++mem) {
        for (StateId q = 0; q < m.num_states(); ++q) {
            if (m.owner(q) != Owner::Player1)
                continue;
            auto es = m.out(q);
            Dist d;
            std::uint64_t total = 0;
            std::vector<std::uint64_t> shares(es.size());
            for (auto& s : shares) {
                s = rng.below(4); // zero shares drop the edge
                total += s;
            }
            if (total == 0) {
                shares[rng.below(shares.size())] = 1;
                total = 1;
            }
            for (std::size_t i = 0; i < es.size(); ++i)
                if (shares[i] > 0)
                    d.support.push_back({es[i].dst, Rat(static_cast<std::int64_t>(shares[i]),
                                                        static_cast<std::int64_t>(total))});
            t.next[mem][q] = std::move(d);
        }
    }
    return t.as_strategy(m);
}

} // namespace qparity
