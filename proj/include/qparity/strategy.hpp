#pragma once

#include "qparity/model.hpp"

#include <functional>
#include <map>
#include <memory>
#include <utility>

namespace qparity {

/// Probability distribution over successor states, exact.
struct Dist {
    std::vector<std::pair<StateId, Rat>> support;

    static Dist point(StateId q) { return {{{q, Rat(1)}}}; }

    static Dist uniform(std::span<const StateId> targets) {
        Dist d;
        Rat p(1, static_cast<std::int64_t>(targets.size()));
        for (StateId t : targets)
            d.support.push_back({t, p});
        return d;
    }
};

/// One play's view of a strategy. choose() is consulted at player-1 states;
/// observe() sees every traversed edge, including probabilistic ones.
class StrategySession {
public:
    virtual ~StrategySession() = default;
    virtual void reset(StateId start) = 0;
    virtual Dist choose(StateId q) = 0;
    virtual void observe(StateId from, StateId to) = 0;
};

/// Deterministic transducer <Mem, m0, update, next>; size is |Mem|.
/// The update function sees the traversed edge (not just the entered state)
/// so that weight-dependent memories such as saturated energy levels are
/// expressible.
struct FiniteMemoryStrategy {
    std::uint32_t mem_count = 1;
    std::uint32_t initial_mem = 0;
    std::function<std::uint32_t(std::uint32_t mem, StateId src, StateId dst)> update;
    std::function<Dist(std::uint32_t mem, StateId q)> next;

    class Session : public StrategySession {
    public:
        explicit Session(const FiniteMemoryStrategy& s) : s_(&s), mem_(s.initial_mem) {}
        void reset(StateId) override { mem_ = s_->initial_mem; }
        Dist choose(StateId q) override { return s_->next(mem_, q); }
        void observe(StateId from, StateId to) override {
            if (s_->update)
                mem_ = s_->update(mem_, from, to);
        }
        std::uint32_t mem() const { return mem_; }

    private:
        const FiniteMemoryStrategy* s_;
        std::uint32_t mem_;
    };

    Session session() const { return Session(*this); }
};

/// Memoryless strategy from a per-state distribution map.
inline FiniteMemoryStrategy make_memoryless(std::map<StateId, Dist> choices) {
    FiniteMemoryStrategy s;
    s.mem_count = 1;
    s.initial_mem = 0;
    s.update = nullptr;
    auto table = std::make_shared<std::map<StateId, Dist>>(std::move(choices));
    s.next = [table](std::uint32_t, StateId q) {
        auto it = table->find(q);
        if (it == table->end())
            throw std::logic_error("strategy has no move at state " + std::to_string(q));
        return it->second;
    };
    return s;
}

/// Explicit transducer tables, the serializable form used by reports.
struct StrategyTables {
    std::uint32_t mem_count = 1;
    std::uint32_t initial_mem = 0;
    // update[mem * num_edges + edge] = successor memory
    std::vector<std::uint32_t> update;
    // next[mem] maps player-1 states to distributions
    std::vector<std::map<StateId, Dist>> next;

    FiniteMemoryStrategy as_strategy(const Model& m) const {
        FiniteMemoryStrategy s;
        s.mem_count = mem_count;
        s.initial_mem = initial_mem;
        auto self = std::make_shared<StrategyTables>(*this);
        const Model* mp = &m;
        s.update = [self, mp](std::uint32_t mem, StateId src, StateId dst) {
            if (self->update.empty())
                return mem;
            auto e = mp->find_edge(src, dst);
            if (!e)
                throw std::logic_error("observed a non-edge");
            return self->update[mem * mp->num_edges() + *e];
        };
        s.next = [self](std::uint32_t mem, StateId q) {
            const auto& row = self->next.at(mem);
            auto it = row.find(q);
            if (it == row.end())
                throw std::logic_error("strategy table has no move at state " + std::to_string(q));
            return it->second;
        };
        return s;
    }
};

/// Expands a functional strategy into tables; refuses when the table would
/// exceed max_entries.
inline std::optional<StrategyTables> materialize_tables(const FiniteMemoryStrategy& s,
                                                        const Model& m,
                                                        std::size_t max_entries = 2'000'000) {
    const std::size_t cells = static_cast<std::size_t>(s.mem_count) * m.num_edges();
    if (cells > max_entries)
        return std::nullopt;
    StrategyTables t;
    t.mem_count = s.mem_count;
    t.initial_mem = s.initial_mem;
    t.update.assign(cells, 0);
    for (std::uint32_t mem = 0; mem < s.mem_count; ++mem)
        for (std::size_t e = 0; e < m.num_edges(); ++e)
            t.update[mem * m.num_edges() + e] =
                s.update ? s.update(mem, m.edges[e].src, m.edges[e].dst) : mem;
    t.next.resize(s.mem_count);
    for (std::uint32_t mem = 0; mem < s.mem_count; ++mem)
        for (StateId q = 0; q < m.num_states(); ++q)
            if (m.owner(q) == Owner::Player1) {
                try {
                    t.next[mem][q] = s.next(mem, q);
                } catch (const std::logic_error&) {
                    // partial strategies leave unreachable rows empty
                }
            }
    return t;
}

} // namespace qparity
