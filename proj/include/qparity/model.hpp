#pragma once

#include "qparity/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qparity {

using StateId = std::uint32_t;

enum class Owner : std::uint8_t { Player1, Probabilistic, Player2 };
enum class ModelKind : std::uint8_t { Mdp, Game };

struct StateInfo {
    Owner owner = Owner::Player1;
    std::uint32_t priority = 0; // min-parity convention: least priority seen infinitely often must be even
};

struct Edge {
    StateId src = 0;
    StateId dst = 0;
    std::int64_t weight = 0;
    Rat prob; // distribution mass; meaningful only when src is probabilistic
};

class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// A finite weighted graph with a priority per state. With kind Mdp the
/// non-player-1 states are probabilistic and their outgoing edges carry an
/// exact distribution; with kind Game they belong to an adversary.
/// Immutable after finalize(); all operations on it are pure.
class Model {
public:
    ModelKind kind = ModelKind::Mdp;
    std::vector<StateInfo> states;
    std::vector<Edge> edges; // sorted by (src, dst) once finalized
    std::vector<std::string> names; // optional display names, parallel to states

    std::vector<std::uint32_t> first_out; // CSR offsets, size num_states()+1
    std::int64_t max_weight = 0;          // W, largest |weight|
    std::uint32_t max_priority = 0;       // d

    Model() = default;
    explicit Model(ModelKind k) : kind(k) {}

    std::size_t num_states() const { return states.size(); }
    std::size_t num_edges() const { return edges.size(); }

    StateId add_state(Owner o, std::uint32_t priority, std::string name = {}) {
        states.push_back({o, priority});
        names.push_back(std::move(name));
        return static_cast<StateId>(states.size() - 1);
    }

    void add_edge(StateId src, StateId dst, std::int64_t weight) {
        edges.push_back({src, dst, weight, Rat(0)});
    }

    void add_edge(StateId src, StateId dst, std::int64_t weight, Rat prob) {
        edges.push_back({src, dst, weight, std::move(prob)});
    }

    bool is_prob(StateId q) const { return states[q].owner == Owner::Probabilistic; }
    Owner owner(StateId q) const { return states[q].owner; }
    std::uint32_t priority(StateId q) const { return states[q].priority; }

    std::string display_name(StateId q) const {
        if (q < names.size() && !names[q].empty())
            return names[q];
        return "s" + std::to_string(q);
    }

    /// Sorts edges, builds the CSR index and the W/d summaries. Rejects
    /// dangling endpoints and duplicate (src, dst) pairs.
    void finalize() {
        const std::size_t n = num_states();
        for (const Edge& e : edges)
            if (e.src >= n || e.dst >= n)
                throw ModelError("edge endpoint out of range: " + std::to_string(e.src) +
                                 " -> " + std::to_string(e.dst));
        std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return a.src != b.src ? a.src < b.src : a.dst < b.dst;
        });
        for (std::size_t i = 1; i < edges.size(); ++i)
            if (edges[i].src == edges[i - 1].src && edges[i].dst == edges[i - 1].dst)
                throw ModelError("duplicate edge " + display_name(edges[i].src) + " -> " +
                                 display_name(edges[i].dst));
        first_out.assign(n + 1, 0);
        for (const Edge& e : edges)
            ++first_out[e.src + 1];
        for (std::size_t q = 0; q < n; ++q)
            first_out[q + 1] += first_out[q];
        max_weight = 0;
        max_priority = 0;
        for (const Edge& e : edges)
            max_weight = std::max<std::int64_t>(max_weight, e.weight < 0 ? -e.weight : e.weight);
        for (const StateInfo& s : states)
            max_priority = std::max(max_priority, s.priority);
    }

    std::span<const Edge> out(StateId q) const {
        return {edges.data() + first_out[q], edges.data() + first_out[q + 1]};
    }

    /// Index into edges of (src, dst), if present.
    std::optional<std::uint32_t> find_edge(StateId src, StateId dst) const {
        auto es = out(src);
        auto it = std::lower_bound(es.begin(), es.end(), dst,
                                   [](const Edge& e, StateId d) { return e.dst < d; });
        if (it == es.end() || it->dst != dst)
            return std::nullopt;
        return static_cast<std::uint32_t>(first_out[src] + (it - es.begin()));
    }
};

using PlayPrefix = std::vector<StateId>;

struct Diagnostic {
    std::string message;
};

/// Checks the structural invariants: totality, exact distributions summing
/// to 1 with positive entries, owner kinds consistent with the model kind,
/// and the recorded W/d summaries. Returns one diagnostic per violation.
inline std::vector<Diagnostic> validate(const Model& m) {
    std::vector<Diagnostic> out;
    auto fail = [&](std::string msg) { out.push_back({std::move(msg)}); };
    const std::size_t n = m.num_states();
    if (m.first_out.size() != n + 1) {
        fail("model not finalized");
        return out;
    }
    for (StateId q = 0; q < n; ++q) {
        const auto es = m.out(q);
        if (es.empty())
            fail("totality: state " + m.display_name(q) + " has no outgoing edge");
        switch (m.states[q].owner) {
        case Owner::Player1:
            break;
        case Owner::Probabilistic:
            if (m.kind != ModelKind::Mdp)
                fail("owner: probabilistic state " + m.display_name(q) + " in a game");
            break;
        case Owner::Player2:
            if (m.kind != ModelKind::Game)
                fail("owner: player-2 state " + m.display_name(q) + " in an MDP");
            break;
        }
        if (m.is_prob(q) && !es.empty()) {
            Rat sum(0);
            for (const Edge& e : es) {
                if (e.prob <= 0)
                    fail("distribution: edge " + m.display_name(q) + " -> " + m.display_name(e.dst) +
                         " has non-positive probability");
                if (e.prob > 1)
                    fail("distribution: edge " + m.display_name(q) + " -> " + m.display_name(e.dst) +
                         " has probability > 1");
                sum += e.prob;
            }
            if (sum != 1)
                fail("distribution: state " + m.display_name(q) + " probabilities sum to " +
                     rat_str(sum) + ", expected 1");
        }
    }
    std::int64_t w = 0;
    std::uint32_t d = 0;
    for (const Edge& e : m.edges)
        w = std::max<std::int64_t>(w, e.weight < 0 ? -e.weight : e.weight);
    for (const StateInfo& s : m.states)
        d = std::max(d, s.priority);
    if (w != m.max_weight)
        fail("summary: recorded max weight " + std::to_string(m.max_weight) +
             " differs from actual " + std::to_string(w));
    if (d != m.max_priority)
        fail("summary: recorded max priority " + std::to_string(m.max_priority) +
             " differs from actual " + std::to_string(d));
    return out;
}

inline void require_valid(const Model& m, const char* where) {
    auto diags = validate(m);
    if (!diags.empty())
        throw ModelError(std::string(where) + ": invalid model: " + diags.front().message);
}

/// EL of a prefix: the sum of edge weights along it. A single-state prefix
/// has level 0. Throws on consecutive pairs that are not edges.
/// An override vector, when given, replaces the per-edge weights (parallel
/// to m.edges).
inline std::int64_t energy_level(const Model& m, std::span<const StateId> prefix,
                                 std::span<const std::int64_t> weight_override = {}) {
    if (prefix.empty())
        throw std::invalid_argument("energy_level: empty prefix");
    std::int64_t level = 0;
    for (std::size_t i = 0; i + 1 < prefix.size(); ++i) {
        auto idx = m.find_edge(prefix[i], prefix[i + 1]);
        if (!idx)
            throw std::invalid_argument("energy_level: " + m.display_name(prefix[i]) + " -> " +
                                        m.display_name(prefix[i + 1]) + " is not an edge");
        level += weight_override.empty() ? m.edges[*idx].weight
                                         : weight_override[*idx];
    }
    return level;
}

/// Finite-horizon estimator of the mean payoff: EL(prefix) / #edges, exact.
inline Rat running_mean(const Model& m, std::span<const StateId> prefix) {
    if (prefix.size() < 2)
        throw std::invalid_argument("running_mean: prefix needs at least one edge");
    return Rat(energy_level(m, prefix), static_cast<std::int64_t>(prefix.size() - 1));
}

struct Objective {
    enum class Kind {
        Parity,
        Energy,
        MeanPayoff,
        EnergyParity,
        MeanPayoffParity,
        DisjunctionMpParity,
        DisjunctionEnergyParity,
    };
    Kind kind = Kind::Parity;
    std::int64_t initial_credit = 0; // energy variants, >= 0
    Rat threshold;                   // mean-payoff variants
    bool strict = false;             // > threshold instead of >=
};

} // namespace qparity
