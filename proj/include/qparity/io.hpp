#pragma once

#include "qparity/model.hpp"

#include <map>
#include <sstream>
#include <string>

namespace qparity {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok)
        out.push_back(tok);
    return out;
}

inline bool parse_kv(const std::string& tok, const std::string& key, std::string& value) {
    if (tok.size() <= key.size() + 1 || tok.compare(0, key.size(), key) != 0 ||
        tok[key.size()] != '=')
        return false;
    value = tok.substr(key.size() + 1);
    return true;
}

inline std::int64_t parse_int(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        std::int64_t v = std::stoll(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "malformed integer '" + s + "'");
    }
}

} // namespace detail

/// Parses the line-based model format:
///   line 1: `mdp` or `game`
///   `state <name> owner=<p1|prob|p2> priority=<nat>`
///   `edge <src> <dst> weight=<int> [prob=<a/b>]`
/// '#' starts a comment. prob= is required exactly on edges leaving
/// probabilistic states; duplicate states and edges are rejected. Semantic
/// invariants beyond the grammar are left to validate().
inline Model parse_model(const std::string& text) {
    Model m;
    std::map<std::string, StateId> by_name;
    bool header_seen = false;
    std::istringstream is(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos)
            raw.erase(hash);
        auto toks = detail::split_ws(raw);
        if (toks.empty())
            continue;
        if (!header_seen) {
            if (toks.size() != 1 || (toks[0] != "mdp" && toks[0] != "game"))
                throw ParseError(lineno, "expected header 'mdp' or 'game'");
            m.kind = toks[0] == "mdp" ? ModelKind::Mdp : ModelKind::Game;
            header_seen = true;
            continue;
        }
        if (toks[0] == "state") {
            if (toks.size() != 4)
                throw ParseError(lineno, "state line needs: state <name> owner=... priority=...");
            const std::string& name = toks[1];
            if (by_name.count(name))
                throw ParseError(lineno, "duplicate state '" + name + "'");
            std::string ov, pv;
            if (!detail::parse_kv(toks[2], "owner", ov))
                throw ParseError(lineno, "expected owner=<p1|prob|p2>");
            if (!detail::parse_kv(toks[3], "priority", pv))
                throw ParseError(lineno, "expected priority=<nat>");
            Owner owner;
            if (ov == "p1")
                owner = Owner::Player1;
            else if (ov == "prob")
                owner = Owner::Probabilistic;
            else if (ov == "p2")
                owner = Owner::Player2;
            else
                throw ParseError(lineno, "unknown owner '" + ov + "'");
            if (owner == Owner::Probabilistic && m.kind == ModelKind::Game)
                throw ParseError(lineno, "probabilistic states are not allowed in a game");
            if (owner == Owner::Player2 && m.kind == ModelKind::Mdp)
                throw ParseError(lineno, "player-2 states are not allowed in an MDP");
            std::int64_t pr = detail::parse_int(pv, lineno);
            if (pr < 0)
                throw ParseError(lineno, "priority must be a natural number");
            by_name[name] = m.add_state(owner, static_cast<std::uint32_t>(pr), name);
        } else if (toks[0] == "edge") {
            if (toks.size() != 4 && toks.size() != 5)
                throw ParseError(lineno, "edge line needs: edge <src> <dst> weight=<int> [prob=<a/b>]");
            auto src_it = by_name.find(toks[1]);
            if (src_it == by_name.end())
                throw ParseError(lineno, "unknown state '" + toks[1] + "'");
            auto dst_it = by_name.find(toks[2]);
            if (dst_it == by_name.end())
                throw ParseError(lineno, "unknown state '" + toks[2] + "'");
            std::string wv;
            if (!detail::parse_kv(toks[3], "weight", wv))
                throw ParseError(lineno, "expected weight=<int>");
            std::int64_t weight = detail::parse_int(wv, lineno);
            bool src_prob = m.owner(src_it->second) == Owner::Probabilistic;
            if (toks.size() == 5) {
                std::string pv;
                if (!detail::parse_kv(toks[4], "prob", pv))
                    throw ParseError(lineno, "expected prob=<a/b>");
                if (!src_prob)
                    throw ParseError(lineno, "prob= on an edge leaving a non-probabilistic state");
                Rat p;
                try {
                    p = rat_parse(pv);
                } catch (const std::invalid_argument& e) {
                    throw ParseError(lineno, e.what());
                }
                m.add_edge(src_it->second, dst_it->second, weight, p);
            } else {
                if (src_prob)
                    throw ParseError(lineno, "edge leaving a probabilistic state needs prob=");
                m.add_edge(src_it->second, dst_it->second, weight);
            }
            if (m.edges.size() >= 2)
                for (std::size_t i = 0; i + 1 < m.edges.size(); ++i)
                    if (m.edges[i].src == m.edges.back().src && m.edges[i].dst == m.edges.back().dst)
                        throw ParseError(lineno, "duplicate edge '" + toks[1] + " " + toks[2] + "'");
        } else {
            throw ParseError(lineno, "unknown directive '" + toks[0] + "'");
        }
    }
    if (!header_seen)
        throw ParseError(lineno, "empty document");
    try {
        m.finalize();
    } catch (const ModelError& e) {
        throw ParseError(lineno, e.what());
    }
    return m;
}

/// Canonical form: states in index order, edges sorted by (src, dst),
/// reduced rationals. parse(write(m)) == m and write is a fixpoint.
inline std::string write_model(const Model& m) {
    std::ostringstream os;
    os << (m.kind == ModelKind::Mdp ? "mdp" : "game") << '\n';
    for (StateId q = 0; q < m.num_states(); ++q) {
        const char* ov = m.owner(q) == Owner::Player1
                             ? "p1"
                             : (m.owner(q) == Owner::Probabilistic ? "prob" : "p2");
        os << "state " << m.display_name(q) << " owner=" << ov << " priority=" << m.priority(q)
           << '\n';
    }
    for (const Edge& e : m.edges) {
        os << "edge " << m.display_name(e.src) << ' ' << m.display_name(e.dst)
           << " weight=" << e.weight;
        if (m.owner(e.src) == Owner::Probabilistic)
            os << " prob=" << rat_str(e.prob);
        os << '\n';
    }
    return os.str();
}

struct DotAnnotations {
    std::vector<bool> highlight;                 // winning-set coloring
    std::map<StateId, std::string> extra_label;  // e.g. minimal credits
};

/// GraphViz rendering: circles are player-1 states, diamonds probabilistic
/// states, boxes player-2 states; labels carry priorities and weights.
inline std::string export_dot(const Model& m, const DotAnnotations* ann = nullptr) {
    std::ostringstream os;
    os << "digraph model {\n";
    for (StateId q = 0; q < m.num_states(); ++q) {
        const char* shape = m.owner(q) == Owner::Player1
                                ? "circle"
                                : (m.owner(q) == Owner::Probabilistic ? "diamond" : "box");
        os << "  n" << q << " [shape=" << shape << ", label=\"" << m.display_name(q) << "\\np="
           << m.priority(q);
        if (ann) {
            auto it = ann->extra_label.find(q);
            if (it != ann->extra_label.end())
                os << "\\n" << it->second;
        }
        os << "\"";
        if (ann && q < ann->highlight.size() && ann->highlight[q])
            os << ", style=filled, fillcolor=palegreen";
        os << "];\n";
    }
    for (const Edge& e : m.edges) {
        os << "  n" << e.src << " -> n" << e.dst << " [label=\"" << e.weight;
        if (m.owner(e.src) == Owner::Probabilistic)
            os << " : " << rat_str(e.prob);
        os << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace qparity
