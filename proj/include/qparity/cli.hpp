#pragma once

#include "qparity/io.hpp"
#include "qparity/oracle.hpp"
#include "qparity/report.hpp"
#include "qparity/simulate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace qparity {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline Model load_model(const std::string& path) { return parse_model(read_file(path)); }

inline StateId state_by_name(const Model& m, const std::string& name) {
    for (StateId q = 0; q < m.num_states(); ++q)
        if (m.display_name(q) == name)
            return q;
    throw std::runtime_error("unknown state '" + name + "'");
}

inline std::vector<StateId> states_by_names(const Model& m, const std::string& csv) {
    std::vector<StateId> out;
    std::string cur;
    std::istringstream is(csv);
    while (std::getline(is, cur, ','))
        if (!cur.empty())
            out.push_back(state_by_name(m, cur));
    return out;
}

} // namespace detail

/// Default saturation for the credit-product oracle: one margin above the
/// solver's own cap, so agreement also validates that cap.
inline std::int64_t oracle_default_cap(const Model& m) {
    return 2 * static_cast<std::int64_t>(m.num_states()) *
               std::max<std::int64_t>(m.max_weight, 1) +
           2;
}

/// Command-line front end. Returns 0 when solved, 2 on input errors, 3
/// when a guard refused the computation.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"qparity: energy and mean-payoff parity objectives on MDPs"};
    app.require_subcommand(1);

    std::string model_path, target_csv, state_name, strategy_from, annotate_path, out_path;
    std::string threshold = "0";
    std::size_t component_index = 0;
    bool strict = false, no_strategy = false, with_values = false;
    std::uint64_t seed = 1, horizon = 10000, runs = 1;
    std::int64_t cap = 0;

    auto* c_validate = app.add_subcommand("validate", "check the model invariants");
    c_validate->add_option("model", model_path)->required();

    auto* c_mec = app.add_subcommand("mec", "maximal end-component decomposition");
    c_mec->add_option("model", model_path)->required();

    auto* c_attr = app.add_subcommand("attractor", "random attractor of a target set");
    c_attr->add_option("--target", target_csv, "comma-separated state names")->required();
    c_attr->add_option("model", model_path)->required();

    auto* c_mpv = app.add_subcommand("mp-value", "optimal gain of one end component");
    c_mpv->add_option("--component", component_index, "component index from `mec`");
    c_mpv->add_option("model", model_path)->required();

    auto* c_solve = app.add_subcommand("solve", "decide almost-sure winning");
    c_solve->require_subcommand(1);
    auto* c_mp = c_solve->add_subcommand("mp-parity", "mean-payoff parity conjunction");
    c_mp->add_option("--threshold", threshold, "rational threshold, e.g. 1/2");
    c_mp->add_flag("--strict", strict, "require mean payoff strictly above the threshold");
    c_mp->add_flag("--values", with_values, "also compute optimal satisfaction probabilities");
    c_mp->add_option("model", model_path)->required();
    auto* c_ep = c_solve->add_subcommand("energy-parity", "energy parity conjunction");
    c_ep->add_flag("--no-strategy", no_strategy, "omit the strategy tables from the report");
    c_ep->add_option("model", model_path)->required();
    auto* c_dmp = c_solve->add_subcommand("disjunction-mp-parity", "mean payoff or parity");
    c_dmp->add_option("--threshold", threshold);
    c_dmp->add_flag("--strict", strict);
    c_dmp->add_option("model", model_path)->required();
    auto* c_dep = c_solve->add_subcommand("disjunction-energy-parity", "energy or parity");
    c_dep->add_option("model", model_path)->required();

    auto* c_credit = app.add_subcommand("min-credit", "minimum initial credit of one state");
    c_credit->add_option("--state", state_name)->required();
    c_credit->add_option("model", model_path)->required();

    auto* c_oracle = app.add_subcommand("oracle", "brute-force reference answers");
    c_oracle->require_subcommand(1);
    auto* c_oe = c_oracle->add_subcommand("energy", "credit product oracle");
    c_oe->add_option("--cap", cap, "saturation cap (default 2|Q|W+2)");
    c_oe->add_option("model", model_path)->required();
    auto* c_om = c_oracle->add_subcommand("mp", "policy enumeration oracle");
    c_om->add_option("--component", component_index)->required();
    c_om->add_option("model", model_path)->required();

    auto* c_sim = app.add_subcommand("simulate", "seeded runs under a stored strategy");
    c_sim->add_option("--strategy-from", strategy_from, "report with strategy tables")
        ->required();
    c_sim->add_option("--state", state_name, "start state (default: first with a table entry)");
    c_sim->add_option("--seed", seed);
    c_sim->add_option("--horizon", horizon);
    c_sim->add_option("--runs", runs);
    c_sim->add_option("model", model_path)->required();

    GenParams gen;
    auto* c_gen = app.add_subcommand("gen", "write a random instance");
    c_gen->add_option("--seed", gen.seed);
    c_gen->add_option("--states", gen.states);
    c_gen->add_option("--max-weight", gen.max_weight);
    c_gen->add_option("--max-priority", gen.max_priority);
    c_gen->add_option("--min-out", gen.min_out);
    c_gen->add_option("--max-out", gen.max_out);
    c_gen->add_option("--chance-percent", gen.nonplayer_percent,
                      "share of probabilistic (or player-2) states");
    c_gen->add_option("--denominator", gen.denom_max);
    std::string gen_kind = "mdp";
    c_gen->add_option("--kind", gen_kind)->check(CLI::IsMember({"mdp", "game"}));
    c_gen->add_option("-o,--output", out_path);

    auto* c_dot = app.add_subcommand("export-dot", "GraphViz rendering");
    c_dot->add_option("--annotate", annotate_path, "color a solved report's winning set");
    c_dot->add_option("model", model_path)->required();

    std::vector<char*> argv;
    std::vector<std::string> storage = args;
    storage.insert(storage.begin(), "qparity");
    for (auto& s : storage)
        argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return 2;
    }

    auto emit = [&](const std::string& command, const Model& m, Json result) {
        out << make_report(command, m, std::move(result)).dump(2) << "\n";
    };

    try {
        if (*c_validate) {
            Model m = detail::load_model(model_path);
            auto diags = validate(m);
            Json result;
            result["valid"] = diags.empty();
            Json list = Json::array();
            for (auto& d : diags)
                list.push_back(d.message);
            result["diagnostics"] = std::move(list);
            emit("validate", m, std::move(result));
            return diags.empty() ? 0 : 2;
        }
        if (*c_mec) {
            Model m = detail::load_model(model_path);
            auto d = mec_decompose(m);
            Json comps = Json::array();
            for (auto& c : d.components)
                comps.push_back(json_states(m, c.states));
            Json membership = Json::object();
            for (StateId q = 0; q < m.num_states(); ++q)
                if (d.membership[q] >= 0)
                    membership[m.display_name(q)] = d.membership[q];
            emit("mec", m, Json{{"components", comps}, {"membership", membership}});
            return 0;
        }
        if (*c_attr) {
            Model m = detail::load_model(model_path);
            auto attr = random_attractor(m, detail::states_by_names(m, target_csv));
            emit("attractor", m, Json{{"attractor", json_states(m, attr)}});
            return 0;
        }
        if (*c_mpv) {
            Model m = detail::load_model(model_path);
            auto d = mec_decompose(m);
            if (component_index >= d.components.size())
                throw std::runtime_error("component index out of range");
            auto v = mec_value(m, d.components[component_index]);
            Json strat = Json::object(), bias = Json::object();
            for (auto& [q, dst] : v.strategy)
                strat[m.display_name(q)] = m.display_name(dst);
            for (auto& [q, h] : v.bias)
                bias[m.display_name(q)] = rat_str(h);
            emit("mp-value", m,
                 Json{{"component", json_states(m, d.components[component_index].states)},
                      {"gain", rat_str(v.gain)},
                      {"strategy", strat},
                      {"bias", bias},
                      {"certified", certify_gain(m, d.components[component_index], v)}});
            return 0;
        }
        if (*c_mp) {
            Model m = detail::load_model(model_path);
            Objective obj{Objective::Kind::MeanPayoffParity, 0, rat_parse(threshold), strict};
            auto r = solve_mp_parity(m, obj.threshold, obj.strict, with_values);
            Json result = json_mp_parity(m, r);
            result["objective"] = json_objective(obj);
            emit("solve-mp-parity", m, std::move(result));
            return 0;
        }
        if (*c_ep) {
            Model m = detail::load_model(model_path);
            auto r = solve_energy_parity(m);
            Json result = json_energy_parity(m, r, !no_strategy);
            result["objective"] = json_objective({Objective::Kind::EnergyParity, 0, Rat(0), false});
            emit("solve-energy-parity", m, std::move(result));
            return 0;
        }
        if (*c_dmp) {
            Model m = detail::load_model(model_path);
            Objective obj{Objective::Kind::DisjunctionMpParity, 0, rat_parse(threshold), strict};
            auto r = solve_disjunction_mp_parity(m, obj.threshold, obj.strict);
            emit("solve-disjunction-mp-parity", m,
                 Json{{"objective", json_objective(obj)},
                      {"winUnion", json_states(m, r.win_union)},
                      {"almostSure", json_states(m, r.almost_sure)}});
            return 0;
        }
        if (*c_dep) {
            Model m = detail::load_model(model_path);
            auto r = solve_disjunction_energy_parity(m);
            emit("solve-disjunction-energy-parity", m,
                 Json{{"objective",
                       json_objective({Objective::Kind::DisjunctionEnergyParity, 0, Rat(0), false})},
                      {"winning", json_states(m, r.winning)},
                      {"credits", json_credits(m, r.credits)}});
            return 0;
        }
        if (*c_credit) {
            Model m = detail::load_model(model_path);
            StateId q = detail::state_by_name(m, state_name);
            auto r = solve_energy_parity(m);
            Json result;
            result["state"] = m.display_name(q);
            if (r.credits[q])
                result["credit"] = *r.credits[q];
            else
                result["credit"] = nullptr;
            emit("min-credit", m, std::move(result));
            return 0;
        }
        if (*c_oe) {
            Model m = detail::load_model(model_path);
            std::int64_t use_cap = cap > 0 ? cap : oracle_default_cap(m);
            auto r = oracle::product_energy_oracle(m, use_cap);
            std::vector<std::optional<std::int64_t>> credits(m.num_states());
            for (StateId q = 0; q < m.num_states(); ++q)
                credits[q] = r.min_credit(q);
            emit("oracle-energy", m, Json{{"cap", r.cap}, {"credits", json_credits(m, credits)}});
            return 0;
        }
        if (*c_om) {
            Model m = detail::load_model(model_path);
            auto d = mec_decompose(m);
            if (component_index >= d.components.size())
                throw std::runtime_error("component index out of range");
            Rat gain = oracle::policy_enum_mp_oracle(m, d.components[component_index].states);
            emit("oracle-mp", m,
                 Json{{"component", json_states(m, d.components[component_index].states)},
                      {"gain", rat_str(gain)}});
            return 0;
        }
        if (*c_sim) {
            Model m = detail::load_model(model_path);
            Json rep = Json::parse(detail::read_file(strategy_from));
            const Json& result = rep.at("result");
            const Json* strat_json = nullptr;
            if (result.contains("strategy") && !result.at("strategy").is_null())
                strat_json = &result.at("strategy");
            else if (result.contains("reachStrategy"))
                strat_json = &result.at("reachStrategy");
            if (!strat_json)
                throw std::runtime_error("report carries no strategy tables");
            StrategyTables tables = strategy_tables_from_json(m, *strat_json);
            StateId start;
            std::uint32_t initial_mem = tables.initial_mem;
            std::map<std::string, std::uint32_t> per_state;
            if (strat_json->contains("initialMemPerState"))
                for (auto it = (*strat_json)["initialMemPerState"].begin();
                     it != (*strat_json)["initialMemPerState"].end(); ++it)
                    per_state[it.key()] = it.value().get<std::uint32_t>();
            if (!state_name.empty()) {
                start = detail::state_by_name(m, state_name);
            } else if (!per_state.empty()) {
                start = detail::state_by_name(m, per_state.begin()->first);
            } else {
                start = 0;
            }
            auto it = per_state.find(m.display_name(start));
            if (it != per_state.end())
                initial_mem = it->second;
            tables.initial_mem = initial_mem;
            FiniteMemoryStrategy strat = tables.as_strategy(m);
            Json runs_json = Json::array();
            for (std::uint64_t r = 0; r < runs; ++r) {
                auto session = strat.session();
                auto st = simulate(m, session, start, seed + r, horizon);
                Json tail = Json::object();
                for (auto& [pr, count] : st.tail_priorities)
                    tail[std::to_string(pr)] = count;
                runs_json.push_back(Json{{"seed", st.seed},
                                         {"minEnergy", st.min_energy},
                                         {"runningMean", rat_str(st.running_mean)},
                                         {"buchiVisits", st.buchi_visits},
                                         {"tailPriorities", std::move(tail)},
                                         {"finalState", m.display_name(st.final_state)}});
            }
            emit("simulate", m,
                 Json{{"start", m.display_name(start)}, {"horizon", horizon},
                      {"runs", std::move(runs_json)}});
            return 0;
        }
        if (*c_gen) {
            gen.kind = gen_kind == "mdp" ? ModelKind::Mdp : ModelKind::Game;
            Model m = random_instance(gen);
            std::string text = write_model(m);
            if (out_path.empty()) {
                out << text;
            } else {
                std::ofstream f(out_path);
                if (!f)
                    throw std::runtime_error("cannot write " + out_path);
                f << text;
            }
            return 0;
        }
        if (*c_dot) {
            Model m = detail::load_model(model_path);
            if (annotate_path.empty()) {
                out << export_dot(m);
                return 0;
            }
            Json rep = Json::parse(detail::read_file(annotate_path));
            DotAnnotations ann;
            ann.highlight.assign(m.num_states(), false);
            const Json& result = rep.at("result");
            if (result.contains("winning"))
                for (const auto& name : result["winning"])
                    ann.highlight[detail::state_by_name(m, name.get<std::string>())] = true;
            if (result.contains("almostSure"))
                for (const auto& name : result["almostSure"])
                    ann.highlight[detail::state_by_name(m, name.get<std::string>())] = true;
            if (result.contains("credits"))
                for (auto it = result["credits"].begin(); it != result["credits"].end(); ++it)
                    ann.extra_label[detail::state_by_name(m, it.key())] =
                        "c0=" + it.value().dump();
            out << export_dot(m, &ann);
            return 0;
        }
    } catch (const oracle::GuardError& e) {
        err << "refused: " << e.what() << "\n";
        return 3;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << app.help();
    return 2;
}

} // namespace qparity
