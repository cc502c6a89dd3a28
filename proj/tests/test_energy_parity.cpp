#include "qparity/qparity.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace qparity;
namespace qt = qparity::testing;

namespace {

GenParams ep_params(std::uint64_t seed) {
    GenParams p;
    p.seed = seed;
    p.states = 4 + seed % 3;
    p.max_out = 3;
    p.max_weight = 3;
    p.max_priority = 4;
    return p;
}

std::int64_t oracle_cap(const Model& m) {
    return 2 * static_cast<std::int64_t>(m.num_states()) * std::max<std::int64_t>(m.max_weight, 1) +
           2;
}

void check_against_oracle(const Model& m, const EnergyParityResult& r) {
    auto oracle = oracle::product_energy_oracle(m, oracle_cap(m));
    for (StateId q = 0; q < m.num_states(); ++q) {
        auto expected = oracle.min_credit(q);
        CHECK(expected.has_value() == r.credits[q].has_value());
        if (expected && r.credits[q])
            CHECK(*expected == *r.credits[q]);
    }
}

} // namespace

TEST_CASE("gadget of recharge has |Q1| + 3 |QP| nodes and mirrors the weights") {
    Model m = qt::recharge();
    auto norm = normalize_for_energy(m);
    auto g = gadgetize(norm.model);
    CHECK(g.game.num_states() == 5);
    CHECK(g.game.owner(1) == Owner::Player2); // q1 hands the choice to the adversary
    StateId left = kNoNode, right = kNoNode;
    for (StateId s = 3; s < 5; ++s) {
        if (g.tag[s] == GadgetGame::Tag::Left)
            left = s;
        if (g.tag[s] == GadgetGame::Tag::Right)
            right = s;
    }
    REQUIRE(left != kNoNode);
    REQUIRE(right != kNoNode);
    CHECK(g.game.priority(left) == 1);
    CHECK(g.game.priority(right) == 0);
    CHECK(g.game.owner(left) == Owner::Player1);
    CHECK(g.game.owner(right) == Owner::Player2);
    CHECK(g.game.find_edge(1, left).has_value());
    for (StateId d : {left, right}) {
        CHECK(g.game.find_edge(d, 0).has_value());
        CHECK(g.game.find_edge(d, 2).has_value());
    }
}

TEST_CASE("gadget of drain matches the bundled game") {
    Model m = qt::drain();
    auto norm = normalize_for_energy(m);
    auto g = gadgetize(norm.model);
    Model bundled = qt::drain_game();
    CHECK(g.game.num_states() == bundled.num_states());
    auto eb = solve_energy_buchi_game(g.game);
    auto ed = solve_energy_buchi_game(bundled);
    // a <-> a and b <-> b under the provenance maps
    CHECK(eb.credits[0].has_value() == ed.credits[0].has_value());
    CHECK(eb.credits[1] == ed.credits[3]);
}

TEST_CASE("an MDP without probabilistic states gadgetizes to itself") {
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Player1, 0, "x");
    m.add_state(Owner::Player1, 1, "y");
    m.add_edge(0, 1, 1);
    m.add_edge(1, 0, -1);
    m.finalize();
    auto norm = normalize_for_energy(m);
    auto g = gadgetize(norm.model);
    CHECK(g.game.num_states() == 2);
    CHECK(g.game.num_edges() == 2);
    for (StateId q = 0; q < 2; ++q)
        CHECK(g.game.owner(q) == Owner::Player1);
}

TEST_CASE("gadgetize rejects non-normalized input") {
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Probabilistic, 0, "p"); // priority 0 < max
    m.add_state(Owner::Player1, 1, "t");
    m.add_edge(0, 1, 0, Rat(1, 2));
    m.add_edge(0, 0, 0, Rat(1, 2));
    m.add_edge(1, 1, 0);
    m.finalize();
    CHECK_THROWS_AS(gadgetize(m), ModelError);
}

TEST_CASE("copy construction on a Buchi model doubles the states") {
    Model m = qt::recharge();
    auto alt = make_alternating(m);
    auto c = parity_to_buchi_copies(alt.model);
    CHECK(c.evens == std::vector<std::uint32_t>{0});
    CHECK(c.mdp.num_states() == 2 * alt.model.num_states() + 1);
    // Buchi set of the copy: exactly the states with matching priority
    for (StateId s = 0; s < c.mdp.num_states(); ++s) {
        bool buchi = c.mdp.priority(s) == 0;
        bool expected = c.tag[s] == CopiedMdp::Tag::Copy &&
                        alt.model.priority(c.base[s]) == c.committed[s];
        CHECK(buchi == expected);
    }
    CHECK_THROWS_AS(parity_to_buchi_copies(m), ModelError); // not alternating
}

TEST_CASE("probabilistic copies with a low successor fall to the sink") {
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Player1, 1, "a");
    m.add_state(Owner::Probabilistic, 2, "p");
    m.add_state(Owner::Player1, 3, "b");
    m.add_edge(0, 1, 0);
    m.add_edge(1, 0, 0, Rat(1, 2)); // priority 1 successor
    m.add_edge(1, 2, 0, Rat(1, 2));
    m.add_edge(2, 1, 0);
    m.finalize();
    auto c = parity_to_buchi_copies(m);
    CHECK(c.evens == std::vector<std::uint32_t>{0, 2});
    // in copy 2, p's support contains a (priority 1 < 2): single sink edge
    StateId p_copy2 = c.copy_node(1, 1);
    auto es = c.mdp.out(p_copy2);
    REQUIRE(es.size() == 1);
    CHECK(es[0].dst == c.sink);
    CHECK(es[0].prob == Rat(1));
    // in copy 0 everything qualifies
    StateId p_copy0 = c.copy_node(1, 0);
    CHECK(c.mdp.out(p_copy0).size() == 2);
}

TEST_CASE("energy buchi mdp credits on recharge") {
    Model m = qt::recharge();
    auto r = solve_energy_buchi_mdp(m);
    CHECK(r.credits[0] == 0);
    CHECK(r.credits[1] == 10);
    CHECK(r.credits[2] == 10);
}

TEST_CASE("energy buchi mdp on drain wins only at the absorbing state") {
    Model m = qt::drain();
    auto r = solve_energy_buchi_mdp(m);
    CHECK(!r.credits[0].has_value());
    CHECK(r.credits[1] == 0);
}

TEST_CASE("solve_energy_parity on the bundled models") {
    Model m = qt::recharge();
    auto r = solve_energy_parity(m);
    CHECK(r.routes_verified);
    CHECK(r.winning == std::vector<StateId>{0, 1, 2});
    CHECK(r.credits[0] == 0);
    CHECK(r.credits[1] == 10);
    CHECK(r.credits[2] == 10);
    CHECK(r.committed[0] == 0);
    check_against_oracle(m, r);

    Model left = qt::drain();
    auto rl = solve_energy_parity(left);
    CHECK(rl.winning == std::vector<StateId>{1});
    CHECK(rl.credits[1] == 0);
    CHECK(!rl.credits[0].has_value());
    check_against_oracle(left, rl);
}

TEST_CASE("all-odd priorities lose everywhere") {
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Player1, 1, "a");
    m.add_state(Owner::Player1, 3, "b");
    m.add_edge(0, 1, 1);
    m.add_edge(1, 0, 1);
    m.finalize();
    auto r = solve_energy_parity(m);
    CHECK(r.winning.empty());
    CHECK(r.memory_size == 0);
}

TEST_CASE("pipeline agrees with the product oracle on random instances") {
    EnergyParityOptions opt;
    opt.route_check = EnergyParityOptions::RouteCheck::Always;
    for (std::uint64_t seed = 500; seed <= 560; ++seed) {
        Model m = random_instance(ep_params(seed));
        auto r = solve_energy_parity(m, opt);
        check_against_oracle(m, r);
        CHECK(r.routes_verified);
    }
}

TEST_CASE("support invariance: probabilities never change the answer") {
    for (std::uint64_t seed = 600; seed <= 625; ++seed) {
        Model m = random_instance(ep_params(seed));
        Model reweighted = m;
        CounterRng rng(seed * 31 + 7);
        for (StateId q = 0; q < reweighted.num_states(); ++q) {
            if (!reweighted.is_prob(q))
                continue;
            std::uint64_t total = 0;
            std::vector<std::uint64_t> shares;
            for (std::uint32_t i = reweighted.first_out[q]; i < reweighted.first_out[q + 1]; ++i) {
                shares.push_back(1 + rng.below(11));
                total += shares.back();
            }
            std::size_t at = 0;
            for (std::uint32_t i = reweighted.first_out[q]; i < reweighted.first_out[q + 1]; ++i)
                reweighted.edges[i].prob = Rat(static_cast<std::int64_t>(shares[at++]),
                                               static_cast<std::int64_t>(total));
        }
        reweighted.finalize();
        auto r1 = solve_energy_parity(m);
        auto r2 = solve_energy_parity(reweighted);
        for (StateId q = 0; q < m.num_states(); ++q)
            CHECK(r1.credits[q] == r2.credits[q]);
    }
}

TEST_CASE("weight scaling scales credits") {
    for (std::uint64_t seed = 650; seed <= 670; ++seed) {
        Model m = random_instance(ep_params(seed));
        Model scaled = m;
        for (auto& e : scaled.edges)
            e.weight *= 2;
        scaled.finalize();
        auto r1 = solve_energy_parity(m);
        auto r2 = solve_energy_parity(scaled);
        for (StateId q = 0; q < m.num_states(); ++q) {
            CHECK(r1.credits[q].has_value() == r2.credits[q].has_value());
            if (r1.credits[q])
                CHECK(*r2.credits[q] == 2 * *r1.credits[q]);
        }
    }
}

TEST_CASE("witness memory stays within the bound and plays safely") {
    std::size_t simulated = 0;
    for (std::uint64_t seed = 700; simulated < 200; ++seed) {
        Model m = random_instance(ep_params(seed));
        auto r = solve_energy_parity(m);
        if (r.winning.empty())
            continue;
        CHECK(r.memory_size <= r.memory_bound);
        REQUIRE(r.witness);
        for (StateId q : r.winning) {
            const std::int64_t credit = *r.credits[q];
            for (std::uint64_t run = 0; run < 6; ++run) {
                auto session = r.witness->session();
                auto st = simulate(m, session, q, seed * 977 + run * 13 + q, 10000);
                CHECK(credit + st.min_energy >= 0);
                std::uint32_t tail_min = 0xffffffffu;
                for (auto& [pr, count] : st.tail_priorities)
                    tail_min = std::min(tail_min, pr);
                CHECK(tail_min % 2 == 0);
                ++simulated;
            }
        }
    }
    CHECK(simulated >= 200);
}

TEST_CASE("trivial energy buchi MDPs") {
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Player1, 0, "s");
    m.add_edge(0, 0, 0);
    m.finalize();
    auto r = solve_energy_buchi_mdp(m);
    CHECK(r.credits[0] == 0);

    // all-zero weights with even priorities win everywhere at credit 0
    GenParams p;
    p.seed = 321;
    p.states = 5;
    p.max_out = 3;
    p.max_weight = 0;
    p.max_priority = 0;
    Model z = random_instance(p);
    auto orc = oracle::product_energy_oracle(z, 6);
    auto rz = solve_energy_parity(z);
    for (StateId q = 0; q < z.num_states(); ++q) {
        CHECK(rz.credits[q] == 0);
        CHECK(orc.win[q][0]);
    }
}
