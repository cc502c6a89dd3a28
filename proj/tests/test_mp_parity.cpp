#include "qparity/qparity.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace qparity;
namespace qt = qparity::testing;

namespace {

GenParams mp_params(std::uint64_t seed) {
    GenParams p;
    p.seed = seed;
    p.states = 4 + seed % 3;
    p.max_out = 2;
    p.max_weight = 3;
    p.max_priority = 4;
    p.denom_max = 4;
    return p;
}

} // namespace

TEST_CASE("winning end components of the bundled models") {
    Model left = qt::drain();
    auto rep = winning_end_components(left, Rat(0), false);
    CHECK(rep.win == std::vector<StateId>{1}); // the absorbing loop, gain 0
    auto strict = winning_end_components(left, Rat(0), true);
    CHECK(strict.win.empty());

    Model m = qt::recharge();
    auto r1 = winning_end_components(m, Rat(0), false);
    CHECK(r1.win == std::vector<StateId>{0, 1, 2}); // gain 1, least priority 0
    REQUIRE(r1.iterations.size() == 1);
    CHECK(r1.iterations[0].qualified_gain[0] == Rat(1));
}

TEST_CASE("algorithm trace keeps sub-MDP invariants") {
    for (std::uint64_t seed = 900; seed <= 940; ++seed) {
        Model m = random_instance(mp_params(seed));
        auto rep = winning_end_components(m, Rat(0), false);
        CHECK(rep.iterations.size() == m.max_priority / 2 + 1);
        std::vector<bool> removed(m.num_states(), false);
        for (const auto& it : rep.iterations) {
            // attractors are pairwise disjoint across iterations
            for (StateId q : it.attractor) {
                CHECK(!removed[q]);
                removed[q] = true;
            }
            // the surviving state set induces a valid sub-MDP
            if (!it.remaining.empty())
                CHECK_NOTHROW(restrict_to(m, it.remaining));
            // qualified components carry the committed priority as minimum
            for (const auto& u : it.qualified) {
                std::uint32_t least = m.priority(u[0]);
                for (StateId q : u)
                    least = std::min(least, m.priority(q));
                CHECK(least == it.committed);
                CHECK(is_end_component(m, u));
            }
        }
    }
}

TEST_CASE("solve_mp_parity separates the bundled models") {
    Model left = qt::drain();
    auto r = solve_mp_parity(left, Rat(0), false, true);
    CHECK(r.almost_sure == std::vector<StateId>{0, 1});
    REQUIRE(r.values);
    CHECK((*r.values)[0] == Rat(1));

    auto strict = solve_mp_parity(left, Rat(0), true);
    CHECK(strict.almost_sure.empty());

    // boundary: self-loop -1 at priority 0 wins at nu = -1, loses strictly
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Player1, 0, "s");
    m.add_edge(0, 0, -1);
    m.finalize();
    CHECK(solve_mp_parity(m, Rat(-1), false).almost_sure.size() == 1);
    CHECK(solve_mp_parity(m, Rat(-1), true).almost_sure.empty());
}

TEST_CASE("mp-parity answers match the definition-level enumeration") {
    for (std::uint64_t seed = 950; seed <= 1020; ++seed) {
        Model m = random_instance(mp_params(seed));
        CounterRng rng(seed);
        Rat nu(static_cast<std::int64_t>(rng.below(5)) - 2,
               static_cast<std::int64_t>(1 + rng.below(2)));
        bool strict = rng.below(2) == 0;
        auto got = solve_mp_parity(m, nu, strict);
        auto win_union = oracle::enumerate_winning_union(m, nu, strict, false);
        auto expected = oracle::as_reach(m, win_union);
        for (StateId q = 0; q < m.num_states(); ++q)
            CHECK(got.almost_sure_mask[q] == expected[q]);
        // strict answers are contained in non-strict ones
        auto loose = solve_mp_parity(m, nu, false);
        for (StateId q = 0; q < m.num_states(); ++q)
            if (got.almost_sure_mask[q])
                CHECK(loose.almost_sure_mask[q]);
    }
}

TEST_CASE("below the least weight only parity matters") {
    for (std::uint64_t seed = 1030; seed <= 1060; ++seed) {
        Model m = random_instance(mp_params(seed));
        Rat below(-static_cast<std::int64_t>(m.max_weight) - 1);
        auto rep = winning_end_components(m, below, false);
        auto parity = winning_parity_ecs(m);
        CHECK(rep.win == parity.win);
    }
}

TEST_CASE("round strategy on recharge uses the reach and gain witnesses") {
    Model m = qt::recharge();
    auto d = mec_decompose(m);
    RoundStrategy sigma(m, d.components[0], Rat(0));
    CHECK(sigma.sigma_m().at(0) == 0);          // pump the self-loop for gain
    CHECK(sigma.sigma_q().at(0) == 1);          // head for q2 through q1
    CHECK(sigma.gain() == Rat(1));

    sigma.reset(0);
    CHECK(sigma.stage() == RoundStrategy::Stage::SeekPriority);
    auto st = simulate(m, sigma, 0, 42, 10000);
    CHECK(sigma.round() > 1);
    CHECK(st.buchi_visits > 0);
}

TEST_CASE("round strategy degenerates on a singleton component") {
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Player1, 0, "s");
    m.add_edge(0, 0, 2);
    m.finalize();
    auto d = mec_decompose(m);
    RoundStrategy sigma(m, d.components[0], Rat(2));
    sigma.reset(0);
    auto st = simulate(m, sigma, 0, 7, 5000);
    CHECK(st.running_mean == Rat(2));
    CHECK(sigma.k() == 0);
    CHECK(sigma.round() >= 2);
}

TEST_CASE("round counters grow without bound") {
    Model m = qt::recharge();
    auto d = mec_decompose(m);
    RoundStrategy sigma(m, d.components[0], Rat(0));
    sigma.reset(0);
    auto st = simulate(m, sigma, 0, 99, 20000);
    CHECK(sigma.round() >= 3);
    bool floor_holds = sigma.ell() >= sigma.round() * sigma.round() * sigma.round() ||
                       sigma.stage() == RoundStrategy::Stage::SeekPriority;
    CHECK(floor_holds);
    CHECK(sigma.epsilon() == Rat(1, static_cast<std::int64_t>(sigma.round())));
    (void)st;
}

TEST_CASE("round strategy rejects unqualified components") {
    Model left = qt::drain();
    auto d = mec_decompose(left);
    CHECK_THROWS_AS(RoundStrategy(left, d.components[0], Rat(1), false), ModelError);

    Model odd(ModelKind::Mdp);
    odd.add_state(Owner::Player1, 1, "s");
    odd.add_edge(0, 0, 5);
    odd.finalize();
    auto d2 = mec_decompose(odd);
    CHECK_THROWS_AS(RoundStrategy(odd, d2.components[0], Rat(0)), ModelError);
}

TEST_CASE("mp disjunction on hand cases") {
    // even least priority but poor gain still wins
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Player1, 0, "even");
    m.add_edge(0, 0, -5);
    m.finalize();
    auto r = solve_disjunction_mp_parity(m, Rat(0), false);
    CHECK(r.almost_sure.size() == 1);
    CHECK(solve_mp_parity(m, Rat(0), false).almost_sure.empty());

    // odd least priority with high gain wins the other disjunct
    Model m2(ModelKind::Mdp);
    m2.add_state(Owner::Player1, 1, "odd");
    m2.add_edge(0, 0, 5);
    m2.finalize();
    CHECK(solve_disjunction_mp_parity(m2, Rat(0), false).almost_sure.size() == 1);
    CHECK(solve_disjunction_mp_parity(m2, Rat(6), false).almost_sure.empty());
}

TEST_CASE("mp disjunction contains the conjunction and matches enumeration") {
    for (std::uint64_t seed = 1100; seed <= 1150; ++seed) {
        Model m = random_instance(mp_params(seed));
        CounterRng rng(seed);
        Rat nu(static_cast<std::int64_t>(rng.below(5)) - 2);
        bool strict = rng.below(2) == 0;
        auto dis = solve_disjunction_mp_parity(m, nu, strict);
        auto con = solve_mp_parity(m, nu, strict);
        for (StateId q = 0; q < m.num_states(); ++q)
            if (con.almost_sure_mask[q])
                CHECK(dis.almost_sure_mask[q]);
        auto win_union = oracle::enumerate_winning_union(m, nu, strict, true);
        auto expected = oracle::as_reach(m, win_union);
        for (StateId q = 0; q < m.num_states(); ++q)
            CHECK(dis.almost_sure_mask[q] == expected[q]);
    }
}

TEST_CASE("energy disjunction on the bundled models") {
    Model left = qt::drain();
    auto r = solve_disjunction_energy_parity(left);
    CHECK(r.winning == std::vector<StateId>{0, 1});
    CHECK(r.credits[0] == 0); // parity route through the absorbing loop
    CHECK(r.credits[1] == 0);

    // a pure negative cycle with only odd priorities loses
    Model bad(ModelKind::Mdp);
    bad.add_state(Owner::Player1, 1, "x");
    bad.add_state(Owner::Player1, 3, "y");
    bad.add_edge(0, 1, -1);
    bad.add_edge(1, 0, 0);
    bad.finalize();
    CHECK(solve_disjunction_energy_parity(bad).winning.empty());
}

TEST_CASE("energy disjunction contains the energy-parity conjunction") {
    for (std::uint64_t seed = 1200; seed <= 1235; ++seed) {
        Model m = random_instance(mp_params(seed));
        auto dis = solve_disjunction_energy_parity(m);
        auto con = solve_energy_parity(m);
        for (StateId q = 0; q < m.num_states(); ++q) {
            if (!con.winning_mask[q])
                continue;
            CHECK(dis.winning_mask[q]);
            // the disjunction never needs more credit than the conjunction
            CHECK(*dis.credits[q] <= *con.credits[q]);
        }
        // states whose component survives the energy objective alone win too
        for (const auto& comp : mec_decompose(m).components) {
            Restriction sub = restrict_to(m, comp.states);
            Model game(ModelKind::Game);
            for (StateId q = 0; q < sub.model.num_states(); ++q)
                game.add_state(sub.model.is_prob(q) ? Owner::Player2 : Owner::Player1, 0);
            for (const Edge& e : sub.model.edges)
                game.add_edge(e.src, e.dst, e.weight);
            game.finalize();
            auto eg = solve_energy_buchi_game(game);
            for (StateId q = 0; q < sub.model.num_states(); ++q)
                if (eg.credits[q])
                    CHECK(dis.winning_mask[sub.to_orig[q]]);
        }
    }
}
