#include "qparity/qparity.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace qparity;
namespace qt = qparity::testing;

TEST_CASE("recharge is a valid MDP with the expected shape") {
    Model m = qt::recharge();
    CHECK(validate(m).empty());
    CHECK(m.num_states() == 3);
    CHECK(m.num_edges() == 5);
    CHECK(m.max_weight == 10);
    CHECK(m.max_priority == 1);
    CHECK(m.owner(1) == Owner::Probabilistic);
}

TEST_CASE("validate reports totality violations") {
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Player1, 0, "s");
    m.add_state(Owner::Player1, 0, "dead");
    m.add_edge(0, 1, 0);
    m.finalize();
    auto diags = validate(m);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("totality") != std::string::npos);
    CHECK(diags[0].message.find("dead") != std::string::npos);
}

TEST_CASE("validate reports distributions that do not sum to one") {
    Model m(ModelKind::Mdp);
    m.add_state(Owner::Probabilistic, 0, "p");
    m.add_state(Owner::Player1, 0, "t");
    m.add_edge(0, 0, 0, Rat(1, 2));
    m.add_edge(0, 1, 0, Rat(1, 3));
    m.add_edge(1, 1, 0);
    m.finalize();
    auto diags = validate(m);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("sum") != std::string::npos);
}

TEST_CASE("energy level sums edge weights along a prefix") {
    Model m = qt::recharge();
    // q0 q0 q0 q1: two pumps then the -10 entry
    CHECK(energy_level(m, std::vector<StateId>{0, 0, 0, 1}) == -8);
    CHECK(energy_level(m, std::vector<StateId>{2}) == 0);
    // the cost-20 attempt: q0 q1 q2 q0
    CHECK(energy_level(m, std::vector<StateId>{0, 1, 2, 0}) == -20);
    CHECK_THROWS_AS(energy_level(m, std::vector<StateId>{1, 1}), std::invalid_argument);
}

TEST_CASE("running mean divides by the number of steps") {
    Model m = qt::recharge();
    CHECK(running_mean(m, std::vector<StateId>{0, 0, 0}) == Rat(1));
    Model left = qt::drain();
    CHECK(running_mean(left, std::vector<StateId>{0, 0, 0, 1}) == Rat(-2, 3));
    Model loop(ModelKind::Mdp);
    loop.add_state(Owner::Player1, 0, "z");
    loop.add_edge(0, 0, 0);
    loop.finalize();
    CHECK(running_mean(loop, std::vector<StateId>{0, 0, 0, 0, 0, 0}) == Rat(0));
    CHECK_THROWS_AS(running_mean(m, std::vector<StateId>{0}), std::invalid_argument);
}
