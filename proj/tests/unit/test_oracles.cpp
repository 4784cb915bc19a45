#include <doctest.h>

#include <sstream>

#include "cperc/eval.hpp"
#include "cperc/suites.hpp"
#include "oracles.hpp"

using namespace cperc;

TEST_SUITE("oracles") {
  TEST_CASE("every oracle agrees with the library") {
    for (const auto& name : oracle::names()) {
      std::ostringstream out;
      CAPTURE(name);
      CHECK(oracle::run(name, out));
      INFO(out.str());
    }
  }

  TEST_CASE("perceptron learning count of separable dichotomies") {
    CHECK(oracle::separable_dichotomies(1).size() == 4);
    CHECK(oracle::separable_dichotomies(2).size() == 14);
    CHECK(oracle::separable_dichotomies(3).size() == 104);
  }

  TEST_CASE("toy grid search agrees with the sweep margins") {
    const bool xor_high[4] = {false, true, true, false};
    const auto g = oracle::toy_grid_search(xor_high, 0.58, 0.34);
    double best = -1e9;
    for (const auto& m : toy_margins())
      if (m.task == "xor") best = std::max(best, m.margin);
    CHECK(g.margin == doctest::Approx(best).epsilon(1e-12));
  }

  TEST_CASE("unknown oracle") {
    std::ostringstream out;
    CHECK_THROWS_WITH(oracle::run("nope", out), doctest::Contains("prbs8"));
  }
}
