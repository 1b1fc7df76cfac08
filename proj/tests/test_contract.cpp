#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "elva/contract.hpp"

using namespace elva;

namespace {
ElvaContract base_contract(double g = 0.01, double c = 0.15, double gamma = 0.02) {
  return ElvaContract::make(25, 1.0, g, c, 0.01, 0.02, gamma, 30);
}
}  // namespace

TEST_CASE("death benefit clamps the fund between the growth envelopes") {
  const auto c = base_contract();
  CHECK(death_benefit(c, 10, 1.0) == doctest::Approx(std::exp(0.1)).epsilon(1e-14));
  CHECK(death_benefit(c, 10, 100.0) == doctest::Approx(std::exp(1.5)).epsilon(1e-14));
  CHECK(death_benefit(c, 10, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("surrender benefit applies the penalty below the cap") {
  const auto c = base_contract();
  CHECK(surrender_benefit(c, 10, 2.0) == doctest::Approx(0.98 * 2.0).epsilon(1e-14));
  CHECK(surrender_benefit(c, 25, 0.5) ==
        doctest::Approx(death_benefit(c, 25, 0.5)).epsilon(1e-15));
  const auto locked = base_contract(0.01, 0.15, 1.0);
  CHECK(surrender_benefit(locked, 10, 2.0) == 0.0);
}

TEST_CASE("effective dividend folds the fee into the yield") {
  const auto c = base_contract();
  CHECK(effective_dividend(c, 3) ==
        doctest::Approx(0.030202707317519448).epsilon(1e-13));
  const auto free = ElvaContract::make(25, 1.0, 0.01, 0.15, 0.01, 0.0, 0.02, 30);
  CHECK(effective_dividend(free, 0) == doctest::Approx(0.01).epsilon(1e-15));
  const auto heavy = ElvaContract::make(25, 1.0, 0.01, 0.15, 0.0, 0.5, 0.02, 30);
  CHECK(effective_dividend(heavy, 0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("benefit orderings hold on a fund grid") {
  const auto c = base_contract();
  for (int m = 1; m < 25; ++m) {
    for (double f = 0.05; f < 40.0; f *= 1.7) {
      CHECK(death_benefit(c, m, f) >= surrender_benefit(c, m, f));
      // monotone in the fund
      CHECK(death_benefit(c, m, f * 1.01) >= death_benefit(c, m, f));
    }
  }
  const auto higher_floor = base_contract(0.02, 0.15);
  const auto higher_cap = base_contract(0.01, 0.20);
  const auto harsher = base_contract(0.01, 0.15, 0.10);
  for (double f : {0.2, 0.9, 1.5, 4.0, 30.0}) {
    CHECK(death_benefit(higher_floor, 10, f) >= death_benefit(base_contract(), 10, f));
    CHECK(death_benefit(higher_cap, 10, f) >= death_benefit(base_contract(), 10, f));
    CHECK(surrender_benefit(harsher, 10, f) <= surrender_benefit(base_contract(), 10, f));
  }
}

TEST_CASE("contract parameter validation") {
  CHECK_THROWS_AS(ElvaContract::make(25, 1.0, 0.05, 0.01, 0.01, 0.02, 0.02, 30),
                  std::invalid_argument);
  CHECK_THROWS_AS(ElvaContract::make(25, 1.0, 0.01, 0.15, 0.01, 1.0, 0.02, 30),
                  std::invalid_argument);
  CHECK_THROWS_AS(ElvaContract::make(25, 1.0, 0.01, 0.15, 0.01, 0.02, 1.5, 30),
                  std::invalid_argument);
  CHECK_THROWS_AS(ElvaContract::make(0, 1.0, 0.01, 0.15, 0.01, 0.02, 0.02, 30),
                  std::invalid_argument);
}

TEST_CASE("conditional death probabilities") {
  MortalityTable table({0.1, 0.18, 0.2});
  CHECK(table.conditional_death_prob(1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(table.conditional_death_prob(2) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(table.survival_to(2) == doctest::Approx(0.72).epsilon(1e-14));

  MortalityTable none({0.0, 0.0, 0.0});
  for (int m = 1; m <= 3; ++m) CHECK(none.conditional_death_prob(m) == 0.0);

  MortalityTable sure({1.0});
  CHECK_THROWS_AS(sure.conditional_death_prob(2), std::domain_error);
}

TEST_CASE("mortality csv loading and validation") {
  const char* path = "mort_test.csv";
  {
    std::ofstream f(path);
    f << "m,p_m\n";
    for (int m = 1; m <= 100; ++m) f << m << "," << 0.002 << "\n";
  }
  const auto table = MortalityTable::load_csv(path);
  CHECK(table.horizon() == 100);
  CHECK(table.mass(40) == doctest::Approx(0.002));
  CHECK(table.mass(101) == 0.0);
  std::remove(path);

  {
    std::ofstream f(path);
    f << "m,p_m\n1,0.01\n2,-0.01\n";
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(MortalityTable::load_csv(path)),
                       doctest::Contains("row 3"), std::runtime_error);
  std::remove(path);

  {
    std::ofstream f(path);
    f << "m,p_m\n1,0.6\n2,0.45\n";
  }
  CHECK_THROWS_AS(static_cast<void>(MortalityTable::load_csv(path)),
                  std::runtime_error);
  std::remove(path);
}
