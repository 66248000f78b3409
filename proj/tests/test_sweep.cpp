#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "sshc/sweep.hpp"
#include "sshc/timing.hpp"

using namespace sshc;

namespace {

Axis linear(std::string name, double lo, double hi, int steps) { return {std::move(name), lo, hi, steps}; }

std::string error_of(const SweepSpec& spec) {
  try {
    validate_sweep(spec);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("axis grids") {
  CHECK(linear("k", 1, 8, 8).grid() == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(linear("v_s", 0.5, 0.5, 1).grid() == std::vector<double>{0.5});
  const Axis log_axis{"c_p", 1e-12, 1e-9, 4, Spacing::log};
  const auto g = log_axis.grid();
  REQUIRE(g.size() == 4);
  CHECK(g.front() == 1e-12);
  CHECK(g.back() == 1e-9);
  CHECK(g[1] == doctest::Approx(1e-11));
  Axis explicit_axis{"k", 0, 0, 1};
  explicit_axis.values = {3, 1, 2};
  CHECK(explicit_axis.grid() == std::vector<double>{3, 1, 2});
}

TEST_CASE("objective names round-trip") {
  for (auto o : {Objective::flip_efficiency, Objective::t_flip, Objective::max_r_on, Objective::max_k,
                 Objective::p_out, Objective::p_out_at_opt_vs, Objective::bank_area}) {
    CHECK(parse_objective(to_string(o)) == o);
  }
  CHECK_FALSE(parse_objective("speed").has_value());
}

TEST_CASE("set_parameter") {
  DesignPoint p;
  set_parameter(p, "c_p", 50e-12);
  set_parameter(p, "k", 3);
  set_parameter(p, "mim_density", 4);
  CHECK(p.source.c_p == 50e-12);
  CHECK(p.k == 3);
  CHECK(p.process.mim_density == 4);
  CHECK_THROWS_AS(set_parameter(p, "k", 2.5), std::invalid_argument);
  CHECK_THROWS_AS(set_parameter(p, "inductance", 1), std::invalid_argument);
}

TEST_CASE("sweep validation names the offending axis") {
  SweepSpec spec{{linear("k", 1, 8, 0)}, {}, {Objective::flip_efficiency}};
  CHECK(error_of(spec) == "axis 'k': steps must be at least 1");

  spec.axes = {linear("k", 1, 8, 8), linear("k", 1, 2, 2)};
  CHECK(error_of(spec) == "axis 'k': duplicate axis name");

  spec.axes = {linear("voltage", 1, 2, 2)};
  CHECK(error_of(spec) == "axis 'voltage': unknown parameter");

  spec.axes = {linear("k", 1.5, 2.5, 2)};
  CHECK(error_of(spec).rfind("axis 'k': ", 0) == 0);

  spec.axes = {Axis{"c_p", 0, 1e-9, 3, Spacing::log}};
  CHECK(error_of(spec) == "axis 'c_p': log spacing needs a positive min");

  spec.axes = {linear("k", 1, 8, 8)};
  spec.objectives.clear();
  CHECK_FALSE(error_of(spec).empty());

  CHECK_THROWS_AS(run_sweep(SweepSpec{{linear("k", 1, 8, 0)}, {}, {Objective::t_flip}}), std::invalid_argument);
}

TEST_CASE("efficiency sweep over k") {
  const SweepSpec spec{{linear("k", 1, 8, 8)}, {}, {Objective::flip_efficiency}};
  const Table t = run_sweep(spec);
  CHECK(t.columns == std::vector<std::string>{"k", "flip_efficiency"});
  REQUIRE(t.rows.size() == 8);
  for (int k = 1; k <= 8; ++k) {
    const auto& row = t.rows[static_cast<std::size_t>(k - 1)];
    CHECK(row[0].value == k);
    REQUIRE(row[1].value.has_value());
    CHECK(std::abs(*row[1].value - k / (k + 2.0)) < 1e-9);
  }
}

TEST_CASE("maximum ON-resistance at the reference point") {
  Axis k_axis{"k", 0, 0, 1};
  k_axis.values = {8};
  const Table t = run_sweep({{k_axis}, {}, {Objective::max_r_on}});
  REQUIRE(t.rows.size() == 1);
  CHECK(*t.rows[0][1].value == doctest::Approx(117.6).epsilon(1e-3));
}

TEST_CASE("ON-resistance limit scales inversely with C_P") {
  Axis c{"c_p", 0, 0, 1};
  c.values = {50e-12, 100e-12, 200e-12};
  const Table t = run_sweep({{c}, {}, {Objective::max_r_on}});
  const double base = *t.rows[1][1].value;
  CHECK(*t.rows[0][1].value / base == doctest::Approx(2.0));
  CHECK(*t.rows[2][1].value / base == doctest::Approx(0.5));
}

TEST_CASE("markers for unbounded and infeasible points") {
  DesignPoint p;
  p.r_on = 0;
  CHECK(evaluate(p, Objective::max_k).marker == "unbounded");
  p.r_on = 1e6;
  CHECK(evaluate(p, Objective::max_k).marker == infeasible_marker);
  p.r_on = 117.6;
  CHECK(evaluate(p, Objective::max_k).value == 8);
  p.solver.max_iters = 2;
  CHECK(evaluate(p, Objective::flip_efficiency).marker == "nonconverged");
  p = {};
  p.source.v_d = 100;
  CHECK(evaluate(p, Objective::p_out_at_opt_vs).marker == infeasible_marker);
}

TEST_CASE("row order and count") {
  const SweepSpec spec{{linear("k", 1, 3, 3), linear("c_p", 50e-12, 150e-12, 3), linear("settle_factor", 3, 5, 2)},
                      {},
                      {Objective::t_flip, Objective::bank_area}};
  const Table t = run_sweep(spec);
  REQUIRE(t.rows.size() == 18);
  // Last axis fastest.
  CHECK(t.rows[0][0].value == 1);
  CHECK(t.rows[0][2].value == 3);
  CHECK(t.rows[1][2].value == 5);
  CHECK(t.rows[2][1].value == doctest::Approx(100e-12));
  CHECK(t.rows[6][0].value == 2);
}

TEST_CASE("sweep output does not depend on the thread count") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const int steps_a = 1 + static_cast<int>(rng() % 6);
    const int steps_b = 1 + static_cast<int>(rng() % 6);
    const SweepSpec spec{{linear("k", 0, steps_a - 1, steps_a), linear("r_on", 10, 500, steps_b)},
                        {},
                        {Objective::flip_efficiency, Objective::max_k, Objective::p_out_at_opt_vs}};
    const Table serial = run_sweep(spec, 1);
    CHECK(serial.rows.size() == static_cast<std::size_t>(steps_a * steps_b));
    for (unsigned threads : {2u, 3u, 7u, 64u}) {
      const Table parallel = run_sweep(spec, threads);
      CHECK(parallel.columns == serial.columns);
      CHECK(parallel.rows == serial.rows);
    }
  }
}

TEST_CASE("best stage count under timing and area") {
  const PiezoSource<> source;

  SUBCASE("both constraints bind at the reference point") {
    const auto c = best_stage_count({117.6, 0.4}, source);
    CHECK(c.feasible);
    CHECK(c.k == 8);
    CHECK(c.timing_binding);
    CHECK(c.area_binding);
  }
  SUBCASE("timing-bound") {
    const auto c = best_stage_count({max_on_resistance(100e-12, 10e-6, 1), 10.0}, source);
    CHECK(c.k == 1);
    CHECK(c.timing_binding);
    CHECK_FALSE(c.area_binding);
  }
  SUBCASE("no area leaves only the clearing phase") {
    const auto c = best_stage_count({117.6, 0.0}, source);
    CHECK(c.feasible);
    CHECK(c.k == 0);
    CHECK_FALSE(c.note.empty());
  }
  SUBCASE("ON-resistance too large for any flip") {
    const auto c = best_stage_count({1e6, 1.0}, source);
    CHECK_FALSE(c.feasible);
    CHECK_FALSE(c.note.empty());
  }
  SUBCASE("the choice never breaks either budget") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> r(1.0, 3000.0), a(0.0, 2.0);
    for (int trial = 0; trial < 2000; ++trial) {
      const StageConstraints limits{r(rng), a(rng)};
      const auto c = best_stage_count(limits, source);
      if (!c.feasible) continue;
      CHECK(within_budget(c.t_flip, c.t_budget));
      CHECK(within_budget(c.area_mm2, limits.area_budget_mm2));
      // One more stage would break at least one budget.
      const double t_next = total_flip_time(limits.r_on_available, source.c_p, c.k + 1);
      const double a_next = bank_area(SshcConfig<>::equal_bank(c.k + 1, source.c_p));
      CHECK((!within_budget(t_next, c.t_budget) || !within_budget(a_next, limits.area_budget_mm2)));
    }
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(best_stage_count({0.0, 1.0}, source), std::invalid_argument);
    CHECK_THROWS_AS(best_stage_count({100.0, -1.0}, source), std::invalid_argument);
  }
}
