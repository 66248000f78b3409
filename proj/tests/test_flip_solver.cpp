#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sshc/flip_solver.hpp"

using namespace sshc;

namespace {

const PiezoSource<> source{100e-12, 100e3, 10e-6, 0};
const SettlingModel<> full = SettlingModel<>::full();

SshcConfig<> equal(int k, double r_on = 100.0) { return SshcConfig<>::equal_bank(k, 100e-12, r_on); }

}  // namespace

TEST_CASE("share_pair examples") {
  auto [a, b] = share_pair(1.0, 100e-12, 0.0, 100e-12, full, 5e-9);
  CHECK(a == doctest::Approx(0.5));
  CHECK(b == doctest::Approx(0.5));

  std::tie(a, b) = share_pair(1.0, 100e-12, 1.0, 100e-12, full, 5e-9);
  CHECK(a == 1.0);
  CHECK(b == 1.0);

  const double tau = 5e-9;
  std::tie(a, b) = share_pair(1.0, 100e-12, 0.0, 100e-12, SettlingModel<>::partial(tau * std::log(2.0)), tau);
  CHECK(a == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(b == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("share_pair rejects non-positive capacitance") {
  CHECK_THROWS_AS(share_pair(1.0, 0.0, 0.0, 1e-12, full, 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(share_pair(1.0, 1e-12, 0.0, -1e-12, full, 1e-9), std::invalid_argument);
}

TEST_CASE("share_pair conserves charge to 4 ulps") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> volts(-50.0, 50.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20000; ++trial) {
    const double c_a = oracle::log_uniform(rng, 1e-13, 1e-8);
    const double c_b = oracle::log_uniform(rng, 1e-13, 1e-8);
    const double v_a = volts(rng);
    const double v_b = volts(rng);
    const double tau = oracle::log_uniform(rng, 1e-10, 1e-6);
    const auto settle = unit(rng) < 0.5 ? full : SettlingModel<>::partial(tau * 5.0 * unit(rng) + 1e-15);
    const auto [a, b] = share_pair(v_a, c_a, v_b, c_b, settle, tau);
    const double before = c_a * v_a + c_b * v_b;
    const double after = c_a * a + c_b * b;
    // ulps of the charge magnitude in play, so near-cancelling totals are measured fairly
    const double scale = std::abs(c_a * v_a) + std::abs(c_b * v_b);
    const double ulp = std::nextafter(scale, INFINITY) - scale;
    CHECK(std::abs(after - before) <= 4 * ulp);
  }
}

TEST_CASE("flip_once hand traces") {
  SUBCASE("k=1 steady state") {
    BankState<> state{1.0, VectorX<double>::Constant(1, 1.0 / 3.0)};
    const auto out = flip_once(state, source, equal(1), full, FlipDirection::down);
    CHECK(out.v_pt == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(out.bank_v[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("k=1 cold start") {
    BankState<> state{1.0, VectorX<double>::Zero(1)};
    const auto out = flip_once(state, source, equal(1), full, FlipDirection::down);
    CHECK(out.v_pt == doctest::Approx(-0.25).epsilon(1e-15));
  }
  SUBCASE("k=0 clears the node") {
    for (double v : {-3.0, 0.0, 0.7, 12.0}) {
      const auto out = flip_once(BankState<>::zero(0, v), source, equal(0), full, FlipDirection::down);
      CHECK(out.v_pt == 0.0);
    }
  }
  SUBCASE("state must match k") {
    CHECK_THROWS_AS(flip_once(BankState<>::zero(2, 1.0), source, equal(3), full, FlipDirection::down),
                    std::invalid_argument);
  }
}

TEST_CASE("steady-state efficiency reproduces the reference values") {
  const auto k1 = steady_state_efficiency(source, equal(1));
  CHECK(k1.converged);
  CHECK(k1.efficiency == doctest::Approx(0.3333).epsilon(0.001 / 0.3333));

  const auto k8 = steady_state_efficiency(source, equal(8));
  CHECK(k8.converged);
  CHECK(k8.efficiency == doctest::Approx(0.8).epsilon(0.001 / 0.8));

  // Brute-force plate-charge iteration gives 0.5 for k = 2.
  const double oracle_k2 = oracle::brute_force_efficiency(100e-12, {100e-12, 100e-12});
  CHECK(oracle_k2 == doctest::Approx(0.5).epsilon(1e-12));
  const auto k2 = steady_state_efficiency(source, equal(2));
  CHECK(k2.efficiency == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("closed form examples") {
  CHECK(closed_form_efficiency(1) == doctest::Approx(1.0 / 3.0));
  CHECK(closed_form_efficiency(8) == doctest::Approx(0.8));
  CHECK(closed_form_efficiency(0) == 0.0);
  CHECK_THROWS_AS(closed_form_efficiency(-1), std::invalid_argument);
}

TEST_CASE("closed form agrees with the iteration for k in 0..32") {
  for (int k = 0; k <= 32; ++k) {
    const auto r = steady_state_efficiency(source, equal(k));
    CHECK(r.converged);
    CHECK(std::abs(r.efficiency - closed_form_efficiency(k)) < 1e-9);
  }
}

TEST_CASE("efficiency is monotone in k for equal banks") {
  double previous = -1;
  for (int k = 0; k <= 32; ++k) {
    const double eta = steady_state_efficiency(source, equal(k)).efficiency;
    CHECK(eta >= previous);
    CHECK(eta >= 0.0);
    CHECK(eta < 1.0);
    previous = eta;
  }
}

TEST_CASE("efficiency is independent of the reference voltage") {
  for (int k : {1, 3, 8}) {
    const double base = steady_state_efficiency(source, equal(k)).efficiency;
    for (double v_ref : {1e-3, 0.37, 5.0, 1e3}) {
      SolverOptions<> options;
      options.v_ref = v_ref;
      CHECK(steady_state_efficiency(source, equal(k), full, options).efficiency ==
            doctest::Approx(base).epsilon(1e-10));
    }
  }
}

TEST_CASE("partial settling: monotone in phase time and converging to full settling") {
  const double r_on = 100.0;
  const double tau = r_on * source.c_p / 2;
  for (int k : {1, 4, 8}) {
    const double eta_full = steady_state_efficiency(source, equal(k, r_on)).efficiency;
    double previous = -1;
    for (double multiple = 0.05; multiple <= 40.0; multiple *= 1.25) {
      const auto r = steady_state_efficiency(source, equal(k, r_on), SettlingModel<>::partial(multiple * tau));
      CHECK(r.converged);
      CHECK(r.efficiency >= previous - 1e-12);
      CHECK(r.efficiency <= eta_full + 1e-12);
      previous = r.efficiency;
    }
    const auto settled = steady_state_efficiency(source, equal(k, r_on), SettlingModel<>::partial(80 * tau));
    CHECK(settled.efficiency == doctest::Approx(eta_full).epsilon(1e-10));
  }
}

TEST_CASE("five time constants per phase keeps the flip close to ideal") {
  const double r_on = 117.6;
  const double tau = r_on * source.c_p / 2;
  const double eta = steady_state_efficiency(source, equal(8, r_on), SettlingModel<>::partial(5 * tau)).efficiency;
  CHECK(eta < 0.8);
  CHECK(eta > 0.75);
}

TEST_CASE("steady state is mirror symmetric between flip directions") {
  for (int k : {1, 2, 5, 8}) {
    const auto steady = steady_state_efficiency(source, equal(k));
    REQUIRE(steady.converged);
    BankState<> state = steady.steady_bank;

    state.v_pt = 1.0;
    const auto after_down = flip_once(state, source, equal(k), full, FlipDirection::down);
    BankState<> next = after_down;
    next.v_pt = -1.0;
    const auto after_up = flip_once(next, source, equal(k), full, FlipDirection::up);

    CHECK(after_up.v_pt == doctest::Approx(-after_down.v_pt).epsilon(1e-9));
    const auto seen_down = bank_seen_from_transducer(after_down, FlipDirection::down);
    const auto seen_up = bank_seen_from_transducer(after_up, FlipDirection::up);
    CHECK((seen_down + seen_up).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("steady state for k=8 holds the bank at a linear voltage ladder") {
  const auto r = steady_state_efficiency(source, equal(8));
  // Capacitor i sits at (k + 1 - i) / (k + 2) after the restore phases.
  for (int i = 1; i <= 8; ++i) {
    CHECK(r.steady_bank.bank_v[i - 1] == doctest::Approx((9.0 - i) / 10.0).epsilon(1e-9));
  }
}

TEST_CASE("direct fixed-point solve matches the iteration and the plate-charge oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 10);
    SshcConfig<> config = equal(k, oracle::log_uniform(rng, 1.0, 1000.0));
    std::vector<double> caps;
    for (int i = 0; i < k; ++i) {
      config.bank[i] = oracle::log_uniform(rng, 10e-12, 1e-9);
      caps.push_back(config.bank[i]);
    }
    const auto direct = steady_state_direct(source, config);
    const auto iterated = steady_state_efficiency(source, config);
    REQUIRE(iterated.converged);
    CHECK(direct.efficiency == doctest::Approx(iterated.efficiency).epsilon(1e-8));
    CHECK(direct.efficiency == doctest::Approx(oracle::brute_force_efficiency(source.c_p, caps)).epsilon(1e-8));

    const auto settle = SettlingModel<>::partial(oracle::log_uniform(rng, 1e-10, 1e-7));
    const auto direct_p = steady_state_direct(source, config, settle);
    const auto iterated_p = steady_state_efficiency(source, config, settle);
    CHECK(direct_p.efficiency == doctest::Approx(iterated_p.efficiency).epsilon(1e-8));
  }
}

TEST_CASE("bigger bank capacitors at fixed k") {
  // Unequal banks are allowed; the result is only compared, not asserted optimal.
  auto config = equal(1);
  config.bank[0] = 1e-9;
  const double eta = steady_state_efficiency(source, config).efficiency;
  CHECK(eta == doctest::Approx(oracle::brute_force_efficiency(100e-12, {1e-9})).epsilon(1e-10));
  CHECK(eta > 0.0);
  CHECK(eta < 1.0);
}

TEST_CASE("non-convergence is reported, not thrown") {
  SolverOptions<> options;
  options.max_iters = 3;
  const auto r = steady_state_efficiency(source, equal(8), full, options);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
}

TEST_CASE("solver preconditions") {
  SolverOptions<> options;
  options.tol = 0;
  CHECK_THROWS_AS(steady_state_efficiency(source, equal(1), full, options), std::invalid_argument);
  options = {};
  options.max_iters = 0;
  CHECK_THROWS_AS(steady_state_efficiency(source, equal(1), full, options), std::invalid_argument);
  CHECK_THROWS_AS(steady_state_efficiency(source, equal(1), SettlingModel<>::partial(0.0)), std::invalid_argument);
}

TEST_CASE("float instantiation") {
  const PiezoSource<float> s;
  const auto r = steady_state_efficiency(s, SshcConfig<float>::equal_bank(8, 100e-12f), SettlingModel<float>::full(),
                                         SolverOptions<float>{1e-6f, 10000, 1.0f});
  CHECK(r.efficiency == doctest::Approx(0.8f).epsilon(1e-4));
}
