#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "blockzoo/advisor.hpp"

using namespace blockzoo;

namespace {

AdvisorInput base_input() {
  AdvisorInput a;
  a.epsilon = 0.1;
  a.alpha = 20.0;
  a.gamma_conf = 1.0;
  a.nu = 1.0;
  a.phi0 = 1.0;
  a.lambda0 = 1.0;
  a.rho0 = 1.0;
  a.c = 1.0;
  a.f_x0 = 1.0;
  a.f0_x0 = 1.0;
  a.N0 = 2;
  a.q_plus = 2;
  a.r_minus = 0.1;
  return a;
}

}  // namespace

TEST_CASE("failure probability example") {
  const AdvisorOutput out = advise_parameters(base_input());
  REQUIRE(out.failure_probability == Catch::Approx(0.25));
}

TEST_CASE("gradient bound arithmetic") {
  // (q+/r-) c (f0 + lambda0 rho0) = (2/0.1) * 1 * 2 = 40
  const AdvisorOutput out = advise_parameters(base_input());
  REQUIRE(out.gradient_bound == Catch::Approx(40.0));
}

TEST_CASE("alpha hypothesis violation names the inequality") {
  AdvisorInput a = base_input();
  a.alpha = 3.0;  // < 2 + 1 + 1 + 1 = 5
  try {
    advise_parameters(a);
    FAIL("expected exception");
  } catch (const std::invalid_argument& e) {
    REQUIRE(std::string(e.what()).find("alpha >= 2 + gamma + 1/nu + nu*gamma") !=
            std::string::npos);
  }
}

TEST_CASE("iteration count is the Theorem-1 ceiling") {
  const AdvisorInput a = base_input();
  const AdvisorOutput out = advise_parameters(a);
  const double expect =
      std::ceil(2.0 * a.alpha * a.nu * a.f_x0 / (out.step_size * a.epsilon));
  REQUIRE(double(out.iterations) == Catch::Approx(expect));
}

TEST_CASE("doubling the initial cost doubles T when eta is unaffected") {
  // With delta = 40 the third eta bound dominates and does not involve f(x0).
  AdvisorInput a = base_input();
  const AdvisorOutput out1 = advise_parameters(a);
  a.f_x0 *= 2.0;
  const AdvisorOutput out2 = advise_parameters(a);
  REQUIRE(out2.step_size == Catch::Approx(out1.step_size));
  REQUIRE(out2.iterations == Catch::Approx(2.0 * double(out1.iterations)).epsilon(1e-9));
}

TEST_CASE("step size obeys all three bounds") {
  const AdvisorInput a = base_input();
  const AdvisorOutput out = advise_parameters(a);
  const double delta = out.gradient_bound;
  REQUIRE(out.step_size <= a.rho0 / (2.0 * delta * std::sqrt(double(a.N0))) + 1e-15);
  REQUIRE(out.step_size <=
          2.0 * a.alpha * a.f_x0 / (a.gamma_conf * a.epsilon) + 1e-15);
  REQUIRE(out.step_size <=
          a.gamma_conf * a.epsilon /
                  (2.0 * a.alpha * a.N0 *
                   (a.phi0 * delta * delta + 4.0 * a.phi0 * a.phi0 + a.phi0 + 4.0)) +
              1e-15);
  REQUIRE(out.w_cap_eta == Catch::Approx(std::pow(out.step_size, 1.5)));
  REQUIRE(out.w_cap_rho_coeff == Catch::Approx(0.5));
}

TEST_CASE("radius cap formula") {
  const AdvisorInput a = base_input();
  const AdvisorOutput out = advise_parameters(a);
  const double expect = std::min(
      a.rho0 / 2.0, 0.5 / a.phi0 *
                        std::sqrt(a.gamma_conf * a.epsilon / (a.alpha * a.N0)));
  REQUIRE(out.radius_cap == Catch::Approx(expect));
}

TEST_CASE("window caps appear only when the schedule bound is supplied") {
  AdvisorInput a = base_input();
  REQUIRE(!advise_parameters(a).w_cap_window_coeff.has_value());
  a.T0 = 3;
  a.eps_bar = 0.2;
  const AdvisorOutput out = advise_parameters(a);
  REQUIRE(out.w_cap_window_coeff.has_value());
  REQUIRE(*out.w_cap_window_coeff == Catch::Approx(0.2 / 4.0));
  REQUIRE(out.step_size_window_cap.has_value());
  REQUIRE(*out.step_size_window_cap ==
          Catch::Approx(0.2 / (2.0 * out.gradient_bound * 2.0 * a.N0)));
  REQUIRE(out.step_size <= *out.step_size_window_cap + 1e-18);
}

TEST_CASE("zero r_minus falls back to the advised radius cap") {
  AdvisorInput a = base_input();
  a.r_minus = 0.0;
  const AdvisorOutput out = advise_parameters(a);
  REQUIRE(out.gradient_bound ==
          Catch::Approx((a.q_plus / out.radius_cap) * a.c *
                        (a.f0_x0 + a.lambda0 * a.rho0)));
}

TEST_CASE("invalid constants are rejected") {
  AdvisorInput a = base_input();
  a.epsilon = 0.0;
  REQUIRE_THROWS_AS(advise_parameters(a), std::invalid_argument);
  a = base_input();
  a.N0 = 0;
  REQUIRE_THROWS_AS(advise_parameters(a), std::invalid_argument);
}
