#ifndef BLOCKZOO_ADVISOR_HPP
#define BLOCKZOO_ADVISOR_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace blockzoo {

/// Inputs for the step-size / radius / iteration-count advisor. The
/// smoothness and bound constants are user-supplied estimates over the
/// sublevel set; the advisor never tries to learn them.
struct AdvisorInput {
  double epsilon = 0.0;     // target mean-squared-gradient accuracy
  double alpha = 0.0;       // sublevel-set inflation, alpha >= 2 + g + 1/nu + nu*g
  double gamma_conf = 0.0;  // confidence parameter (gamma)
  double nu = 0.0;          // confidence parameter

  double phi0 = 0.0;    // gradient Lipschitz bound over the sublevel set
  double lambda0 = 0.0; // value Lipschitz bound
  double rho0 = 0.0;    // smoothness radius bound
  double c = 0.0;       // observation bound constant (h_i <= c f_i)

  double f_x0 = 0.0;    // f(x^0)
  double f0_x0 = 0.0;   // max_i alpha_i f_i(x^0)

  int N0 = 0;           // largest cluster size
  int q_plus = 0;       // largest block dimension
  double r_minus = 0.0; // smallest smoothing radius (0 = use the advised radius)

  std::optional<int> T0;          // schedule period bound, enables the window caps
  std::optional<double> eps_bar;  // window-cap accuracy parameter
};

struct AdvisorOutput {
  long iterations = 0;          // T
  double step_size = 0.0;       // eta
  double radius_cap = 0.0;      // advised r_i
  double gradient_bound = 0.0;  // delta
  double failure_probability = 0.0;

  // Extrapolation weight caps: w_i^k <= cap / ||delta||.
  double w_cap_eta = 0.0;            // eta^{3/2}
  double w_cap_rho_coeff = 0.0;      // rho0 / 2, divided by sqrt(N_i) at use site
  std::optional<double> w_cap_window_coeff;  // eps_bar / (2 (T0-1)), per N_i
  std::optional<double> step_size_window_cap;
};

/// Computes the iteration count, step size, smoothing-radius cap, gradient
/// bound, and extrapolation caps from the supplied constants. Throws when
/// the confidence hypothesis on alpha is violated.
inline AdvisorOutput advise_parameters(const AdvisorInput& a) {
  const double hypothesis = 2.0 + a.gamma_conf + 1.0 / a.nu + a.nu * a.gamma_conf;
  if (!(a.alpha >= hypothesis))
    throw std::invalid_argument(
        "advise_parameters: requires alpha >= 2 + gamma + 1/nu + nu*gamma (= " +
        std::to_string(hypothesis) + ")");
  if (a.epsilon <= 0.0 || a.phi0 <= 0.0 || a.rho0 <= 0.0 || a.c <= 0.0 ||
      a.N0 < 1 || a.q_plus < 1 || a.f_x0 <= 0.0)
    throw std::invalid_argument("advise_parameters: invalid constants");

  AdvisorOutput out;
  out.failure_probability = hypothesis / a.alpha;

  out.radius_cap = std::min(
      a.rho0 / 2.0,
      (1.0 / (2.0 * a.phi0)) * std::sqrt(a.gamma_conf * a.epsilon / (a.alpha * a.N0)));

  const double r_minus = a.r_minus > 0.0 ? a.r_minus : out.radius_cap;
  if (r_minus <= 0.0) throw std::invalid_argument("advise_parameters: r_minus <= 0");
  out.gradient_bound = (a.q_plus / r_minus) * a.c * (a.f0_x0 + a.lambda0 * a.rho0);

  const double delta = out.gradient_bound;
  double eta = std::min({a.rho0 / (2.0 * delta * std::sqrt(double(a.N0))),
                         2.0 * a.alpha * a.f_x0 / (a.gamma_conf * a.epsilon),
                         a.gamma_conf * a.epsilon /
                             (2.0 * a.alpha * a.N0 *
                              (a.phi0 * delta * delta + 4.0 * a.phi0 * a.phi0 +
                               a.phi0 + 4.0))});
  if (a.T0 && a.eps_bar) {
    out.step_size_window_cap = *a.eps_bar / (2.0 * delta * (*a.T0 - 1) * a.N0);
    eta = std::min(eta, *out.step_size_window_cap);
    out.w_cap_window_coeff = *a.eps_bar / (2.0 * (*a.T0 - 1));
  }
  out.step_size = eta;
  out.iterations =
      long(std::ceil(2.0 * a.alpha * a.nu * a.f_x0 / (eta * a.epsilon)));
  out.w_cap_eta = std::pow(eta, 1.5);
  out.w_cap_rho_coeff = a.rho0 / 2.0;
  return out;
}

}  // namespace blockzoo

#endif  // BLOCKZOO_ADVISOR_HPP
