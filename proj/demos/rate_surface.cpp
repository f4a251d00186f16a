// Sweeps the rate function J(theta, lambda, mu) across the phase transition
// at theta = T_mu(lambda) and prints the regime switch, then contrasts the
// top-direction rate with the log-moment limit of the bottom direction to
// show that the limit depends on where the theta weight sits.

#include <cstdio>
#include <sphint/sphint.hpp>

int main() {
  using namespace sphint;
  const DiscreteMeasure mu({1.0, 2.0}, {0.5, 0.5});
  const double lambda = 2.5;
  const double t_at_lambda = t_transform(mu, lambda).value;
  std::printf("bulk: 1/2 delta_1 + 1/2 delta_2, spike lambda = %.3g\n", lambda);
  std::printf("phase boundary T_mu(lambda) = %.6f\n\n", t_at_lambda);
  std::printf("%10s %14s %14s %14s  %s\n", "theta", "J", "c", "d", "regime");
  for (double theta = 0.0; theta <= 4.0 + 1e-9; theta += 0.25) {
    const RateComponent rc = rate_single(theta, lambda, mu);
    std::printf("%10.2f %14.8f %14.8f %14.8f  %s\n", theta, rc.j_value, rc.c, rc.d,
                regime_name(rc.regime));
  }

  std::printf("\nnegative side, lower spike lambda = 0.4:\n");
  for (double theta = -2.0; theta <= 0.0 + 1e-9; theta += 0.5) {
    const RateComponent rc = rate_single(theta, 0.4, mu);
    std::printf("%10.2f %14.8f %14.8f  %s\n", theta, rc.j_value, rc.c, regime_name(rc.regime));
  }

  // Position dependence of the limit: for mu = delta_1 with an upper spike at
  // 3, theta on the top coordinate sees J(1, 3, delta_1) = log(9/8) while
  // theta on the bottom coordinate sees int log x dmu = 0.
  const DiscreteMeasure point = DiscreteMeasure::point_mass(1.0);
  const double top = rate_single(1.0, 3.0, point).j_value;
  std::printf("\nspiked point mass, lambda = 3:\n");
  std::printf("  top-direction rate    J(1, 3, delta_1) = %.8f  (log(9/8) = %.8f)\n", top,
              std::log(9.0 / 8.0));
  std::printf("  bottom-direction rate int log x dmu    = %.8f\n", point.log_moment());
  return 0;
}
