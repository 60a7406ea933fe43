// Plants an endpoint pair at distance pi/2 on St(200, 4) and recovers it.

#include <iomanip>
#include <iostream>
#include <numbers>

#include "stiefel/stiefel.hpp"

int main() {
  using namespace stiefel;

  GeneratorSpec spec{200, 4, 0.5 * std::numbers::pi, /*seed=*/7, /*trials=*/1};
  SolverOptions options;
  options.tol = 1e-10;
  const PlantedPair pair = pair_with_distance(spec, 0, options);

  const SsafReport report = solve_log(pair.problem);
  std::cout << std::setprecision(12) << "planted distance   " << canonical_norm(pair.planted) << '\n'
            << "recovered distance " << report.distance << '\n'
            << "iterations         " << report.iterations << (report.converged ? "" : " (not converged)") << '\n';
  for (std::size_t k = 0; k < report.update_norm_history.size(); ++k) {
    std::cout << "  k=" << k << "  ||F||=" << std::scientific << std::setprecision(3)
              << report.residual_norm_history[k] << "  ||dxi||=" << report.update_norm_history[k] << '\n';
  }
  return report.converged ? 0 : 1;
}
