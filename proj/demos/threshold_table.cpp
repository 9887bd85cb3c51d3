// Prints the initialization threshold for a few learning rates and mixing
// weights, followed by the critical learning rate of each column.

#include <cstdio>
#include <vector>

#include "oica/oica.hpp"

int main() {
  const std::vector<double> taus{0.02, 0.03, 0.04, 0.05, 0.06};
  const std::vector<double> betas{0.0, 0.3, 0.6, 0.8, 1.0};
  const auto table = oica::threshold_table(taus, betas);

  std::printf("%-8s", "tau");
  for (const double b : betas) std::printf("  beta=%-5.1f", b);
  std::printf("\n");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    std::printf("%-8.2f", taus[i]);
    for (std::size_t j = 0; j < betas.size(); ++j) {
      if (const auto& v = table.at(i, j)) std::printf("  %-10.3f", *v);
      else std::printf("  %-10s", "NaN");
    }
    std::printf("\n");
  }

  const auto curve = oica::critical_tau_curve(betas);
  std::printf("%-8s", "tau_bar");
  for (const double t : curve.tau_bar) std::printf("  %-10.4f", t);
  std::printf("\n");
  return 0;
}
