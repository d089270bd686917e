// Prints D(S_n) for each built-in continuous law.

#include <cstdio>

#include "nongauss/nongauss.hpp"

int main() {
  using namespace nongauss;
  for (const auto& law : {SourceDistribution::uniform(), SourceDistribution::laplace(),
                          SourceDistribution::exponential(), SourceDistribution::default_mixture()}) {
    const auto seq = sum_divergence_sequence(law, 256, default_grid(law));
    std::printf("%s\n", law.name().c_str());
    for (const auto& [n, d] : seq.divergence) std::printf("  n=%4d  D=%.6e\n", n, d);
    const auto fit = rate_fit(seq.divergence, 0.5);
    std::printf("  slope %.3f +- %.3f\n", fit.slope, fit.stderr_slope);
  }
}
