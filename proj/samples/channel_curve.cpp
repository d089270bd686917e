// D(q) and the MMSE gap of a Rademacher input, with the derivative identity
// checked at a few SNRs.

#include <cstdio>

#include "nongauss/nongauss.hpp"

int main() {
  using namespace nongauss;
  const auto law = SourceDistribution::rademacher();
  const auto grid = default_grid(law);
  const auto curve = divergence_curve(law, default_snr_grid(), grid);
  std::printf("%10s %12s %12s %12s\n", "q", "mmse", "mmse_G", "D");
  for (std::size_t i = 0; i < curve.q.size(); i += 4) {
    std::printf("%10.4g %12.6f %12.6f %12.6e\n", curve.q[i], curve.mmse_x[i],
                curve.mmse_gaussian[i], curve.divergence[i]);
  }
  for (double q : {0.1, 1.0, 4.0}) {
    const auto c = immse_identity_check(law, SnrValue(q), default_fd_step(q), grid);
    std::printf("q=%g  gap/2=%.8f  dD/dq=%.8f  residual=%.2e\n", q, c.lhs, c.rhs, c.residual);
  }
}
