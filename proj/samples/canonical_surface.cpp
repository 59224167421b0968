// Canonical correlation and first-attribute contribution over the (r, b)
// plane of the two-attribute homogeneous model, as CSV on stdout. Points
// outside the positive-definite domain are emitted with empty values.
//
//   canonical_surface [rho1=0.3] [rho2=0.1] [step=0.01]

#include <cstdio>
#include <cstdlib>

#include "macnet/similarity.hpp"

int main(int argc, char** argv) {
  const double rho1 = argc > 1 ? std::atof(argv[1]) : 0.3;
  const double rho2 = argc > 2 ? std::atof(argv[2]) : 0.1;
  const double step = argc > 3 ? std::atof(argv[3]) : 0.01;
  const int half = static_cast<int>(1.0 / step + 0.5);
  std::printf("r,b,valid,rho_c,contrib_1\n");
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j) {
      const macnet::K2Params p{i * step, j * step, rho1, rho2};
      if (!macnet::k2_domain(p) || std::abs(p.r) >= 1.0) {
        std::printf("%.4f,%.4f,0,,\n", p.r, p.b);
        continue;
      }
      const auto sol = macnet::canonical_corr_homogeneous(p.sigma_m(), p.sigma_c());
      std::printf("%.4f,%.4f,1,%.10f,%.10f\n", p.r, p.b, sol.rho_c, sol.contrib_i[0]);
    }
  return 0;
}
