// Writes a two-attribute synthetic dataset (gene.csv, protein.csv) with a
// few planted associations, ready for `macnet infer`.
//
//   synthetic_data OUT_DIR [nodes=20] [samples=60] [seed=1]

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "macnet/io.hpp"
#include "macnet/random.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s OUT_DIR [nodes] [samples] [seed]\n", argv[0]);
    return 1;
  }
  const std::filesystem::path out = argv[1];
  const std::size_t nodes = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 20;
  const std::size_t n = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 60;
  const std::uint64_t seed = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 1;

  macnet::Engine eng = macnet::substream(seed, {});
  std::normal_distribution<double> nd;
  // Node 2k+1 follows node 2k for the first few k: gene-driven, protein-driven
  // and jointly driven pairs.
  const double r = 0.3;
  std::vector<macnet::Matrix> x(nodes, macnet::Matrix(n, 2));
  for (auto& m : x)
    for (std::size_t s = 0; s < n; ++s) {
      m(s, 0) = nd(eng);
      m(s, 1) = r * m(s, 0) + std::sqrt(1 - r * r) * nd(eng);
    }
  const double planted[][2] = {{0.8, 0.1}, {0.1, 0.8}, {0.7, 0.7}, {0.75, 0.2}, {0.2, 0.75}};
  for (std::size_t k = 0; k < 5 && 2 * k + 1 < nodes; ++k)
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t a = 0; a < 2; ++a) {
        const double rho = planted[k][a];
        x[2 * k + 1](s, a) = rho * x[2 * k](s, a) + std::sqrt(1 - rho * rho) * x[2 * k + 1](s, a);
      }

  const char* names[] = {"gene", "protein"};
  for (std::size_t a = 0; a < 2; ++a) {
    std::string csv = "node_id";
    for (std::size_t s = 1; s <= n; ++s) csv += ",s" + std::to_string(s);
    csv += '\n';
    for (std::size_t v = 0; v < nodes; ++v) {
      csv += "node" + std::to_string(v);
      for (std::size_t s = 0; s < n; ++s) csv += ',' + macnet::fmt_double(x[v](s, a));
      csv += '\n';
    }
    macnet::write_file_atomic(out / (std::string(names[a]) + ".csv"), csv);
  }
  std::printf("wrote %zu nodes x %zu samples to %s\n", nodes, n, out.string().c_str());
  return 0;
}
