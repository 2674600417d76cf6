// Regenerates the pinned noise-table artifacts: prints the tiny golden table
// entries (to paste into the selftest constants) and writes the golden dump
// file used by `aeelab selftest --golden`.
#include <cstdio>

#include "aeelab/noise.hpp"

int main(int argc, char** argv) {
  using namespace aeelab;
  const SpectralOperator op = make_dirichlet_laplacian(2);
  const NoiseSpec noise = NoiseSpec::constant(2, 1.0);
  const GridSpec grid{1.0, 4, 1};
  const NoiseTable t = build_noise_table(grid, noise, op, 42, 7);

  std::printf("constexpr double kGoldenDb[2][4] = {\n");
  for (std::size_t i = 0; i < 2; ++i) {
    std::printf("    {%.17g, %.17g, %.17g, %.17g},\n", t.brownian(i, 0), t.brownian(i, 1),
                t.brownian(i, 2), t.brownian(i, 3));
  }
  std::printf("};\nconstexpr double kGoldenConv[2][4] = {\n");
  for (std::size_t i = 0; i < 2; ++i) {
    std::printf("    {%.17g, %.17g, %.17g, %.17g},\n", t.convolution(i, 0), t.convolution(i, 1),
                t.convolution(i, 2), t.convolution(i, 3));
  }
  std::printf("};\n");

  if (argc > 1) {
    noise_table_write(argv[1], t);
    std::printf("wrote %s\n", argv[1]);
  }
  return 0;
}
