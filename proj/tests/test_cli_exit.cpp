// Exercises the CLI's stable exit-code contract by running the installed
// binary: 0 pass, 1 acceptance failure, 2 configuration error, 3 numeric.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

int failures = 0;

int run(const std::string& command) {
  const int rc = std::system(command.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

void expect_exit(const std::string& command, int expected) {
  const int got = run(command + " >/dev/null 2>&1");
  if (got != expected) {
    std::fprintf(stderr, "FAIL: '%s' exited %d, expected %d\n", command.c_str(), got, expected);
    ++failures;
  } else {
    std::printf("ok: '%s' -> %d\n", command.c_str(), expected);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: test_cli_exit <aeelab-binary> <data-dir>\n");
    return 2;
  }
  const std::string bin = argv[1];
  const std::string data_dir = argv[2];
  const auto tmp = std::filesystem::temp_directory_path() / "aeelab_cli_exit";
  std::filesystem::create_directories(tmp);
  const std::string out = (tmp / "out").string();

  // Config parse failures -> 2.
  {
    std::ofstream bad(tmp / "bad.cfg");
    bad << "this is not a config\n";
  }
  expect_exit(bin + " order --config " + (tmp / "bad.cfg").string(), 2);
  expect_exit(bin + " order --config " + (tmp / "missing.cfg").string(), 2);
  expect_exit(bin + " order --bogus-flag", 2);
  expect_exit(bin + " distribution --config " + (tmp / "bad.cfg").string(), 2);

  // iota below the fully discrete coupling bound -> 2.
  {
    std::ofstream cfg(tmp / "iota.cfg");
    cfg << "preset=sine\nrun.iota=0.4\n";
  }
  expect_exit(bin + " distribution --config " + (tmp / "iota.cfg").string(), 2);

  // C not negative definite -> 2.
  {
    std::ofstream cfg(tmp / "c_indefinite.cfg");
    cfg << "preset=sine\nsode.C=1,0;0,-1\n";
  }
  expect_exit(bin + " sode --config " + (tmp / "c_indefinite.cfg").string(), 2);

  // Zero preset order run: exact scheme, degenerate pass -> 0 (small sizes).
  {
    std::ofstream cfg(tmp / "zero_small.cfg");
    cfg << "preset=zero\nmodel.n=4\ngrid.refine=4\nrun.m_list=2,4,8\nrun.n_replicas=4\n"
        << "run.proj_dim=2\nout.dir=" << out << "\n";
  }
  expect_exit(bin + " order --config " + (tmp / "zero_small.cfg").string(), 0);
  if (!std::filesystem::exists(std::filesystem::path(out) / "order.csv")) {
    std::fprintf(stderr, "FAIL: order.csv not written\n");
    ++failures;
  }
  if (!std::filesystem::exists(std::filesystem::path(out) / "order_summary.csv")) {
    std::fprintf(stderr, "FAIL: order_summary.csv not written\n");
    ++failures;
  }

  // Identical config and seed reproduce byte-identical CSVs.
  {
    std::ofstream cfg(tmp / "repeat.cfg");
    cfg << "preset=zero\nmodel.n=4\ngrid.refine=4\nrun.m_list=2,4,8\nrun.n_replicas=16\n"
        << "run.proj_dim=2\n";
  }
  const std::string out_a = (tmp / "out_a").string();
  const std::string out_b = (tmp / "out_b").string();
  expect_exit(bin + " order --config " + (tmp / "repeat.cfg").string() + " --out " + out_a, 0);
  expect_exit(bin + " order --config " + (tmp / "repeat.cfg").string() + " --out " + out_b, 0);
  if (run("cmp -s " + out_a + "/order.csv " + out_b + "/order.csv") != 0) {
    std::fprintf(stderr, "FAIL: reruns are not byte-identical\n");
    ++failures;
  } else {
    std::printf("ok: reruns byte-identical\n");
  }

  // selftest -> 0; corrupted golden file -> 1.
  expect_exit(bin + " selftest", 0);
  const std::string golden = data_dir + "/golden_noise_table.bin";
  if (std::filesystem::exists(golden)) {
    expect_exit(bin + " selftest --golden " + golden, 0);
    const std::string corrupted = (tmp / "corrupted.bin").string();
    std::filesystem::copy_file(golden, corrupted,
                               std::filesystem::copy_options::overwrite_existing);
    {
      std::fstream f(corrupted, std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(70);
      char byte = 0;
      f.read(&byte, 1);
      f.seekp(70);
      byte = static_cast<char>(byte ^ 0x40);
      f.write(&byte, 1);
    }
    expect_exit(bin + " selftest --golden " + corrupted, 1);
  } else {
    std::fprintf(stderr, "FAIL: golden table %s missing\n", golden.c_str());
    ++failures;
  }

  std::filesystem::remove_all(tmp);
  return failures == 0 ? 0 : 1;
}
