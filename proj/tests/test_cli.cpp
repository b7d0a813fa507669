// End-to-end tests driving the installed binary.

#include "opten/io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace opten;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("opten_cli_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd = std::string(OPTEN_BIN) + " " + args + " > " + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int data_rows(const std::string& csv) {
  int rows = 0;
  std::stringstream ss(csv);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty() && line[0] != '#') ++rows;
  return rows;
}

}  // namespace

TEST_CASE("solve subcommand reproduces the worked example") {
  TempDir tmp;
  write_matrix_csv(tmp.file("A.csv"), Mat::Identity(2, 2));
  Vec y(2);
  y << 2.0, 0.0;
  write_vector_csv(tmp.file("y.csv"), y);
  const int rc = run("solve --matrix " + tmp.file("A.csv") + " --obs " + tmp.file("y.csv") +
                     " --t 0.5 --alpha 1 --out " + tmp.file("z.csv"));
  REQUIRE(rc == 0);
  const Vec z = read_vector_csv(tmp.file("z.csv"));
  REQUIRE(z.size() == 2);
  CHECK(z(0) == Catch::Approx(0.75).margin(1e-9));
  CHECK(z(1) == 0.0);
  CHECK(std::filesystem::exists(tmp.file("z.csv") + ".manifest"));
  const std::string manifest = slurp(tmp.file("z.csv") + ".manifest");
  CHECK(manifest.find("subcommand = solve") != std::string::npos);
  CHECK(manifest.find("converged = true") != std::string::npos);
}

TEST_CASE("solve rejects bad inputs with exit code 1") {
  TempDir tmp;
  write_matrix_csv(tmp.file("A.csv"), Mat::Identity(2, 2));
  write_vector_csv(tmp.file("y.csv"), Vec::Ones(2));
  CHECK(run("solve --matrix " + tmp.file("missing.csv") + " --obs " + tmp.file("y.csv") +
            " --t 0.5 --alpha 1 --out " + tmp.file("z.csv")) == 1);
  CHECK(run("solve --matrix " + tmp.file("A.csv") + " --obs " + tmp.file("y.csv") +
            " --t 0.5 --alpha -1 --out " + tmp.file("z.csv")) == 1);
  CHECK(run("solve --bogus-flag 1") == 1);
  CHECK(run("") == 1);  // a subcommand is required
}

TEST_CASE("help exits cleanly") {
  CHECK(run("--help") == 0);
  CHECK(run("solve --help") == 0);
  CHECK(run("bench --help") == 0);
}

TEST_CASE("bench emits the documented row count and is reproducible") {
  TempDir tmp;
  const std::string cfg_args =
      " --runs 2 --seed 7 --no-timing --out " + tmp.file("r.csv") + " --config " + tmp.file("cfg");
  {
    std::ofstream cfg(tmp.file("cfg"));
    cfg << "m = 60\nd = 20\nh = 4\nn_train = 10\ngrid_step_oracle = 0.01\n";
  }
  REQUIRE(run("bench --preset table1" + cfg_args) == 0);
  const std::string csv = slurp(tmp.file("r.csv"));
  // 2 runs x (9 methods + 2 reference rows)
  CHECK(data_rows(csv) == 22);
  CHECK(csv.find("# rule,n_star,t,rel_param_err,rel_sol_err,fdp,tpp,seconds") == 0);

  REQUIRE(run("bench --preset table1 --runs 2 --seed 7 --no-timing --out " + tmp.file("r2.csv") +
              " --config " + tmp.file("cfg")) == 0);
  CHECK(slurp(tmp.file("r2.csv")) == csv);

  // A different seed changes the rows.
  REQUIRE(run("bench --preset table1 --runs 2 --seed 8 --no-timing --out " + tmp.file("r3.csv") +
              " --config " + tmp.file("cfg")) == 0);
  CHECK(slurp(tmp.file("r3.csv")) != csv);

  CHECK(std::filesystem::exists(tmp.file("r.csv") + ".manifest"));
}

TEST_CASE("bench dump-loss writes a two-column profile") {
  TempDir tmp;
  {
    std::ofstream cfg(tmp.file("cfg"));
    cfg << "m = 40\nd = 12\nh = 3\nn_train = 8\ngrid_step_oracle = 0.05\n";
  }
  REQUIRE(run("bench --preset table1 --runs 1 --seed 3 --no-timing --out " + tmp.file("r.csv") +
              " --config " + tmp.file("cfg") + " --dump-loss " + tmp.file("loss.csv")) == 0);
  const std::string dump = slurp(tmp.file("loss.csv"));
  CHECK(dump.find("# t,value") == 0);
  CHECK(data_rows(dump) == 21);
}

TEST_CASE("estimate-h prints the criterion and the estimate") {
  TempDir tmp;
  // 60 samples drawn from a 3-dimensional subspace of R^8, noiseless.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Mat Y(60, 8);
  for (int i = 0; i < 60; ++i) {
    Vec v = Vec::Zero(8);
    for (int k = 0; k < 3; ++k) v(k) = 4.0 * g(rng);
    Y.row(i) = v.transpose();
  }
  write_matrix_csv(tmp.file("Y.csv"), Y);
  REQUIRE(run("estimate-h --samples " + tmp.file("Y.csv") + " --criterion spectral_gap",
              tmp.file("out.txt")) == 0);
  const std::string out = slurp(tmp.file("out.txt"));
  CHECK(out.find("criterion = spectral_gap") != std::string::npos);
  CHECK(out.find("h = 3") != std::string::npos);

  CHECK(run("estimate-h --samples " + tmp.file("Y.csv") + " --criterion bogus") == 1);
}

TEST_CASE("denoise pipeline writes image, report and manifest") {
  TempDir tmp;
  // A small synthetic image through the public PGM path.
  Mat img(32, 32);
  for (Index i = 0; i < 32; ++i)
    for (Index j = 0; j < 32; ++j)
      img(i, j) = 0.2 + 0.5 * ((i > 8 && i < 24 && j > 8 && j < 24) ? 1.0 : 0.0) * 0.9 +
                  0.1 * double(j) / 31.0;
  write_pgm(tmp.file("in.pgm"), img);

  REQUIRE(run("denoise --image " + tmp.file("in.pgm") +
              " --sigma 0.075 --mode oracle --alpha 1e-3 --seed 3 --out " + tmp.file("out.pgm") +
              " --report " + tmp.file("rep.csv")) == 0);
  const Mat out = read_pgm(tmp.file("out.pgm"));
  CHECK(out.rows() == 32);
  CHECK(out.cols() == 32);
  const std::string rep = slurp(tmp.file("rep.csv"));
  CHECK(rep.find("# mode,h,t,psnr_noisy,ssim_noisy,psnr_out,ssim_out") == 0);
  CHECK(data_rows(rep) == 1);
  CHECK(rep.find("oracle,") != std::string::npos);

  // fixed-t mode works on pre-noised input (no --sigma).
  REQUIRE(run("denoise --image " + tmp.file("in.pgm") + " --mode fixed-t --t 0.9 --out " +
              tmp.file("f.pgm")) == 0);
  CHECK(read_pgm(tmp.file("f.pgm")).rows() == 32);

  // heuristic mode.
  REQUIRE(run("denoise --image " + tmp.file("in.pgm") +
              " --sigma 0.075 --mode heuristic --seed 3 --out " + tmp.file("h.pgm")) == 0);

  // oracle mode without a clean reference is an input error.
  CHECK(run("denoise --image " + tmp.file("in.pgm") + " --mode oracle --out " +
            tmp.file("x.pgm")) == 1);
  // fixed-t without --t likewise.
  CHECK(run("denoise --image " + tmp.file("in.pgm") + " --mode fixed-t --out " +
            tmp.file("x.pgm")) == 1);
}
