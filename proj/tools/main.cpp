// opten: unsupervised regularization-parameter selection for elastic-net
// denoising. Subcommands: solve, bench, denoise, estimate-h.

#include "opten/all.hpp"

#include <CLI11.hpp>

#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

using namespace opten;

std::string now_string() {
  char buf[64];
  std::time_t t = std::time(nullptr);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  return buf;
}

std::vector<std::pair<std::string, std::string>> base_manifest(const std::string& cmd) {
  return {{"tool", "opten"}, {"version", kVersion}, {"subcommand", cmd},
          {"timestamp", now_string()}};
}

// ---------------------------------------------------------------------------

int run_solve(const std::string& matrix_path, const std::string& obs_path, double t,
              double alpha, double tol, int max_iter, const std::string& out_path) {
  const Mat A = read_matrix_csv(matrix_path);
  const Vec y = read_vector_csv(obs_path);
  const InverseProblem prob(A, y, alpha);
  const SpectralData spec = spectral_data(A);
  SolveConfig cfg;
  cfg.fp_tol = tol;
  cfg.max_iter = max_iter;
  const Solution sol = solve(prob, spec, t, cfg);
  write_vector_csv(out_path, sol.z, "z");
  auto man = base_manifest("solve");
  man.insert(man.end(), {{"matrix", matrix_path},
                         {"obs", obs_path},
                         {"t", format_double(t)},
                         {"alpha", format_double(alpha)},
                         {"tol", format_double(tol)},
                         {"max_iter", std::to_string(max_iter)},
                         {"converged", sol.converged ? "true" : "false"},
                         {"iterations", std::to_string(sol.iterations)},
                         {"fp_residual", format_double(sol.fp_residual)},
                         {"lambda", t > 0 ? format_double((1.0 - t) / t) : "inf"}});
  write_manifest(out_path, man);
  if (!sol.converged)
    std::cerr << "warning: solver did not reach tolerance (residual "
              << sol.fp_residual << ")\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchCli {
  std::string preset;
  std::string config_path;
  std::string out_path = "results.csv";
  std::string dump_loss_path;
  int runs = -1;
  std::uint64_t seed = 1;
  bool full = false;
  bool no_timing = false;
  int jobs = 1;
  OptENConfig opt;
};

void apply_config_file(BenchConfig& cfg, const std::string& path) {
  for (const auto& [key, val] : read_config(path)) {
    if (key == "m") cfg.m = std::stoi(val);
    else if (key == "d") cfg.d = std::stoi(val);
    else if (key == "h") cfg.h = std::stoi(val);
    else if (key == "sigma") cfg.sigma = std::stod(val);
    else if (key == "alpha") cfg.alpha = std::stod(val);
    else if (key == "n_train") cfg.n_train = std::stoi(val);
    else if (key == "n_runs") cfg.n_runs = std::stoi(val);
    else if (key == "rank") cfg.rank = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "grid_step_oracle") cfg.grid_step_oracle = std::stod(val);
    else if (key == "loss") {
      cfg.opten_losses.clear();
      std::stringstream ss(val);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item == "empirical") cfg.opten_losses.push_back(LossKind::empirical);
        else if (item == "projected") cfg.opten_losses.push_back(LossKind::projected);
        else if (item == "modified") cfg.opten_losses.push_back(LossKind::modified);
        else if (item == "true") cfg.opten_losses.push_back(LossKind::true_loss);
        else throw std::invalid_argument("config: unknown loss kind " + item);
      }
    } else {
      throw std::invalid_argument("config: unknown key " + key);
    }
  }
}

int run_bench(const BenchCli& cli) {
  BenchConfig cfg;
  std::string axis;
  std::vector<double> axis_values;

  if (cli.preset == "table1" || cli.preset.empty()) {
    // defaults already match the injective benchmark configuration
  } else if (cli.preset == "table2") {
    cfg.rank = 40;
    cfg.opten_losses = {LossKind::projected, LossKind::modified};
  } else if (cli.preset == "fig3-sigma") {
    axis = "sigma";
    axis_values = {0.1, 0.2, 0.3, 0.4, 0.5};
    cfg.methods = {"t_opt", "xhat", "opten", "dp", "ngcv", "bp"};
  } else if (cli.preset == "fig3-n") {
    axis = "n_train";
    axis_values = {20, 30, 40, 50, 60};
    cfg.methods = {"t_opt", "xhat", "opten", "dp", "ngcv", "bp"};
  } else {
    throw std::invalid_argument("unknown preset " + cli.preset);
  }
  if (!cli.config_path.empty()) apply_config_file(cfg, cli.config_path);
  cfg.seed = cli.seed;
  cfg.opten = cli.opt;
  if (cli.full) cfg.n_runs = 100;
  if (cli.runs > 0) cfg.n_runs = cli.runs;

  std::string csv;
  if (axis.empty()) {
    csv = report_csv_header() + std::string("\n");
    std::vector<TrialReport> reports(static_cast<size_t>(cfg.n_runs));
    if (cli.jobs <= 1) {
      for (int run = 0; run < cfg.n_runs; ++run) reports[static_cast<size_t>(run)] = run_trial(cfg, run);
    } else {
      std::vector<std::thread> pool;
      std::mutex mu;
      int next = 0;
      for (int j = 0; j < cli.jobs; ++j)
        pool.emplace_back([&] {
          for (;;) {
            int run;
            {
              std::lock_guard<std::mutex> lock(mu);
              if (next >= cfg.n_runs) return;
              run = next++;
            }
            reports[static_cast<size_t>(run)] = run_trial(cfg, run);
          }
        });
      for (auto& th : pool) th.join();
    }
    for (const TrialReport& rep : reports)
      append_report_csv(csv, rep, !cli.no_timing, format_double);
  } else {
    csv = "# value,rule,mean_rel_sol_err,std_rel_sol_err\n";
    for (const SweepRow& row : sweep(cfg, axis, axis_values)) {
      csv += format_double(row.value);
      csv += ',';
      csv += row.rule;
      csv += ',';
      csv += format_double(row.mean_rel_sol_err);
      csv += ',';
      csv += format_double(row.std_rel_sol_err);
      csv += '\n';
    }
  }

  std::ofstream out(cli.out_path);
  if (!out) throw std::runtime_error("cannot write " + cli.out_path);
  out << csv;
  out.close();

  if (!cli.dump_loss_path.empty()) {
    // Loss profile of the first run's configured surface over the oracle grid.
    const Mat A = cfg.forward_override ? *cfg.forward_override
                                       : gen_forward(cfg.m, cfg.d, cfg.rank, mix_seed(cfg.seed, 0));
    const SpectralData spec = spectral_data(A);
    const std::uint64_t base = mix_seed(cfg.seed, 1000);
    Mat Y(cfg.n_train, A.rows());
    for (int i = 0; i < cfg.n_train; ++i) {
      const Vec xi = gen_signal(static_cast<int>(A.cols()), cfg.h, mix_seed(base, 10 + 2 * i));
      std::mt19937_64 rng(mix_seed(base, 11 + 2 * i));
      Y.row(i) = (A * xi + cfg.sigma * gaussian_vector(A.rows(), rng)).transpose();
    }
    GroundTruth gt;
    gt.x = gen_signal(static_cast<int>(A.cols()), cfg.h, mix_seed(base, 1));
    std::mt19937_64 rng(mix_seed(base, 2));
    gt.w = gaussian_vector(A.rows(), rng);
    gt.sigma = cfg.sigma;
    gt.h = cfg.h;
    const Vec y = observe(A, gt);
    const InverseProblem prob(A, y, cfg.alpha);
    const SubspaceModel model = top_h_projection(empirical_covariance(Y), cfg.h);
    const Vec xhat = empirical_estimator(spec, model, y);
    const Vec pi_y = model.projection * y;
    const LossKind kind = cfg.opten_losses.empty() ? LossKind::empirical : cfg.opten_losses[0];
    const Vec& ref = kind == LossKind::true_loss ? gt.x : xhat;
    LossSurface surface(kind, prob, spec, ref, pi_y, cfg.solver);
    std::ofstream dump(cli.dump_loss_path);
    if (!dump) throw std::runtime_error("cannot write " + cli.dump_loss_path);
    dump << "# t,value\n";
    for (double t = 0.0; t <= 1.0 + 1e-12; t += cfg.grid_step_oracle)
      dump << format_double(std::min(t, 1.0)) << "," << format_double(surface.eval(std::min(t, 1.0)))
           << "\n";
  }

  auto man = base_manifest("bench");
  man.insert(man.end(), {{"preset", cli.preset.empty() ? "table1" : cli.preset},
                         {"config", cli.config_path},
                         {"m", std::to_string(cfg.m)},
                         {"d", std::to_string(cfg.d)},
                         {"h", std::to_string(cfg.h)},
                         {"sigma", format_double(cfg.sigma)},
                         {"alpha", format_double(cfg.alpha)},
                         {"n_train", std::to_string(cfg.n_train)},
                         {"runs", std::to_string(cfg.n_runs)},
                         {"rank", cfg.rank ? std::to_string(*cfg.rank) : "full"},
                         {"seed", std::to_string(cfg.seed)},
                         {"jobs", std::to_string(cli.jobs)},
                         {"timing", cli.no_timing ? "off" : "on"}});
  write_manifest(cli.out_path, man);
  std::cout << "wrote " << cli.out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run_estimate_h(const std::string& samples_path, const std::string& criterion,
                   double threshold, double fraction) {
  const Mat Y = read_matrix_csv(samples_path);
  HCriterion crit;
  crit.kind = parse_h_criterion(criterion);
  crit.threshold = threshold;
  crit.restrict_fraction = fraction;
  const CovarianceEstimate cov = empirical_covariance(Y);
  const int h = estimate_h(cov, crit);
  std::cout << "criterion = " << criterion << "\n" << "h = " << h << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct DenoiseCli {
  std::string image_path;
  std::string out_path = "denoised.pgm";
  std::string report_path;
  std::string dump_loss_path;
  std::string mode = "oracle";
  double sigma = -1.0;  // <0: input already noisy
  double alpha = 1e-3;
  double t = -1.0;
  long h = 0;
  std::uint64_t seed = 0;
  OptENConfig opt;
};

int run_denoise(const DenoiseCli& cli) {
  const Mat input = read_pgm(cli.image_path);
  const bool simulated = cli.sigma >= 0.0;
  const Mat* clean = simulated ? &input : nullptr;
  const Mat noisy = simulated ? add_noise(input, cli.sigma, cli.seed) : input;
  const int levels = default_levels(noisy.rows(), noisy.cols());

  Index h = cli.h;
  double t_hat = cli.t;
  if (cli.mode == "fixed-t") {
    if (!(cli.t >= 0.0 && cli.t <= 1.0))
      throw std::invalid_argument("fixed-t mode needs --t in [0,1]");
  } else if (cli.mode == "oracle") {
    if (!clean)
      throw std::invalid_argument("oracle mode needs --sigma (a clean reference image)");
    if (h <= 0) h = oracle_h(*clean, noisy, levels);
    const WaveletCoeffs wc = dwt2(noisy, levels);
    const Vec cy = flatten(wc);
    Vec ref = Vec::Zero(cy.size());
    for (Index i : top_h_indices(cy, h)) ref(i) = cy(i);
    const double t_floor = 1.0 / (1.0 + 2.0 * cy.cwiseAbs().maxCoeff());
    auto loss = [&](double t) {
      return (closed_form_orthogonal(cy, t, cli.alpha) - ref).squaredNorm();
    };
    t_hat = opten_line_search(loss, t_floor, cli.opt).t_hat;
    if (!cli.dump_loss_path.empty()) {
      std::ofstream dump(cli.dump_loss_path);
      dump << "# t,value\n";
      for (double t = 0.0; t <= 1.0 + 1e-12; t += 1e-3)
        dump << format_double(std::min(t, 1.0)) << "," << format_double(loss(std::min(t, 1.0)))
             << "\n";
    }
  } else if (cli.mode == "heuristic") {
    HSchedule sched;
    if (cli.h > 0) { sched.h0 = cli.h; sched.h_step = cli.h; }
    const HSelection sel = select_h_heuristic(noisy, cli.alpha, sched, cli.opt, levels);
    h = sel.h;
    t_hat = sel.t_hat;
  } else {
    throw std::invalid_argument("unknown mode " + cli.mode);
  }

  const Mat out = denoise(noisy, cli.alpha, t_hat, levels);
  write_pgm(cli.out_path, out);

  auto man = base_manifest("denoise");
  man.insert(man.end(), {{"image", cli.image_path},
                         {"mode", cli.mode},
                         {"sigma", simulated ? format_double(cli.sigma) : "none"},
                         {"alpha", format_double(cli.alpha)},
                         {"h", std::to_string(h)},
                         {"t", format_double(t_hat)},
                         {"seed", std::to_string(cli.seed)},
                         {"levels", std::to_string(levels)}});
  write_manifest(cli.out_path, man);

  if (!cli.report_path.empty()) {
    std::ofstream rep(cli.report_path);
    if (!rep) throw std::runtime_error("cannot write " + cli.report_path);
    rep << "# mode,h,t,psnr_noisy,ssim_noisy,psnr_out,ssim_out\n";
    const double pn = clean ? psnr(*clean, noisy) : std::numeric_limits<double>::quiet_NaN();
    const double sn = clean ? ssim(*clean, noisy) : std::numeric_limits<double>::quiet_NaN();
    const double po = clean ? psnr(*clean, out) : std::numeric_limits<double>::quiet_NaN();
    const double so = clean ? ssim(*clean, out) : std::numeric_limits<double>::quiet_NaN();
    rep << cli.mode << "," << h << "," << format_double(t_hat) << "," << format_double(pn)
        << "," << format_double(sn) << "," << format_double(po) << "," << format_double(so)
        << "\n";
  }
  std::cout << "wrote " << cli.out_path << " (h = " << h << ", t = " << t_hat << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic-net denoising with learned regularization parameters"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help and exit");  // frees -h for options

  // solve
  std::string matrix_path, obs_path, out_path = "z.csv";
  double t = 0.5, alpha = 1.0, tol = 1e-10;
  int max_iter = 20000;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the elastic net at one parameter value");
  solve_cmd->add_option("--matrix", matrix_path, "Forward matrix CSV")->required();
  solve_cmd->add_option("--obs", obs_path, "Observation vector CSV")->required();
  solve_cmd->add_option("--t", t, "Regularization parameter in [0,1]")->required();
  solve_cmd->add_option("--alpha", alpha, "Elastic-net mixing alpha > 0")->required();
  solve_cmd->add_option("--tol", tol, "Fixed-point tolerance");
  solve_cmd->add_option("--max-iter", max_iter, "Iteration cap");
  solve_cmd->add_option("--out", out_path, "Output CSV for the solution");

  // bench
  BenchCli bench;
  auto* bench_cmd = app.add_subcommand("bench", "Synthetic benchmark against classical rules");
  bench_cmd->add_option("--preset", bench.preset, "table1|table2|fig3-sigma|fig3-n");
  bench_cmd->add_option("--config", bench.config_path, "key = value config file");
  bench_cmd->add_option("--runs", bench.runs, "Number of runs");
  bench_cmd->add_option("--seed", bench.seed, "Master seed");
  bench_cmd->add_option("--out", bench.out_path, "Output CSV");
  bench_cmd->add_flag("--full", bench.full, "Full-scale run (100 runs)");
  bench_cmd->add_flag("--no-timing", bench.no_timing, "Zero the seconds column (byte-stable output)");
  bench_cmd->add_option("--jobs", bench.jobs, "Run-level parallelism");
  bench_cmd->add_option("--dump-loss", bench.dump_loss_path, "Write the loss profile CSV");

  // estimate-h
  std::string samples_path, criterion = "relative_gap_restricted";
  double threshold = 0.95, fraction = 0.5;
  auto* esth_cmd = app.add_subcommand("estimate-h", "Estimate the intrinsic dimension");
  esth_cmd->add_option("--samples", samples_path, "CSV with one observation per row")->required();
  esth_cmd->add_option("--criterion", criterion,
                       "spectral_gap|relative_gap|cum_energy|rel_cum_energy|relative_gap_restricted");
  esth_cmd->add_option("--threshold", threshold, "Energy threshold");
  esth_cmd->add_option("--fraction", fraction, "Restriction fraction");

  // denoise
  DenoiseCli den;
  auto* den_cmd = app.add_subcommand("denoise", "Wavelet elastic-net image denoising");
  den_cmd->set_help_flag("--help", "Print help and exit");
  den_cmd->add_option("--image", den.image_path, "Input PGM (P2 or P5)")->required();
  den_cmd->add_option("--sigma", den.sigma, "Noise level to add (omit for pre-noised input)");
  den_cmd->add_option("--mode", den.mode, "oracle|heuristic|fixed-t");
  den_cmd->add_option("--h", den.h, "Threshold count (0 = auto)");
  den_cmd->add_option("--t", den.t, "Parameter for fixed-t mode");
  den_cmd->add_option("--alpha", den.alpha, "Elastic-net mixing");
  den_cmd->add_option("--seed", den.seed, "Noise seed");
  den_cmd->add_option("--out", den.out_path, "Output PGM");
  den_cmd->add_option("--report", den.report_path, "Metrics report CSV");
  den_cmd->add_option("--dump-loss", den.dump_loss_path, "Write the loss profile CSV (oracle mode)");

  // line-search knobs shared by bench and denoise
  for (auto* cmd : {bench_cmd, den_cmd}) {
    OptENConfig* opt = cmd == bench_cmd ? &bench.opt : &den.opt;
    cmd->add_option("--epsilon", opt->epsilon, "Finite-difference half-width");
    cmd->add_option("--tol", opt->tol, "Gradient stop");
    cmd->add_option("--tol2", opt->tol2, "Step floor");
    cmd->add_option("--step", opt->alpha_step, "Initial trial step");
    cmd->add_option("--c1", opt->c1, "Armijo constant");
    cmd->add_option("--beta", opt->beta, "Safeguard shrink");
    cmd->add_option("--gamma", opt->gamma, "Step-ratio guard");
    cmd->add_option("--max-iter", opt->max_iter, "Line-search iteration cap");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (solve_cmd->parsed())
      return run_solve(matrix_path, obs_path, t, alpha, tol, max_iter, out_path);
    if (bench_cmd->parsed()) return run_bench(bench);
    if (esth_cmd->parsed()) return run_estimate_h(samples_path, criterion, threshold, fraction);
    if (den_cmd->parsed()) return run_denoise(den);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
