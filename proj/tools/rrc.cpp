// rrc: reduced-rank binary classifier driven by Langevin samplers.
//
// Subcommands: simulate, fit, predict, cv, bound. All randomness flows from
// --seed; identical invocations produce byte-identical outputs. Exit codes:
// 0 success, 2 usage or parse error, 3 numerical divergence.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "rrc/bounds.hpp"
#include "rrc/csv.hpp"
#include "rrc/datagen.hpp"
#include "rrc/estimator.hpp"
#include "rrc/losses.hpp"
#include "rrc/prior.hpp"
#include "rrc/rng.hpp"
#include "rrc/sampler.hpp"

namespace fs = std::filesystem;
using namespace rrc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;
constexpr const char* kConfigHelp =
    "Read key = value defaults from a file ('#' comments; flags win)";

// Applies a plain `key = value` config file ('#' comments) to the parsed
// subcommand by appending `--key=value` tokens for every key not already on
// the command line; explicit flags therefore win.
std::vector<std::string> inject_config(std::vector<std::string> args,
                                       const std::vector<std::string>& subs) {
  std::size_t sub_idx = args.size();
  for (std::size_t i = 0; i < args.size(); ++i)
    if (std::find(subs.begin(), subs.end(), args[i]) != subs.end()) {
      sub_idx = i;
      break;
    }
  if (sub_idx == args.size()) return args;

  std::string config_path;
  for (std::size_t i = sub_idx + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw invalid_input("cannot open config file " + config_path);

  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  auto given = [&](const std::string& flag) {
    for (std::size_t i = sub_idx + 1; i < args.size(); ++i)
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
    return false;
  };

  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_input("config file " + config_path +
                          ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    if (key.empty())
      throw invalid_input("config file " + config_path + ": empty key");
    const std::string flag = "--" + key;
    if (!given(flag)) args.push_back(flag + "=" + value);
  }
  return args;
}

struct SamplerFlags {
  double lambda = -1.0;  // negative: auto (observed-entry count)
  double tau = 1.0;
  double step_size = 1e-4;
  long iterations = 10000;
  long burn_in = 1000;
  long thinning = 1;
  std::uint64_t seed = 0;
  std::string loss = "hinge";
  std::string algorithm = "mala";
  bool no_adapt = false;
  double target_acceptance = 0.5;

  SamplerConfig to_config() const {
    SamplerConfig cfg;
    cfg.lambda = lambda < 0 ? 0.0 : lambda;  // resolved later when auto
    cfg.tau = tau;
    cfg.step_size = step_size;
    cfg.iterations = iterations;
    cfg.burn_in = burn_in;
    cfg.thinning = thinning;
    cfg.seed = seed;
    cfg.loss = loss == "logistic" ? Loss::Logistic : Loss::Hinge;
    cfg.algorithm = algorithm == "lmc" ? Algorithm::LMC : Algorithm::MALA;
    cfg.adapt_step = !no_adapt;
    cfg.target_acceptance = target_acceptance;
    return cfg;
  }

  bool lambda_auto() const { return lambda < 0; }
};

void add_sampler_flags(CLI::App* cmd, SamplerFlags& flags,
                       bool with_loss_algorithm = true) {
  cmd->add_option("--lambda", flags.lambda,
                  "Temperature; omit for auto (= observed-entry count, the "
                  "scaling under which the tempered risk is the plain sum of "
                  "entry losses)");
  cmd->add_option("--tau", flags.tau, "Prior scale (default 1)");
  cmd->add_option("--step-size", flags.step_size, "Initial Langevin step");
  cmd->add_option("--iterations", flags.iterations, "Total chain length");
  cmd->add_option("--burn-in", flags.burn_in, "Discarded initial steps");
  cmd->add_option("--thinning", flags.thinning, "Keep every k-th draw");
  cmd->add_option("--seed", flags.seed, "Master seed (default 0)");
  cmd->add_flag("--no-adapt", flags.no_adapt,
                "Disable burn-in step-size adaptation");
  cmd->add_option("--target-accept", flags.target_acceptance,
                  "Adaptation target acceptance rate (default 0.5)");
  if (with_loss_algorithm) {
    cmd->add_option("--loss", flags.loss, "hinge or logistic")
        ->check(CLI::IsMember({"hinge", "logistic"}));
    cmd->add_option("--algorithm", flags.algorithm, "mala or lmc")
        ->check(CLI::IsMember({"mala", "lmc"}));
  }
}

struct ResponseFlags {
  std::string coding = "native";
  double threshold = 0.0;
  std::string missing_token = "NA";

  ResponseCoding to_coding() const {
    ResponseCoding out;
    if (coding == "zero-one")
      out.rule = ResponseCoding::Rule::ZeroOne;
    else if (coding == "threshold")
      out.rule = ResponseCoding::Rule::Threshold;
    else
      out.rule = ResponseCoding::Rule::Native;
    out.threshold = threshold;
    out.missing_token = missing_token;
    return out;
  }
};

void add_response_flags(CLI::App* cmd, ResponseFlags& flags) {
  cmd->add_option("--coding", flags.coding,
                  "Response coding: native (-1/1), zero-one, threshold")
      ->check(CLI::IsMember({"native", "zero-one", "threshold"}));
  cmd->add_option("--threshold", flags.threshold,
                  "With --coding threshold: values > threshold map to +1");
  cmd->add_option("--missing-token", flags.missing_token,
                  "Cell marking a missing response (default NA)");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw invalid_input("cannot open " + path.string() + " for writing");
  return out;
}

double vector_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double vector_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = vector_mean(v);
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / double(v.size() - 1));
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string setting = "I.1";
  Index n = 100, p = 12, q = 8;
  std::string truth = "rank2";
  double noise_sd = kApproxTruthNoiseSd;
  double missing = 0.0;
  int reps = 20;
  std::vector<std::string> methods;
  int threads = 0;
  std::string out_dir = "results";
  SamplerFlags sampler;
};

int run_simulate(const SimulateOptions& opt) {
  SimSetting setting;
  setting.id = parse_setting(opt.setting);
  setting.truth = opt.truth == "approx-rank2" ? TruthKind::ApproxRank2
                                              : TruthKind::ExactRank2;
  setting.n = opt.n;
  setting.p = opt.p;
  setting.q = opt.q;
  setting.missing_fraction = opt.missing;
  setting.seed = opt.sampler.seed;
  setting.approx_noise_sd = opt.noise_sd;

  std::vector<Method> methods;
  if (opt.methods.empty())
    methods.assign(kAllMethods.begin(), kAllMethods.end());
  else
    for (const auto& name : opt.methods) methods.push_back(parse_method(name));

  const SamplerConfig base = opt.sampler.to_config();
  const auto table = run_replicated_experiment(
      setting, methods, opt.reps, base, opt.sampler.lambda_auto(), opt.threads);

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);

  {
    auto out = open_out(dir / "results.csv");
    out << "setting,method,mean_error_pct,std_error_pct,reps,"
           "mean_acceptance,mean_final_step_size\n";
    for (const auto& row : table)
      out << setting_name(setting.id) << ',' << method_name(row.method) << ','
          << format_double(row.mean_error_pct) << ','
          << format_double(row.std_error_pct) << ',' << row.reps << ','
          << format_double(row.mean_acceptance) << ','
          << format_double(row.mean_final_step) << '\n';
  }
  {
    auto out = open_out(dir / "raw_errors.csv");
    out << "method,rep,error_pct\n";
    for (const auto& row : table)
      for (std::size_t r = 0; r < row.errors_pct.size(); ++r)
        out << method_name(row.method) << ',' << r << ','
            << format_double(row.errors_pct[r]) << '\n';
  }
  for (const auto& row : table) {
    auto out = open_out(dir / ("plot_" + method_name(row.method) + ".dat"));
    for (std::size_t r = 0; r < row.errors_pct.size(); ++r)
      out << r << ' ' << format_double(row.errors_pct[r]) << '\n';
  }
  {
    auto out = open_out(dir / "summary.txt");
    out << "setting " << setting_name(setting.id) << " (" << opt.truth
        << "), n=" << setting.n << " p=" << setting.p << " q=" << setting.q
        << ", missing=" << format_double(setting.missing_fraction)
        << ", reps=" << opt.reps << ", seed=" << opt.sampler.seed << "\n";
    out << "evaluation: "
        << (setting.missing_fraction > 0
                ? "held-out entries"
                : "independent response redraw over the full grid")
        << "\n\n";
    for (const auto& row : table) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-14s %6.2f%% (%.2f%%)%s\n",
                    method_name(row.method).c_str(), row.mean_error_pct,
                    row.std_error_pct,
                    row.std_degenerate ? "  [single repetition: std is 0 by convention]"
                                       : "");
      out << line;
    }
  }

  for (const auto& row : table)
    std::cout << method_name(row.method) << ": "
              << format_double(row.mean_error_pct) << "% ("
              << format_double(row.std_error_pct) << "%)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitOptions {
  std::string design_path, response_path;
  ResponseFlags response;
  SamplerFlags sampler;
  std::string out_dir = ".";
  Index train_rows = 0, test_rows = 0;
  double holdout_fraction = 0.0;
  int reps = 100;
  int threads = 0;
};

SamplerConfig resolve_config(const SamplerFlags& flags, Index observed) {
  SamplerConfig cfg = flags.to_config();
  if (flags.lambda_auto()) cfg.lambda = double(observed);
  return cfg;
}

void write_split_outputs(const fs::path& dir, const std::string& protocol,
                         const std::vector<double>& errors_pct) {
  {
    auto out = open_out(dir / "split_errors.csv");
    out << "rep,error_pct\n";
    for (std::size_t r = 0; r < errors_pct.size(); ++r)
      out << r << ',' << format_double(errors_pct[r]) << '\n';
  }
  auto out = open_out(dir / "summary.txt");
  out << protocol << "\n";
  out << "reps " << errors_pct.size() << "\n";
  out << "mean_error_pct " << format_double(vector_mean(errors_pct)) << "\n";
  out << "std_error_pct " << format_double(vector_std(errors_pct)) << "\n";
  std::cout << "mean error " << format_double(vector_mean(errors_pct))
            << "% (" << format_double(vector_std(errors_pct)) << "%) over "
            << errors_pct.size() << " splits\n";
}

int run_fit(const FitOptions& opt) {
  const Matrixd design = read_design_csv(opt.design_path);
  const ResponseMatrix response =
      read_response_csv(opt.response_path, opt.response.to_coding());
  if (response.rows() != design.rows())
    throw dimension_error("design and response row counts differ");

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);

  if (opt.train_rows > 0 || opt.test_rows > 0) {
    // repeated random row splits: fit on the train rows, score the observed
    // entries of the test rows
    const Index n = design.rows();
    if (opt.train_rows < 1 || opt.test_rows < 1 ||
        opt.train_rows + opt.test_rows != n)
      throw invalid_input("train-rows + test-rows must equal the row count " +
                          std::to_string(n));
    std::vector<double> errors(static_cast<std::size_t>(opt.reps));
    for (int rep = 0; rep < opt.reps; ++rep) {
      std::vector<Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Index(0));
      auto rng =
          make_rng(derive_seed(opt.sampler.seed, {3, std::uint64_t(rep)}));
      std::shuffle(order.begin(), order.end(), rng);

      Matrixd x_train(opt.train_rows, design.cols());
      Matrixd x_test(opt.test_rows, design.cols());
      LabelMatrix y_train(opt.train_rows, response.cols());
      LabelMatrix y_test(opt.test_rows, response.cols());
      BoolArray m_train(opt.train_rows, response.cols());
      BoolArray m_test(opt.test_rows, response.cols());
      for (Index i = 0; i < opt.train_rows; ++i) {
        x_train.row(i) = design.row(order[std::size_t(i)]);
        y_train.row(i) = response.labels.row(order[std::size_t(i)]);
        m_train.row(i) = response.mask.flags().row(order[std::size_t(i)]);
      }
      for (Index i = 0; i < opt.test_rows; ++i) {
        const Index src = order[std::size_t(opt.train_rows + i)];
        x_test.row(i) = design.row(src);
        y_test.row(i) = response.labels.row(src);
        m_test.row(i) = response.mask.flags().row(src);
      }
      ResponseMatrix train(y_train, ObservationMask(m_train));
      SamplerConfig cfg = resolve_config(opt.sampler, train.mask.count());
      cfg.seed = derive_seed(opt.sampler.seed, {5, std::uint64_t(rep)});
      const FitResult fitted = fit(x_train, train, cfg);
      errors[std::size_t(rep)] =
          100.0 * misclassification(fitted.coefficients, x_test, y_test,
                                    ObservationMask(m_test));
    }
    write_split_outputs(dir,
                        "row-split protocol: " + std::to_string(opt.train_rows) +
                            " train / " + std::to_string(opt.test_rows) +
                            " test rows",
                        errors);
    return 0;
  }

  if (opt.holdout_fraction > 0.0) {
    // repeated entry-level holdout: remove a fraction of the observed
    // entries, fit, and score on exactly the removed entries
    std::vector<double> errors(static_cast<std::size_t>(opt.reps));
    const auto observed = response.mask.pairs();
    const Index held_count =
        Index(std::llround(opt.holdout_fraction * double(observed.size())));
    if (held_count < 1 || std::size_t(held_count) >= observed.size())
      throw invalid_input("holdout fraction leaves no train or eval entries");
    for (int rep = 0; rep < opt.reps; ++rep) {
      auto rng =
          make_rng(derive_seed(opt.sampler.seed, {4, std::uint64_t(rep)}));
      std::vector<IndexPair> pool = observed;
      std::shuffle(pool.begin(), pool.end(), rng);
      BoolArray train_flags = response.mask.flags();
      std::vector<IndexPair> held(pool.begin(), pool.begin() + held_count);
      for (const auto& [i, k] : held) train_flags(i, k) = false;
      ResponseMatrix train(response.labels, ObservationMask(train_flags));
      SamplerConfig cfg = resolve_config(opt.sampler, train.mask.count());
      cfg.seed = derive_seed(opt.sampler.seed, {6, std::uint64_t(rep)});
      const FitResult fitted = fit(design, train, cfg);
      errors[std::size_t(rep)] =
          100.0 * misclassification(
                      fitted.coefficients, design, response.labels,
                      ObservationMask::from_pairs(response.rows(),
                                                  response.cols(), held));
    }
    char label[96];
    std::snprintf(label, sizeof(label),
                  "entry-holdout protocol: fraction %g of observed entries",
                  opt.holdout_fraction);
    write_split_outputs(dir, label, errors);
    return 0;
  }

  // plain fit on everything observed
  const SamplerConfig cfg = resolve_config(opt.sampler, response.mask.count());
  const FitResult fitted = fit(design, response, cfg);
  write_matrix_csv((dir / "coefficients.csv").string(), fitted.coefficients);
  {
    auto out = open_out(dir / "risk_trace.csv");
    out << "iteration," << loss_name(cfg.loss) << "_risk\n";
    for (const auto& [iter, risk] : fitted.chain.risk_trace)
      out << iter << ',' << format_double(risk) << '\n';
  }
  {
    auto out = open_out(dir / "diagnostics.txt");
    out << "algorithm " << algorithm_name(cfg.algorithm) << "\n"
        << "loss " << loss_name(cfg.loss) << "\n"
        << "lambda " << format_double(cfg.lambda) << "\n"
        << "tau " << format_double(cfg.tau) << "\n"
        << "acceptance_rate " << format_double(fitted.chain.acceptance_rate)
        << "\n"
        << "final_step_size " << format_double(fitted.chain.final_step_size)
        << "\n"
        << "kept_draws " << fitted.chain.n_kept << "\n"
        << "observed_entries " << response.mask.count() << "\n";
  }
  std::cout << "fit complete: acceptance "
            << format_double(fitted.chain.acceptance_rate) << ", step "
            << format_double(fitted.chain.final_step_size) << ", "
            << fitted.chain.n_kept << " kept draws\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict

int run_predict(const std::string& coeff_path, const std::string& design_path,
                const std::string& out_path) {
  const Matrixd coeffs = read_coefficients_csv(coeff_path);
  const Matrixd design = read_design_csv(design_path);
  write_labels_csv(out_path, predict(coeffs, design));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cv

struct CvOptions {
  std::string design_path, response_path;
  ResponseFlags response;
  SamplerFlags sampler;
  std::vector<double> lambda_grid;
  std::vector<double> tau_grid;
  int folds = 5;
  std::string out_dir = ".";
};

int run_cv(const CvOptions& opt) {
  const Matrixd design = read_design_csv(opt.design_path);
  const ResponseMatrix response =
      read_response_csv(opt.response_path, opt.response.to_coding());
  if (response.rows() != design.rows())
    throw dimension_error("design and response row counts differ");

  SamplerConfig base = opt.sampler.to_config();
  if (opt.sampler.lambda_auto()) base.lambda = double(response.mask.count());
  const CvReport report =
      cross_validate(design, response, base, opt.lambda_grid, opt.tau_grid,
                     opt.folds, opt.sampler.seed);

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  {
    auto out = open_out(dir / "cv_folds.csv");
    out << "lambda,tau,fold,error\n";
    for (std::size_t g = 0; g < report.grid.size(); ++g)
      for (std::size_t f = 0; f < report.fold_errors[g].size(); ++f)
        out << format_double(report.grid[g].first) << ','
            << format_double(report.grid[g].second) << ',' << f << ','
            << format_double(report.fold_errors[g][f]) << '\n';
  }
  {
    auto out = open_out(dir / "cv_summary.csv");
    out << "lambda,tau,mean_error,selected\n";
    for (std::size_t g = 0; g < report.grid.size(); ++g)
      out << format_double(report.grid[g].first) << ','
          << format_double(report.grid[g].second) << ','
          << format_double(report.mean_errors[g]) << ','
          << (g == report.best_index ? 1 : 0) << '\n';
  }
  std::cout << "best lambda " << format_double(report.best_lambda) << " tau "
            << format_double(report.best_tau) << " (mean error "
            << format_double(report.mean_errors[report.best_index]) << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bound

struct BoundOptions {
  BoundInputs inputs;
  bool optimize_varsigma = false;
  std::string setting;          // optional auto-fill from a simulated instance
  std::string truth = "rank2";
  std::uint64_t seed = 0;
};

struct BoundGiven {
  bool m = false, r_star = false, norm_x = false, norm_mb = false;
};

int run_bound(BoundOptions opt, const BoundGiven& given) {
  if (!opt.setting.empty()) {
    // fill the oracle quantities from a simulated instance; explicit flags win
    SimSetting setting;
    setting.id = parse_setting(opt.setting);
    setting.truth = opt.truth == "approx-rank2" ? TruthKind::ApproxRank2
                                                : TruthKind::ExactRank2;
    setting.n = opt.inputs.n;
    setting.p = opt.inputs.p;
    setting.q = opt.inputs.q;
    setting.seed = opt.seed;
    auto rng = make_rng(setting.seed);
    const SimInstance inst = gen_instance(setting, rng);
    if (!given.norm_x) opt.inputs.norm_x = inst.X.norm();
    if (!given.norm_mb) opt.inputs.norm_mb = inst.M_star.norm();
    if (!given.r_star) {
      Eigen::JacobiSVD<Matrixd> svd(inst.M_star);
      const auto sv = svd.singularValues();
      Index rank = 0;
      for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
      opt.inputs.r_star = rank;
    }
  }
  if (!given.m) opt.inputs.m = opt.inputs.n * opt.inputs.q;

  struct Row {
    const char* name;
    double (*fn)(const BoundInputs&);
  };
  const Row rows[] = {{"theorem1", &theorem1_bound},
                      {"corollary1", &corollary1_bound},
                      {"proposition1", &proposition1_bound},
                      {"theorem2", &theorem2_bound}};
  for (const Row& row : rows) {
    if (opt.optimize_varsigma) {
      const auto best = minimize_over_varsigma(row.fn, opt.inputs);
      std::cout << row.name << ' ' << format_double(best.value)
                << " varsigma " << format_double(best.varsigma) << '\n';
    } else {
      std::cout << row.name << ' ' << format_double(row.fn(opt.inputs))
                << " varsigma " << format_double(opt.inputs.varsigma) << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank multi-response binary classification via "
               "Gibbs-posterior Langevin sampling"};
  app.require_subcommand(1);

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run a replicated synthetic-data experiment");
  std::string config_sink;
  simulate->add_option("--config", config_sink, kConfigHelp);
  simulate->add_option("--setting", sim.setting,
                       "Response setting: I.1 I.2 I.3 I.4 II.1 II.2")
      ->required();
  simulate->add_option("--n", sim.n, "Sample size (default 100)");
  simulate->add_option("--p", sim.p, "Covariate dimension (default 12)");
  simulate->add_option("--q", sim.q, "Response dimension (default 8)");
  simulate->add_option("--truth", sim.truth, "rank2 or approx-rank2")
      ->check(CLI::IsMember({"rank2", "approx-rank2"}));
  simulate->add_option("--noise-sd", sim.noise_sd,
                       "Perturbation sd for approx-rank2 (default sqrt(0.1))");
  simulate->add_option("--missing", sim.missing,
                       "Fraction of entries removed from training");
  simulate->add_option("--reps", sim.reps, "Repetitions (default 20)");
  simulate->add_option("--methods", sim.methods,
                       "Comma list of mala-hinge, mala-logistic, lmc-hinge, "
                       "lmc-logistic (default all)")
      ->delimiter(',');
  simulate->add_option("--threads", sim.threads,
                       "Worker threads (default: hardware)");
  simulate->add_option("--out", sim.out_dir, "Output directory");
  add_sampler_flags(simulate, sim.sampler, false);

  FitOptions fit_opt;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit a posterior-mean classifier from CSVs");
  fit_cmd->add_option("--config", config_sink, kConfigHelp);
  fit_cmd->add_option("--design", fit_opt.design_path, "Design CSV (n x p)")
      ->required();
  fit_cmd->add_option("--response", fit_opt.response_path,
                      "Response CSV (n x q)")
      ->required();
  add_response_flags(fit_cmd, fit_opt.response);
  add_sampler_flags(fit_cmd, fit_opt.sampler);
  fit_cmd->add_option("--train-rows", fit_opt.train_rows,
                      "Row-split protocol: training rows per split");
  fit_cmd->add_option("--test-rows", fit_opt.test_rows,
                      "Row-split protocol: test rows per split");
  fit_cmd->add_option("--holdout-fraction", fit_opt.holdout_fraction,
                      "Entry-holdout protocol: fraction of observed entries");
  fit_cmd->add_option("--reps", fit_opt.reps,
                      "Splits for the evaluation protocols (default 100)");
  fit_cmd->add_option("--out", fit_opt.out_dir, "Output directory");

  std::string coeff_path, predict_design, predict_out = "predictions.csv";
  CLI::App* predict_cmd = app.add_subcommand(
      "predict", "Write sign predictions for a coefficients matrix");
  predict_cmd->add_option("--config", config_sink, kConfigHelp);
  predict_cmd->add_option("--coefficients", coeff_path, "Coefficients CSV")
      ->required();
  predict_cmd->add_option("--design", predict_design, "Design CSV")->required();
  predict_cmd->add_option("--out", predict_out, "Output CSV");

  CvOptions cv_opt;
  CLI::App* cv_cmd = app.add_subcommand(
      "cv", "Cross-validate the temperature and prior scale");
  cv_cmd->add_option("--config", config_sink, kConfigHelp);
  cv_cmd->add_option("--design", cv_opt.design_path, "Design CSV")->required();
  cv_cmd->add_option("--response", cv_opt.response_path, "Response CSV")
      ->required();
  add_response_flags(cv_cmd, cv_opt.response);
  add_sampler_flags(cv_cmd, cv_opt.sampler);
  cv_cmd->add_option("--lambda-grid", cv_opt.lambda_grid, "Temperatures")
      ->delimiter(',')
      ->required();
  cv_cmd->add_option("--tau-grid", cv_opt.tau_grid, "Prior scales")
      ->delimiter(',')
      ->required();
  cv_cmd->add_option("--folds", cv_opt.folds, "Folds (default 5)");
  cv_cmd->add_option("--out", cv_opt.out_dir, "Output directory");

  BoundOptions bound_opt;
  CLI::App* bound_cmd =
      app.add_subcommand("bound", "Evaluate the finite-sample risk bounds");
  bound_cmd->add_option("--config", config_sink, kConfigHelp);
  bound_cmd->add_option("--n", bound_opt.inputs.n, "Sample size")->required();
  bound_cmd->add_option("--p", bound_opt.inputs.p, "Covariate dimension")
      ->required();
  bound_cmd->add_option("--q", bound_opt.inputs.q, "Response dimension")
      ->required();
  CLI::Option* m_opt = bound_cmd->add_option(
      "--m", bound_opt.inputs.m, "Observed entries (default n*q)");
  CLI::Option* rstar_opt = bound_cmd->add_option(
      "--rstar", bound_opt.inputs.r_star, "Rank of the optimal predictor");
  CLI::Option* nx_opt =
      bound_cmd->add_option("--norm-x", bound_opt.inputs.norm_x,
                            "Frobenius norm of the design");
  CLI::Option* nmb_opt =
      bound_cmd->add_option("--norm-mb", bound_opt.inputs.norm_mb,
                            "Frobenius norm of the optimal predictor");
  bound_cmd->add_option("--margin-c", bound_opt.inputs.margin_c,
                        "Margin constant C >= 1 (default 1)");
  bound_cmd->add_option("--rbar", bound_opt.inputs.bayes_risk,
                        "Optimal risk (default 0)");
  bound_cmd->add_option("--epsilon", bound_opt.inputs.epsilon,
                        "Slack (default 0.05)");
  bound_cmd->add_option("--varsigma", bound_opt.inputs.varsigma,
                        "Free parameter (default 0.5)");
  bound_cmd->add_flag("--optimize-varsigma", bound_opt.optimize_varsigma,
                      "Golden-section search over varsigma in (0.01, 0.99)");
  bound_cmd->add_option(
      "--setting", bound_opt.setting,
      "Auto-fill r*, ||X||, ||M*|| from a simulated instance of this setting");
  bound_cmd->add_option("--truth", bound_opt.truth, "rank2 or approx-rank2")
      ->check(CLI::IsMember({"rank2", "approx-rank2"}));
  bound_cmd->add_option("--seed", bound_opt.seed,
                        "Seed for the auto-fill instance");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = inject_config(std::move(args),
                         {"simulate", "fit", "predict", "cv", "bound"});
  } catch (const invalid_input& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (fit_cmd->parsed()) return run_fit(fit_opt);
    if (predict_cmd->parsed())
      return run_predict(coeff_path, predict_design, predict_out);
    if (cv_cmd->parsed()) return run_cv(cv_opt);
    if (bound_cmd->parsed()) {
      BoundGiven given;
      given.m = m_opt->count() > 0;
      given.r_star = rstar_opt->count() > 0;
      given.norm_x = nx_opt->count() > 0;
      given.norm_mb = nmb_opt->count() > 0;
      return run_bound(bound_opt, given);
    }
  } catch (const divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const invalid_input& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dimension_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
