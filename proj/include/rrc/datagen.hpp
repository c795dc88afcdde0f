#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "rrc/estimator.hpp"
#include "rrc/losses.hpp"
#include "rrc/rng.hpp"
#include "rrc/sampler.hpp"
#include "rrc/types.hpp"

namespace rrc {

// Response-generation settings. Settings I are sign models Y = sign(XM* + E) B
// with optional Gaussian noise E and label flips B; settings II draw Bernoulli
// labels with success probability sigmoid(XM* + E).
enum class SettingId { I1, I2, I3, I4, II1, II2 };

enum class TruthKind { ExactRank2, ApproxRank2 };

inline std::string setting_name(SettingId id) {
  switch (id) {
    case SettingId::I1: return "I.1";
    case SettingId::I2: return "I.2";
    case SettingId::I3: return "I.3";
    case SettingId::I4: return "I.4";
    case SettingId::II1: return "II.1";
    case SettingId::II2: return "II.2";
  }
  return "?";
}

inline SettingId parse_setting(std::string_view text) {
  if (text == "I.1") return SettingId::I1;
  if (text == "I.2") return SettingId::I2;
  if (text == "I.3") return SettingId::I3;
  if (text == "I.4") return SettingId::I4;
  if (text == "II.1") return SettingId::II1;
  if (text == "II.2") return SettingId::II2;
  throw invalid_input("unknown setting id: " + std::string(text));
}

// Default perturbation scale for the approximately rank-2 truth; the
// perturbation variance is 0.1.
inline const double kApproxTruthNoiseSd = std::sqrt(0.1);

struct SimSetting {
  SettingId id = SettingId::I1;
  TruthKind truth = TruthKind::ExactRank2;
  Index n = 100, p = 12, q = 8;
  double missing_fraction = 0.0;
  std::uint64_t seed = 0;
  double approx_noise_sd = kApproxTruthNoiseSd;
};

struct SimInstance {
  Matrixd X;
  Matrixd M_star;
  ResponseMatrix Y;         // responses under the training mask
  LabelMatrix Y_full;       // complete label matrix, for evaluation
  ObservationMask heldout;  // complement of the training mask
};

template <class Rng>
Matrixd gen_design(Index n, Index p, Rng& rng) {
  if (n < 1 || p < 1) throw invalid_input("design dimensions must be >= 1");
  return gaussian_matrix(n, p, rng);
}

// Rank-2 truth A_{p x 2} B_{q x 2}^T with standard normal factors; the
// approximate variant is 2 M' + N with N entries of standard deviation
// `approx_noise_sd`.
template <class Rng>
Matrixd gen_truth(Index p, Index q, TruthKind kind, Rng& rng,
                  double approx_noise_sd = kApproxTruthNoiseSd) {
  if (p < 2 || q < 2)
    throw invalid_input("rank-2 truth requires p >= 2 and q >= 2");
  const Matrixd a = gaussian_matrix(p, 2, rng);
  const Matrixd b = gaussian_matrix(q, 2, rng);
  Matrixd truth = a * b.transpose();
  if (kind == TruthKind::ApproxRank2)
    truth = 2.0 * truth + gaussian_matrix(p, q, rng, approx_noise_sd);
  return truth;
}

template <class Rng>
ResponseMatrix gen_responses(const Matrixd& design, const Matrixd& truth,
                             SettingId id, Rng& rng) {
  if (design.cols() != truth.rows())
    throw dimension_error("design columns do not match truth rows");
  const Index n = design.rows(), q = truth.cols();
  Matrixd scores = design * truth;

  const bool gaussian_noise = id == SettingId::I2 || id == SettingId::I4 ||
                              id == SettingId::II2;
  if (gaussian_noise) scores += gaussian_matrix(n, q, rng);

  LabelMatrix labels(n, q);
  if (id == SettingId::II1 || id == SettingId::II2) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < q; ++k)
        labels(i, k) = unif(rng) < detail::sigmoid(scores(i, k))
                           ? std::int8_t(1)
                           : std::int8_t(-1);
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < q; ++k)
        labels(i, k) = scores(i, k) >= 0 ? std::int8_t(1) : std::int8_t(-1);
    if (id == SettingId::I3 || id == SettingId::I4) {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < q; ++k)
          if (unif(rng) < 0.1) labels(i, k) = -labels(i, k);
    }
  }
  return make_full_response(std::move(labels));
}

// Observed set after removing exactly round(fraction * n * q) entries chosen
// uniformly without replacement.
template <class Rng>
ObservationMask gen_mask(Index n, Index q, double missing_fraction, Rng& rng) {
  if (!(missing_fraction >= 0.0) || missing_fraction >= 1.0)
    throw invalid_input("missing fraction must lie in [0, 1)");
  const Index total = n * q;
  const Index removed = Index(std::llround(missing_fraction * double(total)));
  BoolArray flags = BoolArray::Constant(n, q, true);
  if (removed == 0) return ObservationMask(std::move(flags));

  std::vector<Index> order(static_cast<std::size_t>(total));
  for (Index j = 0; j < total; ++j) order[static_cast<std::size_t>(j)] = j;
  for (Index j = 0; j < removed; ++j) {
    std::uniform_int_distribution<Index> pick(j, total - 1);
    std::swap(order[static_cast<std::size_t>(j)],
              order[static_cast<std::size_t>(pick(rng))]);
    const Index flat = order[static_cast<std::size_t>(j)];
    flags(flat / q, flat % q) = false;
  }
  return ObservationMask(std::move(flags));
}

template <class Rng>
SimInstance gen_instance(const SimSetting& setting, Rng& rng) {
  SimInstance inst;
  inst.X = gen_design(setting.n, setting.p, rng);
  inst.M_star =
      gen_truth(setting.p, setting.q, setting.truth, rng, setting.approx_noise_sd);
  ResponseMatrix full = gen_responses(inst.X, inst.M_star, setting.id, rng);
  inst.Y_full = full.labels;
  ObservationMask train =
      gen_mask(setting.n, setting.q, setting.missing_fraction, rng);
  inst.heldout = train.complement();
  inst.Y = ResponseMatrix(full.labels, std::move(train));
  return inst;
}

enum class Method { MalaHinge, MalaLogistic, LmcHinge, LmcLogistic };

inline constexpr std::array<Method, 4> kAllMethods = {
    Method::MalaHinge, Method::MalaLogistic, Method::LmcHinge,
    Method::LmcLogistic};

inline std::string method_name(Method m) {
  switch (m) {
    case Method::MalaHinge: return "mala-hinge";
    case Method::MalaLogistic: return "mala-logistic";
    case Method::LmcHinge: return "lmc-hinge";
    case Method::LmcLogistic: return "lmc-logistic";
  }
  return "?";
}

inline Method parse_method(std::string_view text) {
  for (Method m : kAllMethods)
    if (text == method_name(m)) return m;
  throw invalid_input("unknown method: " + std::string(text));
}

inline Algorithm method_algorithm(Method m) {
  return (m == Method::MalaHinge || m == Method::MalaLogistic)
             ? Algorithm::MALA
             : Algorithm::LMC;
}

inline Loss method_loss(Method m) {
  return (m == Method::MalaHinge || m == Method::LmcHinge) ? Loss::Hinge
                                                           : Loss::Logistic;
}

struct MethodSummary {
  Method method;
  double mean_error_pct = 0;
  double std_error_pct = 0;        // sample std over repetitions; 0 when degenerate
  bool std_degenerate = false;     // true when reps < 2
  int reps = 0;
  double mean_acceptance = 0;
  double mean_final_step = 0;
  std::vector<double> errors_pct;  // per repetition
};

// Repeats the simulation protocol: per repetition a fresh instance is drawn,
// each method is fit on the observed entries, and misclassification is scored
// on the held-out entries (missing regime) or on an independent response
// redraw over the full grid (fully observed regime). `lambda_auto` replaces
// the configured temperature with the observed-entry count, the scaling under
// which the tempered risk is the plain sum of entry losses.
inline std::vector<MethodSummary> run_replicated_experiment(
    const SimSetting& setting, const std::vector<Method>& methods, int reps,
    const SamplerConfig& base_cfg, bool lambda_auto = true, int threads = 0) {
  if (reps < 1) throw invalid_input("repetitions must be >= 1");
  if (methods.empty()) throw invalid_input("no methods requested");
  base_cfg.validate();

  const std::size_t n_methods = methods.size();
  std::vector<std::vector<double>> errors(n_methods,
                                          std::vector<double>(reps, 0.0));
  std::vector<std::vector<double>> acc(n_methods,
                                       std::vector<double>(reps, 0.0));
  std::vector<std::vector<double>> steps(n_methods,
                                         std::vector<double>(reps, 0.0));

  const bool missing_regime = setting.missing_fraction > 0.0;

  auto run_rep = [&](int rep) {
    std::mt19937_64 data_rng =
        make_rng(derive_seed(setting.seed, {0, std::uint64_t(rep)}));
    const SimInstance inst = gen_instance(setting, data_rng);

    LabelMatrix eval_labels;
    ObservationMask eval_mask;
    if (missing_regime) {
      eval_labels = inst.Y_full;
      eval_mask = inst.heldout;
    } else {
      std::mt19937_64 eval_rng =
          make_rng(derive_seed(setting.seed, {2, std::uint64_t(rep)}));
      eval_labels =
          gen_responses(inst.X, inst.M_star, setting.id, eval_rng).labels;
      eval_mask = ObservationMask::full(setting.n, setting.q);
    }

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      SamplerConfig cfg = base_cfg;
      cfg.algorithm = method_algorithm(methods[mi]);
      cfg.loss = method_loss(methods[mi]);
      if (lambda_auto) cfg.lambda = double(inst.Y.mask.count());
      cfg.seed =
          derive_seed(setting.seed, {1, std::uint64_t(rep), std::uint64_t(mi)});
      const FitResult fitted = fit(inst.X, inst.Y, cfg);
      errors[mi][rep] = misclassification(fitted.coefficients, inst.X,
                                          eval_labels, eval_mask);
      acc[mi][rep] = fitted.chain.acceptance_rate;
      steps[mi][rep] = fitted.chain.final_step_size;
    }
  };

  int workers = threads > 0
                    ? threads
                    : int(std::min<unsigned>(std::thread::hardware_concurrency(),
                                             unsigned(reps)));
  workers = std::max(1, std::min(workers, reps));
  if (workers == 1) {
    for (int rep = 0; rep < reps; ++rep) run_rep(rep);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < reps;
             rep = next.fetch_add(1)) {
          try {
            run_rep(rep);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<MethodSummary> table;
  table.reserve(n_methods);
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    MethodSummary row;
    row.method = methods[mi];
    row.reps = reps;
    row.errors_pct.resize(static_cast<std::size_t>(reps));
    double mean = 0;
    for (int r = 0; r < reps; ++r) {
      row.errors_pct[static_cast<std::size_t>(r)] = 100.0 * errors[mi][r];
      mean += row.errors_pct[static_cast<std::size_t>(r)];
      row.mean_acceptance += acc[mi][r];
      row.mean_final_step += steps[mi][r];
    }
    mean /= reps;
    row.mean_error_pct = mean;
    row.mean_acceptance /= reps;
    row.mean_final_step /= reps;
    if (reps < 2) {
      row.std_degenerate = true;
    } else {
      double ss = 0;
      for (double e : row.errors_pct) ss += (e - mean) * (e - mean);
      row.std_error_pct = std::sqrt(ss / double(reps - 1));
    }
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace rrc
