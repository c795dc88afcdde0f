#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "rrc/losses.hpp"
#include "rrc/rng.hpp"
#include "rrc/sampler.hpp"
#include "rrc/types.hpp"

namespace rrc {

struct FitResult {
  Matrixd coefficients;   // posterior mean of the kept draws
  ChainResult chain;
  SamplerConfig config_used;
};

inline FitResult fit(const Matrixd& design, const ResponseMatrix& response,
                     const SamplerConfig& cfg, const Matrixd& init = Matrixd()) {
  if (response.mask.empty())
    throw invalid_input("fit requires at least one observed response entry");
  FitResult out;
  out.chain = run_chain(design, response, cfg, init);
  out.coefficients = out.chain.posterior_mean;
  out.config_used = cfg;
  return out;
}

// Fraction of entries in `eval_mask` where sign(XM) disagrees with the label.
inline double misclassification(const Matrixd& coeffs, const Matrixd& design,
                                const LabelMatrix& labels,
                                const ObservationMask& eval_mask) {
  if (eval_mask.empty())
    throw invalid_input("misclassification requires a nonempty evaluation mask");
  if (labels.rows() != design.rows() || coeffs.rows() != design.cols() ||
      labels.cols() != coeffs.cols())
    throw dimension_error("misclassification: incompatible dimensions");
  if (eval_mask.rows() != labels.rows() || eval_mask.cols() != labels.cols())
    throw dimension_error("misclassification: mask does not match labels");
  const LabelMatrix predicted = predict(coeffs, design);
  Index wrong = 0;
  for (Index i = 0; i < labels.rows(); ++i)
    for (Index k = 0; k < labels.cols(); ++k)
      if (eval_mask.observed(i, k) && predicted(i, k) != labels(i, k)) ++wrong;
  return double(wrong) / double(eval_mask.count());
}

struct CvReport {
  std::vector<std::pair<double, double>> grid;    // (lambda, tau), sorted
  std::vector<std::vector<double>> fold_errors;   // [grid point][fold]
  std::vector<double> mean_errors;                // per grid point
  std::size_t best_index = 0;
  double best_lambda = 0;
  double best_tau = 0;
};

// Uniformly random K-way partition of the observed entry set: the pairs are
// shuffled, then dealt round-robin.
inline std::vector<std::vector<IndexPair>> cv_partition(
    const ObservationMask& mask, int folds, std::uint64_t seed) {
  if (folds < 2) throw invalid_input("cross-validation requires K >= 2 folds");
  std::vector<IndexPair> entries = mask.pairs();
  std::mt19937_64 rng = make_rng(derive_seed(seed, 0));
  std::shuffle(entries.begin(), entries.end(), rng);
  std::vector<std::vector<IndexPair>> fold_entries(folds);
  for (std::size_t j = 0; j < entries.size(); ++j)
    fold_entries[j % folds].push_back(entries[j]);
  for (const auto& f : fold_entries)
    if (f.empty() || Index(f.size()) == mask.count())
      throw invalid_input("infeasible fold: empty train or validation set");
  return fold_entries;
}

// K-fold cross-validation over the observed entry set. Folds partition the
// observed (i,k) pairs uniformly at random; each grid point is scored by the
// mean held-out misclassification, ties broken toward smaller lambda, then
// smaller tau. Chains share seeds across grid points (common random numbers),
// so duplicated grid points score identically.
inline CvReport cross_validate(const Matrixd& design,
                               const ResponseMatrix& response,
                               const SamplerConfig& cfg_base,
                               std::vector<double> lambda_grid,
                               std::vector<double> tau_grid, int folds,
                               std::uint64_t seed) {
  if (lambda_grid.empty() || tau_grid.empty())
    throw invalid_input("cross-validation grids must be nonempty");
  const auto fold_entries = cv_partition(response.mask, folds, seed);

  CvReport report;
  for (double lambda : lambda_grid)
    for (double tau : tau_grid) report.grid.emplace_back(lambda, tau);
  std::sort(report.grid.begin(), report.grid.end());

  const Index rows = response.rows(), cols = response.cols();
  report.fold_errors.resize(report.grid.size());
  report.mean_errors.resize(report.grid.size());

  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    report.fold_errors[g].resize(folds);
    for (int f = 0; f < folds; ++f) {
      BoolArray train_flags = response.mask.flags();
      for (const auto& [i, k] : fold_entries[f]) train_flags(i, k) = false;
      ResponseMatrix train(response.labels, ObservationMask(train_flags));
      ObservationMask val_mask =
          ObservationMask::from_pairs(rows, cols, fold_entries[f]);

      SamplerConfig cfg = cfg_base;
      cfg.lambda = report.grid[g].first;
      cfg.tau = report.grid[g].second;
      cfg.seed = derive_seed(seed, {1, std::uint64_t(f)});
      const FitResult fitted = fit(design, train, cfg);
      report.fold_errors[g][f] =
          misclassification(fitted.coefficients, design, response.labels,
                            val_mask);
    }
    double sum = 0;
    for (double e : report.fold_errors[g]) sum += e;
    report.mean_errors[g] = sum / folds;
    if (g == 0 || report.mean_errors[g] < report.mean_errors[report.best_index])
      report.best_index = g;
  }
  report.best_lambda = report.grid[report.best_index].first;
  report.best_tau = report.grid[report.best_index].second;
  return report;
}

}  // namespace rrc
