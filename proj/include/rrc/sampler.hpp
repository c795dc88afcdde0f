#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "rrc/losses.hpp"
#include "rrc/prior.hpp"
#include "rrc/rng.hpp"
#include "rrc/types.hpp"

namespace rrc {

enum class Algorithm { LMC, MALA };

inline const char* algorithm_name(Algorithm a) {
  return a == Algorithm::LMC ? "lmc" : "mala";
}

// Multiplicative step-size adaptation gain used during burn-in.
inline constexpr double kAdaptGain = 0.01;
// Abort threshold on the Frobenius norm of the chain state.
inline constexpr double kDivergenceGuard = 1e8;
// An unadjusted chain runs at this fraction of the burn-in-adapted MALA step.
inline constexpr double kLmcStepFraction = 0.1;

struct SamplerConfig {
  double lambda = 1.0;            // temperature multiplying the mean risk
  double tau = 1.0;               // prior scale
  double step_size = 1e-4;        // initial h
  long iterations = 30000;
  long burn_in = 1000;
  long thinning = 1;
  std::uint64_t seed = 0;
  Loss loss = Loss::Hinge;
  Algorithm algorithm = Algorithm::MALA;
  bool adapt_step = true;         // burn-in only; h is frozen afterwards
  double target_acceptance = 0.5;

  void validate() const {
    if (!(lambda >= 0) || !std::isfinite(lambda))
      throw invalid_input("lambda must be finite and >= 0");
    if (!(tau > 0) || !std::isfinite(tau))
      throw invalid_input("tau must be positive and finite");
    if (!(step_size > 0) || !std::isfinite(step_size))
      throw invalid_input("step size must be positive and finite");
    if (iterations < 1) throw invalid_input("iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations)
      throw invalid_input("burn-in must satisfy 0 <= burn_in < iterations");
    if (thinning < 1) throw invalid_input("thinning must be >= 1");
    if (!(target_acceptance > 0) || !(target_acceptance < 1))
      throw invalid_input("target acceptance must lie in (0,1)");
  }
};

struct ChainResult {
  Matrixd posterior_mean;
  double acceptance_rate = 1.0;   // 1.0 by convention for LMC
  double final_step_size = 0.0;
  std::vector<std::pair<long, double>> risk_trace;  // (iteration, train risk)
  long n_kept = 0;
};

// Value, gradient and the underlying mean risk of the Gibbs log-target
//   log rho_lambda(M) = -lambda * risk(M) + log pi(M),
// computed in one pass: the margin matrix is shared between the risk and its
// gradient, and the prior factorization between log-density and gradient.
struct TargetEvaluation {
  double log_density = 0;
  Matrixd gradient;
  double risk = 0;
};

inline TargetEvaluation evaluate_target(const Matrixd& coeffs,
                                        const Matrixd& design,
                                        const ResponseMatrix& response,
                                        double lambda, double tau, Loss loss) {
  const Matrixd scores = detail::margins(coeffs, design, response);
  TargetEvaluation out;
  out.risk = loss_risk_from_scores(scores, response, loss);
  const PriorEvaluation<double> prior = evaluate_prior(coeffs, tau);
  out.log_density = -lambda * out.risk + prior.log_density;
  out.gradient =
      prior.gradient -
      lambda * loss_gradient_from_scores(scores, design, response, loss);
  return out;
}

inline double log_target(const Matrixd& coeffs, const Matrixd& design,
                         const ResponseMatrix& response,
                         const SamplerConfig& cfg) {
  const Matrixd scores = detail::margins(coeffs, design, response);
  return -cfg.lambda * loss_risk_from_scores(scores, response, cfg.loss) +
         log_prior(coeffs, cfg.tau);
}

inline Matrixd log_target_gradient(const Matrixd& coeffs, const Matrixd& design,
                                   const ResponseMatrix& response,
                                   const SamplerConfig& cfg) {
  return evaluate_target(coeffs, design, response, cfg.lambda, cfg.tau,
                         cfg.loss)
      .gradient;
}

// One unadjusted Langevin step,
//   M' = M + h grad(M) + sqrt(2h) N,   N iid standard normal.
template <class Rng>
Matrixd lmc_step_with_gradient(const Matrixd& state, const Matrixd& gradient,
                               double step, Rng& rng) {
  if (!(step > 0)) throw invalid_input("step size must be positive");
  return state + step * gradient +
         std::sqrt(2.0 * step) *
             gaussian_matrix(state.rows(), state.cols(), rng);
}

template <class GradFn, class Rng>
Matrixd lmc_step(const Matrixd& state, GradFn&& gradient, double step,
                 Rng& rng) {
  return lmc_step_with_gradient(state, gradient(state), step, rng);
}

struct MalaStep {
  Matrixd state;
  bool accepted = false;
  double log_alpha = 0;
};

namespace detail {

// Log proposal density of x' given x up to the common constant:
//   log q(x'|x) = -||x' - x - h grad(x)||_F^2 / (4h).
inline double mala_log_q(const Matrixd& to, const Matrixd& from,
                         const Matrixd& grad_from, double step) {
  return -(to - from - step * grad_from).squaredNorm() / (4.0 * step);
}

}  // namespace detail

struct MalaResult {
  Matrixd state;
  TargetEvaluation eval;   // target at the returned state
  bool accepted = false;
  double log_alpha = 0;
};

// MALA step reusing the cached evaluation at the current state; evaluates
// the target exactly once, at the proposal.
template <class TargetFn, class Rng>
MalaResult mala_step_cached(const Matrixd& state, const TargetEvaluation& at,
                            TargetFn&& target, double step, Rng& rng) {
  if (!(step > 0)) throw invalid_input("step size must be positive");
  MalaResult out;
  const Matrixd proposal =
      state + step * at.gradient +
      std::sqrt(2.0 * step) * gaussian_matrix(state.rows(), state.cols(), rng);

  if (!proposal.allFinite()) {  // auto-reject outside the target's domain
    out.state = state;
    out.eval = at;
    out.log_alpha = -std::numeric_limits<double>::infinity();
    return out;
  }

  TargetEvaluation prop_eval = target(proposal);
  if (std::isnan(prop_eval.log_density) ||
      prop_eval.log_density == -std::numeric_limits<double>::infinity()) {
    out.state = state;
    out.eval = at;
    out.log_alpha = -std::numeric_limits<double>::infinity();
    return out;
  }

  const double log_q_forward =
      detail::mala_log_q(proposal, state, at.gradient, step);
  const double log_q_backward =
      detail::mala_log_q(state, proposal, prop_eval.gradient, step);
  out.log_alpha =
      (prop_eval.log_density - at.log_density) + (log_q_backward - log_q_forward);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  out.accepted = std::log(unif(rng)) < out.log_alpha;
  if (out.accepted) {
    out.state = proposal;
    out.eval = std::move(prop_eval);
  } else {
    out.state = state;
    out.eval = at;
  }
  return out;
}

// MALA step from separate log-density and gradient callables.
template <class LogDensityFn, class GradFn, class Rng>
MalaStep mala_step(const Matrixd& state, LogDensityFn&& log_density,
                   GradFn&& gradient, double step, Rng& rng) {
  auto target = [&](const Matrixd& m) {
    TargetEvaluation ev;
    ev.log_density = log_density(m);
    ev.gradient = gradient(m);
    return ev;
  };
  TargetEvaluation at = target(state);
  MalaResult res = mala_step_cached(state, at, target, step, rng);
  return MalaStep{std::move(res.state), res.accepted, res.log_alpha};
}

namespace detail {

// Shared chain driver. TargetFn: const Matrixd& -> TargetEvaluation.
template <class TargetFn>
ChainResult drive_chain(TargetFn&& target, Matrixd state,
                        const SamplerConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng = make_rng(cfg.seed);

  TargetEvaluation current = target(state);
  double step = cfg.step_size;

  Matrixd mean_accum = Matrixd::Zero(state.rows(), state.cols());
  long n_kept = 0, post_steps = 0, post_accepted = 0;
  const long trace_stride = std::max<long>(1, cfg.iterations / 512);
  std::vector<std::pair<long, double>> trace;
  trace.reserve(static_cast<std::size_t>(cfg.iterations / trace_stride) + 2);

  for (long t = 0; t < cfg.iterations; ++t) {
    const bool in_burn_in = t < cfg.burn_in;
    // An adaptive LMC run uses Metropolis-adjusted steps while burning in
    // (those draws are discarded anyway), then freezes at a fraction of the
    // adapted step and continues unadjusted.
    const bool metropolis_now =
        cfg.algorithm == Algorithm::MALA ||
        (cfg.algorithm == Algorithm::LMC && cfg.adapt_step && in_burn_in);

    bool accepted = true;
    if (metropolis_now) {
      MalaResult res = mala_step_cached(state, current, target, step, rng);
      state = std::move(res.state);
      current = std::move(res.eval);
      accepted = res.accepted;
      if (in_burn_in && cfg.adapt_step)
        step *= std::exp(kAdaptGain *
                         ((accepted ? 1.0 : 0.0) - cfg.target_acceptance));
    } else {
      state = lmc_step_with_gradient(state, current.gradient, step, rng);
      current = target(state);
    }

    if (cfg.algorithm == Algorithm::LMC && cfg.adapt_step &&
        t + 1 == cfg.burn_in)
      step *= kLmcStepFraction;

    const double norm = state.norm();
    if (!(norm <= kDivergenceGuard)) throw divergence_error(t + 1, step, norm);

    if (!in_burn_in) {
      ++post_steps;
      if (accepted) ++post_accepted;
      if ((t - cfg.burn_in) % cfg.thinning == 0) {
        mean_accum += state;
        ++n_kept;
      }
    }
    if ((t + 1) % trace_stride == 0 || t + 1 == cfg.iterations)
      trace.emplace_back(t + 1, current.risk);
  }

  ChainResult out;
  out.posterior_mean = mean_accum / double(n_kept);
  out.acceptance_rate = cfg.algorithm == Algorithm::MALA
                            ? double(post_accepted) / double(post_steps)
                            : 1.0;
  out.final_step_size = step;
  out.risk_trace = std::move(trace);
  out.n_kept = n_kept;
  return out;
}

}  // namespace detail

// Runs the configured sampler on the Gibbs target for (X, Y). The chain
// starts from `init` when given, otherwise from the zero matrix (the prior
// mode). Same seed and config produce an identical ChainResult.
inline ChainResult run_chain(const Matrixd& design,
                             const ResponseMatrix& response,
                             const SamplerConfig& cfg,
                             const Matrixd& init = Matrixd()) {
  Matrixd state;
  if (init.size() == 0) {
    state = Matrixd::Zero(design.cols(), response.cols());
  } else {
    if (init.rows() != design.cols() || init.cols() != response.cols())
      throw dimension_error("initial state dimensions do not match data");
    require_finite(init, "initial state");
    state = init;
  }
  auto target = [&](const Matrixd& m) {
    return evaluate_target(m, design, response, cfg.lambda, cfg.tau, cfg.loss);
  };
  return detail::drive_chain(target, std::move(state), cfg);
}

// Theory-driven temperature defaults. Full: 2nq/(3C+2); Missing: 2m/(3C+2);
// SlowRate: 2 sqrt(nq/(p+q+2)) (no margin assumption; needs p).
inline double default_lambda(Regime regime, Index n, Index q, Index m,
                             double margin_c, Index p = 0) {
  if (n < 1 || q < 1 || m < 1)
    throw invalid_input("default_lambda: counts must be >= 1");
  if (!(margin_c >= 1))
    throw invalid_input("default_lambda: margin constant C must be >= 1");
  switch (regime) {
    case Regime::Full:
      return 2.0 * double(n) * double(q) / (3.0 * margin_c + 2.0);
    case Regime::Missing:
      return 2.0 * double(m) / (3.0 * margin_c + 2.0);
    case Regime::SlowRate:
      if (p < 1) throw invalid_input("default_lambda: SlowRate requires p");
      return 2.0 * std::sqrt(double(n) * double(q) / double(p + q + 2));
  }
  throw invalid_input("default_lambda: unknown regime");
}

}  // namespace rrc
