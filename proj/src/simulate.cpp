#include "seqquant/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "seqquant/errors.hpp"
#include "seqquant/parallel.hpp"
#include "seqquant/rng.hpp"

namespace seqquant {

namespace {

constexpr std::int64_t kBlock = 4096;

struct Partial {
  std::int64_t tau_sum = 0;
  std::int64_t tau_sq_sum = 0;
  std::int64_t errors = 0;
  std::int64_t truncated = 0;
  double w_sum = 0.0;
  double w_sq_sum = 0.0;
  std::vector<std::int64_t> histogram = std::vector<std::int64_t>(kTauHistogramBins, 0);
};

// Per continuation node: levels and log-likelihood increments of each symbol.
struct Table {
  int K = 0;
  int first = 0;
  int count = 0;
  std::vector<QuantizerParams> levels;
  std::vector<double> llr;
};

Table build_table(const ObservationModel& model, const Policy& policy) {
  Table t;
  t.K = policy.K;
  t.first = policy.first_continuation();
  t.count = static_cast<int>(policy.eta.size());
  t.levels = policy.eta;
  t.llr.resize(static_cast<std::size_t>(t.count) * t.K);
  for (int c = 0; c < t.count; ++c) {
    const Pmf q0 = post_quantizer_pmf(model, Hypothesis::H0, policy.eta[c], policy.transform);
    const Pmf q1 = post_quantizer_pmf(model, Hypothesis::H1, policy.eta[c], policy.transform);
    for (int k = 0; k < t.K; ++k) {
      double v;
      if (q0.probs[k] > 0.0 && q1.probs[k] > 0.0)
        v = std::log(q1.probs[k]) - std::log(q0.probs[k]);
      else
        v = q1.probs[k] > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      t.llr[static_cast<std::size_t>(c) * t.K + k] = v;
    }
  }
  return t;
}

}  // namespace

void SimulationSpec::validate() const {
  if (n_runs < 1) throw InvalidArgument("simulation needs n_runs >= 1");
  if (max_steps < 1) throw InvalidArgument("simulation needs max_steps >= 1");
}

TestRunStats simulate(const ObservationModel& model, const Policy& policy, const SimulationSpec& spec) {
  spec.validate();
  const Table table = build_table(model, policy);
  const ZGrid& zgrid = policy.zgrid;
  const double mean = model.mean(spec.truth);
  const double sd = model.stddev(spec.truth);
  const bool starts_stopped = !(0.0 > policy.log_B && 0.0 < policy.log_A);
  if (!starts_stopped && table.count == 0) throw DegeneratePolicy("policy continues at z = 1 but has no table");

  const std::int64_t blocks = (spec.n_runs + kBlock - 1) / kBlock;
  std::vector<Partial> partial(blocks);
  parallel_for(static_cast<std::size_t>(blocks), spec.threads, [&](std::size_t b) {
    Partial& out = partial[b];
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
    const std::int64_t end = std::min(spec.n_runs, begin + kBlock);
    for (std::int64_t run = begin; run < end; ++run) {
      SplitMix64 rng = SplitMix64::stream(spec.seed, static_cast<std::uint64_t>(run));
      std::normal_distribution<double> gauss(0.0, 1.0);
      double log_z = 0.0;
      std::int64_t tau = 0;
      bool truncated = false;
      while (log_z < policy.log_A && log_z > policy.log_B) {
        if (tau == spec.max_steps) {
          truncated = true;
          break;
        }
        const int node = std::clamp(zgrid.nearest(log_z), table.first, table.first + table.count - 1);
        const int c = node - table.first;
        const double x = mean + sd * gauss(rng);
        const int y = quantize(table.levels[c], policy.transform, x);
        log_z += table.llr[static_cast<std::size_t>(c) * table.K + (y - 1)];
        ++tau;
      }
      const bool decide_h1 = truncated ? log_z >= 0.0 : log_z >= policy.log_A;
      const bool wrong = spec.truth == Hypothesis::H0 ? decide_h1 : !decide_h1;
      out.tau_sum += tau;
      out.tau_sq_sum += tau * tau;
      out.errors += wrong ? 1 : 0;
      out.truncated += truncated ? 1 : 0;
      ++out.histogram[std::min<std::int64_t>(tau, kTauHistogramBins - 1)];
      const double w = decide_h1 ? 0.0 : std::exp(log_z);
      out.w_sum += w;
      out.w_sq_sum += w * w;
    }
  });

  Partial total;
  double w_sum = 0.0, w_sq_sum = 0.0;
  for (const Partial& p : partial) {
    total.tau_sum += p.tau_sum;
    total.tau_sq_sum += p.tau_sq_sum;
    total.errors += p.errors;
    total.truncated += p.truncated;
    w_sum += p.w_sum;
    w_sq_sum += p.w_sq_sum;
    for (int i = 0; i < kTauHistogramBins; ++i) total.histogram[i] += p.histogram[i];
  }

  const double n = static_cast<double>(spec.n_runs);
  auto stderr_of = [n](double mean, double sq_mean) {
    if (n < 2.0) return 0.0;
    const double var = std::max(0.0, sq_mean - mean * mean) * n / (n - 1.0);
    return std::sqrt(var / n);
  };
  TestRunStats s;
  s.n_runs = spec.n_runs;
  s.mean_tau = static_cast<double>(total.tau_sum) / n;
  s.stderr_tau = stderr_of(s.mean_tau, static_cast<double>(total.tau_sq_sum) / n);
  s.error_rate = static_cast<double>(total.errors) / n;
  s.stderr_error = stderr_of(s.error_rate, s.error_rate);
  s.truncated_runs = total.truncated;
  s.tau_histogram = std::move(total.histogram);
  s.mean_weighted_accept_h0 = w_sum / n;
  s.stderr_weighted_accept_h0 = stderr_of(s.mean_weighted_accept_h0, w_sq_sum / n);
  return s;
}

}  // namespace seqquant
