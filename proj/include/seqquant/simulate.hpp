#pragma once

// Monte Carlo runs of a quantized sequential test driven by a policy table.

#include <cstdint>
#include <vector>

#include "seqquant/dp.hpp"
#include "seqquant/models.hpp"

namespace seqquant {

struct SimulationSpec {
  std::int64_t n_runs = 1'000'000;
  std::uint64_t seed = 1;
  Hypothesis truth = Hypothesis::H0;
  std::int64_t max_steps = 100'000;
  int threads = 1;

  void validate() const;
};

struct TestRunStats {
  std::int64_t n_runs = 0;
  double mean_tau = 0.0;
  double stderr_tau = 0.0;
  /// Fraction of runs deciding for the hypothesis that is not true.
  double error_rate = 0.0;
  double stderr_error = 0.0;
  /// Runs cut off at max_steps; they decide H1 iff z >= 1 and stay in every mean.
  std::int64_t truncated_runs = 0;
  /// tau_histogram[t] counts runs stopping after t samples; the last bin
  /// also collects every longer run.
  std::vector<std::int64_t> tau_histogram;
  /// Mean and standard error of z_tau * 1{accept H0}. Under H0 this
  /// estimates the probability of accepting H0 under H1.
  double mean_weighted_accept_h0 = 0.0;
  double stderr_weighted_accept_h0 = 0.0;
};

inline constexpr int kTauHistogramBins = 1024;

/// Runs the test n_runs times: z starts at 1, the quantizer comes from the
/// policy node nearest to log z, z is multiplied by Q1(y)/Q0(y), and the run
/// stops once log z >= log_A (decide H1) or log z <= log_B (decide H0).
/// Bit-reproducible for a given seed regardless of the thread count.
TestRunStats simulate(const ObservationModel& model, const Policy& policy, const SimulationSpec& spec);

}  // namespace seqquant
