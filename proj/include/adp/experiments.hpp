#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "adp/signal.hpp"

namespace adp {

/// Full description of one CLI experiment run. Every field is stamped into
/// the run outputs; a fixed seed makes the whole run deterministic.
struct ExperimentConfig {
  int schema_version = 1;
  std::string experiment = "grid";  // figure1 | grid | initvals
  std::string preset_id = "default";
  std::string op_kind = "integration";  // integration | convolution
  long n = 128;
  Interval interval{0.0, 1.0};
  double sigma_frac = 0.03;  // convolution kernel width / interval length
  double target_psnr = 40.0;
  int truth_id = 1;  // ground truth used by figure1/initvals (1..3)

  // Penalty weights. The outer weight is folded into (alpha1, alpha2); the
  // squared-l2 experiments use alpha_adp directly.
  double alpha_adp = 0.05;
  double alpha1 = 0.01;
  double alpha2 = 0.1;
  bool sweep_enabled = true;  // a-posteriori (alpha1, alpha2) selection (grid runs)
  double a1_min = 1e-4, a1_max = 3e-2;
  double a2_min = 1e-2, a2_max = 1.0;
  int sweep_points = 5;

  double beta = 0.0;
  double lr_ift = 0.5;
  long iters_ift = 400;
  double lr_lista = 0.5;
  long iters_lista = 400;
  double lr_l10 = 0.5;
  long iters_l10 = 400;
  double ista_tol = 1e-10;
  double ivanov_tol = 1e-6;
  double sweep_ivanov_tol = 1e-3;
  double tau = 1.1;  // discrepancy factor for early stopping
  std::uint64_t seed = 20240915ULL;
  std::string out_dir = "out";
};

ExperimentConfig preset_config(const std::string& experiment, const std::string& preset_id);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Three fixed ground truths on the interval: a three-level step profile, a
/// piecewise-linear hat, and a smooth two-sinusoid sum.
std::array<Signal, 3> make_ground_truths(long n, Interval interval);

/// Adds seeded Gaussian noise scaled so the peak signal-to-noise ratio (peak =
/// max |y|, plain RMS) hits the target exactly; returns the noisy signal and
/// the realized noise norm delta.
std::pair<Signal, double> add_noise(const Signal& y, double target_psnr, std::uint64_t seed);

struct SignalMetrics {
  double l2_error = 0.0;
  double psnr = 0.0;  // +inf when the signals coincide
};

SignalMetrics metrics(const Signal& x, const Signal& x_ref);

/// One emitted reconstruction plus everything needed to recompute its metrics.
struct RunEntry {
  std::string method;
  std::string preset;    // truth1 | truth2 | truth3
  std::string op_kind;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  Signal out;
  SignalMetrics m;
  long iterations = 0;
  double wall_ms = 0.0;  // kept in memory / run.log; metrics.csv writes 0
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<RunEntry> entries;
  std::vector<std::string> log_lines;
  // pairwise output distances: (cell, method_a, method_b, ||a-b||)
  std::vector<std::tuple<std::string, std::string, std::string, double>> distances;
  // named non-method signals worth persisting (ground truths, noisy data)
  std::vector<std::pair<std::string, Signal>> extra_signals;
  // auxiliary CSV tables: file name -> preformatted lines (header first)
  std::vector<std::pair<std::string, std::vector<std::string>>> tables;
};

RunRecord run_figure1(const ExperimentConfig& cfg);
RunRecord run_method_grid(const ExperimentConfig& cfg);
RunRecord run_initial_value_study(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment and writes metrics.csv, signals.csv, plots and
/// auxiliary tables into cfg.out_dir.
RunRecord run_from_config(const ExperimentConfig& cfg);

/// Condensed library self-checks; prints one line per check, returns the
/// number of failures.
int selftest(std::ostream& os);

}  // namespace adp
