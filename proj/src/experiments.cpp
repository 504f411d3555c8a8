#include "adp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "adp/adp_iterative.hpp"
#include "adp/constructions.hpp"
#include "adp/dip_lista.hpp"
#include "adp/errors.hpp"
#include "adp/operators.hpp"
#include "adp/variational.hpp"
#include "svg.hpp"

namespace adp {

namespace {

std::string fmt(double v, const char* spec = "%.12g") {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (std::log10(hi) - std::log10(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, std::log10(lo) + step * i);
  return out;
}

std::uint64_t cell_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix-style mixing so per-cell streams are independent of schedule
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

LinearOp make_operator(const ExperimentConfig& cfg) {
  if (cfg.op_kind == "integration") return make_integration_operator(cfg.n, cfg.interval);
  if (cfg.op_kind == "convolution")
    return make_convolution_operator(cfg.n, cfg.interval, cfg.sigma_frac * cfg.interval.length());
  throw std::invalid_argument("unknown operator kind: " + cfg.op_kind);
}

}  // namespace

std::array<Signal, 3> make_ground_truths(long n, Interval interval) {
  const auto step_profile = [](double t) { return t < 0.25 ? 0.0 : (t < 0.55 ? 2.0 : 1.0); };
  const auto hat_profile = [](double t) {
    return std::max(0.0, 1.0 - std::abs(t - 0.45) / 0.25);
  };
  const auto smooth_profile = [](double t) {
    return 0.7 * std::sin(2.0 * std::numbers::pi * t) + 0.5 * std::sin(5.0 * std::numbers::pi * t);
  };
  const auto remap = [&](const std::function<double(double)>& f) {
    // profiles are written for (0,1); stretch onto the configured interval
    return Signal::from_function(
        [&](double t) { return f((t - interval.a) / interval.length()); }, n, interval);
  };
  return {remap(step_profile), remap(hat_profile), remap(smooth_profile)};
}

std::pair<Signal, double> add_noise(const Signal& y, double target_psnr, std::uint64_t seed) {
  const double peak = y.samples().cwiseAbs().maxCoeff();
  if (peak == 0.0) throw std::invalid_argument("add_noise: y must be nonzero");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd e(y.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = gauss(rng);
  const double rms_target = peak * std::pow(10.0, -target_psnr / 20.0);
  const double rms_now = e.norm() / std::sqrt(static_cast<double>(e.size()));
  e *= rms_target / rms_now;
  const Signal noise = y.with_samples(e);
  return {y + noise, norm(noise)};
}

SignalMetrics metrics(const Signal& x, const Signal& x_ref) {
  if (x.size() != x_ref.size()) throw std::invalid_argument("metrics: length mismatch");
  SignalMetrics out;
  out.l2_error = norm(x - x_ref);
  const double peak = x_ref.samples().cwiseAbs().maxCoeff();
  const double rmse =
      (x.samples() - x_ref.samples()).norm() / std::sqrt(static_cast<double>(x.size()));
  out.psnr = rmse == 0.0 ? std::numeric_limits<double>::infinity()
                         : 20.0 * std::log10(peak / rmse);
  return out;
}

// ---------------------------------------------------------------------------
// configs

ExperimentConfig preset_config(const std::string& experiment, const std::string& preset_id) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.preset_id = preset_id;
  const bool quick = preset_id.rfind("quick", 0) == 0;

  if (experiment == "figure1") {
    cfg.op_kind = "integration";
    cfg.target_psnr = 40.0;
    cfg.truth_id = 1;
    cfg.alpha_adp = 0.05;
    cfg.lr_ift = 0.5;
    cfg.iters_ift = quick ? 300 : 1500;
    if (quick) cfg.n = 48;
    return cfg;
  }
  if (experiment == "grid") {
    if (preset_id == "integration" || preset_id == "quick-integration") {
      cfg.op_kind = "integration";
      cfg.target_psnr = 40.0;
    } else if (preset_id == "convolution" || preset_id == "quick-convolution") {
      cfg.op_kind = "convolution";
      cfg.target_psnr = 45.0;
    } else {
      throw std::invalid_argument("grid preset must be [quick-]integration|[quick-]convolution");
    }
    if (quick) {
      cfg.n = 48;
      cfg.iters_ift = 150;
      cfg.iters_lista = 150;
      cfg.iters_l10 = 150;
      cfg.sweep_points = 3;
      cfg.a1_min = 1e-3;
      cfg.a2_min = 0.05;
    }
    return cfg;
  }
  if (experiment == "initvals") {
    cfg.op_kind = "convolution";
    cfg.target_psnr = 45.0;
    cfg.truth_id = 3;
    cfg.sweep_enabled = false;
    cfg.alpha1 = 0.002;
    cfg.alpha2 = 0.3;
    if (quick) {
      cfg.n = 48;
      cfg.iters_ift = 120;
      cfg.iters_lista = 120;
    }
    return cfg;
  }
  throw std::invalid_argument("unknown experiment: " + experiment);
}

namespace {

using nlohmann::json;

template <typename T>
void read_into(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("load_config: cannot open " + path);
  json j = json::parse(is);
  int version = j.value("schema_version", 1);
  if (version != 1)
    throw std::invalid_argument("load_config: unsupported schema_version " +
                                std::to_string(version));

  ExperimentConfig cfg;
  std::string experiment = j.value("experiment", std::string("grid"));
  std::string preset = j.value("preset", std::string());
  if (!preset.empty()) {
    cfg = preset_config(experiment, preset);
  } else {
    cfg.experiment = experiment;
    cfg.preset_id = "custom";
  }
  read_into(j, "operator", cfg.op_kind);
  read_into(j, "n", cfg.n);
  if (j.contains("interval")) {
    cfg.interval.a = j.at("interval").at(0).get<double>();
    cfg.interval.b = j.at("interval").at(1).get<double>();
  }
  read_into(j, "sigma_frac", cfg.sigma_frac);
  read_into(j, "target_psnr", cfg.target_psnr);
  read_into(j, "truth", cfg.truth_id);
  read_into(j, "alpha_adp", cfg.alpha_adp);
  read_into(j, "alpha1", cfg.alpha1);
  read_into(j, "alpha2", cfg.alpha2);
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    cfg.sweep_enabled = s.value("enabled", cfg.sweep_enabled);
    read_into(s, "a1_min", cfg.a1_min);
    read_into(s, "a1_max", cfg.a1_max);
    read_into(s, "a2_min", cfg.a2_min);
    read_into(s, "a2_max", cfg.a2_max);
    read_into(s, "points", cfg.sweep_points);
  }
  read_into(j, "beta", cfg.beta);
  read_into(j, "lr_ift", cfg.lr_ift);
  read_into(j, "iters_ift", cfg.iters_ift);
  read_into(j, "lr_lista", cfg.lr_lista);
  read_into(j, "iters_lista", cfg.iters_lista);
  read_into(j, "lr_l10", cfg.lr_l10);
  read_into(j, "iters_l10", cfg.iters_l10);
  read_into(j, "ista_tol", cfg.ista_tol);
  read_into(j, "ivanov_tol", cfg.ivanov_tol);
  read_into(j, "tau", cfg.tau);
  read_into(j, "seed", cfg.seed);
  read_into(j, "out_dir", cfg.out_dir);
  return cfg;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["experiment"] = cfg.experiment;
  j["preset"] = cfg.preset_id;
  j["operator"] = cfg.op_kind;
  j["n"] = cfg.n;
  j["interval"] = {cfg.interval.a, cfg.interval.b};
  j["sigma_frac"] = cfg.sigma_frac;
  j["target_psnr"] = cfg.target_psnr;
  j["truth"] = cfg.truth_id;
  j["alpha_adp"] = cfg.alpha_adp;
  j["alpha1"] = cfg.alpha1;
  j["alpha2"] = cfg.alpha2;
  j["sweep"] = {{"enabled", cfg.sweep_enabled}, {"a1_min", cfg.a1_min}, {"a1_max", cfg.a1_max},
                {"a2_min", cfg.a2_min},         {"a2_max", cfg.a2_max}, {"points", cfg.sweep_points}};
  j["beta"] = cfg.beta;
  j["lr_ift"] = cfg.lr_ift;
  j["iters_ift"] = cfg.iters_ift;
  j["lr_lista"] = cfg.lr_lista;
  j["iters_lista"] = cfg.iters_lista;
  j["lr_l10"] = cfg.lr_l10;
  j["iters_l10"] = cfg.iters_l10;
  j["ista_tol"] = cfg.ista_tol;
  j["ivanov_tol"] = cfg.ivanov_tol;
  j["tau"] = cfg.tau;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  std::ofstream os(path);
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// runners

namespace {

std::string config_echo(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "experiment=" << c.experiment << " preset=" << c.preset_id << " operator=" << c.op_kind
     << " n=" << c.n << " psnr=" << fmt(c.target_psnr) << " seed=" << c.seed;
  return os.str();
}

/// Deterministic step-size backoff: halve on divergence, up to eight times.
template <typename Fn>
SolveReport run_with_step_backoff(double lr0, std::vector<std::string>& log,
                                  const std::string& tag, Fn&& attempt) {
  double lr = lr0;
  for (int k = 0;; ++k) {
    try {
      return attempt(lr);
    } catch (const DivergenceError&) {
      if (k >= 8) throw;
      lr *= 0.5;
      log.push_back(tag + ": step halved to " + fmt(lr) + " after divergence");
    }
  }
}

RunEntry make_entry(const ExperimentConfig& cfg, std::string method, std::string preset,
                    double a1, double a2, Signal out, const Signal& truth, long iterations,
                    double wall_ms) {
  RunEntry e;
  e.method = std::move(method);
  e.preset = std::move(preset);
  e.op_kind = cfg.op_kind;
  e.alpha1 = a1;
  e.alpha2 = a2;
  e.m = metrics(out, truth);
  e.out = std::move(out);
  e.iterations = iterations;
  e.wall_ms = wall_ms;
  return e;
}

}  // namespace

RunRecord run_figure1(const ExperimentConfig& cfg) {
  if (cfg.op_kind != "integration")
    throw std::invalid_argument("run_figure1: integration preset required");
  RunRecord rec;
  rec.config = cfg;

  const LinearOp A = make_operator(cfg);
  const Signal truth = make_ground_truths(cfg.n, cfg.interval)[cfg.truth_id - 1];
  const auto [y, delta] = add_noise(A.apply(truth), cfg.target_psnr, cell_seed(cfg.seed, 0));

  AdpProblem problem{A, y, SquaredL2{}, cfg.alpha_adp, 0.0, delta};
  IftConfig ift;
  ift.lr = cfg.lr_ift;
  ift.outer_iters = cfg.iters_ift;
  ift.inner.tol = cfg.ista_tol;

  std::vector<Signal> traj;
  std::vector<double> errs, norms;
  const double t0 = now_ms();
  const SolveReport rep = adp_ift_solve(problem, ift, nullptr,
                                        [&](long, const Signal& xk, const LinearOp&) {
                                          traj.push_back(xk);
                                          errs.push_back(metrics(xk, truth).l2_error);
                                          norms.push_back(norm(xk));
                                        });
  const double gd_ms = now_ms() - t0;

  const std::size_t best_k =
      std::min_element(errs.begin(), errs.end()) - errs.begin();
  long discrepancy_k = -1;
  for (std::size_t k = 0; k < rep.residual_trace.size(); ++k)
    if (rep.residual_trace[k] <= cfg.tau * delta) {
      discrepancy_k = static_cast<long>(k);
      break;
    }

  // a-posteriori best direct solution over a log grid of penalty weights
  const std::vector<double> alphas = logspace(1e-7, 1e2, 120);
  double best_alpha = alphas.front(), best_err = std::numeric_limits<double>::infinity();
  Signal best_tik = Signal::zeros(cfg.n, cfg.interval);
  std::vector<std::string> tik_table{"alpha,l2_error"};
  for (double a : alphas) {
    const Signal xt = tikhonov_l2_solve(A, y, a);
    const double err = metrics(xt, truth).l2_error;
    tik_table.push_back(fmt(a) + "," + fmt(err));
    if (err < best_err) {
      best_err = err;
      best_alpha = a;
      best_tik = xt;
    }
  }

  rec.entries.push_back(make_entry(cfg, "adp_start", "truth" + std::to_string(cfg.truth_id), 0.0,
                                   cfg.alpha_adp, traj.front(), truth, 0, gd_ms));
  rec.entries.push_back(make_entry(cfg, "adp_early_stopped", "truth" + std::to_string(cfg.truth_id),
                                   0.0, cfg.alpha_adp, traj[best_k], truth,
                                   static_cast<long>(best_k), gd_ms));
  rec.entries.push_back(make_entry(cfg, "adp_limit", "truth" + std::to_string(cfg.truth_id), 0.0,
                                   cfg.alpha_adp, traj.back(), truth, rep.iterations, gd_ms));
  rec.entries.push_back(make_entry(cfg, "tikhonov_best", "truth" + std::to_string(cfg.truth_id),
                                   0.0, best_alpha, best_tik, truth,
                                   static_cast<long>(alphas.size()), 0.0));

  rec.extra_signals.emplace_back("truth", truth);
  rec.extra_signals.emplace_back("data", y);

  std::vector<std::string> trace{"k,loss,residual,l2_error,solution_norm"};
  for (std::size_t k = 0; k < traj.size(); ++k)
    trace.push_back(std::to_string(k) + "," + fmt(rep.loss_trace[k]) + "," +
                    fmt(rep.residual_trace[k]) + "," + fmt(errs[k]) + "," + fmt(norms[k]));
  rec.tables.emplace_back("figure1_trace.csv", std::move(trace));
  rec.tables.emplace_back("tikhonov_grid.csv", std::move(tik_table));

  rec.log_lines.push_back("figure1: " + config_echo(cfg));
  rec.log_lines.push_back("figure1: delta=" + fmt(delta) + " alpha_adp=" + fmt(cfg.alpha_adp) +
                          " best_k=" + std::to_string(best_k) +
                          " discrepancy_k=" + std::to_string(discrepancy_k));
  rec.log_lines.push_back(
      "figure1: early-stopped error " + fmt(errs[best_k]) + " vs best direct-solution error " +
      fmt(best_err) +
      (errs[best_k] <= best_err ? " (early stopping ahead)" : " (direct solution ahead)"));
  return rec;
}

RunRecord run_method_grid(const ExperimentConfig& cfg) {
  RunRecord rec;
  rec.config = cfg;
  const LinearOp A = make_operator(cfg);
  const auto truths = make_ground_truths(cfg.n, cfg.interval);

  std::vector<std::string> sweep_table{"preset,alpha1,alpha2,l2_error"};

  for (int p = 0; p < 3; ++p) {
    const std::string preset = "truth" + std::to_string(p + 1);
    const Signal& truth = truths[p];
    const auto [y, delta] = add_noise(A.apply(truth), cfg.target_psnr, cell_seed(cfg.seed, p));

    // a-posteriori (alpha1, alpha2) selection by the exact solver's error
    double a1 = cfg.alpha1, a2 = cfg.alpha2;
    if (cfg.sweep_enabled) {
      double best = std::numeric_limits<double>::infinity();
      for (double c1 : logspace(cfg.a1_min, cfg.a1_max, cfg.sweep_points))
        for (double c2 : logspace(cfg.a2_min, cfg.a2_max, cfg.sweep_points)) {
          double err = std::numeric_limits<double>::infinity();
          try {
            const SolveReport r =
                adp_exact_solve(A, y, ElasticNet(c1, c2), 1.0, cfg.sweep_ivanov_tol);
            err = metrics(r.solution, truth).l2_error;
          } catch (const std::exception&) {
            // cell failure recorded as infinite error; the sweep continues
          }
          sweep_table.push_back(preset + "," + fmt(c1) + "," + fmt(c2) + "," + fmt(err));
          if (err < best) {
            best = err;
            a1 = c1;
            a2 = c2;
          }
        }
    }

    const ElasticNet pen(a1, a2);
    AdpProblem problem{A, y, pen, 1.0, 0.0, delta};

    auto timed = [&](const std::string& method, auto&& fn) {
      const double t0 = now_ms();
      try {
        SolveReport r = fn();
        rec.entries.push_back(make_entry(cfg, method, preset, a1, a2, std::move(r.solution),
                                         truth, r.iterations, now_ms() - t0));
      } catch (const std::exception& err) {
        rec.log_lines.push_back("grid: " + preset + "/" + method + " failed: " + err.what());
      }
    };

    timed("adp_ivanov", [&] { return adp_exact_solve(A, y, pen, 1.0, cfg.ivanov_tol); });
    timed("adp_ift", [&] {
      return run_with_step_backoff(cfg.lr_ift, rec.log_lines, preset + "/adp_ift",
                                   [&](double lr) {
                                     IftConfig ic;
                                     ic.lr = lr;
                                     ic.outer_iters = cfg.iters_ift;
                                     ic.inner.tol = cfg.ista_tol;
                                     return adp_ift_solve(problem, ic);
                                   });
    });
    const Signal z0 = default_net_input(cfg.n, cfg.interval, cell_seed(cfg.seed, 100 + p));
    timed("dip_lista_inf", [&] {
      return run_with_step_backoff(cfg.lr_lista, rec.log_lines, preset + "/dip_lista_inf",
                                   [&](double lr) {
                                     return dip_lista_inf_solve(problem, lr, cfg.iters_lista, z0);
                                   });
    });
    timed("dip_lista_l10", [&] {
      return run_with_step_backoff(cfg.lr_l10, rec.log_lines, preset + "/dip_lista_l10",
                                   [&](double lr) {
                                     return dip_lista_solve(problem, 10, lr, cfg.iters_l10, z0);
                                   });
    });

    rec.extra_signals.emplace_back(preset + "_truth", truth);
    rec.extra_signals.emplace_back(preset + "_data", y);

    // pairwise distances inside the cell
    std::vector<const RunEntry*> cell;
    for (const RunEntry& e : rec.entries)
      if (e.preset == preset) cell.push_back(&e);
    for (std::size_t i = 0; i < cell.size(); ++i)
      for (std::size_t j = i + 1; j < cell.size(); ++j)
        rec.distances.emplace_back(preset, cell[i]->method, cell[j]->method,
                                   norm(cell[i]->out - cell[j]->out));
  }

  if (cfg.sweep_enabled) rec.tables.emplace_back("param_grid.csv", std::move(sweep_table));
  rec.log_lines.push_back("grid: " + config_echo(cfg));
  return rec;
}

RunRecord run_initial_value_study(const ExperimentConfig& cfg) {
  if (cfg.op_kind != "convolution")
    throw std::invalid_argument("run_initial_value_study: convolution preset required");
  RunRecord rec;
  rec.config = cfg;
  const LinearOp A = make_operator(cfg);
  const Signal truth = make_ground_truths(cfg.n, cfg.interval)[cfg.truth_id - 1];
  const std::string preset = "truth" + std::to_string(cfg.truth_id);
  const auto [y, delta] = add_noise(A.apply(truth), cfg.target_psnr, cell_seed(cfg.seed, 0));

  const ElasticNet pen(cfg.alpha1, cfg.alpha2);
  AdpProblem problem{A, y, pen, 1.0, 0.0, delta};

  // B0 variants: A itself and A plus seeded relative noise
  std::mt19937_64 rng(cell_seed(cfg.seed, 7));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd noise(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < noise.rows(); ++i)
    for (Eigen::Index j = 0; j < noise.cols(); ++j) noise(i, j) = gauss(rng);
  noise *= 0.2 * A.matrix().norm() / noise.norm();
  const LinearOp B0_perturbed(A.matrix() + noise, A.domain(), A.codomain());

  auto timed = [&](const std::string& method, auto&& fn) {
    const double t0 = now_ms();
    try {
      SolveReport r = fn();
      rec.entries.push_back(make_entry(cfg, method, preset, cfg.alpha1, cfg.alpha2,
                                       std::move(r.solution), truth, r.iterations,
                                       now_ms() - t0));
    } catch (const std::exception& err) {
      rec.log_lines.push_back("initvals: " + method + " failed: " + err.what());
    }
  };

  timed("adp_ivanov", [&] { return adp_exact_solve(A, y, pen, 1.0, cfg.ivanov_tol); });
  IftConfig ic;
  ic.lr = cfg.lr_ift;
  ic.outer_iters = cfg.iters_ift;
  ic.inner.tol = cfg.ista_tol;
  auto gd = [&](const std::string& tag, const LinearOp* b0) {
    return run_with_step_backoff(cfg.lr_ift, rec.log_lines, tag, [&](double lr) {
      IftConfig local = ic;
      local.lr = lr;
      return adp_ift_solve(problem, local, b0);
    });
  };
  timed("adp_ift_b0_a", [&] { return gd("adp_ift_b0_a", nullptr); });
  timed("adp_ift_b0_perturbed", [&] { return gd("adp_ift_b0_perturbed", &B0_perturbed); });
  const Signal z0 = default_net_input(cfg.n, cfg.interval, cell_seed(cfg.seed, 9));
  auto net_gd = [&](const std::string& tag, const LinearOp* b0) {
    return run_with_step_backoff(cfg.lr_lista, rec.log_lines, tag, [&](double lr) {
      return dip_lista_inf_solve(problem, lr, cfg.iters_lista, z0, b0);
    });
  };
  timed("dip_lista_inf_b0_a", [&] { return net_gd("dip_lista_inf_b0_a", nullptr); });
  timed("dip_lista_inf_b0_perturbed",
        [&] { return net_gd("dip_lista_inf_b0_perturbed", &B0_perturbed); });

  for (std::size_t i = 0; i < rec.entries.size(); ++i)
    for (std::size_t j = i + 1; j < rec.entries.size(); ++j)
      rec.distances.emplace_back(preset, rec.entries[i].method, rec.entries[j].method,
                                 norm(rec.entries[i].out - rec.entries[j].out));

  rec.extra_signals.emplace_back(preset + "_truth", truth);
  rec.extra_signals.emplace_back(preset + "_data", y);
  rec.log_lines.push_back("initvals: " + config_echo(cfg));
  return rec;
}

// ---------------------------------------------------------------------------
// output emission

namespace {

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  for (const std::string& line : lines) os << line << '\n';
}

void write_outputs(const RunRecord& rec) {
  namespace fs = std::filesystem;
  const fs::path dir(rec.config.out_dir);
  fs::create_directories(dir);

  std::vector<std::string> m{"method,preset,operator,alpha1,alpha2,l2_error,psnr,iterations,wall_ms"};
  for (const RunEntry& e : rec.entries)
    m.push_back(e.method + "," + e.preset + "," + e.op_kind + "," + fmt(e.alpha1) + "," +
                fmt(e.alpha2) + "," + fmt(e.m.l2_error) + "," + fmt(e.m.psnr) + "," +
                std::to_string(e.iterations) + ",0");
  write_lines(dir / "metrics.csv", m);

  // one column per signal, full precision so metrics can be recomputed
  if (!rec.entries.empty()) {
    const Eigen::Index n = rec.entries.front().out.size();
    std::vector<std::string> s;
    std::string header = "t";
    for (const auto& [name, sig] : rec.extra_signals) header += "," + name;
    for (const RunEntry& e : rec.entries) header += "," + e.preset + "_" + e.method;
    s.push_back(header);
    const Signal& ref = rec.entries.front().out;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::string line = fmt(ref.grid_point(i), "%.17g");
      for (const auto& [name, sig] : rec.extra_signals) line += "," + fmt(sig[i], "%.17g");
      for (const RunEntry& e : rec.entries) line += "," + fmt(e.out[i], "%.17g");
      s.push_back(std::move(line));
    }
    write_lines(dir / "signals.csv", s);
  }

  if (!rec.distances.empty()) {
    std::vector<std::string> d;
    if (rec.config.experiment == "initvals")
      d.push_back("# " + config_echo(rec.config));
    d.push_back("cell,method_a,method_b,l2_distance");
    for (const auto& [cell, a, b, dist] : rec.distances)
      d.push_back(cell + "," + a + "," + b + "," + fmt(dist));
    write_lines(dir / "distances.csv", d);
  }

  for (const auto& [name, lines] : rec.tables) write_lines(dir / name, lines);

  // plot: one panel per preset cell, plus truth/data context
  std::vector<svg::Panel> panels;
  std::vector<std::string> presets;
  for (const RunEntry& e : rec.entries)
    if (std::find(presets.begin(), presets.end(), e.preset) == presets.end())
      presets.push_back(e.preset);
  for (const std::string& preset : presets) {
    svg::Panel panel;
    panel.title = rec.config.experiment + " " + preset + " (" + rec.config.op_kind + ")";
    bool have_x = false;
    for (const auto& [name, sig] : rec.extra_signals)
      if (name.rfind(preset, 0) == 0 || name == "truth") {
        if (!have_x) {
          panel.x.resize(sig.size());
          for (Eigen::Index i = 0; i < sig.size(); ++i) panel.x[i] = sig.grid_point(i);
          have_x = true;
        }
        panel.series.push_back({name, sig.samples()});
      }
    for (const RunEntry& e : rec.entries)
      if (e.preset == preset) {
        if (!have_x) {
          panel.x.resize(e.out.size());
          for (Eigen::Index i = 0; i < e.out.size(); ++i) panel.x[i] = e.out.grid_point(i);
          have_x = true;
        }
        panel.series.push_back({e.method, e.out.samples()});
      }
    panels.push_back(std::move(panel));
  }
  if (!panels.empty())
    svg::write_panels((dir / (rec.config.experiment + ".svg")).string(), panels,
                      panels.size() >= 3 ? 3 : static_cast<int>(panels.size()));

  std::vector<std::string> log = rec.log_lines;
  for (const RunEntry& e : rec.entries)
    log.push_back("timing: " + e.preset + "/" + e.method + " wall_ms=" + fmt(e.wall_ms) +
                  " iterations=" + std::to_string(e.iterations));
  write_lines(dir / "run.log", log);
}

}  // namespace

RunRecord run_from_config(const ExperimentConfig& cfg) {
  RunRecord rec;
  if (cfg.experiment == "figure1") {
    rec = run_figure1(cfg);
  } else if (cfg.experiment == "grid") {
    rec = run_method_grid(cfg);
  } else if (cfg.experiment == "initvals") {
    rec = run_initial_value_study(cfg);
  } else {
    throw std::invalid_argument("run_from_config: unknown experiment " + cfg.experiment);
  }
  write_outputs(rec);
  return rec;
}

// ---------------------------------------------------------------------------
// selftest

namespace {

struct CheckScope {
  std::ostream& os;
  int failures = 0;
  void check(const std::string& name, bool ok) {
    os << (ok ? "[ok]   " : "[FAIL] ") << name << '\n';
    if (!ok) ++failures;
  }
};

}  // namespace

int selftest(std::ostream& os) {
  CheckScope t{os};
  std::mt19937_64 rng(424242);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Interval iv{0.0, 1.0};
  auto random_signal = [&](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    return Signal(v, iv);
  };

  // adjoint identity on both operator factories
  {
    bool ok = true;
    const LinearOp a1 = make_integration_operator(40, iv);
    const LinearOp a2 = make_convolution_operator(40, iv, 0.05);
    for (const LinearOp* op : {&a1, &a2})
      for (int rep = 0; rep < 20; ++rep) {
        const Signal u = random_signal(40), w = random_signal(40);
        const double lhs = inner(op->apply(u), w), rhs = inner(u, op->apply_adjoint(w));
        ok = ok && std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, norm(u) * norm(w));
      }
    t.check("operator adjoint identity", ok);
  }

  // scalar prox against a grid-search oracle
  {
    const Signal z(Eigen::VectorXd::Constant(1, 2.0), iv);
    const Signal p = prox(ElasticNet(1.0, 1.0), z, 1.0);
    double best = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (double x = -4.0; x <= 4.0; x += 1e-5) {
      const double val = 0.5 * (x - 2.0) * (x - 2.0) + std::abs(x) + 0.5 * x * x;
      if (val < best_val) {
        best_val = val;
        best = x;
      }
    }
    t.check("prox matches grid-search minimizer", std::abs(p[0] - best) <= 1e-4);
  }

  // pairing equals <min_subgradient, x>
  {
    bool ok = true;
    for (int rep = 0; rep < 10; ++rep) {
      const Signal x = random_signal(15);
      const Penalty pen = ElasticNet(0.5, 0.8);
      ok = ok && std::abs(pairing(pen, x) - inner(min_subgradient(pen, x), x)) <= 1e-12;
    }
    t.check("pairing attained by the minimal subgradient", ok);
  }

  // constrained solve equals the direct solve at the located multiplier
  {
    bool ok = true;
    for (int rep = 0; rep < 3; ++rep) {
      Eigen::MatrixXd m(12, 12);
      for (Eigen::Index i = 0; i < 12; ++i)
        for (Eigen::Index j = 0; j < 12; ++j) m(i, j) = gauss(rng);
      const LinearOp A(m, iv, iv);
      const Signal y = random_signal(12);
      const SolveReport r = adp_exact_solve(A, y, SquaredL2{}, 1.5, 1e-8);
      const Signal xt = tikhonov_l2_solve(A, y, 2.0 * r.multiplier);
      ok = ok && norm(r.solution - xt) <= 1e-6 * std::max(1.0, norm(xt));
    }
    t.check("constrained solve consistent with direct solve", ok);
  }

  // operator construction round trip + infeasible rejection
  {
    bool ok = true;
    for (int rep = 0; rep < 20; ++rep) {
      const Signal xh = random_signal(8);
      const Penalty pen = ElasticNet(0.4, 0.7);
      Signal y = random_signal(8);
      const double need = 4.0 * pairing(pen, xh);  // alpha = 1
      const double ny = norm(y);
      y = y * (std::sqrt(std::max(need, 1e-6)) * 1.5 / std::max(ny, 1e-12));
      const ConstructedOp op = construct_optimal_op(xh, min_subgradient(pen, xh), y, pen, 1.0);
      const MinimizerCheck chk = verify_minimizer(op.materialize(), xh, y, pen, 1.0);
      ok = ok && chk.residual <= 1e-10 && chk.ista_distance <= 1e-6;
    }
    int rejected = 0;
    for (int rep = 0; rep < 20; ++rep) {
      const Signal xh = random_signal(8);
      const Penalty pen = ElasticNet(0.4, 0.7);
      Signal y = random_signal(8);
      const double need = 4.0 * pairing(pen, xh);
      y = y * (std::sqrt(need) * 0.8 / std::max(norm(y), 1e-12));
      try {
        construct_optimal_op(xh, min_subgradient(pen, xh), y, pen, 1.0);
      } catch (const InfeasibleError&) {
        ++rejected;
      }
    }
    t.check("operator construction round trip", ok);
    t.check("infeasible construction rejected", rejected == 20);
  }

  // hypergradient against central finite differences
  {
    bool ok = true;
    for (int rep = 0; rep < 2; ++rep) {
      Eigen::MatrixXd bm(6, 6), am(6, 6);
      for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j) {
          bm(i, j) = gauss(rng);
          am(i, j) = gauss(rng);
        }
      const LinearOp B(bm, iv, iv), A(am, iv, iv);
      const Signal y = random_signal(6);
      const ElasticNet pen(0.0, 1.0);
      const IstaConfig inner{std::nullopt, 1e-12, 400000};
      const Signal x = x_of_b(B, y, pen, 0.7, inner).solution;
      const Eigen::MatrixXd g = ift_gradient(B, x, A, y, pen, 0.7);
      auto loss = [&](const Eigen::MatrixXd& mat) {
        const LinearOp Bp(mat, iv, iv);
        const Signal xs = x_of_b(Bp, y, pen, 0.7, inner).solution;
        const double r = norm(A.apply(xs) - y);
        return 0.5 * r * r;
      };
      Eigen::MatrixXd fd(6, 6);
      for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j) {
          Eigen::MatrixXd mp = bm, mm = bm;
          mp(i, j) += 1e-5;
          mm(i, j) -= 1e-5;
          fd(i, j) = (loss(mp) - loss(mm)) / 2e-5;
        }
      ok = ok && (fd - g).norm() <= 1e-4 * std::max(1.0, fd.norm());
    }
    t.check("operator hypergradient matches finite differences", ok);
  }

  // non-convex feasible set witness
  {
    const NonconvexDemo d = nonconvex_feasibility_demo();
    const bool ok = d.pairing_a <= d.level && d.pairing_b <= d.level &&
                    d.pairing_mid > d.level + 1e-6 &&
                    nonconvex_demo_functional(5.0, 0.0) == 0.0;
    t.check("non-convex feasible set witness", ok);
  }

  // unrolled net agrees with the manual layer loop
  {
    const LinearOp A = make_integration_operator(30, iv);
    const Signal y = random_signal(30);
    const ListaNet net = make_lista_net(A, 10, ElasticNet(0.05, 0.2), 1.0);
    const Signal z = random_signal(30);
    Signal x = z;
    for (int l = 0; l < 10; ++l) {
      ListaNet one = net;
      one.depth = 1;
      x = lista_forward(one, x, y);
    }
    t.check("unrolled net equals manual layer loop",
            (lista_forward(net, z, y).samples() - x.samples()).norm() == 0.0);
  }

  os << (t.failures == 0 ? "selftest: all checks passed\n"
                         : "selftest: " + std::to_string(t.failures) + " check(s) FAILED\n");
  return t.failures;
}

}  // namespace adp
