#include "sphertap/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sphertap/analytic.hpp"
#include "sphertap/coarse.hpp"
#include "sphertap/finite_fe.hpp"
#include "sphertap/rmt.hpp"
#include "sphertap/rng.hpp"
#include "sphertap/subspace.hpp"
#include "sphertap/tap.hpp"

#ifndef SPHERTAP_VERSION
#define SPHERTAP_VERSION "unknown"
#endif

namespace sphertap::cli {

namespace {

using nlohmann::json;

const std::set<std::string>& known_experiments() {
  static const std::set<std::string> names = {
      "asymptotic-sweep", "coarse-convergence", "goe-diagnostics",
      "tap-optimize",     "subspace-residual",  "finite-fe",
      "ground-state"};
  return names;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// One computed CSV row plus its assertion outcome and plot coordinates.
struct RowResult {
  std::string csv;
  std::string failure;
  double x = 0.0;
  double y = 0.0;
};

struct Sweep {
  std::string header;
  std::vector<std::function<RowResult()>> tasks;
};

Vec seeded_direction(long n, std::uint64_t seed, double magnitude) {
  Rng rng(seed ^ 0x8f1bbcdcbfa53e0bULL);
  Vec v = rng.unit_sphere_vec(n);
  scale(v, magnitude);
  return v;
}

Sweep build_asymptotic_sweep(const ExperimentConfig& c) {
  Sweep s;
  s.header = "beta,h,q_tap,val_tap,q_parisi,val_parisi,abs_diff";
  for (double beta : c.beta_grid)
    for (double h : c.h_grid)
      s.tasks.push_back([beta, h]() {
        const auto tap = analytic::solve_tap_variational({beta, h});
        const auto parisi = analytic::solve_parisi({beta, h});
        const double diff = std::abs(tap.value - parisi.value);
        RowResult r;
        r.csv = num(beta) + "," + num(h) + "," + num(tap.q) + "," +
                num(tap.value) + "," + num(parisi.q) + "," +
                num(parisi.value) + "," + num(diff);
        if (diff > 1e-8)
          r.failure = "asymptotic-sweep beta=" + num(beta) + " h=" + num(h) +
                      ": variational values differ by " + num(diff);
        r.x = beta;
        r.y = tap.value;
        return r;
      });
  return s;
}

Sweep build_coarse_convergence(const ExperimentConfig& c) {
  Sweep s;
  s.header = "K,beta,lambda_k,free_energy,mirror_gap,derivative_gap";
  const long N = c.N_list.empty() ? 100000 : c.N_list.front();
  for (int K : c.K_list) {
    auto grid = std::make_shared<coarse::CoarseGrid>(
        coarse::build_partition(N, K));
    for (double beta : c.beta_grid)
      s.tasks.push_back([grid, K, beta]() {
        const double lambda = coarse::solve_lambda_K(*grid, beta);
        const double fe = coarse::free_energy_F_K(*grid, beta);
        const auto simplex = coarse::simplex_optimum_oracle(*grid, beta);
        const double gap = std::abs(simplex.value - fe);
        const double dgap = coarse::derivative_identity_check(*grid, beta);
        RowResult r;
        r.csv = std::to_string(K) + "," + num(beta) + "," + num(lambda) +
                "," + num(fe) + "," + num(gap) + "," + num(dgap);
        if (gap > 1e-6)
          r.failure = "coarse-convergence K=" + std::to_string(K) +
                      " beta=" + num(beta) + ": mirror gap " + num(gap);
        else if (dgap > 1e-6)
          r.failure = "coarse-convergence K=" + std::to_string(K) +
                      " beta=" + num(beta) + ": derivative gap " + num(dgap);
        r.x = beta;
        r.y = fe;
        return r;
      });
  }
  return s;
}

Sweep build_goe_diagnostics(const ExperimentConfig& c) {
  Sweep s;
  s.header = "N,seed,rigidity,interlacing";
  for (long N : c.N_list)
    for (std::uint64_t seed : c.seeds)
      s.tasks.push_back([N, seed]() {
        const auto sample = rmt::sample_goe(N, seed);
        const double rig = rmt::rigidity_report(sample);
        const bool inter = rmt::minor_interlacing_check(sample, 1);
        RowResult r;
        r.csv = std::to_string(N) + "," + std::to_string(seed) + "," +
                num(rig) + "," + (inter ? "1" : "0");
        if (!inter)
          r.failure = "goe-diagnostics N=" + std::to_string(N) + " seed=" +
                      std::to_string(seed) + ": interlacing violated";
        r.x = static_cast<double>(N);
        r.y = rig;
        return r;
      });
  return s;
}

Sweep build_tap_optimize(const ExperimentConfig& c) {
  Sweep s;
  s.header = "beta,h,N,seed,q,value_per_spin,asymptotic_value,abs_err,plefka";
  for (double beta : c.beta_grid)
    for (double h : c.h_grid)
      for (long N : c.N_list)
        for (std::uint64_t seed : c.seeds)
          s.tasks.push_back([beta, h, N, seed]() {
            const auto sample = rmt::sample_goe(N, seed);
            const auto field = rmt::make_field(seeded_direction(N, seed, h));
            const auto point = tap::optimize_tap(beta, field, sample, seed);
            const double q = dot(point.m, point.m);
            const double per = point.value / static_cast<double>(N);
            const double target =
                analytic::solve_tap_variational({beta, h}).value;
            const bool plefka = tap::check_plefka(point.m, beta);
            RowResult r;
            r.csv = num(beta) + "," + num(h) + "," + std::to_string(N) + "," +
                    std::to_string(seed) + "," + num(q) + "," + num(per) +
                    "," + num(target) + "," + num(std::abs(per - target)) +
                    "," + (plefka ? "1" : "0");
            if (!plefka)
              r.failure = "tap-optimize beta=" + num(beta) + " h=" + num(h) +
                          " N=" + std::to_string(N) + " seed=" +
                          std::to_string(seed) + ": Plefka condition fails";
            r.x = beta;
            r.y = per;
            return r;
          });
  return s;
}

Sweep build_subspace_residual(const ExperimentConfig& c) {
  Sweep s;
  s.header = "N,seed,beta,h,dim,edge_count,residual";
  const double beta = c.beta_grid.front();
  const double h = c.h_grid.front();
  for (long N : c.N_list)
    for (std::uint64_t seed : c.seeds)
      s.tasks.push_back([N, seed, beta, h]() {
        const auto theta = analytic::classical_spectrum(static_cast<int>(N));
        Rng rng(seed);
        Vec raw = rng.unit_sphere_vec(N);
        scale(raw, h);
        const Vec field = subspace::regularize_field(raw);
        const auto sub = subspace::build_subspace(theta, field, N);
        const double res =
            subspace::invariance_residual(sub, beta, theta, field);
        RowResult r;
        r.csv = std::to_string(N) + "," + std::to_string(seed) + "," +
                num(beta) + "," + num(h) + "," + std::to_string(sub.dim) +
                "," + std::to_string(sub.edge_set.size()) + "," + num(res);
        r.x = static_cast<double>(N);
        r.y = res;
        return r;
      });
  return s;
}

Sweep build_finite_fe(const ExperimentConfig& c) {
  Sweep s;
  s.header = "N,beta,saddle_value,correction,limit_gap";
  for (long N : c.N_list)
    for (double beta : c.beta_grid)
      s.tasks.push_back([N, beta]() {
        const auto theta = analytic::classical_spectrum(static_cast<int>(N));
        const auto sp = finite_fe::no_field_saddle_fe(theta, beta);
        RowResult r;
        r.csv = std::to_string(N) + "," + num(beta) + "," + num(sp.value) +
                "," + num(sp.correction) + "," +
                num(std::abs(sp.value - 0.5 * beta * beta));
        r.x = beta;
        r.y = sp.value;
        return r;
      });
  return s;
}

Sweep build_ground_state(const ExperimentConfig& c) {
  Sweep s;
  s.header =
      "N,seed,beta,h,lambda_star,value_per_spin,asymptotic_value,abs_err,"
      "fallback";
  for (double beta : c.beta_grid)
    for (double h : c.h_grid)
      for (long N : c.N_list)
        for (std::uint64_t seed : c.seeds)
          s.tasks.push_back([beta, h, N, seed]() {
            const auto sample = rmt::sample_goe(N, seed);
            const auto field = rmt::make_field(seeded_direction(N, seed, h));
            const auto gs = tap::ground_state_lagrange(sample, field, beta);
            const double limit = std::sqrt(h * h + 2.0 * beta * beta);
            RowResult r;
            r.csv = std::to_string(N) + "," + std::to_string(seed) + "," +
                    num(beta) + "," + num(h) + "," + num(gs.lambda_star) +
                    "," + num(gs.value) + "," + num(limit) + "," +
                    num(std::abs(gs.value - limit)) + "," +
                    (gs.field_fallback ? "1" : "0");
            r.x = beta;
            r.y = gs.value;
            return r;
          });
  return s;
}

Sweep build_sweep(const ExperimentConfig& c) {
  if (c.experiment == "asymptotic-sweep") return build_asymptotic_sweep(c);
  if (c.experiment == "coarse-convergence") return build_coarse_convergence(c);
  if (c.experiment == "goe-diagnostics") return build_goe_diagnostics(c);
  if (c.experiment == "tap-optimize") return build_tap_optimize(c);
  if (c.experiment == "subspace-residual") return build_subspace_residual(c);
  if (c.experiment == "finite-fe") return build_finite_fe(c);
  if (c.experiment == "ground-state") return build_ground_state(c);
  throw std::logic_error("build_sweep: unreachable");
}

void write_svg(const std::string& path, const std::string& title,
               std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [x, y] : pts) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (pts.empty()) return;
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double L = 60, R = 620, T = 20, B = 360;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (R - L); };
  auto py = [&](double y) { return B - (y - y0) / (y1 - y0) * (B - T); };

  std::ofstream out(path, std::ios::binary);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"400\" viewBox=\"0 0 640 400\">\n"
      << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << B << "\" x2=\"" << R
      << "\" y2=\"" << B << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L
      << "\" y2=\"" << B << "\" stroke=\"black\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
         "points=\"";
  for (const auto& [x, y] : pts) out << px(x) << "," << py(y) << " ";
  out << "\"/>\n";
  out << "<text x=\"" << L << "\" y=\"" << B + 18 << "\" font-size=\"11\">"
      << num(x0) << "</text>\n"
      << "<text x=\"" << R - 40 << "\" y=\"" << B + 18
      << "\" font-size=\"11\">" << num(x1) << "</text>\n"
      << "<text x=\"4\" y=\"" << B << "\" font-size=\"11\">" << num(y0)
      << "</text>\n"
      << "<text x=\"4\" y=\"" << T + 8 << "\" font-size=\"11\">" << num(y1)
      << "</text>\n"
      << "<text x=\"" << (L + R) / 2 - 60 << "\" y=\"392\" font-size=\"12\">"
      << title << "</text>\n</svg>\n";
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["beta_grid"] = c.beta_grid;
  j["h_grid"] = c.h_grid;
  j["N_list"] = c.N_list;
  j["K_list"] = c.K_list;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["emit_svg"] = c.emit_svg;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object())
    throw std::runtime_error("config root must be a JSON object");

  static const std::set<std::string> known = {
      "experiment", "beta_grid", "h_grid",   "N_list",
      "K_list",     "seeds",     "output_dir", "emit_svg"};
  for (const auto& item : doc.items())
    if (!known.count(item.key()))
      throw std::runtime_error("unknown config field \"" + item.key() + "\"");

  ExperimentConfig c;
  try {
    if (doc.contains("experiment")) c.experiment = doc["experiment"];
    if (doc.contains("beta_grid"))
      c.beta_grid = doc["beta_grid"].get<Vec>();
    if (doc.contains("h_grid")) c.h_grid = doc["h_grid"].get<Vec>();
    if (doc.contains("N_list"))
      c.N_list = doc["N_list"].get<std::vector<long>>();
    if (doc.contains("K_list"))
      c.K_list = doc["K_list"].get<std::vector<int>>();
    if (doc.contains("seeds"))
      c.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    if (doc.contains("output_dir")) c.output_dir = doc["output_dir"];
    if (doc.contains("emit_svg")) c.emit_svg = doc["emit_svg"];
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config field has wrong type: ") +
                             e.what());
  }
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  return config_to_json(c).dump(2) + "\n";
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  const std::string& e = c.experiment;
  if (!known_experiments().count(e)) {
    problems.push_back("experiment \"" + e + "\" is not a known experiment");
    return problems;
  }

  const bool needs_beta = (e != "goe-diagnostics");
  const bool beta_strict = (e == "asymptotic-sweep" ||
                            e == "coarse-convergence" || e == "tap-optimize");
  const bool needs_h = (e == "asymptotic-sweep" || e == "tap-optimize" ||
                        e == "subspace-residual" || e == "ground-state");
  const bool needs_N = (e == "goe-diagnostics" || e == "tap-optimize" ||
                        e == "subspace-residual" || e == "finite-fe" ||
                        e == "ground-state");
  const bool needs_K = (e == "coarse-convergence");
  const bool stochastic = (e == "goe-diagnostics" || e == "tap-optimize" ||
                           e == "subspace-residual" || e == "ground-state");

  if (needs_beta && c.beta_grid.empty())
    problems.push_back("beta_grid must be nonempty");
  for (double b : c.beta_grid) {
    if (beta_strict && b <= 0.0) {
      problems.push_back("beta_grid entries must be positive");
      break;
    }
    if (!beta_strict && b < 0.0) {
      problems.push_back("beta_grid entries must be nonnegative");
      break;
    }
  }
  if (needs_h && c.h_grid.empty())
    problems.push_back("h_grid must be nonempty");
  for (double h : c.h_grid)
    if (h < 0.0) {
      problems.push_back("h_grid entries must be nonnegative");
      break;
    }
  if (needs_N && c.N_list.empty())
    problems.push_back("N_list must be nonempty");
  for (long n : c.N_list)
    if (n < 4) {
      problems.push_back("N_list entries must be at least 4");
      break;
    }
  if (needs_K && c.K_list.empty())
    problems.push_back("K_list must be nonempty");
  for (int k : c.K_list)
    if (k < 1) {
      problems.push_back("K_list entries must be at least 1");
      break;
    }
  if (stochastic && c.seeds.empty())
    problems.push_back("seeds must be nonempty");
  if (c.output_dir.empty())
    problems.push_back("output_dir must be nonempty");
  return problems;
}

int run(const ExperimentConfig& config, int threads) {
  const auto problems = validate(config);
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "config error: " << p << "\n";
    return 2;
  }

  if (threads <= 0)
    threads = std::max(1u, std::thread::hardware_concurrency());

  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(config.output_dir);

  Sweep sweep = build_sweep(config);
  std::vector<RowResult> results(sweep.tasks.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (std::size_t i = cursor.fetch_add(1); i < sweep.tasks.size();
         i = cursor.fetch_add(1)) {
      try {
        results[i] = sweep.tasks[i]();
      } catch (const std::exception& ex) {
        results[i].failure = config.experiment + " row " + std::to_string(i) +
                             ": " + ex.what();
      }
    }
  };
  const int pool_size =
      static_cast<int>(std::min<std::size_t>(threads, sweep.tasks.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < pool_size; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const auto csv_path =
      std::filesystem::path(config.output_dir) / (config.experiment + ".csv");
  {
    std::ofstream out(csv_path, std::ios::binary);
    out << sweep.header << "\n";
    for (const auto& r : results)
      if (!r.csv.empty()) out << r.csv << "\n";
  }

  if (config.emit_svg) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : results)
      if (!r.csv.empty()) pts.emplace_back(r.x, r.y);
    write_svg((std::filesystem::path(config.output_dir) /
               (config.experiment + ".svg"))
                  .string(),
              config.experiment, std::move(pts));
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  json manifest;
  manifest["config"] = config_to_json(config);
  manifest["version"] = SPHERTAP_VERSION;
  manifest["wall_time_seconds"] = wall;
  manifest["rows"] = results.size();
  manifest["csv"] = csv_path.filename().string();
  {
    std::ofstream out(
        std::filesystem::path(config.output_dir) / "manifest.json",
        std::ios::binary);
    out << manifest.dump(2) << "\n";
  }

  bool failed = false;
  for (const auto& r : results)
    if (!r.failure.empty()) {
      std::cerr << "assertion failure: " << r.failure << "\n";
      failed = true;
    }
  return failed ? 1 : 0;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"spherical 2-spin TAP experiment runner"};
  std::string config_path, output_dir, experiment, seed_str;
  int threads = 0;
  app.add_option("--config", config_path, "JSON config path");
  app.add_option("--output", output_dir, "output directory override");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--experiment", experiment, "experiment name override");
  app.add_option("--seed", seed_str, "single-seed override");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  ExperimentConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "config error: cannot read \"" << config_path << "\"\n";
      return 2;
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
      config = parse_config(text.str());
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }
  if (!experiment.empty()) config.experiment = experiment;
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (!seed_str.empty()) {
    try {
      config.seeds = {std::stoull(seed_str)};
    } catch (const std::exception&) {
      std::cerr << "config error: seed must be an unsigned integer\n";
      return 2;
    }
  }
  if (threads <= 0) {
    if (const char* env = std::getenv("SPHERICAL_TAP_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        threads = 0;
      }
    }
  }
  return run(config, threads);
}

}  // namespace sphertap::cli
