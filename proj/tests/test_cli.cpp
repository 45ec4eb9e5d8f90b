#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sphertap/cli.hpp"

using namespace sphertap;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("sphertap_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

bool mentions(const std::vector<std::string>& messages,
              const std::string& needle) {
  return std::any_of(messages.begin(), messages.end(),
                     [&](const std::string& m) {
                       return m.find(needle) != std::string::npos;
                     });
}

int run_tool(std::vector<std::string> args) {
  args.insert(args.begin(), "sphertap");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config parsing applies defaults and rejects unknown fields") {
  const auto c = cli::parse_config(
      R"({"experiment":"asymptotic-sweep","beta_grid":[0.5],"h_grid":[0,1]})");
  CHECK(c.experiment == "asymptotic-sweep");
  CHECK(c.beta_grid == Vec{0.5});
  CHECK(c.h_grid == Vec{0.0, 1.0});
  CHECK(c.seeds == std::vector<std::uint64_t>{1});
  CHECK(c.output_dir == ".");
  CHECK_FALSE(c.emit_svg);
  CHECK(c.N_list.empty());
  CHECK(c.K_list.empty());

  CHECK_THROWS_WITH_AS(cli::parse_config(R"({"betagrid":[1]})"),
                       doctest::Contains("betagrid"), std::runtime_error);
  CHECK_THROWS_AS(cli::parse_config(R"({"beta_grid":"oops"})"),
                  std::runtime_error);
  CHECK_THROWS_AS(cli::parse_config("{\"experiment\":"), std::runtime_error);
  CHECK_THROWS_AS(cli::parse_config("[1,2]"), std::runtime_error);
}

TEST_CASE("serialize then parse reproduces every field") {
  cli::ExperimentConfig c;
  c.experiment = "tap-optimize";
  c.beta_grid = {0.5, 1.0};
  c.h_grid = {0.0, 0.25};
  c.N_list = {100, 400};
  c.K_list = {2, 5};
  c.seeds = {3, 4, 5};
  c.output_dir = "out/run1";
  c.emit_svg = true;

  const auto back = cli::parse_config(cli::serialize_config(c));
  CHECK(back.experiment == c.experiment);
  CHECK(back.beta_grid == c.beta_grid);
  CHECK(back.h_grid == c.h_grid);
  CHECK(back.N_list == c.N_list);
  CHECK(back.K_list == c.K_list);
  CHECK(back.seeds == c.seeds);
  CHECK(back.output_dir == c.output_dir);
  CHECK(back.emit_svg == c.emit_svg);
}

TEST_CASE("validation names the offending field") {
  cli::ExperimentConfig c;
  c.experiment = "mystery";
  CHECK(mentions(cli::validate(c), "mystery"));

  c.experiment = "asymptotic-sweep";
  CHECK(mentions(cli::validate(c), "beta_grid"));
  CHECK(mentions(cli::validate(c), "h_grid"));

  c.beta_grid = {-0.5};
  c.h_grid = {-1.0};
  auto problems = cli::validate(c);
  CHECK(mentions(problems, "beta_grid"));
  CHECK(mentions(problems, "h_grid"));

  c.experiment = "coarse-convergence";
  c.beta_grid = {0.5};
  CHECK(mentions(cli::validate(c), "K_list"));

  c.experiment = "goe-diagnostics";
  c.beta_grid.clear();  // value checks apply even to fields an experiment
  c.h_grid.clear();     // ignores, so drop the bad entries from above
  c.N_list = {2};
  CHECK(mentions(cli::validate(c), "N_list"));
  c.N_list = {100};
  c.seeds.clear();
  CHECK(mentions(cli::validate(c), "seeds"));
  c.seeds = {1};
  c.output_dir.clear();
  CHECK(mentions(cli::validate(c), "output_dir"));
  c.output_dir = ".";
  CHECK(cli::validate(c).empty());
}

TEST_CASE("invalid config makes run return 2 without output") {
  cli::ExperimentConfig c;
  c.experiment = "asymptotic-sweep";
  const auto dir = fresh_dir("invalid");
  c.output_dir = (dir / "sub").string();
  CHECK(cli::run(c, 1) == 2);
  CHECK_FALSE(fs::exists(dir / "sub" / "asymptotic-sweep.csv"));
}

TEST_CASE("asymptotic sweep writes the pinned schema deterministically") {
  cli::ExperimentConfig c;
  c.experiment = "asymptotic-sweep";
  c.beta_grid = {0.3, 1.0, 1.7};
  c.h_grid = {0.0, 0.5, 1.0};
  const auto dir = fresh_dir("sweep");
  c.output_dir = dir.string();
  REQUIRE(cli::run(c, 1) == 0);

  const auto lines = csv_lines(dir / "asymptotic-sweep.csv");
  REQUIRE(lines.size() == 1 + 9);
  CHECK(lines[0] == "beta,h,q_tap,val_tap,q_parisi,val_parisi,abs_diff");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    REQUIRE(f.size() == 7);
    CHECK(std::stod(f[6]) <= 1e-8);
  }
  const auto manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("\"version\"") != std::string::npos);
  CHECK(manifest.find("\"wall_time_seconds\"") != std::string::npos);
  CHECK(manifest.find("asymptotic-sweep") != std::string::npos);

  // Reruns and thread counts must not change a single byte of the CSV.
  const auto first = slurp(dir / "asymptotic-sweep.csv");
  REQUIRE(cli::run(c, 1) == 0);
  CHECK(slurp(dir / "asymptotic-sweep.csv") == first);
  const auto dir4 = fresh_dir("sweep4");
  c.output_dir = dir4.string();
  REQUIRE(cli::run(c, 4) == 0);
  CHECK(slurp(dir4 / "asymptotic-sweep.csv") == first);
  CHECK(first.find("\r") == std::string::npos);
}

TEST_CASE("every experiment runs a small panel and emits its header") {
  struct Panel {
    const char* name;
    const char* header;
    cli::ExperimentConfig c;
  };
  std::vector<Panel> panels;

  {
    cli::ExperimentConfig c;
    c.experiment = "coarse-convergence";
    c.beta_grid = {0.4, 0.9};
    c.K_list = {2, 5};
    c.N_list = {20000};
    panels.push_back(
        {"coarse-convergence",
         "K,beta,lambda_k,free_energy,mirror_gap,derivative_gap", c});
  }
  {
    cli::ExperimentConfig c;
    c.experiment = "goe-diagnostics";
    c.N_list = {60};
    c.seeds = {1, 2};
    panels.push_back({"goe-diagnostics", "N,seed,rigidity,interlacing", c});
  }
  {
    cli::ExperimentConfig c;
    c.experiment = "tap-optimize";
    c.beta_grid = {0.5};
    c.h_grid = {1.0};
    c.N_list = {80};
    c.seeds = {1};
    panels.push_back(
        {"tap-optimize",
         "beta,h,N,seed,q,value_per_spin,asymptotic_value,abs_err,plefka",
         c});
  }
  {
    cli::ExperimentConfig c;
    c.experiment = "subspace-residual";
    c.beta_grid = {1.0};
    c.h_grid = {1.0};
    c.N_list = {64};
    c.seeds = {1};
    panels.push_back(
        {"subspace-residual", "N,seed,beta,h,dim,edge_count,residual", c});
  }
  {
    cli::ExperimentConfig c;
    c.experiment = "finite-fe";
    c.beta_grid = {0.3, 0.5};
    c.N_list = {500};
    panels.push_back(
        {"finite-fe", "N,beta,saddle_value,correction,limit_gap", c});
  }
  {
    cli::ExperimentConfig c;
    c.experiment = "ground-state";
    c.beta_grid = {0.5};
    c.h_grid = {1.0};
    c.N_list = {100};
    c.seeds = {1};
    panels.push_back({"ground-state",
                      "N,seed,beta,h,lambda_star,value_per_spin,"
                      "asymptotic_value,abs_err,fallback",
                      c});
  }

  for (auto& p : panels) {
    CAPTURE(p.name);
    const auto dir = fresh_dir(std::string("panel_") + p.name);
    p.c.output_dir = dir.string();
    REQUIRE(cli::run(p.c, 2) == 0);
    const auto lines = csv_lines(dir / (std::string(p.name) + ".csv"));
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == p.header);
    CHECK(fs::exists(dir / "manifest.json"));
  }
}

TEST_CASE("stochastic rows carry their seed in the seed column") {
  cli::ExperimentConfig c;
  c.experiment = "goe-diagnostics";
  c.N_list = {50};
  c.seeds = {11, 12, 13};
  const auto dir = fresh_dir("seeds");
  c.output_dir = dir.string();
  REQUIRE(cli::run(c, 3) == 0);
  const auto lines = csv_lines(dir / "goe-diagnostics.csv");
  REQUIRE(lines.size() == 4);
  CHECK(split_fields(lines[1])[1] == "11");
  CHECK(split_fields(lines[2])[1] == "12");
  CHECK(split_fields(lines[3])[1] == "13");
}

TEST_CASE("a throwing row is reported and flips the exit code to 1") {
  cli::ExperimentConfig c;
  c.experiment = "finite-fe";
  c.beta_grid = {0.3, 1.5};  // the second row is deep in the refused regime
  c.N_list = {200};
  const auto dir = fresh_dir("throwing");
  c.output_dir = dir.string();
  CHECK(cli::run(c, 1) == 1);
  const auto lines = csv_lines(dir / "finite-fe.csv");
  CHECK(lines.size() == 2);  // header plus the surviving row
}

TEST_CASE("emit_svg writes a plot next to the CSV") {
  cli::ExperimentConfig c;
  c.experiment = "asymptotic-sweep";
  c.beta_grid = {0.4, 0.8, 1.2};
  c.h_grid = {0.5};
  c.emit_svg = true;
  const auto dir = fresh_dir("svg");
  c.output_dir = dir.string();
  REQUIRE(cli::run(c, 1) == 0);
  const auto svg = slurp(dir / "asymptotic-sweep.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("command line flags override the config file") {
  const auto dir = fresh_dir("flags");
  const auto cfg_path = dir / "config.json";
  {
    cli::ExperimentConfig c;
    c.experiment = "goe-diagnostics";
    c.N_list = {50};
    c.seeds = {1, 2};
    c.output_dir = (dir / "unused").string();
    std::ofstream(cfg_path) << cli::serialize_config(c);
  }

  const auto out = dir / "out";
  CHECK(run_tool({"--config", cfg_path.string(), "--output", out.string(),
                  "--seed", "7", "--threads", "2"}) == 0);
  const auto lines = csv_lines(out / "goe-diagnostics.csv");
  REQUIRE(lines.size() == 2);
  CHECK(split_fields(lines[1])[1] == "7");

  // --experiment replaces the experiment from the file.
  const auto out2 = dir / "out2";
  {
    cli::ExperimentConfig c;
    c.experiment = "goe-diagnostics";
    c.beta_grid = {0.5};
    c.h_grid = {0.3};
    c.N_list = {64};
    c.seeds = {1};
    std::ofstream(cfg_path) << cli::serialize_config(c);
  }
  CHECK(run_tool({"--config", cfg_path.string(), "--experiment",
                  "subspace-residual", "--output", out2.string()}) == 0);
  CHECK(fs::exists(out2 / "subspace-residual.csv"));

  CHECK(run_tool({"--config", (dir / "missing.json").string()}) == 2);
  CHECK(run_tool({"--bogus-flag"}) == 2);
  std::ofstream(dir / "bad.json") << "{not json";
  CHECK(run_tool({"--config", (dir / "bad.json").string()}) == 2);
  CHECK(run_tool({}) == 2);  // no experiment at all -> validation error
}
