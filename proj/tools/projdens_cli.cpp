// SPDX-License-Identifier: Apache-2.0
// projdens command-line front end. Talks to the library through the C
// interface only.
#include "projdens/projdens.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Failure carrying the process exit status.
struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(pd_status s) {
  switch (s) {
  case PD_OK: return 0;
  case PD_ERR_IO:
  case PD_ERR_SCHEMA:
  case PD_ERR_CONFIG:
  case PD_ERR_INVALID_ARGUMENT: return 2;
  case PD_ERR_DOMAIN:
  case PD_ERR_BOUNDS:
  case PD_ERR_STATE:
  case PD_ERR_SEARCH_EXHAUSTED:
  case PD_ERR_MODEL: return 3;
  case PD_ERR_ACCURACY: return 4;
  case PD_ERR_INTERNAL: return 1;
  }
  return 1;
}

void check(pd_status s) {
  if (s != PD_OK)
    throw Failure{exit_code_for(s), std::string(pd_status_name(s)) + ": " + pd_last_error()};
}

[[noreturn]] void usage_error(const std::string &msg) { throw Failure{2, msg}; }

// RAII owners for the opaque handles.
template <class H, void (*Free)(H)>
class Owned {
public:
  Owned() = default;
  explicit Owned(H h) : h_(h) {}
  Owned(const Owned &) = delete;
  Owned &operator=(const Owned &) = delete;
  ~Owned() {
    if (h_) Free(h_);
  }
  H get() const { return h_; }
  H *out() { return &h_; }

private:
  H h_ = nullptr;
};

using Model = Owned<pd_model, pd_model_free>;
using Stream = Owned<pd_stream, pd_stream_free>;
using Accumulator = Owned<pd_accumulator, pd_accumulator_free>;
using Snapshot = Owned<pd_snapshot, pd_snapshot_free>;
using Estimate = Owned<pd_estimate, pd_estimate_free>;
using Trace = Owned<pd_trace, pd_trace_free>;

struct Config {
  std::string command;
  std::string model_file;
  ojson model; // resolved model, basis override applied
  std::string basis;
  std::uint64_t seed = 1;
  std::uint64_t n = 0;
  std::size_t N = 0;
  std::string rule;
  std::size_t grid = 256;
  bool clip = false;
  std::size_t k_max = 0;
  std::string n_grid = "1e2:1e6:log10";
  double alpha = 0.05;
  bool rho_adaptive = false;
  std::string samples_out;
  std::string plan;
  unsigned threads = 0;
  std::string out_dir;
};

std::string model_json_text(pd_model m) {
  std::size_t len = 0;
  check(pd_model_to_json(m, nullptr, 0, &len));
  std::string text(len + 1, '\0');
  check(pd_model_to_json(m, text.data(), text.size(), &len));
  text.resize(len);
  return text;
}

// Loads the model once; the canonical JSON goes into the manifest so a
// replay does not depend on the original file.
void resolve_model(Config &cfg, Model &model) {
  if (!cfg.model.is_null()) {
    check(pd_model_from_json(cfg.model.dump().c_str(), model.out()));
  } else {
    if (cfg.model_file.empty()) usage_error("--model is required");
    check(pd_model_load(cfg.model_file.c_str(), model.out()));
  }
  if (!cfg.basis.empty()) {
    pd_basis_kind kind;
    check(pd_basis_parse(cfg.basis.c_str(), &kind));
    Model rebased;
    check(pd_model_with_basis(model.get(), kind, rebased.out()));
    std::swap(*model.out(), *rebased.out());
  }
  cfg.model = ojson::parse(model_json_text(model.get()));
}

fs::path prepare_out_dir(const Config &cfg) {
  fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Failure{2, "cannot create output directory '" + dir.string() + "'"};
  return dir;
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{2, "io error: cannot read '" + path.string() + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{2, "io error: cannot write '" + path.string() + "'"};
}

ojson config_json(const Config &cfg) {
  ojson c;
  c["model"] = cfg.model;
  if (!cfg.model_file.empty()) c["model_file"] = cfg.model_file;
  c["seed"] = cfg.seed;
  if (cfg.command == "select") {
    c["n_grid"] = cfg.n_grid;
  } else {
    c["n"] = cfg.n;
    if (cfg.rule.empty()) c["N"] = cfg.N;
    else c["rule"] = cfg.rule;
  }
  if (cfg.command == "estimate") {
    c["grid"] = cfg.grid;
    c["clip"] = cfg.clip;
    if (!cfg.samples_out.empty()) c["samples_out"] = cfg.samples_out;
  }
  if (cfg.command == "confidence") {
    c["alpha"] = cfg.alpha;
    c["rho_adaptive"] = cfg.rho_adaptive;
  }
  c["k_max"] = cfg.k_max;
  return c;
}

void write_manifest(const fs::path &dir, const Config &cfg, const std::vector<std::string> &outputs) {
  ojson m;
  m["tool"] = "projdens";
  m["version"] = pd_version();
  m["command"] = cfg.command;
  m["config"] = config_json(cfg);
  m["outputs"] = outputs;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

// Draws n samples, returning the snapshot; optionally keeps the samples.
void sample_snapshot(pd_model model, const Config &cfg, std::vector<double> &samples,
                     Snapshot &snap) {
  Stream stream;
  check(pd_stream_create(model, cfg.seed, stream.out()));
  samples.resize(cfg.n);
  check(pd_stream_draw(stream.get(), samples.size(), samples.data()));
  pd_basis_kind kind;
  check(pd_model_basis(model, &kind));
  const std::size_t k_max = cfg.k_max ? cfg.k_max : pd_accumulator_default_k_max(cfg.n);
  Accumulator acc;
  check(pd_accumulator_create(kind, k_max, acc.out()));
  check(pd_accumulator_push(acc.get(), samples.data(), samples.size()));
  check(pd_accumulator_snapshot(acc.get(), snap.out()));
}

// Order from --N or --rule.
std::size_t resolve_order(pd_model model, const Config &cfg, pd_snapshot snap,
                          const std::vector<double> &samples) {
  if (cfg.rule.empty()) return cfg.N;
  std::size_t order = 0;
  const std::string &r = cfg.rule;
  if (r == "N0") {
    check(pd_batch_optimal_order(model, cfg.n, 0, &order));
  } else if (r == "threshold") {
    check(pd_threshold_order(model, cfg.n, 0, &order));
  } else if (r == "recursive_oracle") {
    Trace trace;
    check(pd_trace_oracle(model, cfg.n, trace.out()));
    check(pd_trace_value(trace.get(), cfg.n, &order));
  } else if (r == "recursive_plugin" || r == "adaptive") {
    if (!snap) throw Failure{1, "internal error: rule needs a sample"};
    if (r == "adaptive") {
      int clipped = 0;
      check(pd_adaptive_order(snap, &order, &clipped));
      if (clipped) std::cerr << "projdens: warning: adaptive range clipped to k_max/2\n";
    } else {
      pd_basis_kind kind;
      check(pd_model_basis(model, &kind));
      std::size_t k_max;
      check(pd_snapshot_k_max(snap, &k_max));
      Trace trace;
      check(pd_trace_plugin(kind, samples.data(), samples.size(), k_max, trace.out()));
      check(pd_trace_value(trace.get(), cfg.n, &order));
    }
  } else {
    usage_error("unknown rule '" + r + "'");
  }
  return order;
}

void validate_order_choice(const Config &cfg) {
  if (cfg.n == 0) usage_error("--n must be >= 1");
  if (cfg.rule.empty() == (cfg.N == 0)) usage_error("exactly one of --N and --rule is required");
}

int cmd_estimate(Config &cfg) {
  validate_order_choice(cfg);
  Model model;
  resolve_model(cfg, model);
  const fs::path dir = prepare_out_dir(cfg);

  std::vector<double> samples;
  Snapshot snap;
  sample_snapshot(model.get(), cfg, samples, snap);
  const std::size_t order = resolve_order(model.get(), cfg, snap.get(), samples);

  Estimate est;
  check(pd_estimate_build(snap.get(), order, est.out()));
  const fs::path csv = dir / "estimate.csv";
  check(pd_estimate_write_grid_csv(est.get(), csv.string().c_str(), cfg.grid, cfg.clip ? 1 : 0));
  const fs::path coeffs = dir / "coefficients.csv";
  check(pd_snapshot_write_csv(snap.get(), coeffs.string().c_str(), 1, cfg.seed));
  std::vector<std::string> outputs{"estimate.csv", "coefficients.csv"};
  if (!cfg.samples_out.empty()) {
    std::ofstream out(cfg.samples_out, std::ios::binary);
    char buf[32];
    for (double x : samples) {
      std::snprintf(buf, sizeof buf, "%.17g\n", x);
      out << buf;
    }
    if (!out) throw Failure{2, "io error: cannot write '" + cfg.samples_out + "'"};
  }
  write_manifest(dir, cfg, outputs);
  std::cout << read_file(csv);
  std::cerr << "projdens: N=" << order << " n=" << cfg.n << "\n";
  return 0;
}

int cmd_select(Config &cfg) {
  Model model;
  resolve_model(cfg, model);
  std::size_t count = 0;
  check(pd_parse_n_grid(cfg.n_grid.c_str(), nullptr, 0, &count));
  std::vector<std::uint64_t> grid(count);
  check(pd_parse_n_grid(cfg.n_grid.c_str(), grid.data(), grid.size(), &count));
  const fs::path dir = prepare_out_dir(cfg);
  const fs::path csv = dir / "select.csv";
  check(pd_select_write_csv(model.get(), grid.data(), grid.size(), cfg.seed, cfg.k_max,
                            csv.string().c_str()));
  write_manifest(dir, cfg, {"select.csv"});
  std::cout << read_file(csv);
  return 0;
}

int cmd_confidence(Config &cfg) {
  validate_order_choice(cfg);
  Model model;
  resolve_model(cfg, model);
  const fs::path dir = prepare_out_dir(cfg);

  const bool needs_sample =
      cfg.rho_adaptive || cfg.rule == "recursive_plugin" || cfg.rule == "adaptive";
  std::vector<double> samples;
  Snapshot snap;
  if (needs_sample) sample_snapshot(model.get(), cfg, samples, snap);
  const std::size_t order = resolve_order(model.get(), cfg, snap.get(), samples);

  double M = 0.0;
  check(pd_model_sup_bound(model.get(), &M));
  double rho = 0.0;
  if (cfg.rho_adaptive) check(pd_adaptive_statistic(snap.get(), order, &rho));
  else check(pd_model_tail_energy(model.get(), order, &rho));

  pd_confidence_report rep{};
  check(pd_confidence_radius(order, cfg.n, M, rho, cfg.alpha,
                             cfg.rho_adaptive ? PD_RHO_ADAPTIVE : PD_RHO_ORACLE, &rep));
  ojson j;
  j["N"] = rep.N;
  j["n"] = rep.n;
  j["M"] = rep.M;
  j["rho"] = rep.rho;
  j["alpha"] = rep.alpha;
  j["t"] = rep.t;
  j["radius_sq"] = rep.radius_sq;
  j["rho_source"] = rep.rho_source == PD_RHO_ADAPTIVE ? "adaptive" : "oracle";
  j["heuristic"] = rep.rho_source == PD_RHO_ADAPTIVE;
  const std::string text = j.dump(2) + "\n";
  write_text(dir / "confidence.json", text);
  write_manifest(dir, cfg, {"confidence.json"});
  std::cout << text;
  return 0;
}

int dispatch(Config &cfg);

// `run --plan` accepts an experiment plan, a manifest written by `run`, or
// a manifest written by any other subcommand (replayed with its config).
int cmd_run(Config &cfg) {
  if (cfg.plan.empty()) usage_error("--plan is required");
  const std::string text = read_file(cfg.plan);
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw Failure{2, std::string("schema error: ") + e.what()};
  }
  if (doc.is_object() && doc.contains("command") && doc.contains("config") &&
      doc["command"] != "run") {
    Config replay;
    replay.command = doc["command"].get<std::string>();
    const auto &c = doc["config"];
    try {
      replay.model = c.at("model");
      replay.model_file = c.value("model_file", "");
      replay.seed = c.at("seed").get<std::uint64_t>();
      replay.k_max = c.value("k_max", std::size_t{0});
      if (replay.command == "select") {
        replay.n_grid = c.at("n_grid").get<std::string>();
      } else {
        replay.n = c.at("n").get<std::uint64_t>();
        if (c.contains("rule")) replay.rule = c["rule"].get<std::string>();
        else replay.N = c.at("N").get<std::size_t>();
      }
      replay.grid = c.value("grid", std::size_t{256});
      replay.clip = c.value("clip", false);
      replay.alpha = c.value("alpha", 0.05);
      replay.rho_adaptive = c.value("rho_adaptive", false);
    } catch (const nlohmann::json::exception &e) {
      throw Failure{2, std::string("schema error: manifest config: ") + e.what()};
    }
    replay.out_dir = cfg.out_dir;
    return dispatch(replay);
  }
  const fs::path dir = prepare_out_dir(cfg);
  const std::string base = fs::path(cfg.plan).parent_path().string();
  check(pd_run_plan(text.c_str(), base.c_str(), dir.string().c_str(), cfg.threads));
  std::cout << read_file(dir / "manifest.json");
  return 0;
}

int dispatch(Config &cfg) {
  if (cfg.command == "estimate") return cmd_estimate(cfg);
  if (cfg.command == "select") return cmd_select(cfg);
  if (cfg.command == "confidence") return cmd_confidence(cfg);
  if (cfg.command == "run") return cmd_run(cfg);
  usage_error("unknown command '" + cfg.command + "'");
}

} // namespace

int main(int argc, char **argv) {
  Config cfg;
  CLI::App app{"Projection density estimation on [0,1] with orthonormal bases."};
  app.name("projdens");
  app.set_version_flag("--version", std::string(pd_version()));
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");

  std::vector<std::string> rules{"N0", "threshold", "recursive_oracle", "recursive_plugin",
                                 "adaptive"};
  auto add_model = [&](CLI::App *sub) {
    sub->add_option("--model", cfg.model_file, "Density model JSON file")->required();
    sub->add_option("--basis", cfg.basis, "Override the model basis")
        ->check(CLI::IsMember({"cosine", "trig"}));
    sub->add_option("--seed", cfg.seed, "Base RNG seed")->capture_default_str();
    sub->add_option("--k-max", cfg.k_max, "Coefficients to accumulate (0: min(n, 4096))")
        ->capture_default_str();
  };
  auto add_out = [&](CLI::App *sub) {
    sub->add_option("--out-dir", cfg.out_dir,
                    "Output directory (default: $PROJDENS_OUT_DIR, else .)");
  };
  auto add_order = [&](CLI::App *sub) {
    sub->add_option("--n", cfg.n, "Sample size")->required();
    auto *N = sub->add_option("--N", cfg.N, "Fixed projection order");
    auto *rule = sub->add_option("--rule", cfg.rule, "Order selection rule")
                     ->check(CLI::IsMember(rules));
    N->excludes(rule);
  };

  auto *estimate = app.add_subcommand("estimate", "Fit a projection estimate to a simulated sample");
  add_model(estimate);
  add_order(estimate);
  estimate->add_option("--grid", cfg.grid, "Number of evaluation points")->capture_default_str();
  estimate->add_flag("--clip", cfg.clip, "Write max(f_hat, 0) instead of the raw estimate");
  estimate->add_option("--samples-out", cfg.samples_out, "Write the sample, one value per line");
  add_out(estimate);

  auto *select = app.add_subcommand("select", "Tabulate the order selectors over an n grid");
  add_model(select);
  select->add_option("--n-grid", cfg.n_grid, "Grid: a:b:log10[/k] or comma list")
      ->capture_default_str();
  add_out(select);

  auto *confidence = app.add_subcommand("confidence", "Confidence radius for the L2 deviation");
  add_model(confidence);
  add_order(confidence);
  confidence->add_option("--alpha", cfg.alpha, "Miscoverage level in (0, 1/e]")
      ->capture_default_str();
  confidence->add_flag("--rho-adaptive", cfg.rho_adaptive,
                       "Estimate the tail energy from the sample (heuristic)");
  add_out(confidence);

  auto *run = app.add_subcommand("run", "Run an experiment plan or replay a manifest");
  run->add_option("--plan", cfg.plan, "Plan or manifest JSON file")->required();
  run->add_option("--threads", cfg.threads, "Worker threads (0: machine parallelism)")
      ->capture_default_str();
  add_out(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "projdens: " << e.what() << "\n";
    return 2;
  }

  for (auto *sub : app.get_subcommands()) cfg.command = sub->get_name();
  if (cfg.out_dir.empty()) {
    if (const char *env = std::getenv("PROJDENS_OUT_DIR"); env && *env) cfg.out_dir = env;
  }

  try {
    return dispatch(cfg);
  } catch (const Failure &f) {
    std::cerr << "projdens: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception &e) {
    std::cerr << "projdens: internal error: " << e.what() << "\n";
    return 1;
  }
}
