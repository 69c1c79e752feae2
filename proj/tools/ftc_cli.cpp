// Command-line front end over the ftc C API.

#include <ftc/ftc.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::string> scenario, pair, control, convention, scan;
  std::vector<std::string> params;
  std::optional<int> cells, workers, sequence, samples, grid, control_cells, s;
  std::optional<double> tol, resolution, residual_tol, eps, ball, horizon;
  std::optional<std::uint64_t> seed;
  std::vector<int> p;
  std::vector<double> target;
  bool force = false;
  bool allow_inadmissible = false;
};

template <class T>
void put(Json& req, const char* key, const std::optional<T>& v) {
  if (v) req[key] = *v;
}

std::vector<double> parse_scan(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--scan", "expected start:step:stop, got '" + spec + "'");
    }
  }
  if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
    throw CLI::ValidationError("--scan", "expected start:step:stop with step > 0 and stop >= start");
  }
  const long count = std::lround((parts[2] - parts[0]) / parts[1]) + 1;
  if (count > 10000) throw CLI::ValidationError("--scan", "too many targets");
  std::vector<double> out;
  const double last = parts[0] + static_cast<double>(count - 1) * parts[1];
  for (long k = 0; k < count; ++k) {
    if (count == 1) {
      out.push_back(parts[0]);
    } else {
      const double a = static_cast<double>(count - 1 - k), b = static_cast<double>(k);
      out.push_back((parts[0] * a + last * b) / static_cast<double>(count - 1));
    }
  }
  return out;
}

Json build_request(const Flags& f) {
  Json req = Json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw CLI::ValidationError("--config", "cannot read " + f.config);
    req = Json::parse(in);
    if (!req.is_object()) throw CLI::ValidationError("--config", "config file must hold a JSON object");
  }
  put(req, "scenario", f.scenario);
  put(req, "pair", f.pair);
  put(req, "control", f.control);
  put(req, "cells", f.cells);
  put(req, "workers", f.workers);
  put(req, "tol", f.tol);
  put(req, "s", f.s);
  put(req, "resolution", f.resolution);
  put(req, "residual_tol", f.residual_tol);
  put(req, "convention", f.convention);
  put(req, "eps", f.eps);
  put(req, "sequence", f.sequence);
  put(req, "control_cells", f.control_cells);
  put(req, "ball", f.ball);
  put(req, "samples", f.samples);
  put(req, "seed", f.seed);
  put(req, "horizon", f.horizon);
  put(req, "grid", f.grid);
  if (f.force) req["force"] = true;
  if (f.allow_inadmissible) req["allow_inadmissible"] = true;
  if (!f.p.empty()) req["p"] = f.p;
  if (f.target.size() == 1) {
    req["target"] = f.target.front();
  } else if (!f.target.empty()) {
    req["target"] = f.target;
  }
  if (f.scan) req["scan"] = parse_scan(*f.scan);
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--param", "non-numeric value in '" + kv + "'");
    }
    req["scenario_params"][kv.substr(0, eq)] = v;
  }
  return req;
}

void write_atomic(const fs::path& path, const char* data, size_t size) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os.write(data, static_cast<std::streamsize>(size));
    if (!os) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

int exit_code(ftc_status st) {
  switch (st) {
    case FTC_OK:
    case FTC_AUDIT_FAIL:
    case FTC_LAMBDA_EMPTY:
    case FTC_ATTAIN_REFUSED:
    case FTC_ATTAIN_FAILED:
    case FTC_ERR_CONFIG:
    case FTC_ERR_DIVERGENCE:
      return static_cast<int>(st);
    case FTC_ERR_INPUT:
    case FTC_ERR_DOMAIN:
    case FTC_ERR_LOOKUP:
    case FTC_ERR_UNSUPPORTED:
      return kExitConfig;
    default:
      return 1;
  }
}

int run(const std::string& command, const Flags& flags) {
  Json req;
  try {
    req = build_request(flags);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad config file: " << e.what() << "\n";
    return kExitConfig;
  }
  ftc_result* res = nullptr;
  const ftc_status st = ftc_run(command.c_str(), req.dump().c_str(), &res);
  if (!res) {
    std::cerr << "error: " << ftc_last_error() << "\n";
    return exit_code(st);
  }
  try {
    fs::create_directories(flags.out);
    for (size_t i = 0; i < ftc_result_artifact_count(res); ++i) {
      size_t size = 0;
      const char* data = ftc_result_artifact_data(res, i, &size);
      write_atomic(fs::path(flags.out) / ftc_result_artifact_name(res, i), data, size);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    ftc_result_free(res);
    return 1;
  }
  std::cout << ftc_result_json(res);
  ftc_result_free(res);
  return exit_code(st);
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; explicit flags win");
  sub->add_option("--scenario", f.scenario, "scenario id");
  sub->add_option("--param", f.params, "scenario parameter override key=value")->allow_extra_args(false);
  sub->add_option("--cells", f.cells, "mesh cells per unit time");
  sub->add_option("--out", f.out, "output directory")->capture_default_str();
  sub->add_option("--workers", f.workers, "worker threads (0: all cores)");
}

void add_lambda_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--s", f.s, "side: -1 or 1");
  sub->add_option("--resolution", f.resolution, "sphere scan angular resolution");
  sub->add_option("--residual-tol", f.residual_tol, "max-condition tolerance");
  sub->add_option("--convention", f.convention, "transversality convention")
      ->check(CLI::IsMember({"definition", "theorem"}));
  sub->add_flag("--allow-inadmissible", f.allow_inadmissible,
                "use finite-difference velocities for pairs failing the audit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-time controllability checks for relaxed control pairs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ftc_version()));
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "integrate a reference pair or a control law");
  add_common(simulate, f);
  simulate->add_option("--pair", f.pair, "reference pair");
  simulate->add_option("--control", f.control, "named control law");

  auto* audit = app.add_subcommand("audit", "check x' = <mu, f> along a reference pair");
  add_common(audit, f);
  audit->add_option("--pair", f.pair, "reference pair");
  audit->add_option("--tol", f.tol, "residual tolerance (default 1e-6)");

  auto* lambda = app.add_subcommand("lambda", "search the unit sphere for a multiplier");
  add_common(lambda, f);
  lambda->add_option("--pair", f.pair, "reference pair");
  add_lambda_flags(lambda, f);

  auto* chatter = app.add_subcommand("chatter", "chattering convergence study");
  add_common(chatter, f);
  chatter->add_option("--pair", f.pair, "reference pair");
  chatter->add_option("--p", f.p, "sub-cycle counts, comma separated")->delimiter(',')->required();
  chatter->add_option("--control-cells", f.control_cells, "cells of the relaxed control (default 1)");

  auto* attain = app.add_subcommand("attain", "construct an ordinary control reaching the endpoint early or late");
  add_common(attain, f);
  attain->add_option("--pair", f.pair, "reference pair");
  attain->add_option("--eps", f.eps, "time and tube tolerance");
  attain->add_option("--sequence", f.sequence, "minimizing sequence length");
  attain->add_flag("--force", f.force, "skip the multiplier gate");
  add_lambda_flags(attain, f);

  auto* value = app.add_subcommand("value", "Monte Carlo minimum-time estimate");
  add_common(value, f);
  value->add_option("--target", f.target, "target state, comma separated")->delimiter(',');
  value->add_option("--scan", f.scan, "scalar target scan start:step:stop");
  value->add_option("--ball", f.ball, "target ball radius");
  value->add_option("--samples", f.samples, "random controls");
  value->add_option("--seed", f.seed, "random seed");
  value->add_option("--horizon", f.horizon, "time horizon");
  value->add_option("--grid", f.grid, "integration steps over the horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  return run(app.get_subcommands().front()->get_name(), f);
}
