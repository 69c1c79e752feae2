#include <ftc/commands.hpp>
#include <ftc/ftc.h>
#include <ftc/pmp.hpp>
#include <ftc/systems.hpp>

#include <exception>
#include <string>

struct ftc_scenario {
  ftc::Scenario scenario;
};

struct ftc_result {
  ftc::CommandResult result;
};

namespace {

thread_local std::string last_error;

ftc_status status_of(ftc::ErrorKind k) {
  switch (k) {
    case ftc::ErrorKind::Input: return FTC_ERR_INPUT;
    case ftc::ErrorKind::Domain: return FTC_ERR_DOMAIN;
    case ftc::ErrorKind::Lookup: return FTC_ERR_LOOKUP;
    case ftc::ErrorKind::Divergence: return FTC_ERR_DIVERGENCE;
    case ftc::ErrorKind::Unsupported: return FTC_ERR_UNSUPPORTED;
    case ftc::ErrorKind::Config: return FTC_ERR_CONFIG;
  }
  return FTC_ERR_INTERNAL;
}

template <class F>
ftc_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const ftc::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("malformed JSON: ") + e.what();
    return FTC_ERR_CONFIG;
  } catch (const std::exception& e) {
    last_error = e.what();
    return FTC_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return FTC_ERR_INTERNAL;
  }
}

ftc_status null_arg(const char* what) {
  last_error = std::string("null argument: ") + what;
  return FTC_ERR_INPUT;
}

ftc::Vec view(const double* p, int n) { return Eigen::Map<const ftc::Vec>(p, n); }

}  // namespace

extern "C" {

const char* ftc_version(void) { return "0.1.0"; }

const char* ftc_last_error(void) { return last_error.c_str(); }

ftc_status ftc_scenario_open(const char* id, const char* params_json, ftc_scenario** out) {
  if (!id) return null_arg("id");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    ftc::ScenarioParams params;
    if (params_json) params = ftc::scenario_params_from_json(ftc::Json::parse(params_json));
    *out = new ftc_scenario{ftc::get_scenario(id, params)};
    return FTC_OK;
  });
}

void ftc_scenario_close(ftc_scenario* sc) { delete sc; }

ftc_status ftc_scenario_dims(const ftc_scenario* sc, int* n, int* r) {
  if (!sc) return null_arg("scenario");
  if (n) *n = sc->scenario.system.n();
  if (r) *r = sc->scenario.system.r();
  last_error.clear();
  return FTC_OK;
}

ftc_status ftc_eval_dynamics(const ftc_scenario* sc, double t, const double* x, const double* u,
                             double* out) {
  if (!sc || !x || !u || !out) return null_arg("scenario, x, u or out");
  return guarded([&] {
    const auto& sys = sc->scenario.system;
    const ftc::Vec f = ftc::eval_dynamics(sys.dynamics, t, view(x, sys.n()), view(u, sys.r()));
    for (int i = 0; i < sys.n(); ++i) out[i] = f[i];
    return FTC_OK;
  });
}

ftc_status ftc_eval_jacobian(const ftc_scenario* sc, double t, const double* x, const double* u,
                             double* out) {
  if (!sc || !x || !u || !out) return null_arg("scenario, x, u or out");
  return guarded([&] {
    const auto& sys = sc->scenario.system;
    const ftc::Mat A = ftc::eval_jacobian(sys.dynamics, t, view(x, sys.n()), view(u, sys.r()));
    for (int i = 0; i < sys.n(); ++i)
      for (int k = 0; k < sys.n(); ++k) out[i * sys.n() + k] = A(i, k);
    return FTC_OK;
  });
}

ftc_status ftc_max_function(const ftc_scenario* sc, double t, const double* x, const double* psi,
                            double* value, double* witness) {
  if (!sc || !x || !psi || !value) return null_arg("scenario, x, psi or value");
  return guarded([&] {
    const auto& sys = sc->scenario.system;
    const ftc::RowVec p = view(psi, sys.n()).transpose();
    const auto m = ftc::max_function(sys, t, view(x, sys.n()), p);
    *value = m.value;
    if (witness)
      for (int j = 0; j < sys.r(); ++j) witness[j] = m.witness[j];
    return FTC_OK;
  });
}

ftc_status ftc_run(const char* command, const char* request_json, ftc_result** out) {
  if (!command) return null_arg("command");
  if (!request_json) return null_arg("request_json");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto res = ftc::run_command(command, ftc::Json::parse(request_json));
    const auto code = static_cast<ftc_status>(res.outcome);
    *out = new ftc_result{std::move(res)};
    return code;
  });
}

const char* ftc_result_json(const ftc_result* res) { return res ? res->result.json.c_str() : nullptr; }

size_t ftc_result_artifact_count(const ftc_result* res) {
  return res ? res->result.artifacts.size() : 0;
}

const char* ftc_result_artifact_name(const ftc_result* res, size_t i) {
  if (!res || i >= res->result.artifacts.size()) return nullptr;
  return res->result.artifacts[i].first.c_str();
}

const char* ftc_result_artifact_data(const ftc_result* res, size_t i, size_t* size) {
  if (!res || i >= res->result.artifacts.size()) return nullptr;
  const auto& data = res->result.artifacts[i].second;
  if (size) *size = data.size();
  return data.c_str();
}

void ftc_result_free(ftc_result* res) { delete res; }

}  // extern "C"
