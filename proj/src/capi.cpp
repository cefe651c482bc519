// SPDX-License-Identifier: Apache-2.0

#include "csagame/csagame.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "config.hpp"
#include "runner.hpp"

struct csg_engine {
  nlohmann::json config;
  nlohmann::json result;
  bool has_result = false;
};

namespace {

thread_local std::string g_last_error;

csg_status fail(csg_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class Fn>
csg_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const csg::ParseError& e) {
    return fail(CSG_ERR_PARSE, e.what());
  } catch (const csg::ConfigError& e) {
    return fail(CSG_ERR_CONFIG, e.what());
  } catch (const csg::SimulationError& e) {
    return fail(CSG_ERR_SIMULATION, e.what());
  } catch (const csg::NumericError& e) {
    return fail(CSG_ERR_NUMERIC, e.what());
  } catch (const csg::IoError& e) {
    return fail(CSG_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CSG_ERR_ARGUMENT, e.what());
  } catch (const std::length_error& e) {
    return fail(CSG_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(CSG_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CSG_ERR_INTERNAL, "unknown error");
  }
}

csg_status create(nlohmann::json cfg, csg_engine** out) {
  if (!cfg.is_object()) return fail(CSG_ERR_PARSE, "config root must be a JSON object");
  *out = new csg_engine{std::move(cfg), {}, false};
  return CSG_OK;
}

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += (s.empty() ? "" : "; ") + e;
  return s;
}

}  // namespace

extern "C" {

const char* csg_version(void) { return CSAGAME_VERSION; }

const char* csg_last_error(void) { return g_last_error.c_str(); }

void csg_string_free(char* s) { std::free(s); }

csg_status csg_engine_create_from_file(const char* path, csg_engine** out) {
  if (!path || !out) return fail(CSG_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { return create(csg::read_config_file(path), out); });
}

csg_status csg_engine_create_from_json(const char* json_text, csg_engine** out) {
  if (!json_text || !out) return fail(CSG_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { return create(csg::parse_config_text(json_text, "json"), out); });
}

void csg_engine_destroy(csg_engine* engine) { delete engine; }

csg_status csg_engine_set(csg_engine* engine, const char* dotted_key, const char* value) {
  if (!engine || !dotted_key || !value) return fail(CSG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    csg::apply_override(engine->config, std::string(dotted_key) + "=" + value);
    return CSG_OK;
  });
}

csg_status csg_engine_validate(csg_engine* engine, const char* mode, char** diagnostics_json) {
  if (!engine) return fail(CSG_ERR_ARGUMENT, "null engine");
  return guarded([&] {
    const csg::Diagnostics d = csg::validate_config(engine->config, mode ? mode : "");
    if (diagnostics_json) *diagnostics_json = dup(d.to_json().dump(2));
    if (!d.ok()) return fail(CSG_ERR_CONFIG, joined(d.errors));
    return CSG_OK;
  });
}

csg_status csg_engine_run(csg_engine* engine, const char* mode, const char* out_dir, int* outcome) {
  if (!engine || !mode) return fail(CSG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    csg::Diagnostics d;
    const csg::RunConfig cfg = csg::build_run_config(engine->config, d, mode);
    if (!d.ok()) return fail(CSG_ERR_CONFIG, joined(d.errors));
    csg::RunResult r = csg::run(cfg, mode, out_dir ? out_dir : "");
    r.summary["warnings"] = d.warnings;
    engine->result = std::move(r.summary);
    engine->has_result = true;
    if (outcome) *outcome = r.outcome;
    return CSG_OK;
  });
}

csg_status csg_engine_result_json(const csg_engine* engine, char** json_out) {
  if (!engine || !json_out) return fail(CSG_ERR_ARGUMENT, "null argument");
  if (!engine->has_result) return fail(CSG_ERR_STATE, "no run has completed on this engine");
  return guarded([&] {
    *json_out = dup(engine->result.dump(2));
    return CSG_OK;
  });
}

csg_status csg_engine_config_json(const csg_engine* engine, char** json_out) {
  if (!engine || !json_out) return fail(CSG_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    csg::Diagnostics d;
    const csg::RunConfig cfg = csg::build_run_config(engine->config, d);
    *json_out = dup(cfg.resolved.dump(2));
    return CSG_OK;
  });
}

}  // extern "C"
