#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "scent/errors.hpp"
#include "scent/losses.hpp"
#include "scent/model.hpp"
#include "scent/scenarios.hpp"
#include "scent/solver.hpp"
#include "scent/training.hpp"

namespace scent {

namespace detail {

// Config files are strict: a key that no field consumes is an error, since a
// silently ignored typo is the main operational hazard.
inline void require_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> allowed,
                         const char* where) {
  if (!j.is_object())
    throw ConfigError(std::string("config: ") + where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(std::string("config: unknown key '") + key + "' in " + where);
  }
}

template <typename T>
void maybe_get(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

}  // namespace detail

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "mse") return LossKind::Mse;
  if (s == "rel_mse") return LossKind::RelMse;
  throw ConfigError("config: unknown loss '" + s + "' (expected mse|rel_mse)");
}

// Data-generation section: solver physics plus the observation scenario
// layered on top. `count_train`/`count_val` size the two archives;
// `initial_frame` is the default forecast start frame.
struct DataConfig {
  std::string scenario = "s1";
  std::int64_t count_train = 1;
  std::int64_t count_val = 0;
  std::int64_t initial_frame = 1;
  SolverConfig solver;
  ScenarioConfig params;

  void validate() const {
    if (count_train < 1) throw ConfigError("DataConfig: count_train must be >= 1");
    if (count_val < 0) throw ConfigError("DataConfig: count_val must be >= 0");
    if (initial_frame < 0 || initial_frame >= solver.frames)
      throw ConfigError("DataConfig: initial_frame out of range");
    solver.validate();
    params.validate();
    scenario_from_name(scenario);  // throws on unknown name
  }
};

inline void to_json(nlohmann::json& j, const DataConfig& c) {
  j = {{"scenario", c.scenario},
       {"count_train", c.count_train},
       {"count_val", c.count_val},
       {"initial_frame", c.initial_frame},
       {"solver",
        {{"height", c.solver.height},
         {"width", c.solver.width},
         {"viscosity", c.solver.viscosity},
         {"dt", c.solver.dt},
         {"steps_per_frame", c.solver.steps_per_frame},
         {"frames", c.solver.frames},
         {"burn_in_time", c.solver.burn_in_time},
         {"grf_alpha", c.solver.grf_alpha},
         {"grf_tau", c.solver.grf_tau},
         {"forcing", c.solver.forcing}}},
       {"scenario_params",
        {{"noise_mean", c.params.noise_mean},
         {"noise_sigma", c.params.noise_sigma},
         {"sparsity", c.params.sparsity},
         {"regions", c.params.regions},
         {"region_size", c.params.region_size},
         {"max_shift", c.params.max_shift}}}};
}

inline void from_json(const nlohmann::json& j, DataConfig& c) {
  detail::require_keys(j,
                       {"scenario", "count_train", "count_val", "initial_frame",
                        "solver", "scenario_params"},
                       "data");
  detail::maybe_get(j, "scenario", c.scenario);
  detail::maybe_get(j, "count_train", c.count_train);
  detail::maybe_get(j, "count_val", c.count_val);
  detail::maybe_get(j, "initial_frame", c.initial_frame);
  if (auto it = j.find("solver"); it != j.end()) {
    detail::require_keys(*it,
                         {"height", "width", "viscosity", "dt", "steps_per_frame",
                          "frames", "burn_in_time", "grf_alpha", "grf_tau", "forcing"},
                         "data.solver");
    detail::maybe_get(*it, "height", c.solver.height);
    detail::maybe_get(*it, "width", c.solver.width);
    detail::maybe_get(*it, "viscosity", c.solver.viscosity);
    detail::maybe_get(*it, "dt", c.solver.dt);
    detail::maybe_get(*it, "steps_per_frame", c.solver.steps_per_frame);
    detail::maybe_get(*it, "frames", c.solver.frames);
    detail::maybe_get(*it, "burn_in_time", c.solver.burn_in_time);
    detail::maybe_get(*it, "grf_alpha", c.solver.grf_alpha);
    detail::maybe_get(*it, "grf_tau", c.solver.grf_tau);
    detail::maybe_get(*it, "forcing", c.solver.forcing);
  }
  if (auto it = j.find("scenario_params"); it != j.end()) {
    detail::require_keys(*it,
                         {"noise_mean", "noise_sigma", "sparsity", "regions",
                          "region_size", "max_shift"},
                         "data.scenario_params");
    detail::maybe_get(*it, "noise_mean", c.params.noise_mean);
    detail::maybe_get(*it, "noise_sigma", c.params.noise_sigma);
    detail::maybe_get(*it, "sparsity", c.params.sparsity);
    detail::maybe_get(*it, "regions", c.params.regions);
    detail::maybe_get(*it, "region_size", c.params.region_size);
    detail::maybe_get(*it, "max_shift", c.params.max_shift);
  }
  c.params.kind = scenario_from_name(c.scenario);
}

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"batch_size", c.batch_size},
       {"total_steps", c.total_steps},
       {"time_horizon", c.time_horizon},
       {"loss", loss_kind_name(c.loss)},
       {"val_interval", c.val_interval},
       {"lr",
        {{"max_lr", c.lr.max_lr},
         {"min_lr", c.lr.min_lr},
         {"warmup_steps", c.lr.warmup_steps},
         {"total_steps", c.lr.total_steps}}},
       {"adam",
        {{"beta1", c.adam.beta1},
         {"beta2", c.adam.beta2},
         {"eps", c.adam.eps},
         {"weight_decay", c.adam.weight_decay}}}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  detail::require_keys(
      j, {"batch_size", "total_steps", "time_horizon", "loss", "val_interval", "lr", "adam"},
      "train");
  detail::maybe_get(j, "batch_size", c.batch_size);
  detail::maybe_get(j, "total_steps", c.total_steps);
  detail::maybe_get(j, "time_horizon", c.time_horizon);
  if (auto it = j.find("loss"); it != j.end())
    c.loss = loss_kind_from_string(it->get<std::string>());
  detail::maybe_get(j, "val_interval", c.val_interval);
  if (auto it = j.find("lr"); it != j.end()) {
    detail::require_keys(*it, {"max_lr", "min_lr", "warmup_steps", "total_steps"},
                         "train.lr");
    detail::maybe_get(*it, "max_lr", c.lr.max_lr);
    detail::maybe_get(*it, "min_lr", c.lr.min_lr);
    detail::maybe_get(*it, "warmup_steps", c.lr.warmup_steps);
    detail::maybe_get(*it, "total_steps", c.lr.total_steps);
  }
  if (auto it = j.find("adam"); it != j.end()) {
    detail::require_keys(*it, {"beta1", "beta2", "eps", "weight_decay"}, "train.adam");
    detail::maybe_get(*it, "beta1", c.adam.beta1);
    detail::maybe_get(*it, "beta2", c.adam.beta2);
    detail::maybe_get(*it, "eps", c.adam.eps);
    detail::maybe_get(*it, "weight_decay", c.adam.weight_decay);
  }
}

// Everything one CLI invocation needs. Checkpoint/metrics paths are derived
// from the output directory at run time, and the global seed feeds every
// stage, so neither appears in the train section.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"seed", c.seed},
       {"out_dir", c.out_dir},
       {"data", c.data},
       {"model", c.model},
       {"train", c.train}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  detail::require_keys(j, {"seed", "out_dir", "data", "model", "train"}, "config root");
  detail::maybe_get(j, "seed", c.seed);
  detail::maybe_get(j, "out_dir", c.out_dir);
  if (auto it = j.find("data"); it != j.end()) it->get_to(c.data);
  if (auto it = j.find("model"); it != j.end()) {
    detail::require_keys(*it,
                         {"embed_dim", "latent_dim", "linear_projection_dim",
                          "num_queries", "n_enc", "n_proc", "n_dec", "enc_heads",
                          "proc_heads", "dec_heads", "sparse_groups", "ff_multiplier",
                          "fourier_bands", "fourier_max_resolution", "output_scale",
                          "latent_init_std", "channels", "spatial_dims", "time_horizon",
                          "use_cen", "use_cn", "use_proj", "use_tt"},
                         "model");
    nlohmann::json full = nlohmann::json(c.model);
    full.update(*it);  // absent keys keep the current (default or preset) values
    full.get_to(c.model);
  }
  if (auto it = j.find("train"); it != j.end()) it->get_to(c.train);
}

// Canonical serialized form: 2-space indent, keys sorted by nlohmann's object
// ordering, trailing newline. Dumping and reloading is the identity.
inline std::string dump_run_config(const RunConfig& c) {
  return nlohmann::json(c).dump(2) + "\n";
}

// Applies the keys present in `text` on top of `c`; absent keys keep their
// current values, so a file can refine a preset without restating it.
inline void overlay_run_config(RunConfig& c, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    j.get_to(c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad field: ") + e.what());
  }
}

inline RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  overlay_run_config(c, text);
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open " + path);
  std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  return parse_run_config(text);
}

inline void overlay_run_config_file(RunConfig& c, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open " + path);
  std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  overlay_run_config(c, text);
}

}  // namespace scent
