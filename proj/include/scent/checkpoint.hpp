#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scent/archive.hpp"
#include "scent/errors.hpp"
#include "scent/model.hpp"
#include "scent/optim.hpp"

namespace scent {

namespace detail {

template <typename T>
constexpr const char* dtype_name() {
  if constexpr (std::is_same_v<T, double>) return "f64";
  else if constexpr (std::is_same_v<T, float>) return "f32";
  else return "unknown";
}

}  // namespace detail

// A restored checkpoint. All per-step training randomness is derived from
// (seed, step), so these two fields are the complete RNG state and resumption
// reproduces an uninterrupted run bit for bit.
template <typename T>
struct RestoredCheckpoint {
  ScentModel<T> model;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  bool has_optimizer = false;
  AdamWConfig adam_config{};
  std::int64_t adam_step_count = 0;
  std::vector<std::vector<T>> exp_avg;     // per trainable parameter, in order
  std::vector<std::vector<T>> exp_avg_sq;  // per trainable parameter, in order
};

// Binary checkpoint: magic "SCCK", version u32 LE, u64 header length, UTF-8
// JSON header {config, step, rng_state, optimizer?, manifest}, then raw
// little-endian tensor payloads in manifest (lexicographic name) order.
// Optimizer moments are stored as tensors named "opt.exp_avg/<param>" and
// "opt.exp_avg_sq/<param>".
template <typename T>
void save_checkpoint(const std::string& path, const ScentModel<T>& model,
                     std::int64_t step, std::uint64_t seed,
                     const AdamW<T>* opt = nullptr) {
  if (step < 0) throw ContractError("save_checkpoint: negative step");

  // Gather name -> (shape, raw data pointer, element count).
  struct Entry {
    Shape shape;
    const T* data;
    std::int64_t numel;
  };
  std::map<std::string, Entry> entries;
  for (const auto& [name, t] : model.named_parameters())
    entries.emplace(name, Entry{t.shape(), t.data().data(), t.numel()});
  if (opt != nullptr) {
    auto trainable = model.trainable_parameters();
    if (opt->size() != trainable.size())
      throw ContractError("save_checkpoint: optimizer does not match model");
    std::size_t i = 0;
    for (const auto& [name, t] : model.named_parameters()) {
      if (!t.requires_grad()) continue;
      const auto& m = opt->exp_avg(i);
      const auto& v = opt->exp_avg_sq(i);
      entries.emplace("opt.exp_avg/" + name,
                      Entry{t.shape(), m.data(), t.numel()});
      entries.emplace("opt.exp_avg_sq/" + name,
                      Entry{t.shape(), v.data(), t.numel()});
      ++i;
    }
  }

  nlohmann::json manifest = nlohmann::json::object();
  std::uint64_t offset = 0;  // relative to the start of the payload section
  for (const auto& [name, e] : entries) {
    manifest[name] = {{"shape", e.shape},
                      {"dtype", detail::dtype_name<T>()},
                      {"offset", offset}};
    offset += static_cast<std::uint64_t>(e.numel) * sizeof(T);
  }

  nlohmann::json header{{"config", model.config()},
                        {"step", step},
                        {"rng_state", {{"seed", seed}}},
                        {"manifest", manifest}};
  if (opt != nullptr)
    header["optimizer"] = {{"beta1", opt->config().beta1},
                           {"beta2", opt->config().beta2},
                           {"eps", opt->config().eps},
                           {"weight_decay", opt->config().weight_decay},
                           {"step_count", opt->step_count()}};
  const std::string hj = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("save_checkpoint: cannot open " + path);
  detail::write_bytes(os, "SCCK", 4);
  const std::uint32_t version = 1;
  detail::write_bytes(os, &version, 4);
  const std::uint64_t hlen = hj.size();
  detail::write_bytes(os, &hlen, 8);
  detail::write_bytes(os, hj.data(), hj.size());
  for (const auto& [name, e] : entries)
    detail::write_bytes(os, e.data, static_cast<std::size_t>(e.numel) * sizeof(T));
  os.flush();
  if (!os) throw IoError("save_checkpoint: flush failed");
}

template <typename T>
RestoredCheckpoint<T> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_checkpoint: cannot open " + path);
  char magic[4];
  detail::read_bytes(is, magic, 4);
  if (std::string_view(magic, 4) != "SCCK")
    throw IoError("load_checkpoint: bad magic in " + path);
  std::uint32_t version = 0;
  detail::read_bytes(is, &version, 4);
  if (version != 1) throw IoError("load_checkpoint: unsupported version");
  std::uint64_t hlen = 0;
  detail::read_bytes(is, &hlen, 8);
  std::string hj(hlen, '\0');
  detail::read_bytes(is, hj.data(), hlen);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hj);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("load_checkpoint: corrupt header: ") + e.what());
  }

  ModelConfig cfg;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  nlohmann::json manifest;
  try {
    cfg = header.at("config").get<ModelConfig>();
    step = header.at("step").get<std::int64_t>();
    seed = header.at("rng_state").at("seed").get<std::uint64_t>();
    manifest = header.at("manifest");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("load_checkpoint: incomplete header: ") + e.what());
  }

  // Payload region starts right after the header; slurp it once.
  std::vector<char> payload((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());

  auto fetch = [&](const std::string& name, const Shape& want, T* dst) {
    if (!manifest.contains(name))
      throw IoError("load_checkpoint: missing tensor " + name);
    const auto& entry = manifest.at(name);
    if (entry.at("dtype").get<std::string>() != detail::dtype_name<T>())
      throw IoError("load_checkpoint: dtype mismatch for " + name);
    const auto shape = entry.at("shape").get<Shape>();
    if (shape != want) throw IoError("load_checkpoint: shape mismatch for " + name);
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const std::uint64_t bytes = static_cast<std::uint64_t>(shape_numel(shape)) * sizeof(T);
    if (offset + bytes > payload.size())
      throw IoError("load_checkpoint: truncated payload at " + name);
    std::memcpy(dst, payload.data() + offset, bytes);
  };

  RestoredCheckpoint<T> out{ScentModel<T>(cfg, seed), step, seed};
  for (auto [name, t] : out.model.named_parameters())
    fetch(name, t.shape(), t.data().data());

  if (header.contains("optimizer")) {
    out.has_optimizer = true;
    const auto& oj = header.at("optimizer");
    out.adam_config.beta1 = oj.at("beta1").get<double>();
    out.adam_config.beta2 = oj.at("beta2").get<double>();
    out.adam_config.eps = oj.at("eps").get<double>();
    out.adam_config.weight_decay = oj.at("weight_decay").get<double>();
    out.adam_step_count = oj.at("step_count").get<std::int64_t>();
    for (const auto& [name, t] : out.model.named_parameters()) {
      if (!t.requires_grad()) continue;
      std::vector<T> m(static_cast<std::size_t>(t.numel()));
      std::vector<T> v(static_cast<std::size_t>(t.numel()));
      fetch("opt.exp_avg/" + name, t.shape(), m.data());
      fetch("opt.exp_avg_sq/" + name, t.shape(), v.data());
      out.exp_avg.push_back(std::move(m));
      out.exp_avg_sq.push_back(std::move(v));
    }
  }
  return out;
}

// Rebuilds an optimizer bound to the restored model with the saved moments.
template <typename T>
AdamW<T> restore_optimizer(const RestoredCheckpoint<T>& r) {
  if (!r.has_optimizer)
    throw ContractError("restore_optimizer: checkpoint has no optimizer state");
  AdamW<T> opt(r.model.trainable_parameters(), r.adam_config);
  if (opt.size() != r.exp_avg.size())
    throw ContractError("restore_optimizer: moment count mismatch");
  for (std::size_t i = 0; i < r.exp_avg.size(); ++i) {
    opt.exp_avg(i) = r.exp_avg[i];
    opt.exp_avg_sq(i) = r.exp_avg_sq[i];
  }
  opt.set_step_count(r.adam_step_count);
  return opt;
}

}  // namespace scent
