// scent: conditioned-neural-field toolkit.
//
// Subcommands: gen-data, train, eval, forecast, gradcheck, cost.
// Configuration precedence, lowest to highest: built-in defaults, --preset,
// the SCENT_SEED environment variable (seed only), --config file, flags.
// Exit codes: 0 success, 2 configuration/usage error, 3 I/O error,
// 4 numerical abort (non-finite loss), 5 gradient check above threshold.

#include <cerrno>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "scent/cli.hpp"

namespace {

std::uint64_t parse_seed(const std::string& s, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end == s.c_str() || *end != '\0' || s.find('-') != std::string::npos)
    throw scent::ConfigError(what + ": '" + s + "' is not an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

struct Common {
  std::string preset;
  std::string config_path;
  std::string seed_text;
  std::string out_dir;
  bool dump = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--preset", c.preset, "Named preset configuration");
  cmd->add_option("--config", c.config_path, "JSON config file overlaid on the preset");
  cmd->add_option("--seed", c.seed_text, "Seed (overrides config file and SCENT_SEED)");
  cmd->add_option("--out", c.out_dir, "Output directory");
  cmd->add_flag("--dump-config", c.dump, "Print the effective config as JSON and exit");
}

scent::RunConfig resolve(const Common& c) {
  scent::RunConfig cfg;
  if (!c.preset.empty()) cfg = scent::make_preset(c.preset);
  if (const char* env = std::getenv("SCENT_SEED"))
    cfg.seed = parse_seed(env, "SCENT_SEED");
  if (!c.config_path.empty()) scent::overlay_run_config_file(cfg, c.config_path);
  if (!c.seed_text.empty()) cfg.seed = parse_seed(c.seed_text, "--seed");
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  return cfg;
}

void apply_ablations(scent::ModelConfig& m, const std::string& list) {
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "cen") m.use_cen = false;
    else if (tok == "cn") m.use_cn = false;
    else if (tok == "proj") m.use_proj = false;
    else if (tok == "tt") m.use_tt = false;
    else if (!tok.empty())
      throw scent::ConfigError("--ablate: unknown feature '" + tok +
                               "' (expected cen, cn, proj, tt)");
  }
}

int dispatch(int argc, char** argv) {
  CLI::App app{"scent: conditioned neural field toolkit"};
  app.require_subcommand(1);

  // gen-data ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "Simulate trajectories into STRJ archives");
  Common gen_c;
  add_common(gen, gen_c);
  std::int64_t gd_count = 0, gd_count_val = -1, gd_frames = 0, gd_height = 0,
               gd_width = 0, gd_regions = 0;
  double gd_sigma = -1.0, gd_sparsity = -1.0, gd_viscosity = 0.0;
  std::string gd_scenario;
  gen->add_option("--count", gd_count, "Training trajectories to generate");
  gen->add_option("--count-val", gd_count_val, "Validation trajectories to generate");
  gen->add_option("--scenario", gd_scenario, "Observation scenario (s1..s5)");
  gen->add_option("--frames", gd_frames, "Stored frames per trajectory");
  gen->add_option("--height", gd_height, "Grid height");
  gen->add_option("--width", gd_width, "Grid width");
  gen->add_option("--viscosity", gd_viscosity, "Kinematic viscosity");
  gen->add_option("--sigma", gd_sigma, "Multiplicative noise sigma (s2)");
  gen->add_option("--sparsity", gd_sparsity, "Kept fraction of points (s4)");
  gen->add_option("--regions", gd_regions, "Observed region count (s5)");

  // train ------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train a model on an STRJ archive");
  Common train_c;
  add_common(train, train_c);
  std::string tr_data, tr_val, tr_resume, tr_ablate;
  std::int64_t tr_steps = 0, tr_batch = 0, tr_val_interval = 0;
  train->add_option("--data", tr_data, "Training archive (.strj)");
  train->add_option("--val", tr_val, "Validation archive (.strj)");
  train->add_option("--resume", tr_resume,
                    "Checkpoint to continue from (keeps its seed and weights)");
  train->add_option("--steps", tr_steps,
                    "Total steps (a shorter run is a prefix of the preset schedule)");
  train->add_option("--batch", tr_batch, "Batch size");
  train->add_option("--val-interval", tr_val_interval, "Steps between validations");
  train->add_option("--ablate", tr_ablate, "Comma list of features to disable: cen,cn,proj,tt");

  // eval -------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "One-step validation Rel-MSE of a checkpoint");
  std::string ev_checkpoint, ev_data, ev_seed_text;
  eval->add_option("--checkpoint", ev_checkpoint, "Checkpoint (.scck)")->required();
  eval->add_option("--data", ev_data, "Validation archive (.strj)")->required();
  eval->add_option("--seed", ev_seed_text, "Override the checkpoint seed");

  // forecast ---------------------------------------------------------------
  auto* fc = app.add_subcommand(
      "forecast", "Warp-unrolled forecast; without --checkpoint, print the hop plan");
  std::string fc_checkpoint, fc_data, fc_out = ".", fc_seed_text;
  std::int64_t fc_traj = 0, fc_start = 0, fc_span = 0;
  double fc_th = 0.0;
  bool fc_render = false;
  fc->add_option("--checkpoint", fc_checkpoint, "Checkpoint (.scck)");
  fc->add_option("--data", fc_data, "Archive providing the initial frame and ground truth");
  fc->add_option("--traj", fc_traj, "Trajectory index in the archive");
  fc->add_option("--start", fc_start, "Starting train-frame ordinal");
  fc->add_option("--span", fc_span, "Coarse steps to forecast ahead")->required();
  fc->add_option("--th", fc_th, "Planning horizon (default: the model's)");
  fc->add_option("--out", fc_out, "Output directory");
  fc->add_option("--seed", fc_seed_text, "Override the checkpoint seed");
  fc->add_flag("--render", fc_render, "Write PGM renders with a range sidecar");

  // gradcheck ----------------------------------------------------------------
  auto* gc = app.add_subcommand("gradcheck",
                                "Finite-difference gradient verification (binary64)");
  Common gc_c;
  add_common(gc, gc_c);
  int gc_samples = 100;
  double gc_threshold = 1e-4;
  gc->add_option("--samples", gc_samples, "Parameter coordinates to probe");
  gc->add_option("--threshold", gc_threshold, "Failure threshold on max relative error");

  // cost -------------------------------------------------------------------
  auto* cost = app.add_subcommand("cost", "Inference cost model (unit-constant flops)");
  std::string co_family, co_preset;
  scent::CostModelParams co_params;
  std::int64_t co_unroll = 0;
  cost->add_option("--family", co_family, "fno, aroma, or scent (omit for the full table)");
  cost->add_option("--preset", co_preset, "'paper': published operating point");
  cost->add_option("--T", co_unroll, "Autoregressive steps (fno/aroma)");
  cost->add_option("--W", co_unroll, "Warp count (scent)");
  cost->add_option("--L", co_params.L, "Layers (fno)");
  cost->add_option("--N", co_params.N, "Input/query points");
  cost->add_option("--d", co_params.d, "Latent width");
  cost->add_option("--C", co_params.C, "Channels/modes factor (fno)");
  cost->add_option("--M", co_params.M, "Latent token count");
  cost->add_option("--K", co_params.K, "Neighbours per query (aroma)");
  cost->add_option("--L1", co_params.L1, "Processor layers (aroma)");
  cost->add_option("--L2", co_params.L2, "Coder layers (aroma)");
  cost->add_option("--Ls", co_params.L_s, "Sampled coder layers (scent)");
  cost->add_option("--S", co_params.S, "Coder subsample size (scent)");
  cost->add_option("--Lm", co_params.L_m, "Processor layers (scent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (*gen) {
    auto cfg = resolve(gen_c);
    if (gen->count("--count")) cfg.data.count_train = gd_count;
    if (gen->count("--count-val")) cfg.data.count_val = gd_count_val;
    if (gen->count("--scenario")) {
      cfg.data.scenario = gd_scenario;
      cfg.data.params.kind = scent::scenario_from_name(gd_scenario);
    }
    if (gen->count("--frames")) cfg.data.solver.frames = gd_frames;
    if (gen->count("--height")) cfg.data.solver.height = gd_height;
    if (gen->count("--width")) cfg.data.solver.width = gd_width;
    if (gen->count("--viscosity")) cfg.data.solver.viscosity = gd_viscosity;
    if (gen->count("--sigma")) cfg.data.params.noise_sigma = gd_sigma;
    if (gen->count("--sparsity")) cfg.data.params.sparsity = gd_sparsity;
    if (gen->count("--regions")) cfg.data.params.regions = gd_regions;
    if (gen_c.dump) {
      std::cout << scent::dump_run_config(cfg);
      return 0;
    }
    cfg.data.validate();
    scent::cli::run_gen_data(cfg, std::cout);
    return 0;
  }

  if (*train) {
    auto cfg = resolve(train_c);
    if (train->count("--steps")) {
      cfg.train.total_steps = tr_steps;
      // Fewer steps than the schedule span runs a prefix of the same schedule;
      // more steps extends the span so the schedule stays valid.
      cfg.train.lr.total_steps = std::max(cfg.train.lr.total_steps, tr_steps);
    }
    if (train->count("--batch")) cfg.train.batch_size = tr_batch;
    if (train->count("--val-interval")) cfg.train.val_interval = tr_val_interval;
    if (!tr_ablate.empty()) apply_ablations(cfg.model, tr_ablate);
    if (train_c.dump) {
      std::cout << scent::dump_run_config(cfg);
      return 0;
    }
    if (tr_data.empty()) throw scent::ConfigError("train: --data is required");
    scent::cli::run_train(cfg, tr_data, tr_val, tr_resume, std::cout);
    return 0;
  }

  if (*eval) {
    std::uint64_t seed = 0;
    const std::uint64_t* seed_ptr = nullptr;
    if (!ev_seed_text.empty()) {
      seed = parse_seed(ev_seed_text, "--seed");
      seed_ptr = &seed;
    } else if (const char* env = std::getenv("SCENT_SEED")) {
      seed = parse_seed(env, "SCENT_SEED");
      seed_ptr = &seed;
    }
    scent::cli::run_eval(ev_checkpoint, ev_data, seed_ptr, std::cout);
    return 0;
  }

  if (*fc) {
    if (fc_checkpoint.empty()) {
      if (fc_th <= 0)
        throw scent::ConfigError("forecast: --th is required without --checkpoint");
      const auto plan = scent::plan_wuf(0.0, static_cast<double>(fc_span), fc_th);
      std::cout << "hops [";
      for (std::size_t i = 0; i < plan.hops.size(); ++i)
        std::cout << (i ? "," : "") << plan.hops[i];
      std::cout << "], model calls " << plan.hops.size() << "\n";
      return 0;
    }
    if (fc_data.empty()) throw scent::ConfigError("forecast: --data is required");
    scent::cli::ForecastOptions opt;
    opt.checkpoint_path = fc_checkpoint;
    opt.data_path = fc_data;
    opt.trajectory = fc_traj;
    opt.start = fc_start;
    opt.span = fc_span;
    opt.t_h = fc_th;
    opt.out_dir = fc_out;
    opt.render = fc_render;
    std::uint64_t seed = 0;
    if (!fc_seed_text.empty()) {
      seed = parse_seed(fc_seed_text, "--seed");
      opt.seed_override = &seed;
    } else if (const char* env = std::getenv("SCENT_SEED")) {
      seed = parse_seed(env, "SCENT_SEED");
      opt.seed_override = &seed;
    }
    scent::cli::run_forecast(opt, std::cout);
    return 0;
  }

  if (*gc) {
    scent::ModelConfig mc;
    if (!gc_c.preset.empty() || !gc_c.config_path.empty()) {
      mc = resolve(gc_c).model;
    } else {
      // Tiny full-model configuration: every feature on, binary64 fast path.
      mc.embed_dim = 8;
      mc.latent_dim = 8;
      mc.linear_projection_dim = 4;
      mc.num_queries = 4;
      mc.n_enc = mc.n_proc = mc.n_dec = 1;
      mc.enc_heads = mc.proc_heads = mc.dec_heads = 2;
      mc.sparse_groups = 2;
      mc.ff_multiplier = 2;
      mc.fourier.bands = 3;
      mc.fourier.max_resolution = 8.0;
    }
    std::uint64_t seed = 17;
    if (!gc_c.seed_text.empty()) seed = parse_seed(gc_c.seed_text, "--seed");
    else if (const char* env = std::getenv("SCENT_SEED")) seed = parse_seed(env, "SCENT_SEED");
    if (gc_c.dump) {
      scent::RunConfig cfg;
      cfg.seed = seed;
      cfg.model = mc;
      std::cout << scent::dump_run_config(cfg);
      return 0;
    }
    const double err = scent::cli::run_gradcheck(mc, seed, gc_samples, std::cout);
    return err <= gc_threshold ? 0 : 5;
  }

  if (*cost) {
    if (!co_preset.empty() && co_preset != "paper")
      throw scent::ConfigError("cost: unknown preset '" + co_preset + "'");
    if (co_family.empty()) {
      scent::cli::run_cost(nullptr, std::cout);
      return 0;
    }
    const auto family = scent::cost_family_from_string(co_family);
    scent::CostModelParams p;
    if (co_preset == "paper") {
      p = scent::paper_cost_params(family, co_unroll > 0 ? co_unroll : 1);
    } else {
      p = co_params;
      p.family = family;
      if (co_unroll > 0) {
        p.T = co_unroll;
        p.W = co_unroll;
      }
    }
    scent::cli::run_cost(&p, std::cout);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const scent::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const scent::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const scent::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const scent::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
