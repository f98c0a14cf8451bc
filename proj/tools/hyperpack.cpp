// Command-line front end: packs reference embeddings on the unit sphere,
// derives noisy per-identity samples, and inspects the resulting artifacts.
// Exit codes: 0 success, 1 validation failure, 2 I/O failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperpack/io.hpp"
#include "hyperpack/metrics.hpp"
#include "hyperpack/packing.hpp"
#include "hyperpack/sampling.hpp"

using namespace hyperpack;

namespace {

// Gallery resolution: an explicit file wins over synthesis; no source means
// no gallery, which is fine as long as alpha == 0.
std::optional<Gallery> resolve_gallery(const RunConfig& cfg) {
  if (!cfg.gallery_file.empty()) {
    LoadResult loaded = load_embeddings(cfg.gallery_file);
    if (loaded.max_norm_deviation > 1e-5) {
      std::cerr << "warning: gallery norms deviate up to "
                << loaded.max_norm_deviation << "; renormalized\n";
    }
    return Gallery(std::move(loaded.embeddings), cfg.gallery_file);
  }
  if (cfg.gallery_synth_points > 0) {
    ManifoldSpec spec;
    spec.dim = cfg.dim;
    spec.n_points = cfg.gallery_synth_points;
    spec.n_clusters = cfg.gallery_synth_clusters;
    spec.concentration = cfg.gallery_synth_concentration;
    spec.seed = cfg.gallery_synth_seed;
    return synthesize_gallery(spec);
  }
  return std::nullopt;
}

EmbeddingSet resolve_init(const RunConfig& cfg, const Gallery* gallery) {
  if (cfg.init == "file" || !cfg.refs_in.empty()) {
    if (cfg.refs_in.empty())
      throw InvalidArgument("init = file requires --in");
    LoadResult loaded = load_embeddings(cfg.refs_in);
    if (loaded.max_norm_deviation > 1e-5) {
      std::cerr << "warning: reference norms deviate up to "
                << loaded.max_norm_deviation << "; renormalized\n";
    }
    return std::move(loaded.embeddings);
  }
  const PackingConfig packing = to_packing_config(cfg);
  if (cfg.init == "gallery")
    return init_references(packing, InitMode::kGallerySubset, gallery);
  if (cfg.init == "uniform")
    return init_references(packing, InitMode::kUniformRandom);
  throw InvalidArgument("unknown init mode '" + cfg.init + "'");
}

// The effective-config echo: every resolved value, written next to the main
// artifact so the run can be replayed from the echo alone.
void echo_config(const RunConfig& cfg) {
  if (cfg.out.empty()) return;
  atomic_write(cfg.out + ".config", serialize_run_config(cfg));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

// Flags that were actually passed override whatever the config file said.
// Each subcommand registers its flags through this so the precedence rule
// stays in one place.
class FlagBinder {
 public:
  explicit FlagBinder(CLI::App* cmd) : cmd_(cmd) {}

  template <typename T>
  void bind(const std::string& name, T* slot, const std::string& help) {
    CLI::Option* opt = cmd_->add_option(name, *slot, help);
    apply_.push_back([opt, slot]() {
      if (opt->count() > 0) *slot = opt->as<T>();
    });
  }

  void bind_flag(const std::string& name, bool* slot,
                 const std::string& help) {
    CLI::Option* opt = cmd_->add_option(name, *slot, help);
    apply_.push_back([opt, slot]() {
      if (opt->count() > 0) *slot = opt->as<bool>();
    });
  }

  // Re-applies parsed flag values on top of a config that may have just been
  // replaced by --config file contents.
  void overlay() const {
    for (const auto& fn : apply_) fn();
  }

 private:
  CLI::App* cmd_;
  std::vector<std::function<void()>> apply_;
};

struct CommonState {
  RunConfig cfg;
  std::string config_path;
};

// Registers the packing/gallery/io flags shared by init and optimize.
FlagBinder bind_run_flags(CLI::App* cmd, CommonState* state, bool with_opt) {
  FlagBinder binder(cmd);
  cmd->add_option("--config", state->config_path,
                  "run configuration file; flags override its keys");
  binder.bind("--n-id", &state->cfg.n_id, "number of reference points");
  binder.bind("--dim", &state->cfg.dim, "embedding dimension");
  binder.bind("--seed", &state->cfg.seed, "rng seed for init and batches");
  binder.bind("--init", &state->cfg.init,
              "starting references: uniform | gallery | file");
  binder.bind("--in", &state->cfg.refs_in, "reference embeddings to load");
  binder.bind("--out", &state->cfg.out, "output embedding file");
  binder.bind("--gallery", &state->cfg.gallery_file,
              "gallery embedding file");
  binder.bind("--synth-gallery-points", &state->cfg.gallery_synth_points,
              "synthesize a gallery with this many points");
  binder.bind("--synth-gallery-clusters", &state->cfg.gallery_synth_clusters,
              "cluster count for the synthetic gallery");
  binder.bind("--synth-gallery-concentration",
              &state->cfg.gallery_synth_concentration,
              "spread of synthetic gallery points around their centers");
  binder.bind("--synth-gallery-seed", &state->cfg.gallery_synth_seed,
              "seed for the synthetic gallery");
  if (with_opt) {
    binder.bind("--alpha", &state->cfg.alpha,
                "weight of the gallery-adherence term");
    binder.bind("--lr", &state->cfg.lr, "initial learning rate");
    binder.bind("--lr-decay-factor", &state->cfg.lr_decay_factor,
                "multiplicative decay applied to the learning rate");
    binder.bind("--lr-decay-interval", &state->cfg.lr_decay_interval,
                "iterations between learning-rate decays");
    binder.bind("--iters", &state->cfg.n_itr, "optimization iterations");
    binder.bind("--batch-size", &state->cfg.batch_size,
                "stochastic batch size; 0 runs full batch");
    binder.bind("--reg-refresh-interval", &state->cfg.reg_refresh_interval,
                "iterations between nearest-gallery reassignments");
    binder.bind_flag("--reg-in-cost", &state->cfg.reg_in_cost,
                     "apply the adherence gradient (false only reports it)");
    binder.bind("--trace", &state->cfg.trace, "JSONL trace output");
  }
  return binder;
}

// --config is loaded after parsing, then flag values win over file keys.
void finalize_config(CommonState* state, const FlagBinder& binder,
                     const std::string& command) {
  if (!state->config_path.empty()) {
    const std::string saved_command = state->cfg.command;
    state->cfg = load_run_config(state->config_path);
    state->cfg.command = saved_command;
    binder.overlay();
  }
  state->cfg.command = command;
}

int cmd_init(CommonState* state) {
  RunConfig& cfg = state->cfg;
  require(cfg.n_id >= 1, "init needs --n-id >= 1");
  require(!cfg.out.empty(), "init needs --out");
  const std::optional<Gallery> gallery = resolve_gallery(cfg);
  const EmbeddingSet refs =
      resolve_init(cfg, gallery ? &*gallery : nullptr);
  save_embeddings(cfg.out, refs);
  echo_config(cfg);
  std::cout << "wrote " << cfg.out << " (n=" << refs.count()
            << ", dim=" << refs.dim() << ")\n";
  return 0;
}

int cmd_optimize(CommonState* state) {
  RunConfig& cfg = state->cfg;
  require(!cfg.out.empty(), "optimize needs --out");
  const std::optional<Gallery> gallery = resolve_gallery(cfg);
  const Gallery* gal = gallery ? &*gallery : nullptr;

  EmbeddingSet init = resolve_init(cfg, gal);
  cfg.n_id = init.count();
  cfg.dim = init.dim();

  const OptimizeResult result =
      optimize(to_packing_config(cfg), gal, init);
  save_embeddings(cfg.out, result.references);
  if (!cfg.trace.empty()) write_trace(cfg.trace, result.trace);
  echo_config(cfg);

  const double final_min =
      result.references.count() > 1
          ? pairwise_min(result.references.points()).distance
          : 0.0;
  std::cout << "wrote " << cfg.out << " (n=" << result.references.count()
            << ", dim=" << result.references.dim()
            << ", iters=" << result.trace.size()
            << ", min_dist=" << final_min << ")\n";
  return 0;
}

int cmd_sample(CommonState* state) {
  RunConfig& cfg = state->cfg;
  require(!cfg.refs_in.empty(), "sample needs --in");
  require(!cfg.out.empty(), "sample needs --out");
  LoadResult loaded = load_embeddings(cfg.refs_in);
  cfg.n_id = loaded.embeddings.count();
  cfg.dim = loaded.embeddings.dim();

  SampleSpec spec;
  spec.beta = cfg.beta;
  spec.per_id = cfg.per_id;
  spec.master_seed = cfg.sample_seed;
  const SampleManifest manifest = generate_manifest(loaded.embeddings, spec);
  write_manifest(cfg.out, manifest);

  if (!cfg.emb_out.empty()) {
    Mat flat(manifest.entries.size(), cfg.dim);
    for (std::size_t k = 0; k < manifest.entries.size(); ++k)
      flat.row(static_cast<Index>(k)) = manifest.entries[k].embedding;
    save_embeddings(cfg.emb_out, EmbeddingSet(std::move(flat)));
  }
  echo_config(cfg);
  std::cout << "wrote " << cfg.out << " (" << manifest.entries.size()
            << " samples, " << manifest.n_id << " identities x "
            << manifest.per_id << ")\n";
  return 0;
}

struct EvalArgs {
  std::string refs_in;
  std::string gallery_file;
  Index synth_points = 0;
  Index synth_clusters = 1;
  double synth_concentration = 0.05;
  std::uint64_t synth_seed = 0;
  std::vector<std::string> traces;
  bool json = false;
};

int cmd_eval(const EvalArgs& args) {
  require(!args.refs_in.empty() || !args.traces.empty(),
          "eval needs --in or --traces");
  if (!args.refs_in.empty()) {
    const LoadResult loaded = load_embeddings(args.refs_in);
    RunConfig probe;
    probe.gallery_file = args.gallery_file;
    probe.dim = loaded.embeddings.dim();
    probe.gallery_synth_points = args.synth_points;
    probe.gallery_synth_clusters = args.synth_clusters;
    probe.gallery_synth_concentration = args.synth_concentration;
    probe.gallery_synth_seed = args.synth_seed;
    const std::optional<Gallery> gallery = resolve_gallery(probe);
    const PackingReport report =
        packing_report(loaded.embeddings, gallery ? &*gallery : nullptr);
    std::cout << report_to_json(report) << "\n";
  }
  if (!args.traces.empty()) {
    const std::vector<RunSummary> rows = compare_runs(args.traces);
    std::cout << (args.json ? comparison_to_json(rows)
                            : comparison_table(rows))
              << "\n";
  }
  return 0;
}

struct TheoremArgs {
  Index n = 6;
  Index b = 3;
  Index dim = 8;
  std::uint64_t seed = 1;
  double tol = 1e-12;
};

int cmd_verify_theorem(const TheoremArgs& args) {
  Rng rng = make_rng(mix_seed(args.seed, 0x7468656fULL));
  Mat refs(args.n, args.dim);
  for (Index i = 0; i < args.n; ++i) refs.row(i) = random_unit(args.dim, rng);
  const UnbiasednessResult result = verify_unbiasedness(refs, args.b);
  std::cout << "n=" << args.n << " b=" << args.b
            << " batches=" << result.batch_count
            << " max_abs_diff=" << result.max_abs_diff << "\n";
  if (result.max_abs_diff > args.tol) {
    std::cerr << "error: mean batch gradient deviates by "
              << result.max_abs_diff << " (tolerance " << args.tol << ")\n";
    return 1;
  }
  return 0;
}

struct GradArgs {
  Index n = 6;
  Index dim = 8;
  double alpha = 0.5;
  Index gallery_points = 16;
  Index gallery_clusters = 4;
  long configs = 50;
  std::uint64_t seed = 1;
  double tol = 1e-5;
};

int cmd_check_grad(const GradArgs& args) {
  require(args.configs >= 1, "check-grad needs --configs >= 1");
  std::optional<Gallery> gallery;
  if (args.alpha > 0.0) {
    ManifoldSpec spec;
    spec.dim = args.dim;
    spec.n_points = args.gallery_points;
    spec.n_clusters = args.gallery_clusters;
    spec.seed = mix_seed(args.seed, 0x67616cULL);
    gallery = synthesize_gallery(spec);
  }

  double worst = 0.0;
  long checked = 0;
  std::uint64_t draw = 0;
  const std::uint64_t draw_budget =
      static_cast<std::uint64_t>(args.configs) * 20;
  while (checked < args.configs) {
    if (draw >= draw_budget)
      throw UnstableSelection(
          "could not find enough selection-stable configurations");
    Rng rng = make_rng(mix_seed(args.seed, 0x6764ULL + draw));
    ++draw;
    Mat refs(args.n, args.dim);
    for (Index i = 0; i < args.n; ++i)
      refs.row(i) = random_unit(args.dim, rng);
    try {
      const GradientCheckResult result =
          check_gradient(refs, gallery ? &*gallery : nullptr, args.alpha);
      worst = std::max(worst, result.max_rel_error);
      ++checked;
    } catch (const UnstableSelection&) {
      // Selection boundary too close for finite differencing; redraw.
    }
  }
  std::cout << "configs=" << checked << " max_rel_error=" << worst << "\n";
  if (worst > args.tol) {
    std::cerr << "error: gradient mismatch " << worst << " exceeds "
              << args.tol << "\n";
    return 1;
  }
  return 0;
}

struct TammesArgs {
  Index max_dim = 9;
  long iters = 20000;
  long s2_iters = 50000;
  bool skip_s2 = false;
  std::uint64_t seed = 1;
  double ratio = 0.98;
  bool json = false;
};

int run_tammes_case(Index n, Index dim, long iters, double optimum,
                    std::uint64_t seed, double target_ratio, bool json,
                    bool* all_ok) {
  PackingConfig config;
  config.n_id = n;
  config.dim = dim;
  config.n_itr = iters;
  config.alpha = 0.0;
  config.seed = seed;
  const OptimizeResult result =
      optimize(config, nullptr, InitMode::kUniformRandom);
  const double achieved = pairwise_min(result.references.points()).distance;
  const double ratio = achieved / optimum;
  const bool ok = ratio >= target_ratio;
  *all_ok = *all_ok && ok;
  if (json) {
    std::cout << "{\"n\": " << n << ", \"dim\": " << dim
              << ", \"achieved\": " << achieved
              << ", \"optimum\": " << optimum << ", \"ratio\": " << ratio
              << ", \"pass\": " << (ok ? "true" : "false") << "}\n";
  } else {
    std::printf("n=%2lld dim=%lld  achieved=%.6f  optimum=%.6f  ratio=%.4f  %s\n",
                static_cast<long long>(n), static_cast<long long>(dim),
                achieved, optimum, ratio, ok ? "ok" : "MISS");
  }
  return ok ? 0 : 1;
}

int cmd_tammes(const TammesArgs& args) {
  require(args.max_dim >= 2, "tammes needs --max-dim >= 2");
  bool all_ok = true;
  for (Index dim = 2; dim <= args.max_dim; ++dim) {
    for (Index n = 2; n <= dim + 1; ++n) {
      const double optimum = simplex_optimum(n, dim).value();
      run_tammes_case(n, dim, args.iters, optimum, args.seed, args.ratio,
                      args.json, &all_ok);
    }
  }
  if (!args.skip_s2) {
    run_tammes_case(6, 3, args.s2_iters, known_optima_lookup(6, 3).value(),
                    args.seed, args.ratio, args.json, &all_ok);
    run_tammes_case(12, 3, args.s2_iters, known_optima_lookup(12, 3).value(),
                    args.seed, args.ratio, args.json, &all_ok);
  }
  if (!all_ok) {
    std::cerr << "error: at least one case fell short of ratio "
              << args.ratio << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unit-sphere reference packing and sample generation"};
  app.require_subcommand(1);

  CommonState init_state;
  init_state.cfg.n_itr = 0;
  CLI::App* init_cmd =
      app.add_subcommand("init", "draw and save starting references");
  FlagBinder init_binder = bind_run_flags(init_cmd, &init_state, false);

  CommonState opt_state;
  CLI::App* opt_cmd =
      app.add_subcommand("optimize", "pack references on the sphere");
  FlagBinder opt_binder = bind_run_flags(opt_cmd, &opt_state, true);

  CommonState sample_state;
  CLI::App* sample_cmd = app.add_subcommand(
      "sample", "derive per-identity noisy samples from references");
  FlagBinder sample_binder(sample_cmd);
  sample_cmd->add_option("--config", sample_state.config_path,
                         "run configuration file; flags override its keys");
  sample_binder.bind("--in", &sample_state.cfg.refs_in,
                     "reference embeddings to load");
  sample_binder.bind("--out", &sample_state.cfg.out,
                     "manifest output (JSONL)");
  sample_binder.bind("--emb-out", &sample_state.cfg.emb_out,
                     "also save sample embeddings as one flat file");
  sample_binder.bind("--beta", &sample_state.cfg.beta,
                     "noise magnitude around each reference");
  sample_binder.bind("--per-id", &sample_state.cfg.per_id,
                     "samples per identity");
  sample_binder.bind("--seed", &sample_state.cfg.sample_seed,
                     "master seed for per-entry noise");

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "report packing quality or compare traces");
  eval_cmd->add_option("--in", eval_args.refs_in, "embedding file to score");
  eval_cmd->add_option("--gallery", eval_args.gallery_file,
                       "gallery file for nearest-gallery statistics");
  eval_cmd->add_option("--synth-gallery-points", eval_args.synth_points,
                       "synthesize a gallery with this many points");
  eval_cmd->add_option("--synth-gallery-clusters", eval_args.synth_clusters,
                       "cluster count for the synthetic gallery");
  eval_cmd->add_option("--synth-gallery-concentration",
                       eval_args.synth_concentration,
                       "spread of synthetic gallery points");
  eval_cmd->add_option("--synth-gallery-seed", eval_args.synth_seed,
                       "seed for the synthetic gallery");
  eval_cmd->add_option("--traces", eval_args.traces,
                       "trace files to summarize side by side");
  eval_cmd->add_flag("--json", eval_args.json,
                     "emit the trace comparison as JSON");

  TheoremArgs theorem_args;
  CLI::App* theorem_cmd = app.add_subcommand(
      "verify-theorem",
      "check the batch gradient is unbiased by exhaustive enumeration");
  theorem_cmd->add_option("--n", theorem_args.n, "number of points");
  theorem_cmd->add_option("--b", theorem_args.b, "batch size");
  theorem_cmd->add_option("--dim", theorem_args.dim, "embedding dimension");
  theorem_cmd->add_option("--seed", theorem_args.seed, "rng seed");
  theorem_cmd->add_option("--tol", theorem_args.tol,
                          "max allowed component difference");

  GradArgs grad_args;
  CLI::App* grad_cmd = app.add_subcommand(
      "check-grad", "compare analytic gradients with finite differences");
  grad_cmd->add_option("--n", grad_args.n, "number of points");
  grad_cmd->add_option("--dim", grad_args.dim, "embedding dimension");
  grad_cmd->add_option("--alpha", grad_args.alpha,
                       "gallery-adherence weight");
  grad_cmd->add_option("--gallery-points", grad_args.gallery_points,
                       "synthetic gallery size used when alpha > 0");
  grad_cmd->add_option("--gallery-clusters", grad_args.gallery_clusters,
                       "synthetic gallery cluster count");
  grad_cmd->add_option("--configs", grad_args.configs,
                       "number of random configurations to check");
  grad_cmd->add_option("--seed", grad_args.seed, "rng seed");
  grad_cmd->add_option("--tol", grad_args.tol,
                       "max allowed relative error");

  TammesArgs tammes_args;
  CLI::App* tammes_cmd = app.add_subcommand(
      "tammes", "benchmark against known optimal packings");
  tammes_cmd->add_option("--max-dim", tammes_args.max_dim,
                         "largest dimension in the simplex sweep");
  tammes_cmd->add_option("--iters", tammes_args.iters,
                         "iterations per simplex case");
  tammes_cmd->add_option("--s2-iters", tammes_args.s2_iters,
                         "iterations for the 6- and 12-point dim-3 cases");
  tammes_cmd->add_flag("--skip-s2", tammes_args.skip_s2,
                       "run only the simplex sweep");
  tammes_cmd->add_option("--seed", tammes_args.seed, "rng seed");
  tammes_cmd->add_option("--ratio", tammes_args.ratio,
                         "required achieved/optimum ratio");
  tammes_cmd->add_flag("--json", tammes_args.json,
                       "emit one JSON object per case");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (init_cmd->parsed()) {
      finalize_config(&init_state, init_binder, "init");
      return cmd_init(&init_state);
    }
    if (opt_cmd->parsed()) {
      finalize_config(&opt_state, opt_binder, "optimize");
      return cmd_optimize(&opt_state);
    }
    if (sample_cmd->parsed()) {
      finalize_config(&sample_state, sample_binder, "sample");
      return cmd_sample(&sample_state);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (theorem_cmd->parsed()) return cmd_verify_theorem(theorem_args);
    if (grad_cmd->parsed()) return cmd_check_grad(grad_args);
    if (tammes_cmd->parsed()) return cmd_tammes(tammes_args);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
