// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "glow/geometry/metrics.hpp"
#include "glow/io/binary.hpp"
#include "glow/model/adaptive.hpp"
#include "glow/model/head.hpp"
#include "glow/num/flops.hpp"
#include "glow/num/parallel.hpp"
#include "glow/synth/synthgen.hpp"
#include "glow/train/labels.hpp"
#include "glow/train/trainer.hpp"

namespace glow::cli {
namespace fs = std::filesystem;
namespace {

// Runs `fn` with a float or double tag according to the "precision" key.
template <typename F>
void with_precision(const RunConfig& config, F&& fn) {
  const std::string& p = config.str("precision");
  if (p == "f32")
    fn(float{});
  else if (p == "f64")
    fn(double{});
  else
    throw InvalidInput("config: precision must be f32 or f64, got '" + p + "'");
}

std::uint32_t u32_key(const RunConfig& config, const std::string& key) {
  const std::uint64_t v = config.u64(key);
  if (v > 0xffffffffu) throw InvalidInput("config: '" + key + "' is too large");
  return std::uint32_t(v);
}

Difficulty difficulty_from(const RunConfig& config) {
  Difficulty d;
  d.perspective = config.real("perspective");
  d.rotation_deg = config.real("rotation");
  d.translation = config.real("translation");
  return d;
}

const std::vector<KeySpec> kDifficultyKeys = {
    {"perspective", "0.4", "corner displacement as a fraction of the half frame, in [0, 1]"},
    {"rotation", "20", "maximum in-plane rotation in degrees, in [0, 45]"},
    {"translation", "1", "fraction of the feasible shift range, in [0, 1]"},
};

const std::vector<KeySpec> kHyperKeys = {
    {"layers", "5", "number of layers"},
    {"dim", "64", "state width"},
    {"heads", "4", "attention heads"},
    {"input_dim", "10", "descriptor width"},
};

std::vector<KeySpec> concat(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string pair_name(std::size_t k) { return fmt::format("pair_{:05d}", k); }

// ---------------------------------------------------------------- gen

void run_gen(const RunConfig& config) {
  const fs::path out = config.str("out");
  const std::size_t n = config.u64("n");
  const std::uint64_t seed = config.u64("seed");
  const Preset preset = parse_preset(config.str("preset"));
  PairSpec spec = preset_spec(preset, config.u64("points"), config.u64("descriptor_dim"));
  spec.difficulty = difficulty_from(config);
  if (config.has("inlier_ratio")) spec.inlier_ratio = config.real("inlier_ratio");
  if (config.has("noise")) spec.noise = config.real("noise");
  spec.validate();

  fs::create_directories(out);
  parallel_for(n, config.u64("jobs"), [&](std::size_t k) {
    auto rng = pair_rng(seed, k);
    const SynthPair pair = generate_pair(rng, spec);
    write_features(pair.a, out / (pair_name(k) + "_a.glfm"));
    write_features(pair.b, out / (pair_name(k) + "_b.glfm"));
    write_ground_truth(pair.gt, out / (pair_name(k) + "_gt.txt"));
  });
  std::string manifest = "# glow manifest v1\n";
  manifest += fmt::format("# seed {} preset {} points {} descriptor_dim {} inlier_ratio {} noise {}\n", seed,
                          preset_name(preset), spec.points, spec.descriptor_dim, spec.inlier_ratio, spec.noise);
  manifest += "# pair k is generated from stream (seed, k)\n";
  for (std::size_t k = 0; k < n; ++k) {
    const std::string name = pair_name(k);
    manifest += fmt::format("{} {}_a.glfm {}_b.glfm {}_gt.txt\n", name, name, name, name);
  }
  write_text_atomic(out / "manifest.txt", manifest);
  spdlog::info("wrote {} pairs to {}", n, out.string());
}

// ---------------------------------------------------------------- train

TrainStages parse_stages(const std::string& s) {
  if (s == "both") return TrainStages::kBoth;
  if (s == "correspondence") return TrainStages::kCorrespondence;
  if (s == "classifier") return TrainStages::kClassifier;
  throw InvalidInput("config: stages must be both, correspondence or classifier, got '" + s + "'");
}

Hyper hyper_from(const RunConfig& config) {
  return Hyper{u32_key(config, "layers"), u32_key(config, "dim"), u32_key(config, "heads"), u32_key(config, "input_dim")};
}

void require_hyper(const Hyper& expected, const Hyper& actual, const std::string& what) {
  if (expected.layers != actual.layers || expected.dim != actual.dim || expected.heads != actual.heads ||
      expected.input_dim != actual.input_dim)
    throw InvalidInput(fmt::format("{} has layers={} dim={} heads={} input_dim={} but the config asks for layers={} "
                                   "dim={} heads={} input_dim={}",
                                   what, actual.layers, actual.dim, actual.heads, actual.input_dim, expected.layers,
                                   expected.dim, expected.heads, expected.input_dim));
}

TrainConfig train_config_from(const RunConfig& config) {
  TrainConfig c;
  c.hyper = hyper_from(config);
  c.seed = config.u64("seed");
  c.points = config.u64("points");
  c.train_pairs = config.u64("train_pairs");
  c.inlier_ratio_min = config.real("inlier_ratio_min");
  c.inlier_ratio_max = config.real("inlier_ratio_max");
  c.noise_min = config.real("noise_min");
  c.noise_max = config.real("noise_max");
  c.difficulty = difficulty_from(config);
  c.held_out_pairs = config.u64("held_out_pairs");
  c.epochs = config.u64("epochs");
  c.batch = config.u64("batch");
  c.learning_rate = config.real("learning_rate");
  c.final_learning_rate = config.real("final_learning_rate");
  c.warmup_steps = config.u64("warmup_steps");
  c.classifier_epochs = config.u64("classifier_epochs");
  c.classifier_pairs = config.u64("classifier_pairs");
  c.classifier_learning_rate = config.real("classifier_learning_rate");
  c.stages = parse_stages(config.str("stages"));
  c.adam_beta1 = config.real("adam_beta1");
  c.adam_beta2 = config.real("adam_beta2");
  c.adam_epsilon = config.real("adam_epsilon");
  c.clip_norm = config.real("clip_norm");
  c.tau = config.real("tau");
  c.jobs = config.u64("jobs");
  c.checkpoint_every = config.u64("checkpoint_every");
  c.max_steps = config.u64("max_steps");
  c.validate();
  return c;
}

template <typename T>
void train_as(const RunConfig& config) {
  const TrainConfig c = train_config_from(config);
  const fs::path out = config.str("out");
  TrainOutputs outputs;
  outputs.checkpoint = config.has("checkpoint") ? fs::path(config.str("checkpoint")) : fs::path(out.string() + ".ckpt");
  if (config.has("metrics")) outputs.metrics = fs::path(config.str("metrics"));

  ModelParams<T> params;
  std::optional<TrainState> resume;
  if (config.boolean("resume") && fs::exists(*outputs.checkpoint)) {
    WeightsFile meta;
    params = load_weights<T>(*outputs.checkpoint, &meta);
    require_hyper(c.hyper, params.hyper, "checkpoint " + outputs.checkpoint->string());
    if (meta.training_state.empty())
      throw InvalidInput("checkpoint " + outputs.checkpoint->string() + " has no training state");
    resume = TrainState::decode(meta.training_state);
    spdlog::info("resuming from {} (stage {} epoch {} step {})", outputs.checkpoint->string(), resume->stage,
                 resume->epoch + 1, resume->step_in_epoch);
  } else if (config.has("init")) {
    params = load_weights<T>(config.str("init"));
    require_hyper(c.hyper, params.hyper, "initial weights " + config.str("init"));
  } else {
    params = init_model<T>(c.hyper, c.seed);
  }
  const TrainResult<T> result = train(c, std::move(params), resume, outputs);
  if (!result.finished) {
    spdlog::info("stopped after max_steps; continue with resume = true from {}", outputs.checkpoint->string());
    return;
  }
  save_weights(result.params, out, std::uint32_t(sizeof(T)));
  spdlog::info("wrote {}", out.string());
}

void run_train(const RunConfig& config) {
  with_precision(config, [&](auto tag) { train_as<decltype(tag)>(config); });
}

// ---------------------------------------------------------------- match

AdaptiveConfig adaptive_from(const RunConfig& config) {
  AdaptiveConfig a;
  a.depth_enabled = !config.boolean("no_early_exit");
  a.width_enabled = !config.boolean("no_pruning");
  a.alpha = config.real("alpha");
  a.beta = config.real("beta");
  a.tau = config.real("tau");
  a.retain_trace = config.boolean("trace");
  a.validate();
  return a;
}

template <typename T>
std::string trace_json(const LayerTrace<T>& trace) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < trace.layers.size(); ++l) {
    const LayerRecord<T>& r = trace.layers[l];
    nlohmann::json j;
    j["layer"] = l + 1;
    j["index_a"] = r.index_a;
    j["index_b"] = r.index_b;
    j["matchability_a"] = std::vector<double>(r.sigma_a.begin(), r.sigma_a.end());
    j["matchability_b"] = std::vector<double>(r.sigma_b.begin(), r.sigma_b.end());
    j["confidence_a"] = std::vector<double>(r.confidence_a.begin(), r.confidence_a.end());
    j["confidence_b"] = std::vector<double>(r.confidence_b.begin(), r.confidence_b.end());
    j["pruned_a"] = r.pruned_a;
    j["pruned_b"] = r.pruned_b;
    layers.push_back(std::move(j));
  }
  return nlohmann::json{{"layers", std::move(layers)}}.dump(1) + "\n";
}

template <typename T>
void match_one(const BoundModel<T>& model, const AdaptiveConfig& adaptive, const fs::path& a_path,
               const fs::path& b_path, const fs::path& text_out, const std::optional<fs::path>& json_out) {
  const FeatureSet a = read_features(a_path), b = read_features(b_path);
  for (const FeatureSet* f : {&a, &b})
    if (f->size() > 0 && f->descriptor_dim() != model.hyper.input_dim)
      throw InvalidInput(fmt::format("{}: descriptors have width {} but the model expects {}",
                                     (f == &a ? a_path : b_path).string(), f->descriptor_dim(),
                                     model.hyper.input_dim));
  LayerTrace<T> trace;
  const MatchResult r = adaptive_forward(a, b, model, adaptive, adaptive.retain_trace ? &trace : nullptr);
  write_matches(r, text_out, json_out);
  if (adaptive.retain_trace) write_text_atomic(fs::path(text_out.string() + ".trace.json"), trace_json(trace));
}

template <typename T>
void match_as(const RunConfig& config) {
  const fs::path weights = config.str("weights");
  const Hyper on_disk = peek_hyper(weights);
  Hyper expected = on_disk;
  if (config.has("layers")) expected.layers = u32_key(config, "layers");
  if (config.has("dim")) expected.dim = u32_key(config, "dim");
  if (config.has("heads")) expected.heads = u32_key(config, "heads");
  if (config.has("input_dim")) expected.input_dim = u32_key(config, "input_dim");
  require_hyper(expected, on_disk, "weights " + weights.string());
  const ModelParams<T> params = load_weights<T>(weights);
  const BoundModel<T> model = bind(params, static_cast<Tape<T>*>(nullptr));
  const AdaptiveConfig adaptive = adaptive_from(config);

  if (config.has("manifest")) {
    const auto entries = read_manifest(config.str("manifest"));
    const fs::path out_dir = config.str("out_dir");
    fs::create_directories(out_dir);
    parallel_for(entries.size(), config.u64("jobs"), [&](std::size_t k) {
      const ManifestEntry& e = entries[k];
      match_one(model, adaptive, e.a, e.b, out_dir / (e.name + ".txt"), out_dir / (e.name + ".json"));
    });
    spdlog::info("matched {} pairs into {}", entries.size(), out_dir.string());
    return;
  }
  const std::optional<fs::path> json = config.has("json") ? std::optional<fs::path>(config.str("json")) : std::nullopt;
  match_one(model, adaptive, config.str("a"), config.str("b"), config.str("out"), json);
}

void run_match(const RunConfig& config) {
  with_precision(config, [&](auto tag) { match_as<decltype(tag)>(config); });
}

// ---------------------------------------------------------------- eval

void run_eval(const RunConfig& config) {
  const auto entries = read_manifest(config.str("manifest"));
  const fs::path matches = config.str("matches");
  EvalOptions options;
  options.ransac_threshold = config.real("ransac_threshold");
  options.ransac_iterations = config.u64("ransac_iterations");
  options.seed = config.u64("seed");
  for (const ManifestEntry& e : entries)
    if (e.gt.empty() || !fs::exists(e.gt)) throw InvalidInput("eval: ground truth missing for " + e.name);

  std::vector<PairEval> pairs(entries.size());
  parallel_for(entries.size(), config.u64("jobs"), [&](std::size_t k) {
    const ManifestEntry& e = entries[k];
    const FeatureSet a = read_features(e.a), b = read_features(e.b);
    const GroundTruth gt = read_ground_truth(e.gt);
    const MatchResult r = read_matches_json(matches / (e.name + ".json"));
    pairs[k] = evaluate_pair(r, a, b, gt, options, k);
  });
  const EvalReport report = EvalReport::summarize(std::move(pairs));
  const std::string out = config.str("out");
  write_text_atomic(out + ".json", report.to_json());
  write_text_atomic(out + ".csv", report.to_csv());
  spdlog::info("precision {:.4f} recall {:.4f} AUC@1/5 RANSAC {:.4f}/{:.4f} DLT {:.4f}/{:.4f}", report.pr.precision,
               report.pr.recall, report.auc_ransac_1, report.auc_ransac_5, report.auc_dlt_1, report.auc_dlt_5);
}

// ---------------------------------------------------------------- bench

struct BenchRow {
  std::size_t points = 0;
  std::uint64_t attention = 0, total = 0;                  // non-adaptive
  std::uint64_t adaptive_attention = 0, adaptive_total = 0;
  std::uint64_t adaptive_overhead = 0;                     // confidence classifiers, inside adaptive_total
  std::uint64_t cross_similarity = 0, cross_similarity_two_matrix = 0;
  double seconds = 0, adaptive_seconds = 0;
  double exit_layer = 0, pruned_fraction = 0;
};

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= double(x.size());
  my /= double(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

template <typename T>
void bench_as(const RunConfig& config) {
  const std::uint64_t seed = config.u64("seed");
  ModelParams<T> params;
  if (config.has("weights"))
    params = load_weights<T>(config.str("weights"));
  else
    params = init_model<T>(hyper_from(config), seed);
  const BoundModel<T> model = bind(params, static_cast<Tape<T>*>(nullptr));
  AdaptiveConfig adaptive;
  adaptive.alpha = config.real("alpha");
  adaptive.beta = config.real("beta");
  adaptive.tau = config.real("tau");
  adaptive.validate();
  AdaptiveConfig fixed = adaptive;
  fixed.depth_enabled = fixed.width_enabled = false;
  const Preset preset = parse_preset(config.str("preset"));
  const std::size_t per_size = config.u64("pairs");
  if (per_size == 0) throw InvalidInput("config: pairs must be positive");

  using Clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  std::vector<std::string> violations;
  std::uint64_t stream = 0;
  for (const std::uint64_t points : config.u64_list("sizes")) {
    BenchRow row;
    row.points = points;
    for (std::size_t k = 0; k < per_size; ++k) {
      auto rng = pair_rng(seed, stream++);
      const SynthPair pair = generate_pair(rng, preset_spec(preset, points, params.hyper.input_dim));
      FlopCounter plain, adapt, shared, unshared;
      auto t0 = Clock::now();
      {
        FlopScope scope(&plain);
        adaptive_forward(pair.a, pair.b, model, fixed);
      }
      auto t1 = Clock::now();
      MatchResult r;
      {
        FlopScope scope(&adapt);
        r = adaptive_forward(pair.a, pair.b, model, adaptive);
      }
      auto t2 = Clock::now();
      {
        FlopScope scope(&shared);
        plain_forward(pair.a, pair.b, model, adaptive.tau, false);
      }
      {
        FlopScope scope(&unshared);
        plain_forward(pair.a, pair.b, model, adaptive.tau, true);
      }
      // Early exit and pruning only remove network work; the classifiers that
      // decide them are reported separately as overhead.
      const std::uint64_t overhead = adapt.of(Phase::kClassifier);
      if (adapt.total() - overhead > plain.total())
        violations.push_back(fmt::format("adaptive network FLOPs exceed non-adaptive at {} points (pair {})", points, k));
      if (unshared.of(Phase::kCrossSimilarity) != 2 * shared.of(Phase::kCrossSimilarity))
        violations.push_back(fmt::format("two-matrix cross similarity is not twice the shared one at {} points", points));
      row.attention += plain.attention();
      row.total += plain.total();
      row.adaptive_attention += adapt.attention();
      row.adaptive_total += adapt.total();
      row.adaptive_overhead += overhead;
      row.cross_similarity += shared.of(Phase::kCrossSimilarity);
      row.cross_similarity_two_matrix += unshared.of(Phase::kCrossSimilarity);
      row.seconds += std::chrono::duration<double>(t1 - t0).count();
      row.adaptive_seconds += std::chrono::duration<double>(t2 - t1).count();
      row.exit_layer += double(r.exit_layer);
      row.pruned_fraction += r.pruned_fraction();
    }
    row.seconds /= double(per_size);
    row.adaptive_seconds /= double(per_size);
    row.exit_layer /= double(per_size);
    row.pruned_fraction /= double(per_size);
    rows.push_back(row);
  }

  std::string csv =
      "points,attention_macs,total_macs,adaptive_attention_macs,adaptive_total_macs,adaptive_overhead_macs,"
      "cross_similarity_macs,"
      "cross_similarity_two_matrix_macs,seconds,adaptive_seconds,mean_exit_layer,mean_pruned_fraction\n";
  for (const BenchRow& r : rows)
    csv += fmt::format("{},{},{},{},{},{},{},{},{:.6f},{:.6f},{:.3f},{:.4f}\n", r.points, r.attention, r.total,
                       r.adaptive_attention, r.adaptive_total, r.adaptive_overhead, r.cross_similarity, r.cross_similarity_two_matrix,
                       r.seconds, r.adaptive_seconds, r.exit_layer, r.pruned_fraction);
  fmt::print("{}", csv);
  if (config.has("out")) write_text_atomic(config.str("out"), csv);

  if (rows.size() >= 2) {
    std::vector<double> x, y;
    for (const BenchRow& r : rows) x.push_back(double(r.points)), y.push_back(double(r.attention));
    const double exponent = log_log_slope(x, y);
    fmt::print("attention FLOP scaling exponent {:.4f}\n", exponent);
    if (exponent < 1.9 || exponent > 2.1)
      violations.push_back(fmt::format("attention scaling exponent {:.4f} outside [1.9, 2.1]", exponent));
  }
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i + 1].points == 2 * rows[i].points) {
      const double ratio = double(rows[i + 1].attention) / double(rows[i].attention);
      if (ratio < 3.6 || ratio > 4.4)
        violations.push_back(fmt::format("attention FLOPs ratio {:.3f} between {} and {} points outside [3.6, 4.4]",
                                         ratio, rows[i + 1].points, rows[i].points));
    }
  if (!violations.empty()) {
    for (const std::string& v : violations) spdlog::error("{}", v);
    throw CheckFailed("bench: " + std::to_string(violations.size()) + " check(s) failed");
  }
}

void run_bench(const RunConfig& config) {
  with_precision(config, [&](auto tag) { bench_as<decltype(tag)>(config); });
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  const auto bytes = read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  const fs::path dir = path.parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string name, a, b, gt, extra;
    if (!(fields >> name >> a >> b >> gt) || (fields >> extra))
      throw InvalidInput(fmt::format("{}:{}: expected 'name a b gt'", path.string(), number));
    out.push_back({name, dir / a, dir / b, gt == "-" ? fs::path() : dir / gt});
  }
  return out;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> all = {
      {"gen", "generate synthetic pairs with ground truth and a manifest",
       concat(
           {
               {"out", "", "output directory"},
               {"n", "10", "number of pairs"},
               {"seed", "1", "random seed; pair k uses stream (seed, k)"},
               {"preset", "medium", "easy, medium or hard"},
               {"points", "512", "points per image"},
               {"descriptor_dim", "10", "descriptor width"},
               {"inlier_ratio", "", "overrides the preset inlier ratio"},
               {"noise", "", "overrides the preset descriptor noise"},
               {"jobs", "1", "worker threads"},
           },
           kDifficultyKeys),
       run_gen},
      {"train", "train a model with the two-stage recipe",
       concat(concat(
                  {
                      {"out", "", "final weights file"},
                      {"checkpoint", "", "checkpoint file (default: <out>.ckpt)"},
                      {"metrics", "", "metrics CSV, appended once per epoch"},
                      {"resume", "", "continue from the checkpoint when it exists", true},
                      {"init", "", "initial weights instead of a fresh initialization"},
                      {"precision", "f32", "f32 or f64"},
                      {"seed", "1", "seed for initialization, data and shuffling"},
                      {"points", "512", "points per image"},
                      {"train_pairs", "20000", "training pairs"},
                      {"inlier_ratio_min", "0.2", "lower bound of the sampled inlier ratio"},
                      {"inlier_ratio_max", "1", "upper bound of the sampled inlier ratio"},
                      {"noise_min", "0.05", "lower bound of the sampled descriptor noise"},
                      {"noise_max", "0.6", "upper bound of the sampled descriptor noise"},
                      {"held_out_pairs", "100", "medium pairs evaluated after each epoch"},
                      {"epochs", "1", "correspondence epochs"},
                      {"batch", "8", "pairs per step"},
                      {"learning_rate", "0.001", "peak correspondence learning rate"},
                      {"final_learning_rate", "0.00001", "learning rate at the end of the cosine decay"},
                      {"warmup_steps", "100", "linear warmup steps"},
                      {"classifier_epochs", "1", "classifier epochs"},
                      {"classifier_pairs", "2000", "pairs used to train the classifiers"},
                      {"classifier_learning_rate", "0.001", "classifier learning rate"},
                      {"stages", "both", "both, correspondence or classifier"},
                      {"adam_beta1", "0.9", "Adam first-moment decay"},
                      {"adam_beta2", "0.999", "Adam second-moment decay"},
                      {"adam_epsilon", "1e-8", "Adam epsilon"},
                      {"clip_norm", "10", "global gradient-norm clip"},
                      {"tau", "0.1", "match threshold used for classifier labels"},
                      {"jobs", "1", "worker threads (results do not depend on it)"},
                      {"checkpoint_every", "0", "steps between checkpoints; 0 = epoch ends only"},
                      {"max_steps", "0", "stop after this many steps in this run; 0 = no limit"},
                  },
                  kHyperKeys),
              kDifficultyKeys),
       run_train},
      {"match", "match two feature files, or every pair of a manifest",
       {
           {"weights", "", "weights file"},
           {"a", "", "features of image A"},
           {"b", "", "features of image B"},
           {"out", "", "match text file"},
           {"json", "", "optional structured match file"},
           {"manifest", "", "match every pair of this manifest instead of a and b"},
           {"out_dir", "", "output directory in manifest mode"},
           {"no_early_exit", "", "run every layer", true},
           {"no_pruning", "", "keep every point", true},
           {"alpha", "0.95", "fraction of confident points needed to stop"},
           {"beta", "0.01", "matchability below which confident points are pruned"},
           {"tau", "0.1", "match threshold"},
           {"trace", "", "also write <out>.trace.json with per-layer details", true},
           {"jobs", "1", "worker threads in manifest mode"},
           {"precision", "f32", "f32 or f64"},
           {"layers", "", "refuse weights with a different layer count"},
           {"dim", "", "refuse weights with a different state width"},
           {"heads", "", "refuse weights with a different head count"},
           {"input_dim", "", "refuse weights with a different descriptor width"},
       },
       run_match},
      {"eval", "score matches against ground truth",
       {
           {"manifest", "", "dataset manifest with ground truth"},
           {"matches", "", "directory with <name>.json match files"},
           {"out", "", "report prefix; writes <out>.json and <out>.csv"},
           {"ransac_threshold", "3", "RANSAC inlier threshold in pixels"},
           {"ransac_iterations", "2000", "RANSAC hypotheses per pair"},
           {"seed", "0", "RANSAC seed"},
           {"jobs", "1", "worker threads"},
       },
       run_eval},
      {"bench", "count FLOPs and time inference against point count",
       concat(
           {
               {"weights", "", "weights file (default: fresh initialization)"},
               {"sizes", "256,512,1024,2048,4096", "points per image to sweep"},
               {"pairs", "1", "pairs per size"},
               {"preset", "medium", "easy, medium or hard"},
               {"seed", "1", "seed for pairs and initialization"},
               {"alpha", "0.95", "exit fraction"},
               {"beta", "0.01", "pruning matchability bound"},
               {"tau", "0.1", "match threshold"},
               {"precision", "f32", "f32 or f64"},
               {"out", "", "optional CSV output"},
           },
           kHyperKeys),
       run_bench},
  };
  return all;
}

}  // namespace glow::cli
