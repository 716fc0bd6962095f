// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one PASS/FAIL line per criterion. Criteria 4, 5, 6 and
// the end-to-end part of 8 use the trained desk model in models/. When
// GLOW_CLI names the glow binary, criterion 9 also checks the commands.

#include <fmt/format.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "../support/checks.hpp"
#include "glow/features/feature_set.hpp"
#include "glow/geometry/metrics.hpp"
#include "glow/io/binary.hpp"
#include "glow/model/head.hpp"
#include "glow/num/flops.hpp"
#include "glow/num/parallel.hpp"
#include "glow/train/evaluate.hpp"

namespace glow {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kSource = GLOW_SOURCE_DIR;
const fs::path kModel = kSource / "models" / "desk.glwt";
const fs::path kModelRecord = kSource / "models" / "desk.json";
const std::uint64_t kDeskSeed = 1;  // seed of configs/desk.cfg; the held-out stream derives from it

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::optional<ModelParams<float>> desk_model() {
  if (!fs::exists(kModel)) return std::nullopt;
  return load_weights<float>(kModel);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

// ------------------------------------------------------------------ 1

Verdict gradient_correctness() {
  const auto start = Clock::now();
  const Hyper hyper{3, 8, 2, 4};
  double worst = 0;
  std::size_t entries = 0;
  std::vector<bool> touched;
  std::vector<std::string> names;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const SynthPair pair = checks::toy_pair(rng, 4 + seed % 5, 4 + (3 * seed) % 5, hyper.input_dim);
    const ModelParams<double> params = init_model<double>(hyper, 100 + seed);
    const checks::GradientCheck g = checks::check_loss_gradient(params, pair);
    worst = std::max(worst, g.max_relative_error);
    entries += g.entries;
    if (touched.empty()) touched.assign(g.touched.size(), false), names = params.names();
    for (std::size_t i = 0; i < touched.size(); ++i) touched[i] = touched[i] || g.touched[i];
  }
  std::size_t groups = 0, covered = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].rfind("classifier", 0) == 0) continue;
    ++groups;
    covered += touched[i];
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-4 && covered == groups && elapsed < 300,
          fmt::format("max relative error {:.3g} over {} entries of 20 toy pairs (limit 1e-4); parameter groups "
                      "with gradient {}/{}; {:.1f}s (limit 300s)",
                      worst, entries, covered, groups, elapsed)};
}

// ------------------------------------------------------------------ 2

Verdict architectural_invariants() {
  const auto start = Clock::now();
  const Hyper hyper{3, 32, 4, 8};
  double rotary = 0, translation = 0, bound = -1;
  bool symmetric = true, equivariant = true, residual = true;
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ModelParams<double> params = init_model<double>(hyper, 200 + seed);
    rotary = std::max(rotary, checks::rotary_orthogonality_error(rng, hyper.head_dim()));
    std::mt19937_64 toy_rng(seed);
    const SynthPair toy = checks::toy_pair(toy_rng, 60, 50, hyper.input_dim);
    translation = std::max(translation, checks::self_attention_translation_error(params, toy.a, toy.b, 17, -11));
    auto pair_rng_k = pair_rng(300, seed);
    const SynthPair p = generate_pair(pair_rng_k, preset_spec(Preset::kMedium, 64, hyper.input_dim));
    symmetric = symmetric && checks::cross_attention_symmetric(params, p.a, p.b);
    equivariant = equivariant && checks::permutation_equivariant(params, p.a, p.b, rng);
    residual = residual && checks::residual_identity(params, p.a, p.b);
    bound = std::max(bound, checks::assignment_bound_excess(params, p.a, p.b));
  }
  const double elapsed = seconds_since(start);
  const bool pass = rotary < 1e-10 && translation < 1e-9 && symmetric && equivariant && residual && bound < 1e-6 &&
                    elapsed < 60;
  return {pass, fmt::format("rotary orthogonality {:.2g} (<1e-10); translation {:.2g} (<1e-9); cross symmetry {}; "
                            "permutation equivariance {}; residual identity {}; max row/col excess over "
                            "matchability {:.2g} (<1e-6); {:.1f}s (limit 60s)",
                            rotary, translation, symmetric ? "bit-exact" : "BROKEN",
                            equivariant ? "bit-exact" : "BROKEN", residual ? "bit-exact" : "BROKEN", bound, elapsed)};
}

// ------------------------------------------------------------------ 3

Verdict adaptivity_equivalence(const std::optional<ModelParams<float>>& desk) {
  const ModelParams<float> params = desk ? *desk : init_model<float>(Hyper{5, 64, 4, 10}, 1);
  const BoundModel<float> model = bind(params, static_cast<Tape<float>*>(nullptr));
  const auto pairs = make_pairs(preset_spec(Preset::kMedium, 512, params.hyper.input_dim), 400, 100);
  AdaptiveConfig off;
  off.depth_enabled = off.width_enabled = false;
  std::vector<char> equal(pairs.size());
  parallel_for(pairs.size(), jobs(), [&](std::size_t k) {
    FlopScope uncounted(nullptr);
    equal[k] = adaptive_forward(pairs[k].a, pairs[k].b, model, off) == plain_forward(pairs[k].a, pairs[k].b, model, off.tau);
  });
  const auto same = std::count(equal.begin(), equal.end(), 1);
  return {same == 100, fmt::format("{}/100 pairs bit-equal with exit and pruning disabled ({} model)", same,
                                   desk ? "desk" : "untrained")};
}

// ------------------------------------------------------------------ 4, 5

struct HeldOut {
  HeldOutReport report;
  double seconds = 0;
};

Verdict desk_training(const std::optional<HeldOut>& held) {
  if (!held) return {false, "models/desk.glwt is missing"};
  const HeldOutReport& r = held->report;
  double train_hours = std::numeric_limits<double>::infinity();
  std::size_t train_pairs = 0;
  if (fs::exists(kModelRecord)) {
    const auto bytes = read_file(kModelRecord);
    const auto j = nlohmann::json::parse(std::string(bytes.begin(), bytes.end()));
    train_hours = j.at("wall_seconds").get<double>() / 3600;
    train_pairs = j.at("train_pairs").get<std::size_t>();
  }
  const double margin = r.model.precision - r.baseline.precision;
  const bool pass = r.model.recall >= 0.90 && r.model.precision >= 0.80 && margin >= 0.10 &&
                    r.model.recall >= r.baseline.recall && train_hours <= 12;
  return {pass,
          fmt::format("1000 held-out medium pairs: final layer recall {:.4f} (>=0.90) precision {:.4f} (>=0.80); "
                      "mutual nearest neighbour recall {:.4f} precision {:.4f}; precision margin {:+.1f} points "
                      "(>=10 at equal or higher recall); adaptive inference recall {:.4f} precision {:.4f}; training "
                      "{:.2f} h on one CPU core with {} pairs (<=12 h)",
                      r.model.recall, r.model.precision, r.baseline.recall, r.baseline.precision, 100 * margin,
                      r.adaptive.recall, r.adaptive.precision, train_hours, train_pairs)};
}

Verdict deep_supervision(const std::optional<HeldOut>& held) {
  if (!held) return {false, "models/desk.glwt is missing"};
  const std::vector<double>& loss = held->report.layer_loss;
  std::size_t inversions = 0;
  double worst = 0;
  for (std::size_t l = 0; l + 1 < loss.size(); ++l)
    if (loss[l + 1] > loss[l]) {
      ++inversions;
      worst = std::max(worst, (loss[l + 1] - loss[l]) / loss[l]);
    }
  std::string values;
  for (double v : loss) values += fmt::format("{}{:.4f}", values.empty() ? "" : " ", v);
  const bool pass = !loss.empty() && loss.back() < loss.front() && inversions <= 1 && worst <= 0.05;
  return {pass, fmt::format("per-layer held-out loss [{}]; {} inversion(s), largest {:.1f}% (allowed: 1 of <=5%)",
                            values, inversions, 100 * worst)};
}

// ------------------------------------------------------------------ 6, 7

struct PresetRun {
  std::vector<double> exit_layers, pruned;
  std::vector<std::uint64_t> network_macs, overhead_macs, plain_macs;
};

PresetRun run_preset(const ModelParams<float>& params, Preset preset, std::uint64_t seed) {
  const BoundModel<float> model = bind(params, static_cast<Tape<float>*>(nullptr));
  const auto pairs = make_pairs(preset_spec(preset, 512, params.hyper.input_dim), seed, 100);
  PresetRun out;
  out.exit_layers.resize(pairs.size());
  out.pruned.resize(pairs.size());
  out.network_macs.resize(pairs.size());
  out.overhead_macs.resize(pairs.size());
  out.plain_macs.resize(pairs.size());
  parallel_for(pairs.size(), jobs(), [&](std::size_t k) {
    FlopCounter adaptive, plain;
    MatchResult r;
    {
      FlopScope scope(&adaptive);
      r = adaptive_forward(pairs[k].a, pairs[k].b, model, AdaptiveConfig{});
    }
    {
      FlopScope scope(&plain);
      plain_forward(pairs[k].a, pairs[k].b, model, AdaptiveConfig{}.tau);
    }
    out.exit_layers[k] = double(r.exit_layer);
    out.pruned[k] = r.pruned_fraction();
    out.overhead_macs[k] = adaptive.of(Phase::kClassifier);
    out.network_macs[k] = adaptive.total() - out.overhead_macs[k];
    out.plain_macs[k] = plain.total();
  });
  return out;
}

Verdict adaptivity_behaviour(const std::optional<PresetRun>& easy, const std::optional<PresetRun>& hard) {
  if (!easy || !hard) return {false, "models/desk.glwt is missing"};
  const double exit_easy = median(easy->exit_layers), exit_hard = median(hard->exit_layers);
  const double pruned_easy = mean(easy->pruned), pruned_hard = mean(hard->pruned);
  return {exit_easy < exit_hard && pruned_hard > pruned_easy,
          fmt::format("median exit layer easy {:.1f} vs hard {:.1f} (mean {:.2f} vs {:.2f}); mean pruned fraction "
                      "easy {:.2f}% vs hard {:.2f}%",
                      exit_easy, exit_hard, mean(easy->exit_layers), mean(hard->exit_layers), 100 * pruned_easy,
                      100 * pruned_hard)};
}

Verdict efficiency(const std::optional<ModelParams<float>>& desk, const std::optional<PresetRun>& easy,
                   const std::optional<PresetRun>& hard) {
  const ModelParams<float> params = desk ? *desk : init_model<float>(Hyper{5, 64, 4, 10}, 1);
  const BoundModel<float> model = bind(params, static_cast<Tape<float>*>(nullptr));
  AdaptiveConfig fixed;
  fixed.depth_enabled = fixed.width_enabled = false;
  std::vector<double> sizes, attention;
  bool half = true;
  std::string ratios;
  std::uint64_t stream = 0;
  for (std::size_t points : {256, 512, 1024, 2048}) {
    auto rng = pair_rng(500, stream++);
    const SynthPair p = generate_pair(rng, preset_spec(Preset::kMedium, points, params.hyper.input_dim));
    FlopCounter plain, shared, unshared;
    {
      FlopScope scope(&plain);
      adaptive_forward(p.a, p.b, model, fixed);
    }
    {
      FlopScope scope(&shared);
      plain_forward(p.a, p.b, model, fixed.tau, false);
    }
    {
      FlopScope scope(&unshared);
      plain_forward(p.a, p.b, model, fixed.tau, true);
    }
    half = half && 2 * shared.of(Phase::kCrossSimilarity) == unshared.of(Phase::kCrossSimilarity) &&
           shared.of(Phase::kCrossSimilarity) > 0;
    sizes.push_back(double(points));
    attention.push_back(double(plain.attention()));
  }
  double mx = 0, my = 0, sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) mx += std::log(sizes[i]) / 4, my += std::log(attention[i]) / 4;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    sxy += (std::log(sizes[i]) - mx) * (std::log(attention[i]) - my);
    sxx += (std::log(sizes[i]) - mx) * (std::log(sizes[i]) - mx);
  }
  const double exponent = sxy / sxx;

  std::size_t pairs = 0, network_ok = 0, total_ok = 0;
  for (const auto* run : {&easy, &hard}) {
    if (!*run) continue;
    for (std::size_t k = 0; k < (*run)->plain_macs.size(); ++k) {
      ++pairs;
      network_ok += (*run)->network_macs[k] <= (*run)->plain_macs[k];
      total_ok += (*run)->network_macs[k] + (*run)->overhead_macs[k] <= (*run)->plain_macs[k];
    }
  }
  const bool pass = half && exponent >= 1.9 && exponent <= 2.1 && pairs == 200 && total_ok == pairs;
  return {pass, fmt::format("shared cross similarity = 1/2 of two-matrix variant: {}; non-adaptive attention FLOP "
                            "exponent over 256..2048 points {:.4f} ([1.9, 2.1]); adaptive FLOPs including the "
                            "confidence classifiers <= non-adaptive on {}/{} easy+hard pairs ({}/{} counting the "
                            "network alone)",
                            half ? "exact" : "NO", exponent, total_ok, pairs, network_ok, pairs)};
}

// ------------------------------------------------------------------ 8

Verdict geometry_suite(const std::optional<ModelParams<float>>& desk) {
  double dlt_error = 0;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Homography h = checks::random_h(rng);
    const auto pairs = checks::exact_pairs(h, 4, rng);
    try {
      dlt_error = std::max(dlt_error, mean_corner_error(dlt(pairs), h, kSynthFrame));
    } catch (const InvalidInput&) {
      dlt_error = std::numeric_limits<double>::infinity();
    }
  }
  std::size_t ransac_equal = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 data(1000 + trial), ransac(2000 + trial);
    const auto pairs = checks::contaminated_pairs(data, 12, 7);
    const RansacResult r = ransac_h(pairs, 3.0, 1000, ransac);
    ransac_equal += r.success && r.inlier_count == checks::exhaustive_best(pairs, 3.0);
  }
  double auc_gap = 0;
  for (int trial = 0; trial < 5; ++trial) {
    std::mt19937_64 e(3000 + trial);
    std::exponential_distribution<double> d(0.3 + trial * 0.2);
    std::vector<double> errors;
    for (int i = 0; i < 200; ++i) errors.push_back(d(e));
    errors.push_back(std::numeric_limits<double>::infinity());
    for (double t : {1.0, 5.0}) auc_gap = std::max(auc_gap, std::abs(corner_auc(errors, t) - checks::grid_auc(errors, t)));
  }
  std::string e2e = "desk model missing";
  bool e2e_pass = false;
  if (desk) {
    const BoundModel<float> model = bind(*desk, static_cast<Tape<float>*>(nullptr));
    const auto pairs = make_pairs(preset_spec(Preset::kMedium, 512, desk->hyper.input_dim), 600, 500);
    // Default inference decides the criterion; full depth is printed for comparison.
    auto run = [&](const AdaptiveConfig& config) {
      std::vector<PairEval> evals(pairs.size());
      parallel_for(pairs.size(), jobs(), [&](std::size_t k) {
        FlopScope uncounted(nullptr);
        const MatchResult r = adaptive_forward(pairs[k].a, pairs[k].b, model, config);
        evals[k] = evaluate_pair(r, pairs[k].a, pairs[k].b, pairs[k].gt, EvalOptions{}, k);
      });
      return EvalReport::summarize(std::move(evals));
    };
    AdaptiveConfig full;
    full.depth_enabled = full.width_enabled = false;
    const EvalReport report = run(AdaptiveConfig{}), deep = run(full);
    const double gap = 100 * std::abs(report.auc_dlt_5 - report.auc_ransac_5);
    e2e_pass = gap <= 5;
    e2e = fmt::format("500 pairs: AUC@5px DLT {:.2f} vs RANSAC {:.2f}, gap {:.2f} points (<=5); AUC@1px DLT {:.2f} "
                      "vs RANSAC {:.2f}; with exit and pruning off AUC@5px DLT {:.2f} vs RANSAC {:.2f}",
                      100 * report.auc_dlt_5, 100 * report.auc_ransac_5, gap, 100 * report.auc_dlt_1,
                      100 * report.auc_ransac_1, 100 * deep.auc_dlt_5, 100 * deep.auc_ransac_5);
  }
  const bool pass = dlt_error < 1e-6 && ransac_equal == 20 && auc_gap < 1e-3 && e2e_pass;
  return {pass, fmt::format("4-point DLT corner error {:.2g} px (<1e-6); RANSAC = exhaustive search on {}/20 "
                            "12-pair instances; AUC vs dense grid {:.2g} (<1e-3); {}",
                            dlt_error, ransac_equal, auc_gap, e2e)};
}

// ------------------------------------------------------------------ 9

std::string slurp(const fs::path& p) {
  const auto b = read_file(p);
  return std::string(b.begin(), b.end());
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "'" + cli + "' " + args + " >>'" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (!fs::exists(b / e.path().filename()) || slurp(e.path()) != slurp(b / e.path().filename())) return false;
    ++files;
  }
  return files > 0;
}

Verdict determinism(const std::optional<ModelParams<float>>& desk) {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  // Library level.
  const PairSpec spec = preset_spec(Preset::kHard, 96, 10);
  const auto p1 = make_pairs(spec, 9, 3), p2 = make_pairs(spec, 9, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    expect(encode_features(p1[k].a) == encode_features(p2[k].a) && p1[k].gt == p2[k].gt, "pair generation");
    expect(decode_features(encode_features(p1[k].b)) == p1[k].b, "feature container round trip");
    expect(parse_ground_truth(format_ground_truth(p1[k].gt)) == p1[k].gt, "ground-truth text round trip");
  }
  const ModelParams<double> params = desk ? decode_weights<double>(encode_weights(*desk, 4))
                                          : init_model<double>(Hyper{5, 64, 4, 10}, 1);
  const BoundModel<double> model = bind(params, static_cast<Tape<double>*>(nullptr));
  const MatchResult m1 = adaptive_forward(p1[0].a, p1[0].b, model, AdaptiveConfig{});
  const MatchResult m2 = adaptive_forward(p2[0].a, p2[0].b, model, AdaptiveConfig{});
  expect(matches_to_json(m1) == matches_to_json(m2), "matching");
  expect(matches_from_json(matches_to_json(m1)) == m1, "match file round trip");
  const PairEval e1 = evaluate_pair(m1, p1[0].a, p1[0].b, p1[0].gt, EvalOptions{}, 0);
  const PairEval e2 = evaluate_pair(m2, p2[0].a, p2[0].b, p2[0].gt, EvalOptions{}, 0);
  expect(EvalReport::summarize({e1}).to_json() == EvalReport::summarize({e2}).to_json(), "evaluation");
  for (std::uint32_t width : {4u, 8u}) {
    const auto bytes = encode_weights(params, width, std::vector<std::uint8_t>{7, 7});
    expect(encode_weights(decode_weights<double>(bytes), width, std::vector<std::uint8_t>{7, 7}) == bytes,
           "weights container round trip");
  }

  TrainConfig c;
  c.hyper = Hyper{2, 8, 2, 10};
  c.points = 32;
  c.train_pairs = 8;
  c.batch = 4;
  c.epochs = 2;
  c.held_out_pairs = 2;
  c.classifier_pairs = 4;
  c.warmup_steps = 1;
  const ModelParams<double> init = init_model<double>(c.hyper, 3);
  const TrainResult<double> full = train(c, init), again = train(c, init);
  expect(bit_equal(full.params, again.params), "training");
  expect(TrainState::decode(full.state.encode()) == full.state, "training state round trip");
  const fs::path dir = fs::temp_directory_path() / "glow_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  TrainConfig chunk = c;
  chunk.max_steps = 1;
  TrainOutputs out{dir / "ckpt.glwt", std::nullopt};
  ModelParams<double> current = init;
  std::optional<TrainState> state;
  bool resumed = false;
  for (int round = 0; round < 20 && !resumed; ++round) {
    const TrainResult<double> part = train(chunk, current, state, out);
    if (part.finished) {
      resumed = bit_equal(part.params, full.params) && part.state == full.state;
      break;
    }
    WeightsFile meta;
    current = load_weights<double>(*out.checkpoint, &meta);
    state = TrainState::decode(meta.training_state);
  }
  expect(resumed, "checkpoint resume");

  // Command level.
  std::string cli_note = "commands not checked (GLOW_CLI unset)";
  if (const char* cli = std::getenv("GLOW_CLI")) {
    const fs::path log = dir / "cli.log";
    const std::string cfg = (dir / "train.cfg").string();
    std::ofstream(cfg) << "precision = f64\nlayers = 2\ndim = 8\nheads = 2\npoints = 32\ntrain_pairs = 8\n"
                          "batch = 4\nepochs = 2\nheld_out_pairs = 2\nclassifier_pairs = 4\nwarmup_steps = 1\n";
    bool ok = true;
    for (const char* tag : {"1", "2"}) {
      const fs::path d = dir / (std::string("run") + tag);
      ok &= run_cli(cli, fmt::format("gen --out {} --n 4 --points 64 --seed 5", (d / "data").string()), log) == 0;
      ok &= run_cli(cli, fmt::format("train --config {} --out {}", cfg, (d / "m.glwt").string()), log) == 0;
      ok &= run_cli(cli, fmt::format("match --precision f64 --weights {} --manifest {} --out-dir {}",
                                     (d / "m.glwt").string(), (d / "data/manifest.txt").string(),
                                     (d / "matches").string()),
                    log) == 0;
      ok &= run_cli(cli, fmt::format("eval --manifest {} --matches {} --out {}", (d / "data/manifest.txt").string(),
                                     (d / "matches").string(), (d / "report").string()),
                    log) == 0;
      ok &= run_cli(cli, fmt::format("bench --precision f64 --sizes 32,64 --layers 2 --dim 8 --heads 2 --out {}",
                                     (d / "bench.csv").string()),
                    log) == 0;
    }
    for (int round = 0; round < 20 && !fs::exists(dir / "resumed.glwt"); ++round)
      ok &= run_cli(cli, fmt::format("train --config {} --resume --max-steps 1 --out {}", cfg,
                                     (dir / "resumed.glwt").string()),
                    log) == 0;
    expect(ok, "command exit codes");
    const fs::path r1 = dir / "run1", r2 = dir / "run2";
    expect(same_tree(r1 / "data", r2 / "data"), "glow gen");
    expect(slurp(r1 / "m.glwt") == slurp(r2 / "m.glwt"), "glow train");
    expect(fs::exists(dir / "resumed.glwt") && slurp(dir / "resumed.glwt") == slurp(r1 / "m.glwt"),
           "glow train resume");
    expect(same_tree(r1 / "matches", r2 / "matches"), "glow match");
    expect(slurp(r1 / "report.json") == slurp(r2 / "report.json") && slurp(r1 / "report.csv") == slurp(r2 / "report.csv"),
           "glow eval");
    // Timing columns differ between runs; the FLOP columns must not.
    auto flop_columns = [&](const fs::path& p) {
      std::istringstream in(slurp(p));
      std::string line, out;
      while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string cell;
        for (int c = 0; c < 8 && std::getline(cells, cell, ','); ++c) out += cell + ",";
        out += "\n";
      }
      return out;
    };
    expect(flop_columns(r1 / "bench.csv") == flop_columns(r2 / "bench.csv"), "glow bench");
    cli_note = "gen, train, resume, match, eval and bench reproduced through the binary";
  }
  fs::remove_all(dir);
  std::string failed;
  for (const auto& f : failures) failed += (failed.empty() ? "" : ", ") + f;
  return {failures.empty(), fmt::format("library: generation, matching, evaluation, training and checkpoint resume "
                                        "bit-exact at 64 bits; feature, ground-truth, weights, match and training-"
                                        "state formats round-trip; {}{}",
                                        cli_note, failed.empty() ? "" : "; FAILED: " + failed)};
}

}  // namespace
}  // namespace glow

int main() {
  using namespace glow;
  const auto desk = desk_model();
  std::vector<std::pair<int, std::function<Verdict()>>> criteria;

  std::optional<HeldOut> held;
  std::optional<PresetRun> easy, hard;
  auto held_out = [&]() {
    if (!desk || held) return;
    const auto start = Clock::now();
    TrainConfig c;
    c.seed = kDeskSeed;
    c.points = 512;
    c.held_out_pairs = 1000;
    c.hyper = desk->hyper;
    held = HeldOut{evaluate_held_out(*desk, held_out_pairs(c), AdaptiveConfig{}, jobs()), 0};
    held->seconds = seconds_since(start);
  };
  auto presets = [&]() {
    if (!desk || easy) return;
    easy = run_preset(*desk, Preset::kEasy, 700);
    hard = run_preset(*desk, Preset::kHard, 701);
  };

  criteria.emplace_back(1, [] { return gradient_correctness(); });
  criteria.emplace_back(2, [] { return architectural_invariants(); });
  criteria.emplace_back(3, [&] { return adaptivity_equivalence(desk); });
  criteria.emplace_back(4, [&] {
    held_out();
    return desk_training(held);
  });
  criteria.emplace_back(5, [&] {
    held_out();
    return deep_supervision(held);
  });
  criteria.emplace_back(6, [&] {
    presets();
    return adaptivity_behaviour(easy, hard);
  });
  criteria.emplace_back(7, [&] {
    presets();
    return efficiency(desk, easy, hard);
  });
  criteria.emplace_back(8, [&] { return geometry_suite(desk); });
  criteria.emplace_back(9, [&] { return determinism(desk); });

  int failed = 0;
  for (auto& [id, check] : criteria) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    fmt::print("CRITERION {} {}: {} [{:.0f}s]\n", id, v.pass ? "PASS" : "FAIL", v.detail, seconds_since(start));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
