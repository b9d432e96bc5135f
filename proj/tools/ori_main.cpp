#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ori/io.hpp"

namespace fs = std::filesystem;
using ori::json;

namespace {

void write_manifest(const fs::path& dir, const json& j) {
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  f << j.dump(2) << '\n';
}

fs::path make_run_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

struct GenOpts {
  std::string out;
  int clips = 260;
  int raters = 5;
  std::uint64_t seed = 0;
};

int run_gen(const GenOpts& o) {
  const fs::path dir = make_run_dir(o.out);
  const ori::CorpusSpec spec = ori::make_corpus_spec(o.clips, o.raters, o.seed);
  const ori::Corpus corpus = ori::generate_corpus(spec);
  ori::save_corpus(dir, corpus);
  std::cout << "wrote " << corpus.clips.size() << " clips (train/val/test = " << spec.n_train
            << "/" << spec.n_val << "/" << spec.n_test << ", " << o.raters << " raters) to "
            << dir.string() << "\n";
  return 0;
}

struct NormalizeOpts {
  std::string ratings;
  std::string out;
};

// Clips rated by every rater present in the file form the lookup-table pool.
std::set<std::string> full_panel_clips(const std::vector<ori::SegmentRating>& ratings) {
  std::set<std::string> all_raters;
  std::map<std::string, std::set<std::string>> by_clip;
  for (const auto& r : ratings) {
    all_raters.insert(r.rater_id);
    by_clip[r.clip_id].insert(r.rater_id);
  }
  std::set<std::string> out;
  for (const auto& [clip, raters] : by_clip)
    if (raters == all_raters) out.insert(clip);
  return out;
}

int run_normalize(const NormalizeOpts& o) {
  const fs::path dir = make_run_dir(o.out);
  const auto ratings = ori::read_ratings_csv(o.ratings);
  const auto common = full_panel_clips(ratings);
  if (common.empty())
    throw std::runtime_error("no common set: no clip is rated by every rater");
  std::vector<ori::SegmentRating> common_ratings;
  for (const auto& r : ratings)
    if (common.count(r.clip_id)) common_ratings.push_back(r);
  const ori::LookupTables tables = ori::build_lookup_tables(common_ratings);
  const auto normalized = ori::normalize_ratings(ratings, tables);
  ori::write_lookup_json(dir / "lookup.json", tables);
  ori::write_normalized_csv(dir / "normalized.csv", normalized);

  json m;
  m["command"] = "normalize";
  m["ratings"] = o.ratings;
  m["common_clips"] = std::vector<std::string>(common.begin(), common.end());
  m["raters"] = tables.by_rater.size();
  write_manifest(dir, m);
  std::cout << "normalized " << normalized.size() << " ratings from "
            << tables.by_rater.size() << " raters (" << common.size()
            << " common clips) to " << dir.string() << "\n";
  return 0;
}

struct IccOpts {
  std::string ratings;
  std::string out;
  bool normalized = false;
};

void append_icc_row(std::vector<ori::IccRow>& rows, const std::string& set, bool normalized,
                    const ori::RatingsMatrix& m) {
  const ori::AnovaDecomposition a = ori::two_way_anova(m);
  ori::IccRow row;
  row.set = set;
  row.normalized = normalized;
  row.report = ori::make_icc_report(a, false);
  row.n = a.n;
  row.k = a.k;
  rows.push_back(std::move(row));
}

int run_icc(const IccOpts& o) {
  const fs::path dir = make_run_dir(o.out);
  const auto ratings = ori::read_ratings_csv(o.ratings);
  std::set<std::string> all_raters;
  for (const auto& r : ratings) all_raters.insert(r.rater_id);
  const auto common = full_panel_clips(ratings);

  std::vector<ori::SegmentRating> common_ratings, pair_ratings;
  std::map<std::string, std::set<std::string>> by_clip;
  for (const auto& r : ratings) by_clip[r.clip_id].insert(r.rater_id);
  for (const auto& r : ratings) {
    if (common.count(r.clip_id)) {
      common_ratings.push_back(r);
    } else if (by_clip[r.clip_id].size() == 2) {
      pair_ratings.push_back(r);
    } else {
      throw std::runtime_error("clip " + r.clip_id + " is rated by " +
                               std::to_string(by_clip[r.clip_id].size()) + " of " +
                               std::to_string(all_raters.size()) +
                               " raters; expected the full panel or a pair");
    }
  }

  std::vector<ori::IccRow> rows;
  if (!common_ratings.empty())
    append_icc_row(rows, "common", false, ori::assemble_matrix(ori::as_real(common_ratings)));
  if (!pair_ratings.empty())
    append_icc_row(rows, "expansion", false,
                   ori::pool_paired_matrix(ori::as_real(pair_ratings)));
  if (o.normalized) {
    if (common_ratings.empty())
      throw std::runtime_error("--normalized requires a common set to build lookup tables");
    const ori::LookupTables tables = ori::build_lookup_tables(common_ratings);
    append_icc_row(rows, "common", true,
                   ori::assemble_matrix(ori::normalize_ratings(common_ratings, tables)));
    if (!pair_ratings.empty())
      append_icc_row(rows, "expansion", true,
                     ori::pool_paired_matrix(ori::normalize_ratings(pair_ratings, tables)));
  }

  std::sort(rows.begin(), rows.end(), [](const ori::IccRow& a, const ori::IccRow& b) {
    if (a.set != b.set) return a.set < b.set;  // common before expansion
    return a.normalized < b.normalized;
  });
  ori::write_icc_json(dir / "icc.json", rows);

  json m;
  m["command"] = "icc";
  m["ratings"] = o.ratings;
  m["normalized"] = o.normalized;
  write_manifest(dir, m);
  for (const auto& r : rows)
    std::cout << r.set << (r.normalized ? " normalized" : " raw") << ": icc_c1="
              << ori::fmt_double(r.report.icc_c1) << " icc_a1="
              << ori::fmt_double(r.report.icc_a1) << " icc_ak="
              << ori::fmt_double(r.report.icc_ak) << " (n=" << r.n << ", k=" << r.k << ")\n";
  return 0;
}

struct OriOpts {
  std::string ratings;
  std::string lookup;
  std::string out;
  int frame_rate = ori::kFrameRate;
};

int run_ori(const OriOpts& o) {
  const fs::path dir = make_run_dir(o.out);
  std::vector<ori::NormalizedRating> values;
  if (!o.lookup.empty()) {
    const ori::LookupTables tables = ori::read_lookup_json(o.lookup);
    values = ori::normalize_ratings(ori::read_ratings_csv(o.ratings), tables);
  } else {
    values = ori::read_real_ratings_csv(o.ratings);
  }
  const auto means = ori::average_across_raters(values);
  std::vector<ori::OriSeries> series;
  std::size_t rows = 0;
  for (const auto& [clip, m] : means) {
    series.push_back(ori::interpolate_ori(clip, m, o.frame_rate));
    rows += series.back().values.size();
  }
  ori::write_ori_csv(dir / "ori.csv", series);

  json m;
  m["command"] = "ori";
  m["ratings"] = o.ratings;
  m["lookup"] = o.lookup;
  m["frame_rate"] = o.frame_rate;
  write_manifest(dir, m);
  std::cout << "wrote " << series.size() << " clips (" << rows << " frames) to "
            << (dir / "ori.csv").string() << "\n";
  return 0;
}

struct TrainOpts {
  std::string corpus;
  std::string out;
  std::string model = "keyframe";
  std::string streams = "gaze,hand,pose,foot";
  std::uint64_t seed = 0;
  ori::TrainConfig cfg;
};

int run_train(const TrainOpts& o) {
  const fs::path dir = make_run_dir(o.out);
  const ori::ModelKind kind = ori::parse_model_kind(o.model);
  const ori::StreamMask mask = ori::parse_stream_mask(o.streams);
  const ori::LoadedCorpus corpus = ori::load_corpus(o.corpus);
  const ori::SplitData splits = ori::loaded_splits(corpus);
  if (splits.train.empty() || splits.val.empty())
    throw std::runtime_error("corpus needs non-empty train and val splits");
  const ori::ClipDataset train_ds = ori::project_dataset(splits.train, mask);
  const ori::ClipDataset val_ds = ori::project_dataset(splits.val, mask);

  ori::TrainConfig cfg = o.cfg;
  cfg.seed = o.seed;
  std::cerr << "training " << o.model << " on " << splits.train.size() << " clips ("
            << o.streams << ", " << train_ds.total_frames() << " frames)\n";
  const ori::TrainResult result = ori::train_model(kind, train_ds, val_ds, mask, cfg);
  for (const auto& e : result.log)
    std::cerr << "epoch " << e.epoch << ": train mae " << ori::fmt_double(e.train_mae)
              << ", val mae " << ori::fmt_double(e.val_mae) << " ("
              << ori::fmt_double(e.seconds) << "s)\n";

  ori::save_checkpoint(dir / "checkpoint.json", result.best);
  ori::write_train_log_csv(dir / "train_log.csv", result.log);

  json m;
  m["command"] = "train";
  m["corpus"] = o.corpus;
  m["model"] = o.model;
  m["streams"] = ori::stream_mask_name(mask);
  m["seed"] = o.seed;
  m["epochs"] = cfg.epochs;
  m["batch_size"] = cfg.batch_size;
  m["learning_rate"] = cfg.learning_rate;
  m["window_stride"] = cfg.window_stride;
  m["val_stride"] = cfg.val_stride;
  write_manifest(dir, m);
  std::cout << "best val mae " << ori::fmt_double(result.best_val_mae) << " (epoch "
            << result.best_epoch << "), checkpoint in " << dir.string() << "\n";
  return 0;
}

struct EvalOpts {
  std::string corpus;
  std::string checkpoint;
  std::string out;
  std::string split = "test";
  int stride = 1;
};

int run_eval(const EvalOpts& o) {
  const fs::path dir = make_run_dir(o.out);
  const ori::Checkpoint ck = ori::load_checkpoint(o.checkpoint);
  const ori::LoadedCorpus corpus = ori::load_corpus(o.corpus);
  if (o.split != "train" && o.split != "val" && o.split != "test")
    throw std::runtime_error("unknown split '" + o.split + "'");
  const auto clips = ori::loaded_split(corpus, o.split);
  if (clips.empty()) throw std::runtime_error("split '" + o.split + "' is empty");
  const ori::ClipDataset ds = ori::project_dataset(clips, ck.mask);
  const auto windows = ds.windows(o.stride);
  const double mae = ori::evaluate_mae(ck, windows);

  std::vector<ori::PredictionRow> rows;
  const std::string model = ori::model_kind_name(ck.kind);
  for (const auto& entry : ds.entries) {
    const auto& truth = corpus.truth.at(entry.clip_id);
    const auto preds = ori::predict_frames(ck, entry.frames, entry.target_unit);
    for (std::size_t t = 0; t < preds.size(); ++t) {
      ori::PredictionRow r;
      r.clip_id = entry.clip_id;
      r.frame = t;
      r.ground_truth = truth.values[t];
      r.prediction = ori::unit_to_ori(preds[t]);
      r.model = model;
      rows.push_back(std::move(r));
    }
  }
  ori::write_predictions_csv(dir / "predictions.csv", rows);

  {
    std::ofstream f(dir / "metrics.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
    f << "split,model,gaze,hand,pose,foot,mae,windows\n";
    f << o.split << ',' << model << ',' << (ck.mask.gaze ? 1 : 0) << ','
      << (ck.mask.hand() ? 1 : 0) << ',' << (ck.mask.pose ? 1 : 0) << ','
      << (ck.mask.foot ? 1 : 0) << ',' << ori::fmt_double(mae) << ',' << windows.size()
      << '\n';
  }

  json m;
  m["command"] = "eval";
  m["corpus"] = o.corpus;
  m["checkpoint"] = o.checkpoint;
  m["split"] = o.split;
  m["stride"] = o.stride;
  write_manifest(dir, m);
  std::cout << o.split << " mae " << ori::fmt_double(mae) << " (" << windows.size()
            << " windows, " << model << ")\n";
  return 0;
}

struct AblateOpts {
  std::string corpus;
  std::string out;
  std::string model = "keyframe";
  std::string grid = "table2";
  std::uint64_t seed = 0;
  int test_stride = 1;
  ori::TrainConfig cfg;
};

int run_ablate(const AblateOpts& o) {
  const fs::path dir = make_run_dir(o.out);
  if (o.grid != "table2") throw std::runtime_error("unknown grid '" + o.grid + "'");
  const ori::ModelKind kind = ori::parse_model_kind(o.model);
  const ori::LoadedCorpus corpus = ori::load_corpus(o.corpus);
  const ori::SplitData splits = ori::loaded_splits(corpus);

  std::vector<ori::AblationSpec> specs;
  for (const auto& mask : ori::ablation_grid_masks()) specs.push_back({mask, kind});
  ori::TrainConfig cfg = o.cfg;
  cfg.seed = o.seed;
  const auto cells = ori::run_ablation(splits, specs, cfg, o.test_stride);
  ori::write_ablation_csv(dir / "ablation.csv", cells);

  json m;
  m["command"] = "ablate";
  m["corpus"] = o.corpus;
  m["model"] = o.model;
  m["grid"] = o.grid;
  m["seed"] = o.seed;
  m["epochs"] = cfg.epochs;
  m["window_stride"] = cfg.window_stride;
  m["val_stride"] = cfg.val_stride;
  m["test_stride"] = o.test_stride;
  write_manifest(dir, m);
  for (const auto& c : cells)
    std::cout << ori::stream_mask_name(c.streams) << " (" << ori::model_kind_name(c.model)
              << "): test mae " << ori::fmt_double(c.mae) << "\n";
  return 0;
}

struct CorrelateOpts {
  std::string corpus;
  std::string out;
  std::string split = "train";
  std::size_t max_frames = 0;
};

int run_correlate(const CorrelateOpts& o) {
  const fs::path dir = make_run_dir(o.out);
  const ori::LoadedCorpus corpus = ori::load_corpus(o.corpus);
  const auto clips = ori::loaded_split(corpus, o.split);
  if (clips.empty()) throw std::runtime_error("split '" + o.split + "' is empty");

  ori::StreamMask all;
  std::size_t total = 0;
  for (const auto& c : clips) total += c.frames->size();
  if (o.max_frames > 0) total = std::min(total, o.max_frames);
  ori::Matrix frames(total, static_cast<std::size_t>(all.dims()));
  std::vector<double> target(total);
  std::size_t row = 0;
  for (const auto& c : clips) {
    for (std::size_t t = 0; t < c.frames->size() && row < total; ++t, ++row) {
      ori::flatten((*c.frames)[t], all, frames.row(row));
      target[row] = (*c.target_unit)[t];
    }
    if (row >= total) break;
  }
  const auto entries = ori::correlate_features(frames, target, ori::frame_dim_names());
  ori::write_correlations_csv(dir / "correlations.csv", entries);

  json m;
  m["command"] = "correlate";
  m["corpus"] = o.corpus;
  m["split"] = o.split;
  m["max_frames"] = o.max_frames;
  write_manifest(dir, m);
  std::cout << "wrote " << entries.size() << " dimension correlations over " << total
            << " frames to " << (dir / "correlations.csv").string() << "\n";
  return 0;
}

void add_train_config_flags(CLI::App* cmd, ori::TrainConfig& cfg) {
  cmd->add_option("--epochs", cfg.epochs, "training epochs")->check(CLI::Range(1, 10000));
  cmd->add_option("--batch", cfg.batch_size, "minibatch size")->check(CLI::Range(1, 100000));
  cmd->add_option("--lr", cfg.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--window-stride", cfg.window_stride, "training window stride in frames")
      ->check(CLI::Range(1, 10000));
  cmd->add_option("--val-stride", cfg.val_stride, "validation window stride in frames")
      ->check(CLI::Range(1, 10000));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"take-over readiness pipeline: synthetic corpus, rating agreement, "
               "score construction, sequence models"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic rated corpus");
  cmd_gen->add_option("--out", gen.out, "output directory")->required();
  cmd_gen->add_option("--clips", gen.clips, "total clip count")->check(CLI::Range(3, 1000000));
  cmd_gen->add_option("--raters", gen.raters, "simulated rater count")
      ->check(CLI::Range(2, 26));
  cmd_gen->add_option("--seed", gen.seed, "master seed");

  NormalizeOpts norm;
  auto* cmd_norm = app.add_subcommand("normalize", "build lookup tables and normalize ratings");
  cmd_norm->add_option("--ratings", norm.ratings, "ratings CSV")->required();
  cmd_norm->add_option("--out", norm.out, "output directory")->required();

  IccOpts icc;
  auto* cmd_icc = app.add_subcommand("icc", "rater agreement report");
  cmd_icc->add_option("--ratings", icc.ratings, "ratings CSV")->required();
  cmd_icc->add_option("--out", icc.out, "output directory")->required();
  cmd_icc->add_flag("--normalized", icc.normalized, "also report normalized agreement");

  OriOpts oriopts;
  auto* cmd_ori = app.add_subcommand("ori", "per-frame score series from segment ratings");
  cmd_ori->add_option("--ratings", oriopts.ratings, "ratings CSV")->required();
  cmd_ori->add_option("--lookup", oriopts.lookup, "lookup tables JSON (normalize first)");
  cmd_ori->add_option("--out", oriopts.out, "output directory")->required();
  cmd_ori->add_option("--frame-rate", oriopts.frame_rate, "frames per second")
      ->check(CLI::Range(1, 1000));

  TrainOpts train;
  auto* cmd_train = app.add_subcommand("train", "train a model on a generated corpus");
  cmd_train->add_option("--corpus", train.corpus, "corpus directory from gen")->required();
  cmd_train->add_option("--out", train.out, "output directory")->required();
  cmd_train->add_option("--model", train.model, "linear, simple or keyframe");
  cmd_train->add_option("--streams", train.streams, "comma list: gaze,hand,pose,foot");
  cmd_train->add_option("--seed", train.seed, "training seed");
  add_train_config_flags(cmd_train, train.cfg);

  EvalOpts eval;
  auto* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on a corpus split");
  cmd_eval->add_option("--corpus", eval.corpus, "corpus directory from gen")->required();
  cmd_eval->add_option("--checkpoint", eval.checkpoint, "checkpoint JSON from train")
      ->required();
  cmd_eval->add_option("--out", eval.out, "output directory")->required();
  cmd_eval->add_option("--split", eval.split, "train, val or test");
  cmd_eval->add_option("--stride", eval.stride, "evaluation window stride")
      ->check(CLI::Range(1, 10000));

  AblateOpts ablate;
  auto* cmd_ablate = app.add_subcommand("ablate", "train and score the stream ablation grid");
  cmd_ablate->add_option("--corpus", ablate.corpus, "corpus directory from gen")->required();
  cmd_ablate->add_option("--out", ablate.out, "output directory")->required();
  cmd_ablate->add_option("--model", ablate.model, "linear, simple or keyframe");
  cmd_ablate->add_option("--grid", ablate.grid, "grid name (table2)");
  cmd_ablate->add_option("--seed", ablate.seed, "training seed");
  cmd_ablate->add_option("--test-stride", ablate.test_stride, "test window stride")
      ->check(CLI::Range(1, 10000));
  add_train_config_flags(cmd_ablate, ablate.cfg);

  CorrelateOpts corr;
  auto* cmd_corr = app.add_subcommand("correlate", "per-dimension feature/target correlations");
  cmd_corr->add_option("--corpus", corr.corpus, "corpus directory from gen")->required();
  cmd_corr->add_option("--out", corr.out, "output directory")->required();
  cmd_corr->add_option("--split", corr.split, "train, val or test");
  cmd_corr->add_option("--max-frames", corr.max_frames, "cap on frames used (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cmd_gen->parsed()) return run_gen(gen);
    if (cmd_norm->parsed()) return run_normalize(norm);
    if (cmd_icc->parsed()) return run_icc(icc);
    if (cmd_ori->parsed()) return run_ori(oriopts);
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_ablate->parsed()) return run_ablate(ablate);
    if (cmd_corr->parsed()) return run_correlate(corr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
