// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "lrmt/error.hpp"
#include "lrmt/subword.hpp"
#include "lrmt/text.hpp"

namespace lrmt::harness {
namespace fs = std::filesystem;

namespace {

std::string fmt_double(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

std::string join_sizes(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) out += line + "\n";
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = text::normalize_spaces(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::vector<std::string> kSplitNames = {"valid", "test", "train_pool"};

// Drops pairs whose source or target encodes to nothing.
std::vector<training::TokenizedPair> tokenize(const subword::BpeModel& src_model,
                                              const subword::BpeModel& tgt_model,
                                              const corpus::ParallelCorpus& corpus) {
  const auto src = subword::encode_lines(src_model, corpus.source_lines());
  const auto tgt = subword::encode_lines(tgt_model, corpus.target_lines());
  std::vector<training::TokenizedPair> out;
  out.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].empty() || tgt[i].empty()) continue;
    out.push_back({src[i], tgt[i]});
  }
  return out;
}

KeyValueFile result_to_kv(const CellResult& cell) {
  KeyValueFile kv;
  kv.set("size", std::to_string(cell.size));
  kv.set("condition", condition_name(cell.condition));
  kv.set("seed", std::to_string(cell.seed));
  kv.set("ok", cell.ok ? "true" : "false");
  if (!cell.ok) {
    kv.set("error", cell.error);
    return kv;
  }
  kv.set("bleu", fmt_double("%.17g", cell.bleu.score));
  kv.set("bleu_line", cell.bleu.format());
  kv.set("bp", fmt_double("%.17g", cell.bleu.bp));
  kv.set("sys_len", std::to_string(cell.bleu.sys_len));
  kv.set("ref_len", std::to_string(cell.bleu.ref_len));
  for (int n = 0; n < bleu::kMaxOrder; ++n) {
    kv.set("precision_" + std::to_string(n + 1), fmt_double("%.17g", cell.bleu.precisions[n]));
    kv.set("matches_" + std::to_string(n + 1), std::to_string(cell.bleu.matches[n]));
    kv.set("totals_" + std::to_string(n + 1), std::to_string(cell.bleu.totals[n]));
  }
  kv.set("steps", std::to_string(cell.steps));
  kv.set("early_stopped", cell.early_stopped ? "true" : "false");
  return kv;
}

CellResult result_from_kv(const KeyValueFile& kv) {
  CellResult cell;
  cell.size = static_cast<std::size_t>(kv.get_int("size", 0));
  cell.condition = parse_condition(kv.get_string("condition", "raw"));
  cell.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  cell.ok = kv.get_bool("ok", false);
  cell.error = kv.get_string("error", "");
  if (!cell.ok) return cell;
  cell.bleu.score = kv.get_double("bleu", 0.0);
  cell.bleu.bp = kv.get_double("bp", 0.0);
  cell.bleu.sys_len = kv.get_int("sys_len", 0);
  cell.bleu.ref_len = kv.get_int("ref_len", 0);
  for (int n = 0; n < bleu::kMaxOrder; ++n) {
    cell.bleu.precisions[n] = kv.get_double("precision_" + std::to_string(n + 1), 0.0);
    cell.bleu.matches[n] = kv.get_int("matches_" + std::to_string(n + 1), 0);
    cell.bleu.totals[n] = kv.get_int("totals_" + std::to_string(n + 1), 0);
  }
  cell.steps = kv.get_int("steps", 0);
  cell.early_stopped = kv.get_bool("early_stopped", false);
  return cell;
}

std::vector<CurvePoint> parse_curve(const std::string& content) {
  std::vector<CurvePoint> curve;
  std::stringstream ss(content);
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string step, metric, bleu;
    std::getline(fields, step, ',');
    std::getline(fields, metric, ',');
    std::getline(fields, bleu, ',');
    CurvePoint p;
    p.step = std::stoll(step);
    p.valid_metric = std::stod(metric);
    if (!bleu.empty()) p.test_bleu = std::stod(bleu);
    curve.push_back(p);
  }
  return curve;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string condition_name(Condition condition) {
  return condition == Condition::kRaw ? "raw" : "subword";
}

Condition parse_condition(const std::string& name) {
  if (name == "raw") return Condition::kRaw;
  if (name == "subword") return Condition::kSubword;
  throw Error(ErrorCode::kInvalidArgument, "unknown condition: " + name);
}

void ExperimentConfig::validate() const {
  if (sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "no training sizes configured");
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "sizes must be strictly ascending");
    }
  }
  if (sizes.front() == 0) throw Error(ErrorCode::kInvalidArgument, "training size must be > 0");
  if (conditions.empty()) throw Error(ErrorCode::kInvalidArgument, "no conditions configured");
  if (seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one seed is required");
  if (workers < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  if (stop_metric != "loss" && stop_metric != "bleu") {
    throw Error(ErrorCode::kInvalidArgument, "stop_metric must be loss or bleu");
  }
  if (out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "out_dir is required");
  if (splits_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "splits_dir is required");
  train.validate();
  decode.validate();
}

KeyValueFile config_to_kv(const ExperimentConfig& config) {
  KeyValueFile kv;
  kv.set("source", config.source_path.string());
  kv.set("target", config.target_path.string());
  kv.set("source_lang", config.source_lang);
  kv.set("target_lang", config.target_lang);
  kv.set("direction", config.direction);
  kv.set("splits_dir", config.splits_dir.string());
  kv.set("valid_size", std::to_string(config.valid_size));
  kv.set("test_size", std::to_string(config.test_size));
  kv.set("split_seed", std::to_string(config.split_seed));
  kv.set("sizes", join_sizes(config.sizes));
  std::string conditions;
  for (std::size_t i = 0; i < config.conditions.size(); ++i) {
    conditions += (i ? "," : "") + condition_name(config.conditions[i]);
  }
  kv.set("conditions", conditions);
  kv.set("bpe_vocab_size", std::to_string(config.bpe_vocab_size));
  kv.set("bpe_min_pair_freq", std::to_string(config.bpe_min_pair_freq));
  kv.set("word_vocab_size", std::to_string(config.word_vocab_size));
  kv.set("embed_dim", std::to_string(config.model.embed_dim));
  kv.set("hidden", std::to_string(config.model.hidden));
  kv.set("dropout", fmt_double("%.17g", config.model.dropout));
  kv.set("attention", model::attention_name(config.model.attention_score));
  kv.set("lr", fmt_double("%.17g", config.train.lr));
  kv.set("beta1", fmt_double("%.17g", config.train.beta1));
  kv.set("beta2", fmt_double("%.17g", config.train.beta2));
  kv.set("adam_eps", fmt_double("%.17g", config.train.adam_eps));
  kv.set("batch_tokens", std::to_string(config.train.batch_tokens));
  kv.set("checkpoint_every", std::to_string(config.train.checkpoint_every));
  kv.set("patience", std::to_string(config.train.patience));
  kv.set("max_steps", std::to_string(config.train.max_steps));
  kv.set("clip_norm", fmt_double("%.17g", config.train.clip_norm));
  kv.set("beam", std::to_string(config.decode.beam_size));
  kv.set("length_penalty", fmt_double("%.17g", config.decode.length_penalty_alpha));
  kv.set("stop_metric", config.stop_metric);
  kv.set("curve_bleu", config.curve_bleu ? "true" : "false");
  kv.set("lowercase", config.lowercase ? "true" : "false");
  std::vector<std::size_t> seeds(config.seeds.begin(), config.seeds.end());
  kv.set("seeds", join_sizes(seeds));
  kv.set("out_dir", config.out_dir.string());
  kv.set("workers", std::to_string(config.workers));
  return kv;
}

ExperimentConfig config_from_kv(const KeyValueFile& kv) {
  ExperimentConfig c;
  c.source_path = kv.get_string("source", "");
  c.target_path = kv.get_string("target", "");
  c.source_lang = kv.get_string("source_lang", c.source_lang);
  c.target_lang = kv.get_string("target_lang", c.target_lang);
  c.direction = kv.get_string("direction", c.source_lang + "-" + c.target_lang);
  c.splits_dir = kv.get_string("splits_dir", "");
  c.valid_size = static_cast<std::size_t>(kv.get_int("valid_size", 16000));
  c.test_size = static_cast<std::size_t>(kv.get_int("test_size", 7000));
  c.split_seed = static_cast<std::uint64_t>(kv.get_int("split_seed", 1));
  for (auto s : kv.get_int_list("sizes", {})) {
    if (s <= 0) throw Error(ErrorCode::kInvalidArgument, "training size must be > 0");
    c.sizes.push_back(static_cast<std::size_t>(s));
  }
  if (auto conditions = kv.get("conditions")) {
    c.conditions.clear();
    for (const auto& name : split_commas(*conditions)) c.conditions.push_back(parse_condition(name));
  }
  c.bpe_vocab_size = static_cast<std::size_t>(kv.get_int("bpe_vocab_size", 8000));
  c.bpe_min_pair_freq = static_cast<std::size_t>(kv.get_int("bpe_min_pair_freq", 2));
  c.word_vocab_size = static_cast<std::size_t>(kv.get_int("word_vocab_size", 50000));
  c.model.embed_dim = static_cast<int>(kv.get_int("embed_dim", c.model.embed_dim));
  c.model.hidden = static_cast<int>(kv.get_int("hidden", c.model.hidden));
  c.model.dropout = kv.get_double("dropout", c.model.dropout);
  c.model.attention_score =
      model::parse_attention(kv.get_string("attention", model::attention_name(c.model.attention_score)));
  c.train.lr = kv.get_double("lr", c.train.lr);
  c.train.beta1 = kv.get_double("beta1", c.train.beta1);
  c.train.beta2 = kv.get_double("beta2", c.train.beta2);
  c.train.adam_eps = kv.get_double("adam_eps", c.train.adam_eps);
  c.train.batch_tokens = kv.get_int("batch_tokens", c.train.batch_tokens);
  c.train.checkpoint_every = kv.get_int("checkpoint_every", c.train.checkpoint_every);
  c.train.patience = static_cast<int>(kv.get_int("patience", c.train.patience));
  c.train.max_steps = kv.get_int("max_steps", c.train.max_steps);
  c.train.clip_norm = kv.get_double("clip_norm", c.train.clip_norm);
  c.decode.beam_size = static_cast<int>(kv.get_int("beam", c.decode.beam_size));
  c.decode.length_penalty_alpha = kv.get_double("length_penalty", c.decode.length_penalty_alpha);
  c.stop_metric = kv.get_string("stop_metric", c.stop_metric);
  c.curve_bleu = kv.get_bool("curve_bleu", c.curve_bleu);
  c.lowercase = kv.get_bool("lowercase", c.lowercase);
  if (kv.contains("seeds")) {
    c.seeds.clear();
    for (auto s : kv.get_int_list("seeds", {})) c.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  c.out_dir = kv.get_string("out_dir", "");
  c.workers = static_cast<int>(kv.get_int("workers", 1));
  return c;
}

std::string ExperimentConfig::canonical() const {
  KeyValueFile kv = config_to_kv(*this);
  KeyValueFile filtered;
  for (const auto& [key, value] : kv.values()) {
    if (key != "out_dir" && key != "workers") filtered.set(key, value);
  }
  return filtered.to_string();
}

std::uint64_t ExperimentConfig::fingerprint() const { return fnv1a64(canonical()); }

corpus::DataSplits prepare_splits(const ExperimentConfig& config) {
  if (config.splits_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "splits_dir is required");
  const auto data = corpus::load_parallel(config.source_path, config.target_path,
                                          config.source_lang, config.target_lang);
  auto splits = corpus::stratified_split(data, config.valid_size, config.test_size, config.split_seed);
  fs::create_directories(config.splits_dir);
  corpus::save_parallel(splits.valid, config.splits_dir / "valid");
  corpus::save_parallel(splits.test, config.splits_dir / "test");
  corpus::save_parallel(splits.train_pool, config.splits_dir / "train_pool");
  return splits;
}

corpus::DataSplits load_splits(const ExperimentConfig& config) {
  for (const auto& name : kSplitNames) {
    for (const char* ext : {".src", ".tgt"}) {
      const fs::path path = config.splits_dir / (name + ext);
      if (!fs::exists(path)) {
        throw Error(ErrorCode::kMissingSplits, "missing split file: " + path.string());
      }
    }
  }
  corpus::DataSplits splits;
  splits.valid = corpus::load_saved(config.splits_dir / "valid", config.source_lang, config.target_lang);
  splits.test = corpus::load_saved(config.splits_dir / "test", config.source_lang, config.target_lang);
  splits.train_pool =
      corpus::load_saved(config.splits_dir / "train_pool", config.source_lang, config.target_lang);
  return splits;
}

fs::path seed_dir(const ExperimentConfig& config, std::uint64_t seed) {
  return config.out_dir / ("seed_" + std::to_string(seed));
}

fs::path cell_dir(const ExperimentConfig& config, std::uint64_t seed, std::size_t size,
                  Condition condition) {
  return seed_dir(config, seed) / "cells" / (std::to_string(size) + "_" + condition_name(condition));
}

CellResult run_experiment(const ExperimentConfig& config, const corpus::DataSplits& splits,
                          const corpus::ParallelCorpus& train_subset, Condition condition,
                          std::uint64_t seed) {
  CellResult cell;
  cell.size = train_subset.size();
  cell.condition = condition;
  cell.seed = seed;
  const fs::path dir = cell_dir(config, seed, cell.size, condition);
  fs::create_directories(dir);
  spdlog::info("cell size={} condition={} seed={}: start", cell.size, condition_name(condition), seed);

  subword::BpeModel src_model, tgt_model;
  if (condition == Condition::kSubword) {
    auto lines = train_subset.source_lines();
    const auto tgt_lines = train_subset.target_lines();
    lines.insert(lines.end(), tgt_lines.begin(), tgt_lines.end());
    src_model = subword::train_bpe(lines, config.bpe_vocab_size, config.bpe_min_pair_freq);
    tgt_model = src_model;
  } else {
    src_model = subword::word_model(
        subword::build_word_vocab(train_subset.source_lines(), config.word_vocab_size));
    tgt_model = subword::word_model(
        subword::build_word_vocab(train_subset.target_lines(), config.word_vocab_size));
  }
  subword::save_model(src_model, dir / "source.model");
  subword::save_model(tgt_model, dir / "target.model");

  const auto train_pairs = tokenize(src_model, tgt_model, train_subset);
  const auto valid_pairs = tokenize(src_model, tgt_model, splits.valid);
  if (train_pairs.empty()) throw Error(ErrorCode::kEmptySplit, "training subset encodes to nothing");

  model::ModelConfig model_config = config.model;
  model_config.src_vocab_size = static_cast<int>(src_model.vocab().size());
  model_config.tgt_vocab_size = static_cast<int>(tgt_model.vocab().size());
  training::TrainConfig train_config = config.train;
  train_config.seed = seed;

  const auto test_sources = splits.test.source_lines();
  const auto test_refs = splits.test.target_lines();
  const auto valid_sources = splits.valid.source_lines();
  const auto valid_refs = splits.valid.target_lines();
  auto score_on = [&](const model::Parameters& params, const std::vector<std::string>& sources,
                      const std::vector<std::string>& refs) {
    const auto hyps = decoding::translate_lines(params, src_model, tgt_model, sources, config.decode);
    return bleu::corpus_bleu(hyps, refs, config.lowercase).score;
  };

  std::map<std::int64_t, double> checkpoint_bleu;
  training::TrainHooks hooks;
  hooks.checkpoint_dir = dir / "checkpoints";
  if (config.stop_metric == "bleu") {
    hooks.evaluator = [&](const model::Parameters& params, std::int64_t) {
      return -score_on(params, valid_sources, valid_refs);
    };
  }
  if (config.curve_bleu) {
    hooks.on_checkpoint = [&](const training::CheckpointRecord& record,
                              const model::Parameters& params) {
      checkpoint_bleu[record.step] = score_on(params, test_sources, test_refs);
    };
  }

  const auto result = training::train(train_pairs, valid_pairs, model_config, train_config, hooks);

  const auto hyps =
      decoding::translate_lines(result.best.params, src_model, tgt_model, test_sources, config.decode);
  write_file_atomic(dir / "hyp.txt", join_lines(hyps));
  cell.bleu = bleu::corpus_bleu(hyps, test_refs, config.lowercase);
  for (const auto& record : result.records) {
    CurvePoint p{record.step, record.valid_metric, std::nullopt};
    if (auto it = checkpoint_bleu.find(record.step); it != checkpoint_bleu.end()) p.test_bleu = it->second;
    cell.curve.push_back(p);
  }
  cell.steps = result.last.step;
  cell.early_stopped = result.early_stopped;
  cell.ok = true;

  write_file_atomic(dir / "curve.csv", curve_csv(cell.curve));
  result_to_kv(cell).write(dir / "result.txt");
  spdlog::info("cell size={} condition={} seed={}: {}", cell.size, condition_name(condition), seed,
               cell.bleu.format());
  return cell;
}

std::string format_size_label(std::size_t size) {
  if (size >= 1000 && size % 1000 == 0) return std::to_string(size / 1000) + "k";
  return std::to_string(size);
}

ReportTable assemble_table(const ExperimentConfig& config, std::uint64_t seed,
                           const std::vector<CellResult>& cells) {
  ReportTable table;
  table.direction = config.direction;
  table.seed = seed;
  table.beam_size = config.decode.beam_size;
  table.length_penalty = config.decode.length_penalty_alpha;
  table.config_fingerprint = config.fingerprint();
  for (std::size_t size : config.sizes) {
    ReportRow row;
    row.training_size = size;
    for (const auto& cell : cells) {
      if (cell.seed != seed || cell.size != size || !cell.ok) continue;
      if (cell.condition == Condition::kRaw) row.bleu_no_subword = cell.bleu.score;
      if (cell.condition == Condition::kSubword) row.bleu_with_subword = cell.bleu.score;
    }
    table.rows.push_back(row);
  }
  return table;
}

std::string table_csv(const ReportTable& table) {
  auto field = [](const std::optional<double>& v) { return v ? fmt_double("%.2f", *v) : std::string(); };
  std::string out = "training_size,bleu_no_subword,bleu_with_subword\n";
  for (const auto& row : table.rows) {
    out += std::to_string(row.training_size) + "," + field(row.bleu_no_subword) + "," +
           field(row.bleu_with_subword) + "\n";
  }
  return out;
}

std::string table_markdown(const ReportTable& table) {
  auto field = [](const std::optional<double>& v) { return v ? fmt_double("%.2f", *v) : std::string("—"); };
  char fingerprint[17];
  std::snprintf(fingerprint, sizeof(fingerprint), "%016llx",
                static_cast<unsigned long long>(table.config_fingerprint));
  std::string out = "## " + table.direction + " (seed " + std::to_string(table.seed) + ")\n\n";
  out += "config_fingerprint: " + std::string(fingerprint) + "  \n";
  out += "decoding: " + (table.beam_size == 1 ? std::string("greedy")
                                              : "beam " + std::to_string(table.beam_size)) +
         ", length_penalty " + fmt_double("%.2f", table.length_penalty) + "\n\n";
  out += "| Training size | No subword | With subword |\n";
  out += "|---|---|---|\n";
  std::vector<ReportRow> rows = table.rows;
  std::reverse(rows.begin(), rows.end());
  for (const auto& row : rows) {
    out += "| " + format_size_label(row.training_size) + " | " + field(row.bleu_no_subword) + " | " +
           field(row.bleu_with_subword) + " |\n";
  }
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "step,valid_metric,test_bleu_checkpoint\n";
  for (const auto& p : curve) {
    out += std::to_string(p.step) + "," + fmt_double("%.6f", p.valid_metric) + "," +
           (p.test_bleu ? fmt_double("%.2f", *p.test_bleu) : std::string()) + "\n";
  }
  return out;
}

void emit_report(const ExperimentConfig& config, const ReportTable& table,
                 const std::vector<CellResult>& cells) {
  const fs::path dir = seed_dir(config, table.seed);
  try {
    fs::create_directories(dir);
    write_file_atomic(dir / "report.csv", table_csv(table));
    write_file_atomic(dir / "report.md", table_markdown(table));
    for (const auto& cell : cells) {
      if (cell.seed != table.seed || !cell.ok) continue;
      write_file_atomic(dir / ("curve_" + std::to_string(cell.size) + "_" +
                               condition_name(cell.condition) + ".csv"),
                        curve_csv(cell.curve));
    }
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::kIoError, e.what());
  }
}

AblationResult run_ablation(const ExperimentConfig& config) {
  config.validate();
  const auto splits = load_splits(config);
  const auto subsets = corpus::nested_subsets(splits.train_pool, config.sizes, config.split_seed);

  struct Job {
    std::size_t subset;
    Condition condition;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto seed : config.seeds) {
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      for (auto condition : config.conditions) jobs.push_back({i, condition, seed});
    }
  }

  fs::create_directories(config.out_dir);
  KeyValueFile info = config_to_kv(config);
  info.set("started_at", utc_timestamp());
  info.write(config.out_dir / "run_info.txt");

  std::vector<CellResult> cells(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      try {
        cells[j] = run_experiment(config, splits, subsets[job.subset], job.condition, job.seed);
      } catch (const std::exception& e) {
        CellResult failed;
        failed.size = subsets[job.subset].size();
        failed.condition = job.condition;
        failed.seed = job.seed;
        failed.error = e.what();
        spdlog::error("cell size={} condition={} seed={} failed: {}", failed.size,
                      condition_name(job.condition), job.seed, failed.error);
        try {
          const fs::path dir = cell_dir(config, job.seed, failed.size, job.condition);
          fs::create_directories(dir);
          result_to_kv(failed).write(dir / "result.txt");
        } catch (const std::exception&) {
        }
        cells[j] = failed;
      }
    }
  };
  const int threads = std::min<int>(config.workers, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  AblationResult out;
  out.cells = std::move(cells);
  for (const auto& cell : out.cells) out.failed_cells += cell.ok ? 0 : 1;
  for (auto seed : config.seeds) {
    out.tables.push_back(assemble_table(config, seed, out.cells));
    emit_report(config, out.tables.back(), out.cells);
  }
  return out;
}

AblationResult collect_results(const ExperimentConfig& config) {
  config.validate();
  AblationResult out;
  for (auto seed : config.seeds) {
    for (auto size : config.sizes) {
      for (auto condition : config.conditions) {
        const fs::path dir = cell_dir(config, seed, size, condition);
        CellResult cell;
        if (fs::exists(dir / "result.txt")) {
          cell = result_from_kv(KeyValueFile::read(dir / "result.txt"));
          if (cell.ok && fs::exists(dir / "curve.csv")) cell.curve = parse_curve(read_file(dir / "curve.csv"));
        } else {
          cell.size = size;
          cell.condition = condition;
          cell.seed = seed;
          cell.error = "no result";
        }
        out.failed_cells += cell.ok ? 0 : 1;
        out.cells.push_back(cell);
      }
    }
    out.tables.push_back(assemble_table(config, seed, out.cells));
    emit_report(config, out.tables.back(), out.cells);
  }
  return out;
}

}  // namespace lrmt::harness
