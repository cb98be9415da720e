// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lrmt/bleu.hpp"
#include "lrmt/config.hpp"
#include "lrmt/corpus.hpp"
#include "lrmt/decoding.hpp"
#include "lrmt/model.hpp"
#include "lrmt/training.hpp"

namespace lrmt::harness {

enum class Condition { kRaw, kSubword };

std::string condition_name(Condition condition);
Condition parse_condition(const std::string& name);

struct ExperimentConfig {
  std::filesystem::path source_path;
  std::filesystem::path target_path;
  std::string source_lang = "fr";
  std::string target_lang = "wo";
  std::string direction = "fr-wo";

  std::filesystem::path splits_dir;
  std::size_t valid_size = 16000;
  std::size_t test_size = 7000;
  std::uint64_t split_seed = 1;

  std::vector<std::size_t> sizes;
  std::vector<Condition> conditions = {Condition::kRaw, Condition::kSubword};
  std::size_t bpe_vocab_size = 8000;
  std::size_t bpe_min_pair_freq = 2;
  std::size_t word_vocab_size = 50000;

  model::ModelConfig model;
  training::TrainConfig train;
  decoding::DecodeConfig decode;
  // "loss" (validation cross-entropy) or "bleu" (negated validation BLEU).
  std::string stop_metric = "loss";
  // Decode the test set at every checkpoint for the learning curves.
  bool curve_bleu = true;
  bool lowercase = false;

  std::vector<std::uint64_t> seeds = {1};
  std::filesystem::path out_dir;
  int workers = 1;

  void validate() const;
  // Every setting that can change results, as sorted key=value lines. Output
  // location and worker count are left out.
  std::string canonical() const;
  std::uint64_t fingerprint() const;
};

ExperimentConfig config_from_kv(const KeyValueFile& kv);
KeyValueFile config_to_kv(const ExperimentConfig& config);

// Loads the corpus, splits it and writes valid/test/train_pool under
// splits_dir.
corpus::DataSplits prepare_splits(const ExperimentConfig& config);
// Throws kMissingSplits when any split file is absent.
corpus::DataSplits load_splits(const ExperimentConfig& config);

struct CurvePoint {
  std::int64_t step = 0;
  double valid_metric = 0.0;
  std::optional<double> test_bleu;
};

struct CellResult {
  std::size_t size = 0;
  Condition condition = Condition::kRaw;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  bleu::BleuScore bleu;
  std::vector<CurvePoint> curve;
  std::int64_t steps = 0;
  bool early_stopped = false;
};

std::filesystem::path seed_dir(const ExperimentConfig& config, std::uint64_t seed);
std::filesystem::path cell_dir(const ExperimentConfig& config, std::uint64_t seed,
                               std::size_t size, Condition condition);

// Trains and evaluates one grid cell on `train_subset`, writing models,
// checkpoints, translations, curve and result files into the cell directory.
CellResult run_experiment(const ExperimentConfig& config, const corpus::DataSplits& splits,
                          const corpus::ParallelCorpus& train_subset, Condition condition,
                          std::uint64_t seed);

struct ReportRow {
  std::size_t training_size = 0;
  std::optional<double> bleu_no_subword;
  std::optional<double> bleu_with_subword;
};

struct ReportTable {
  std::string direction;
  std::uint64_t seed = 0;
  int beam_size = 1;
  double length_penalty = 0.0;
  std::uint64_t config_fingerprint = 0;
  std::vector<ReportRow> rows;  // ascending training size
};

ReportTable assemble_table(const ExperimentConfig& config, std::uint64_t seed,
                           const std::vector<CellResult>& cells);

std::string table_csv(const ReportTable& table);
std::string table_markdown(const ReportTable& table);
std::string curve_csv(const std::vector<CurvePoint>& curve);
std::string format_size_label(std::size_t size);

// Writes report.csv, report.md and curve_<size>_<condition>.csv files into
// the seed directory.
void emit_report(const ExperimentConfig& config, const ReportTable& table,
                 const std::vector<CellResult>& cells);

struct AblationResult {
  std::vector<ReportTable> tables;  // one per seed
  std::vector<CellResult> cells;
  std::size_t failed_cells = 0;
};

AblationResult run_ablation(const ExperimentConfig& config);

// Rebuilds the reports from the result files of a finished (or partial) run.
AblationResult collect_results(const ExperimentConfig& config);

}  // namespace lrmt::harness
