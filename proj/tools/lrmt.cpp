// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end for the full pipeline.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "lrmt/bleu.hpp"
#include "lrmt/config.hpp"
#include "lrmt/corpus.hpp"
#include "lrmt/decoding.hpp"
#include "lrmt/error.hpp"
#include "lrmt/harness.hpp"
#include "lrmt/logging.hpp"
#include "lrmt/subword.hpp"
#include "lrmt/synthetic.hpp"
#include "lrmt/training.hpp"

namespace fs = std::filesystem;
using namespace lrmt;

namespace {

constexpr int kExitPartial = 1;
constexpr int kExitFatal = 2;

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  const std::string content = read_file(path);
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) out += line + "\n";
  write_file_atomic(path, out);
}

harness::ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  KeyValueFile kv = path.empty() ? KeyValueFile{} : KeyValueFile::read(path);
  for (const auto& o : overrides) kv.apply_override(o);
  return harness::config_from_kv(kv);
}


std::vector<training::TokenizedPair> tokenize(const subword::BpeModel& src_model,
                                              const subword::BpeModel& tgt_model,
                                              const corpus::ParallelCorpus& data) {
  const auto src = subword::encode_lines(src_model, data.source_lines());
  const auto tgt = subword::encode_lines(tgt_model, data.target_lines());
  std::vector<training::TokenizedPair> out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!src[i].empty() && !tgt[i].empty()) out.push_back({src[i], tgt[i]});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"lrmt: low-resource neural machine translation toolkit"};
  app.require_subcommand(1);

  // clean
  auto* clean = app.add_subcommand("clean", "Normalize and filter a parallel corpus");
  std::string clean_src, clean_tgt, clean_out, clean_report, clean_src_lang = "fr",
                                                              clean_tgt_lang = "wo";
  std::string src_profile, tgt_profile;
  double threshold = corpus::kDefaultSameLanguageThreshold;
  clean->add_option("--source", clean_src, "Source-side text file")->required();
  clean->add_option("--target", clean_tgt, "Target-side text file")->required();
  clean->add_option("--out-prefix", clean_out, "Writes <prefix>.src/.tgt/.ids")->required();
  clean->add_option("--report", clean_report, "Filter report path (key=value)");
  clean->add_option("--source-lang", clean_src_lang);
  clean->add_option("--target-lang", clean_tgt_lang);
  clean->add_option("--source-profile", src_profile,
                    "Sample text for the source language profile (default: the source side)");
  clean->add_option("--target-profile", tgt_profile,
                    "Sample text for the target language profile (default: the target side)");
  clean->add_option("--threshold", threshold, "Language similarity threshold");

  // split
  auto* split = app.add_subcommand("split", "Stratified valid/test/train_pool split");
  std::string split_src, split_tgt, split_out;
  std::size_t valid_size = 16000, test_size = 7000;
  std::uint64_t split_seed = 1;
  split->add_option("--source", split_src)->required();
  split->add_option("--target", split_tgt)->required();
  split->add_option("--out-dir", split_out)->required();
  split->add_option("--valid-size", valid_size);
  split->add_option("--test-size", test_size);
  split->add_option("--seed", split_seed);

  // subsets
  auto* subsets = app.add_subcommand("subsets", "Nested training subsets of the train pool");
  std::string pool_prefix, subsets_out, sizes_text;
  std::uint64_t subsets_seed = 1;
  subsets->add_option("--pool-prefix", pool_prefix, "Prefix of the train_pool files")->required();
  subsets->add_option("--sizes", sizes_text, "Comma-separated ascending sizes")->required();
  subsets->add_option("--out-dir", subsets_out)->required();
  subsets->add_option("--seed", subsets_seed);

  // bpe-train
  auto* bpe_train = app.add_subcommand("bpe-train", "Learn a BPE (or word) model");
  std::vector<std::string> bpe_inputs;
  std::size_t vocab_size = subword::kDefaultBpeVocabSize, min_pair_freq = 2;
  std::string model_out;
  bool word_mode = false;
  bpe_train->add_option("--input", bpe_inputs, "Training text file(s)")->required();
  bpe_train->add_option("--vocab-size", vocab_size);
  bpe_train->add_option("--min-pair-freq", min_pair_freq);
  bpe_train->add_option("--model-out", model_out)->required();
  bpe_train->add_flag("--word", word_mode, "Word-level vocabulary instead of BPE");

  // bpe-apply
  auto* bpe_apply = app.add_subcommand("bpe-apply", "Segment text with a model");
  std::string apply_model, apply_in, apply_out;
  bool emit_ids = false;
  bpe_apply->add_option("--model", apply_model)->required();
  bpe_apply->add_option("--input", apply_in)->required();
  bpe_apply->add_option("--output", apply_out)->required();
  bpe_apply->add_flag("--ids", emit_ids, "Write token ids instead of pieces");

  // train
  auto* train = app.add_subcommand("train", "Train one model");
  std::string train_prefix, valid_prefix, src_model_path, tgt_model_path, train_out, train_config;
  std::vector<std::string> train_sets;
  std::uint64_t train_seed = 1;
  bool resume = false;
  train->add_option("--train-prefix", train_prefix)->required();
  train->add_option("--valid-prefix", valid_prefix)->required();
  train->add_option("--source-model", src_model_path)->required();
  train->add_option("--target-model", tgt_model_path, "Defaults to the source model");
  train->add_option("--out-dir", train_out)->required();
  train->add_option("--config", train_config, "key=value settings file");
  train->add_option("--set", train_sets, "key=value override");
  train->add_option("--seed", train_seed);
  train->add_flag("--resume", resume, "Continue from <out-dir>/last.ckpt");

  // translate
  auto* translate = app.add_subcommand("translate", "Translate a file");
  std::string ckpt_path, tr_model, tr_tgt_model, tr_in, tr_out;
  decoding::DecodeConfig decode_config;
  translate->add_option("--checkpoint", ckpt_path)->required();
  translate->add_option("--model,--bpe", tr_model, "Source-side model")->required();
  translate->add_option("--target-model", tr_tgt_model, "Defaults to the source model");
  translate->add_option("--input", tr_in)->required();
  translate->add_option("--output", tr_out)->required();
  translate->add_option("--beam", decode_config.beam_size);
  translate->add_option("--length-penalty", decode_config.length_penalty_alpha);

  // score
  auto* score = app.add_subcommand("score", "Corpus BLEU");
  std::string hyp_path, ref_path;
  bool lowercase = false;
  score->add_option("--hyp", hyp_path)->required();
  score->add_option("--ref", ref_path)->required();
  score->add_flag("--lowercase", lowercase);

  // ablate / report
  auto* ablate = app.add_subcommand("ablate", "Run the size x condition grid");
  auto* report = app.add_subcommand("report", "Rebuild reports from finished cells");
  std::string grid_config;
  std::vector<std::string> grid_sets;
  bool prepare = false;
  for (auto* sub : {ablate, report}) {
    sub->add_option("--config", grid_config, "key=value experiment file")->required();
    sub->add_option("--set", grid_sets, "key=value override");
  }
  ablate->add_flag("--prepare-splits", prepare, "Split the configured corpus first");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic parallel corpus");
  std::string synth_kind = "toy", synth_out;
  std::size_t synth_n = 1000;
  std::uint64_t synth_seed = 1;
  synth->add_option("--kind", synth_kind, "toy or copy")->check(CLI::IsMember({"toy", "copy"}));
  synth->add_option("--size", synth_n);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out-prefix", synth_out, "Writes <prefix>.src and <prefix>.tgt")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFatal;
  }

  try {
    if (*clean) {
      const auto data = corpus::load_parallel(clean_src, clean_tgt, clean_src_lang, clean_tgt_lang);
      const auto src_sample = src_profile.empty() ? data.source_lines() : read_lines(src_profile);
      const auto tgt_sample = tgt_profile.empty() ? data.target_lines() : read_lines(tgt_profile);
      const std::vector<corpus::LanguageProfile> profiles = {
          corpus::build_profile(clean_src_lang, src_sample),
          corpus::build_profile(clean_tgt_lang, tgt_sample)};
      const auto [cleaned, filter_report] = corpus::filter_corpus(data, profiles, threshold);
      corpus::save_parallel(cleaned, clean_out);
      if (!clean_report.empty()) write_file_atomic(clean_report, filter_report.to_key_value());
      std::cout << filter_report.to_key_value();
    } else if (*split) {
      harness::ExperimentConfig config;
      config.source_path = split_src;
      config.target_path = split_tgt;
      config.splits_dir = split_out;
      config.valid_size = valid_size;
      config.test_size = test_size;
      config.split_seed = split_seed;
      const auto splits = harness::prepare_splits(config);
      std::cout << "valid=" << splits.valid.size() << "\ntest=" << splits.test.size()
                << "\ntrain_pool=" << splits.train_pool.size() << "\n";
    } else if (*subsets) {
      const auto pool = corpus::load_saved(pool_prefix, "src", "tgt");
      std::vector<std::size_t> sizes;
      for (auto s : parse_int_list(sizes_text)) {
        if (s <= 0) throw Error(ErrorCode::kInvalidArgument, "sizes must be positive");
        sizes.push_back(static_cast<std::size_t>(s));
      }
      const auto parts = corpus::nested_subsets(pool, sizes, subsets_seed);
      fs::create_directories(subsets_out);
      for (const auto& part : parts) {
        corpus::save_parallel(part, fs::path(subsets_out) / ("subset_" + std::to_string(part.size())));
      }
    } else if (*bpe_train) {
      std::vector<std::string> lines;
      for (const auto& path : bpe_inputs) {
        auto more = read_lines(path);
        lines.insert(lines.end(), more.begin(), more.end());
      }
      const auto model = word_mode ? subword::word_model(subword::build_word_vocab(lines, vocab_size))
                                   : subword::train_bpe(lines, vocab_size, min_pair_freq);
      subword::save_model(model, model_out);
      spdlog::info("model: {} pieces, {} merges", model.vocab().size(), model.merges().size());
    } else if (*bpe_apply) {
      const auto model = subword::load_model(apply_model);
      std::vector<std::string> out;
      for (const auto& line : read_lines(apply_in)) {
        std::string encoded;
        if (emit_ids) {
          for (auto id : subword::encode(model, line)) encoded += (encoded.empty() ? "" : " ") + std::to_string(id);
        } else {
          for (const auto& piece : subword::encode_pieces(model, line)) {
            encoded += (encoded.empty() ? "" : " ") + piece;
          }
        }
        out.push_back(encoded);
      }
      write_lines(apply_out, out);
    } else if (*train) {
      const auto config = load_config(train_config, train_sets);
      const auto src_model = subword::load_model(src_model_path);
      const auto tgt_model = tgt_model_path.empty() ? src_model : subword::load_model(tgt_model_path);
      const auto train_data = corpus::load_saved(train_prefix, "src", "tgt");
      const auto valid_data = corpus::load_saved(valid_prefix, "src", "tgt");
      model::ModelConfig model_config = config.model;
      model_config.src_vocab_size = static_cast<int>(src_model.vocab().size());
      model_config.tgt_vocab_size = static_cast<int>(tgt_model.vocab().size());
      training::TrainConfig tc = config.train;
      tc.seed = train_seed;
      training::TrainHooks hooks;
      hooks.checkpoint_dir = fs::path(train_out);
      if (resume) hooks.resume = training::load_checkpoint(fs::path(train_out) / "last.ckpt", model_config);
      const auto result = training::train(tokenize(src_model, tgt_model, train_data),
                                          tokenize(src_model, tgt_model, valid_data), model_config, tc, hooks);
      spdlog::info("finished at step {} (early stop: {})", result.last.step, result.early_stopped);
    } else if (*translate) {
      const auto src_model = subword::load_model(tr_model);
      const auto tgt_model = tr_tgt_model.empty() ? src_model : subword::load_model(tr_tgt_model);
      const auto ckpt = training::load_checkpoint(ckpt_path);
      if (ckpt.params.config.src_vocab_size != static_cast<int>(src_model.vocab().size()) ||
          ckpt.params.config.tgt_vocab_size != static_cast<int>(tgt_model.vocab().size())) {
        throw Error(ErrorCode::kFingerprintMismatch, "checkpoint vocabulary sizes do not match the models");
      }
      decode_config.validate();
      write_lines(tr_out, decoding::translate_lines(ckpt.params, src_model, tgt_model,
                                                    read_lines(tr_in), decode_config));
    } else if (*score) {
      std::cout << bleu::corpus_bleu(read_lines(hyp_path), read_lines(ref_path), lowercase).format()
                << "\n";
    } else if (*ablate) {
      const auto config = load_config(grid_config, grid_sets);
      if (prepare) harness::prepare_splits(config);
      const auto result = harness::run_ablation(config);
      for (const auto& table : result.tables) std::cout << harness::table_markdown(table) << "\n";
      if (result.failed_cells > 0) {
        spdlog::error("{} of {} cells failed", result.failed_cells, result.cells.size());
        return kExitPartial;
      }
    } else if (*report) {
      const auto config = load_config(grid_config, grid_sets);
      const auto result = harness::collect_results(config);
      for (const auto& table : result.tables) std::cout << harness::table_markdown(table) << "\n";
      if (result.failed_cells > 0) return kExitPartial;
    } else if (*synth) {
      const auto data = synth_kind == "toy"
                            ? synthetic::generate_toy_corpus(synth_n, {}, synth_seed)
                            : synthetic::generate_copy_corpus(synth_n, 30, 3, 10, synth_seed);
      write_lines(synth_out + ".src", data.source_lines());
      write_lines(synth_out + ".tgt", data.target_lines());
    }
  } catch (const Error& e) {
    spdlog::error("{}: {}", error_code_name(e.code()), e.what());
    return kExitFatal;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFatal;
  }
  return 0;
}
