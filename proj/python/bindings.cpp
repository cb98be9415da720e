// Python bindings for the lrmt core.

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

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

namespace py = pybind11;
using namespace lrmt;

namespace {

using Lines = std::vector<std::string>;

corpus::ParallelCorpus make_corpus(const Lines& sources, const Lines& targets,
                                   const std::string& source_lang, const std::string& target_lang) {
  if (sources.size() != targets.size()) {
    throw Error(ErrorCode::kLengthMismatch, "source and target line counts differ");
  }
  corpus::ParallelCorpus c{{}, source_lang, target_lang};
  for (std::size_t i = 0; i < sources.size(); ++i) {
    c.pairs.push_back({static_cast<std::int64_t>(i), sources[i], targets[i]});
  }
  return c;
}

py::dict corpus_dict(const corpus::ParallelCorpus& c) {
  py::dict d;
  d["source"] = c.source_lines();
  d["target"] = c.target_lines();
  d["ids"] = c.ids();
  return d;
}

harness::ExperimentConfig config_from_dict(const py::dict& values) {
  KeyValueFile kv;
  for (const auto& [key, value] : values) kv.set(py::str(key), py::str(value));
  auto config = harness::config_from_kv(kv);
  config.validate();
  return config;
}

py::list tables_list(const harness::AblationResult& result) {
  py::list tables;
  for (const auto& table : result.tables) {
    py::dict d;
    d["seed"] = table.seed;
    d["csv"] = harness::table_csv(table);
    d["markdown"] = harness::table_markdown(table);
    py::list rows;
    for (const auto& row : table.rows) {
      rows.append(py::make_tuple(row.training_size, row.bleu_no_subword, row.bleu_with_subword));
    }
    d["rows"] = rows;
    tables.append(d);
  }
  return tables;
}

}  // namespace

PYBIND11_MODULE(_lrmt, m) {
  m.doc() = "Low-resource NMT subword ablation toolkit";
  configure_logging();

  static py::exception<Error> error_type(m, "LrmtError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  m.def("normalize_text", &corpus::normalize_text);

  m.def(
      "filter_corpus",
      [](const Lines& sources, const Lines& targets, const std::string& source_lang,
         const std::string& target_lang, const Lines& source_profile, const Lines& target_profile,
         double threshold) {
        const auto input = make_corpus(sources, targets, source_lang, target_lang);
        const std::vector<corpus::LanguageProfile> profiles = {
            corpus::build_profile(source_lang, source_profile.empty() ? sources : source_profile),
            corpus::build_profile(target_lang, target_profile.empty() ? targets : target_profile)};
        const auto [out, report] = corpus::filter_corpus(input, profiles, threshold);
        py::dict counts;
        counts["input_count"] = report.input_count;
        counts["normalized_modified"] = report.normalized_modified;
        counts["emptied_removed"] = report.emptied_removed;
        counts["same_language_removed"] = report.same_language_removed;
        counts["identical_sides_removed"] = report.identical_sides_removed;
        counts["duplicate_removed"] = report.duplicate_removed;
        counts["overlong_removed"] = report.overlong_removed;
        counts["retained"] = report.retained;
        return py::make_tuple(corpus_dict(out), counts);
      },
      py::arg("sources"), py::arg("targets"), py::arg("source_lang") = "src",
      py::arg("target_lang") = "tgt", py::arg("source_profile") = Lines{},
      py::arg("target_profile") = Lines{},
      py::arg("threshold") = corpus::kDefaultSameLanguageThreshold,
      "Normalizes and filters a parallel corpus; returns (corpus, report). Profiles default to "
      "the corpus sides.");

  m.def(
      "stratified_split",
      [](const Lines& sources, const Lines& targets, std::size_t valid_size, std::size_t test_size,
         std::uint64_t seed) {
        const auto splits = corpus::stratified_split(make_corpus(sources, targets, "src", "tgt"),
                                                     valid_size, test_size, seed);
        py::dict d;
        d["valid"] = corpus_dict(splits.valid);
        d["test"] = corpus_dict(splits.test);
        d["train_pool"] = corpus_dict(splits.train_pool);
        return d;
      },
      py::arg("sources"), py::arg("targets"), py::arg("valid_size"), py::arg("test_size"),
      py::arg("seed") = 0);

  py::class_<subword::BpeModel>(m, "BpeModel")
      .def_property_readonly("vocab_size", [](const subword::BpeModel& b) { return b.vocab().size(); })
      .def_property_readonly("merges", &subword::BpeModel::merges)
      .def_property_readonly("is_word_level",
                             [](const subword::BpeModel& b) { return b.mode() == subword::VocabMode::kWord; })
      .def("encode", [](const subword::BpeModel& b, const std::string& s) { return subword::encode(b, s); })
      .def("encode_pieces",
           [](const subword::BpeModel& b, const std::string& s) { return subword::encode_pieces(b, s); })
      .def("decode", [](const subword::BpeModel& b, const std::vector<subword::TokenId>& ids) {
        return subword::decode(b, ids);
      })
      .def("save", [](const subword::BpeModel& b, const std::filesystem::path& p) { subword::save_model(b, p); })
      .def("serialize", &subword::serialize_model)
      .def(py::self == py::self);

  m.def("train_bpe", &subword::train_bpe, py::arg("lines"), py::arg("vocab_size"),
        py::arg("min_pair_freq") = 2);
  m.def(
      "train_word_model",
      [](const Lines& lines, std::size_t max_size) {
        return subword::word_model(subword::build_word_vocab(lines, max_size));
      },
      py::arg("lines"), py::arg("max_size") = 50000);
  m.def("load_model", &subword::load_model);

  py::class_<bleu::BleuScore>(m, "BleuScore")
      .def_readonly("score", &bleu::BleuScore::score)
      .def_readonly("precisions", &bleu::BleuScore::precisions)
      .def_readonly("bp", &bleu::BleuScore::bp)
      .def_readonly("sys_len", &bleu::BleuScore::sys_len)
      .def_readonly("ref_len", &bleu::BleuScore::ref_len)
      .def("format", &bleu::BleuScore::format)
      .def("__repr__", &bleu::BleuScore::format);
  m.def("corpus_bleu", &bleu::corpus_bleu, py::arg("hypotheses"), py::arg("references"),
        py::arg("lowercase") = false);

  m.def(
      "toy_corpus",
      [](std::size_t n, std::uint64_t seed) {
        return corpus_dict(synthetic::generate_toy_corpus(n, {}, seed));
      },
      py::arg("n"), py::arg("seed") = 1);
  m.def(
      "copy_corpus",
      [](std::size_t n, int vocab, int min_len, int max_len, std::uint64_t seed) {
        return corpus_dict(synthetic::generate_copy_corpus(n, vocab, min_len, max_len, seed));
      },
      py::arg("n"), py::arg("vocab") = 30, py::arg("min_len") = 3, py::arg("max_len") = 10,
      py::arg("seed") = 1);

  m.def(
      "translate",
      [](const std::filesystem::path& checkpoint, const subword::BpeModel& src_model,
         const subword::BpeModel& tgt_model, const Lines& lines, int beam, double length_penalty) {
        const auto ckpt = training::load_checkpoint(checkpoint);
        decoding::DecodeConfig config{beam, length_penalty};
        config.validate();
        py::gil_scoped_release release;
        return decoding::translate_lines(ckpt.params, src_model, tgt_model, lines, config);
      },
      py::arg("checkpoint"), py::arg("source_model"), py::arg("target_model"), py::arg("lines"),
      py::arg("beam") = 1, py::arg("length_penalty") = 0.0);

  m.def(
      "prepare_splits",
      [](const py::dict& config) { harness::prepare_splits(config_from_dict(config)); },
      py::arg("config"), "Splits the configured corpus into splits_dir.");
  m.def(
      "run_ablation",
      [](const py::dict& values) {
        const auto config = config_from_dict(values);
        harness::AblationResult result;
        {
          py::gil_scoped_release release;
          result = harness::run_ablation(config);
        }
        return py::make_tuple(tables_list(result), result.failed_cells);
      },
      py::arg("config"),
      "Runs the size x condition grid; config keys match the CLI config file. Returns "
      "(tables, failed_cells).");
  m.def(
      "collect_results",
      [](const py::dict& values) {
        return tables_list(harness::collect_results(config_from_dict(values)));
      },
      py::arg("config"));
  m.def(
      "config_fingerprint",
      [](const py::dict& values) { return config_from_dict(values).fingerprint(); }, py::arg("config"));
}
