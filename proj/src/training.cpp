// Copyright 2026 The lrmt Authors
// SPDX-License-Identifier: Apache-2.0

#include "lrmt/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lrmt/config.hpp"
#include "lrmt/error.hpp"
#include "lrmt/logging.hpp"
#include "lrmt/rng.hpp"

namespace lrmt::training {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'L', 'R', 'M', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kDtypeF64 = 2;

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    buf_.append(p, sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    buf_.append(static_cast<const char*>(data), n);
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& buf) : buf_(buf) {}
  template <typename T>
  T get() {
    T value;
    need(sizeof(T));
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void get_bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw Error(ErrorCode::kCorrupt, "checkpoint truncated");
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

void write_tensors(Writer& w, const Parameters& p) {
  auto views = model::tensors(const_cast<Parameters&>(p));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(views.size()));
  for (const auto& t : views) {
    w.put_string(t.name);
    w.put<std::uint32_t>(kDtypeF64);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(t.rows));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(t.cols));
    w.put_bytes(t.data, static_cast<std::size_t>(t.size()) * sizeof(double));
  }
}

void read_tensors(Reader& r, Parameters& p) {
  auto views = model::tensors(p);
  const auto count = r.get<std::uint32_t>();
  if (count != views.size()) throw Error(ErrorCode::kCorrupt, "tensor count mismatch");
  for (auto& t : views) {
    if (r.get_string() != t.name) throw Error(ErrorCode::kCorrupt, "tensor name mismatch");
    if (r.get<std::uint32_t>() != kDtypeF64) throw Error(ErrorCode::kCorrupt, "bad dtype");
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (rows != static_cast<std::uint64_t>(t.rows) || cols != static_cast<std::uint64_t>(t.cols)) {
      throw Error(ErrorCode::kCorrupt, "tensor shape mismatch for " + t.name);
    }
    r.get_bytes(t.data, static_cast<std::size_t>(t.size()) * sizeof(double));
  }
}

std::string format_double(double x, int precision = 6) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(precision);
  out << x;
  return out.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      batch_tokens < 1 || patience < 1 || checkpoint_every < 1 || max_steps < 1 ||
      !(clip_norm > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training configuration: " + canonical());
  }
}

std::string TrainConfig::canonical() const {
  std::ostringstream out;
  out.precision(17);
  out << "lr=" << lr << ";beta1=" << beta1 << ";beta2=" << beta2 << ";adam_eps=" << adam_eps
      << ";batch_tokens=" << batch_tokens << ";checkpoint_every=" << checkpoint_every
      << ";patience=" << patience << ";max_steps=" << max_steps << ";clip_norm=" << clip_norm
      << ";seed=" << seed;
  return out.str();
}

OptimizerState init_optimizer(const Parameters& params) {
  return {model::zeros_like(params), model::zeros_like(params), 0};
}

void adam_step(Parameters& params, const Gradients& grads, OptimizerState& state,
               const TrainConfig& config) {
  if (!model::same_shapes(params, grads) || !model::same_shapes(params, state.m) ||
      !model::same_shapes(params, state.v)) {
    throw Error(ErrorCode::kShapeMismatch, "parameters, gradients and optimizer state differ");
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  auto pv = model::tensors(params);
  auto gv = model::tensors(const_cast<Gradients&>(grads));
  auto mv = model::tensors(state.m);
  auto vv = model::tensors(state.v);
  for (std::size_t k = 0; k < pv.size(); ++k) {
    const Eigen::Index n = pv[k].size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = gv[k].data[i];
      double& m = mv[k].data[i];
      double& v = vv[k].data[i];
      m = config.beta1 * m + (1.0 - config.beta1) * g;
      v = config.beta2 * v + (1.0 - config.beta2) * g * g;
      const double m_hat = m / correction1;
      const double v_hat = v / correction2;
      pv[k].data[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
  }
}

double global_norm(const Gradients& grads) {
  double sq = 0.0;
  for (const auto& t : model::tensors(const_cast<Gradients&>(grads))) {
    for (Eigen::Index i = 0; i < t.size(); ++i) sq += t.data[i] * t.data[i];
  }
  return std::sqrt(sq);
}

double clip_by_global_norm(Gradients& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto& t : model::tensors(grads)) {
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] *= factor;
    }
  }
  return norm;
}

std::int64_t batch_cost(const std::vector<TokenizedPair>& pairs,
                        const std::vector<std::size_t>& indices) {
  std::size_t longest = 0;
  for (auto i : indices) longest = std::max({longest, pairs[i].src.size(), pairs[i].tgt.size()});
  return static_cast<std::int64_t>(indices.size() * longest);
}

std::vector<BatchPlan> make_batches(const std::vector<TokenizedPair>& pairs,
                                    std::int64_t batch_tokens, std::uint64_t seed) {
  std::vector<BatchPlan> batches;
  if (pairs.empty()) return batches;
  Rng rng(seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  // Bucket by source length; the shuffle above varies bucket contents.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs[a].src.size() < pairs[b].src.size();
  });

  BatchPlan current;
  std::size_t longest = 0;
  auto flush = [&]() {
    if (!current.indices.empty()) batches.push_back(std::move(current));
    current = BatchPlan{};
    longest = 0;
  };
  for (auto i : order) {
    const std::size_t len = std::max(pairs[i].src.size(), pairs[i].tgt.size());
    if (static_cast<std::int64_t>(len) > batch_tokens) {
      flush();
      batches.push_back(BatchPlan{{i}, true});
      continue;
    }
    const std::size_t new_longest = std::max(longest, len);
    if (static_cast<std::int64_t>((current.indices.size() + 1) * new_longest) > batch_tokens) {
      flush();
    }
    current.indices.push_back(i);
    longest = std::max(longest, len);
  }
  flush();
  rng.shuffle(std::span<BatchPlan>(batches));
  return batches;
}

model::Batch build_batch(const std::vector<TokenizedPair>& pairs, const BatchPlan& plan) {
  std::vector<std::vector<TokenId>> src, tgt;
  src.reserve(plan.indices.size());
  tgt.reserve(plan.indices.size());
  for (auto i : plan.indices) {
    src.push_back(pairs[i].src);
    tgt.push_back(pairs[i].tgt);
  }
  return model::make_batch(src, tgt);
}

bool should_stop(const std::vector<double>& metric_history, int patience) {
  if (metric_history.empty()) return false;
  std::size_t best = 0;
  for (std::size_t i = 1; i < metric_history.size(); ++i) {
    if (metric_history[i] < metric_history[best]) best = i;
  }
  return metric_history.size() - 1 - best >= static_cast<std::size_t>(patience);
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(ckpt.fingerprint);
  w.put_string(ckpt.params.config.canonical());
  w.put<std::int64_t>(ckpt.step);
  w.put<std::int64_t>(ckpt.optimizer.t);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.history.size()));
  for (const auto& [step, value] : ckpt.history) {
    w.put<std::int64_t>(step);
    w.put<double>(value);
  }
  write_tensors(w, ckpt.params);
  write_tensors(w, ckpt.optimizer.m);
  write_tensors(w, ckpt.optimizer.v);
  const std::uint64_t checksum = fnv1a64(w.buffer());
  w.put<std::uint64_t>(checksum);
  return std::move(w.buffer());
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kCorrupt, "not an lrmt checkpoint");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, "checkpoint version " + std::to_string(version) +
                                                 ", expected " +
                                                 std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < sizeof(std::uint64_t) ||
      fnv1a64(bytes.substr(0, bytes.size() - sizeof(std::uint64_t))) !=
          [&] {
            std::uint64_t stored;
            std::memcpy(&stored, bytes.data() + bytes.size() - sizeof(stored), sizeof(stored));
            return stored;
          }()) {
    throw Error(ErrorCode::kCorrupt, "checkpoint checksum mismatch");
  }
  Checkpoint ckpt;
  ckpt.fingerprint = r.get<std::uint64_t>();
  const auto config = model::parse_model_config(r.get_string());
  if (config.fingerprint() != ckpt.fingerprint) {
    throw Error(ErrorCode::kCorrupt, "stored fingerprint does not match stored config");
  }
  ckpt.step = r.get<std::int64_t>();
  const auto t = r.get<std::int64_t>();
  const auto hist = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < hist; ++i) {
    const auto step = r.get<std::int64_t>();
    const auto value = r.get<double>();
    ckpt.history.emplace_back(step, value);
  }
  try {
    ckpt.params = model::zero_parameters(config);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, e.what());
  }
  ckpt.optimizer = init_optimizer(ckpt.params);
  ckpt.optimizer.t = t;
  read_tensors(r, ckpt.params);
  read_tensors(r, ckpt.optimizer.m);
  read_tensors(r, ckpt.optimizer.v);
  if (r.pos() + sizeof(std::uint64_t) != bytes.size()) {
    throw Error(ErrorCode::kCorrupt, "trailing bytes in checkpoint");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.fingerprint != expected.fingerprint()) {
    throw Error(ErrorCode::kFingerprintMismatch,
                "checkpoint config [" + ckpt.params.config.canonical() + "] differs from [" +
                    expected.canonical() + "]");
  }
  return ckpt;
}

double evaluate_loss(const Parameters& params, const std::vector<TokenizedPair>& pairs,
                     std::int64_t batch_tokens) {
  double total = 0.0;
  std::int64_t tokens = 0;
  for (const auto& plan : make_batches(pairs, batch_tokens, 0)) {
    const auto result = model::forward_loss(params, build_batch(pairs, plan));
    total += result.loss * static_cast<double>(result.tokens);
    tokens += result.tokens;
  }
  return tokens > 0 ? total / static_cast<double>(tokens) : 0.0;
}

std::string format_log_line(const CheckpointRecord& record) {
  return "step=" + std::to_string(record.step) + " train_loss=" + format_double(record.train_loss) +
         " valid_loss=" + format_double(record.valid_metric) +
         " best=" + (record.best ? "true" : "false");
}

TrainResult train(const std::vector<TokenizedPair>& train_pairs,
                  const std::vector<TokenizedPair>& valid_pairs, const ModelConfig& model_config,
                  const TrainConfig& train_config, const TrainHooks& hooks) {
  train_config.validate();
  model_config.validate();
  if (train_pairs.empty()) throw Error(ErrorCode::kEmptySplit, "empty training set");
  if (valid_pairs.empty() && !hooks.evaluator) {
    throw Error(ErrorCode::kEmptySplit, "empty validation set");
  }
  const std::uint64_t fingerprint = model_config.fingerprint();

  Checkpoint state;
  if (hooks.resume) {
    state = *hooks.resume;
    if (state.fingerprint != fingerprint) {
      throw Error(ErrorCode::kFingerprintMismatch, "resume checkpoint has a different config");
    }
  } else {
    state.params = model::init_parameters(model_config, mix_seed(train_config.seed, 1));
    state.optimizer = init_optimizer(state.params);
    state.fingerprint = fingerprint;
  }

  TrainResult result;
  std::vector<double> metrics;
  for (const auto& [step, value] : state.history) metrics.push_back(value);
  std::size_t best_index = 0;
  for (std::size_t i = 1; i < metrics.size(); ++i) {
    if (metrics[i] < metrics[best_index]) best_index = i;
  }
  result.best = state;
  bool have_best = !metrics.empty();

  std::ofstream log_file;
  if (hooks.checkpoint_dir) {
    std::filesystem::create_directories(*hooks.checkpoint_dir);
    log_file.open(*hooks.checkpoint_dir / "train.log", hooks.resume ? std::ios::app : std::ios::trunc);
  }

  auto checkpoint = [&](double train_loss) {
    const double metric = hooks.evaluator
                              ? hooks.evaluator(state.params, state.step)
                              : evaluate_loss(state.params, valid_pairs, train_config.batch_tokens);
    const bool improved = metrics.empty() || metric < metrics[best_index];
    metrics.push_back(metric);
    state.history.emplace_back(state.step, metric);
    if (improved) best_index = metrics.size() - 1;
    CheckpointRecord record{state.step, train_loss, metric, improved};
    result.records.push_back(record);
    if (improved) {
      result.best = state;
      have_best = true;
    }
    const std::string line = format_log_line(record);
    spdlog::info("{}", line);
    if (hooks.checkpoint_dir) {
      log_file << line << '\n';
      log_file.flush();
      save_checkpoint(state, *hooks.checkpoint_dir / "last.ckpt");
      if (improved) save_checkpoint(state, *hooks.checkpoint_dir / "best.ckpt");
    }
    if (hooks.on_checkpoint) hooks.on_checkpoint(record, state.params);
    return should_stop(metrics, train_config.patience);
  };

  // Steps already taken (on resume) are skipped batch-for-batch so the run
  // continues exactly where an uninterrupted run would be.
  std::int64_t to_skip = state.step;
  double loss_sum = 0.0;
  std::int64_t loss_tokens = 0;
  bool stop = state.step >= train_config.max_steps;
  for (std::uint64_t epoch = 0; !stop; ++epoch) {
    const auto plans =
        make_batches(train_pairs, train_config.batch_tokens, mix_seed(train_config.seed, 100 + epoch));
    for (const auto& plan : plans) {
      if (to_skip > 0) {
        --to_skip;
        continue;
      }
      const auto batch = build_batch(train_pairs, plan);
      state.step += 1;
      auto lg = model::loss_and_gradients(state.params, batch, true,
                                          mix_seed(train_config.seed, 1'000'000 + state.step));
      clip_by_global_norm(lg.grads, train_config.clip_norm);
      adam_step(state.params, lg.grads, state.optimizer, train_config);
      loss_sum += lg.result.loss * static_cast<double>(lg.result.tokens);
      loss_tokens += lg.result.tokens;

      const bool at_max = state.step >= train_config.max_steps;
      if (state.step % train_config.checkpoint_every == 0 || at_max) {
        const double train_loss = loss_tokens > 0 ? loss_sum / static_cast<double>(loss_tokens) : 0.0;
        loss_sum = 0.0;
        loss_tokens = 0;
        if (checkpoint(train_loss)) {
          result.early_stopped = true;
          stop = true;
        }
      }
      if (at_max) stop = true;
      if (stop) break;
    }
  }
  if (!have_best) result.best = state;
  result.last = state;
  return result;
}

}  // namespace lrmt::training
