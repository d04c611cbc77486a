// SPDX-License-Identifier: Apache-2.0
#include "fibermon/train_eval/training.hpp"

#include "fibermon/error.hpp"
#include "fibermon/nn/losses.hpp"
#include "fibermon/nn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fibermon::train_eval {

using nn::Matrix;
using otdr::SequenceSample;
using Index = Eigen::Index;

namespace {

constexpr std::size_t kEvalBatch = 256;

template <class Model>
std::vector<nn::Tensor*> parameter_list(Model& m) {
  std::vector<nn::Tensor*> out;
  m.visit([&](const std::string&, nn::Tensor& t) { out.push_back(&t); });
  return out;
}

void clip_gradients(const std::vector<nn::Tensor*>& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (const nn::Tensor* g : grads) sq += g->vec().squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (nn::Tensor* g : grads) g->vec() *= scale;
}

std::vector<SequenceSample> gather(std::span<const SequenceSample> samples, std::span<const std::size_t> idx) {
  std::vector<SequenceSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(samples[i]);
  return out;
}

/// Shared epoch/batch/early-stopping loop. `step(model, batch, grad)` adds the
/// gradient of the batch-mean loss into grad and returns that loss.
template <class Model, class Step, class EvalLoss>
TrainHistory run_training(Model& model, std::span<const SequenceSample> train, std::span<const SequenceSample> val,
                          const TrainConfig& config, const char* stream, Step step, EvalLoss eval_loss,
                          const EpochCallback& on_epoch) {
  TrainHistory history;
  if (config.epochs == 0 || train.empty()) return history;

  Model grad = model.zeros_like();
  const std::vector<nn::Tensor*> params = parameter_list(model);
  const std::vector<nn::Tensor*> grads = parameter_list(grad);
  const std::vector<const nn::Tensor*> const_grads(grads.begin(), grads.end());
  nn::AdamState adam{config.adam, {}, {}, 0};

  const bool early_stop = !val.empty() && config.patience > 0;
  Model best = model;
  double best_val = 0.0;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    nn::Rng rng(nn::derive_seed(config.seed, stream, epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
    }

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      const auto batch = gather(train, std::span<const std::size_t>(order).subspan(start, n));
      for (nn::Tensor* g : grads) g->fill(0.0);
      const double loss = step(model, batch, grad);
      if (!std::isfinite(loss)) throw ContractError("training diverged: non-finite loss in epoch " + std::to_string(epoch));
      loss_sum += loss * static_cast<double>(n);
      clip_gradients(grads, config.clip_norm);
      nn::adam_step(adam, params, const_grads);
    }
    history.train_loss.push_back(loss_sum / static_cast<double>(train.size()));

    if (!val.empty()) {
      const double v = eval_loss(model, val);
      history.val_loss.push_back(v);
      if (epoch == 1 || v < best_val) {
        best_val = v;
        history.best_epoch = epoch;
        since_best = 0;
        if (early_stop) best = model;
      } else {
        ++since_best;
      }
    } else {
      history.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(epoch, history);
    if (early_stop && since_best >= config.patience) {
      history.stopped_early = epoch < config.epochs;
      break;
    }
  }
  if (early_stop) {
    model = std::move(best);
  } else {
    history.best_epoch = history.train_loss.size();
  }
  return history;
}

void require_normals(std::span<const SequenceSample> samples, const char* what) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].validate();
    if (samples[i].is_fault()) {
      throw ContractError(std::string("autoencoder ") + what + " sample " + std::to_string(i) + " is labeled " +
                          std::string(otdr::to_string(samples[i].label)) + "; only normal samples are allowed");
    }
  }
}

void require_faults(std::span<const SequenceSample> samples, const char* what) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].validate();
    if (!samples[i].is_fault() || !samples[i].position_index) {
      throw ContractError(std::string("diagnosis ") + what + " sample " + std::to_string(i) +
                          " is not a faulty sample with a position");
    }
  }
}

Matrix position_targets(std::span<const SequenceSample> samples) {
  Matrix t(1, static_cast<Index>(samples.size()));
  for (std::size_t b = 0; b < samples.size(); ++b) t(0, static_cast<Index>(b)) = models::position_target(*samples[b].position_index);
  return t;
}

std::vector<std::size_t> class_targets(std::span<const SequenceSample> samples) {
  std::vector<std::size_t> c;
  c.reserve(samples.size());
  for (const auto& s : samples) c.push_back(otdr::fault_class_index(s.label));
  return c;
}

std::vector<SequenceSample> normals_only(const std::vector<SequenceSample>& samples) {
  std::vector<SequenceSample> out;
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(out), [](const auto& s) { return !s.is_fault(); });
  return out;
}

}  // namespace

double ae_loss(const models::AeModel& model, std::span<const SequenceSample> samples) {
  if (samples.empty()) return 0.0;
  const std::vector<double> scores = models::anomaly_scores(model, samples);
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(samples.size());
}

DiagLoss diag_loss(const models::DiagModel& model, std::span<const SequenceSample> samples, double lambda1,
                   double lambda2) {
  DiagLoss out;
  if (samples.empty()) return out;
  for (std::size_t start = 0; start < samples.size(); start += kEvalBatch) {
    const auto chunk = samples.subspan(start, std::min(kEvalBatch, samples.size() - start));
    const models::DiagBatchOutput res = models::diag_forward_batch(model, models::build_input_batch(chunk));
    const double n = static_cast<double>(chunk.size());
    out.classification += nn::cross_entropy_batch(res.class_probs, class_targets(chunk)) * n;
    out.position += nn::mse_batch(position_targets(chunk), res.position, static_cast<Index>(chunk.size())) * n;
  }
  out.classification /= static_cast<double>(samples.size());
  out.position /= static_cast<double>(samples.size());
  out.total = nn::combined_loss(out.classification, out.position, lambda1, lambda2);
  return out;
}

AeTrainResult train_ae(std::span<const SequenceSample> train, std::span<const SequenceSample> val,
                       const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  require_normals(train, "training");
  require_normals(val, "validation");
  AeTrainResult r{models::AeModel::init(config.ae_architecture(), config.seed), {}};
  if (!train.empty()) {
    const auto [lo, hi] = std::minmax_element(train.begin(), train.end(),
                                              [](const auto& a, const auto& b) { return a.snr_db < b.snr_db; });
    r.model.meta.snr_min_db = lo->snr_db;
    r.model.meta.snr_max_db = hi->snr_db;
  }
  const auto step = [](const models::AeModel& m, const std::vector<SequenceSample>& batch, models::AeModel& grad) {
    const Matrix x = models::build_input_batch(batch);
    models::AeCache cache;
    const Matrix y = models::ae_forward_batch(m, x, &cache);
    Matrix d;
    const double loss = nn::mse_batch(x, y, static_cast<Index>(batch.size()), &d);
    models::ae_backward(m, cache, d, grad);
    return loss;
  };
  r.history = run_training(r.model, train, val, config, "shuffle.ae", step, ae_loss, on_epoch);
  return r;
}

AeTrainResult train_ae(const otdr::Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch) {
  const auto train = dataset.subset(otdr::Split::train);
  const auto val = normals_only(dataset.subset(otdr::Split::val));
  return train_ae(train, val, config, on_epoch);
}

DiagTrainResult train_diag(std::span<const SequenceSample> train, std::span<const SequenceSample> val,
                           const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  require_faults(train, "training");
  require_faults(val, "validation");
  DiagTrainResult r{models::DiagModel::init(config.diag_architecture(), config.seed), {}};
  r.model.meta.lambda1 = config.lambda1;
  r.model.meta.lambda2 = config.lambda2;
  const double l1 = config.lambda1;
  const double l2 = config.lambda2;
  const auto step = [l1, l2](const models::DiagModel& m, const std::vector<SequenceSample>& batch,
                             models::DiagModel& grad) {
    models::DiagCache cache;
    const models::DiagBatchOutput out = models::diag_forward_batch(m, models::build_input_batch(batch), &cache);
    Matrix d_probs;
    Matrix d_pos;
    const double ce = nn::cross_entropy_batch(out.class_probs, class_targets(batch), &d_probs);
    const double mse = nn::mse_batch(position_targets(batch), out.position, static_cast<Index>(batch.size()), &d_pos);
    d_probs *= l1;
    d_pos *= l2;
    models::diag_backward(m, cache, d_probs, d_pos, grad);
    return nn::combined_loss(ce, mse, l1, l2);
  };
  const auto eval = [l1, l2](const models::DiagModel& m, std::span<const SequenceSample> s) {
    return diag_loss(m, s, l1, l2).total;
  };
  r.history = run_training(r.model, train, val, config, "shuffle.diag", step, eval, on_epoch);
  return r;
}

DiagTrainResult train_diag(const otdr::Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch) {
  const auto train = dataset.subset(otdr::Split::train);
  const auto val = dataset.subset(otdr::Split::val);
  return train_diag(train, val, config, on_epoch);
}

}  // namespace fibermon::train_eval
