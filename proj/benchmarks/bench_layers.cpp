#include "fibermon/models/ae_model.hpp"
#include "fibermon/models/diag_model.hpp"
#include "fibermon/nn/attention.hpp"
#include "fibermon/nn/dense.hpp"
#include "fibermon/nn/gru.hpp"
#include "fibermon/nn/rng.hpp"
#include "fibermon/otdr/dataset.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace fibermon;
using nn::Matrix;

constexpr Eigen::Index kSteps = 31;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, nn::Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

// Arguments: {input size, hidden size, batch}.
void BM_GruSequenceForward(benchmark::State& state) {
  nn::Rng rng(1);
  const auto in = state.range(0), hidden = state.range(1), batch = state.range(2);
  const auto p = nn::GruParams::init(static_cast<std::size_t>(in), static_cast<std::size_t>(hidden), rng);
  const Matrix xs = random_matrix(in, kSteps * batch, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::gru_sequence_forward(p, xs, kSteps));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_GruSequenceForward)->Args({1, 64, 1})->Args({1, 64, 64})->Args({64, 32, 64});

void BM_GruSequenceBackward(benchmark::State& state) {
  nn::Rng rng(2);
  const auto in = state.range(0), hidden = state.range(1), batch = state.range(2);
  const auto p = nn::GruParams::init(static_cast<std::size_t>(in), static_cast<std::size_t>(hidden), rng);
  const Matrix xs = random_matrix(in, kSteps * batch, rng);
  nn::GruSequenceCache cache;
  const Matrix hs = nn::gru_sequence_forward(p, xs, kSteps, nullptr, &cache);
  const Matrix dh = random_matrix(hs.rows(), hs.cols(), rng);
  nn::GruParams grad = nn::GruParams::zeros(p.in(), p.hidden());
  for (auto _ : state) benchmark::DoNotOptimize(nn::gru_sequence_backward(p, cache, dh, grad));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_GruSequenceBackward)->Args({1, 64, 64})->Args({64, 32, 64});

void BM_BiGruForward(benchmark::State& state) {
  nn::Rng rng(3);
  const auto batch = state.range(0);
  const auto p = nn::BiGruParams::init(1, 64, rng);
  const Matrix xs = random_matrix(1, kSteps * batch, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::bigru_forward(p, xs, kSteps));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_BiGruForward)->Arg(1)->Arg(64);

void BM_AttentionForward(benchmark::State& state) {
  nn::Rng rng(4);
  const auto batch = state.range(0);
  const auto p = nn::AttentionParams::init(32, 32, rng);
  const Matrix hs = random_matrix(32, kSteps * batch, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::attention_forward(p, hs, kSteps));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_AttentionForward)->Arg(1)->Arg(64);

void BM_DenseSoftmax(benchmark::State& state) {
  nn::Rng rng(5);
  const auto batch = state.range(0);
  const auto p = nn::DenseParams::init(32, 4, rng);
  const Matrix x = random_matrix(32, batch, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::dense_forward(p, x, nn::Activation::softmax));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_DenseSoftmax)->Arg(64)->Arg(1024);

std::vector<otdr::SequenceSample> samples(std::size_t n) {
  auto c = otdr::GeneratorConfig::diagnosis_defaults();
  c.fault_count = n;
  return otdr::generate_dataset(c, 6).samples;
}

void BM_AnomalyScores(benchmark::State& state) {
  const auto model = models::AeModel::init({}, 7);
  const auto batch = samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(models::anomaly_scores(model, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AnomalyScores)->Arg(1)->Arg(256);

void BM_DiagnoseAll(benchmark::State& state) {
  const auto model = models::DiagModel::init({}, 8);
  const auto batch = samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(models::diagnose_all(model, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DiagnoseAll)->Arg(1)->Arg(256);

void BM_GenerateDataset(benchmark::State& state) {
  auto c = otdr::GeneratorConfig::detection_defaults();
  c.normal_count = static_cast<std::size_t>(state.range(0));
  c.fault_count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(otdr::generate_dataset(c, 9));
  state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_GenerateDataset)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
