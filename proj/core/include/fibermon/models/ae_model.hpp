// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/nn/dense.hpp"
#include "fibermon/nn/gru.hpp"
#include "fibermon/otdr/sequence.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fibermon::models {

/// Time steps seen by both models: 30 points followed by the scaled SNR.
inline constexpr std::size_t kModelSteps = otdr::kSequenceLength + 1;
/// The SNR step carries snr_db / 40.
inline constexpr double kSnrScale = 40.0;

/// [31 x 1]: the sample's points followed by snr_db / 40.
nn::Tensor build_input(const otdr::SequenceSample& sample);
/// Batched inputs [1 x 31*B] in the step-major layout of the nn kernels.
nn::Matrix build_input_batch(std::span<const otdr::SequenceSample> samples);
/// The same layout from a list of [31 x 1] tensors.
nn::Matrix stack_inputs(std::span<const nn::Tensor> inputs);

struct AeArchitecture {
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 32;
  bool operator==(const AeArchitecture&) const = default;
};

struct AeMetadata {
  double snr_min_db = 0.0;
  double snr_max_db = 30.0;
  std::uint64_t seed = 0;
  std::string config_hash;
  /// Detection threshold, set by calibration.
  std::optional<double> theta;
  bool operator==(const AeMetadata&) const = default;
};

/// GRU autoencoder. The encoder (GRU in->h1, GRU h1->h2) compresses the
/// sequence into its final h2 state Z. The decoder mirrors it: GRU h2->h2
/// starts from Z and is unrolled over zero inputs, GRU h2->h1 follows, and a
/// dense h1->1 projection reconstructs one value per step.
struct AeModel {
  AeArchitecture arch;
  nn::GruParams encoder1;
  nn::GruParams encoder2;
  nn::GruParams decoder1;
  nn::GruParams decoder2;
  nn::DenseParams output;
  AeMetadata meta;

  static AeModel zeros(const AeArchitecture& arch);
  static AeModel init(const AeArchitecture& arch, std::uint64_t seed);
  /// Same shapes, all parameters zero, no metadata; used for gradients.
  AeModel zeros_like() const { return zeros(arch); }
  void validate() const;

  template <class F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <class F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  bool operator==(const AeModel&) const = default;

 private:
  template <class Self, class F>
  static void visit_impl(Self& self, F& f) {
    self.encoder1.visit([&](const std::string& n, auto& t) { f("encoder1." + n, t); });
    self.encoder2.visit([&](const std::string& n, auto& t) { f("encoder2." + n, t); });
    self.decoder1.visit([&](const std::string& n, auto& t) { f("decoder1." + n, t); });
    self.decoder2.visit([&](const std::string& n, auto& t) { f("decoder2." + n, t); });
    self.output.visit([&](const std::string& n, auto& t) { f("output." + n, t); });
  }
};

struct AeCache {
  nn::GruSequenceCache encoder1, encoder2, decoder1, decoder2;
  nn::DenseCache output;
  Eigen::Index batch = 0;
};

/// Reconstructions [1 x 31*B] for inputs [1 x 31*B].
nn::Matrix ae_forward_batch(const AeModel& model, const nn::Matrix& inputs, AeCache* cache = nullptr);
/// Adds gradients of a loss with d/d(reconstruction) = `d_recon` into `grad`.
void ae_backward(const AeModel& model, const AeCache& cache, const nn::Matrix& d_recon, AeModel& grad);

/// Reconstruction [31 x 1] of one input from build_input.
nn::Tensor ae_forward(const AeModel& model, const nn::Tensor& input);

/// Sum of squared reconstruction errors over the 31 steps.
double anomaly_score(const AeModel& model, const otdr::SequenceSample& sample);
/// Scores of many samples, evaluated in fixed-size batches. Agrees with
/// anomaly_score on each sample up to floating-point summation order.
std::vector<double> anomaly_scores(const AeModel& model, std::span<const otdr::SequenceSample> samples);

enum class Verdict { normal, anomalous };

/// Anomalous iff score > theta. Throws ContractError for negative theta.
Verdict detect_score(double score, double theta);
Verdict detect(const AeModel& model, const otdr::SequenceSample& sample, double theta);

}  // namespace fibermon::models
