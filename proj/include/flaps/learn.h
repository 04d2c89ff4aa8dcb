// Copyright 2026 The FLaPS Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLAPS_LEARN_H_
#define FLAPS_LEARN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "flaps/dataset.h"
#include "flaps/random.h"

namespace flaps {

// Fully connected network: input -> tanh hidden layers -> softmax.
// No hidden layers gives multinomial logistic regression.
struct Architecture {
  int input_dim = 0;
  std::vector<int> hidden;
  int n_classes = 0;

  absl::Status Validate() const;
  bool operator==(const Architecture&) const = default;
};

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out

  bool operator==(const DenseLayer&) const = default;
};

struct ModelParams {
  Architecture arch;
  std::vector<DenseLayer> layers;

  std::size_t NumParams() const;
  // Layer by layer: weights (row-major) then bias.
  std::vector<double> Flatten() const;
  static absl::StatusOr<ModelParams> Unflatten(const Architecture& arch,
                                               std::span<const double> flat);

  bool operator==(const ModelParams&) const = default;
};

// Glorot-uniform weights, zero biases.
absl::StatusOr<ModelParams> InitModel(const Architecture& arch,
                                      std::uint64_t seed);

// Class probabilities for one example.
absl::StatusOr<std::vector<double>> Forward(const ModelParams& params,
                                            std::span<const double> x);

struct LossAndGradient {
  double loss = 0;
  std::vector<double> gradient;  // Flatten() order
};

// Mean categorical cross-entropy over data rows `batch` and its gradient.
absl::StatusOr<LossAndGradient> LossAndGrad(
    const ModelParams& params, const LabeledDataset& data,
    std::span<const std::int64_t> batch);

enum class Optimizer { kRmsProp, kSgd };

struct TrainConfig {
  Optimizer optimizer = Optimizer::kRmsProp;
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 100;
  double convergence_tol = 1e-4;
  int patience = 3;

  absl::Status Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
  ModelParams params;
  double initial_loss = 0;           // full-data loss before the first update
  std::vector<double> epoch_losses;  // mean mini-batch loss of each epoch
  bool converged = false;
};

// Mini-batch training over data rows `indices`, reshuffled every epoch.
// Stops once |loss_t - loss_{t-1}| < convergence_tol held for `patience`
// consecutive epochs (loss_0 being the initial loss), or at max_epochs.
absl::StatusOr<TrainResult> TrainUntilConverged(
    ModelParams params, const LabeledDataset& data,
    std::span<const std::int64_t> indices, const TrainConfig& config, Rng& rng);

struct Metrics {
  double loss = 0;
  double auc = 0;
  double fscore = 0;
  double accuracy = 0;

  bool operator==(const Metrics&) const = default;
};

absl::StatusOr<Metrics> Evaluate(const ModelParams& params,
                                 const LabeledDataset& test);

// ROC AUC of `scores` against binary `positive` flags, with tied scores
// sharing their mid-rank. Returns nullopt without both classes present.
std::optional<double> BinaryAuc(std::span<const double> scores,
                                std::span<const bool> positive);

// One-vs-rest AUC averaged over classes that have both positives and
// negatives (0.5 if none do). `scores` is n x n_classes, row-major.
double MacroAuc(std::span<const double> scores, std::span<const int> labels,
                int n_classes);

// Per-class F1 averaged uniformly over all classes; a class that is neither
// predicted nor present scores 0.
double MacroF1(std::span<const int> predicted, std::span<const int> labels,
               int n_classes);

// "epoch,loss" rows, epoch numbered from 1.
std::string LossTraceCsv(std::span<const double> epoch_losses);

// Big-endian: u32 input dim, u32 hidden count, u32 each hidden size,
// u32 classes, then the Flatten() vector as IEEE-754 doubles.
std::string SerializeModel(const ModelParams& params);
absl::StatusOr<ModelParams> DeserializeModel(std::string_view bytes);

}  // namespace flaps

#endif  // FLAPS_LEARN_H_
