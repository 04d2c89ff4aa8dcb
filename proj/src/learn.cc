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

#include "flaps/learn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

#include "absl/status/status.h"
#include "flaps/status_macros.h"
#include "flaps/str_util.h"
#include "flaps/wire.h"

namespace flaps {
namespace {

std::vector<int> LayerSizes(const Architecture& arch) {
  std::vector<int> sizes = {arch.input_dim};
  sizes.insert(sizes.end(), arch.hidden.begin(), arch.hidden.end());
  sizes.push_back(arch.n_classes);
  return sizes;
}

// Activations of every layer for one example; the last entry holds logits.
struct Trace {
  std::vector<std::vector<double>> activations;
};

void ForwardTrace(const ModelParams& params, std::span<const double> x,
                  Trace& trace) {
  trace.activations.resize(params.layers.size() + 1);
  trace.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    const std::vector<double>& in = trace.activations[l];
    std::vector<double>& out = trace.activations[l + 1];
    out.assign(layer.bias.begin(), layer.bias.end());
    for (int o = 0; o < layer.out; ++o) {
      const double* w = &layer.weights[static_cast<std::size_t>(o) * layer.in];
      double s = 0;
      for (int i = 0; i < layer.in; ++i) s += w[i] * in[i];
      out[o] += s;
    }
    if (l + 1 < params.layers.size()) {
      for (double& v : out) v = std::tanh(v);
    }
  }
}

// Turns logits into probabilities in place and returns log-sum-exp.
double SoftmaxInPlace(std::vector<double>& z) {
  const double max = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (double& v : z) {
    v = std::exp(v - max);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return max + std::log(sum);
}

absl::Status CheckData(const ModelParams& params, const LabeledDataset& data) {
  if (data.dim != static_cast<std::size_t>(params.arch.input_dim)) {
    return absl::InvalidArgumentError(StrCat("data has dimension ", data.dim,
                                             ", model expects ",
                                             params.arch.input_dim));
  }
  for (int label : data.labels) {
    if (label < 0 || label >= params.arch.n_classes) {
      return absl::InvalidArgumentError(
          StrCat("label ", label, " outside model's ", params.arch.n_classes,
                 " classes"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status Architecture::Validate() const {
  if (input_dim <= 0 || n_classes < 2) {
    return absl::InvalidArgumentError(
        StrCat("architecture needs input_dim > 0 and at least 2 classes, got ",
               input_dim, " and ", n_classes));
  }
  for (int h : hidden) {
    if (h <= 0)
      return absl::InvalidArgumentError("hidden sizes must be positive");
  }
  return absl::OkStatus();
}

std::size_t ModelParams::NumParams() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> ModelParams::Flatten() const {
  std::vector<double> flat;
  flat.reserve(NumParams());
  for (const DenseLayer& l : layers) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

absl::StatusOr<ModelParams> ModelParams::Unflatten(
    const Architecture& arch, std::span<const double> flat) {
  FLAPS_RETURN_IF_ERROR(arch.Validate());
  const std::vector<int> sizes = LayerSizes(arch);
  ModelParams params;
  params.arch = arch;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    const std::size_t nw = static_cast<std::size_t>(layer.in) * layer.out;
    if (offset + nw + layer.out > flat.size()) {
      return absl::InvalidArgumentError(
          StrCat("flat vector of ", flat.size(),
                 " is too short for the architecture"));
    }
    layer.weights.assign(flat.begin() + offset, flat.begin() + offset + nw);
    offset += nw;
    layer.bias.assign(flat.begin() + offset, flat.begin() + offset + layer.out);
    offset += layer.out;
    params.layers.push_back(std::move(layer));
  }
  if (offset != flat.size()) {
    return absl::InvalidArgumentError(StrCat("flat vector has ", flat.size(),
                                             " entries, architecture needs ",
                                             offset));
  }
  return params;
}

absl::StatusOr<ModelParams> InitModel(const Architecture& arch,
                                      std::uint64_t seed) {
  FLAPS_RETURN_IF_ERROR(arch.Validate());
  Rng rng = MakeRng(seed, Stream::kInit);
  const std::vector<int> sizes = LayerSizes(arch);
  ModelParams params;
  params.arch = arch;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / (layer.in + layer.out));
    std::uniform_real_distribution<double> u(-limit, limit);
    layer.weights.resize(static_cast<std::size_t>(layer.in) * layer.out);
    for (double& w : layer.weights) w = u(rng);
    layer.bias.assign(layer.out, 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

absl::StatusOr<std::vector<double>> Forward(const ModelParams& params,
                                            std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(params.arch.input_dim)) {
    return absl::InvalidArgumentError(StrCat("input has dimension ", x.size(),
                                             ", model expects ",
                                             params.arch.input_dim));
  }
  Trace trace;
  ForwardTrace(params, x, trace);
  std::vector<double> probs = std::move(trace.activations.back());
  SoftmaxInPlace(probs);
  return probs;
}

absl::StatusOr<LossAndGradient> LossAndGrad(
    const ModelParams& params, const LabeledDataset& data,
    std::span<const std::int64_t> batch) {
  if (batch.empty()) return absl::InvalidArgumentError("empty batch");
  FLAPS_RETURN_IF_ERROR(CheckData(params, data));
  const std::size_t n_layers = params.layers.size();
  std::vector<std::size_t> offsets(n_layers);
  std::size_t total = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = total;
    total += params.layers[l].weights.size() + params.layers[l].bias.size();
  }
  LossAndGradient out;
  out.gradient.assign(total, 0.0);

  Trace trace;
  std::vector<double> delta, prev_delta;
  for (std::int64_t idx : batch) {
    ForwardTrace(params, data.row(static_cast<std::size_t>(idx)), trace);
    const int y = data.labels[static_cast<std::size_t>(idx)];
    std::vector<double>& logits = trace.activations.back();
    const double zy = logits[y];
    out.loss += SoftmaxInPlace(logits) - zy;
    delta = logits;
    delta[y] -= 1.0;
    for (std::size_t l = n_layers; l-- > 0;) {
      const DenseLayer& layer = params.layers[l];
      const std::vector<double>& in = trace.activations[l];
      double* gw = &out.gradient[offsets[l]];
      double* gb = gw + layer.weights.size();
      for (int o = 0; o < layer.out; ++o) {
        double* row = gw + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) row[i] += delta[o] * in[i];
        gb[o] += delta[o];
      }
      if (l == 0) break;
      prev_delta.assign(layer.in, 0.0);
      for (int o = 0; o < layer.out; ++o) {
        const double* w =
            &layer.weights[static_cast<std::size_t>(o) * layer.in];
        for (int i = 0; i < layer.in; ++i) prev_delta[i] += w[i] * delta[o];
      }
      for (int i = 0; i < layer.in; ++i) prev_delta[i] *= 1.0 - in[i] * in[i];
      std::swap(delta, prev_delta);
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  out.loss *= scale;
  for (double& g : out.gradient) g *= scale;
  return out;
}

absl::Status TrainConfig::Validate() const {
  if (!(learning_rate > 0) || !(epsilon > 0) || !(rho > 0 && rho < 1) ||
      batch_size < 1 || max_epochs < 1 || !(convergence_tol > 0) ||
      patience < 1) {
    return absl::InvalidArgumentError(
        "train config needs lr > 0, rho in (0,1), eps > 0, batch_size >= 1, "
        "max_epochs >= 1, tol > 0, patience >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<TrainResult> TrainUntilConverged(
    ModelParams params, const LabeledDataset& data,
    std::span<const std::int64_t> indices, const TrainConfig& config,
    Rng& rng) {
  FLAPS_RETURN_IF_ERROR(config.Validate());
  if (indices.empty()) return absl::InvalidArgumentError("no training rows");
  TrainResult result;
  FLAPS_ASSIGN_OR_RETURN(LossAndGradient start,
                         LossAndGrad(params, data, indices));
  result.initial_loss = start.loss;

  std::vector<double> accum(params.NumParams(), 0.0);
  std::vector<std::int64_t> order(indices.begin(), indices.end());
  double previous = result.initial_loss;
  int calm_epochs = 0;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t first = 0; first < order.size();
         first += config.batch_size) {
      const std::size_t n =
          std::min<std::size_t>(config.batch_size, order.size() - first);
      FLAPS_ASSIGN_OR_RETURN(
          LossAndGradient lg,
          LossAndGrad(params, data, std::span(order).subspan(first, n)));
      epoch_loss += lg.loss * static_cast<double>(n);
      std::size_t p = 0;
      auto step = [&](double& w) {
        const double g = lg.gradient[p];
        if (config.optimizer == Optimizer::kRmsProp) {
          accum[p] = config.rho * accum[p] + (1 - config.rho) * g * g;
          w -= config.learning_rate * g / std::sqrt(accum[p] + config.epsilon);
        } else {
          w -= config.learning_rate * g;
        }
        ++p;
      };
      for (DenseLayer& layer : params.layers) {
        for (double& w : layer.weights) step(w);
        for (double& b : layer.bias) step(b);
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    result.epoch_losses.push_back(epoch_loss);
    calm_epochs = std::abs(epoch_loss - previous) < config.convergence_tol
                      ? calm_epochs + 1
                      : 0;
    previous = epoch_loss;
    if (calm_epochs >= config.patience) {
      result.converged = true;
      break;
    }
  }
  result.params = std::move(params);
  return result;
}

std::optional<double> BinaryAuc(std::span<const double> scores,
                                std::span<const bool> positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double pos_rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank =
        (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        pos_rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1) / 2.0) /
         (np * static_cast<double>(n_neg));
}

double MacroAuc(std::span<const double> scores, std::span<const int> labels,
                int n_classes) {
  const std::size_t n = labels.size();
  std::vector<double> column(n);
  std::unique_ptr<bool[]> positive(new bool[n]);
  double sum = 0;
  int counted = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = scores[i * n_classes + c];
      positive[i] = labels[i] == c;
    }
    if (auto auc =
            BinaryAuc(column, std::span<const bool>(positive.get(), n))) {
      sum += *auc;
      ++counted;
    }
  }
  return counted > 0 ? sum / counted : 0.5;
}

double MacroF1(std::span<const int> predicted, std::span<const int> labels,
               int n_classes) {
  std::vector<double> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predicted[i] == labels[i]) {
      ++tp[labels[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[labels[i]];
    }
  }
  double sum = 0;
  for (int c = 0; c < n_classes; ++c) {
    const double denom = 2 * tp[c] + fp[c] + fn[c];
    sum += denom > 0 ? 2 * tp[c] / denom : 0.0;
  }
  return sum / n_classes;
}

absl::StatusOr<Metrics> Evaluate(const ModelParams& params,
                                 const LabeledDataset& test) {
  if (test.size() == 0) return absl::InvalidArgumentError("empty test set");
  FLAPS_RETURN_IF_ERROR(CheckData(params, test));
  const int classes = params.arch.n_classes;
  std::vector<double> scores;
  scores.reserve(test.size() * classes);
  std::vector<int> predicted;
  Metrics m;
  Trace trace;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    ForwardTrace(params, test.row(i), trace);
    std::vector<double>& z = trace.activations.back();
    const double zy = z[test.labels[i]];
    m.loss += SoftmaxInPlace(z) - zy;
    scores.insert(scores.end(), z.begin(), z.end());
    const int arg =
        static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    predicted.push_back(arg);
    if (arg == test.labels[i]) ++correct;
  }
  m.loss /= static_cast<double>(test.size());
  m.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  m.auc = MacroAuc(scores, test.labels, classes);
  m.fscore = MacroF1(predicted, test.labels, classes);
  return m;
}

std::string LossTraceCsv(std::span<const double> epoch_losses) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < epoch_losses.size(); ++e) {
    out += fmt::format("{},{:.6f}\n", e + 1, epoch_losses[e]);
  }
  return out;
}

std::string SerializeModel(const ModelParams& params) {
  ByteWriter w;
  w.U32(static_cast<std::uint32_t>(params.arch.input_dim));
  w.U32(static_cast<std::uint32_t>(params.arch.hidden.size()));
  for (int h : params.arch.hidden) w.U32(static_cast<std::uint32_t>(h));
  w.U32(static_cast<std::uint32_t>(params.arch.n_classes));
  for (double v : params.Flatten()) w.F64(v);
  return w.Release();
}

absl::StatusOr<ModelParams> DeserializeModel(std::string_view bytes) {
  ByteReader r(bytes);
  Architecture arch;
  FLAPS_ASSIGN_OR_RETURN(std::uint32_t input, r.U32());
  FLAPS_ASSIGN_OR_RETURN(std::uint32_t n_hidden, r.U32());
  if (n_hidden > r.remaining() / 4) {
    return absl::DataLossError("hidden layer count exceeds payload");
  }
  for (std::uint32_t i = 0; i < n_hidden; ++i) {
    FLAPS_ASSIGN_OR_RETURN(std::uint32_t h, r.U32());
    arch.hidden.push_back(static_cast<int>(h));
  }
  FLAPS_ASSIGN_OR_RETURN(std::uint32_t classes, r.U32());
  arch.input_dim = static_cast<int>(input);
  arch.n_classes = static_cast<int>(classes);
  if (r.remaining() % 8 != 0) {
    return absl::DataLossError(StrCat("parameter payload of ", r.remaining(),
                                      " bytes is not a multiple of 8"));
  }
  std::vector<double> flat;
  while (!r.done()) {
    FLAPS_ASSIGN_OR_RETURN(double v, r.F64());
    flat.push_back(v);
  }
  return ModelParams::Unflatten(arch, flat);
}

}  // namespace flaps
