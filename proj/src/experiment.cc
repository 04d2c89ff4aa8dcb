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

#include "flaps/experiment.h"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "flaps/status_macros.h"
#include "flaps/str_util.h"
#include "json.hpp"

namespace flaps {
namespace {

using Json = nlohmann::ordered_json;

absl::Status ConfigError(std::string_view path, std::string_view what) {
  return absl::InvalidArgumentError(
      StrCat("config error at ", path, ": ", what));
}

// Reads members of one JSON object and rejects any it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path)
      : j_(j), path_(std::move(path)) {}

  absl::Status CheckObject() const {
    if (!j_.is_object()) return ConfigError(path_, "expected an object");
    return absl::OkStatus();
  }

  bool Has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  absl::Status Read(const std::string& key, T& out) {
    if (!Has(key)) return absl::OkStatus();
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      return ConfigError(Path(key), e.what());
    }
    return absl::OkStatus();
  }

  const Json& at(const std::string& key) const { return j_.at(key); }
  std::string Path(const std::string& key) const {
    return StrCat(path_, ".", key);
  }

  absl::Status Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) return ConfigError(Path(key), "unknown key");
    }
    return absl::OkStatus();
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string_view DatasetKindName(DatasetSpec::Kind kind) {
  switch (kind) {
    case DatasetSpec::Kind::kSynthetic:
      return "synthetic";
    case DatasetSpec::Kind::kIdx:
      return "idx";
    case DatasetSpec::Kind::kCsv:
      return "csv";
  }
  return "unknown";
}

absl::StatusOr<DatasetSpec> ParseDataset(const Json& j) {
  ObjectReader r(j, "dataset");
  FLAPS_RETURN_IF_ERROR(r.CheckObject());
  DatasetSpec spec;
  std::string kind;
  FLAPS_RETURN_IF_ERROR(r.Read("kind", kind));
  if (kind == "synthetic") {
    spec.kind = DatasetSpec::Kind::kSynthetic;
    FLAPS_RETURN_IF_ERROR(r.Read("n", spec.n));
    FLAPS_RETURN_IF_ERROR(r.Read("dim", spec.dim));
    FLAPS_RETURN_IF_ERROR(r.Read("classes", spec.n_classes));
    FLAPS_RETURN_IF_ERROR(r.Read("seed", spec.seed));
  } else if (kind == "idx") {
    spec.kind = DatasetSpec::Kind::kIdx;
    FLAPS_RETURN_IF_ERROR(r.Read("images", spec.images_path));
    FLAPS_RETURN_IF_ERROR(r.Read("labels", spec.labels_path));
    if (spec.images_path.empty() || spec.labels_path.empty()) {
      return ConfigError("dataset", "idx datasets need 'images' and 'labels'");
    }
  } else if (kind == "csv") {
    spec.kind = DatasetSpec::Kind::kCsv;
    FLAPS_RETURN_IF_ERROR(r.Read("path", spec.csv_path));
    if (spec.csv_path.empty())
      return ConfigError("dataset", "csv datasets need 'path'");
  } else {
    return ConfigError(
        "dataset.kind",
        StrCat("expected synthetic, idx or csv, got '", kind, "'"));
  }
  FLAPS_RETURN_IF_ERROR(r.Finish());
  return spec;
}

absl::Status ParseTrain(const Json& j, TrainConfig& train) {
  ObjectReader r(j, "train");
  FLAPS_RETURN_IF_ERROR(r.CheckObject());
  std::string optimizer =
      train.optimizer == Optimizer::kSgd ? "sgd" : "rmsprop";
  FLAPS_RETURN_IF_ERROR(r.Read("optimizer", optimizer));
  if (optimizer == "sgd") {
    train.optimizer = Optimizer::kSgd;
  } else if (optimizer == "rmsprop") {
    train.optimizer = Optimizer::kRmsProp;
  } else {
    return ConfigError("train.optimizer",
                       StrCat("unknown optimizer '", optimizer, "'"));
  }
  FLAPS_RETURN_IF_ERROR(r.Read("learning_rate", train.learning_rate));
  FLAPS_RETURN_IF_ERROR(r.Read("rho", train.rho));
  FLAPS_RETURN_IF_ERROR(r.Read("epsilon", train.epsilon));
  FLAPS_RETURN_IF_ERROR(r.Read("batch_size", train.batch_size));
  FLAPS_RETURN_IF_ERROR(r.Read("max_epochs", train.max_epochs));
  FLAPS_RETURN_IF_ERROR(r.Read("convergence_tol", train.convergence_tol));
  FLAPS_RETURN_IF_ERROR(r.Read("patience", train.patience));
  return r.Finish();
}

absl::Status ParseDrops(const Json& j, DropModel& drops) {
  ObjectReader r(j, "drops");
  FLAPS_RETURN_IF_ERROR(r.CheckObject());
  for (int i = 0; i < kNumDropPhases; ++i) {
    const auto phase = static_cast<DropPhase>(i);
    FLAPS_RETURN_IF_ERROR(
        r.Read(std::string(DropPhaseName(phase)), drops.at(phase)));
  }
  return r.Finish();
}

absl::Status ParseLatency(const Json& j, LatencyModel& latency) {
  ObjectReader r(j, "latency");
  FLAPS_RETURN_IF_ERROR(r.CheckObject());
  FLAPS_RETURN_IF_ERROR(r.Read("fixed_s", latency.fixed_s));
  FLAPS_RETURN_IF_ERROR(r.Read("jitter_s", latency.jitter_s));
  return r.Finish();
}

int ModeOrder(Mode m) { return static_cast<int>(m); }

std::string FormatK(const std::optional<int>& k) {
  return k.has_value() ? std::to_string(*k) : std::string();
}

std::string ResultCsv(std::string_view header,
                      const std::vector<RoundResult>& results, bool timing) {
  std::string out = StrCat(header, "\n");
  for (const RoundResult& r : results) {
    out += fmt::format("{},{},{}", ModeName(r.mode), FormatK(r.k), r.seed);
    if (timing) {
      const TimingRecord& t = r.timing;
      for (double v : {t.t1, t.t2, t.t3, t.t4, t.total})
        out += fmt::format(",{:.6f}", v);
    } else {
      const Metrics& m = r.metrics;
      for (double v : {m.loss, m.auc, m.fscore, m.accuracy})
        out += fmt::format(",{:.6f}", v);
    }
    out += "\n";
  }
  return out;
}

absl::Status WriteFile(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    return absl::UnavailableError(
        StrCat("cannot open '", path, "' for writing"));
  f << text;
  f.close();
  if (!f) return absl::DataLossError(StrCat("failed writing '", path, "'"));
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<LabeledDataset> LoadDataset(const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetSpec::Kind::kSynthetic:
      return MakeSynthetic(spec.n, spec.dim, spec.n_classes, spec.seed);
    case DatasetSpec::Kind::kIdx:
      return LoadIdx(spec.images_path, spec.labels_path);
    case DatasetSpec::Kind::kCsv:
      return LoadCsv(spec.csv_path);
  }
  return absl::InvalidArgumentError("unknown dataset kind");
}

absl::Status ExperimentConfig::Validate() const {
  if (n_clients < 1) {
    return ConfigError("n_clients",
                       StrCat("must be positive, got ", n_clients));
  }
  if (modes.empty())
    return ConfigError("modes", "at least one mode is required");
  if (seeds.empty())
    return ConfigError("seeds", "at least one seed is required");
  const bool flaps =
      std::find(modes.begin(), modes.end(), Mode::kFlaps) != modes.end();
  if (flaps && k_list.empty())
    return ConfigError("k_list", "flaps mode needs at least one k");
  for (int k : k_list) {
    if (k < 2 || k >= n_clients) {
      return ConfigError("k_list", StrCat("k must satisfy 2 <= k < n_clients (",
                                          n_clients, "), got ", k));
    }
  }
  if (!(test_fraction > 0 && test_fraction < 1)) {
    return ConfigError("test_fraction",
                       StrCat("must be in (0, 1), got ", test_fraction));
  }
  for (int h : hidden) {
    if (h < 1)
      return ConfigError("hidden",
                         StrCat("layer sizes must be positive, got ", h));
  }
  if (max_attempts < 1)
    return ConfigError("max_attempts", "must be at least 1");
  if (!(retry_delay_s >= 0))
    return ConfigError("retry_delay_s", "must be non-negative");
  if (auto s = train.Validate(); !s.ok())
    return ConfigError("train", std::string(s.message()));
  if (auto s = drops.Validate(); !s.ok())
    return ConfigError("drops", std::string(s.message()));
  if (auto s = latency.Validate(); !s.ok())
    return ConfigError("latency", std::string(s.message()));
  return absl::OkStatus();
}

RoundConfig ExperimentConfig::RoundFor(std::optional<int> k,
                                       std::uint64_t seed) const {
  RoundConfig c;
  c.k = k;
  c.seed = seed;
  c.hidden = hidden;
  c.train = train;
  c.drops = drops;
  c.transport = transport;
  c.latency = latency;
  c.max_attempts = max_attempts;
  c.retry_delay_s = retry_delay_s;
  return c;
}

std::string DefaultOutDir() {
  const char* env = std::getenv(std::string(kOutDirEnv).c_str());
  return env != nullptr && *env != '\0' ? std::string(env)
                                        : std::string("flaps_out");
}

ExperimentConfig DefaultConfig() {
  ExperimentConfig c;
  c.out_dir = DefaultOutDir();
  return c;
}

absl::StatusOr<ExperimentConfig> ParseConfig(std::string_view json_text) {
  const Json j = Json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return ConfigError("<root>", "not valid JSON");
  ObjectReader r(j, "<root>");
  FLAPS_RETURN_IF_ERROR(r.CheckObject());
  ExperimentConfig c = DefaultConfig();
  if (!r.Has("dataset")) return ConfigError("dataset", "missing dataset");
  FLAPS_ASSIGN_OR_RETURN(c.dataset, ParseDataset(r.at("dataset")));
  FLAPS_RETURN_IF_ERROR(r.Read("n_clients", c.n_clients));
  std::vector<std::string> modes;
  if (r.Has("modes")) {
    FLAPS_RETURN_IF_ERROR(r.Read("modes", modes));
    c.modes.clear();
    for (const std::string& m : modes) {
      auto mode = ParseMode(m);
      if (!mode.ok())
        return ConfigError("modes", std::string(mode.status().message()));
      c.modes.push_back(*mode);
    }
  }
  FLAPS_RETURN_IF_ERROR(r.Read("k_list", c.k_list));
  FLAPS_RETURN_IF_ERROR(r.Read("seeds", c.seeds));
  FLAPS_RETURN_IF_ERROR(r.Read("test_fraction", c.test_fraction));
  FLAPS_RETURN_IF_ERROR(r.Read("hidden", c.hidden));
  if (r.Has("train")) FLAPS_RETURN_IF_ERROR(ParseTrain(r.at("train"), c.train));
  if (r.Has("drops")) FLAPS_RETURN_IF_ERROR(ParseDrops(r.at("drops"), c.drops));
  std::string transport(TransportKindName(c.transport));
  FLAPS_RETURN_IF_ERROR(r.Read("transport", transport));
  auto kind = ParseTransportKind(transport);
  if (!kind.ok())
    return ConfigError("transport", std::string(kind.status().message()));
  c.transport = *kind;
  if (r.Has("latency"))
    FLAPS_RETURN_IF_ERROR(ParseLatency(r.at("latency"), c.latency));
  FLAPS_RETURN_IF_ERROR(r.Read("max_attempts", c.max_attempts));
  FLAPS_RETURN_IF_ERROR(r.Read("retry_delay_s", c.retry_delay_s));
  FLAPS_RETURN_IF_ERROR(r.Read("out_dir", c.out_dir));
  FLAPS_RETURN_IF_ERROR(r.Finish());
  FLAPS_RETURN_IF_ERROR(c.Validate());
  return c;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return absl::NotFoundError(StrCat("cannot read config '", path, "'"));
  std::stringstream ss;
  ss << f.rdbuf();
  return ParseConfig(ss.str());
}

std::string EmitConfig(const ExperimentConfig& c) {
  Json j;
  Json d;
  d["kind"] = DatasetKindName(c.dataset.kind);
  switch (c.dataset.kind) {
    case DatasetSpec::Kind::kSynthetic:
      d["n"] = c.dataset.n;
      d["dim"] = c.dataset.dim;
      d["classes"] = c.dataset.n_classes;
      d["seed"] = c.dataset.seed;
      break;
    case DatasetSpec::Kind::kIdx:
      d["images"] = c.dataset.images_path;
      d["labels"] = c.dataset.labels_path;
      break;
    case DatasetSpec::Kind::kCsv:
      d["path"] = c.dataset.csv_path;
      break;
  }
  j["dataset"] = d;
  j["n_clients"] = c.n_clients;
  j["modes"] = Json::array();
  for (Mode m : c.modes) j["modes"].push_back(ModeName(m));
  j["k_list"] = c.k_list;
  j["seeds"] = c.seeds;
  j["test_fraction"] = c.test_fraction;
  j["hidden"] = c.hidden;
  j["train"] = {
      {"optimizer", c.train.optimizer == Optimizer::kSgd ? "sgd" : "rmsprop"},
      {"learning_rate", c.train.learning_rate},
      {"rho", c.train.rho},
      {"epsilon", c.train.epsilon},
      {"batch_size", c.train.batch_size},
      {"max_epochs", c.train.max_epochs},
      {"convergence_tol", c.train.convergence_tol},
      {"patience", c.train.patience}};
  Json drops = Json::object();
  for (int i = 0; i < kNumDropPhases; ++i) {
    const auto phase = static_cast<DropPhase>(i);
    drops[std::string(DropPhaseName(phase))] = c.drops.at(phase);
  }
  j["drops"] = drops;
  j["transport"] = TransportKindName(c.transport);
  j["latency"] = {{"fixed_s", c.latency.fixed_s},
                  {"jitter_s", c.latency.jitter_s}};
  j["max_attempts"] = c.max_attempts;
  j["retry_delay_s"] = c.retry_delay_s;
  j["out_dir"] = c.out_dir;
  return j.dump(2) + "\n";
}

absl::StatusOr<SweepOutcome> RunSweep(const ExperimentConfig& config) {
  FLAPS_RETURN_IF_ERROR(config.Validate());
  FLAPS_ASSIGN_OR_RETURN(LabeledDataset data, LoadDataset(config.dataset));
  SweepOutcome out;
  auto record = [&](Mode mode, std::optional<int> k, std::uint64_t seed,
                    absl::StatusOr<RoundResult> r) {
    if (r.ok()) {
      out.results.push_back(*std::move(r));
    } else {
      out.failures.push_back(fmt::format("mode={} k={} seed={}: {}",
                                         ModeName(mode), FormatK(k), seed,
                                         r.status().ToString()));
    }
  };
  for (std::uint64_t seed : config.seeds) {
    auto fed =
        MakeFederation(data, config.n_clients, config.test_fraction, seed);
    if (!fed.ok()) {
      for (Mode mode : config.modes)
        record(mode, std::nullopt, seed, fed.status());
      continue;
    }
    for (Mode mode : config.modes) {
      switch (mode) {
        case Mode::kFlaps:
          for (int k : config.k_list) {
            record(mode, k, seed,
                   RunFlapsWithRestarts(*fed, config.RoundFor(k, seed)));
          }
          break;
        case Mode::kFl:
          record(mode, std::nullopt, seed,
                 RunFlBaseline(*fed, config.RoundFor(std::nullopt, seed)));
          break;
        case Mode::kCentral:
          record(mode, std::nullopt, seed,
                 RunCentralBaseline(*fed, config.RoundFor(std::nullopt, seed)));
          break;
      }
    }
  }
  std::stable_sort(
      out.results.begin(), out.results.end(),
      [](const RoundResult& a, const RoundResult& b) {
        return std::tuple(ModeOrder(a.mode), a.k.value_or(0), a.seed) <
               std::tuple(ModeOrder(b.mode), b.k.value_or(0), b.seed);
      });
  return out;
}

std::string TimeCsv(const std::vector<RoundResult>& results) {
  return ResultCsv(kTimeCsvHeader, results, /*timing=*/true);
}

std::string MetricsCsv(const std::vector<RoundResult>& results) {
  return ResultCsv(kMetricsCsvHeader, results, /*timing=*/false);
}

absl::Status WriteTimeCsv(const std::vector<RoundResult>& results,
                          const std::string& path) {
  if (results.empty()) return absl::InvalidArgumentError("no results to write");
  return WriteFile(path, TimeCsv(results));
}

absl::Status WriteMetricsCsv(const std::vector<RoundResult>& results,
                             const std::string& path) {
  if (results.empty()) return absl::InvalidArgumentError("no results to write");
  return WriteFile(path, MetricsCsv(results));
}

absl::StatusOr<std::vector<CsvRow>> ParseResultCsv(std::string_view text,
                                                   std::string_view header) {
  if (text.empty() || text.back() != '\n') {
    return absl::InvalidArgumentError("CSV must end with a newline");
  }
  text.remove_suffix(1);
  const std::vector<std::string_view> lines = Split(text, '\n');
  if (lines[0] != header) {
    return absl::InvalidArgumentError(StrCat(
        "unexpected CSV header '", lines[0], "', expected '", header, "'"));
  }
  const std::size_t n_fields = Split(header, ',').size();
  std::vector<CsvRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = Split(lines[i], ',');
    if (fields.size() != n_fields) {
      return absl::InvalidArgumentError(StrCat("line ", i + 1, " has ",
                                               fields.size(),
                                               " fields, expected ", n_fields));
    }
    CsvRow row;
    FLAPS_ASSIGN_OR_RETURN(row.mode, ParseMode(fields[0]));
    auto bad = [&](std::size_t f) {
      return absl::InvalidArgumentError(StrCat("line ", i + 1, " field ", f + 1,
                                               ": cannot parse '", fields[f],
                                               "'"));
    };
    if (!fields[1].empty()) {
      row.k = ParseNumber<int>(fields[1]);
      if (!row.k.has_value()) return bad(1);
    }
    const auto seed = ParseNumber<std::uint64_t>(fields[2]);
    if (!seed.has_value()) return bad(2);
    row.seed = *seed;
    for (std::size_t f = 3; f < fields.size(); ++f) {
      const auto v = ParseNumber<double>(fields[f]);
      if (!v.has_value()) return bad(f);
      row.values.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string CompareReport(const std::vector<RoundResult>& results) {
  std::string out = "seed,k,flaps_fscore,minus_fl,minus_central\n";
  for (const RoundResult& r : results) {
    if (r.mode != Mode::kFlaps) continue;
    auto baseline = [&](Mode mode) -> std::string {
      for (const RoundResult& b : results) {
        if (b.mode == mode && b.seed == r.seed) {
          return fmt::format("{:+.6f}", r.metrics.fscore - b.metrics.fscore);
        }
      }
      return "";
    };
    out += fmt::format("{},{},{:.6f},{},{}\n", r.seed, FormatK(r.k),
                       r.metrics.fscore, baseline(Mode::kFl),
                       baseline(Mode::kCentral));
  }
  return out;
}

}  // namespace flaps
