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

// Runs FLaPS / FL / central sweeps and writes time.csv and metrics.csv.
//
//   flaps_sim --config sweep.json --out results/
//   flaps_sim --mode flaps,central --k 5 --clients 50 --drop ready=0.1

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flaps/experiment.h"
#include "flaps/str_util.h"

namespace {

int Fail(const absl::Status& status) {
  std::fprintf(stderr, "flaps_sim: %s\n", status.ToString().c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FLaPS federated learning simulator"};
  std::string config_path, out_dir, transport;
  std::vector<std::string> modes, drops;
  std::vector<int> ks;
  std::vector<std::uint64_t> seeds;
  int clients = 0;
  bool compare = false, print_config = false;
  app.add_option("--config", config_path, "JSON experiment config")
      ->check(CLI::ExistingFile);
  app.add_option("--mode", modes, "flaps, fl and/or central")->delimiter(',');
  app.add_option("--k", ks, "cluster counts to sweep")->delimiter(',');
  app.add_option("--clients", clients, "number of clients");
  app.add_option("--seed", seeds, "experiment seeds")->delimiter(',');
  app.add_option("--drop", drops, "per-phase drop probability, phase=p");
  app.add_option("--out", out_dir,
                 "output directory (default $FLAPS_OUT_DIR or flaps_out)");
  app.add_option("--transport", transport, "sim or tcp");
  app.add_flag("--compare", compare,
               "print FLaPS deltas against the baselines");
  app.add_flag("--print-config", print_config,
               "print the resolved config and exit");
  CLI11_PARSE(app, argc, argv);

  absl::StatusOr<flaps::ExperimentConfig> config =
      config_path.empty() ? flaps::DefaultConfig()
                          : flaps::LoadConfig(config_path);
  if (!config.ok()) return Fail(config.status());
  if (!modes.empty()) {
    config->modes.clear();
    for (const std::string& m : modes) {
      auto mode = flaps::ParseMode(m);
      if (!mode.ok()) return Fail(mode.status());
      config->modes.push_back(*mode);
    }
  }
  if (!ks.empty()) config->k_list = ks;
  if (clients > 0) config->n_clients = clients;
  if (!seeds.empty()) config->seeds = seeds;
  for (const std::string& d : drops) {
    const auto parts = flaps::Split(d, '=');
    const auto p =
        parts.size() == 2 ? flaps::ParseNumber<double>(parts[1]) : std::nullopt;
    if (!p.has_value()) {
      return Fail(absl::InvalidArgumentError(
          flaps::StrCat("--drop expects phase=probability, got '", d, "'")));
    }
    auto phase = flaps::ParseDropPhase(parts[0]);
    if (!phase.ok()) return Fail(phase.status());
    config->drops.at(*phase) = *p;
  }
  if (!transport.empty()) {
    auto kind = flaps::ParseTransportKind(transport);
    if (!kind.ok()) return Fail(kind.status());
    config->transport = *kind;
  }
  if (!out_dir.empty()) config->out_dir = out_dir;
  if (absl::Status s = config->Validate(); !s.ok()) return Fail(s);
  if (print_config) {
    std::fputs(flaps::EmitConfig(*config).c_str(), stdout);
    return 0;
  }

  auto outcome = flaps::RunSweep(*config);
  if (!outcome.ok()) return Fail(outcome.status());
  for (const std::string& f : outcome->failures) {
    std::fprintf(stderr, "flaps_sim: run failed: %s\n", f.c_str());
  }
  if (!outcome->results.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config->out_dir, ec);
    if (ec) {
      return Fail(absl::UnavailableError(flaps::StrCat(
          "cannot create '", config->out_dir, "': ", ec.message())));
    }
    const std::filesystem::path dir(config->out_dir);
    if (absl::Status s =
            flaps::WriteTimeCsv(outcome->results, dir / "time.csv");
        !s.ok()) {
      return Fail(s);
    }
    if (absl::Status s =
            flaps::WriteMetricsCsv(outcome->results, dir / "metrics.csv");
        !s.ok()) {
      return Fail(s);
    }
    std::printf("wrote %zu rows to %s\n", outcome->results.size(),
                config->out_dir.c_str());
  }
  if (compare)
    std::fputs(flaps::CompareReport(outcome->results).c_str(), stdout);
  return outcome->failures.empty() ? 0 : 2;
}
