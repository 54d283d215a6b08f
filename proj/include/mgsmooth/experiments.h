// Copyright 2026 The mgsmooth Authors
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


#ifndef MGSMOOTH_EXPERIMENTS_H_
#define MGSMOOTH_EXPERIMENTS_H_

// Artifact builders behind the command-line runner. Each returns file names
// with their full contents so callers can write them or compare them.

#include <string>
#include <vector>

#include "mgsmooth/saac.h"

namespace mgsmooth {

struct Artifact {
  std::string name;
  std::string content;
};
using Artifacts = std::vector<Artifact>;

// Two-state game experiments: table1.csv (pi0), table2.csv (pi1),
// pev_trace.csv, npi_cycle.json, matrices.json and bounds.csv.
Artifacts tabular_artifacts();

// The rho values tabulated with adversary weights, and with uniform weights.
std::vector<double> table_rhos();
std::vector<double> table_uniform_rhos();

// Trains one algorithm. Files: metrics_<algo>.csv, config_<algo>.txt,
// final_<algo>.json and best_<algo>.json. The result is returned through
// `result` when it is non-null.
Artifacts train_artifacts(const saac::TrainConfig& cfg,
                          saac::TrainResult* result = nullptr);

std::string eval_json(const saac::EvalResult& r, int episodes, int steps,
                      std::uint64_t eval_seed, double disturbance);

// name,rel_error,tolerance,passed
std::string gradcheck_csv(const std::vector<saac::GradCheckEntry>& entries);

// Parses "lo:step:hi". Throws kConfigError.
std::vector<double> parse_grid(const std::string& text);

// Creates dir if needed. Throws kIoError.
void write_artifacts(const std::string& dir, const Artifacts& files);

}  // namespace mgsmooth

#endif  // MGSMOOTH_EXPERIMENTS_H_
