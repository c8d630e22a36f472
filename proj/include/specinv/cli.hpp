// Copyright 2026 The specinv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "specinv/losses.hpp"
#include "specinv/mcnn.hpp"
#include "specinv/train.hpp"

namespace specinv::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 2,
  kValidationError = 3,
  kNumericError = 4,
};

// Settings read from a `key = value` training config file.
struct TrainFileConfig {
  McnnConfig mcnn;  // strides 2, channels halving to 1
  TrainConfig train;
  LossWeights weights;
  // Keys absent from the file, in the order they were filled with defaults.
  std::vector<std::string> defaulted;
  // Every key with the value in effect, in file-format spelling.
  std::vector<std::pair<std::string, std::string>> effective;
};

// Recognised keys: num_heads, num_layers, filter_width, lr0, decay,
// decay_every, batch_size, segment_frames, max_iters, lambda_sc,
// lambda_logmag, lambda_if, lambda_wp, input_scaling. '#' starts a comment.
// Throws ValidationError on unknown keys, duplicates or malformed values.
TrainFileConfig parse_train_config(const std::string& text, std::size_t input_channels);

// Runs the command line `args` (args[0] is the program name). Returns the
// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace specinv::cli
