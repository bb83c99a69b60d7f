// Copyright 2026 The didgeom Authors.
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
#include <span>
#include <string>
#include <utility>

namespace didgeom::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kValidationError = 1, kIoError = 2 };

// Runs one subcommand: synth, gen-labels, augment, fuse, eval, gradcheck.
// `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

// "MxN" with both in [1, 32]. Throws BadArgument.
std::pair<int, int> parse_grid(const std::string& text);

}  // namespace didgeom::cli
