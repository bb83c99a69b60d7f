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

#include "didgeom/error.hpp"

namespace didgeom {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::MalformedNumber: return "MalformedNumber";
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::InvalidBinCount: return "InvalidBinCount";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::EmptyBox: return "EmptyBox";
    case ErrorCode::NonPositiveInstanceDepth: return "NonPositiveInstanceDepth";
    case ErrorCode::InvalidUncertainty: return "InvalidUncertainty";
    case ErrorCode::NegativeUncertainty: return "NegativeUncertainty";
    case ErrorCode::NoValidCells: return "NoValidCells";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::InvalidTransform: return "InvalidTransform";
    case ErrorCode::ObjectCulled: return "ObjectCulled";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace didgeom
