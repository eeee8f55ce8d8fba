/*
 * Copyright 2026 The navpred Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "navpred/error.hpp"

namespace navpred
{

std::string_view error_token(ErrorCode code)
{
  switch (code)
  {
    case ErrorCode::invalid_input: return "E_INVALID_INPUT";
    case ErrorCode::out_of_zone: return "E_OUT_OF_ZONE";
    case ErrorCode::frame_mismatch: return "E_FRAME_MISMATCH";
    case ErrorCode::parse: return "E_PARSE";
    case ErrorCode::duplicate_id: return "E_DUPLICATE_ID";
    case ErrorCode::not_found: return "E_NOT_FOUND";
    case ErrorCode::shape: return "E_SHAPE";
    case ErrorCode::numeric: return "E_NUMERIC";
    case ErrorCode::config: return "E_CONFIG";
    case ErrorCode::spec_violation: return "E_SPEC_VIOLATION";
    case ErrorCode::empty_split: return "E_EMPTY_SPLIT";
    case ErrorCode::io: return "E_IO";
    case ErrorCode::usage: return "E_USAGE";
  }
  return "E_UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
  : std::runtime_error(std::string(error_token(code)) + ": " + message), code_(code), message_(message)
{
}

}  // namespace navpred
