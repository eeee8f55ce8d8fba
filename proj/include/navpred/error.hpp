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

#ifndef NAVPRED_ERROR_HPP
#define NAVPRED_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace navpred
{

enum class ErrorCode
{
  invalid_input,
  out_of_zone,
  frame_mismatch,
  parse,
  duplicate_id,
  not_found,
  shape,
  numeric,
  config,
  spec_violation,
  empty_split,
  io,
  usage,
};

/// Stable machine-readable token, e.g. "E_PARSE".
std::string_view error_token(ErrorCode code);

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace navpred

#endif  // NAVPRED_ERROR_HPP
