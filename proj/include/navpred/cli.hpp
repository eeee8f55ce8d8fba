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

#ifndef NAVPRED_CLI_HPP
#define NAVPRED_CLI_HPP

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace navpred::cli
{

inline constexpr const char* data_dir_env = "NAVPRED_DATA_DIR";
inline constexpr const char* tool_version = "0.1.0";

/// Runs one command line (without the program name). Errors are reported on
/// `err` as a single line "error: E_CODE: message". Returns the exit code:
/// 0 on success, 1 on a failed command, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes through a temporary sibling file and renames it into place.
void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& write);

}  // namespace navpred::cli

#endif  // NAVPRED_CLI_HPP
