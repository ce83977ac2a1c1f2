// Copyright 2026 The specmask Authors.
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

// Plain key=value configuration files. Blank lines and lines starting with
// '#' are skipped; whitespace around keys and values is trimmed.

#ifndef SPECMASK_CONFIG_HPP_
#define SPECMASK_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace specmask {

using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::string_view text);
ConfigMap read_config(const std::filesystem::path& path);

std::optional<std::string> config_get(const ConfigMap& config, const std::string& key);
double config_number(const ConfigMap& config, const std::string& key, double fallback);

}  // namespace specmask

#endif  // SPECMASK_CONFIG_HPP_
