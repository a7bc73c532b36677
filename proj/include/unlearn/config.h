// Copyright 2026 The Unlearn Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNLEARN_CONFIG_H_
#define UNLEARN_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace unlearn {

// Flat key=value configuration.
//
// Grammar, one entry per line:
//   line    := blank | comment | entry
//   comment := '#' anything
//   entry   := key '=' value
//   key     := segment ('.' segment)*      e.g. data.n_train, miu.lambda
// Whitespace around keys and values is trimmed. Sections are the dotted
// prefixes; there are no [section] headers. Later entries override earlier
// ones. Lists are comma separated.
class Config {
 public:
  static Config Parse(const std::string& text);
  static Config Load(const std::string& path);

  void Set(const std::string& key, const std::string& value);
  bool Has(const std::string& key) const;
  std::optional<std::string> Raw(const std::string& key) const;

  std::string GetString(const std::string& key, const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  std::uint64_t GetUint(const std::string& key, std::uint64_t fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  std::vector<double> GetDoubleList(const std::string& key,
                                    const std::vector<double>& fallback) const;
  std::vector<std::string> GetStringList(
      const std::string& key, const std::vector<std::string>& fallback) const;

  // Canonical text form: sorted key=value lines.
  std::string Canonical() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

std::vector<std::string> SplitList(const std::string& text);

}  // namespace unlearn

#endif  // UNLEARN_CONFIG_H_
