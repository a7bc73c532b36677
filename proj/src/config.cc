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

#include "unlearn/config.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "unlearn/error.h"

namespace unlearn {

namespace {

std::string Trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool ValidKey(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  char prev = 0;
  for (char c : key) {
    if (c == '.' && prev == '.') return false;
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
          c == '-')) {
      return false;
    }
    prev = c;
  }
  return true;
}

}  // namespace

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Config Config::Parse(const std::string& text) {
  Config c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = Trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value");
    }
    const std::string key = Trim(t.substr(0, eq));
    if (!ValidKey(key)) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": invalid key '" + key + "'");
    }
    c.entries_[key] = Trim(t.substr(eq + 1));
  }
  return c;
}

Config Config::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

void Config::Set(const std::string& key, const std::string& value) {
  if (!ValidKey(key)) throw ConfigError("invalid key '" + key + "'");
  entries_[key] = value;
}

bool Config::Has(const std::string& key) const { return entries_.contains(key); }

std::optional<std::string> Config::Raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::GetString(const std::string& key,
                              const std::string& fallback) const {
  return Raw(key).value_or(fallback);
}

double Config::GetDouble(const std::string& key, double fallback) const {
  auto v = Raw(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::logic_error&) {
    throw ConfigError(key + ": '" + *v + "' is not a number");
  }
}

std::int64_t Config::GetInt(const std::string& key, std::int64_t fallback) const {
  auto v = Raw(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::logic_error&) {
    throw ConfigError(key + ": '" + *v + "' is not an integer");
  }
}

std::uint64_t Config::GetUint(const std::string& key,
                              std::uint64_t fallback) const {
  const std::int64_t v = GetInt(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw ConfigError(key + " must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool Config::GetBool(const std::string& key, bool fallback) const {
  auto v = Raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError(key + ": '" + *v + "' is not a boolean");
}

std::vector<double> Config::GetDoubleList(
    const std::string& key, const std::vector<double>& fallback) const {
  auto v = Raw(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : SplitList(*v)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError(key + ": '" + item + "' is not a number");
    }
  }
  return out;
}

std::vector<std::string> Config::GetStringList(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto v = Raw(key);
  if (!v) return fallback;
  return SplitList(*v);
}

std::string Config::Canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace unlearn
