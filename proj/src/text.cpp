// Copyright 2026 The commrank Authors.
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

#include "commrank/text.hpp"

#include <unistd.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "commrank/error.hpp"

namespace commrank {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kInvalidArgument: return "invalid parameter";
    case ErrorCode::kInvalidPair: return "invalid pair";
    case ErrorCode::kInput: return "input error";
    case ErrorCode::kDegenerateCommunity: return "degenerate community";
    case ErrorCode::kEmptyCover: return "empty cover";
    case ErrorCode::kTooFewCommunities: return "too few communities";
    case ErrorCode::kSizeLimit: return "size limit";
    case ErrorCode::kUndefinedCorrelation: return "undefined correlation";
    case ErrorCode::kBenchmark: return "benchmark error";
    case ErrorCode::kIo: return "I/O error";
  }
  return "error";
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

double parse_double(std::string_view token, std::string_view what) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw Error(ErrorCode::kParse,
                "cannot parse " + std::string(what) + " from '" + std::string(token) + "'");
  }
  return value;
}

AtomicFileSet::~AtomicFileSet() {
  std::error_code ec;
  for (const auto& [target, temp] : staged_) std::filesystem::remove(temp, ec);
}

void AtomicFileSet::stage(const std::filesystem::path& target, std::string contents) {
  std::filesystem::path temp = target;
  temp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(staged_.size());
  std::ofstream out(temp, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + target.string());
  out << contents;
  out.close();
  if (!out) {
    std::error_code ec;
    std::filesystem::remove(temp, ec);
    throw Error(ErrorCode::kIo, "write failed: " + target.string());
  }
  staged_.emplace_back(target, temp);
}

void AtomicFileSet::commit() {
  for (const auto& [target, temp] : staged_) {
    std::error_code ec;
    std::filesystem::rename(temp, target, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot rename into place: " + target.string());
  }
  staged_.clear();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace commrank
