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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace commrank {

std::vector<std::string_view> split_whitespace(std::string_view line);

// Shortest representation that round-trips to the same double.
std::string format_double(double x);

double parse_double(std::string_view token, std::string_view what);

/// Collects output files and publishes them together: each is written to a
/// temporary sibling first and renamed only by commit(). Uncommitted
/// temporaries are removed on destruction.
class AtomicFileSet {
 public:
  AtomicFileSet() = default;
  AtomicFileSet(const AtomicFileSet&) = delete;
  AtomicFileSet& operator=(const AtomicFileSet&) = delete;
  ~AtomicFileSet();

  void stage(const std::filesystem::path& target, std::string contents);
  void commit();

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace commrank
