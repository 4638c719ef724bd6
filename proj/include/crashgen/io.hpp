// Copyright 2026 The crashgen Authors
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
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "crashgen/error.hpp"

namespace crashgen
{

using json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw data_error("cannot open file: " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partially written artifact.
inline void write_text_file_atomic(const std::filesystem::path & path, const std::string & text)
{
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw data_error("cannot open file for writing: " + tmp.string());
    }
    out << text;
    if (!out) {
      throw data_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

inline json parse_json_text(const std::string & text, const std::string & origin)
{
  try {
    return json::parse(text);
  } catch (const json::parse_error & e) {
    // e.byte is the 1-based offset of the failure.
    throw parse_error(origin + ": JSON parse error at byte " + std::to_string(e.byte) + ": " +
                      e.what());
  }
}

inline json load_json_file(const std::filesystem::path & path)
{
  return parse_json_text(read_text_file(path), path.string());
}

inline void save_json_file(const std::filesystem::path & path, const json & j)
{
  write_text_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace crashgen
