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

#include <stdexcept>
#include <string>

namespace crashgen
{

// Malformed input text/bytes (JSON syntax, truncated files, bad CSV).
class parse_error : public std::runtime_error
{
public:
  explicit parse_error(const std::string & what) : std::runtime_error(what) {}
};

// Structurally readable data that violates a domain invariant
// (negative speed, k mismatch, quadrant out of range, ...).
class validation_error : public std::runtime_error
{
public:
  explicit validation_error(const std::string & what) : std::runtime_error(what) {}
};

// Unsatisfiable request against otherwise valid data
// (no compatible lane, empty dataset, unknown template, NaN cost).
class data_error : public std::runtime_error
{
public:
  explicit data_error(const std::string & what) : std::runtime_error(what) {}
};

}  // namespace crashgen
