// Copyright 2026 The Sonda Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SONDA_TIMESTAMP_HPP_
#define SONDA_TIMESTAMP_HPP_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace sonda {

/// Wall-clock instant with millisecond resolution, always UTC.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// "YYYY-MM-DDTHH:MM:SS.mmmZ"
std::string format_timestamp(Timestamp t);

/// Accepts exactly the form produced by format_timestamp.
std::optional<Timestamp> parse_timestamp(std::string_view text);

Timestamp now_utc();

}  // namespace sonda

#endif  // SONDA_TIMESTAMP_HPP_
