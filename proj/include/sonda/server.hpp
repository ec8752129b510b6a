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

#ifndef SONDA_SERVER_HPP_
#define SONDA_SERVER_HPP_

/// \file
/// HTTP front end over a plans directory and a session store.
///
///     GET  /api/trainings                    [{id, title, description}]
///     GET  /api/trainings/{id}               {plan, assets_base}
///     POST /api/sessions                     {training_id, participant_id}
///     POST /api/sessions/{id}/records        {records, finished_at[, started_at]}
///     GET  /api/reports/trainings/{id}       [?participant=P]
///     GET  /assets/{training}/{path}
///     GET  anything else                     UI files, else the app shell
///
/// Errors are JSON objects {code, message}. Plans are read from disk on
/// every request; the only in-memory state is the set of open sessions.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "sonda/runtime.hpp"

namespace sonda::server {

struct Config {
  std::filesystem::path plans_dir = ".";
  std::filesystem::path data_dir = "data";
  /// Static UI build; when unset a minimal built-in shell is served.
  std::optional<std::filesystem::path> ui_dir;
  std::string host = "0.0.0.0";
  /// 0 picks an ephemeral port.
  int port = 8080;
  /// When set, report endpoints require `Authorization: Bearer <token>`.
  std::optional<std::string> report_token;
};

/// Defaults overridden by SONDA_PLANS_DIR, SONDA_DATA_DIR, SONDA_PORT and
/// SONDA_REPORT_TOKEN. Throws std::invalid_argument for a malformed port.
Config config_from_env();

class ServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json record_to_json(const runtime::TrialRecord& record);
/// Throws std::invalid_argument describing the first malformed field.
runtime::TrialRecord record_from_json(const nlohmann::json& j);

class Server {
 public:
  explicit Server(Config config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listening socket and returns the port. Throws ServerError
  /// when the port is taken.
  int bind();
  /// Serves until stop(); bind() must have succeeded.
  void listen();
  /// Safe to call from any thread.
  void stop();

  const Config& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sonda::server

#endif  // SONDA_SERVER_HPP_
