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

#include "sonda/server.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <sys/socket.h>
#include <thread>

#include "httplib.h"
#include "sonda/analytics.hpp"
#include "sonda/plan.hpp"
#include "sonda/store.hpp"

namespace sonda::server {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kPlanSuffix = ".training.json";

constexpr const char* kAppShell = R"(<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><meta name="viewport" content="width=device-width, initial-scale=1">
<title>sonda</title></head>
<body>
<nav><a href="/">Inicio</a> | <a href="/manual">Manual</a> | <a href="/trainings">Entrenamientos</a></nav>
<main id="app"><noscript>This page needs JavaScript.</noscript></main>
<script>
fetch('/api/trainings').then(r => r.json()).then(list => {
  const ul = document.createElement('ul');
  for (const t of list) {
    const li = document.createElement('li');
    li.textContent = t.title + ' (' + t.id + ')';
    ul.appendChild(li);
  }
  document.getElementById('app').replaceChildren(ul);
});
</script>
</body>
</html>
)";

struct ApiError {
  int status;
  std::string code;
  std::string message;
};

void send_error(httplib::Response& res, const ApiError& e) {
  res.status = e.status;
  res.set_content(json{{"code", e.code}, {"message", e.message}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::string media_type(const fs::path& path) {
  static const std::map<std::string, std::string> types{
      {".wav", "audio/wav"},        {".svg", "image/svg+xml"}, {".png", "image/png"},
      {".jpg", "image/jpeg"},       {".jpeg", "image/jpeg"},   {".mp3", "audio/mpeg"},
      {".ogg", "audio/ogg"},        {".html", "text/html; charset=utf-8"},
      {".js", "text/javascript"},   {".css", "text/css"},      {".json", "application/json"},
      {".csv", "text/csv"},         {".ico", "image/x-icon"},  {".txt", "text/plain; charset=utf-8"},
  };
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto it = types.find(ext);
  return it == types.end() ? "application/octet-stream" : it->second;
}

std::optional<std::string> read_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// `rel` inside `base` with no escape through '..' or symlinks.
std::optional<fs::path> contained(const fs::path& base, std::string_view rel) {
  if (!plan::is_safe_relative_path(rel)) return std::nullopt;
  std::error_code ec;
  const fs::path root = fs::weakly_canonical(base, ec);
  if (ec) return std::nullopt;
  const fs::path full = fs::weakly_canonical(base / fs::path(std::string(rel)), ec);
  if (ec) return std::nullopt;
  auto [r, f] = std::mismatch(root.begin(), root.end(), full.begin(), full.end());
  if (r != root.end()) return std::nullopt;
  return full;
}

std::string uuid_v4() {
  static std::mutex mu;
  static std::mt19937_64 gen{std::random_device{}()};
  std::uint64_t hi, lo;
  {
    std::lock_guard lock(mu);
    hi = gen();
    lo = gen();
  }
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
  char buf[37];
  std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0xffff), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

struct OpenSession {
  std::string training_id;
  std::string participant_id;
  Timestamp created_at;
};

}  // namespace

Config config_from_env() {
  Config c;
  if (const char* v = std::getenv("SONDA_PLANS_DIR"); v && *v) c.plans_dir = v;
  if (const char* v = std::getenv("SONDA_DATA_DIR"); v && *v) c.data_dir = v;
  if (const char* v = std::getenv("SONDA_PORT"); v && *v) {
    char* end = nullptr;
    const long port = std::strtol(v, &end, 10);
    if (*end != '\0' || port < 0 || port > 65535) {
      throw std::invalid_argument(std::string("SONDA_PORT is not a port number: ") + v);
    }
    c.port = static_cast<int>(port);
  }
  if (const char* v = std::getenv("SONDA_REPORT_TOKEN"); v && *v) c.report_token = v;
  return c;
}

json record_to_json(const runtime::TrialRecord& r) {
  return json{{"loop_name", r.loop_name},
              {"rep_index", r.rep_index},
              {"row_index", r.row_index},
              {"routine_name", r.routine_name},
              {"stimulus_image", r.stimulus_image},
              {"stimulus_audio", r.stimulus_audio},
              {"correct_answer", r.correct_answer},
              {"response", r.response},
              {"rt_ms", r.rt_ms ? json(*r.rt_ms) : json(nullptr)},
              {"outcome", runtime::to_string(r.outcome)}};
}

runtime::TrialRecord record_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be an object");
  auto field = [&](const char* name) -> const json& {
    auto it = j.find(name);
    if (it == j.end()) throw std::invalid_argument(std::string("missing field ") + name);
    return *it;
  };
  auto str = [&](const char* name) {
    const json& v = field(name);
    if (!v.is_string()) throw std::invalid_argument(std::string(name) + " must be a string");
    return v.get<std::string>();
  };
  auto index = [&](const char* name) {
    const json& v = field(name);
    if (!v.is_number_unsigned()) {
      throw std::invalid_argument(std::string(name) + " must be a non-negative integer");
    }
    return v.get<std::size_t>();
  };
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> known{
        "loop_name",      "rep_index", "row_index", "routine_name", "stimulus_image",
        "stimulus_audio", "correct_answer", "response", "rt_ms", "outcome"};
    if (!known.count(key)) throw std::invalid_argument("unknown field " + key);
  }
  runtime::TrialRecord r;
  r.loop_name = str("loop_name");
  r.rep_index = index("rep_index");
  r.row_index = index("row_index");
  r.routine_name = str("routine_name");
  r.stimulus_image = str("stimulus_image");
  r.stimulus_audio = str("stimulus_audio");
  r.correct_answer = str("correct_answer");
  r.response = str("response");
  const json& rt = field("rt_ms");
  if (!rt.is_null()) {
    if (!rt.is_number_integer()) throw std::invalid_argument("rt_ms must be an integer or null");
    r.rt_ms = rt.get<std::int64_t>();
  }
  auto outcome = runtime::parse_outcome(str("outcome"));
  if (!outcome) throw std::invalid_argument("outcome must be hit, miss or no_answer");
  r.outcome = *outcome;
  return r;
}

struct Server::Impl {
  explicit Impl(Config c) : config(std::move(c)), store(config.data_dir) {}

  Config config;
  store::Store store;
  httplib::Server http;
  int port = -1;
  std::atomic<bool> listening{false};
  std::atomic<bool> stopped{false};

  std::mutex mu;
  std::map<std::string, OpenSession> open;
  // Sessions between acceptance and the end of put_session.
  std::set<std::string> closing;

  // --- plans --------------------------------------------------------------

  struct PlanFile {
    fs::path path;
    plan::TrainingPlan plan;
  };

  // Every plan in the directory that validates cleanly, sorted by id.
  std::vector<PlanFile> valid_plans() const {
    std::vector<PlanFile> out;
    std::error_code ec;
    for (fs::directory_iterator it(config.plans_dir, ec), end; !ec && it != end;
         it.increment(ec)) {
      const std::string name = it->path().filename().string();
      if (name.size() <= kPlanSuffix.size() ||
          name.compare(name.size() - kPlanSuffix.size(), kPlanSuffix.size(), kPlanSuffix) != 0) {
        continue;
      }
      try {
        plan::TrainingPlan p = plan::load_plan_file(it->path());
        const plan::ValidationReport report = plan::validate_plan(p, config.plans_dir);
        if (!report.ok()) {
          std::cerr << "sonda: skipping " << it->path().string() << ": "
                    << report.error_count() << " validation error(s)\n";
          continue;
        }
        out.push_back({it->path(), std::move(p)});
      } catch (const std::exception& e) {
        std::cerr << "sonda: skipping " << it->path().string() << ": " << e.what() << "\n";
      }
    }
    std::sort(out.begin(), out.end(),
              [](const PlanFile& a, const PlanFile& b) { return a.plan.id < b.plan.id; });
    // Two files claiming one id: keep the first by path order for stability.
    out.erase(std::unique(out.begin(), out.end(),
                          [](const PlanFile& a, const PlanFile& b) {
                            return a.plan.id == b.plan.id;
                          }),
              out.end());
    return out;
  }

  std::optional<plan::TrainingPlan> find_plan(std::string_view id) const {
    for (auto& pf : valid_plans()) {
      if (pf.plan.id == id) return std::move(pf.plan);
    }
    return std::nullopt;
  }

  // --- handlers -----------------------------------------------------------

  void list_trainings(httplib::Response& res) const {
    json out = json::array();
    for (const auto& pf : valid_plans()) {
      out.push_back(json{{"id", pf.plan.id},
                         {"title", pf.plan.title},
                         {"description", pf.plan.description}});
    }
    send_json(res, out);
  }

  void get_training(const std::string& id, httplib::Response& res) const {
    auto p = find_plan(id);
    if (!p) return send_error(res, {404, "not_found", "no training '" + id + "'"});
    send_json(res, json{{"plan", json::parse(plan::serialize_plan(*p))},
                        {"assets_base", "/assets/" + id + "/"}});
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      return send_error(res, {422, "invalid_body", "body must be a JSON object"});
    }
    auto str_field = [&](const char* name) -> std::optional<std::string> {
      auto it = body.find(name);
      if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
        return std::nullopt;
      }
      return it->get<std::string>();
    };
    auto training = str_field("training_id");
    auto participant = str_field("participant_id");
    if (!training) return send_error(res, {422, "invalid_body", "training_id is required"});
    if (!participant) return send_error(res, {422, "invalid_body", "participant_id is required"});
    if (!find_plan(*training)) {
      return send_error(res, {404, "not_found", "no training '" + *training + "'"});
    }
    const std::string id = uuid_v4();
    {
      std::lock_guard lock(mu);
      open[id] = OpenSession{*training, *participant, now_utc()};
    }
    send_json(res, json{{"session_id", id}}, 201);
  }

  void submit_records(const std::string& session_id, const httplib::Request& req,
                      httplib::Response& res) {
    OpenSession session;
    {
      std::lock_guard lock(mu);
      auto it = open.find(session_id);
      if (it == open.end()) {
        if (closing.count(session_id) || store.contains(session_id)) {
          return send_error(res, {409, "conflict", "session already submitted"});
        }
        return send_error(res, {404, "not_found", "no open session '" + session_id + "'"});
      }
      session = it->second;
      open.erase(it);
      closing.insert(session_id);
    }
    // Put the session back as open unless it was stored.
    bool stored = false;
    struct Reopen {
      Impl& self;
      const std::string& id;
      const OpenSession& session;
      bool& stored;
      ~Reopen() {
        std::lock_guard lock(self.mu);
        self.closing.erase(id);
        if (!stored) self.open[id] = session;
      }
    } reopen{*this, session_id, session, stored};

    runtime::SessionResult result;
    try {
      result = parse_submission(session_id, session, req.body);
    } catch (const ApiError& e) {
      return send_error(res, e);
    }
    try {
      store.put_session(result);
    } catch (const store::StoreError& e) {
      if (e.kind() == store::ErrorKind::duplicate_session) {
        stored = true;
        return send_error(res, {409, "conflict", e.what()});
      }
      return send_error(res, {500, "internal", e.what()});
    }
    stored = true;
    res.status = 204;
  }

  runtime::SessionResult parse_submission(const std::string& session_id,
                                          const OpenSession& session, const std::string& text) {
    json body = json::parse(text, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      throw ApiError{422, "invalid_body", "body must be a JSON object"};
    }
    for (const auto& [key, value] : body.items()) {
      if (key != "records" && key != "finished_at" && key != "started_at") {
        throw ApiError{422, "invalid_body", "unknown field " + key};
      }
    }
    auto records = body.find("records");
    if (records == body.end() || !records->is_array()) {
      throw ApiError{422, "invalid_body", "records must be an array"};
    }
    auto timestamp = [&](const char* name) -> std::optional<Timestamp> {
      auto it = body.find(name);
      if (it == body.end()) return std::nullopt;
      std::optional<Timestamp> t;
      if (it->is_string()) t = parse_timestamp(it->get<std::string>());
      if (!t) throw ApiError{422, "invalid_body", std::string(name) + " must be a UTC timestamp"};
      return t;
    };
    runtime::SessionResult result;
    result.config.session_id = session_id;
    result.config.training_id = session.training_id;
    result.config.participant_id = session.participant_id;
    result.config.started_at = timestamp("started_at").value_or(session.created_at);
    auto finished = timestamp("finished_at");
    if (!finished) throw ApiError{422, "invalid_body", "finished_at is required"};
    result.finished_at = *finished;
    if (result.finished_at < result.config.started_at) {
      throw ApiError{422, "validation_failed", "finished_at precedes started_at"};
    }
    for (std::size_t i = 0; i < records->size(); ++i) {
      try {
        result.records.push_back(record_from_json((*records)[i]));
      } catch (const std::invalid_argument& e) {
        throw ApiError{422, "invalid_body", "records[" + std::to_string(i) + "]: " + e.what()};
      }
    }

    auto p = find_plan(session.training_id);
    if (!p) throw ApiError{500, "internal", "training disappeared"};
    std::vector<runtime::TrialSlot> slots;
    try {
      slots = runtime::trial_slots(plan::load_tables(std::move(*p), config.plans_dir));
    } catch (const std::exception& e) {
      throw ApiError{500, "internal", e.what()};
    }
    if (slots.size() != result.records.size()) {
      throw ApiError{422, "validation_failed",
                     "expected " + std::to_string(slots.size()) + " records, got " +
                         std::to_string(result.records.size())};
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& s = slots[i];
      const auto& r = result.records[i];
      const std::string where = "records[" + std::to_string(i) + "]: ";
      if (r.loop_name != s.loop_name || r.rep_index != s.rep_index ||
          r.row_index != s.row_index || r.routine_name != s.routine_name) {
        throw ApiError{422, "validation_failed", where + "does not match trial " +
                                                     s.loop_name + "/" +
                                                     std::to_string(s.rep_index) + "/" +
                                                     std::to_string(s.row_index)};
      }
      if (r.correct_answer != s.correct_answer) {
        throw ApiError{422, "validation_failed", where + "correct_answer differs from the plan"};
      }
      if (std::string v = runtime::check_record(r, s.window_ms); !v.empty()) {
        throw ApiError{422, "validation_failed", where + v};
      }
    }
    return result;
  }

  bool authorized(const httplib::Request& req, httplib::Response& res) const {
    if (!config.report_token) return true;
    if (req.get_header_value("Authorization") == "Bearer " + *config.report_token) return true;
    send_error(res, {401, "unauthorized", "missing or wrong bearer token"});
    return false;
  }

  void report(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    if (!authorized(req, res)) return;
    auto p = find_plan(id);
    if (!p) return send_error(res, {404, "not_found", "no training '" + id + "'"});
    store::Filter filter;
    filter.training_id = id;
    if (req.has_param("participant")) filter.participant_id = req.get_param_value("participant");
    try {
      const plan::LoadedPlan loaded = plan::load_tables(std::move(*p), config.plans_dir);
      std::vector<runtime::SessionResult> sessions;
      for (const auto& e : store.list_sessions(filter)) {
        sessions.push_back(store.load_session(e.session_id));
      }
      res.status = 200;
      res.set_content(analytics::render_json(analytics::training_report(loaded, sessions)),
                      "application/json");
    } catch (const std::exception& e) {
      send_error(res, {500, "internal", e.what()});
    }
  }

  void asset(const std::string& training, const std::string& rel, httplib::Response& res) const {
    auto p = find_plan(training);
    std::optional<fs::path> path;
    if (p) path = contained(config.plans_dir / p->assets_dir, rel);
    std::optional<std::string> body;
    if (path) body = read_file(*path);
    if (!body) return send_error(res, {404, "not_found", "no such asset"});
    res.status = 200;
    res.set_content(std::move(*body), media_type(*path));
  }

  void ui(const httplib::Request& req, httplib::Response& res) const {
    if (req.path.rfind("/api/", 0) == 0 || req.path == "/api") {
      return send_error(res, {404, "not_found", "no route " + req.path});
    }
    if (config.ui_dir) {
      const std::string rel = req.path.size() > 1 ? req.path.substr(1) : "";
      if (!rel.empty()) {
        if (auto path = contained(*config.ui_dir, rel)) {
          if (auto body = read_file(*path)) {
            res.set_content(std::move(*body), media_type(*path));
            return;
          }
        }
      }
      if (auto shell = read_file(*config.ui_dir / "index.html")) {
        res.set_content(std::move(*shell), "text/html; charset=utf-8");
        return;
      }
    }
    res.set_content(kAppShell, "text/html; charset=utf-8");
  }

  void routes() {
    http.Get("/api/trainings", [this](const httplib::Request&, httplib::Response& res) {
      list_trainings(res);
    });
    http.Get(R"(/api/trainings/([^/]+))", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      get_training(req.matches[1], res);
    });
    http.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      create_session(req, res);
    });
    http.Post(R"(/api/sessions/([^/]+)/records)",
              [this](const httplib::Request& req, httplib::Response& res) {
                submit_records(req.matches[1], req, res);
              });
    http.Get(R"(/api/reports/trainings/([^/]+))",
             [this](const httplib::Request& req, httplib::Response& res) {
               report(req.matches[1], req, res);
             });
    http.Get(R"(/assets/([^/]+)/(.+))", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      asset(req.matches[1], req.matches[2], res);
    });
    http.Get(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      ui(req, res);
    });
    http.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          std::string what = "unexpected error";
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            what = e.what();
          } catch (...) {
          }
          send_error(res, {500, "internal", what});
        });
    http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      // Unrouted methods and paths; handlers set their own bodies.
      if (res.body.empty()) send_error(res, {res.status, "not_found", "no route " + req.path});
    });
  }
};

Server::Server(Config config) : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->routes();
  // httplib's default adds SO_REUSEPORT, which lets a second server share
  // the port silently.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
}

Server::~Server() { stop(); }

int Server::bind() {
  Impl& s = *impl_;
  if (s.config.port == 0) {
    s.port = s.http.bind_to_any_port(s.config.host);
  } else {
    s.port = s.http.bind_to_port(s.config.host, s.config.port) ? s.config.port : -1;
  }
  if (s.port < 0) {
    throw ServerError("cannot bind " + s.config.host + ":" + std::to_string(s.config.port));
  }
  return s.port;
}

void Server::listen() {
  if (impl_->port < 0) throw ServerError("listen() before bind()");
  impl_->listening = true;
  if (!impl_->stopped) impl_->http.listen_after_bind();
  impl_->listening = false;
}

void Server::stop() {
  if (!impl_) return;
  impl_->stopped = true;
  // A stop racing a just-started listen() must wait for it to be running.
  while (impl_->listening && !impl_->http.is_running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  impl_->http.stop();
}

const Config& Server::config() const { return impl_->config; }

}  // namespace sonda::server
