#include "ustrack/tools/apiserver.hpp"

#include <httplib.h>

#include <algorithm>
#include <iostream>
#include <regex>

#include <json.hpp>

#include "ustrack/error.hpp"

namespace ustrack::tools {

using nlohmann::json;

// ---------------------------------------------------------------------------
// SerialExecutor

SerialExecutor::SerialExecutor() {
  worker_ = std::thread([this] {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      task();
    }
  });
}

SerialExecutor::~SerialExecutor() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_one();
  worker_.join();
}

// ---------------------------------------------------------------------------
// Session

const char* to_string(JobStatus::State s) {
  switch (s) {
    case JobStatus::State::queued: return "queued";
    case JobStatus::State::running: return "running";
    case JobStatus::State::done: return "done";
    case JobStatus::State::failed: return "failed";
  }
  return "unknown";
}

Session::Session(FrameSequence sequence, std::filesystem::path layers_dir)
    : seq_(std::move(sequence)), layers_dir_(std::move(layers_dir)) {
  filter.window_frames = std::min(seq_.count(), FilterConfig::window_from_seconds(0.6, seq_.calibration().fps));
}

std::vector<std::string> Session::autoload_layers() {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(layers_dir_, ec)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 11 && name.ends_with(".annot.json")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> problems;
  for (const auto& path : files) {
    try {
      AnnotationLayer layer = load_layer(path, bounds());
      exec_.run([&] {
        if (store_.has_layer(layer.name)) {
          throw ContractError(path.string() + ": layer '" + layer.name + "' already loaded");
        }
        store_.add_layer(std::move(layer));
      });
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
  }
  return problems;
}

std::shared_ptr<const std::vector<std::uint8_t>> Session::frame_png(int i) {
  {
    std::lock_guard lock(png_mu_);
    if (auto it = png_cache_.find(i); it != png_cache_.end()) return it->second;
  }
  auto png = std::make_shared<const std::vector<std::uint8_t>>(encode_png(seq_.frame(i)));
  std::lock_guard lock(png_mu_);
  if (png_cache_.size() >= 256) png_cache_.erase(png_cache_.begin());
  png_cache_[i] = png;
  return png;
}

std::string Session::start_filter_job(const std::string& layer_name, const FilterConfig& cfg) {
  cfg.validate();
  AnnotationLayer input = exec_.run([&] { return store_.layer(layer_name); });
  std::string id;
  {
    std::lock_guard lock(jobs_mu_);
    id = "job-" + std::to_string(next_job_++);
    jobs_[id] = JobStatus{id, JobStatus::State::queued, 0.0, layer_name, {}, {}};
  }
  workers_.emplace_back([this, id, cfg, input = std::move(input)] {
    auto update = [&](auto&& fn) {
      std::lock_guard lock(jobs_mu_);
      fn(jobs_[id]);
    };
    update([](JobStatus& j) { j.state = JobStatus::State::running; });
    try {
      AnnotationLayer out = filter_layer(seq_, input, cfg, [&](int done, int total) {
        update([&](JobStatus& j) { j.progress = total > 0 ? double(done) / total : 1.0; });
      });
      const std::string name = out.name;
      exec_.run([&] {
        store_.put_layer(std::move(out));
        dirty_.insert(name);
      });
      update([&](JobStatus& j) {
        j.state = JobStatus::State::done;
        j.progress = 1.0;
        j.result = name;
      });
    } catch (const std::exception& e) {
      update([&](JobStatus& j) {
        j.state = JobStatus::State::failed;
        j.error = e.what();
      });
    }
  });
  return id;
}

std::optional<JobStatus> Session::job(const std::string& id) const {
  std::lock_guard lock(jobs_mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void Session::wait_for_jobs() {
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
}

// ---------------------------------------------------------------------------
// HTTP helpers

namespace {

struct HttpError : std::runtime_error {
  int status;
  json fields;
  HttpError(int status, const std::string& msg, json fields = nullptr)
      : std::runtime_error(msg), status(status), fields(std::move(fields)) {}
};

HttpError unprocessable(const std::string& field, const std::string& msg) {
  return HttpError(422, "invalid request: " + field + ": " + msg, json{{field, msg}});
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump() + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, const json& fields = nullptr) {
  json body{{"error", message}};
  if (!fields.is_null()) body["fields"] = fields;
  send_json(res, body, status);
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const HttpError& e) {
      send_error(res, e.status, e.what(), e.fields);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ValidationError& e) {
      send_error(res, 422, e.what());
    } catch (const ContractError& e) {
      send_error(res, 422, e.what());
    } catch (const GeometryError& e) {
      send_error(res, 422, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw HttpError(400, std::string("malformed JSON body: ") + e.what());
  }
  if (!body.is_object()) throw HttpError(422, "request body must be a JSON object");
  return body;
}

std::string require_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw unprocessable(field, "required non-empty string");
  }
  return it->get<std::string>();
}

int require_int(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_number_integer()) throw unprocessable(field, "required integer");
  return it->get<int>();
}

double require_number(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_number()) throw unprocessable(field, "required number");
  return it->get<double>();
}

/// Absent or "all" selects every label.
std::optional<std::string> label_selector(const json& body) {
  auto it = body.find("label");
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string() || it->get<std::string>().empty()) throw unprocessable("label", "expected a label id or \"all\"");
  if (*it == "all") return std::nullopt;
  return it->get<std::string>();
}

FrameRange range_field(const json& body, int frames) {
  auto it = body.find("range");
  if (it == body.end() || it->is_null()) return {0, frames - 1};
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() || !(*it)[1].is_number_integer()) {
    throw unprocessable("range", "expected [first, last]");
  }
  FrameRange r{(*it)[0].get<int>(), (*it)[1].get<int>()};
  if (r.first < 0 || r.last >= frames || r.first > r.last) {
    throw unprocessable("range", "must satisfy 0 <= first <= last <= " + std::to_string(frames - 1));
  }
  return r;
}

int frame_param(const std::string& text, int frames) {
  int f = -1;
  try {
    f = std::stoi(text);
  } catch (const std::exception&) {
    f = -1;
  }
  if (f < 0 || f >= frames) throw NotFoundError("frame " + text + " outside [0, " + std::to_string(frames - 1) + "]");
  return f;
}

/// Revision token from If-Match, ?revision= or the body, if any.
std::optional<std::uint64_t> revision_token(const httplib::Request& req, const json& body) {
  std::string text;
  if (req.has_header("If-Match")) {
    text = req.get_header_value("If-Match");
    text.erase(std::remove(text.begin(), text.end(), '"'), text.end());
  } else if (req.has_param("revision")) {
    text = req.get_param_value("revision");
  } else if (auto it = body.find("revision"); it != body.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) throw unprocessable("revision", "expected a non-negative integer");
    return it->get<std::uint64_t>();
  } else {
    return std::nullopt;
  }
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw unprocessable("revision", "expected a non-negative integer");
  }
}

void check_revision(const AnnotationStore& store, const std::string& layer, std::optional<std::uint64_t> token) {
  const auto current = store.revision(layer);
  if (token && *token != current) {
    throw HttpError(409,
                    "layer '" + layer + "' changed (revision " + std::to_string(current) + ", request had " +
                        std::to_string(*token) + ")",
                    json{{"revision", current}});
  }
}

json points_json(const Trajectory& traj) {
  json out = json::object();
  for (const auto& [f, p] : traj) out[std::to_string(f)] = {p.x, p.y};
  return out;
}

json layer_summary(const AnnotationStore& store, const std::set<std::string>& dirty, const std::string& name) {
  const AnnotationLayer& l = store.layer(name);
  json labels = json::array();
  std::size_t points = 0;
  for (const auto& [id, traj] : l.labels) {
    labels.push_back(id);
    points += traj.size();
  }
  return {{"name", name}, {"revision", store.revision(name)}, {"labels", labels}, {"points", points},
          {"dirty", dirty.count(name) != 0}};
}

bool valid_layer_name(const std::string& name) {
  static const std::regex re(R"([A-Za-z0-9_.\-]+)");
  return std::regex_match(name, re) && name != "." && name != "..";
}

bool local_origin(const std::string& origin) {
  static const std::regex re(R"(https?://(localhost|127\.0\.0\.1|\[::1\])(:\d+)?)");
  return std::regex_match(origin, re);
}

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>ustrack</title></head>
<body>
<h1>ustrack annotation service</h1>
<p>No UI bundle is mounted. Start the server with <code>--ui &lt;dir&gt;</code> to serve one.</p>
<p>The JSON API is described at <a href="/api/spec">/api/spec</a>.</p>
</body></html>
)";

}  // namespace

// ---------------------------------------------------------------------------
// ApiServer

ApiServer::ApiServer(Session& session, ServerOptions options)
    : session_(session), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ApiServer::~ApiServer() {
  stop();
  if (thread_.joinable()) thread_.join();
}

int ApiServer::bind() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ <= 0) {
    throw Error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  return port_;
}

void ApiServer::listen() { server_->listen_after_bind(); }

int ApiServer::start_background() {
  const int port = bind();
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return port;
}

void ApiServer::stop() {
  if (server_) server_->stop();
}

void ApiServer::install_routes() {
  auto& svr = *server_;
  Session& s = session_;
  const int frames = s.sequence().count();

  svr.set_pre_routing_handler([](const httplib::Request& req, httplib::Response& res) {
    if (req.has_header("Origin")) {
      const std::string origin = req.get_header_value("Origin");
      if (!local_origin(origin)) {
        send_error(res, 403, "origin '" + origin + "' is not allowed");
        return httplib::Server::HandlerResponse::Handled;
      }
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
      if (req.method == "OPTIONS") {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, If-Match");
        res.status = 204;
        return httplib::Server::HandlerResponse::Handled;
      }
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  svr.Get("/api/meta", guarded([&s](const httplib::Request&, httplib::Response& res) {
    const auto& seq = s.sequence();
    const auto& cal = seq.calibration();
    json meta{{"frames", seq.count()},
              {"fps", cal.fps},
              {"width", seq.width()},
              {"height", seq.height()},
              {"mm_per_px", {cal.mm_per_px_x, cal.mm_per_px_y}},
              {"window_frames", s.filter.window_frames}};
    s.executor().run([&] {
      meta["layers"] = s.store().layer_names();
      meta["primary"] = s.store().primary_layer() ? json(*s.store().primary_layer()) : json(nullptr);
      meta["overlay"] = s.store().overlay_layer() ? json(*s.store().overlay_layer()) : json(nullptr);
    });
    send_json(res, meta);
  }));

  svr.Get(R"(/api/frame/([^/]+))", guarded([&s, frames](const httplib::Request& req, httplib::Response& res) {
    const int f = frame_param(req.matches[1], frames);
    const auto png = s.frame_png(f);
    res.set_content(reinterpret_cast<const char*>(png->data()), png->size(), "image/png");
    res.set_header("Cache-Control", "max-age=3600");
  }));

  // -- layers ---------------------------------------------------------------

  svr.Get("/api/layers", guarded([&s](const httplib::Request&, httplib::Response& res) {
    const json out = s.executor().run([&] {
      json list = json::array();
      for (const auto& name : s.store().layer_names()) list.push_back(layer_summary(s.store(), s.dirty(), name));
      return json{{"layers", list}};
    });
    send_json(res, out);
  }));

  svr.Post("/api/layers", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string name = require_string(body, "name");
    if (!valid_layer_name(name)) throw unprocessable("name", "use letters, digits, '.', '_' or '-'");
    AnnotationLayer layer{name, {}};
    if (auto it = body.find("labels"); it != body.end()) {
      if (!it->is_array()) throw unprocessable("labels", "expected an array of label ids");
      for (const auto& id : *it) {
        if (!id.is_string() || id.get<std::string>().empty()) throw unprocessable("labels", "label ids must be non-empty strings");
        layer.labels[id.get<std::string>()];
      }
    }
    const std::optional<std::string> from =
        body.contains("copy_from") ? std::optional(require_string(body, "copy_from")) : std::nullopt;
    const json out = s.executor().run([&] {
      if (s.store().has_layer(name)) throw HttpError(409, "layer '" + name + "' already exists");
      if (from) {
        const AnnotationLayer& src = s.store().layer(*from);
        for (const auto& [id, traj] : src.labels) layer.labels[id] = traj;
      }
      s.store().add_layer(std::move(layer));
      s.dirty().insert(name);
      return layer_summary(s.store(), s.dirty(), name);
    });
    send_json(res, out, 201);
  }));

  svr.Get(R"(/api/layers/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1];
    const json out = s.executor().run([&] {
      const AnnotationLayer& l = s.store().layer(name);
      json labels = json::object();
      for (const auto& [id, traj] : l.labels) labels[id] = points_json(traj);
      return json{{"name", name}, {"revision", s.store().revision(name)}, {"labels", labels}};
    });
    send_json(res, out);
  }));

  svr.Delete(R"(/api/layers/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1];
    const json body = parse_body(req);
    const auto token = revision_token(req, body);
    s.executor().run([&] {
      check_revision(s.store(), name, token);
      s.store().remove_layer(name);
      s.dirty().erase(name);
    });
    send_json(res, {{"deleted", name}});
  }));

  svr.Post(R"(/api/layers/([^/]+)/labels)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1];
    const json body = parse_body(req);
    const std::string id = require_string(body, "id");
    const json out = s.executor().run([&] {
      if (!s.store().layer(name).labels.count(id)) {
        s.store().mutate(name, [&](AnnotationLayer& l) { l.labels[id]; });
        s.dirty().insert(name);
      }
      return json{{"layer", name}, {"label", id}, {"revision", s.store().revision(name)}};
    });
    send_json(res, out, 201);
  }));

  svr.Get(R"(/api/layers/([^/]+)/labels/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.matches[1], id = req.matches[2];
    const json out = s.executor().run([&] {
      const Trajectory& traj = label_or_throw(s.store().layer(name), id);
      return json{{"layer", name}, {"label", id}, {"revision", s.store().revision(name)}, {"points", points_json(traj)}};
    });
    send_json(res, out);
  }));

  svr.Put(R"(/api/layers/([^/]+)/labels/([^/]+)/frames/([^/]+))",
          guarded([&s, frames](const httplib::Request& req, httplib::Response& res) {
            const std::string name = req.matches[1], id = req.matches[2];
            const int f = frame_param(req.matches[3], frames);
            const json body = parse_body(req);
            const Point2 p{require_number(body, "x"), require_number(body, "y")};
            const auto token = revision_token(req, body);
            const auto bounds = s.bounds();
            const json out = s.executor().run([&] {
              s.store().layer(name);
              check_revision(s.store(), name, token);
              label_or_throw(s.store().layer(name), id);
              if (!bounds.contains(p)) {
                throw HttpError(422, "point outside the frame",
                                json{{"x", "must lie in [0, " + std::to_string(bounds.width - 1) + "]"},
                                     {"y", "must lie in [0, " + std::to_string(bounds.height - 1) + "]"}});
              }
              s.store().mutate(name, [&](AnnotationLayer& l) { set_point(l, id, f, p, bounds); });
              s.dirty().insert(name);
              return json{{"frame", f}, {"x", p.x}, {"y", p.y}, {"revision", s.store().revision(name)}};
            });
            send_json(res, out);
          }));

  svr.Delete(R"(/api/layers/([^/]+)/labels/([^/]+)/frames/([^/]+))",
             guarded([&s, frames](const httplib::Request& req, httplib::Response& res) {
               const std::string name = req.matches[1], id = req.matches[2];
               const int f = frame_param(req.matches[3], frames);
               const json body = parse_body(req);
               const auto token = revision_token(req, body);
               const json out = s.executor().run([&] {
                 s.store().layer(name);
                 check_revision(s.store(), name, token);
                 label_or_throw(s.store().layer(name), id);
                 bool removed = false;
                 if (get_point(s.store().layer(name), id, f)) {
                   removed = s.store().mutate(name, [&](AnnotationLayer& l) { return remove_point(l, id, f); });
                   s.dirty().insert(name);
                 }
                 return json{{"removed", removed}, {"revision", s.store().revision(name)}};
               });
               send_json(res, out);
             }));

  svr.Get(R"(/api/layers/([^/]+)/annotated-frames)",
          guarded([&s](const httplib::Request& req, httplib::Response& res) {
            const std::string name = req.matches[1];
            const std::string label = req.has_param("label") ? req.get_param_value("label") : "";
            const json out = s.executor().run([&] {
              const AnnotationLayer& l = s.store().layer(name);
              std::vector<int> frames_list;
              if (label.empty()) {
                frames_list = annotated_frames(l);
              } else {
                for (const auto& [f, p] : label_or_throw(l, label)) frames_list.push_back(f);
              }
              return json{{"layer", name}, {"frames", frames_list}};
            });
            send_json(res, out);
          }));

  // -- operations -----------------------------------------------------------

  svr.Post("/api/ops/guess", guarded([&s, frames](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string name = require_string(body, "layer"), id = require_string(body, "label");
    const int f = require_int(body, "frame");
    if (f < 0 || f >= frames) throw NotFoundError("frame " + std::to_string(f) + " outside the sequence");
    const AnnotationLayer snapshot = s.executor().run([&] {
      AnnotationLayer l{name, {}};
      l.labels[id] = label_or_throw(s.store().layer(name), id);
      return l;
    });
    if (snapshot.labels.at(id).empty()) throw unprocessable("label", "label '" + id + "' has no annotated frames");
    const TrackedPoint g = guess(s.sequence(), snapshot, id, f, s.rstc.track);
    send_json(res, {{"x", g.p.x}, {"y", g.p.y}, {"status", g.ok() ? "ok" : "lost"}});
  }));

  svr.Post("/api/ops/interpolate", guarded([&s, frames](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string name = require_string(body, "layer");
    const auto label = label_selector(body);
    const FrameRange range = range_field(body, frames);
    const bool overwrite = body.value("overwrite", false);
    const auto token = revision_token(req, body);
    const json out = s.executor().run([&] {
      s.store().layer(name);
      check_revision(s.store(), name, token);
      const int written = s.store().mutate(name, [&](AnnotationLayer& l) {
        return interpolate_gaps(s.sequence(), l, label, range, s.rstc, overwrite);
      });
      s.dirty().insert(name);
      return json{{"written", written}, {"revision", s.store().revision(name)}};
    });
    send_json(res, out);
  }));

  svr.Post("/api/ops/trim", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string name = require_string(body, "layer");
    const auto token = revision_token(req, body);
    std::optional<std::set<std::string, LabelLess>> expected;
    if (auto it = body.find("expected"); it != body.end() && !it->is_null()) {
      if (!it->is_array() || it->empty()) throw unprocessable("expected", "expected a non-empty array of label ids");
      expected.emplace();
      for (const auto& id : *it) {
        if (!id.is_string()) throw unprocessable("expected", "label ids must be strings");
        expected->insert(id.get<std::string>());
      }
    }
    const json out = s.executor().run([&] {
      const AnnotationLayer& l = s.store().layer(name);
      check_revision(s.store(), name, token);
      std::set<std::string, LabelLess> want;
      if (expected) {
        want = *expected;
      } else {
        for (const auto& [id, traj] : l.labels) want.insert(id);
      }
      if (want.empty()) throw unprocessable("expected", "layer has no labels");
      const auto removed = s.store().mutate(name, [&](AnnotationLayer& m) { return trim(m, want); });
      if (!removed.empty()) s.dirty().insert(name);
      return json{{"removed", removed}, {"revision", s.store().revision(name)}};
    });
    send_json(res, out);
  }));

  svr.Post("/api/ops/copy", guarded([&s, frames](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string src = require_string(body, "src"), dst = require_string(body, "dst");
    if (src == dst) throw unprocessable("dst", "must differ from src");
    const auto label = label_selector(body);
    const FrameRange range = range_field(body, frames);
    const auto token = revision_token(req, body);
    const json out = s.executor().run([&] {
      const AnnotationLayer source = s.store().layer(src);
      s.store().layer(dst);
      check_revision(s.store(), dst, token);
      s.store().mutate(dst, [&](AnnotationLayer& d) { copy_range(source, d, label, range); });
      s.dirty().insert(dst);
      return json{{"layer", dst}, {"revision", s.store().revision(dst)}};
    });
    send_json(res, out);
  }));

  svr.Post("/api/ops/filter", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string name = require_string(body, "layer");
    FilterConfig cfg = s.filter;
    cfg.rstc = s.rstc;
    const bool has_frames = body.contains("window") && !body["window"].is_null();
    const bool has_seconds = body.contains("window_seconds") && !body["window_seconds"].is_null();
    if (has_frames && has_seconds) throw unprocessable("window", "give either window or window_seconds, not both");
    if (has_frames) cfg.window_frames = require_int(body, "window");
    if (has_seconds) {
      cfg.window_frames = FilterConfig::window_from_seconds(require_number(body, "window_seconds"),
                                                            s.sequence().calibration().fps);
    }
    if (body.contains("alpha")) cfg.rstc.alpha = require_number(body, "alpha");
    if (cfg.window_frames < 3) throw unprocessable("window", "must be >= 3 frames");
    if (cfg.window_frames > s.sequence().count()) {
      throw unprocessable("window", "window exceeds sequence length (" + std::to_string(cfg.window_frames) + " > " +
                                        std::to_string(s.sequence().count()) + " frames)");
    }
    if (!(cfg.rstc.alpha > 0.0)) throw unprocessable("alpha", "must be > 0");
    const std::string id = s.start_filter_job(name, cfg);
    send_json(res, {{"job", id}, {"output", name + "_lkrstc"}, {"window", cfg.window_frames}}, 202);
  }));

  svr.Get(R"(/api/jobs/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const auto job = s.job(req.matches[1]);
    if (!job) throw NotFoundError("unknown job '" + std::string(req.matches[1]) + "'");
    json out{{"id", job->id}, {"state", to_string(job->state)}, {"progress", job->progress}, {"layer", job->layer}};
    if (!job->result.empty()) out["result"] = job->result;
    if (!job->error.empty()) out["error"] = job->error;
    send_json(res, out);
  }));

  svr.Post("/api/save", guarded([&s](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string name = require_string(body, "layer");
    const std::filesystem::path path = s.layers_dir() / (name + ".annot.json");
    s.executor().run([&] {
      save_layer(s.store().layer(name), path);
      s.dirty().erase(name);
    });
    send_json(res, {{"layer", name}, {"path", path.string()}});
  }));

  svr.Post("/api/undo", guarded([&s](const httplib::Request&, httplib::Response& res) {
    const bool undone = s.executor().run([&] { return s.store().undo(); });
    send_json(res, {{"undone", undone}});
  }));

  svr.Get("/api/selection", guarded([&s](const httplib::Request&, httplib::Response& res) {
    const json out = s.executor().run([&] {
      const auto& st = s.store();
      return json{{"primary", st.primary_layer() ? json(*st.primary_layer()) : json(nullptr)},
                  {"overlay", st.overlay_layer() ? json(*st.overlay_layer()) : json(nullptr)},
                  {"label", st.current_label()},
                  {"frame", st.current_frame()}};
    });
    send_json(res, out);
  }));

  svr.Put("/api/selection", guarded([&s, frames](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    auto optional_name = [&](const char* field) -> std::optional<std::optional<std::string>> {
      auto it = body.find(field);
      if (it == body.end()) return std::nullopt;
      if (it->is_null()) return std::optional<std::string>{};
      if (!it->is_string()) throw unprocessable(field, "expected a layer name or null");
      return std::optional<std::string>(it->get<std::string>());
    };
    const auto primary = optional_name("primary");
    const auto overlay = optional_name("overlay");
    std::optional<int> frame;
    if (body.contains("frame")) {
      frame = require_int(body, "frame");
      if (*frame < 0 || *frame >= frames) throw unprocessable("frame", "outside the sequence");
    }
    std::optional<std::string> label;
    if (body.contains("label")) label = require_string(body, "label");
    s.executor().run([&] {
      auto& st = s.store();
      if (primary) st.select_primary(*primary);
      if (overlay) st.select_overlay(*overlay);
      if (frame) st.set_current_frame(*frame);
      if (label) st.set_current_label(*label);
    });
    res.status = 204;
  }));

  svr.Get("/api/spec", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(openapi_document(), "application/json");
  });

  if (options_.ui_dir) {
    if (!svr.set_mount_point("/", options_.ui_dir->string())) {
      throw LoadError("UI directory " + options_.ui_dir->string() + " does not exist");
    }
  } else {
    svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

}  // namespace ustrack::tools
