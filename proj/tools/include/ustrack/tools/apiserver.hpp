#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include "ustrack/annotstore.hpp"
#include "ustrack/jitterfilter.hpp"
#include "ustrack/media.hpp"

namespace httplib {
class Server;
}

namespace ustrack::tools {

inline constexpr int kDefaultPort = 8472;

/// Runs submitted tasks one at a time on a dedicated thread, in order.
class SerialExecutor {
 public:
  SerialExecutor();
  ~SerialExecutor();
  SerialExecutor(const SerialExecutor&) = delete;
  SerialExecutor& operator=(const SerialExecutor&) = delete;

  template <typename F>
  auto submit(F&& fn) -> std::future<decltype(fn())> {
    using R = decltype(fn());
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(fn));
    auto fut = task->get_future();
    {
      std::lock_guard lock(mu_);
      queue_.emplace_back([task] { (*task)(); });
    }
    cv_.notify_one();
    return fut;
  }

  /// Submits and blocks for the result; exceptions propagate.
  template <typename F>
  auto run(F&& fn) {
    return submit(std::forward<F>(fn)).get();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::thread worker_;
};

struct JobStatus {
  enum class State { queued, running, done, failed };
  std::string id;
  State state = State::queued;
  double progress = 0.0;  // [0, 1]
  std::string layer;      // input layer
  std::string result;     // output layer name once done
  std::string error;
};

const char* to_string(JobStatus::State s);

/// One loaded sequence plus its annotation store. All store access goes
/// through `executor()`.
class Session {
 public:
  Session(FrameSequence sequence, std::filesystem::path layers_dir);

  const FrameSequence& sequence() const { return seq_; }
  FrameBounds bounds() const { return FrameBounds::of(seq_); }
  const std::filesystem::path& layers_dir() const { return layers_dir_; }

  SerialExecutor& executor() { return exec_; }
  /// Only touch from tasks running on executor().
  AnnotationStore& store() { return store_; }
  std::set<std::string>& dirty() { return dirty_; }

  RstcConfig rstc;
  FilterConfig filter;

  /// Loads every `*.annot.json` in layers_dir. Returns one message per file
  /// that could not be loaded.
  std::vector<std::string> autoload_layers();

  /// Encoded PNG for frame i (cached).
  std::shared_ptr<const std::vector<std::uint8_t>> frame_png(int i);

  std::string start_filter_job(const std::string& layer, const FilterConfig& cfg);
  std::optional<JobStatus> job(const std::string& id) const;
  void wait_for_jobs();

 private:
  FrameSequence seq_;
  std::filesystem::path layers_dir_;
  SerialExecutor exec_;
  AnnotationStore store_;
  std::set<std::string> dirty_;

  std::mutex png_mu_;
  std::map<int, std::shared_ptr<const std::vector<std::uint8_t>>> png_cache_;

  mutable std::mutex jobs_mu_;
  std::map<std::string, JobStatus> jobs_;
  std::vector<std::jthread> workers_;
  int next_job_ = 1;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;
};

/// HTTP front end for a Session.
class ApiServer {
 public:
  ApiServer(Session& session, ServerOptions options);
  ~ApiServer();

  /// Binds the socket; returns the bound port. Throws on failure.
  int bind();
  /// Serves until stop(). Call after bind().
  void listen();
  /// bind() + listen() on a background thread; returns the port.
  int start_background();
  void stop();
  int port() const { return port_; }

 private:
  void install_routes();

  Session& session_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

/// OpenAPI 3 description of the HTTP API.
std::string openapi_document();

}  // namespace ustrack::tools
