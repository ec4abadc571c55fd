#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "blockpath/challenges.hpp"
#include "blockpath/content.hpp"
#include "blockpath/debugger.hpp"

namespace blockpath {

struct ServerConfig {
  // Holds books/, challenges/, maps/ and weights/default.txt.
  std::string content_dir = "content";
  // Saved maps, gate states and telemetry logs. In-memory only when unset.
  std::optional<std::string> data_dir;
  std::size_t batch_size = 32;
  std::chrono::milliseconds batch_interval{250};
  double default_speed = DebugSession::kDefaultSpeed;
  double max_speed = DebugSession::kDefaultMaxSpeed;
  // Off for byte-stable event logs.
  bool report_wall_time = true;
  int default_width = 12;
  int default_depth = 12;
  TelemetryStore::Clock clock;
};

// Receives one serialized event line (without the newline).
using EventSink = std::function<void(const std::string&)>;

// Session manager. Each session executes its commands one at a time on its
// own thread; events for a command go to the sink that submitted it.
class Engine {
 public:
  explicit Engine(ServerConfig config);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Parses and routes one command line. Never throws for bad input; errors
  // are reported through the sink.
  void handle_line(std::string_view line, const EventSink& sink);

  // Blocks until every command queued so far in the session has run.
  void drain(const std::string& session_id);
  void shutdown();

  std::size_t session_count() const;
  const ServerConfig& config() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

// Newline-delimited JSON over TCP, one thread per connection.
class TcpServer {
 public:
  TcpServer(Engine& engine, const std::string& host, int port);
  ~TcpServer();

  int port() const { return port_; }
  void stop();

 private:
  void accept_loop();

  Engine& engine_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::thread acceptor_;
  struct Connections;
  std::unique_ptr<Connections> conns_;
};

// "host:port" or ":port"; ArgumentError otherwise.
std::pair<std::string, int> parse_listen_address(std::string_view text);

}  // namespace blockpath
