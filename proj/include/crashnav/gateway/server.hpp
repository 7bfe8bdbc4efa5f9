#pragma once

#include "crashnav/gateway/session.hpp"

#include <memory>

namespace crashnav::gateway {

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  SessionConfig session;
};

/// WebSocket host. Connecting to "/" opens a new session whose client
/// operates it; connecting to "/join/<session_id>" attaches a read-only
/// viewer to that session, which receives the same broadcast. All I/O and
/// session ticks run on the thread that calls run().
class Server {
 public:
  Server(ServerConfig cfg, PlanProvider plans, std::vector<std::string> plan_names);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Bound port, valid after construction.
  unsigned short port() const;
  /// Serves until stop() is called.
  void run();
  /// Thread-safe.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace crashnav::gateway
