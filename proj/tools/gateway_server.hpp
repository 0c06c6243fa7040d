#pragma once

#include <memory>
#include <string>
#include <thread>

#include "deixis/pipeline.hpp"

namespace deixis::tools {

// WebSocket front end: one LiveSession per connection, newline-delimited JSON
// messages in both directions (each outgoing message is its own text frame).
// All sessions share the immutable engine and run on one I/O thread.
class GatewayServer {
 public:
  // Binds immediately; throws Error(IoError) when the address is unusable.
  GatewayServer(std::shared_ptr<const Engine> engine, const std::string& address, unsigned short port);
  ~GatewayServer();
  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  unsigned short port() const;
  // Blocks until stop() completes.
  void run();
  void start_background();
  // Stops accepting, flushes every live session to its client, closes the
  // connections and lets run() return. Safe from any thread.
  void stop();
  // Waits for the background thread, if any.
  void join();

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
  std::thread thread_;
};

// Serves until SIGINT/SIGTERM; returns a process exit code.
int run_gateway(std::shared_ptr<const Engine> engine, const std::string& address, unsigned short port);

}  // namespace deixis::tools
