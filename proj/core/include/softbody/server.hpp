#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "softbody/hub.hpp"
#include "softbody/persistence.hpp"

namespace softbody::server {

struct ServerConfig {
  std::string address = "0.0.0.0";
  std::uint16_t port = 8080;  // 0 picks a free port
  std::size_t max_instances = 8;
  // Optional .sbenv applied to every created instance.
  std::filesystem::path default_environment;
  // Directory served at "/"; empty serves nothing but /ws.
  std::filesystem::path static_root;
};

/// SOFTBODY_PORT wins over the command line when set to a valid port.
std::uint16_t resolve_port(std::uint16_t cli_port);

/// Receives outbound text. `droppable` marks frames that a congested
/// connection may skip. Called from stepping threads too; must not block.
using Outbound = std::function<void(std::string message, bool droppable)>;

/// Message types understood by Session, in documentation order.
const std::vector<std::string>& request_types();

/// One client connection's protocol state, independent of the transport.
/// Replies are emitted synchronously from handle(); frames and instance
/// errors arrive asynchronously from the hub.
class Session {
 public:
  Session(Hub& hub, std::shared_ptr<const persistence::Environment> environment, Outbound out);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Sends the greeting catalog.
  void open();
  void handle(std::string_view text);
  /// Drops every subscription; later frames are not delivered.
  void close();

 private:
  struct Dispatch;
  friend const std::vector<std::string>& request_types();

  void send(const std::string& text, bool droppable = false);

  Hub& hub_;
  std::shared_ptr<const persistence::Environment> environment_;
  std::shared_ptr<const Outbound> out_;
  std::mutex mutex_;
  std::vector<int> subscriptions_;
};

/// WebSocket at /ws plus static files, on a background io thread.
class Server {
 public:
  /// Binds immediately; throws Error(BindFailure) when the port is taken.
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  /// Blocks until stop() or a signal handled by the caller.
  void run();
  void stop();
  Hub& hub();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace softbody::server
