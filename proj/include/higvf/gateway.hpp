#pragma once

// Operator gateway: a websocket endpoint streaming StateFrames and accepting
// operator commands, plus plain HTTP GET /snapshot and GET /scene.
//
// Session protocol (one operator at a time):
//   server -> scene, then one frame per published tick (latest-frame
//   coalescing when the client is slow; tick numbers never go backwards)
//   client -> cmd.* / req.snapshot / req.scene, each answered by ack or
//   reject (requests are answered with the frame / scene itself)
// A second concurrent operator is rejected and disconnected.

#include <memory>
#include <string>

#include "higvf/engine.hpp"
#include "higvf/frame.hpp"

namespace higvf {

struct GatewayOptions {
  std::string address{"127.0.0.1"};
  unsigned short port{0};  ///< 0 picks a free port
};

class Gateway {
 public:
  /// Commands are validated against the latest snapshot and pushed to `queue`.
  Gateway(CommandQueue& queue, GatewayOptions options);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds and starts the network thread. Throws std::runtime_error on bind failure.
  void start();
  void stop();
  unsigned short port() const;

  /// Thread-safe. Publishes an immutable snapshot taken at a tick boundary.
  void publish(std::shared_ptr<const World> snapshot, const TickRecord& record);

  /// Number of currently connected operator sessions (0 or 1).
  int sessions() const;

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace higvf
