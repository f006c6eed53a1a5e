#include "higvf/gateway.hpp"

#include <atomic>
#include <deque>
#include <future>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace higvf {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class WsSession;

}  // namespace

struct Gateway::Impl : std::enable_shared_from_this<Gateway::Impl> {
  Impl(CommandQueue& q, GatewayOptions o) : queue(q), options(std::move(o)), acceptor(ioc) {}

  CommandQueue& queue;
  GatewayOptions options;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::thread thread;
  std::atomic<bool> running{false};

  mutable std::mutex mutex;
  std::shared_ptr<const World> snapshot;
  std::string frame_text;
  long frame_tick{-1};
  std::string scene_text;
  std::weak_ptr<WsSession> active;  // io thread only

  void accept();
  void offerFrame(long tick, std::shared_ptr<const std::string> text);

  std::string currentFrame() const {
    std::lock_guard lock(mutex);
    return frame_text;
  }
  std::string currentScene() const {
    std::lock_guard lock(mutex);
    return scene_text;
  }
  std::shared_ptr<const World> currentWorld() const {
    std::lock_guard lock(mutex);
    return snapshot;
  }
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, std::shared_ptr<Gateway::Impl> gw)
      : ws_(std::move(socket)), gw_(std::move(gw)) {}

  template <class Request>
  void start(const Request& req, bool refuse) {
    refuse_ = refuse;
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->onAccept(ec); });
  }

  void offerFrame(long tick, std::shared_ptr<const std::string> text) {
    if (closed_ || refuse_ || tick <= last_frame_tick_) return;
    if (pending_frame_tick_ >= tick) return;
    pending_frame_ = std::move(text);  // older pending frame is dropped (coalescing)
    pending_frame_tick_ = tick;
    pump();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
    ws_.next_layer().close(ec);
  }

 private:
  void onAccept(beast::error_code ec) {
    if (ec) return;
    if (refuse_) {
      send(encodeReject({-1, "operator already connected (single-operator session)"}));
      closing_after_write_ = true;
      return;
    }
    const std::string scene = gw_->currentScene();
    if (!scene.empty()) send(scene);
    {
      std::lock_guard lock(gw_->mutex);
      if (!gw_->frame_text.empty()) {
        pending_frame_ = std::make_shared<const std::string>(gw_->frame_text);
        pending_frame_tick_ = gw_->frame_tick;
      }
    }
    pump();
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->onRead(ec); });
  }

  void onRead(beast::error_code ec) {
    if (ec) {
      closed_ = true;
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    handle(text);
    if (!closed_) read();
  }

  void handle(const std::string& text) {
    ClientMessage msg;
    try {
      msg = decodeClientMessage(text);
    } catch (const DecodeError& e) {
      long seq = -1;
      try {
        const auto j = nlohmann::json::parse(text);
        if (j.is_object() && j.contains("seq") && j.at("seq").is_number_integer()) seq = j.at("seq").get<long>();
      } catch (...) {
      }
      send(encodeReject({seq, e.what()}));
      return;
    }
    const long seq = std::visit([](const auto& m) { return m.seq; }, msg);
    if (seq <= last_seq_) {
      send(encodeReject({seq, "sequence number must increase (last " + std::to_string(last_seq_) + ")"}));
      return;
    }
    last_seq_ = seq;
    if (std::holds_alternative<SnapshotRequest>(msg)) {
      send(gw_->currentFrame());
      return;
    }
    if (std::holds_alternative<SceneRequest>(msg)) {
      send(gw_->currentScene());
      return;
    }
    const auto& cmd = std::get<CommandMessage>(msg);
    const auto world = gw_->currentWorld();
    if (!world) {
      send(encodeReject({seq, "engine not started"}));
      return;
    }
    if (auto reason = checkCommand(*world, cmd.payload)) {
      send(encodeReject({seq, *reason}));
      return;
    }
    const long tick = gw_->queue.push(OperatorCommand{cmd.payload, world->clock});
    send(encodeAck({seq, tick}));
  }

  void send(std::string text) {
    if (closed_ || text.empty()) return;
    control_.push_back(std::make_shared<const std::string>(std::move(text)));
    pump();
  }

  void pump() {
    if (writing_ || closed_) return;
    std::shared_ptr<const std::string> next;
    long tick = -1;
    if (!control_.empty()) {
      next = control_.front();
      control_.pop_front();
    } else if (pending_frame_) {
      next = std::move(pending_frame_);
      tick = pending_frame_tick_;
      pending_frame_.reset();
    } else {
      if (closing_after_write_) close();
      return;
    }
    if (tick >= 0) last_frame_tick_ = tick;
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(*next), [self = shared_from_this(), next](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) {
        self->closed_ = true;
        return;
      }
      self->pump();
    });
  }

  websocket::stream<tcp::socket> ws_;
  std::shared_ptr<Gateway::Impl> gw_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> control_;
  std::shared_ptr<const std::string> pending_frame_;
  long pending_frame_tick_{-1};
  long last_frame_tick_{-1};
  long last_seq_{-1};
  bool writing_{false};
  bool closed_{false};
  bool refuse_{false};
  bool closing_after_write_{false};
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, std::shared_ptr<Gateway::Impl> gw) : stream_(std::move(socket)), gw_(std::move(gw)) {}

  void start() {
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->onRead(ec); });
  }

 private:
  void onRead(beast::error_code ec) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      auto active = gw_->active.lock();
      auto ws = std::make_shared<WsSession>(stream_.release_socket(), gw_);
      if (!active) gw_->active = ws;
      ws->start(req_, active != nullptr);
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::content_type, "application/json");
    res->set(http::field::access_control_allow_origin, "*");
    const auto target = req_.target();
    if (req_.method() == http::verb::get && (target == "/snapshot" || target == "/frame")) {
      res->result(http::status::ok);
      res->body() = gw_->currentFrame();
    } else if (req_.method() == http::verb::get && target == "/scene") {
      res->result(http::status::ok);
      res->body() = gw_->currentScene();
    } else {
      res->result(http::status::not_found);
      res->body() = encodeReject({-1, "unknown endpoint"});
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  std::shared_ptr<Gateway::Impl> gw_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

void Gateway::Impl::accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (!self->running) return;
    if (!ec) std::make_shared<HttpSession>(std::move(socket), self)->start();
    self->accept();
  });
}

void Gateway::Impl::offerFrame(long tick, std::shared_ptr<const std::string> text) {
  if (auto s = active.lock()) s->offerFrame(tick, std::move(text));
}

Gateway::Gateway(CommandQueue& queue, GatewayOptions options)
    : impl_(std::make_shared<Impl>(queue, std::move(options))) {}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  if (impl_->running) return;
  const tcp::endpoint ep(asio::ip::make_address(impl_->options.address), impl_->options.port);
  beast::error_code ec;
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw std::runtime_error("gateway cannot listen on " + impl_->options.address + ":" +
                                   std::to_string(impl_->options.port) + ": " + ec.message());
  impl_->running = true;
  impl_->accept();
  impl_->thread = std::thread([impl = impl_] { impl->ioc.run(); });
}

void Gateway::stop() {
  if (!impl_ || !impl_->running.exchange(false)) return;
  asio::post(impl_->ioc, [impl = impl_] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    if (auto s = impl->active.lock()) s->close();
    impl->ioc.stop();
  });
  if (impl_->thread.joinable()) impl_->thread.join();
}

unsigned short Gateway::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->options.port : ep.port();
}

void Gateway::publish(std::shared_ptr<const World> snapshot, const TickRecord& record) {
  auto text = std::make_shared<const std::string>(encodeFrame(makeFrame(*snapshot, record)));
  const long tick = snapshot->tick;
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->scene_text.empty()) impl_->scene_text = encodeScene(makeScene(*snapshot));
    impl_->snapshot = std::move(snapshot);
    impl_->frame_text = *text;
    impl_->frame_tick = tick;
  }
  if (impl_->running) asio::post(impl_->ioc, [impl = impl_, tick, text] { impl->offerFrame(tick, text); });
}

int Gateway::sessions() const {
  std::promise<int> p;
  auto f = p.get_future();
  if (!impl_->running) return 0;
  asio::post(impl_->ioc, [impl = impl_, &p] { p.set_value(impl->active.expired() ? 0 : 1); });
  return f.get();
}

}  // namespace higvf
