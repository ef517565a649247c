#include <deque>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "softbody/server.hpp"

namespace softbody::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

// Frames beyond this backlog are skipped for a slow client; replies never are.
constexpr std::size_t kMaxQueuedFrames = 8;

std::string_view mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

struct Shared {
  Hub hub;
  // Closed before the io context goes away so stepping threads stop posting into it.
  std::mutex gate;
  bool open = true;

  std::shared_ptr<const persistence::Environment> environment;
  std::filesystem::path static_root;

  Shared(const ServerConfig& config)
      : hub(AlgorithmCatalog::with_builtins(), config.max_instances),
        environment(std::make_shared<const persistence::Environment>(
            config.default_environment.empty() ? persistence::Environment{}
                                               : persistence::load_environment(config.default_environment))),
        static_root(config.static_root) {}
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, std::shared_ptr<Shared> shared)
      : ws_(std::move(socket)), shared_(std::move(shared)) {}

  ~WsConnection() {
    if (session_) session_->close();
  }

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    std::weak_ptr<WsConnection> weak = weak_from_this();
    auto executor = ws_.get_executor();
    Shared* shared = shared_.get();
    session_ = std::make_unique<Session>(shared_->hub, shared_->environment,
                                         [weak, executor, shared](std::string text, bool droppable) {
                                           std::lock_guard lock(shared->gate);
                                           if (!shared->open) return;
                                           net::post(executor, [weak, text = std::move(text), droppable]() mutable {
                                             if (auto self = weak.lock()) self->enqueue(std::move(text), droppable);
                                           });
                                         });
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    session_->open();
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      session_->close();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    session_->handle(text);
    read();
  }

  void enqueue(std::string text, bool droppable) {
    if (droppable) {
      if (queued_frames_ >= kMaxQueuedFrames) return;
      ++queued_frames_;
    }
    queue_.push_back({std::move(text), droppable});
    if (queue_.size() == 1) write();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front().text),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      session_->close();
      return;
    }
    if (queue_.front().droppable) --queued_frames_;
    queue_.pop_front();
    if (!queue_.empty()) write();
  }

  struct Pending {
    std::string text;
    bool droppable;
  };

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Shared> shared_;
  beast::flat_buffer buffer_;
  std::unique_ptr<Session> session_;
  std::deque<Pending> queue_;
  std::size_t queued_frames_ = 0;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, std::shared_ptr<Shared> shared)
      : stream_(std::move(socket)), shared_(std::move(shared)) {}

  void start() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpConnection::read, shared_from_this()));
  }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/ws") {
        stream_.expires_never();
        std::make_shared<WsConnection>(stream_.release_socket(), shared_)->start(std::move(req_));
        return;
      }
      return reply(http::status::not_found, "text/plain", "websocket endpoint is /ws\n");
    }
    if (req_.method() != http::verb::get) {
      return reply(http::status::method_not_allowed, "text/plain", "GET only\n");
    }
    serve_file();
  }

  void serve_file() {
    std::string target(req_.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target[0] != '/' || target.find("..") != std::string::npos) {
      return reply(http::status::bad_request, "text/plain", "bad path\n");
    }
    if (shared_->static_root.empty()) return reply(http::status::not_found, "text/plain", "no UI is installed\n");
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path path = shared_->static_root / target.substr(1);
    std::ifstream in(path, std::ios::binary);
    if (!in || std::filesystem::is_directory(path)) return reply(http::status::not_found, "text/plain", "not found\n");
    reply(http::status::ok, mime_type(path), std::string(std::istreambuf_iterator<char>(in), {}));
  }

  void reply(http::status status, std::string_view type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "softbody");
    res->set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || !res->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  std::shared_ptr<Shared> shared_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<Shared> shared;
  net::io_context ioc;
  tcp::acceptor acceptor;

  explicit Impl(const ServerConfig& config)
      : shared(std::make_shared<Shared>(config)), acceptor(net::make_strand(ioc)) {
    beast::error_code ec;
    const auto address = net::ip::make_address(config.address, ec);
    if (ec) throw Error(ErrorCode::BindFailure, "bad listen address '" + config.address + "'");
    const tcp::endpoint endpoint(address, config.port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      throw Error(ErrorCode::BindFailure,
                  "cannot listen on " + config.address + ":" + std::to_string(config.port) + ": " + ec.message());
    }
    accept();
  }

  ~Impl() {
    {
      std::lock_guard lock(shared->gate);
      shared->open = false;
    }
    ioc.stop();
  }

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (!acceptor.is_open()) return;
      if (!ec) std::make_shared<HttpConnection>(std::move(socket), shared)->start();
      accept();
    });
  }
};

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(config)) {}

Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  // A second io thread keeps other clients moving while one waits on an instance.
  std::thread helper([this] { impl_->ioc.run(); });
  impl_->ioc.run();
  helper.join();
}

void Server::stop() { impl_->ioc.stop(); }

Hub& Server::hub() { return impl_->shared->hub; }

}  // namespace softbody::server
