#include "gateway_server.hpp"

#include <cstdio>
#include <deque>
#include <mutex>

#include <boost/asio.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "deixis/error.hpp"

namespace deixis::tools {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::shared_ptr<const Engine> engine)
      : ws_(std::move(socket)), live_(std::move(engine)) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->accepted_ = true;
      self->read();
    });
  }

  // Flush committed output to the client, then close.
  void shutdown() {
    if (closing_) return;
    closing_ = true;
    if (!accepted_) {
      beast::error_code ec;
      beast::get_lowest_layer(ws_).socket().close(ec);
      return;
    }
    try {
      send(live_.flush());
    } catch (const std::exception& e) {
      send({ErrorMsg{e.what()}});
    }
    if (queue_.empty()) close();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, size_t) {
      // Disconnects and errors discard the session.
      if (ec) return;
      self->on_frame();
    });
  }

  void on_frame() {
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    size_t pos = 0;
    while (pos <= text.size() && !closing_) {
      size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + pos, end - pos);
      pos = end + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        send(live_.handle(parse_client_message(line)));
      } catch (const std::exception& e) {
        send({ErrorMsg{e.what()}});
      }
    }
    if (!closing_) read();
  }

  void send(const std::vector<ServerMessage>& msgs) {
    for (const auto& m : msgs) {
      queue_.push_back(encode(m) + "\n");
      if (queue_.size() == 1) write();
    }
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, size_t) {
      if (ec) return;
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write();
      else if (self->closing_) self->close();
    });
  }

  void close() {
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  LiveSession live_;
  bool accepted_ = false;
  bool closing_ = false;
};

}  // namespace

struct GatewayServer::Impl : std::enable_shared_from_this<GatewayServer::Impl> {
  asio::io_context io{1};
  tcp::acceptor acceptor{io};
  std::shared_ptr<const Engine> engine;
  std::vector<std::weak_ptr<Connection>> connections;
  bool stopping = false;

  void accept() {
    acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
      if (ec || self->stopping) return;
      auto conn = std::make_shared<Connection>(std::move(socket), self->engine);
      self->connections.push_back(conn);
      std::erase_if(self->connections, [](const auto& w) { return w.expired(); });
      conn->start();
      self->accept();
    });
  }

  void stop() {
    if (stopping) return;
    stopping = true;
    beast::error_code ec;
    acceptor.close(ec);
    for (auto& w : connections) {
      if (auto c = w.lock()) c->shutdown();
    }
    connections.clear();
  }
};

GatewayServer::GatewayServer(std::shared_ptr<const Engine> engine, const std::string& address, unsigned short port)
    : impl_(std::make_shared<Impl>()) {
  impl_->engine = std::move(engine);
  try {
    const tcp::endpoint ep(asio::ip::make_address(address), port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorKind::IoError, "cannot listen on " + address + ":" + std::to_string(port) + ": " + e.what());
  }
  impl_->accept();
}

GatewayServer::~GatewayServer() {
  stop();
  join();
}

unsigned short GatewayServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void GatewayServer::run() { impl_->io.run(); }

void GatewayServer::start_background() {
  thread_ = std::thread([this] { run(); });
}

void GatewayServer::stop() {
  asio::post(impl_->io, [impl = impl_] { impl->stop(); });
}

void GatewayServer::join() {
  if (thread_.joinable()) thread_.join();
}

int run_gateway(std::shared_ptr<const Engine> engine, const std::string& address, unsigned short port) {
  GatewayServer server(std::move(engine), address, port);
  std::printf("listening on %s:%u\n", address.c_str(), static_cast<unsigned>(server.port()));
  std::fflush(stdout);
  asio::io_context signals_io;
  asio::signal_set signals(signals_io, SIGINT, SIGTERM);
  signals.async_wait([&](beast::error_code, int) { server.stop(); });
  std::thread signal_thread([&] { signals_io.run(); });
  server.run();
  signals_io.stop();
  signal_thread.join();
  return 0;
}

}  // namespace deixis::tools
