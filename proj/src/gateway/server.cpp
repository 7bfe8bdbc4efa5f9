#include "crashnav/gateway/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <deque>
#include <iostream>
#include <map>

namespace crashnav::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection;
struct ServerCore;

struct Hub {
  explicit Hub(asio::io_context& ioc, Session s) : session(std::move(s)), timer(ioc) {}
  Session session;
  asio::steady_timer timer;
  std::vector<std::weak_ptr<Connection>> clients;
  bool ticking = false;
};

struct ServerCore {
  ServerCore(ServerConfig c, PlanProvider p, std::vector<std::string> names)
      : cfg(std::move(c)), plans(std::move(p)), plan_names(std::move(names)), acceptor(ioc) {
    const tcp::endpoint ep(asio::ip::make_address(cfg.address), cfg.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  void accept();
  void broadcast(Hub& hub, const std::vector<Message>& msgs);
  void schedule(const std::shared_ptr<Hub>& hub);
  void drop(const std::shared_ptr<Hub>& hub);

  ServerConfig cfg;
  PlanProvider plans;
  std::vector<std::string> plan_names;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::map<std::uint64_t, std::shared_ptr<Hub>> hubs;
  std::uint64_t next_id = 1;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, ServerCore& server) : ws_(std::move(socket)), server_(server) {}

  void start() {
    ws_.binary(true);
    beast::http::async_read(ws_.next_layer(), buffer_, req_,
                            [self = shared_from_this()](beast::error_code ec, std::size_t) {
                              if (ec) return;
                              self->ws_.async_accept(self->req_, [self](beast::error_code e) { self->on_accept(e); });
                            });
  }

  void send(std::shared_ptr<const std::string> bytes) {
    queue_.push_back(std::move(bytes));
    if (queue_.size() == 1) write_next();
  }

  std::shared_ptr<Hub> hub;
  bool operator_ = false;

 private:
  void on_accept(beast::error_code ec);
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }
  void on_read(beast::error_code ec);
  void write_next() {
    ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->queue_.pop_front();
      if (ec) return;
      if (!self->queue_.empty()) self->write_next();
    });
  }
  void closed();

  websocket::stream<beast::tcp_stream> ws_;
  ServerCore& server_;
  beast::flat_buffer buffer_;
  beast::http::request<beast::http::string_body> req_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool gone_ = false;
};

}  // namespace

void ServerCore::broadcast(Hub& hub, const std::vector<Message>& msgs) {
  for (const auto& m : msgs) {
    auto bytes = std::make_shared<const std::string>(encode(m));
    for (auto& w : hub.clients)
      if (auto c = w.lock()) c->send(bytes);
  }
}

void ServerCore::schedule(const std::shared_ptr<Hub>& hub) {
  if (cfg.session.pacing != Pacing::Realtime || hub->ticking) return;
  hub->ticking = true;
  const auto period = std::chrono::duration_cast<asio::steady_timer::duration>(
      std::chrono::duration<double>(1.0 / cfg.session.tick_rate));
  hub->timer.expires_after(period);
  hub->timer.async_wait([this, weak = std::weak_ptr<Hub>(hub)](beast::error_code ec) {
    auto h = weak.lock();
    if (ec || !h) return;
    h->ticking = false;
    broadcast(*h, h->session.tick());
    if (h->session.closed())
      drop(h);
    else
      schedule(h);
  });
}

void ServerCore::drop(const std::shared_ptr<Hub>& hub) {
  hub->timer.cancel();
  hubs.erase(hub->session.id());
}

void ServerCore::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<Connection>(std::move(socket), *this)->start();
    accept();
  });
}

namespace {

void Connection::on_accept(beast::error_code ec) {
  if (ec) return;
  const std::string target(req_.target());
  constexpr std::string_view kJoin = "/join/";
  if (target.rfind(kJoin, 0) == 0) {
    std::uint64_t id = 0;
    try {
      id = std::stoull(target.substr(kJoin.size()));
    } catch (const std::exception&) {
    }
    const auto it = server_.hubs.find(id);
    if (it == server_.hubs.end()) {
      send(std::make_shared<const std::string>(encode(ErrorMsg{id, "no such session"})));
      ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
      return;
    }
    hub = it->second;
  } else {
    const std::uint64_t id = server_.next_id++;
    hub = std::make_shared<Hub>(server_.ioc, Session(id, server_.cfg.session, server_.plans, server_.plan_names));
    server_.hubs.emplace(id, hub);
    operator_ = true;
  }
  hub->clients.push_back(weak_from_this());
  send(std::make_shared<const std::string>(encode(hub->session.hello())));
  server_.schedule(hub);
  read();
}

void Connection::on_read(beast::error_code ec) {
  if (ec) {
    closed();
    return;
  }
  const bool text = ws_.got_text();
  const std::string bytes = beast::buffers_to_string(buffer_.data());
  buffer_.consume(buffer_.size());
  if (hub && operator_) {
    std::vector<Message> out;
    try {
      out = hub->session.handle(decode(bytes, text));
    } catch (const ProtocolError& e) {
      out = {ErrorMsg{hub->session.id(), e.what()}};
    }
    server_.broadcast(*hub, out);
    if (hub->session.closed()) {
      server_.drop(hub);
      ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
      return;
    }
  }
  read();
}

void Connection::closed() {
  if (gone_ || !hub) return;
  gone_ = true;
  auto h = hub;
  hub.reset();
  std::erase_if(h->clients, [this](const std::weak_ptr<Connection>& w) {
    auto c = w.lock();
    return !c || c.get() == this;
  });
  if (operator_) {
    server_.broadcast(*h, h->session.disconnect());
    server_.drop(h);
  }
}

}  // namespace

struct Server::Impl {
  Impl(ServerConfig c, PlanProvider p, std::vector<std::string> names)
      : core(std::move(c), std::move(p), std::move(names)) {}
  ServerCore core;
};

Server::Server(ServerConfig cfg, PlanProvider plans, std::vector<std::string> plan_names)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(plans), std::move(plan_names))) {}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->core.acceptor.local_endpoint().port(); }

void Server::run() {
  impl_->core.accept();
  impl_->core.ioc.run();
}

void Server::stop() { impl_->core.ioc.stop(); }

}  // namespace crashnav::gateway
