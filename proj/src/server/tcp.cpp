#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <list>
#include <mutex>

#include "blockpath/error.hpp"
#include "blockpath/server.hpp"

namespace blockpath {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

struct Connection {
  int fd;
  std::mutex write_mu;
  bool closed = false;
  std::thread reader;

  void send_line(const std::string& line) {
    std::lock_guard lock(write_mu);
    if (closed) return;
    std::string out = line + "\n";
    std::size_t off = 0;
    while (off < out.size()) {
      const auto n = ::send(fd, out.data() + off, out.size() - off, MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        closed = true;
        return;
      }
      off += static_cast<std::size_t>(n);
    }
  }

  void close_write() {
    std::lock_guard lock(write_mu);
    closed = true;
  }
};

}  // namespace

struct TcpServer::Connections {
  std::mutex mu;
  std::list<std::shared_ptr<Connection>> items;
  bool stopping = false;
};

TcpServer::TcpServer(Engine& engine, const std::string& host, int port)
    : engine_(engine), conns_(std::make_unique<Connections>()) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const auto port_text = std::to_string(port);
  if (::getaddrinfo(host.c_str(), port_text.c_str(), &hints, &res) != 0 || !res) {
    throw IoError("cannot resolve listen host '" + host + "'");
  }
  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (listen_fd_ < 0) {
    ::freeaddrinfo(res);
    throw IoError(std::string("socket: ") + std::strerror(errno));
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const int rc = ::bind(listen_fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0 || ::listen(listen_fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw IoError("cannot listen on " + host + ":" + port_text + ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    std::lock_guard lock(conns_->mu);
    if (conns_->stopping) {
      ::close(fd);
      return;
    }
    conns_->items.push_back(conn);
    conn->reader = std::thread([this, conn] {
      const EventSink sink = [conn](const std::string& line) { conn->send_line(line); };
      std::string buf;
      char chunk[4096];
      for (;;) {
        const auto n = ::recv(conn->fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        buf.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = buf.find('\n')) != std::string::npos) {
          std::string line = buf.substr(0, pos);
          buf.erase(0, pos + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (!line.empty()) engine_.handle_line(line, sink);
        }
        if (buf.size() > kMaxLine) {
          conn->send_line(R"({"type":"error","seq":null,"payload":{"code":"protocol_error","message":"line too long"}})");
          break;
        }
      }
      // Events still queued for this connection are dropped.
      conn->close_write();
      ::shutdown(conn->fd, SHUT_RDWR);
    });
  }
}

void TcpServer::stop() {
  if (listen_fd_ < 0) return;
  std::list<std::shared_ptr<Connection>> items;
  {
    std::lock_guard lock(conns_->mu);
    conns_->stopping = true;
    items.swap(conns_->items);
  }
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  for (auto& c : items) {
    ::shutdown(c->fd, SHUT_RDWR);
    if (c->reader.joinable()) c->reader.join();
    ::close(c->fd);
  }
  listen_fd_ = -1;
}

}  // namespace blockpath
