// Copyright 2026 The FLaPS Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flaps/transport.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <random>
#include <thread>

#include "flaps/status_macros.h"
#include "flaps/str_util.h"

namespace flaps {

std::vector<Message> Transport::Drain(NodeId node) {
  auto it = mailboxes_.find(node);
  if (it == mailboxes_.end()) return {};
  std::vector<Message> out = std::move(it->second);
  mailboxes_.erase(it);
  return out;
}

void Transport::Deliver(Message message, std::size_t payload_bytes) {
  log_.push_back({message.type(), message.sender, message.receiver,
                  message.timestamp, payload_bytes});
  mailboxes_[message.receiver].push_back(std::move(message));
}

absl::Status LatencyModel::Validate() const {
  if (!(fixed_s >= 0) || !(jitter_s >= 0)) {
    return absl::InvalidArgumentError(
        StrCat("latency must be non-negative, got fixed ", fixed_s, " jitter ",
               jitter_s));
  }
  return absl::OkStatus();
}

SimTransport::SimTransport(LatencyModel latency, std::uint64_t seed)
    : latency_(latency), rng_(DeriveSeed(seed, Stream::kLatency)) {}

absl::Status SimTransport::Send(Message message) {
  const std::string frame = EncodeFrame(message);
  FLAPS_ASSIGN_OR_RETURN(Message decoded, DecodeFrame(frame));
  decoded.timestamp = clock_;
  const double delay =
      latency_.fixed_s +
      std::uniform_real_distribution<double>(0, 1)(rng_) * latency_.jitter_s;
  last_arrival_ = std::max(last_arrival_, clock_ + delay);
  Deliver(std::move(decoded), frame.size() - kFrameHeaderSize);
  return absl::OkStatus();
}

absl::Status SimTransport::Flush() {
  // The extra microsecond keeps timestamps of consecutive phases strictly
  // ordered even with zero latency.
  clock_ = std::max(clock_, last_arrival_) + 1e-6;
  return absl::OkStatus();
}

namespace {

absl::Status Errno(std::string_view what) {
  return absl::UnavailableError(StrCat(what, ": ", std::strerror(errno)));
}

bool ReadFull(int fd, char* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t got = ::recv(fd, buf, n, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) return false;
    buf += got;
    n -= static_cast<std::size_t>(got);
  }
  return true;
}

bool WriteFull(int fd, const char* buf, std::size_t n) {
  while (n > 0) {
    const ssize_t put = ::send(fd, buf, n, MSG_NOSIGNAL);
    if (put < 0 && errno == EINTR) continue;
    if (put <= 0) return false;
    buf += put;
    n -= static_cast<std::size_t>(put);
  }
  return true;
}

}  // namespace

struct TcpTransport::Impl {
  TcpTransport* owner = nullptr;
  int send_fd = -1;
  int recv_fd = -1;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  std::thread receiver;
  std::mutex mu;
  std::condition_variable cv;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  absl::Status error;

  double Elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }

  void Fail(absl::Status status) {
    std::lock_guard<std::mutex> lock(mu);
    if (error.ok()) error = std::move(status);
    cv.notify_all();
  }

  void ReceiveLoop() {
    std::string header(kFrameHeaderSize, '\0');
    while (ReadFull(recv_fd, header.data(), header.size())) {
      auto length = FramePayloadLength(header);
      if (!length.ok()) return Fail(length.status());
      std::string frame = header;
      frame.resize(kFrameHeaderSize + *length);
      if (!ReadFull(recv_fd, frame.data() + kFrameHeaderSize, *length)) {
        return Fail(absl::DataLossError("connection closed inside a frame"));
      }
      auto message = DecodeFrame(frame);
      if (!message.ok()) return Fail(message.status());
      message->timestamp = Elapsed();
      std::lock_guard<std::mutex> lock(mu);
      owner->Deliver(*std::move(message), *length);
      ++delivered;
      cv.notify_all();
    }
  }
};

absl::StatusOr<std::unique_ptr<TcpTransport>> TcpTransport::Create() {
  auto impl = std::make_unique<Impl>();
  const int listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd < 0) return Errno("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof(addr);
  auto fail = [&](std::string_view what) {
    absl::Status s = Errno(what);
    ::close(listen_fd);
    if (impl->send_fd >= 0) ::close(impl->send_fd);
    return s;
  };
  if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) !=
      0) {
    return fail("bind");
  }
  if (::listen(listen_fd, 1) != 0) return fail("listen");
  if (::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    return fail("getsockname");
  }
  impl->send_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (impl->send_fd < 0) return fail("socket");
  if (::connect(impl->send_fd, reinterpret_cast<sockaddr*>(&addr),
                sizeof(addr)) != 0) {
    return fail("connect");
  }
  impl->recv_fd = ::accept(listen_fd, nullptr, nullptr);
  if (impl->recv_fd < 0) return fail("accept");
  ::close(listen_fd);
  int one = 1;
  ::setsockopt(impl->send_fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

  std::unique_ptr<TcpTransport> t(new TcpTransport(std::move(impl)));
  t->impl_->owner = t.get();
  t->impl_->receiver =
      std::thread([raw = t->impl_.get()] { raw->ReceiveLoop(); });
  return t;
}

TcpTransport::TcpTransport(std::unique_ptr<Impl> impl)
    : impl_(std::move(impl)) {}

TcpTransport::~TcpTransport() {
  ::shutdown(impl_->send_fd, SHUT_WR);
  if (impl_->receiver.joinable()) impl_->receiver.join();
  ::close(impl_->send_fd);
  ::close(impl_->recv_fd);
}

double TcpTransport::Now() const { return impl_->Elapsed(); }

absl::Status TcpTransport::Send(Message message) {
  const std::string frame = EncodeFrame(message);
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (!impl_->error.ok()) return impl_->error;
    ++impl_->sent;
  }
  if (!WriteFull(impl_->send_fd, frame.data(), frame.size())) {
    absl::Status s = Errno("send");
    impl_->Fail(s);
    return s;
  }
  return absl::OkStatus();
}

absl::Status TcpTransport::Flush() {
  std::unique_lock<std::mutex> lock(impl_->mu);
  const bool done = impl_->cv.wait_for(lock, std::chrono::seconds(60), [&] {
    return !impl_->error.ok() || impl_->delivered == impl_->sent;
  });
  if (!impl_->error.ok()) return impl_->error;
  if (!done) {
    return absl::DeadlineExceededError(StrCat("flush timed out with ",
                                              impl_->sent - impl_->delivered,
                                              " frames in flight"));
  }
  clock_ = impl_->Elapsed();
  return absl::OkStatus();
}

absl::StatusOr<std::unique_ptr<Transport>> MakeTransport(
    TransportKind kind, const LatencyModel& latency, std::uint64_t seed) {
  if (kind == TransportKind::kTcp) {
    FLAPS_ASSIGN_OR_RETURN(std::unique_ptr<TcpTransport> tcp,
                           TcpTransport::Create());
    return std::unique_ptr<Transport>(std::move(tcp));
  }
  FLAPS_RETURN_IF_ERROR(latency.Validate());
  return std::unique_ptr<Transport>(
      std::make_unique<SimTransport>(latency, seed));
}

absl::StatusOr<TransportKind> ParseTransportKind(std::string_view name) {
  if (name == "sim") return TransportKind::kSim;
  if (name == "tcp") return TransportKind::kTcp;
  return absl::InvalidArgumentError(
      StrCat("unknown transport '", name, "', expected sim or tcp"));
}

std::string_view TransportKindName(TransportKind kind) {
  return kind == TransportKind::kTcp ? "tcp" : "sim";
}

}  // namespace flaps
