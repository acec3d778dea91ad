/*
 * Copyright 2026 The iea-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Datagram protocol, transports and link metrics.
//
// Two transports carry the same WireMessage stream: SimNetwork queues
// datagrams in-process with seeded latency and loss on a shared simulation
// clock; UdpTransport sends real datagrams and receives on a background
// thread. Node logic only sees Transport.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

namespace iea::netbus {

inline constexpr std::size_t kMaxDatagramBytes = 1400;

enum class MessageKind { Pose, Estimate };

struct PosePayload {
  double x{0.0};
  double y{0.0};
  double psi{0.0};
  double v{0.0};
  bool operator==(const PosePayload&) const = default;
};

struct EstimatePayload {
  std::string mssp_id;
  double x{0.0};
  double y{0.0};
  double t_capture{0.0};
  bool operator==(const EstimatePayload&) const = default;
};

struct WireMessage {
  std::string sender;
  std::uint64_t seq{0};
  double t_sent{0.0};
  std::variant<PosePayload, EstimatePayload> payload;

  MessageKind kind() const { return payload.index() == 0 ? MessageKind::Pose : MessageKind::Estimate; }
  bool operator==(const WireMessage&) const = default;
};

/// One JSON object, keys in the documented order, floats with 17 significant
/// digits. Throws ValidationError on non-finite fields.
std::string encode(const WireMessage& msg);

/// Throws DecodeError on anything that is not exactly one of the two
/// documented objects.
WireMessage decode(std::string_view datagram);

/// Total variant of decode(); `error` receives the reason on failure.
std::optional<WireMessage> try_decode(std::string_view datagram, std::string* error = nullptr);

struct Received {
  WireMessage msg;
  double t_received{0.0};
  std::size_t bytes{0};
};

struct LinkConfig {
  double latency_min{0.0015};
  double latency_max{0.0020};
  double drop_probability{0.0};
  std::uint64_t seed{1};
};

void validate(const LinkConfig& link);

struct LatencySample {
  double t_received{0.0};
  std::string link;  // "sender>receiver"
  MessageKind kind{MessageKind::Pose};
  std::size_t bytes{0};
  double latency{0.0};
};

struct NetMetrics {
  std::vector<LatencySample> samples;
  std::map<std::string, std::uint64_t> sent;
  std::map<std::string, std::uint64_t> dropped;
  std::uint64_t decode_errors{0};
};

struct LinkRate {
  std::string link;
  std::uint64_t packets{0};
  std::uint64_t bytes{0};
  double packets_per_s{0.0};
  double bytes_per_s{0.0};
};

struct RatesReport {
  double window{0.0};
  double window_end{0.0};
  std::vector<LinkRate> links;
  std::size_t latency_count{0};
  std::optional<double> latency_p50;
  std::optional<double> latency_p95;
  std::optional<double> latency_max;
};

/// Per-link rates over (now - window, now]; latency percentiles
/// (nearest-rank) over every recorded sample.
RatesReport metrics_window(const NetMetrics& metrics, double window, double now);

/// Nearest-rank percentile of an unsorted sample set, q in [0, 1].
double percentile(std::vector<double> values, double q);

std::string link_name(std::string_view sender, std::string_view receiver);

class Transport {
public:
  virtual ~Transport() = default;
  /// Throws ValidationError for datagrams over kMaxDatagramBytes and
  /// RuntimeFailure on socket errors.
  virtual void send(const std::string& peer, const WireMessage& msg) = 0;
  /// Everything deliverable at `now`, in delivery order.
  virtual std::vector<Received> drain(double now) = 0;
};

/// Deterministic in-process network shared by every node of a lockstep run.
class SimNetwork {
public:
  explicit SimNetwork(LinkConfig link);

  std::unique_ptr<Transport> endpoint(const std::string& node_id);

  void send(const std::string& from, const std::string& to, const WireMessage& msg);
  std::vector<Received> drain(const std::string& node_id, double now);

  const NetMetrics& metrics() const { return metrics_; }
  std::size_t in_flight() const { return pending_.size(); }

private:
  struct Pending {
    std::string to;
    double deliver_at{0.0};
    double latency{0.0};
    std::string link;
    std::string bytes;
    WireMessage msg;
  };

  double uniform01();

  LinkConfig link_;
  std::mt19937_64 rng_;
  std::vector<Pending> pending_;
  NetMetrics metrics_;
};

struct UdpPeer {
  std::string host;
  std::uint16_t port{0};
};

/// Real datagram transport on one node. Latency is stamped as
/// clock() at receipt minus the sender's t_sent, which is only meaningful
/// when every node reads the same monotonic clock (one host).
class UdpTransport : public Transport {
public:
  UdpTransport(std::string self_id, const UdpPeer& bind_to, std::map<std::string, UdpPeer> peers,
               std::function<double()> clock);
  ~UdpTransport() override;
  UdpTransport(const UdpTransport&) = delete;
  UdpTransport& operator=(const UdpTransport&) = delete;

  void send(const std::string& peer, const WireMessage& msg) override;
  std::vector<Received> drain(double now) override;

  NetMetrics metrics() const;

private:
  void receive_loop();

  std::string self_id_;
  std::map<std::string, UdpPeer> peers_;
  std::function<double()> clock_;
  int fd_{-1};
  std::atomic<bool> stop_{false};
  mutable std::mutex mutex_;
  std::vector<Received> inbox_;
  NetMetrics metrics_;
  std::thread receiver_;
};

}  // namespace iea::netbus
