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

#include "core/netbus.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <set>
#include <tuple>

#include <json.hpp>

#include "core/error.hpp"

namespace iea::netbus {

namespace {

void append_double(std::string& out, double v) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  out.append(buf.data(), res.ptr);
}

void append_field(std::string& out, std::string_view key, double v) {
  out += ",\"";
  out += key;
  out += "\":";
  if (!std::isfinite(v)) {
    throw ValidationError("wire field '" + std::string(key) + "' is not finite");
  }
  append_double(out, v);
}

void append_string(std::string& out, std::string_view key, const std::string& v) {
  out += ",\"";
  out += key;
  out += "\":";
  try {
    out += nlohmann::json(v).dump();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("wire field '" + std::string(key) + "' is not valid UTF-8");
  }
}

double number_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw DecodeError(std::string("missing or non-numeric field '") + key + "'");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw DecodeError(std::string("non-finite field '") + key + "'");
  }
  return v;
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw DecodeError(std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

const std::set<std::string> kPoseKeys{"kind", "sender", "seq", "t", "x", "y", "psi", "v"};
const std::set<std::string> kEstimateKeys{"kind", "sender", "seq", "t", "mssp_id", "x", "y", "t_capture"};

class SimEndpoint : public Transport {
public:
  SimEndpoint(SimNetwork& net, std::string id) : net_(net), id_(std::move(id)) {}
  void send(const std::string& peer, const WireMessage& msg) override { net_.send(id_, peer, msg); }
  std::vector<Received> drain(double now) override { return net_.drain(id_, now); }

private:
  SimNetwork& net_;
  std::string id_;
};

}  // namespace

std::string encode(const WireMessage& msg) {
  std::string out = "{\"kind\":";
  out += msg.kind() == MessageKind::Pose ? "\"pose\"" : "\"est\"";
  append_string(out, "sender", msg.sender);
  out += ",\"seq\":";
  out += std::to_string(msg.seq);
  append_field(out, "t", msg.t_sent);
  if (const auto* pose = std::get_if<PosePayload>(&msg.payload)) {
    append_field(out, "x", pose->x);
    append_field(out, "y", pose->y);
    append_field(out, "psi", pose->psi);
    append_field(out, "v", pose->v);
  } else {
    const auto& est = std::get<EstimatePayload>(msg.payload);
    append_string(out, "mssp_id", est.mssp_id);
    append_field(out, "x", est.x);
    append_field(out, "y", est.y);
    append_field(out, "t_capture", est.t_capture);
  }
  out += '}';
  return out;
}

WireMessage decode(std::string_view datagram) {
  nlohmann::json j = nlohmann::json::parse(datagram.begin(), datagram.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DecodeError("datagram is not a JSON object");
  }
  const std::string kind = string_field(j, "kind");
  const std::set<std::string>* expected = nullptr;
  if (kind == "pose") {
    expected = &kPoseKeys;
  } else if (kind == "est") {
    expected = &kEstimateKeys;
  } else {
    throw DecodeError("unknown message kind '" + kind + "'");
  }
  std::set<std::string> keys;
  for (const auto& item : j.items()) {
    keys.insert(item.key());
  }
  if (keys != *expected) {
    throw DecodeError("unexpected key set for kind '" + kind + "'");
  }

  WireMessage msg;
  msg.sender = string_field(j, "sender");
  const auto& seq = j["seq"];
  if (!seq.is_number_unsigned()) {
    throw DecodeError("seq must be an unsigned integer");
  }
  msg.seq = seq.get<std::uint64_t>();
  msg.t_sent = number_field(j, "t");
  if (kind == "pose") {
    msg.payload = PosePayload{number_field(j, "x"), number_field(j, "y"), number_field(j, "psi"), number_field(j, "v")};
  } else {
    msg.payload =
        EstimatePayload{string_field(j, "mssp_id"), number_field(j, "x"), number_field(j, "y"), number_field(j, "t_capture")};
  }
  return msg;
}

std::optional<WireMessage> try_decode(std::string_view datagram, std::string* error) {
  try {
    return decode(datagram);
  } catch (const std::exception& e) {
    if (error != nullptr) {
      *error = e.what();
    }
    return std::nullopt;
  }
}

void validate(const LinkConfig& link) {
  if (!(link.latency_min >= 0.0) || !(link.latency_max >= link.latency_min) || !std::isfinite(link.latency_max)) {
    throw ValidationError("link latency must satisfy 0 <= latency_min <= latency_max");
  }
  if (!(link.drop_probability >= 0.0 && link.drop_probability <= 1.0)) {
    throw ValidationError("drop_probability must lie in [0, 1]");
  }
}

std::string link_name(std::string_view sender, std::string_view receiver) {
  std::string out(sender);
  out += '>';
  out += receiver;
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw ValidationError("percentile of an empty sample set");
  }
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  return values[std::clamp<std::size_t>(rank, 1, n) - 1];
}

RatesReport metrics_window(const NetMetrics& metrics, double window, double now) {
  if (!(window > 0.0)) {
    throw ValidationError("metrics window must be positive");
  }
  RatesReport report;
  report.window = window;
  report.window_end = now;
  std::map<std::string, LinkRate> per_link;
  std::vector<double> latencies;
  latencies.reserve(metrics.samples.size());
  for (const auto& s : metrics.samples) {
    latencies.push_back(s.latency);
    if (s.t_received > now - window && s.t_received <= now) {
      auto& r = per_link[s.link];
      r.link = s.link;
      ++r.packets;
      r.bytes += s.bytes;
    }
  }
  for (auto& [name, r] : per_link) {
    r.packets_per_s = static_cast<double>(r.packets) / window;
    r.bytes_per_s = static_cast<double>(r.bytes) / window;
    report.links.push_back(r);
  }
  report.latency_count = latencies.size();
  if (!latencies.empty()) {
    report.latency_p50 = percentile(latencies, 0.50);
    report.latency_p95 = percentile(latencies, 0.95);
    report.latency_max = *std::max_element(latencies.begin(), latencies.end());
  }
  return report;
}

// ---------------------------------------------------------------------------
// SimNetwork

SimNetwork::SimNetwork(LinkConfig link) : link_(link), rng_(link.seed) { validate(link_); }

std::unique_ptr<Transport> SimNetwork::endpoint(const std::string& node_id) {
  return std::make_unique<SimEndpoint>(*this, node_id);
}

double SimNetwork::uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

void SimNetwork::send(const std::string& from, const std::string& to, const WireMessage& msg) {
  std::string bytes = encode(msg);
  if (bytes.size() > kMaxDatagramBytes) {
    throw ValidationError("datagram of " + std::to_string(bytes.size()) + " bytes exceeds the 1400-byte limit");
  }
  const std::string link = link_name(from, to);
  ++metrics_.sent[link];
  // Both draws are taken for every datagram so the schedule does not depend
  // on which messages get dropped.
  const double latency = link_.latency_min + uniform01() * (link_.latency_max - link_.latency_min);
  const bool drop = uniform01() < link_.drop_probability;
  if (drop) {
    ++metrics_.dropped[link];
    return;
  }
  pending_.push_back({to, msg.t_sent + latency, latency, link, std::move(bytes), msg});
}

std::vector<Received> SimNetwork::drain(const std::string& node_id, double now) {
  std::vector<Pending> ready;
  auto split = std::stable_partition(pending_.begin(), pending_.end(),
                                     [&](const Pending& p) { return !(p.to == node_id && p.deliver_at <= now); });
  std::move(split, pending_.end(), std::back_inserter(ready));
  pending_.erase(split, pending_.end());
  std::sort(ready.begin(), ready.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.deliver_at, a.msg.sender, a.msg.seq) < std::tie(b.deliver_at, b.msg.sender, b.msg.seq);
  });

  std::vector<Received> out;
  out.reserve(ready.size());
  for (auto& p : ready) {
    // Re-decode so the receiver sees exactly what went over the wire.
    WireMessage msg = decode(p.bytes);
    metrics_.samples.push_back({p.deliver_at, p.link, msg.kind(), p.bytes.size(), p.latency});
    out.push_back({std::move(msg), p.deliver_at, p.bytes.size()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// UdpTransport

namespace {

sockaddr_in make_address(const UdpPeer& peer) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(peer.port);
  if (::inet_pton(AF_INET, peer.host.c_str(), &addr.sin_addr) != 1) {
    throw ValidationError("invalid IPv4 address '" + peer.host + "'");
  }
  return addr;
}

}  // namespace

UdpTransport::UdpTransport(std::string self_id, const UdpPeer& bind_to, std::map<std::string, UdpPeer> peers,
                           std::function<double()> clock)
    : self_id_(std::move(self_id)), peers_(std::move(peers)), clock_(std::move(clock)) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) {
    throw RuntimeFailure(std::string("socket: ") + std::strerror(errno));
  }
  const sockaddr_in addr = make_address(bind_to);
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd_);
    throw RuntimeFailure("bind " + bind_to.host + ":" + std::to_string(bind_to.port) + ": " + std::strerror(err));
  }
  receiver_ = std::thread([this] { receive_loop(); });
}

UdpTransport::~UdpTransport() {
  stop_ = true;
  if (receiver_.joinable()) {
    receiver_.join();
  }
  ::close(fd_);
}

void UdpTransport::send(const std::string& peer, const WireMessage& msg) {
  const auto it = peers_.find(peer);
  if (it == peers_.end()) {
    throw ValidationError("unknown peer '" + peer + "'");
  }
  const std::string bytes = encode(msg);
  if (bytes.size() > kMaxDatagramBytes) {
    throw ValidationError("datagram of " + std::to_string(bytes.size()) + " bytes exceeds the 1400-byte limit");
  }
  const sockaddr_in addr = make_address(it->second);
  const auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
  if (n < 0) {
    throw RuntimeFailure("sendto " + peer + ": " + std::strerror(errno));
  }
  std::lock_guard lock(mutex_);
  ++metrics_.sent[link_name(self_id_, peer)];
}

std::vector<Received> UdpTransport::drain(double /*now*/) {
  std::lock_guard lock(mutex_);
  std::vector<Received> out;
  out.swap(inbox_);
  return out;
}

NetMetrics UdpTransport::metrics() const {
  std::lock_guard lock(mutex_);
  return metrics_;
}

void UdpTransport::receive_loop() {
  std::array<char, 2048> buf{};
  while (!stop_) {
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 50);
    if (ready <= 0 || (pfd.revents & POLLIN) == 0) {
      continue;
    }
    const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n <= 0) {
      continue;
    }
    const double t = clock_();
    auto msg = try_decode(std::string_view(buf.data(), static_cast<std::size_t>(n)));
    std::lock_guard lock(mutex_);
    if (!msg) {
      ++metrics_.decode_errors;
      continue;
    }
    metrics_.samples.push_back(
        {t, link_name(msg->sender, self_id_), msg->kind(), static_cast<std::size_t>(n), t - msg->t_sent});
    inbox_.push_back({std::move(*msg), t, static_cast<std::size_t>(n)});
  }
}

}  // namespace iea::netbus
