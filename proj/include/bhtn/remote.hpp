#pragma once

// Annealer-shaped HTTP transport.
//
//   POST <endpoint>/solve
//     request   {"qubo": <QUBO JSON>, "num_reads": int, "seed": int}
//     response  {"samples": [{"bits": [0|1, ...], "energy": float, "count": int}]}
//     status    200 ok, 400 malformed request, 503 overloaded
//
// The reference server answers with the raw samples of sample_qubo, so a
// client that runs select_best on them reproduces solve_sa bit for bit.

#include <atomic>
#include <cmath>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"

#include "bhtn/io.hpp"
#include "bhtn/sampling.hpp"

namespace bhtn {

/// The endpoint could not be reached (after all retries).
class TransportError : public SolverError {
 public:
  using SolverError::SolverError;
};

inline constexpr double kEnergyTolerance = 1e-9;

inline json make_solve_request(const QuboModel& q, std::size_t num_reads, std::uint64_t seed) {
  return {{"qubo", qubo_to_json(q)}, {"num_reads", num_reads}, {"seed", seed}};
}

inline json samples_to_json(const std::vector<Sample>& samples) {
  json arr = json::array();
  for (const auto& s : samples) {
    json bits = json::array();
    for (auto b : s.bits) bits.push_back(static_cast<int>(b));
    arr.push_back({{"bits", bits}, {"energy", s.energy}, {"count", s.count}});
  }
  return {{"samples", arr}};
}

/// Parses and validates a solve response against the model that was sent.
inline std::vector<Sample> samples_from_json(const json& j, const QuboModel& q) {
  if (!j.is_object() || !j.contains("samples") || !j["samples"].is_array() || j["samples"].empty()) {
    throw SolverError("remote: response has no \"samples\" array");
  }
  std::vector<Sample> out;
  for (const auto& s : j["samples"]) {
    if (!s.is_object() || !s.contains("bits") || !s["bits"].is_array() || !s.contains("energy") ||
        !s["energy"].is_number() || !s.contains("count") || !s["count"].is_number_unsigned()) {
      throw SolverError("remote: malformed sample entry");
    }
    Sample sample;
    for (const auto& b : s["bits"]) {
      if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1)) {
        throw SolverError("remote: sample bits must be 0 or 1");
      }
      sample.bits.push_back(static_cast<std::uint8_t>(b.get<int>()));
    }
    if (sample.bits.size() != q.num_vars) {
      throw SolverError("remote: sample has " + std::to_string(sample.bits.size()) +
                        " bits, model has " + std::to_string(q.num_vars));
    }
    sample.energy = s["energy"].get<double>();
    sample.count = s["count"].get<std::size_t>();
    const double check = eval_qubo(q, to_assignment(sample.bits));
    if (std::abs(check - sample.energy) > kEnergyTolerance) {
      throw SolverError("remote: reported energy " + std::to_string(sample.energy) +
                        " disagrees with re-evaluated " + std::to_string(check));
    }
    out.push_back(std::move(sample));
  }
  return out;
}

struct Endpoint {
  std::string host;
  int port = 80;
  std::string base_path;  // without trailing slash
};

inline Endpoint parse_endpoint(const std::string& url) {
  static const std::regex re(R"(^http://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw std::invalid_argument("remote endpoint must look like http://host[:port][/path], got '" +
                                url + "'");
  }
  Endpoint e;
  e.host = m[1];
  if (m[2].matched) e.port = std::stoi(m[2]);
  e.base_path = m[3].matched ? m[3].str() : "";
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  return e;
}

/// Sends q to the remote sampler and selects the best completed sample.
/// Transport failures and 503 answers are retried cfg.max_retries times with
/// exponential backoff; any other failure is final.
inline SolveReport solve_remote(const QuboModel& q, const SolverConfig& cfg) {
  Stopwatch clock;
  cfg.validate();
  if (!cfg.remote_endpoint) throw std::invalid_argument("solve_remote: no endpoint configured");
  const Endpoint ep = parse_endpoint(*cfg.remote_endpoint);
  const std::string body = make_solve_request(q, cfg.num_reads, cfg.seed).dump();

  httplib::Client client(ep.host, ep.port);
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(std::chrono::minutes(10));

  std::string last_error;
  Millis backoff = cfg.retry_backoff;
  for (std::size_t attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2.0;
    }
    auto res = client.Post(ep.base_path + "/solve", body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 503) {
      last_error = "server overloaded (503)";
      continue;
    }
    if (res->status != 200) {
      throw SolverError("remote: server answered " + std::to_string(res->status) + ": " + res->body);
    }
    json payload;
    try {
      payload = json::parse(res->body);
    } catch (const json::exception& e) {
      throw SolverError(std::string("remote: response is not JSON: ") + e.what());
    }
    SolveReport r = select_best(q, samples_from_json(payload, q));
    r.backend = backend_name(Backend::remote);
    r.wall_time = clock.elapsed();
    return r;
  }
  throw TransportError("remote: " + *cfg.remote_endpoint + " unreachable after " +
                       std::to_string(cfg.max_retries) + " retries (" + last_error + ")");
}

struct ServerOptions {
  SolverConfig sampler;            // sweeps and beta schedule; reads and seed come per request
  std::size_t max_in_flight = 64;  // concurrent solves before answering 503
};

/// Reference sampler service backed by sample_qubo.
class SolverServer {
 public:
  explicit SolverServer(ServerOptions opts = {}) : opts_(std::move(opts)) {
    server_.Post("/solve", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res);
    });
    server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
  }

  SolverServer(const SolverServer&) = delete;
  SolverServer& operator=(const SolverServer&) = delete;

  /// Binds to an ephemeral port and returns it (-1 on failure).
  int bind_any(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
  bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }

  /// Blocks until stop() is called.
  bool run() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  bool is_running() const { return server_.is_running(); }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    struct InFlight {
      std::atomic<std::size_t>& n;
      explicit InFlight(std::atomic<std::size_t>& c) : n(c) { ++n; }
      ~InFlight() { --n; }
    } guard(in_flight_);
    if (in_flight_.load() > opts_.max_in_flight) {
      res.status = 503;
      res.set_content(R"({"error":"overloaded"})", "application/json");
      return;
    }
    QuboModel q;
    SolverConfig cfg = opts_.sampler;
    cfg.backend = Backend::sa;
    try {
      const json j = json::parse(req.body);
      if (!j.is_object() || !j.contains("qubo") || !j.contains("num_reads") ||
          !j["num_reads"].is_number_unsigned() || !j.contains("seed") ||
          !j["seed"].is_number_unsigned()) {
        throw ParseError("request needs \"qubo\", unsigned \"num_reads\" and unsigned \"seed\"");
      }
      q = qubo_from_json(j["qubo"]);
      cfg.num_reads = j["num_reads"].get<std::size_t>();
      cfg.seed = j["seed"].get<std::uint64_t>();
      cfg.validate();
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    res.set_content(samples_to_json(sample_qubo(q, cfg)).dump(), "application/json");
  }

  ServerOptions opts_;
  httplib::Server server_;
  std::atomic<std::size_t> in_flight_{0};
};

}  // namespace bhtn
