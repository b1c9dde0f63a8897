#pragma once

// Client for external metric processes speaking newline-delimited JSON over
// stdin/stdout (see docs/adapter-protocol.md). The adapter's first stdout
// line is a handshake {"protocol_version": 1, "mode": "score" | "pair", ...};
// stderr is collected for diagnostics only.

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reveval/metric.hpp"

namespace reveval {

inline constexpr int kAdapterProtocolVersion = 1;

enum class AdapterMode { Score, Pair };

struct AdapterOptions {
  std::chrono::milliseconds handshake_timeout{30'000};
  std::chrono::milliseconds request_timeout{60'000};
};

struct AdapterResult {
  std::optional<nlohmann::json> response;
  std::string error;

  bool ok() const { return response.has_value(); }
};

class AdapterHandle {
 public:
  // Runs `command` through /bin/sh and waits for the handshake. Throws
  // MetricError when the process cannot start or exits before the handshake,
  // ProtocolError on a malformed handshake or a version mismatch.
  static AdapterHandle spawn(const std::string& command, const AdapterOptions& options = {});

  AdapterHandle(AdapterHandle&& other) noexcept;
  AdapterHandle& operator=(AdapterHandle&& other) noexcept;
  AdapterHandle(const AdapterHandle&) = delete;
  AdapterHandle& operator=(const AdapterHandle&) = delete;
  ~AdapterHandle();

  AdapterMode mode() const { return mode_; }
  const nlohmann::json& handshake() const { return handshake_; }
  bool alive() const { return alive_; }
  std::string stderr_tail() const { return stderr_tail_; }

  // Writes all requests without waiting (pipelining) and matches responses
  // by id, so the adapter may answer out of order. Requests without an "id"
  // get a fresh integer id. Results are in request order; a failure (timeout,
  // crash, malformed line, unknown id) fails every request still pending and
  // leaves the handle dead.
  std::vector<AdapterResult> request_batch(std::vector<nlohmann::json> requests);

  // Single request; throws MetricError on failure.
  nlohmann::json request(nlohmann::json request);

  // Closes stdin and reaps the process.
  void close();

 private:
  AdapterHandle() = default;

  bool read_available(int timeout_ms);
  std::optional<std::string> next_line();
  void append_stderr(const char* data, std::size_t n);
  void kill_process();

  int pid_ = -1;
  int in_fd_ = -1;   // child's stdin
  int out_fd_ = -1;  // child's stdout
  int err_fd_ = -1;  // child's stderr
  bool alive_ = false;
  bool stdout_eof_ = false;
  AdapterMode mode_ = AdapterMode::Score;
  nlohmann::json handshake_;
  AdapterOptions options_;
  std::string out_buffer_;
  std::string stderr_tail_;
  long next_id_ = 1;
};

inline AdapterHandle spawn_adapter(const std::string& command, const AdapterOptions& options = {}) {
  return AdapterHandle::spawn(command, options);
}

// Metric backed by one adapter process. Score-mode adapters are asked for
// both texts and compared locally; pair-mode adapters choose directly.
class AdapterMetric : public Metric {
 public:
  AdapterMetric(std::string command, double tie_epsilon = 0.0, const AdapterOptions& options = {});

  std::string id() const override { return "adapter:" + command_; }
  bool is_scorer() const override { return handle_.mode() == AdapterMode::Score; }
  double score(std::string_view text) override;
  MetricVerdict choose(std::string_view a, std::string_view b) override;
  std::vector<PairOutcome> choose_batch(std::span<const TextPair> items) override;

 private:
  std::string command_;
  double tie_epsilon_;
  AdapterHandle handle_;
};

}  // namespace reveval
