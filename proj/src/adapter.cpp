#include "reveval/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>

#include "reveval/error.hpp"
#include "reveval/text.hpp"

namespace reveval {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kStderrTail = 4096;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "signal " + std::to_string(WTERMSIG(status));
  return "unknown status";
}

}  // namespace

AdapterHandle AdapterHandle::spawn(const std::string& command, const AdapterOptions& options) {
  if (text::trim(command).empty()) throw UsageError("empty adapter command");
  ignore_sigpipe();

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw MetricError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw MetricError(std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw MetricError(std::string("pipe: ") + std::strerror(errno));
  }

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    throw MetricError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    // Only async-signal-safe calls from here on.
    ::setpgid(0, 0);
    ::signal(SIGPIPE, SIG_DFL);
    ::dup2(in_pipe[0], 0);
    ::dup2(out_pipe[1], 1);
    ::dup2(err_pipe[1], 2);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  AdapterHandle h;
  h.pid_ = pid;
  h.in_fd_ = in_pipe[1];
  h.out_fd_ = out_pipe[0];
  h.err_fd_ = err_pipe[0];
  h.options_ = options;
  h.alive_ = true;
  ::fcntl(h.in_fd_, F_SETFL, ::fcntl(h.in_fd_, F_GETFL) | O_NONBLOCK);

  const auto deadline = Clock::now() + options.handshake_timeout;
  std::optional<std::string> line;
  while (!(line = h.next_line())) {
    if (h.stdout_eof_) {
      // Drain stderr for the diagnostic, then reap.
      while (h.err_fd_ >= 0 && h.read_available(200)) {
      }
      int status = 0;
      ::waitpid(h.pid_, &status, 0);
      h.pid_ = -1;
      h.alive_ = false;
      throw MetricError("adapter '" + command + "' exited before handshake (" + describe_status(status) + ")" +
                        (h.stderr_tail_.empty() ? "" : ": " + h.stderr_tail_));
    }
    const int left = remaining_ms(deadline);
    if (left == 0) {
      h.kill_process();
      throw MetricError("adapter '" + command + "' sent no handshake within " +
                        std::to_string(options.handshake_timeout.count()) + " ms");
    }
    h.read_available(left);
  }

  json hs;
  try {
    hs = json::parse(*line);
  } catch (const json::parse_error&) {
    h.kill_process();
    throw ProtocolError("malformed handshake line: " + *line);
  }
  if (!hs.is_object() || !hs.contains("protocol_version") || !hs["protocol_version"].is_number_integer()) {
    h.kill_process();
    throw ProtocolError("malformed handshake line: " + *line);
  }
  if (hs["protocol_version"].get<long>() != kAdapterProtocolVersion) {
    h.kill_process();
    throw ProtocolError("adapter protocol version " + hs["protocol_version"].dump() + " is not supported (expected " +
                        std::to_string(kAdapterProtocolVersion) + ")");
  }
  const auto mode = hs.value("mode", std::string());
  if (mode == "score") h.mode_ = AdapterMode::Score;
  else if (mode == "pair") h.mode_ = AdapterMode::Pair;
  else {
    h.kill_process();
    throw ProtocolError("handshake mode must be \"score\" or \"pair\": " + *line);
  }
  h.handshake_ = std::move(hs);
  return h;
}

AdapterHandle::AdapterHandle(AdapterHandle&& other) noexcept { *this = std::move(other); }

AdapterHandle& AdapterHandle::operator=(AdapterHandle&& other) noexcept {
  if (this == &other) return *this;
  close();
  pid_ = std::exchange(other.pid_, -1);
  in_fd_ = std::exchange(other.in_fd_, -1);
  out_fd_ = std::exchange(other.out_fd_, -1);
  err_fd_ = std::exchange(other.err_fd_, -1);
  alive_ = std::exchange(other.alive_, false);
  stdout_eof_ = other.stdout_eof_;
  mode_ = other.mode_;
  handshake_ = std::move(other.handshake_);
  options_ = other.options_;
  out_buffer_ = std::move(other.out_buffer_);
  stderr_tail_ = std::move(other.stderr_tail_);
  next_id_ = other.next_id_;
  return *this;
}

AdapterHandle::~AdapterHandle() { close(); }

void AdapterHandle::close() {
  close_fd(in_fd_);
  if (pid_ > 0) {
    // Give the adapter a moment to exit on EOF before killing it.
    int status = 0;
    bool reaped = false;
    for (int i = 0; i < 200 && !reaped; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) reaped = true;
      else std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (!reaped) {
      ::kill(-pid_, SIGKILL);
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
    pid_ = -1;
  }
  close_fd(out_fd_);
  close_fd(err_fd_);
  alive_ = false;
}

void AdapterHandle::kill_process() {
  close_fd(in_fd_);
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
  close_fd(out_fd_);
  close_fd(err_fd_);
  alive_ = false;
}

void AdapterHandle::append_stderr(const char* data, std::size_t n) {
  stderr_tail_.append(data, n);
  if (stderr_tail_.size() > kStderrTail) stderr_tail_.erase(0, stderr_tail_.size() - kStderrTail);
}

bool AdapterHandle::read_available(int timeout_ms) {
  pollfd fds[2];
  int n = 0;
  int out_slot = -1, err_slot = -1;
  if (out_fd_ >= 0 && !stdout_eof_) {
    out_slot = n;
    fds[n++] = {out_fd_, POLLIN, 0};
  }
  if (err_fd_ >= 0) {
    err_slot = n;
    fds[n++] = {err_fd_, POLLIN, 0};
  }
  if (n == 0) return false;
  int r = ::poll(fds, static_cast<nfds_t>(n), timeout_ms);
  if (r < 0 && errno == EINTR) return true;
  if (r <= 0) return false;
  char buf[8192];
  if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
    ssize_t got = ::read(out_fd_, buf, sizeof buf);
    if (got > 0) out_buffer_.append(buf, static_cast<std::size_t>(got));
    else if (got == 0 || errno != EINTR) stdout_eof_ = true;
  }
  if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
    ssize_t got = ::read(err_fd_, buf, sizeof buf);
    if (got > 0) append_stderr(buf, static_cast<std::size_t>(got));
    else if (got == 0 || errno != EINTR) close_fd(err_fd_);
  }
  return true;
}

std::optional<std::string> AdapterHandle::next_line() {
  for (;;) {
    auto nl = out_buffer_.find('\n');
    if (nl == std::string::npos) return std::nullopt;
    std::string line = out_buffer_.substr(0, nl);
    out_buffer_.erase(0, nl + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::trim(line).empty()) return line;
  }
}

std::vector<AdapterResult> AdapterHandle::request_batch(std::vector<json> requests) {
  std::vector<AdapterResult> results(requests.size());
  if (requests.empty()) return results;
  if (!alive_) {
    for (auto& r : results) r.error = "adapter is not running" + (stderr_tail_.empty() ? "" : ": " + stderr_tail_);
    return results;
  }

  std::map<std::string, std::size_t> by_id;
  std::string wire;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto& req = requests[i];
    if (!req.is_object()) throw UsageError("adapter requests must be JSON objects");
    if (!req.contains("id")) req["id"] = next_id_++;
    if (!by_id.emplace(req["id"].dump(), i).second) throw UsageError("duplicate request id " + req["id"].dump());
    wire += req.dump(-1, ' ', false, json::error_handler_t::replace);
    wire += '\n';
  }

  std::size_t pending = requests.size();
  std::size_t written = 0;
  bool write_closed = false;
  auto fail_pending = [&](const std::string& why) {
    std::string msg = why;
    if (!stderr_tail_.empty()) msg += "; adapter stderr: " + stderr_tail_;
    for (auto& r : results) {
      if (!r.response && r.error.empty()) r.error = msg;
    }
    pending = 0;
  };

  while (pending > 0) {
    pollfd fds[3];
    int n = 0, in_slot = -1, out_slot = -1, err_slot = -1;
    if (!write_closed && written < wire.size() && in_fd_ >= 0) {
      in_slot = n;
      fds[n++] = {in_fd_, POLLOUT, 0};
    }
    if (!stdout_eof_) {
      out_slot = n;
      fds[n++] = {out_fd_, POLLIN, 0};
    }
    if (err_fd_ >= 0) {
      err_slot = n;
      fds[n++] = {err_fd_, POLLIN, 0};
    }
    const int timeout = static_cast<int>(options_.request_timeout.count());
    int r = ::poll(fds, static_cast<nfds_t>(n), timeout);
    if (r < 0) {
      if (errno == EINTR) continue;
      fail_pending(std::string("poll: ") + std::strerror(errno));
      kill_process();
      break;
    }
    if (r == 0) {
      fail_pending("adapter did not answer within " + std::to_string(timeout) + " ms");
      kill_process();
      break;
    }

    if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t put = ::write(in_fd_, wire.data() + written, wire.size() - written);
      if (put > 0) written += static_cast<std::size_t>(put);
      else if (put < 0 && errno != EAGAIN && errno != EINTR) write_closed = true;  // EPIPE: keep reading answers
    }
    char buf[8192];
    if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
      ssize_t got = ::read(err_fd_, buf, sizeof buf);
      if (got > 0) append_stderr(buf, static_cast<std::size_t>(got));
      else if (got == 0) close_fd(err_fd_);
    }
    if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
      ssize_t got = ::read(out_fd_, buf, sizeof buf);
      if (got > 0) out_buffer_.append(buf, static_cast<std::size_t>(got));
      else if (got == 0) stdout_eof_ = true;
    }

    bool broken = false;
    while (pending > 0) {
      auto line = next_line();
      if (!line) break;
      json resp;
      try {
        resp = json::parse(*line);
      } catch (const json::parse_error&) {
        fail_pending("malformed adapter response: " + *line);
        broken = true;
        break;
      }
      if (!resp.is_object() || !resp.contains("id")) {
        fail_pending("adapter response without id: " + *line);
        broken = true;
        break;
      }
      auto it = by_id.find(resp["id"].dump());
      if (it == by_id.end() || results[it->second].response) {
        fail_pending("adapter response with unknown id " + resp["id"].dump());
        broken = true;
        break;
      }
      if (resp.contains("error")) {
        results[it->second].error = "adapter error: " + (resp["error"].is_string() ? resp["error"].get<std::string>()
                                                                                    : resp["error"].dump());
        results[it->second].response = std::nullopt;
        by_id.erase(it);
      } else {
        results[it->second].response = std::move(resp);
      }
      --pending;
    }
    if (broken) {
      kill_process();
      break;
    }
    if (pending > 0 && stdout_eof_) {
      while (err_fd_ >= 0 && read_available(200)) {
      }
      int status = 0;
      std::string why = "adapter closed its output";
      if (pid_ > 0 && ::waitpid(pid_, &status, 0) == pid_) {
        why = "adapter exited (" + describe_status(status) + ")";
        pid_ = -1;
      }
      fail_pending(why + " with " + std::to_string(pending) + " request(s) unanswered");
      kill_process();
      break;
    }
  }
  return results;
}

json AdapterHandle::request(json req) {
  std::vector<json> batch;
  batch.push_back(std::move(req));
  auto res = request_batch(std::move(batch));
  if (!res[0].ok()) throw MetricError(res[0].error);
  return std::move(*res[0].response);
}

AdapterMetric::AdapterMetric(std::string command, double tie_epsilon, const AdapterOptions& options)
    : command_(std::move(command)), tie_epsilon_(tie_epsilon), handle_(AdapterHandle::spawn(command_, options)) {}

namespace {

double score_field(const json& resp, const char* key) {
  auto it = resp.find(key);
  if (it == resp.end() || !it->is_number()) throw ProtocolError(std::string("adapter response lacks numeric '") + key + "': " + resp.dump());
  return it->get<double>();
}

std::optional<double> optional_score(const json& resp, const char* key) {
  auto it = resp.find(key);
  if (it == resp.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw ProtocolError(std::string("adapter field '") + key + "' is not a number: " + resp.dump());
  return it->get<double>();
}

}  // namespace

double AdapterMetric::score(std::string_view text) {
  if (handle_.mode() != AdapterMode::Score) throw MetricError(id() + " runs in pair mode and cannot score single texts");
  if (text.empty()) throw MetricError("cannot score empty text");
  return score_field(handle_.request(json{{"text", std::string(text)}}), "score");
}

MetricVerdict AdapterMetric::choose(std::string_view a, std::string_view b) {
  TextPair item{a, b};
  auto out = choose_batch(std::span<const TextPair>(&item, 1));
  if (out[0].error) throw MetricError(*out[0].error);
  return out[0].verdict;
}

std::vector<PairOutcome> AdapterMetric::choose_batch(std::span<const TextPair> items) {
  std::vector<PairOutcome> out(items.size());
  std::vector<json> requests;
  const bool scoring = handle_.mode() == AdapterMode::Score;
  for (const auto& item : items) {
    if (scoring) {
      requests.push_back(json{{"text", std::string(item.a)}});
      requests.push_back(json{{"text", std::string(item.b)}});
    } else {
      requests.push_back(json{{"a", std::string(item.a)}, {"b", std::string(item.b)}});
    }
  }
  auto results = handle_.request_batch(std::move(requests));
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      if (scoring) {
        const auto& ra = results[2 * i];
        const auto& rb = results[2 * i + 1];
        if (!ra.ok()) throw MetricError(ra.error);
        if (!rb.ok()) throw MetricError(rb.error);
        out[i].verdict = verdict_from_scores(score_field(*ra.response, "score"), score_field(*rb.response, "score"),
                                             tie_epsilon_);
      } else {
        const auto& r = results[i];
        if (!r.ok()) throw MetricError(r.error);
        const auto& resp = *r.response;
        auto it = resp.find("choice");
        if (it == resp.end() || !it->is_string()) throw ProtocolError("adapter response lacks 'choice': " + resp.dump());
        const auto choice = text::to_lower(it->get<std::string>());
        MetricVerdict v;
        if (choice == "a") v.choice = Choice::A;
        else if (choice == "b") v.choice = Choice::B;
        else if (choice == "tie") v.choice = Choice::Tie;
        else throw ProtocolError("adapter choice must be \"a\", \"b\" or \"tie\": " + resp.dump());
        v.score_a = optional_score(resp, "score_a");
        v.score_b = optional_score(resp, "score_b");
        out[i].verdict = v;
      }
    } catch (const MetricError& e) {
      out[i] = {MetricVerdict{}, std::string(e.what())};
    }
  }
  return out;
}

}  // namespace reveval
