// Test double for the adapter protocol. Scores a text as minus its byte
// length; in pair mode the shorter text wins. Flags switch on the failure
// behaviours the client has to survive.

#include <poll.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

using nlohmann::json;

namespace {

struct Options {
  std::string mode = "score";
  int version = 1;
  bool bad_handshake = false;
  bool exit_early = false;
  bool hang = false;
  bool reverse = false;
  bool echo = false;
  bool wrong_id = false;
  long crash_after = -1;
  long malformed_after = -1;
  int slow_ms = 0;
  std::string error_on;
};

void emit(const json& j) {
  std::cout << j.dump() << '\n' << std::flush;
}

json answer(const json& req, const Options& o) {
  json resp{{"id", req.at("id")}};
  if (o.wrong_id) resp["id"] = 424242;
  auto has = [&](const char* k) { return req.contains(k) && req[k].is_string(); };
  if (!o.error_on.empty()) {
    for (const char* k : {"text", "a", "b"}) {
      if (has(k) && req[k].get<std::string>().find(o.error_on) != std::string::npos) {
        resp["error"] = "refusing input";
        return resp;
      }
    }
  }
  if (o.mode == "pair") {
    const auto a = req.value("a", std::string());
    const auto b = req.value("b", std::string());
    resp["choice"] = a.size() < b.size() ? "a" : (b.size() < a.size() ? "b" : "tie");
    resp["score_a"] = -static_cast<double>(a.size());
    resp["score_b"] = -static_cast<double>(b.size());
  } else {
    const auto t = req.value("text", std::string());
    resp["score"] = -static_cast<double>(t.size());
    if (o.echo) resp["echo"] = t;
  }
  return resp;
}

bool input_ready(int ms) {
  pollfd p{STDIN_FILENO, POLLIN, 0};
  return ::poll(&p, 1, ms) > 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"adapter protocol stub"};
  app.add_option("--mode", o.mode);
  app.add_option("--version", o.version);
  app.add_flag("--bad-handshake", o.bad_handshake);
  app.add_flag("--exit-early", o.exit_early);
  app.add_flag("--hang", o.hang, "never send the handshake");
  app.add_flag("--reverse", o.reverse, "answer each burst of requests in reverse order");
  app.add_flag("--echo", o.echo);
  app.add_flag("--wrong-id", o.wrong_id);
  app.add_option("--crash-after", o.crash_after);
  app.add_option("--malformed-after", o.malformed_after);
  app.add_option("--slow", o.slow_ms, "delay per response in ms");
  app.add_option("--error-on", o.error_on, "answer with an error field when the input contains this");
  CLI11_PARSE(app, argc, argv);

  std::ios::sync_with_stdio(false);
  if (o.exit_early) {
    std::cerr << "stub: cannot load model\n";
    return 1;
  }
  if (o.hang) {
    std::this_thread::sleep_for(std::chrono::hours(1));
    return 0;
  }
  std::cerr << "stub: starting in " << o.mode << " mode\n";
  if (o.bad_handshake) {
    std::cout << "hello, I am not json\n" << std::flush;
  } else {
    emit(json{{"protocol_version", o.version}, {"mode", o.mode}, {"unit", "byte"}});
  }

  long answered = 0;
  std::vector<json> burst;
  auto respond = [&](const json& req) {
    if (o.crash_after >= 0 && answered >= o.crash_after) {
      std::cerr << "stub: crashing on purpose\n";
      std::_Exit(3);
    }
    if (o.malformed_after >= 0 && answered >= o.malformed_after) {
      std::cout << "{not json\n" << std::flush;
      ++answered;
      return;
    }
    if (o.slow_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(o.slow_ms));
    emit(answer(req, o));
    ++answered;
  };
  auto flush_burst = [&] {
    for (auto it = burst.rbegin(); it != burst.rend(); ++it) respond(*it);
    burst.clear();
  };

  // Raw reads so that poll() sees exactly what is still unread.
  std::string buf;
  char chunk[4096];
  for (;;) {
    if (o.reverse && !burst.empty() && !input_ready(50)) flush_burst();
    const ssize_t n = ::read(STDIN_FILENO, chunk, sizeof chunk);
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buf.find('\n')) != std::string::npos) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (line.empty()) continue;
      json req = json::parse(line, nullptr, false);
      if (req.is_discarded() || !req.contains("id")) {
        std::cerr << "stub: bad request line\n";
        continue;
      }
      if (o.reverse) {
        burst.push_back(std::move(req));
      } else {
        respond(req);
      }
    }
  }
  flush_burst();
  std::cerr << "stub: stdin closed after " << answered << " responses\n";
  return 0;
}
