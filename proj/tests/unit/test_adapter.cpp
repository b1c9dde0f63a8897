#include <gtest/gtest.h>

#include <chrono>

#include "reveval/adapter.hpp"
#include "reveval/error.hpp"
#include "test_support.hpp"

using namespace reveval;
using nlohmann::json;
namespace ts = testing_support;

namespace {

std::vector<json> text_requests(int n) {
  std::vector<json> out;
  for (int i = 0; i < n; ++i) out.push_back(json{{"text", std::string(static_cast<std::size_t>(i + 1), 'x')}});
  return out;
}

}  // namespace

TEST(Adapter, HandshakeAndScore) {
  auto h = spawn_adapter(ts::stub_command("--mode score"));
  EXPECT_TRUE(h.alive());
  EXPECT_EQ(h.mode(), AdapterMode::Score);
  EXPECT_EQ(h.handshake().value("unit", ""), "byte");
  auto r = h.request(json{{"text", "abcd"}});
  EXPECT_EQ(r["score"].get<double>(), -4.0);
  h.close();
  EXPECT_FALSE(h.alive());
}

TEST(Adapter, PipelinedBatchIsMatchedById) {
  auto h = spawn_adapter(ts::stub_command("--reverse"));
  auto res = h.request_batch(text_requests(200));
  ASSERT_EQ(res.size(), 200u);
  for (std::size_t i = 0; i < res.size(); ++i) {
    ASSERT_TRUE(res[i].ok()) << res[i].error;
    ASSERT_EQ((*res[i].response)["score"].get<double>(), -static_cast<double>(i + 1));
  }
  // The handle stays usable for the next batch.
  EXPECT_TRUE(h.request_batch(text_requests(3))[2].ok());
}

TEST(Adapter, ExplicitIdsAreKeptAndDuplicatesRejected) {
  auto h = spawn_adapter(ts::stub_command(""));
  std::vector<json> reqs = {json{{"id", "first"}, {"text", "a"}}, json{{"id", 7}, {"text", "bb"}}};
  auto res = h.request_batch(reqs);
  EXPECT_EQ((*res[0].response)["id"], "first");
  EXPECT_EQ((*res[1].response)["score"].get<double>(), -2.0);
  std::vector<json> dup = {json{{"id", 1}, {"text", "a"}}, json{{"id", 1}, {"text", "b"}}};
  EXPECT_THROW(h.request_batch(dup), UsageError);
}

TEST(Adapter, Utf8AndNewlinesSurviveTheWire) {
  auto h = spawn_adapter(ts::stub_command("--echo"));
  const std::string text = "line one\nline \"two\"\tcafé — ü\\n";
  auto r = h.request(json{{"text", text}});
  EXPECT_EQ(r["echo"].get<std::string>(), text);
  EXPECT_EQ(r["score"].get<double>(), -static_cast<double>(text.size()));
}

TEST(Adapter, PerItemErrorLeavesOthersAlone) {
  auto h = spawn_adapter(ts::stub_command("--error-on poison"));
  std::vector<json> reqs = {json{{"text", "fine"}}, json{{"text", "poison pill"}}, json{{"text", "also fine"}}};
  auto res = h.request_batch(reqs);
  EXPECT_TRUE(res[0].ok());
  EXPECT_FALSE(res[1].ok());
  EXPECT_NE(res[1].error.find("refusing input"), std::string::npos);
  EXPECT_TRUE(res[2].ok());
  EXPECT_TRUE(h.alive());
}

TEST(Adapter, CrashMidBatchFailsThePendingRequests) {
  auto h = spawn_adapter(ts::stub_command("--crash-after 5"));
  auto res = h.request_batch(text_requests(20));
  std::size_t ok = 0;
  for (const auto& r : res) ok += r.ok();
  EXPECT_EQ(ok, 5u);
  EXPECT_NE(res[10].error.find("crashing on purpose"), std::string::npos) << res[10].error;
  EXPECT_FALSE(h.alive());
  auto again = h.request_batch(text_requests(1));
  EXPECT_FALSE(again[0].ok());
  EXPECT_THROW(h.request(json{{"text", "x"}}), MetricError);
}

TEST(Adapter, MalformedResponseKillsTheHandle) {
  auto h = spawn_adapter(ts::stub_command("--malformed-after 2"));
  auto res = h.request_batch(text_requests(4));
  EXPECT_TRUE(res[0].ok());
  EXPECT_TRUE(res[1].ok());
  EXPECT_NE(res[2].error.find("malformed"), std::string::npos);
  EXPECT_FALSE(res[3].ok());
  EXPECT_FALSE(h.alive());
}

TEST(Adapter, UnknownIdIsAProtocolFailure) {
  auto h = spawn_adapter(ts::stub_command("--wrong-id"));
  auto res = h.request_batch(text_requests(2));
  EXPECT_FALSE(res[0].ok());
  EXPECT_NE(res[0].error.find("unknown id"), std::string::npos);
}

TEST(Adapter, HandshakeFailures) {
  EXPECT_THROW(spawn_adapter(ts::stub_command("--bad-handshake")), ProtocolError);
  EXPECT_THROW(spawn_adapter(ts::stub_command("--version 2")), ProtocolError);
  EXPECT_THROW(spawn_adapter(ts::stub_command("--mode rank")), ProtocolError);
  try {
    spawn_adapter(ts::stub_command("--exit-early"));
    FAIL() << "expected MetricError";
  } catch (const ProtocolError&) {
    FAIL() << "early exit is not a protocol error";
  } catch (const MetricError& e) {
    EXPECT_NE(std::string(e.what()).find("cannot load model"), std::string::npos) << e.what();
  }
  EXPECT_THROW(spawn_adapter("/nonexistent/adapter-binary"), MetricError);
  EXPECT_THROW(spawn_adapter("   "), UsageError);
}

TEST(Adapter, HandshakeTimeout) {
  AdapterOptions o;
  o.handshake_timeout = std::chrono::milliseconds(300);
  auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(spawn_adapter(ts::stub_command("--hang"), o), MetricError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(5));
}

TEST(Adapter, RequestTimeout) {
  AdapterOptions o;
  o.request_timeout = std::chrono::milliseconds(200);
  auto h = spawn_adapter(ts::stub_command("--slow 2000"), o);
  auto res = h.request_batch(text_requests(1));
  EXPECT_FALSE(res[0].ok());
  EXPECT_NE(res[0].error.find("did not answer"), std::string::npos);
  EXPECT_FALSE(h.alive());
}

TEST(AdapterMetric, ScoreModeComparesLocally) {
  AdapterMetric m(ts::stub_command("--mode score"));
  EXPECT_TRUE(m.is_scorer());
  EXPECT_EQ(m.score("abc"), -3.0);
  auto v = m.choose("long text", "short");
  EXPECT_EQ(v.choice, Choice::B);
  EXPECT_EQ(*v.score_a, -9.0);
  EXPECT_THROW(m.score(""), MetricError);
}

TEST(AdapterMetric, PairModeChoosesDirectly) {
  AdapterMetric m(ts::stub_command("--mode pair"));
  EXPECT_FALSE(m.is_scorer());
  EXPECT_THROW(m.score("x"), MetricError);
  std::vector<TextPair> items = {{"aa", "a"}, {"a", "aa"}, {"ab", "cd"}};
  auto out = m.choose_batch(items);
  EXPECT_EQ(out[0].verdict.choice, Choice::B);
  EXPECT_EQ(out[1].verdict.choice, Choice::A);
  EXPECT_EQ(out[2].verdict.choice, Choice::Tie);
  EXPECT_EQ(*out[0].verdict.score_b, -1.0);
}

TEST(AdapterMetric, ErrorsArePerPair) {
  AdapterMetric m(ts::stub_command("--error-on bad"));
  std::vector<TextPair> items = {{"ok", "fine"}, {"bad", "fine"}, {"x", "yy"}};
  auto out = m.choose_batch(items);
  EXPECT_FALSE(out[0].error);
  ASSERT_TRUE(out[1].error);
  EXPECT_EQ(out[1].verdict.choice, Choice::Tie);
  EXPECT_FALSE(out[2].error);
  EXPECT_EQ(out[2].verdict.choice, Choice::A);
}
