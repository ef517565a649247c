#include <algorithm>
#include <cstdlib>
#include <set>

#include "error_cases.hpp"
#include "softbody/persistence.hpp"
#include "support.hpp"

namespace softbody {
namespace {

using testing::json;
using testing::ProtocolClient;

const std::filesystem::path kGoldens = SOFTBODY_TESTDATA_DIR "/protocol";

std::vector<std::string> golden_names() {
  std::vector<std::string> names = server::request_types();
  names.push_back("errors");
  return names;
}

class Golden : public ::testing::TestWithParam<std::string> {};

TEST_P(Golden, TranscriptMatches) {
  const std::filesystem::path path = kGoldens / (GetParam() + ".jsonl");
  ASSERT_TRUE(std::filesystem::exists(path)) << path;
  const testing::Transcript t = testing::read_transcript(path);
  ASSERT_FALSE(t.requests.empty());
  const std::vector<std::string> actual = testing::play(t);
  if (std::getenv("SOFTBODY_REGENERATE_GOLDENS")) {
    persistence::write_file(path, testing::render(t, actual));
    GTEST_SKIP() << "regenerated " << path;
  }
  ASSERT_EQ(t.replies.size(), actual.size()) << "transcript lacks replies";
  for (std::size_t i = 0; i < actual.size(); ++i) {
    EXPECT_EQ(actual[i], t.replies[i]) << (i == 0 ? std::string("greeting") : t.requests[i - 1]);
  }
}

INSTANTIATE_TEST_SUITE_P(PerMessageType, Golden, ::testing::ValuesIn(golden_names()),
                         [](const auto& info) { return info.param; });

TEST(Protocol, EveryTypeHasAnAckedGolden) {
  for (const std::string& type : server::request_types()) {
    const testing::Transcript t = testing::read_transcript(kGoldens / (type + ".jsonl"));
    bool ack = false;
    for (std::size_t i = 0; i < t.requests.size(); ++i) {
      const json req = json::parse(t.requests[i]);
      const json reply = json::parse(t.replies.at(i + 1));
      if (req["type"] == type) {
        EXPECT_EQ(reply["request_type"], type);
        EXPECT_EQ(reply["request_id"], req["request_id"]);
        ack = ack || reply["type"] == "ack";
      }
    }
    EXPECT_TRUE(ack) << type << " golden has no ack";
  }
}

TEST(Protocol, GreetingListsCatalog) {
  ProtocolClient c;
  const json hello = json::parse(c.open());
  EXPECT_EQ(hello["type"], "catalog");
  EXPECT_GE(hello["integrators"].size(), 4u);
  EXPECT_EQ(hello["detectors"], json({"bruteForce", "sortedSweep"}));
  EXPECT_TRUE(hello["instances"].empty());
  EXPECT_EQ(hello["max_instances"], 8);
}

TEST(Protocol, CatalogListsLiveInstances) {
  ProtocolClient c;
  testing::small_body(c);
  c.request({{"type", "add_instance"}, {"instance_id", 1}, {"integrator", "rk4"}});
  const json cat = c.request({{"type", "catalog"}});
  ASSERT_EQ(cat["instances"].size(), 2u);
  EXPECT_EQ(cat["instances"][1]["integrator"], "rk4");
}

class Reachable : public ::testing::TestWithParam<std::size_t> {};

TEST_P(Reachable, ErrorCodeSurfaces) {
  const testing::ErrorCase ec = testing::error_cases()[GetParam()];
  ProtocolClient c(ec.max_instances);
  c.open();
  const json reply = ec.run(c);
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["code"], std::string(to_string(ec.code))) << reply.dump();
  EXPECT_FALSE(reply.value("message", "").empty());
}

INSTANTIATE_TEST_SUITE_P(Codes, Reachable, ::testing::Range<std::size_t>(0, testing::error_cases().size()),
                         [](const auto& info) {
                           std::string n(to_string(testing::error_cases()[info.param].code));
                           std::erase(n, '_');
                           return n;
                         });

TEST(Protocol, EveryEngineCodeHasAScenario) {
  std::set<ErrorCode> covered;
  for (const auto& ec : testing::error_cases()) covered.insert(ec.code);
  for (ErrorCode code : testing::required_engine_codes()) EXPECT_TRUE(covered.contains(code)) << to_string(code);
}

TEST(Protocol, ConnectionSurvivesGarbage) {
  ProtocolClient c;
  c.open();
  EXPECT_EQ(json::parse(c.send("\x01\x02 nope"))["code"], "PARSE_ERROR");
  EXPECT_EQ(json::parse(c.send("42"))["code"], "BAD_REQUEST");
  EXPECT_EQ(c.request({{"type", "catalog"}})["type"], "ack");
}

TEST(Protocol, RequestIdEchoedVerbatim) {
  ProtocolClient c;
  EXPECT_EQ(c.request({{"type", "catalog"}, {"request_id", 17}})["request_id"], 17);
  EXPECT_EQ(c.request({{"type", "catalog"}, {"request_id", "x"}})["request_id"], "x");
  EXPECT_FALSE(c.request({{"type", "catalog"}}).contains("request_id"));
  EXPECT_EQ(c.request({{"type", "nope"}, {"request_id", "y"}})["request_id"], "y");
}

TEST(Protocol, CamelCaseAliases) {
  ProtocolClient c;
  testing::small_body(c);
  const json sub = c.request({{"type", "subscribe"}, {"instanceId", 1}, {"rateHz", 5}, {"requestId", "s"}});
  EXPECT_EQ(sub["type"], "ack");
  EXPECT_EQ(sub["rate_hz"], 5.0);
  EXPECT_EQ(sub["request_id"], "s");
  const json set = c.request({{"type", "set_params"}, {"instanceId", 1}, {"timeStepOverride", 0.002}});
  EXPECT_EQ(set["effective_time_step"], 0.002);
}

TEST(Protocol, PauseFreezesFrames) {
  ProtocolClient c;
  testing::small_body(c, {{"start", true}});
  c.request({{"type", "subscribe"}, {"instance_id", 1}, {"rate_hz", 60}});
  ASSERT_TRUE(c.wait_event([](const json& e) { return e["type"] == "frame" && e["tick"] > 0; }));
  const json paused = c.request({{"type", "pause"}, {"instance_id", 1}});
  EXPECT_EQ(paused["status"], "paused");
  c.drain_events();
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  const std::vector<json> later = c.drain_events();
  ASSERT_FALSE(later.empty()) << "paused instances keep publishing their frame";
  for (const json& f : later) {
    EXPECT_EQ(f["tick"], paused["tick"]);
    EXPECT_EQ(f["status"], "paused");
  }
}

TEST(Protocol, SwapChangesFrameTimeStep) {
  ProtocolClient c;
  testing::small_body(c);
  const json before = c.request({{"type", "step"}, {"instance_id", 1}});
  EXPECT_EQ(c.request({{"type", "swap_algorithm"}, {"instance_id", 1}, {"name", "rk4"}})["type"], "ack");
  const json after = c.request({{"type", "step"}, {"instance_id", 1}});
  EXPECT_NEAR(after["sim_time"].get<double>() - before["sim_time"].get<double>(), 0.01, 1e-15);
}

TEST(Protocol, AsyncStepFailureReachesSubscribers) {
  ProtocolClient c;
  testing::small_body(c, {{"gravity", {1e300, 0, 0}}, {"time_step_override", 1e10}});
  const int sub = c.request({{"type", "subscribe"}, {"instance_id", 1}})["subscription_id"];
  c.request({{"type", "start"}, {"instance_id", 1}});
  ASSERT_TRUE(c.wait_event([&](const json& e) {
    return e["type"] == "error" && e["code"] == "NONFINITE_STATE" && e["instance_id"] == 1 && e["subscription_id"] == sub;
  }));
  const json cat = c.request({{"type", "catalog"}});
  EXPECT_EQ(cat["instances"][0]["status"], "paused");
  EXPECT_EQ(cat["instances"][0]["tick"], 0);
}

TEST(Protocol, DisconnectLeavesInstanceRunning) {
  ProtocolClient owner;
  testing::small_body(owner, {{"start", true}});
  owner.request({{"type", "subscribe"}, {"instance_id", 1}, {"rate_hz", 100}});
  ASSERT_TRUE(owner.wait_event([](const json& e) { return e["type"] == "frame"; }));
  Hub& hub = owner.hub();
  owner.disconnect();
  const auto t0 = hub.execute(1, [](Simulation& s) { return s.tick(); });
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  const auto t1 = hub.execute(1, [](Simulation& s) { return s.tick(); });
  EXPECT_GT(t1, t0);
  EXPECT_EQ(hub.execute(1, [](Simulation& s) { return s.status(); }), SimStatus::Running);
  // Nothing is delivered to the departed client.
  owner.drain_events();
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  EXPECT_TRUE(owner.drain_events().empty());
}

TEST(Protocol, DragHoldsThenReleases) {
  ProtocolClient c;
  testing::small_body(c, {{"gravity", {0, 0, 0}}});
  c.request({{"type", "drag"}, {"instance_id", 1}, {"particle_id", 2}, {"target", {5, 0, 0}}, {"stiffness", 10},
             {"remaining_steps", 1000}});
  const json save = c.request({{"type", "save_state"}, {"instance_id", 1}});
  EXPECT_EQ(save["document"]["pendingInputs"].size(), 1u);
  c.request({{"type", "drag"}, {"instance_id", 1}, {"particle_id", 2}, {"remaining_steps", 0}});
  EXPECT_TRUE(c.request({{"type", "save_state"}, {"instance_id", 1}})["document"]["pendingInputs"].empty());
}

TEST(Protocol, SavedStateResumesElsewhere) {
  ProtocolClient a;
  testing::small_body(a, {{"gravity", {0, -3, 0}}});
  a.request({{"type", "step"}, {"instance_id", 1}, {"count", 5}});
  const json doc = a.request({{"type", "save_state"}, {"instance_id", 1}})["document"];
  const json direct = a.request({{"type", "step"}, {"instance_id", 1}, {"count", 50}});

  ProtocolClient b;
  const json imported = b.request({{"type", "import_state"}, {"document", doc}});
  EXPECT_EQ(imported["tick"], 5);
  EXPECT_EQ(imported["status"], "paused");
  const json resumed = b.request({{"type", "step"}, {"instance_id", imported["instance_id"]}, {"count", 50}});
  EXPECT_EQ(resumed["sim_time"], direct["sim_time"]);
  const json da = a.request({{"type", "get_object"}, {"instance_id", 1}})["document"]["body"]["particles"];
  const json db = b.request({{"type", "get_object"}, {"instance_id", 1}})["document"]["body"]["particles"];
  EXPECT_EQ(da, db);
}

TEST(Protocol, SeriesRoundTripsThroughPlayback) {
  ProtocolClient c;
  testing::small_body(c, {{"gravity", {0, -10, 0}}});
  c.request({{"type", "start_series"}, {"instance_id", 1}, {"include_current", true}});
  c.request({{"type", "step"}, {"instance_id", 1}, {"count", 6}});
  const json series = c.request({{"type", "stop_series"}, {"instance_id", 1}});
  EXPECT_EQ(series["frame_count"], 7);
  c.request({{"type", "subscribe"}, {"instance_id", 1}, {"rate_hz", 1000}});
  const json play = c.request({{"type", "start_playback"}, {"instance_id", 1}, {"document", series["document"]}});
  EXPECT_EQ(play["status"], "playback");
  EXPECT_EQ(play["frame_count"], 7);
  // Playback advances on its own; the last recorded frame always reaches subscribers.
  ASSERT_TRUE(c.wait_event([](const json& e) { return e["type"] == "frame" && e["tick"] == 6; }));
  ASSERT_TRUE(c.wait_event([](const json& e) { return e["type"] == "error" && e["code"] == "END_OF_SERIES"; }));
  const json positions = series["document"]["frames"][6]["positions"];
  for (const json& e : c.drain_events()) {
    if (e["type"] == "frame" && e["tick"] == 6) EXPECT_EQ(e["positions"], positions);
  }
  EXPECT_EQ(c.request({{"type", "step"}, {"instance_id", 1}})["code"], "END_OF_SERIES");
  EXPECT_EQ(c.request({{"type", "stop_playback"}, {"instance_id", 1}})["status"], "paused");
}

TEST(Protocol, UnsubscribeIsPerConnection) {
  ProtocolClient a;
  testing::small_body(a);
  const int sub = a.request({{"type", "subscribe"}, {"instance_id", 1}})["subscription_id"];
  ProtocolClient b;
  EXPECT_EQ(b.request({{"type", "unsubscribe"}, {"subscription_id", sub}})["code"], "BAD_REQUEST");
  EXPECT_EQ(a.request({{"type", "unsubscribe"}, {"subscription_id", sub}})["type"], "ack");
}

TEST(Protocol, ResolvePortPrefersEnvironment) {
  ::unsetenv("SOFTBODY_PORT");
  EXPECT_EQ(server::resolve_port(9000), 9000);
  ::setenv("SOFTBODY_PORT", "9123", 1);
  EXPECT_EQ(server::resolve_port(9000), 9123);
  ::setenv("SOFTBODY_PORT", "http", 1);
  EXPECT_EQ(server::resolve_port(9000), 9000);
  ::unsetenv("SOFTBODY_PORT");
}

}  // namespace
}  // namespace softbody
