#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hh/advisor.hpp"
#include "hh/evolution.hpp"
#include "hh/io.hpp"
#include "hh/rewards.hpp"
#include "hh/selector.hpp"
#include "support.hpp"

using namespace hh;
using namespace hh::test;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an hh::Error");
  return Errc::InvalidOperation;
}

// Local chat-completions endpoint. `script` returns (status, reply text)
// for the nth request.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(std::function<std::pair<int, std::string>(int)> script)
      : script_(std::move(script)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = requests_++;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      const auto [status, text] = script_(n);
      res.status = status;
      if (status == 200) {
        nlohmann::json j;
        j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}});
        res.set_content(j.dump(), "application/json");
      } else {
        res.set_content(R"({"error":"busy"})", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  LiveAdvisorConfig config() const {
    LiveAdvisorConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.api_key = "test-key";
    c.model = "test-model";
    c.backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(5000);
    return c;
  }
  int requests() const { return requests_; }
  std::string last_body() const { return last_body_; }
  std::string last_auth() const { return last_auth_; }

 private:
  std::function<std::pair<int, std::string>(int)> script_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::string last_body_;
  std::string last_auth_;
};

AdvisorRequest simple_request(const std::string& prompt) {
  AdvisorRequest r;
  r.role = AdvisorRole::Filter;
  r.prompt = prompt;
  return r;
}

std::string golden_path(const std::string& name) {
  return std::string(HH_TEST_DATA_DIR) + "/golden/" + name + ".txt";
}

// Compares against the stored rendering; HH_UPDATE_GOLDEN=1 rewrites it.
void check_golden(const std::string& name, const std::string& text) {
  const auto path = golden_path(name);
  if (std::getenv("HH_UPDATE_GOLDEN")) write_file(path, text);
  REQUIRE(std::filesystem::exists(path));
  CHECK(read_file(path) == text);
}

}  // namespace

TEST_CASE("reply parsing") {
  const auto pool = default_pool(ProblemKind::Tsp);
  SUBCASE("filter") {
    const auto two = parse_filter_reply("nearest_neighbor, two_opt", pool);
    CHECK(two.parse_ok);
    REQUIRE(two.names.size() == 2);
    CHECK(two.names[0] == pool[0].id);
    CHECK(two.names[1] == pool[8].id);
    CHECK_FALSE(parse_filter_reply("no idea", pool).parse_ok);
    CHECK(parse_filter_reply("two_opt, made_up", pool).names.size() == 1);
  }
  SUBCASE("edit") {
    const auto ok = parse_edit_reply(
        "rationale: look wider\n```edit\nfamily = nearest_neighbor\nlimit_candidates = true\n```\n",
        Family::NearestNeighbor, "E1");
    REQUIRE(ok.parse_ok);
    CHECK(ok.edit->strategy_id == "E1");
    CHECK(ok.edit->rationale == "look wider");
    REQUIRE(ok.edit->edits.size() == 1);
    CHECK(ok.edit->edits[0].target == "limit_candidates");
    const auto bad = parse_edit_reply("```edit\nwarp_speed = 9\n```\n", Family::NearestNeighbor, "E2");
    CHECK_FALSE(bad.parse_ok);
    CHECK_FALSE(bad.error.empty());
    CHECK_FALSE(parse_edit_reply("limit_candidates = true", Family::NearestNeighbor, "E3").parse_ok);
  }
  SUBCASE("select") {
    const FeatureMap z{{"visited_fraction", 0.25}, {"current_length", 123.5}};
    const auto reply = format_select_reply(pool[1].id, z);
    const auto parsed = parse_select_reply(reply, pool);
    CHECK(parsed.parse_ok);
    CHECK(parsed.heuristic == pool[1].id);
    CHECK(parsed.predicted == z);
    const auto unnamed = parse_select_reply("heuristic: teleport\n```features\nx = 1\n```\n", pool);
    CHECK_FALSE(unnamed.parse_ok);
    CHECK(unnamed.has_features);
  }
  SUBCASE("edit replies round-trip through the formatter") {
    Rng rng(12);
    for (auto kind : {ProblemKind::Tsp, ProblemKind::Mkp, ProblemKind::MaxCut}) {
      for (const auto& g : default_pool(kind)) {
        StrategyEdit e;
        e.target = g.family;
        e.rationale = "r";
        for (const auto& p : g.info().params) {
          double v = p.lo + rng.uniform01() * (p.hi - p.lo);
          if (p.integral) v = std::round(v);
          e.edits.push_back({p.name, v});
        }
        for (const auto& f : g.info().flags) e.edits.push_back({f.name, rng.bernoulli(0.5) ? 1.0 : 0.0});
        const auto back = parse_edit_reply(format_edit_reply(e), g.family, "S");
        REQUIRE(back.parse_ok);
        CHECK(mutate_genome(g, *back.edit).id == mutate_genome(g, e).id);
      }
    }
  }
}

TEST_CASE("scripted advisor") {
  const auto inst = random_tsp(9, 4);
  const auto pool = default_pool(ProblemKind::Tsp);
  const auto state = initial_state(inst);
  ScriptedContext ctx;
  ctx.pool = pool;
  ctx.state = &state;
  ScriptedAdvisor advisor;

  AdvisorRequest filter;
  filter.role = AdvisorRole::Filter;
  filter.prompt = render_filter_prompt(state, pool, 1000);
  filter.context = &ctx;
  const auto listed = parse_filter_reply(advisor.complete(filter), pool);
  CHECK(listed.names.size() == pool.size());

  AdvisorRequest select;
  select.role = AdvisorRole::Select;
  select.prompt = render_select_prompt(state, pool, 1000);
  select.context = &ctx;
  const auto a = advisor.complete(select);
  CHECK(a == advisor.complete(select));
  const auto parsed = parse_select_reply(a, pool);
  REQUIRE(parsed.parse_ok);
  const auto z = extract_features(state);
  REQUIRE(parsed.predicted.size() == z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(parsed.predicted[i].first == z[i].first);
    CHECK(format_sig4(parsed.predicted[i].second) == format_sig4(z[i].second));
  }
  RewardConfig rc;
  CHECK(cpr_reward(extract_features(state), parsed.predicted, rc) ==
        static_cast<double>(extract_features(state).size()));

  CHECK(code_of([&] { advisor.complete(simple_request("x")); }) == Errc::AdvisorUnavailable);
}

TEST_CASE("replay advisor") {
  CHECK(code_of([] {
          ReplayAdvisor empty({});
          empty.complete(simple_request("anything"));
        }) == Errc::TranscriptMiss);

  const auto req = simple_request("list them");
  ReplayAdvisor replay({{request_hash(req), "filter", "two_opt"}});
  CHECK(replay.complete(req) == "two_opt");
  CHECK(code_of([&] { replay.complete(simple_request("list them!")); }) == Errc::TranscriptMiss);
  auto other_role = req;
  other_role.role = AdvisorRole::Select;
  CHECK(request_hash(other_role) != request_hash(req));
  CHECK(code_of([&] { replay.complete(other_role); }) == Errc::TranscriptMiss);
}

TEST_CASE("recorded evolution replays identically") {
  const std::string path = "advisor_transcript_test.jsonl";
  std::remove(path.c_str());
  const auto nn = make_genome(Family::NearestNeighbor);
  std::vector<InstancePtr> val{random_tsp(12, 81), random_tsp(12, 82)};
  EvolutionConfig cfg;
  cfg.max_perturbation_trials = 200;
  cfg.max_refinement_iterations = 2;
  cfg.seed = 5;

  auto recorder = RecordingAdvisor(std::make_shared<ScriptedAdvisor>(), path);
  const auto live = evolve_one_round(nn, random_tsp(20, 89), val, cfg, recorder);
  REQUIRE(live.k_star.has_value());
  const auto transcript = load_transcript(path);
  CHECK_FALSE(transcript.empty());

  ReplayAdvisor replay(transcript);
  const auto again = evolve_one_round(nn, random_tsp(20, 89), val, cfg, replay);
  CHECK(round_to_json(again) == round_to_json(live));
  CHECK(again.result.id == live.result.id);

  // Another instance renders prompts the transcript has never seen.
  const auto other = evolve_one_round(nn, random_tsp(20, 92), val, cfg, replay);
  if (other.contrastive_found && other.k_star) {
    CHECK(other.diagnostic.find("no recorded reply") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("selector and evolution accept every backend") {
  const std::string path = "advisor_conformance_test.jsonl";
  std::remove(path.c_str());
  const auto inst = random_tsp(10, 33);
  const auto pool = default_pool(ProblemKind::Tsp);
  SelectorConfig sc;
  sc.filter_mode = FilterMode::Advisor;
  sc.rollouts_per_candidate = 2;
  sc.master_seed = 3;

  auto recorder = RecordingAdvisor(std::make_shared<ScriptedAdvisor>(), path);
  const auto recorded = solve_instance(inst, pool, sc, &recorder);
  ReplayAdvisor replay(load_transcript(path));
  const auto replayed = solve_instance(inst, pool, sc, &replay);
  ScriptedAdvisor scripted;
  const auto direct = solve_instance(inst, pool, sc, &scripted);
  for (const auto* r : {&recorded, &replayed, &direct}) {
    CHECK(validate_solution(*inst, hh::replay(r->trajectory).solution).valid);
    CHECK(r->trajectory.steps == recorded.trajectory.steps);
  }

  // The live backend pointed at nothing degrades to passthrough filtering.
  LiveAdvisorConfig dead;
  dead.base_url = "http://127.0.0.1:9/v1";
  dead.max_retries = 0;
  dead.timeout = std::chrono::milliseconds(200);
  LiveAdvisor down(dead);
  const auto fallback = solve_instance(inst, pool, sc, &down);
  CHECK(validate_solution(*inst, hh::replay(fallback.trajectory).solution).valid);
  std::remove(path.c_str());
}

TEST_CASE("live advisor") {
  SUBCASE("successful calls are counted and carry the request") {
    FakeEndpoint endpoint([](int) { return std::pair{200, std::string("nearest_neighbor")}; });
    LiveAdvisor advisor(endpoint.config());
    AdvisorRequest req = simple_request("which ones?");
    req.decoding.temperature = 0.7;
    CHECK(advisor.complete(req) == "nearest_neighbor");
    CHECK(advisor.calls_made() == 1);
    CHECK(advisor.complete(req) == "nearest_neighbor");
    CHECK(advisor.calls_made() == 2);
    const auto body = nlohmann::json::parse(endpoint.last_body());
    CHECK(body["model"] == "test-model");
    CHECK(body["messages"][0]["content"] == "which ones?");
    CHECK(body["temperature"] == 0.7);
    CHECK(body["top_p"] == 0.95);
    CHECK(body["max_tokens"] == 1600);
    CHECK(endpoint.last_auth() == "Bearer test-key");
  }
  SUBCASE("budget 0 fails before any request") {
    FakeEndpoint endpoint([](int) { return std::pair{200, std::string("x")}; });
    auto cfg = endpoint.config();
    cfg.call_budget = 0;
    LiveAdvisor advisor(cfg);
    CHECK(code_of([&] { advisor.complete(simple_request("p")); }) == Errc::BudgetExhausted);
    CHECK(endpoint.requests() == 0);
  }
  SUBCASE("budget caps successful calls") {
    FakeEndpoint endpoint([](int) { return std::pair{200, std::string("x")}; });
    auto cfg = endpoint.config();
    cfg.call_budget = 2;
    LiveAdvisor advisor(cfg);
    advisor.complete(simple_request("a"));
    advisor.complete(simple_request("b"));
    CHECK(code_of([&] { advisor.complete(simple_request("c")); }) == Errc::BudgetExhausted);
    CHECK(endpoint.requests() == 2);
  }
  SUBCASE("429 is retried three times, then HttpError") {
    FakeEndpoint endpoint([](int) { return std::pair{429, std::string()}; });
    LiveAdvisor advisor(endpoint.config());
    CHECK(code_of([&] { advisor.complete(simple_request("p")); }) == Errc::HttpError);
    CHECK(endpoint.requests() == 4);
    CHECK(advisor.calls_made() == 0);
  }
  SUBCASE("a retry that succeeds counts once") {
    FakeEndpoint endpoint([](int n) { return n < 2 ? std::pair{503, std::string()} : std::pair{200, std::string("ok")}; });
    LiveAdvisor advisor(endpoint.config());
    CHECK(advisor.complete(simple_request("p")) == "ok");
    CHECK(endpoint.requests() == 3);
    CHECK(advisor.calls_made() == 1);
  }
  SUBCASE("client errors are not retried") {
    FakeEndpoint endpoint([](int) { return std::pair{400, std::string()}; });
    LiveAdvisor advisor(endpoint.config());
    CHECK(code_of([&] { advisor.complete(simple_request("p")); }) == Errc::HttpError);
    CHECK(endpoint.requests() == 1);
  }
  SUBCASE("missing configuration") {
    LiveAdvisor advisor(LiveAdvisorConfig{});
    CHECK(code_of([&] { advisor.complete(simple_request("p")); }) == Errc::AdvisorUnavailable);
  }
}

TEST_CASE("prompt renderings are pinned") {
  const auto inst = make_tsp_from_coords("golden", {{0, 0}, {10, 0}, {10, 10}, {0, 10}, {5, 3}},
                                         EdgeWeightType::Euc2d);
  const auto pool = default_pool(ProblemKind::Tsp);
  auto state = initial_state(inst);
  state = apply_operation(state, {OpKind::Append, {0, 0, 0}});
  state = apply_operation(state, {OpKind::Append, {4, 0, 0}});
  check_golden("filter", render_filter_prompt(state, pool, 1000));
  check_golden("select", render_select_prompt(state, pool, 1000));

  const auto nn = make_genome(Family::NearestNeighbor);
  check_golden("evolve", render_evolve_prompt(nn, state, {OpKind::Append, {1, 0, 0}},
                                              {OpKind::Append, {3, 0, 0}}, 4.5, 1000));
  StrategyEdit s;
  s.strategy_id = "E0000beef";
  s.target = Family::NearestNeighbor;
  s.edits = {{"limit_candidates", 1}};
  s.rationale = "skip far nodes";
  check_golden("refine", render_refine_prompt(nn, s, 41.25, 2));

  const auto big = generate_instance(ProblemKind::Tsp, 200, 1);
  const auto prompt = render_select_prompt(initial_state(big), pool, 1000);
  const auto small = render_select_prompt(initial_state(big), pool, 200);
  CHECK(small.size() < prompt.size());
}
