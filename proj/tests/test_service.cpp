// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <thread>

#include "support.hpp"
#include "tatumkit/render.hpp"
#include "tatumkit/service/commands.hpp"
#include "tatumkit/service/config.hpp"
#include "tatumkit/service/http_service.hpp"
#include "tatumkit/service/session.hpp"

// After the Eigen-based headers: resolv.h defines a macro named _res.
#include "httplib.h"

using namespace tatumkit;
using namespace tatumkit::service;
using nlohmann::json;
using tatumkit::testing::TempDir;

namespace fs = std::filesystem;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

const tatumkit::testing::DrumMix& shared_mix() {
  static const auto mix = tatumkit::testing::drum_mix(31, 4.0);
  return mix;
}

PipelineConfig separated_defaults() {
  PipelineConfig c;
  c.onsets = onsets::separated_stream_preset();
  return c;
}

std::string wav_body(const audio::AudioBuffer& a) {
  const auto bytes = audio::encode_wav(a, audio::SampleFormat::Float32);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("json round trip and overlay") {
    PipelineConfig c;
    c.isa.components = 3;
    c.onsets.threshold = 0.4;
    c.stream_onsets[1] = onsets::separated_stream_preset();
    c.tatum.decay = 0.5;
    c.midi.note_number = 60;
    PipelineConfig back;
    apply_json(back, to_json(c));
    CHECK(to_json(back) == to_json(c));

    PipelineConfig partial;
    apply_json(partial, json{{"onsets", {{"R", 5}}}});
    CHECK(partial.onsets.decimation_factor == 5);
    CHECK(partial.onsets.threshold == 0.3);
  }

  TEST_CASE("per-stream overrides inherit the shared onset settings") {
    PipelineConfig c;
    apply_json(c, json::parse(R"({"onsets": {"threshold": 0.5}, "stream_onsets": {"1": {"min_spacing_s": 0.1}}})"));
    CHECK(c.onsets_for(0).threshold == 0.5);
    CHECK(c.onsets_for(1).threshold == 0.5);
    CHECK(c.onsets_for(1).min_spacing_s == 0.1);
    CHECK(c.onsets_for(0).min_spacing_s == 0.05);
  }

  TEST_CASE("presets, unknown keys and wrong types") {
    PipelineConfig c;
    apply_json(c, json{{"onsets", {{"preset", "separated"}, {"threshold", 0.2}}}});
    CHECK(c.onsets.smoothing_window_ms == 50.0);
    CHECK(c.onsets.threshold == 0.2);
    CHECK(code_of([&] { apply_json(c, json{{"bogus", 1}}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { apply_json(c, json{{"onsets", {{"threshold", "high"}}}}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { apply_json(c, json{{"components", -1}}); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { apply_json(c, json{{"stream_onsets", {{"x", json::object()}}}}); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([&] { apply_json(c, json{{"midi", {{"channel", 16}}}}); }) == ErrorCode::InvalidConfig);
  }

  TEST_CASE("config files") {
    TempDir dir;
    render::write_file(dir / "c.json", std::string_view(R"({"components": 3, "tatum": {"frame_s": 0.25}})"));
    const auto c = load_config_file(dir / "c.json");
    CHECK(c.isa.components == 3);
    CHECK(c.tatum.frame_s == 0.25);
    render::write_file(dir / "bad.json", std::string_view("{nope"));
    CHECK(code_of([&] { load_config_file(dir / "bad.json"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([&] { load_config_file(dir / "none.json"); }) == ErrorCode::NotFound);
    render::write_file(dir / "invalid.json", std::string_view(R"({"stft": {"window_length": 1000}})"));
    CHECK(code_of([&] { load_config_file(dir / "invalid.json"); }) == ErrorCode::InvalidConfig);
  }
}

TEST_SUITE("session") {
  TEST_CASE("stage machine") {
    Session s("a", separated_defaults());
    CHECK(s.stage() == Stage::Created);
    CHECK(code_of([&] { s.separate({}); }) == ErrorCode::StageOrder);
    s.load(shared_mix().mixture);
    CHECK(s.stage() == Stage::Loaded);
    CHECK(code_of([&] { s.stream_audio(0); }) == ErrorCode::StageOrder);
    CHECK(code_of([&] { s.detect(0, {}); }) == ErrorCode::StageOrder);
    s.separate(s.config().isa);
    CHECK(s.stage() == Stage::Separated);
    CHECK(s.stream_count() == 2);
    CHECK(code_of([&] { s.stream_onsets(0); }) == ErrorCode::StageOrder);
    CHECK(code_of([&] { s.interpret(0, {}); }) == ErrorCode::StageOrder);
    CHECK(code_of([&] { s.stream_audio(2); }) == ErrorCode::NotFound);

    const std::string before = s.stream_checksum(0);
    const auto rev = s.revision();
    const auto first = s.detect(0, s.config().onsets_for(0));
    CHECK(s.stage() == Stage::OnsetsReady);
    CHECK(s.revision() > rev);
    CHECK(code_of([&] { s.stream_trajectory(0); }) == ErrorCode::StageOrder);
    s.interpret(0, s.config().tatum);
    CHECK(s.stage() == Stage::Interpreted);

    auto higher = s.config().onsets_for(0);
    higher.threshold = 0.9;
    const auto second = s.detect(0, higher);
    CHECK(second.size() <= first.size());
    CHECK(s.stream_checksum(0) == before);
    CHECK(code_of([&] { s.stream_trajectory(0); }) == ErrorCode::StageOrder);
    CHECK(s.config().onsets_for(0).threshold == 0.9);

    s.load(shared_mix().mixture);
    CHECK(s.stage() == Stage::Loaded);
  }

  TEST_CASE("checksum and waveform envelope") {
    const audio::AudioBuffer a(std::vector<double>{0.0, 1.0}, 8000);
    const audio::AudioBuffer b(std::vector<double>{0.0, 1.0 + 1e-15}, 8000);
    CHECK(checksum(a).size() == 16);
    CHECK(checksum(a) == checksum(audio::AudioBuffer(std::vector<double>{0.0, 1.0}, 8000)));
    CHECK(checksum(a) != checksum(b));

    std::vector<double> x(44100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * i);
    const auto env = waveform_envelope(audio::AudioBuffer(x, 44100), 800);
    CHECK(env.size() == 800);
    for (const auto& [mn, mx] : env) CHECK(mn <= mx);
    CHECK(waveform_envelope(audio::AudioBuffer(std::vector<double>(10, 0.0), 100), 800).size() == 10);
    CHECK(code_of([] { waveform_envelope(audio::AudioBuffer(std::vector<double>(10, 0.0), 100), 0); }) ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("persistence writes every available artifact") {
    TempDir dir;
    Session s("p", separated_defaults());
    s.load(shared_mix().mixture);
    s.separate(s.config().isa);
    s.detect(1, s.config().onsets_for(1));
    s.interpret(1, s.config().tatum);
    s.persist(dir.path());
    for (const char* name : {"source.wav", "stream_0.wav", "stream_1.wav", "stream_1.onsets.csv",
                             "stream_1.pulse.csv", "stream_1.mid", "session.json"}) {
      CHECK_MESSAGE(fs::exists(dir / name), name);
    }
    CHECK_FALSE(fs::exists(dir / "stream_0.onsets.csv"));
    const auto meta = json::parse(render::read_file(dir / "session.json"));
    CHECK(meta["stage"] == "interpreted");
  }
}

TEST_SUITE("commands") {
  TEST_CASE("analyze writes the full artifact set") {
    TempDir dir;
    audio::write_wav(shared_mix().mixture, dir / "in.wav", audio::SampleFormat::Float32);
    const auto out = analyze(dir / "in.wav", dir / "out", separated_defaults());
    CHECK(out.files.size() == 9);
    for (int i = 0; i < 2; ++i) {
      const std::string stem = "stream_" + std::to_string(i);
      for (const char* ext : {".wav", ".onsets.csv", ".pulse.csv", ".mid"}) CHECK(fs::exists(dir / "out" / (stem + ext)));
    }
    const auto summary = json::parse(render::read_file(dir / "out" / "analysis.json"));
    CHECK(summary["streams"].size() == 2);
    for (const auto& entry : fs::directory_iterator(dir / "out")) {
      CHECK(entry.path().extension() != ".partial");
    }
  }

  TEST_CASE("stage commands chain and re-run deterministically") {
    TempDir dir;
    audio::write_wav(shared_mix().mixture, dir / "in.wav", audio::SampleFormat::Float32);
    const auto cfg = separated_defaults();
    separate_to_dir(dir / "in.wav", dir / "w", cfg);
    CHECK(discover_streams(dir / "w", ".wav") == std::vector<std::size_t>{0, 1});
    onsets_in_dir(dir / "w", cfg);
    tatum_in_dir(dir / "w", cfg);
    render_in_dir(dir / "w", cfg, RenderFormat::Midi);
    render_in_dir(dir / "w", cfg, RenderFormat::Clicks, 0);
    CHECK(fs::exists(dir / "w" / "stream_0.clicks.wav"));
    const std::string first = render::read_file(dir / "w" / "stream_1.pulse.csv");
    const std::string first_midi = render::read_file(dir / "w" / "stream_1.mid");
    onsets_in_dir(dir / "w", cfg);
    tatum_in_dir(dir / "w", cfg);
    render_in_dir(dir / "w", cfg, RenderFormat::Midi);
    CHECK(render::read_file(dir / "w" / "stream_1.pulse.csv") == first);
    CHECK(render::read_file(dir / "w" / "stream_1.mid") == first_midi);

    auto strict = cfg;
    strict.onsets.threshold = 0.9;
    const auto before = render::parse_onsets_csv(render::read_file(dir / "w" / "stream_0.onsets.csv")).size();
    onsets_in_dir(dir / "w", strict, 0);
    const auto after = render::parse_onsets_csv(render::read_file(dir / "w" / "stream_0.onsets.csv")).size();
    CHECK(after <= before);
  }

  TEST_CASE("missing intermediates and empty onset lists") {
    TempDir dir;
    const PipelineConfig cfg;
    CHECK(code_of([&] { onsets_in_dir(dir.path(), cfg); }) == ErrorCode::MissingIntermediate);
    CHECK(code_of([&] { tatum_in_dir(dir / "nowhere", cfg); }) == ErrorCode::MissingIntermediate);
    render::write_file(dir / "stream_0.onsets.csv", std::string_view("time_s,loudness\n"));
    CHECK(code_of([&] { tatum_in_dir(dir.path(), cfg); }) == ErrorCode::MissingIntermediate);
    CHECK(code_of([&] { tatum_in_dir(dir.path(), cfg, 3, 1.0); }) == ErrorCode::MissingIntermediate);
    tatum_in_dir(dir.path(), cfg, std::nullopt, 2.0);
    const auto traj = render::parse_trajectory_csv(render::read_file(dir / "stream_0.pulse.csv"));
    CHECK(traj.frame_times.size() == 4);
    CHECK(traj.estimate_count() == 0);
    CHECK(code_of([&] { render_in_dir(dir.path(), cfg, RenderFormat::Clicks); }) == ErrorCode::MissingIntermediate);
  }

  TEST_CASE("failures leave no partial outputs") {
    TempDir dir;
    CHECK(code_of([&] { analyze(dir / "missing.wav", dir / "out", PipelineConfig{}); }) == ErrorCode::NotFound);
    CHECK_FALSE(fs::exists(dir / "out"));

    // The second stream's WAV is unreadable, so neither onset CSV may appear.
    audio::write_wav(shared_mix().kick, dir / "stream_0.wav");
    render::write_file(dir / "stream_1.wav", std::string_view("not a wav"));
    CHECK(code_of([&] { onsets_in_dir(dir.path(), PipelineConfig{}); }) == ErrorCode::CorruptHeader);
    CHECK_FALSE(fs::exists(dir / "stream_0.onsets.csv"));
    CHECK_FALSE(fs::exists(dir / "stream_1.onsets.csv"));
  }

  TEST_CASE("single component passes the input through") {
    TempDir dir;
    audio::write_wav(shared_mix().mixture, dir / "in.wav", audio::SampleFormat::Float32);
    PipelineConfig cfg;
    cfg.isa.components = 1;
    separate_to_dir(dir / "in.wav", dir / "o", cfg);
    CHECK(discover_streams(dir / "o", ".wav").size() == 1);
    CHECK(audio::read_wav(dir / "o" / "stream_0.wav").samples() == audio::read_wav(dir / "in.wav").samples());
  }
}

TEST_SUITE("http") {
  struct Server {
    explicit Server(PipelineConfig defaults, std::optional<fs::path> persist = std::nullopt)
        : service(std::move(defaults), std::move(persist)) {
      port = service.bind("127.0.0.1", 0);
      thread = std::thread([this] { service.listen(); });
      service.wait_until_ready();
    }
    ~Server() {
      service.stop();
      thread.join();
    }
    httplib::Client client() const {
      httplib::Client c("127.0.0.1", port);
      c.set_read_timeout(60, 0);
      return c;
    }
    HttpService service;
    int port = 0;
    std::thread thread;
  };

  TEST_CASE("full session over HTTP") {
    TempDir persist;
    Server srv(separated_defaults(), persist.path());
    auto cli = srv.client();

    auto created = cli.Post("/sessions", "", "application/octet-stream");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body)["session_id"];
    CHECK(json::parse(created->body)["stage"] == "created");

    auto early = cli.Post("/sessions/" + id + "/separate", "{}", "application/json");
    REQUIRE(early);
    CHECK(early->status == 409);

    auto up = cli.Put("/sessions/" + id + "/audio", wav_body(shared_mix().mixture), "audio/wav");
    REQUIRE(up);
    CHECK(up->status == 200);
    CHECK(json::parse(up->body)["stage"] == "loaded");

    auto bad_sep = cli.Post("/sessions/" + id + "/separate", R"({"stft": {"window_length": 1000}})", "application/json");
    CHECK(bad_sep->status == 422);
    auto bad_key = cli.Post("/sessions/" + id + "/separate", R"({"threshold": 0.3})", "application/json");
    CHECK(bad_key->status == 422);

    auto sep = cli.Post("/sessions/" + id + "/separate", R"({"components": 2})", "application/json");
    REQUIRE(sep);
    CHECK(sep->status == 200);
    const auto summary = json::parse(sep->body);
    CHECK(summary["streams"].size() == 2);
    const std::string checksum0 = summary["streams"][0]["checksum"];

    auto wf = cli.Get("/sessions/" + id + "/streams/0/waveform?points=500");
    REQUIRE(wf);
    const auto wfj = json::parse(wf->body);
    CHECK(wfj["envelope"].size() == 500);
    CHECK(cli.Get("/sessions/" + id + "/streams/0/waveform?points=-3")->status == 422);

    CHECK(cli.Get("/sessions/" + id + "/streams/0/onsets")->status == 409);
    CHECK(cli.Get("/sessions/" + id + "/streams/0/trajectory")->status == 409);
    CHECK(cli.Get("/sessions/" + id + "/streams/0/export?format=midi")->status == 409);

    auto on = cli.Post("/sessions/" + id + "/streams/0/onsets", R"({"threshold": 0.3, "min_spacing_s": 0.05})",
                       "application/json");
    REQUIRE(on);
    CHECK(on->status == 200);
    const auto first = json::parse(on->body);
    CHECK(first["checksum"] == checksum0);
    const auto first_count = first["onsets"].size();
    CHECK(first_count > 0);

    auto again = cli.Post("/sessions/" + id + "/streams/0/onsets", R"({"threshold": 0.95})", "application/json");
    const auto second = json::parse(again->body);
    CHECK(second["onsets"].size() <= first_count);
    CHECK(second["checksum"] == checksum0);
    CHECK(second["revision"].get<int>() > first["revision"].get<int>());

    CHECK(cli.Post("/sessions/" + id + "/streams/0/onsets", R"({"threshold": -1})", "application/json")->status == 422);
    CHECK(cli.Post("/sessions/" + id + "/streams/0/onsets", "{nope", "application/json")->status == 422);
    CHECK(cli.Post("/sessions/" + id + "/streams/9/onsets", "{}", "application/json")->status == 404);

    auto ta = cli.Post("/sessions/" + id + "/streams/0/tatum", R"({"config": {"frame_s": 0.5}})", "application/json");
    REQUIRE(ta);
    CHECK(ta->status == 200);
    CHECK(json::parse(ta->body)["frames"].size() == 8);
    auto tr = cli.Get("/sessions/" + id + "/streams/0/trajectory");
    CHECK(tr->status == 200);

    auto midi = cli.Get("/sessions/" + id + "/streams/0/export?format=midi");
    REQUIRE(midi);
    CHECK(midi->status == 200);
    CHECK(midi->get_header_value("Content-Type") == "audio/midi");
    CHECK(midi->body.substr(0, 4) == "MThd");
    auto wav = cli.Get("/sessions/" + id + "/streams/0/export?format=wav");
    CHECK(audio::decode_wav(std::span(reinterpret_cast<const std::uint8_t*>(wav->body.data()), wav->body.size()))
              .frames() == shared_mix().mixture.frames());
    auto csv = cli.Get("/sessions/" + id + "/streams/0/export?format=csv&what=trajectory");
    CHECK(csv->body.rfind("frame_end_s,pulse_s\n", 0) == 0);
    CHECK(cli.Get("/sessions/" + id + "/streams/0/export?format=csv")->body.rfind("time_s,loudness\n", 0) == 0);
    CHECK(cli.Get("/sessions/" + id + "/streams/0/export?format=clicks")->status == 200);
    CHECK(cli.Get("/sessions/" + id + "/streams/0/export?format=ogg")->status == 422);

    auto state = json::parse(cli.Get("/sessions/" + id)->body);
    CHECK(state["stage"] == "interpreted");
    CHECK(fs::exists(persist / id / "stream_0.pulse.csv"));
    CHECK(fs::exists(persist / id / "session.json"));
  }

  TEST_CASE("unknown sessions, bad uploads and concurrent sessions") {
    Server srv(separated_defaults());
    auto cli = srv.client();
    CHECK(cli.Get("/sessions/nope")->status == 404);
    CHECK(cli.Post("/sessions/nope/separate", "{}", "application/json")->status == 404);
    CHECK(cli.Get("/nothing/here")->status == 404);
    CHECK(cli.Post("/sessions", "RIFFjunk", "audio/wav")->status == 422);

    const std::string body = wav_body(shared_mix().mixture);
    std::vector<std::thread> workers;
    std::vector<int> status(3, 0);
    for (int w = 0; w < 3; ++w) {
      workers.emplace_back([&, w] {
        auto c = srv.client();
        auto r = c.Post("/sessions", body, "audio/wav");
        const std::string id = json::parse(r->body)["session_id"];
        status[w] = c.Post("/sessions/" + id + "/separate", "{}", "application/json")->status;
      });
    }
    for (auto& t : workers) t.join();
    CHECK(status == std::vector<int>{200, 200, 200});
    CHECK(srv.service.store().size() == 3);
  }
}
