// Copyright 2026 The tatumkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "tatumkit/service/http_service.hpp"

#include <cstdio>
#include <functional>
#include <set>

#include "httplib.h"

#include "tatumkit/render.hpp"

namespace tatumkit::service {

using nlohmann::json;

SessionStore::SessionStore(PipelineConfig defaults, std::optional<std::filesystem::path> persist_dir)
    : defaults_(std::move(defaults)), persist_dir_(std::move(persist_dir)), rng_(std::random_device{}()) {
  defaults_.validate();
}

std::shared_ptr<Session> SessionStore::create() {
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_()));
    id = buf;
  } while (sessions_.count(id) != 0);
  auto session = std::make_shared<Session>(id, defaults_);
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "unknown session '" + id + "'");
  return it->second;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

void SessionStore::persist(const Session& session) const {
  if (persist_dir_) session.persist(*persist_dir_ / session.id());
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::StageOrder: return 409;
    case ErrorCode::IoError: return 500;
    default: return 422;
  }
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, {{"error", code}, {"message", message}}, status);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("request body is not valid JSON: ") + e.what());
  }
}

std::size_t stream_index(const httplib::Request& req) {
  try {
    return std::stoul(req.matches[2].str());
  } catch (const std::exception&) {
    throw Error(ErrorCode::NotFound, "stream '" + req.matches[2].str() + "' does not exist");
  }
}

audio::AudioBuffer decode_upload(const std::string& body) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(body.data());
  return audio::decode_wav(std::span<const std::uint8_t>(bytes, body.size()));
}

json onsets_json(std::size_t i, const Session& session, const onsets::OnsetList& list) {
  json events = json::array();
  for (std::size_t k = 0; k < list.size(); ++k) {
    events.push_back({{"time_s", list.times[k]}, {"loudness", list.loudness[k]}});
  }
  return {{"stream", i},
          {"revision", session.revision()},
          {"checksum", session.stream_checksum(i)},
          {"config", to_json(list.config_used)},
          {"onsets", events}};
}

json trajectory_json(std::size_t i, const Session& session, const tatum::PulseTrajectory& traj) {
  json frames = json::array();
  for (std::size_t k = 0; k < traj.frame_times.size(); ++k) {
    frames.push_back({{"frame_end_s", traj.frame_times[k]},
                      {"pulse_s", traj.pulse_s[k] ? json(*traj.pulse_s[k]) : json(nullptr)}});
  }
  return {{"stream", i},
          {"revision", session.revision()},
          {"estimate_count", traj.estimate_count()},
          {"frames", frames}};
}

}  // namespace

struct HttpService::Impl {
  httplib::Server server;
};

HttpService::HttpService(PipelineConfig defaults, std::optional<std::filesystem::path> persist_dir)
    : store_(std::move(defaults), std::move(persist_dir)), impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  SessionStore& store = store_;

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    send_error(res, res.status, res.status == 404 ? "NotFound" : "HttpError", httplib::status_message(res.status));
  });

  srv.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
    std::optional<audio::AudioBuffer> audio;
    if (!req.body.empty()) audio = decode_upload(req.body);
    auto session = store.create();
    if (audio) session->load(std::move(*audio));
    store.persist(*session);
    send_json(res, session->summary(), 201);
  });

  srv.Put(R"(/sessions/([^/]+)/audio)", [&store](const httplib::Request& req, httplib::Response& res) {
    auto session = store.find(req.matches[1].str());
    session->load(decode_upload(req.body));
    store.persist(*session);
    send_json(res, session->summary());
  });

  srv.Get(R"(/sessions/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, store.find(req.matches[1].str())->summary());
  });

  srv.Post(R"(/sessions/([^/]+)/separate)", [&store](const httplib::Request& req, httplib::Response& res) {
    auto session = store.find(req.matches[1].str());
    const json body = parse_body(req);
    if (!body.is_object()) throw Error(ErrorCode::InvalidConfig, "separate body must be a JSON object");
    static const std::set<std::string> allowed = {"components", "retained", "basis", "stft"};
    for (const auto& [key, value] : body.items()) {
      if (allowed.count(key) == 0) throw Error(ErrorCode::InvalidConfig, "unknown separate key '" + key + "'");
    }
    PipelineConfig config = session->config();
    apply_json(config, body);
    config.validate();
    session->separate(config.isa);
    store.persist(*session);
    send_json(res, session->summary());
  });

  srv.Get(R"(/sessions/([^/]+)/streams/(\d+)/waveform)", [&store](const httplib::Request& req,
                                                                   httplib::Response& res) {
    auto session = store.find(req.matches[1].str());
    const std::size_t i = stream_index(req);
    std::size_t points = 800;
    if (req.has_param("points")) {
      const std::string raw = req.get_param_value("points");
      try {
        std::size_t used = 0;
        const long long v = std::stoll(raw, &used);
        if (used != raw.size() || v <= 0) throw std::invalid_argument(raw);
        points = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "points must be a positive integer");
      }
    }
    const auto audio = session->stream_audio(i);
    json pairs = json::array();
    for (const auto& [mn, mx] : waveform_envelope(audio, points)) pairs.push_back({mn, mx});
    send_json(res, {{"stream", i},
                    {"checksum", session->stream_checksum(i)},
                    {"sample_rate", audio.sample_rate()},
                    {"frames", audio.frames()},
                    {"points", pairs.size()},
                    {"envelope", pairs}});
  });

  srv.Post(R"(/sessions/([^/]+)/streams/(\d+)/onsets)", [&store](const httplib::Request& req,
                                                                 httplib::Response& res) {
    auto session = store.find(req.matches[1].str());
    const std::size_t i = stream_index(req);
    const json body = parse_body(req);
    onsets::OnsetConfig config = session->config().onsets_for(i);
    apply_json(config, body);
    const auto list = session->detect(i, config);
    store.persist(*session);
    send_json(res, onsets_json(i, *session, list));
  });

  srv.Get(R"(/sessions/([^/]+)/streams/(\d+)/onsets)", [&store](const httplib::Request& req,
                                                                httplib::Response& res) {
    auto session = store.find(req.matches[1].str());
    const std::size_t i = stream_index(req);
    send_json(res, onsets_json(i, *session, session->stream_onsets(i)));
  });

  srv.Post(R"(/sessions/([^/]+)/streams/(\d+)/tatum)", [&store](const httplib::Request& req,
                                                                httplib::Response& res) {
    auto session = store.find(req.matches[1].str());
    const std::size_t i = stream_index(req);
    json body = parse_body(req);
    if (body.is_object() && body.contains("config")) {
      if (body.size() != 1) throw Error(ErrorCode::InvalidConfig, "tatum body with 'config' takes no other keys");
      body = body["config"];
    }
    tatum::TatumConfig config = session->config().tatum;
    apply_json(config, body);
    const auto traj = session->interpret(i, config);
    store.persist(*session);
    send_json(res, trajectory_json(i, *session, traj));
  });

  srv.Get(R"(/sessions/([^/]+)/streams/(\d+)/trajectory)", [&store](const httplib::Request& req,
                                                                    httplib::Response& res) {
    auto session = store.find(req.matches[1].str());
    const std::size_t i = stream_index(req);
    send_json(res, trajectory_json(i, *session, session->stream_trajectory(i)));
  });

  srv.Get(R"(/sessions/([^/]+)/streams/(\d+)/export)", [&store](const httplib::Request& req,
                                                                httplib::Response& res) {
    auto session = store.find(req.matches[1].str());
    const std::size_t i = stream_index(req);
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "";
    const std::string stem = "stream_" + std::to_string(i);
    std::string body;
    std::string type;
    std::string filename;
    if (format == "midi") {
      const auto bytes = render::to_midi(session->stream_onsets(i), session->config().midi);
      body.assign(bytes.begin(), bytes.end());
      type = "audio/midi";
      filename = stem + ".mid";
    } else if (format == "wav") {
      const auto bytes = audio::encode_wav(session->stream_audio(i), audio::SampleFormat::Float32);
      body.assign(bytes.begin(), bytes.end());
      type = "audio/wav";
      filename = stem + ".wav";
    } else if (format == "clicks") {
      const auto audio = session->stream_audio(i);
      const auto clicks = render::render_clicks(session->stream_onsets(i), render::make_click(audio.sample_rate()),
                                                audio.duration_s(), audio.sample_rate());
      const auto bytes = audio::encode_wav(clicks, audio::SampleFormat::Float32);
      body.assign(bytes.begin(), bytes.end());
      type = "audio/wav";
      filename = stem + ".clicks.wav";
    } else if (format == "csv") {
      const std::string what = req.has_param("what") ? req.get_param_value("what") : "onsets";
      if (what == "onsets") {
        body = render::onsets_csv(session->stream_onsets(i));
        filename = stem + ".onsets.csv";
      } else if (what == "trajectory") {
        body = render::trajectory_csv(session->stream_trajectory(i));
        filename = stem + ".pulse.csv";
      } else {
        throw Error(ErrorCode::InvalidArgument, "what must be onsets or trajectory");
      }
      type = "text/csv";
    } else {
      throw Error(ErrorCode::InvalidArgument, "format must be midi, wav, clicks or csv");
    }
    res.set_header("Content-Disposition", "attachment; filename=\"" + filename + "\"");
    res.set_content(body, type);
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int bound = srv.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind to " + host);
    return bound;
  }
  if (!srv.bind_to_port(host, port)) {
    throw Error(ErrorCode::IoError, "cannot bind to " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_) impl_->server.stop();
}

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace tatumkit::service
