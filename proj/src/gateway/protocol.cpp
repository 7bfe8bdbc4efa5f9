#include "crashnav/gateway/protocol.hpp"

#include <json.hpp>

#include <cstring>

namespace crashnav::gateway {

using nlohmann::json;

std::string to_string(SessionMode m) {
  switch (m) {
    case SessionMode::HumanTrial: return "HumanTrial";
    case SessionMode::Practice: return "Practice";
    case SessionMode::Spectate: return "Spectate";
  }
  return "?";
}

SessionMode session_mode_from_string(const std::string& s) {
  if (s == "HumanTrial") return SessionMode::HumanTrial;
  if (s == "Practice") return SessionMode::Practice;
  if (s == "Spectate") return SessionMode::Spectate;
  throw ProtocolError("unknown session mode '" + s + "'");
}

namespace {

constexpr const char* kActions[] = {"start", "reset", "end", "step"};

std::string frame(const json& header, const std::vector<std::uint8_t>* payload = nullptr) {
  const std::string h = header.dump();
  const auto n = static_cast<std::uint32_t>(h.size());
  std::string out;
  out.reserve(4 + h.size() + (payload ? payload->size() : 0));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((n >> (8 * i)) & 0xFF));
  out += h;
  if (payload) out.append(reinterpret_cast<const char*>(payload->data()), payload->size());
  return out;
}

struct Encoder {
  std::string operator()(const ServerHello& m) const {
    return frame({{"type", "ServerHello"},
                  {"session_id", m.session_id},
                  {"format_version", m.format_version},
                  {"width", m.width},
                  {"height", m.height},
                  {"tick_rate", m.tick_rate},
                  {"frame_encoding", m.frame_encoding},
                  {"pacing", m.pacing},
                  {"plans", m.plans}});
  }
  std::string operator()(const FrameMsg& m) const {
    if (m.pixels.size() != static_cast<std::size_t>(m.width) * m.height)
      throw ProtocolError("FrameMsg: payload size does not match width*height");
    json h{{"type", "FrameMsg"},
           {"session_id", m.session_id},
           {"tick", m.tick},
           {"width", m.width},
           {"height", m.height},
           {"hud", {{"speed", m.hud.speed}, {"elapsed", m.hud.elapsed}, {"distance", m.hud.distance}}}};
    if (m.probs) h["probs"] = *m.probs;
    if (m.mode) h["mode"] = *m.mode;
    return frame(h, &m.pixels);
  }
  std::string operator()(const CommandMsg& m) const {
    return frame({{"type", "CommandMsg"},
                  {"session_id", m.session_id},
                  {"linear_axis", m.linear_axis},
                  {"angular_axis", m.angular_axis},
                  {"client_timestamp", m.client_timestamp}});
  }
  std::string operator()(const ControlMsg& m) const {
    json h{{"type", "ControlMsg"},
           {"session_id", m.session_id},
           {"action", kActions[static_cast<int>(m.action)]},
           {"plan", m.plan},
           {"mode", to_string(m.mode)}};
    if (m.seed) h["seed"] = *m.seed;
    return frame(h);
  }
  std::string operator()(const TrialEnded& m) const {
    return frame({{"type", "TrialEnded"},
                  {"session_id", m.session_id},
                  {"environment", m.environment},
                  {"method", m.method},
                  {"practice", m.practice},
                  {"distance", m.distance},
                  {"time", m.time},
                  {"termination", m.termination},
                  {"ticks", m.ticks}});
  }
  std::string operator()(const ErrorMsg& m) const {
    return frame({{"type", "Error"}, {"session_id", m.session_id}, {"message", m.message}});
  }
};

std::pair<json, std::size_t> split(const std::string& bytes, bool text) {
  try {
    if (text) return {json::parse(bytes), bytes.size()};
    if (bytes.size() < 4) throw ProtocolError("message shorter than its length prefix");
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[i])) << (8 * i);
    if (bytes.size() < 4 + static_cast<std::size_t>(n)) throw ProtocolError("truncated header");
    return {json::parse(bytes.substr(4, n)), 4 + static_cast<std::size_t>(n)};
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("header is not JSON: ") + e.what());
  }
}

}  // namespace

std::string encode(const Message& msg) { return std::visit(Encoder{}, msg); }

std::string header_json(const std::string& bytes) { return split(bytes, false).first.dump(); }

Message decode(const std::string& bytes, bool text) {
  auto [h, offset] = split(bytes, text);
  try {
    const std::string type = h.at("type").get<std::string>();
    const auto sid = h.at("session_id").get<std::uint64_t>();
    if (type == "ServerHello") {
      ServerHello m;
      m.session_id = sid;
      m.format_version = h.at("format_version").get<std::uint32_t>();
      m.width = h.at("width").get<int>();
      m.height = h.at("height").get<int>();
      m.tick_rate = h.at("tick_rate").get<double>();
      m.frame_encoding = h.value("frame_encoding", std::string("gray8"));
      m.pacing = h.value("pacing", std::string("realtime"));
      m.plans = h.value("plans", std::vector<std::string>{});
      return m;
    }
    if (type == "FrameMsg") {
      FrameMsg m;
      m.session_id = sid;
      m.tick = h.at("tick").get<std::int64_t>();
      m.width = h.at("width").get<int>();
      m.height = h.at("height").get<int>();
      if (m.width <= 0 || m.height <= 0) throw ProtocolError("FrameMsg: bad dimensions");
      const std::size_t n = static_cast<std::size_t>(m.width) * m.height;
      if (bytes.size() - offset != n) throw ProtocolError("FrameMsg: payload size does not match width*height");
      m.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
      if (h.contains("probs")) m.probs = h["probs"].get<std::vector<double>>();
      if (h.contains("mode")) m.mode = h["mode"].get<std::string>();
      const json& hud = h.at("hud");
      m.hud = {hud.at("speed").get<double>(), hud.at("elapsed").get<double>(), hud.at("distance").get<double>()};
      return m;
    }
    if (type == "CommandMsg") {
      return CommandMsg{sid, h.at("linear_axis").get<double>(), h.at("angular_axis").get<double>(),
                        h.value("client_timestamp", 0.0)};
    }
    if (type == "ControlMsg") {
      ControlMsg m;
      m.session_id = sid;
      const std::string action = h.at("action").get<std::string>();
      bool found = false;
      for (int i = 0; i < 4; ++i)
        if (action == kActions[i]) {
          m.action = static_cast<ControlMsg::Action>(i);
          found = true;
        }
      if (!found) throw ProtocolError("ControlMsg: unknown action '" + action + "'");
      m.plan = h.value("plan", std::string());
      m.mode = session_mode_from_string(h.value("mode", std::string("HumanTrial")));
      if (h.contains("seed")) m.seed = h["seed"].get<std::uint64_t>();
      return m;
    }
    if (type == "TrialEnded") {
      return TrialEnded{sid,
                        h.at("environment").get<std::string>(),
                        h.at("method").get<std::string>(),
                        h.at("practice").get<bool>(),
                        h.at("distance").get<double>(),
                        h.at("time").get<double>(),
                        h.at("termination").get<std::string>(),
                        h.at("ticks").get<int>()};
    }
    if (type == "Error") return ErrorMsg{sid, h.at("message").get<std::string>()};
    throw ProtocolError("unknown message type '" + type + "'");
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed header: ") + e.what());
  }
}

std::uint64_t session_id_of(const Message& msg) {
  return std::visit([](const auto& m) { return m.session_id; }, msg);
}

}  // namespace crashnav::gateway
