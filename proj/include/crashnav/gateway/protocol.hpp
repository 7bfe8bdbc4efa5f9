#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace crashnav::gateway {

inline constexpr std::uint32_t kProtocolVersion = 1;

/// Wire format, one WebSocket binary message per SessionMessage:
///
///   u32 LE header_length | header_length bytes of UTF-8 JSON | payload
///
/// The JSON header always has "type" and "session_id". Only FrameMsg has a
/// payload: width*height bytes of 8-bit grayscale, row-major, top row
/// first. Clients may also send a text message holding just the JSON
/// header. Field-by-field documentation lives in docs/protocol.md.
enum class SessionMode : std::uint8_t { HumanTrial = 0, Practice = 1, Spectate = 2 };
std::string to_string(SessionMode m);
SessionMode session_mode_from_string(const std::string& s);

struct ServerHello {
  std::uint64_t session_id = 0;
  std::uint32_t format_version = kProtocolVersion;
  int width = 0;
  int height = 0;
  double tick_rate = 10.0;
  std::string frame_encoding = "gray8";
  std::string pacing = "realtime";  // or "lockstep"
  std::vector<std::string> plans;

  friend bool operator==(const ServerHello&, const ServerHello&) = default;
};

struct Hud {
  double speed = 0.0;     // m/s
  double elapsed = 0.0;   // s since trial start
  double distance = 0.0;  // m flown this trial

  friend bool operator==(const Hud&, const Hud&) = default;
};

struct FrameMsg {
  std::uint64_t session_id = 0;
  std::int64_t tick = 0;  // strictly increasing per session
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  /// Spectate only: P(L), P(S), P(R) and the policy mode.
  std::optional<std::vector<double>> probs;
  std::optional<std::string> mode;
  Hud hud;

  friend bool operator==(const FrameMsg&, const FrameMsg&) = default;
};

struct CommandMsg {
  std::uint64_t session_id = 0;
  double linear_axis = 0.0;   // [0, 1]
  double angular_axis = 0.0;  // [-1, 1], positive turns left
  double client_timestamp = 0.0;

  friend bool operator==(const CommandMsg&, const CommandMsg&) = default;
};

struct ControlMsg {
  enum class Action : std::uint8_t { Start = 0, Reset = 1, End = 2, Step = 3 };
  std::uint64_t session_id = 0;
  Action action = Action::Start;
  std::string plan;                                // Start: plan name (empty = session default)
  SessionMode mode = SessionMode::HumanTrial;      // Start
  std::optional<std::uint64_t> seed;               // Start: start-pose seed

  friend bool operator==(const ControlMsg&, const ControlMsg&) = default;
};

struct TrialEnded {
  std::uint64_t session_id = 0;
  std::string environment;
  std::string method;  // "Human" or the spectated policy
  bool practice = false;
  double distance = 0.0;
  double time = 0.0;
  std::string termination;
  int ticks = 0;

  friend bool operator==(const TrialEnded&, const TrialEnded&) = default;
};

struct ErrorMsg {
  std::uint64_t session_id = 0;
  std::string message;

  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Message = std::variant<ServerHello, FrameMsg, CommandMsg, ControlMsg, TrialEnded, ErrorMsg>;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode(const Message& msg);
/// Decodes a binary message, or a bare JSON header when `text` is set.
Message decode(const std::string& bytes, bool text = false);
/// The JSON header of an encoded message, for inspection.
std::string header_json(const std::string& bytes);

std::uint64_t session_id_of(const Message& msg);

}  // namespace crashnav::gateway
