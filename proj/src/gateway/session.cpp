#include "crashnav/gateway/session.hpp"

#include "crashnav/bench/table.hpp"

namespace crashnav::gateway {

Session::Session(std::uint64_t id, SessionConfig cfg, PlanProvider plans, std::vector<std::string> plan_names)
    : id_(id), cfg_(std::move(cfg)), plans_(std::move(plans)), plan_names_(std::move(plan_names)) {
  if (!(cfg_.tick_rate > 0.0)) throw std::invalid_argument("Session: tick_rate must be positive");
  plan_name_ = cfg_.default_plan;
}

ServerHello Session::hello() const {
  ServerHello h;
  h.session_id = id_;
  h.width = cfg_.camera.width;
  h.height = cfg_.camera.height;
  h.tick_rate = cfg_.tick_rate;
  h.pacing = cfg_.pacing == Pacing::Lockstep ? "lockstep" : "realtime";
  h.plans = plan_names_;
  return h;
}

void Session::ensure_idle_view() {
  if (idle_frame_) return;
  const world::FloorPlan& plan = plans_(plan_name_);
  idle_frame_ = world::render(plan, bench::sample_start(plan, cfg_.default_seed), cfg_.camera);
}

FrameMsg Session::frame_msg(const world::Frame& f, const Hud& hud) {
  FrameMsg m;
  m.session_id = id_;
  m.tick = frame_counter_++;
  m.width = f.width;
  m.height = f.height;
  m.pixels = f.pixels;
  m.hud = hud;
  return m;
}

std::vector<Message> Session::advance() {
  if (!runner_) {
    ensure_idle_view();
    return {frame_msg(*idle_frame_, {})};
  }
  std::vector<Message> out;
  if (const policy::Telemetry* t = runner_->step()) {
    const auto& sim = runner_->sim();
    FrameMsg m = frame_msg(sim.frame(), {std::abs(sim.state().linear_velocity), sim.elapsed(), runner_->distance()});
    if (mode_ == SessionMode::Spectate && t->probs) {
      m.probs = std::vector<double>{t->probs->left, t->probs->straight, t->probs->right};
      if (t->mode) m.mode = policy::to_string(*t->mode);
    }
    out.push_back(std::move(m));
  }
  if (runner_->done())
    for (auto& msg : finish()) out.push_back(std::move(msg));
  return out;
}

std::vector<Message> Session::finish() {
  const bench::TrialResult r = runner_->result();
  TrialEnded e;
  e.session_id = id_;
  e.environment = plan_name_;
  e.method = mode_ == SessionMode::Spectate ? bench::to_string(bench::PolicyKind::Learned) : "Human";
  e.practice = mode_ == SessionMode::Practice;
  e.distance = r.distance_before_collision;
  e.time = r.time_before_collision;
  e.termination = bench::to_string(r.termination);
  e.ticks = r.ticks;
  if (mode_ == SessionMode::HumanTrial && !cfg_.results_stem.empty())
    bench::record_human_trial(cfg_.results_stem, plan_name_, bench::summarize(r, runner_seed_));
  finished_.push_back(r);
  runner_.reset();
  channel_.reset();
  return {e};
}

std::vector<Message> Session::handle(const Message& in) {
  if (closed_) return {ErrorMsg{id_, "session closed"}};
  if (const auto* cmd = std::get_if<CommandMsg>(&in)) {
    // Commands steer only operator trials; the lobby and Spectate ignore them.
    if (!runner_ || mode_ == SessionMode::Spectate) return {};
    channel_->push(baselines::ExternalCommand(cmd->linear_axis, cmd->angular_axis, cmd->client_timestamp));
    if (cfg_.pacing == Pacing::Lockstep) return advance();
    return {};
  }
  const auto* ctl = std::get_if<ControlMsg>(&in);
  if (!ctl) return {ErrorMsg{id_, "unexpected message type from client"}};
  switch (ctl->action) {
    case ControlMsg::Action::Start: {
      if (runner_) return {ErrorMsg{id_, "a trial is already running"}};
      const std::string plan = ctl->plan.empty() ? cfg_.default_plan : ctl->plan;
      const world::FloorPlan* fp = nullptr;
      try {
        fp = &plans_(plan);
      } catch (const std::exception& e) {
        return {ErrorMsg{id_, std::string("unknown plan: ") + e.what()}};
      }
      if (ctl->mode == SessionMode::Spectate && !cfg_.params)
        return {ErrorMsg{id_, "spectating needs a checkpoint on the server"}};
      plan_name_ = plan;
      idle_frame_.reset();
      mode_ = ctl->mode;
      runner_seed_ = ctl->seed.value_or(cfg_.default_seed);
      channel_ = std::make_unique<baselines::CommandChannel>();
      bench::TrialSpec spec{plan, mode_ == SessionMode::Spectate ? bench::PolicyKind::Learned : bench::PolicyKind::External,
                            std::nullopt, runner_seed_, cfg_.max_time, cfg_.small_loop};
      bench::TrialArtifacts a;
      a.plan = fp;
      a.params = cfg_.params;
      a.channel = channel_.get();
      a.policy = cfg_.policy;
      a.noise = cfg_.noise;
      a.camera = cfg_.camera;
      try {
        runner_ = std::make_unique<bench::TrialRunner>(spec, a);
      } catch (const std::exception& e) {
        channel_.reset();
        return {ErrorMsg{id_, e.what()}};
      }
      return {frame_msg(runner_->sim().frame(), {})};
    }
    case ControlMsg::Action::Reset:
      // Drops the running trial without recording it.
      runner_.reset();
      channel_.reset();
      return advance();
    case ControlMsg::Action::End: {
      std::vector<Message> out;
      if (runner_) {
        if (channel_) channel_->disconnect();
        runner_->abort(bench::Termination::Disconnect);
        out = finish();
      }
      closed_ = true;
      return out;
    }
    case ControlMsg::Action::Step:
      if (cfg_.pacing != Pacing::Lockstep) return {ErrorMsg{id_, "step is only valid with lockstep pacing"}};
      return advance();
  }
  return {};
}

std::vector<Message> Session::tick() {
  if (closed_) return {};
  return advance();
}

std::vector<Message> Session::disconnect() {
  if (!runner_ || mode_ == SessionMode::Spectate) return {};
  channel_->disconnect();
  runner_->abort(bench::Termination::Disconnect);
  return finish();
}

}  // namespace crashnav::gateway
