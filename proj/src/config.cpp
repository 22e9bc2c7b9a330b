#include "clc/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string>

namespace clc {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw UsageError(path + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw UsageError("unknown key " + path + "." + item.key());
  }
}

double get_num(const json& j, const std::string& path, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) throw UsageError(path + "." + key + " must be a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number_integer()) {
    throw UsageError(path + "." + key + " must be an integer");
  }
  return j[key].get<int>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_boolean()) throw UsageError(path + "." + key + " must be a boolean");
  return j[key].get<bool>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_string()) throw UsageError(path + "." + key + " must be a string");
  return j[key].get<std::string>();
}

std::pair<double, double> get_range(const json& j, const std::string& path,
                                    const char* key, double lo, double hi) {
  if (!j.contains(key)) return {lo, hi};
  const json& r = j[key];
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
    throw UsageError(path + "." + key + " must be a [low, high] number pair");
  }
  return {r[0].get<double>(), r[1].get<double>()};
}

void parse_geometry(const json& j, LaneGeometry& g) {
  reject_unknown(j, "environment.geometry", {"road_length", "lane_width", "lane_count"});
  g.road_length = get_num(j, "environment.geometry", "road_length", g.road_length);
  g.lane_width = get_num(j, "environment.geometry", "lane_width", g.lane_width);
  g.lane_count = get_int(j, "environment.geometry", "lane_count", g.lane_count);
}

void parse_initial(const json& j, InitialConditions& c) {
  reject_unknown(j, "environment.initial",
                 {"ego_x", "ego_y", "spacing", "flow_speed", "vehicle_length",
                  "current_lane", "target_lane"});
  c.ego_x = get_num(j, "environment.initial", "ego_x", c.ego_x);
  c.ego_y = get_num(j, "environment.initial", "ego_y", c.ego_y);
  c.spacing = get_num(j, "environment.initial", "spacing", c.spacing);
  c.flow_speed = get_num(j, "environment.initial", "flow_speed", c.flow_speed);
  c.vehicle_length = get_num(j, "environment.initial", "vehicle_length", c.vehicle_length);
  c.current_lane = get_int(j, "environment.initial", "current_lane", c.current_lane);
  c.target_lane = get_int(j, "environment.initial", "target_lane", c.target_lane);
}

void parse_noise(const json& j, ResetNoise& n) {
  reject_unknown(j, "environment.noise", {"enabled", "x_range", "y_range", "v_range"});
  n.enabled = get_bool(j, "environment.noise", "enabled", n.enabled);
  std::tie(n.x_lo, n.x_hi) = get_range(j, "environment.noise", "x_range", n.x_lo, n.x_hi);
  std::tie(n.y_lo, n.y_hi) = get_range(j, "environment.noise", "y_range", n.y_lo, n.y_hi);
  std::tie(n.v_lo, n.v_hi) = get_range(j, "environment.noise", "v_range", n.v_lo, n.v_hi);
}

void parse_idm(const json& j, IdmParams& p) {
  reject_unknown(j, "environment.idm",
                 {"max_accel", "desired_speed", "min_gap", "accel_exponent", "time_gap",
                  "comfort_decel", "max_brake"});
  p.max_accel = get_num(j, "environment.idm", "max_accel", p.max_accel);
  p.desired_speed = get_num(j, "environment.idm", "desired_speed", p.desired_speed);
  p.min_gap = get_num(j, "environment.idm", "min_gap", p.min_gap);
  p.accel_exponent = get_num(j, "environment.idm", "accel_exponent", p.accel_exponent);
  p.time_gap = get_num(j, "environment.idm", "time_gap", p.time_gap);
  p.comfort_decel = get_num(j, "environment.idm", "comfort_decel", p.comfort_decel);
  p.max_brake = get_num(j, "environment.idm", "max_brake", p.max_brake);
}

void parse_rewards(const json& j, RewardCoefficients& r) {
  reject_unknown(j, "environment.rewards",
                 {"alpha", "beta", "crash_penalty", "warning_penalty", "min_distance",
                  "safety_margin", "jerk_coeff", "yaw_coeff", "fuel_coeff", "fuel_ln_cap",
                  "lateral_slope", "lateral_quad", "lateral_bonus", "lateral_vertex"});
  r.alpha = get_num(j, "environment.rewards", "alpha", r.alpha);
  r.beta = get_num(j, "environment.rewards", "beta", r.beta);
  r.crash_penalty = get_num(j, "environment.rewards", "crash_penalty", r.crash_penalty);
  r.warning_penalty = get_num(j, "environment.rewards", "warning_penalty", r.warning_penalty);
  r.min_distance = get_num(j, "environment.rewards", "min_distance", r.min_distance);
  r.safety_margin = get_num(j, "environment.rewards", "safety_margin", r.safety_margin);
  r.jerk_coeff = get_num(j, "environment.rewards", "jerk_coeff", r.jerk_coeff);
  r.yaw_coeff = get_num(j, "environment.rewards", "yaw_coeff", r.yaw_coeff);
  r.fuel_coeff = get_num(j, "environment.rewards", "fuel_coeff", r.fuel_coeff);
  r.fuel_ln_cap = get_num(j, "environment.rewards", "fuel_ln_cap", r.fuel_ln_cap);
  r.lateral_slope = get_num(j, "environment.rewards", "lateral_slope", r.lateral_slope);
  r.lateral_quad = get_num(j, "environment.rewards", "lateral_quad", r.lateral_quad);
  r.lateral_bonus = get_num(j, "environment.rewards", "lateral_bonus", r.lateral_bonus);
  r.lateral_vertex = get_num(j, "environment.rewards", "lateral_vertex", r.lateral_vertex);
}

void parse_fuel(const json& j, FuelModelCoeffs& f) {
  if (!j.is_array() || j.size() != 4) {
    throw UsageError("environment.fuel_table must be a 4x4 number matrix");
  }
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_array() || j[i].size() != 4) {
      throw UsageError("environment.fuel_table must be a 4x4 number matrix");
    }
    for (int c = 0; c < 4; ++c) {
      if (!j[i][c].is_number()) {
        throw UsageError("environment.fuel_table must be a 4x4 number matrix");
      }
      f.k[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = j[i][c].get<double>();
    }
  }
}

void parse_episode(const json& j, EpisodeConfig& e) {
  reject_unknown(j, "environment.episode",
                 {"max_steps", "success_lateral_tol", "success_hold_steps", "dt"});
  e.max_steps = get_int(j, "environment.episode", "max_steps", e.max_steps);
  e.success_lateral_tol =
      get_num(j, "environment.episode", "success_lateral_tol", e.success_lateral_tol);
  e.success_hold_steps =
      get_int(j, "environment.episode", "success_hold_steps", e.success_hold_steps);
  e.dt = get_num(j, "environment.episode", "dt", e.dt);
}

void parse_environment(const json& j, EnvConfig& env) {
  reject_unknown(j, "environment",
                 {"geometry", "initial", "noise", "idm", "rewards", "fuel_table",
                  "long_accel_range", "lat_accel_range", "p_adopt", "composition",
                  "episode"});
  if (j.contains("geometry")) parse_geometry(j["geometry"], env.geometry);
  if (j.contains("initial")) parse_initial(j["initial"], env.initial);
  if (j.contains("noise")) parse_noise(j["noise"], env.noise);
  if (j.contains("idm")) parse_idm(j["idm"], env.idm);
  if (j.contains("rewards")) parse_rewards(j["rewards"], env.rewards);
  if (j.contains("fuel_table")) parse_fuel(j["fuel_table"], env.fuel);
  std::tie(env.long_accel_min, env.long_accel_max) =
      get_range(j, "environment", "long_accel_range", env.long_accel_min,
                env.long_accel_max);
  std::tie(env.lat_accel_min, env.lat_accel_max) =
      get_range(j, "environment", "lat_accel_range", env.lat_accel_min,
                env.lat_accel_max);
  env.p_adopt = get_num(j, "environment", "p_adopt", env.p_adopt);
  if (env.p_adopt < 0.0 || env.p_adopt > 1.0) {
    throw UsageError("environment.p_adopt must be in [0, 1]");
  }
  const std::string comp = get_str(
      j, "environment", "composition",
      env.fixed_composition ? composition_name(env.composition) : "mixed");
  if (comp == "mixed") {
    env.fixed_composition = false;
  } else {
    const auto parsed = composition_from_name(comp);
    if (!parsed) {
      throw UsageError(
          "environment.composition must be cav_cav, hv_cav, cav_hv, hv_hv, or mixed");
    }
    env.fixed_composition = true;
    env.composition = *parsed;
  }
  if (j.contains("episode")) parse_episode(j["episode"], env.episode);
}

void parse_algorithm(const json& j, std::string& algo, AlgoHyperparams& hp) {
  reject_unknown(
      j, "algorithm",
      {"name", "gamma", "lr", "batch_size", "replay_capacity", "warmup",
       "updates_per_step", "expl_noise", "smooth_noise", "smooth_clip", "tau",
       "policy_delay", "init_alpha", "auto_alpha", "target_entropy_scale", "clip_ratio",
       "gae_lambda", "ppo_epochs", "rollout_horizon", "minibatch", "hidden_width",
       "hidden_depth", "log_std_min", "log_std_max", "actor_final_scale"});
  algo = get_str(j, "algorithm", "name", algo);
  if (algo != "ddpg" && algo != "td3" && algo != "sac" && algo != "ppo") {
    throw UsageError("algorithm.name must be one of ddpg, td3, sac, ppo");
  }
  hp.gamma = get_num(j, "algorithm", "gamma", hp.gamma);
  hp.lr = get_num(j, "algorithm", "lr", hp.lr);
  hp.batch_size = get_int(j, "algorithm", "batch_size", hp.batch_size);
  hp.replay_capacity = static_cast<std::size_t>(
      get_int(j, "algorithm", "replay_capacity", static_cast<int>(hp.replay_capacity)));
  hp.warmup = static_cast<std::size_t>(
      get_int(j, "algorithm", "warmup", static_cast<int>(hp.warmup)));
  hp.updates_per_step = get_int(j, "algorithm", "updates_per_step", hp.updates_per_step);
  hp.expl_noise = get_num(j, "algorithm", "expl_noise", hp.expl_noise);
  hp.smooth_noise = get_num(j, "algorithm", "smooth_noise", hp.smooth_noise);
  hp.smooth_clip = get_num(j, "algorithm", "smooth_clip", hp.smooth_clip);
  hp.tau = get_num(j, "algorithm", "tau", hp.tau);
  hp.policy_delay = get_int(j, "algorithm", "policy_delay", hp.policy_delay);
  hp.init_alpha = get_num(j, "algorithm", "init_alpha", hp.init_alpha);
  hp.auto_alpha = get_bool(j, "algorithm", "auto_alpha", hp.auto_alpha);
  hp.target_entropy_scale =
      get_num(j, "algorithm", "target_entropy_scale", hp.target_entropy_scale);
  hp.clip_ratio = get_num(j, "algorithm", "clip_ratio", hp.clip_ratio);
  hp.gae_lambda = get_num(j, "algorithm", "gae_lambda", hp.gae_lambda);
  hp.ppo_epochs = get_int(j, "algorithm", "ppo_epochs", hp.ppo_epochs);
  hp.rollout_horizon = get_int(j, "algorithm", "rollout_horizon", hp.rollout_horizon);
  hp.minibatch = get_int(j, "algorithm", "minibatch", hp.minibatch);
  hp.hidden_width = get_int(j, "algorithm", "hidden_width", hp.hidden_width);
  hp.hidden_depth = get_int(j, "algorithm", "hidden_depth", hp.hidden_depth);
  hp.log_std_min = get_num(j, "algorithm", "log_std_min", hp.log_std_min);
  hp.log_std_max = get_num(j, "algorithm", "log_std_max", hp.log_std_max);
  hp.actor_final_scale = get_num(j, "algorithm", "actor_final_scale", hp.actor_final_scale);
  try {
    hp.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("algorithm: ") + e.what());
  }
}

void parse_schedule(const json& j, ScheduleConfig& s) {
  reject_unknown(j, "schedule",
                 {"episodes", "checkpoint_every", "eval_every", "record_trajectories",
                  "trajectory_every"});
  s.episodes = get_int(j, "schedule", "episodes", s.episodes);
  s.checkpoint_every = get_int(j, "schedule", "checkpoint_every", s.checkpoint_every);
  s.eval_every = get_int(j, "schedule", "eval_every", s.eval_every);
  s.record_trajectories =
      get_bool(j, "schedule", "record_trajectories", s.record_trajectories);
  s.trajectory_every = get_int(j, "schedule", "trajectory_every", s.trajectory_every);
  if (s.episodes < 1) throw UsageError("schedule.episodes must be at least 1");
  if (s.checkpoint_every < 0) throw UsageError("schedule.checkpoint_every must be >= 0");
  if (s.eval_every < 0) throw UsageError("schedule.eval_every must be >= 0");
  if (s.trajectory_every < 1) throw UsageError("schedule.trajectory_every must be >= 1");
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  reject_unknown(j, "config", {"seed", "environment", "algorithm", "schedule"});
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      throw UsageError("config.seed must be a non-negative integer");
    }
    if (j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() < 0) {
      throw UsageError("config.seed must be a non-negative integer");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("environment")) parse_environment(j["environment"], cfg.env);
  if (j.contains("algorithm")) parse_algorithm(j["algorithm"], cfg.algo, cfg.hp);
  if (j.contains("schedule")) parse_schedule(j["schedule"], cfg.schedule);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw UsageError("config parse error in " + path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& cfg) {
  json fuel = json::array();
  for (const auto& row : cfg.env.fuel.k) {
    fuel.push_back(json{row[0], row[1], row[2], row[3]});
  }
  return json{
      {"seed", cfg.seed},
      {"environment",
       {{"geometry",
         {{"road_length", cfg.env.geometry.road_length},
          {"lane_width", cfg.env.geometry.lane_width},
          {"lane_count", cfg.env.geometry.lane_count}}},
        {"initial",
         {{"ego_x", cfg.env.initial.ego_x},
          {"ego_y", cfg.env.initial.ego_y},
          {"spacing", cfg.env.initial.spacing},
          {"flow_speed", cfg.env.initial.flow_speed},
          {"vehicle_length", cfg.env.initial.vehicle_length},
          {"current_lane", cfg.env.initial.current_lane},
          {"target_lane", cfg.env.initial.target_lane}}},
        {"noise",
         {{"enabled", cfg.env.noise.enabled},
          {"x_range", {cfg.env.noise.x_lo, cfg.env.noise.x_hi}},
          {"y_range", {cfg.env.noise.y_lo, cfg.env.noise.y_hi}},
          {"v_range", {cfg.env.noise.v_lo, cfg.env.noise.v_hi}}}},
        {"idm",
         {{"max_accel", cfg.env.idm.max_accel},
          {"desired_speed", cfg.env.idm.desired_speed},
          {"min_gap", cfg.env.idm.min_gap},
          {"accel_exponent", cfg.env.idm.accel_exponent},
          {"time_gap", cfg.env.idm.time_gap},
          {"comfort_decel", cfg.env.idm.comfort_decel},
          {"max_brake", cfg.env.idm.max_brake}}},
        {"rewards",
         {{"alpha", cfg.env.rewards.alpha},
          {"beta", cfg.env.rewards.beta},
          {"crash_penalty", cfg.env.rewards.crash_penalty},
          {"warning_penalty", cfg.env.rewards.warning_penalty},
          {"min_distance", cfg.env.rewards.min_distance},
          {"safety_margin", cfg.env.rewards.safety_margin},
          {"jerk_coeff", cfg.env.rewards.jerk_coeff},
          {"yaw_coeff", cfg.env.rewards.yaw_coeff},
          {"fuel_coeff", cfg.env.rewards.fuel_coeff},
          {"fuel_ln_cap", cfg.env.rewards.fuel_ln_cap},
          {"lateral_slope", cfg.env.rewards.lateral_slope},
          {"lateral_quad", cfg.env.rewards.lateral_quad},
          {"lateral_bonus", cfg.env.rewards.lateral_bonus},
          {"lateral_vertex", cfg.env.rewards.lateral_vertex}}},
        {"fuel_table", fuel},
        {"long_accel_range", {cfg.env.long_accel_min, cfg.env.long_accel_max}},
        {"lat_accel_range", {cfg.env.lat_accel_min, cfg.env.lat_accel_max}},
        {"p_adopt", cfg.env.p_adopt},
        {"composition", cfg.env.fixed_composition
                            ? composition_name(cfg.env.composition)
                            : "mixed"},
        {"episode",
         {{"max_steps", cfg.env.episode.max_steps},
          {"success_lateral_tol", cfg.env.episode.success_lateral_tol},
          {"success_hold_steps", cfg.env.episode.success_hold_steps},
          {"dt", cfg.env.episode.dt}}}}},
      {"algorithm",
       {{"name", cfg.algo},
        {"gamma", cfg.hp.gamma},
        {"lr", cfg.hp.lr},
        {"batch_size", cfg.hp.batch_size},
        {"replay_capacity", cfg.hp.replay_capacity},
        {"warmup", cfg.hp.warmup},
        {"updates_per_step", cfg.hp.updates_per_step},
        {"expl_noise", cfg.hp.expl_noise},
        {"smooth_noise", cfg.hp.smooth_noise},
        {"smooth_clip", cfg.hp.smooth_clip},
        {"tau", cfg.hp.tau},
        {"policy_delay", cfg.hp.policy_delay},
        {"init_alpha", cfg.hp.init_alpha},
        {"auto_alpha", cfg.hp.auto_alpha},
        {"target_entropy_scale", cfg.hp.target_entropy_scale},
        {"clip_ratio", cfg.hp.clip_ratio},
        {"gae_lambda", cfg.hp.gae_lambda},
        {"ppo_epochs", cfg.hp.ppo_epochs},
        {"rollout_horizon", cfg.hp.rollout_horizon},
        {"minibatch", cfg.hp.minibatch},
        {"hidden_width", cfg.hp.hidden_width},
        {"hidden_depth", cfg.hp.hidden_depth},
        {"log_std_min", cfg.hp.log_std_min},
        {"log_std_max", cfg.hp.log_std_max},
        {"actor_final_scale", cfg.hp.actor_final_scale}}},
      {"schedule",
       {{"episodes", cfg.schedule.episodes},
        {"checkpoint_every", cfg.schedule.checkpoint_every},
        {"eval_every", cfg.schedule.eval_every},
        {"record_trajectories", cfg.schedule.record_trajectories},
        {"trajectory_every", cfg.schedule.trajectory_every}}}};
}

}  // namespace clc
