#include "blink/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace blink::sim {

using nlohmann::json;
namespace fs = std::filesystem;

const char* mode_name(int m) {
  switch (static_cast<Mode>(m)) {
    case Mode::HighCytotoxic: return "HighCytotoxic";
    case Mode::Motile: return "Motile";
    case Mode::LowCytotoxic: return "LowCytotoxic";
    case Mode::Quiescent: return "Quiescent";
  }
  return "?";
}

void SimConfig::validate() const {
  if (arena_size <= 0) throw ConfigError("arena_size must be positive");
  if (obs_size < 16) throw ConfigError("obs_size must be >= 16");
  if (n_tumor < 0) throw ConfigError("n_tumor must be nonnegative");
  if (kill_hazard_contact < 0.0 || kill_hazard_contact > 1.0)
    throw ConfigError("kill_hazard_contact must lie in [0,1]");
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (mode_transition[i][j] < 0.0)
        throw ConfigError("mode_transition has a negative entry");
      s += mode_transition[i][j];
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw ConfigError("mode_transition row " + std::to_string(i) +
                        " does not sum to 1");
  }
  for (double v : mode_speeds)
    if (v < 0.0) throw ConfigError("mode_speeds must be nonnegative");
  for (double v : mode_attraction)
    if (v < 0.0 || v > 1.0)
      throw ConfigError("mode_attraction must lie in [0,1]");
  if (episode_len_min < 60)
    throw ConfigError("episode_len_min must be >= 60");
  if (episode_len_max < episode_len_min)
    throw ConfigError("episode_len_max must be >= episode_len_min");
  if (contact_radius <= 0) throw ConfigError("contact_radius must be positive");
  if (apoptosis_ramp < 1) throw ConfigError("apoptosis_ramp must be >= 1");
  if (clearance_frames < 2 * apoptosis_ramp)
    throw ConfigError("clearance_frames must cover the marker ramp");
  if (mode_dwell < 1) throw ConfigError("mode_dwell must be >= 1");
}

std::string SimConfig::to_json() const {
  json j;
  j["arena_size"] = arena_size;
  j["obs_size"] = obs_size;
  j["n_tumor"] = n_tumor;
  j["kill_hazard_contact"] = kill_hazard_contact;
  j["mode_transition"] = mode_transition;
  j["mode_speeds"] = mode_speeds;
  j["mode_lethality"] = mode_lethality;
  j["mode_attraction"] = mode_attraction;
  j["episode_len_min"] = episode_len_min;
  j["episode_len_max"] = episode_len_max;
  j["seed"] = seed;
  j["contact_radius"] = contact_radius;
  j["blob_sigma"] = blob_sigma;
  j["apoptosis_ramp"] = apoptosis_ramp;
  j["clearance_frames"] = clearance_frames;
  j["mode_dwell"] = mode_dwell;
  j["speed_noise"] = speed_noise;
  j["heading_noise"] = heading_noise;
  return j.dump();
}

SimConfig SimConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  SimConfig c;
  c.arena_size = j.value("arena_size", c.arena_size);
  c.obs_size = j.value("obs_size", c.obs_size);
  c.n_tumor = j.value("n_tumor", c.n_tumor);
  c.kill_hazard_contact = j.value("kill_hazard_contact", c.kill_hazard_contact);
  if (j.contains("mode_transition"))
    c.mode_transition = j["mode_transition"]
                            .get<std::array<std::array<double, 4>, 4>>();
  if (j.contains("mode_speeds"))
    c.mode_speeds = j["mode_speeds"].get<std::array<double, 4>>();
  if (j.contains("mode_lethality"))
    c.mode_lethality = j["mode_lethality"].get<std::array<double, 4>>();
  if (j.contains("mode_attraction"))
    c.mode_attraction = j["mode_attraction"].get<std::array<double, 4>>();
  c.episode_len_min = j.value("episode_len_min", c.episode_len_min);
  c.episode_len_max = j.value("episode_len_max", c.episode_len_max);
  c.seed = j.value("seed", c.seed);
  c.contact_radius = j.value("contact_radius", c.contact_radius);
  c.blob_sigma = j.value("blob_sigma", c.blob_sigma);
  c.apoptosis_ramp = j.value("apoptosis_ramp", c.apoptosis_ramp);
  c.clearance_frames = j.value("clearance_frames", c.clearance_frames);
  c.mode_dwell = j.value("mode_dwell", c.mode_dwell);
  c.speed_noise = j.value("speed_noise", c.speed_noise);
  c.heading_noise = j.value("heading_noise", c.heading_noise);
  return c;
}

std::array<double, 4> stationary_distribution(
    const std::array<std::array<double, 4>, 4>& m) {
  std::array<double, 4> p = {0.25, 0.25, 0.25, 0.25};
  for (int it = 0; it < 2000; ++it) {
    std::array<double, 4> q = {0, 0, 0, 0};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) q[j] += p[i] * m[i][j];
    double s = q[0] + q[1] + q[2] + q[3];
    for (double& v : q) v /= s;
    p = q;
  }
  return p;
}

WorldState init_world(const SimConfig& config, Rng& rng) {
  config.validate();
  WorldState s;
  s.nk_x = config.arena_size / 2.0;
  s.nk_y = config.arena_size / 2.0;
  s.heading = rng.uniform(0.0, 2.0 * M_PI);
  s.tumors.reserve(config.n_tumor);
  for (int i = 0; i < config.n_tumor; ++i) {
    TumorState t;
    // Rejection-sample outside the contact ball so frame 0 has no kill
    // opportunity baked in.
    for (int tries = 0; tries < 1000; ++tries) {
      t.x = rng.uniform(0.0, config.arena_size);
      t.y = rng.uniform(0.0, config.arena_size);
      if (std::hypot(t.x - s.nk_x, t.y - s.nk_y) > config.contact_radius)
        break;
    }
    s.tumors.push_back(t);
  }
  auto pi = stationary_distribution(config.mode_transition);
  s.behavior_mode = static_cast<int>(rng.categorical(pi));
  return s;
}

WorldState init_world(const SimConfig& config, std::uint64_t seed) {
  Rng rng(seed, Rng::hash("init_world"));
  return init_world(config, rng);
}

std::vector<float> render_observation(const WorldState& state,
                                      const SimConfig& config) {
  int S = config.obs_size;
  std::vector<float> img(3 * static_cast<std::size_t>(S) * S, 0.0f);
  double half = (S - 1) / 2.0;
  double inv2s2 = 1.0 / (2.0 * config.blob_sigma * config.blob_sigma);
  auto splat = [&](int channel, double wx, double wy, double amp) {
    if (amp <= 0.0) return;
    if (wx < 0.0 || wx > config.arena_size || wy < 0.0 ||
        wy > config.arena_size)
      return;  // outside the arena: nothing to draw
    double cx = wx - state.nk_x + half;
    double cy = wy - state.nk_y + half;
    int x0 = std::max(0, static_cast<int>(std::floor(cx - 4 * config.blob_sigma)));
    int x1 = std::min(S - 1, static_cast<int>(std::ceil(cx + 4 * config.blob_sigma)));
    int y0 = std::max(0, static_cast<int>(std::floor(cy - 4 * config.blob_sigma)));
    int y1 = std::min(S - 1, static_cast<int>(std::ceil(cy + 4 * config.blob_sigma)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        std::size_t idx =
            (static_cast<std::size_t>(channel) * S + y) * S + x;
        double v = img[idx] + amp * std::exp(-d2 * inv2s2);
        img[idx] = static_cast<float>(std::min(1.0, v));
      }
  };
  // The NK cell renders with motion blur: a streak of sub-blobs along the
  // last displacement, as under finite exposure with a bright label that
  // saturates the detector. This makes instantaneous speed (and thus the
  // behavioral mode) visible in a single frame.
  const int kStreak = 9;
  for (int i = 0; i < kStreak; ++i) {
    double f = (kStreak == 1) ? 0.0
                              : (static_cast<double>(i) / (kStreak - 1) - 0.5);
    splat(0, state.nk_x + f * state.last_dx, state.nk_y + f * state.last_dy,
          0.5);
  }
  for (const TumorState& t : state.tumors) {
    if (t.alive) splat(1, t.x, t.y, 1.0);
    if (t.apoptotic_marker > 0.0) splat(2, t.x, t.y, t.apoptotic_marker);
  }
  return img;
}

Frame step_world(WorldState& state, const SimConfig& config, Rng& rng) {
  int next_t = state.t + 1;
  if (next_t % config.mode_dwell == 0) {
    state.behavior_mode = static_cast<int>(
        rng.categorical(config.mode_transition[state.behavior_mode]));
  }
  // Chemotaxis: steer toward the nearest living target, weighted by mode.
  double attraction = config.mode_attraction[state.behavior_mode];
  if (attraction > 0.0) {
    const TumorState* nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const TumorState& t : state.tumors) {
      if (!t.alive) continue;
      double d = std::hypot(t.x - state.nk_x, t.y - state.nk_y);
      if (d < best) {
        best = d;
        nearest = &t;
      }
    }
    if (nearest) {
      double target =
          std::atan2(nearest->y - state.nk_y, nearest->x - state.nk_x);
      double delta = std::remainder(target - state.heading, 2.0 * M_PI);
      state.heading += attraction * delta;
    }
  }
  state.heading += rng.gaussian(0.0, config.heading_noise);
  double speed =
      std::abs(rng.gaussian(config.mode_speeds[state.behavior_mode],
                            0.15 * config.mode_speeds[state.behavior_mode]));
  double dx = speed * std::cos(state.heading) +
              rng.gaussian(0.0, config.speed_noise);
  double dy = speed * std::sin(state.heading) +
              rng.gaussian(0.0, config.speed_noise);
  // Reflective walls: clamping pins fast cells against the boundary (their
  // heading keeps pointing outward), which collapses realized speeds.
  double nx = state.nk_x + dx;
  double ny = state.nk_y + dy;
  bool flip_x = false, flip_y = false;
  if (nx < 0.0) {
    nx = -nx;
    flip_x = true;
  } else if (nx > config.arena_size) {
    nx = 2.0 * config.arena_size - nx;
    flip_x = true;
  }
  if (ny < 0.0) {
    ny = -ny;
    flip_y = true;
  } else if (ny > config.arena_size) {
    ny = 2.0 * config.arena_size - ny;
    flip_y = true;
  }
  if (flip_x) state.heading = M_PI - state.heading;
  if (flip_y) state.heading = -state.heading;
  nx = std::clamp(nx, 0.0, config.arena_size);
  ny = std::clamp(ny, 0.0, config.arena_size);
  dx = nx - state.nk_x;
  dy = ny - state.nk_y;
  state.nk_x = nx;
  state.nk_y = ny;
  state.last_dx = dx;
  state.last_dy = dy;

  double hazard = config.kill_hazard_contact *
                  config.mode_lethality[state.behavior_mode];
  for (TumorState& t : state.tumors) {
    if (t.alive) {
      double d = std::hypot(t.x - state.nk_x, t.y - state.nk_y);
      if (d <= config.contact_radius && rng.bernoulli(hazard)) {
        t.alive = false;
        t.death_frame = next_t;
        ++state.cumulative_kills;
      }
    }
    if (!t.alive) {
      int age = next_t - t.death_frame + 1;
      double up = static_cast<double>(age) / config.apoptosis_ramp;
      double down = static_cast<double>(config.clearance_frames - age) /
                    config.apoptosis_ramp;
      t.apoptotic_marker = std::clamp(std::min(up, down), 0.0, 1.0);
    }
  }
  state.t = next_t;

  Frame f;
  f.obs = render_observation(state, config);
  f.dx = static_cast<float>(dx);
  f.dy = static_cast<float>(dy);
  f.cum_kills = state.cumulative_kills;
  return f;
}

SimEpisode generate_episode(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed, Rng::hash("episode"));
  int span = config.episode_len_max - config.episode_len_min;
  int T = config.episode_len_min +
          (span > 0 ? static_cast<int>(rng.uniform_int(span + 1)) : 0);
  WorldState state = init_world(config, rng);

  SimEpisode out;
  out.episode.channels = 3;
  out.episode.height = config.obs_size;
  out.episode.width = config.obs_size;
  Frame first;
  first.obs = render_observation(state, config);
  first.dx = 0.0f;
  first.dy = 0.0f;
  first.cum_kills = 0;
  out.episode.frames.push_back(std::move(first));
  out.modes.push_back(state.behavior_mode);
  for (int t = 1; t < T; ++t) {
    out.episode.frames.push_back(step_world(state, config, rng));
    out.modes.push_back(state.behavior_mode);
  }
  return out;
}

DatasetManifest generate_dataset(const SimConfig& config, int n_train,
                                 int n_val, int n_test, std::uint64_t seed,
                                 const std::string& out_dir) {
  if (n_train <= 0 || n_val <= 0 || n_test <= 0)
    throw ConfigError("split sizes must be positive");
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory: " + out_dir);

  DatasetManifest m;
  m.seed = seed;
  m.config_json = config.to_json();
  std::ofstream modes_csv(out_dir + "/ground_truth_modes.csv");
  if (!modes_csv)
    throw std::runtime_error("unwritable output directory: " + out_dir);
  modes_csv << "episode_id,frame,mode\r\n";
  std::vector<Episode> all;
  int total = n_train + n_val + n_test;
  Rng root(seed, Rng::hash("dataset"));
  for (int i = 0; i < total; ++i) {
    std::uint64_t ep_seed = root.fork(static_cast<std::uint64_t>(i)).next_u64();
    SimEpisode se = generate_episode(config, ep_seed);
    char buf[16];
    std::snprintf(buf, sizeof buf, "ep%06d", i);
    se.episode.id = buf;
    std::string file = se.episode.id + std::string(".bin");
    save_episode(se.episode, out_dir + "/" + file);
    for (std::size_t t = 0; t < se.modes.size(); ++t)
      modes_csv << se.episode.id << "," << t << "," << se.modes[t] << "\r\n";
    const char* split =
        i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    m.splits[split].push_back(file);
    all.push_back(std::move(se.episode));
  }
  m.save(out_dir + "/manifest.json");
  write_episode_summary_csv(all, out_dir + "/summary.csv");
  return m;
}

}  // namespace blink::sim
