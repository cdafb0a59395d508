#pragma once

#include <array>
#include <string>
#include <vector>

#include "blink/dataset.hpp"
#include "blink/episode.hpp"
#include "blink/rng.hpp"

namespace blink::sim {

enum class Mode : int { HighCytotoxic = 0, Motile = 1, LowCytotoxic = 2, Quiescent = 3 };
inline constexpr int kNumModes = 4;
const char* mode_name(int m);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  double arena_size = 96.0;       // square side, pixels
  int obs_size = 32;              // rendered crop side
  int n_tumor = 4;
  double kill_hazard_contact = 0.08;  // per-frame, scaled by mode lethality
  std::array<std::array<double, 4>, 4> mode_transition = {{
      {0.80, 0.12, 0.05, 0.03},
      {0.06, 0.80, 0.10, 0.04},
      {0.03, 0.05, 0.82, 0.10},
      {0.04, 0.04, 0.12, 0.80},
  }};
  // Four mutually distinct speeds so each mode has a recoverable
  // behavioral signature; outcome ordering comes from the lethality scale.
  std::array<double, 4> mode_speeds = {4.8, 7.2, 2.2, 0.8};
  std::array<double, 4> mode_lethality = {1.0, 0.45, 0.2, 0.1};
  // Heading bias toward the nearest living target, in [0,1]. Uniform across
  // modes: mode-dependent hunting would confound the speed signature.
  std::array<double, 4> mode_attraction = {0.4, 0.4, 0.4, 0.4};
  int episode_len_min = 60;
  int episode_len_max = 120;
  std::uint64_t seed = 0;

  // Not in the reference protocol; chosen so kills are visually confirmable
  // in rendered frames.
  double contact_radius = 7.0;
  double blob_sigma = 1.6;
  int apoptosis_ramp = 5;        // frames for the marker to go 0 -> 1
  int clearance_frames = 40;     // corpse cleared (marker back to 0) by then
  int mode_dwell = 30;           // frames between behavioral-mode resampling
  double speed_noise = 0.6;      // isotropic displacement noise, per axis
  double heading_noise = 0.35;   // radians/frame random walk on heading

  void validate() const;  // throws ConfigError naming the violated field
  std::string to_json() const;
  static SimConfig from_json(const std::string& text);
};

struct TumorState {
  double x = 0.0, y = 0.0;
  bool alive = true;
  double apoptotic_marker = 0.0;  // in [0,1]
  int death_frame = -1;
};

struct WorldState {
  double nk_x = 0.0, nk_y = 0.0;
  double last_dx = 0.0, last_dy = 0.0;  // realized displacement into frame t
  double heading = 0.0;
  std::vector<TumorState> tumors;
  int behavior_mode = 0;
  std::int32_t cumulative_kills = 0;
  int t = 0;
};

// Stationary distribution of a row-stochastic 4x4 matrix.
std::array<double, 4> stationary_distribution(
    const std::array<std::array<double, 4>, 4>& m);

WorldState init_world(const SimConfig& config, std::uint64_t seed);
WorldState init_world(const SimConfig& config, Rng& rng);

// Advances one frame and emits the observation/action/label triple.
Frame step_world(WorldState& state, const SimConfig& config, Rng& rng);

std::vector<float> render_observation(const WorldState& state,
                                      const SimConfig& config);

struct SimEpisode {
  Episode episode;
  std::vector<int> modes;  // ground-truth behavior mode per frame
};

SimEpisode generate_episode(const SimConfig& config, std::uint64_t seed);

// Writes episodes, manifest.json, summary.csv and ground_truth_modes.csv
// under `out_dir`, splitting ids disjointly across train/val/test.
DatasetManifest generate_dataset(const SimConfig& config, int n_train,
                                 int n_val, int n_test, std::uint64_t seed,
                                 const std::string& out_dir);

}  // namespace blink::sim
