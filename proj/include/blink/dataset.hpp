#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blink/episode.hpp"
#include "blink/rng.hpp"

namespace blink {

// Fixed-length training slice with labels re-zeroed at the window start.
struct WindowSample {
  const Episode* ep = nullptr;
  int t0 = 0;
  int length = 0;
  std::vector<std::int32_t> rel_label;  // y_t - y_{t0}, length entries
};

WindowSample make_window(const Episode& ep, int t0, int L);

// Deterministic grid of non-overlapping-start windows. Episodes shorter
// than L yield no windows (callers log and move on).
std::vector<WindowSample> make_windows(const Episode& ep, int L, int stride);

// One uniformly random start per call.
WindowSample sample_window(const Episode& ep, int L, Rng& rng);

std::vector<Episode> filter_tracks(std::vector<Episode> episodes,
                                   int min_len = 60);

// ---- greedy nearest-neighbor tracking ----

using Point2 = std::array<double, 2>;

struct Track {
  int start_frame = 0;
  std::vector<int> detection_index;  // one per covered frame
  std::vector<Point2> points;
  int length() const { return static_cast<int>(points.size()); }
};

// Candidate (track, detection) pairs are matched globally in ascending
// distance order; ties break by track id then detection index. Matches
// beyond max_dist are rejected: the track ends and the detection seeds a
// new track.
std::vector<Track> greedy_track(
    const std::vector<std::vector<Point2>>& centroids_per_frame,
    double max_dist);

// First-crossing labeling of a marker stream: targets[i][t] is target i's
// viability signal at frame t; a target counts as apoptotic from the first
// frame its signal exceeds `threshold`. Returns the cumulative count series.
std::vector<std::int32_t> threshold_cumulative_labels(
    const std::vector<std::vector<double>>& targets, double threshold);

// ---- manifest ----

struct DatasetManifest {
  std::map<std::string, std::vector<std::string>> splits;
  std::string config_json;  // SimConfig echo, verbatim
  std::uint64_t seed = 0;
  int format_version = kEpisodeFormatVersion;

  void save(const std::string& path) const;
  static DatasetManifest load(const std::string& path);
};

std::vector<Episode> load_split(const DatasetManifest& m,
                                const std::string& split,
                                const std::string& dir);

// CSV summary: id, T, total_kills.
void write_episode_summary_csv(const std::vector<Episode>& eps,
                               const std::string& path);

}  // namespace blink
