#include "blink/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace blink {

using nlohmann::json;

WindowSample make_window(const Episode& ep, int t0, int L) {
  if (t0 < 0 || L < 1 || t0 + L > ep.length())
    throw std::runtime_error("window out of range for episode " + ep.id);
  WindowSample w;
  w.ep = &ep;
  w.t0 = t0;
  w.length = L;
  w.rel_label.resize(L);
  std::int32_t base = ep.frames[t0].cum_kills;
  for (int i = 0; i < L; ++i)
    w.rel_label[i] = ep.frames[t0 + i].cum_kills - base;
  return w;
}

std::vector<WindowSample> make_windows(const Episode& ep, int L, int stride) {
  std::vector<WindowSample> out;
  if (L > ep.length()) return out;
  for (int t0 = 0; t0 + L <= ep.length(); t0 += stride)
    out.push_back(make_window(ep, t0, L));
  return out;
}

WindowSample sample_window(const Episode& ep, int L, Rng& rng) {
  int span = ep.length() - L;
  int t0 = span <= 0 ? 0 : static_cast<int>(rng.uniform_int(span + 1));
  return make_window(ep, t0, L);
}

std::vector<Episode> filter_tracks(std::vector<Episode> episodes,
                                   int min_len) {
  std::vector<Episode> out;
  out.reserve(episodes.size());
  for (Episode& ep : episodes)
    if (ep.length() >= min_len) out.push_back(std::move(ep));
  return out;
}

std::vector<Track> greedy_track(
    const std::vector<std::vector<Point2>>& centroids_per_frame,
    double max_dist) {
  std::vector<Track> tracks;
  std::vector<int> active;  // track indices alive at the previous frame
  for (std::size_t f = 0; f < centroids_per_frame.size(); ++f) {
    const auto& dets = centroids_per_frame[f];
    std::vector<int> next_active;
    std::vector<bool> det_taken(dets.size(), false);
    if (!active.empty() && !dets.empty()) {
      struct Cand {
        double dist;
        int track;  // index into `active`
        int det;
      };
      std::vector<Cand> cands;
      for (std::size_t a = 0; a < active.size(); ++a) {
        const Point2& last = tracks[active[a]].points.back();
        for (std::size_t d = 0; d < dets.size(); ++d) {
          double dx = dets[d][0] - last[0], dy = dets[d][1] - last[1];
          double dist = std::hypot(dx, dy);
          if (dist <= max_dist)
            cands.push_back({dist, static_cast<int>(a), static_cast<int>(d)});
        }
      }
      std::sort(cands.begin(), cands.end(), [&](const Cand& x, const Cand& y) {
        if (x.dist != y.dist) return x.dist < y.dist;
        if (active[x.track] != active[y.track])
          return active[x.track] < active[y.track];
        return x.det < y.det;
      });
      std::vector<bool> track_taken(active.size(), false);
      for (const Cand& c : cands) {
        if (track_taken[c.track] || det_taken[c.det]) continue;
        track_taken[c.track] = true;
        det_taken[c.det] = true;
        Track& tr = tracks[active[c.track]];
        tr.detection_index.push_back(c.det);
        tr.points.push_back(dets[c.det]);
        next_active.push_back(active[c.track]);
      }
    }
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (det_taken[d]) continue;
      Track tr;
      tr.start_frame = static_cast<int>(f);
      tr.detection_index.push_back(static_cast<int>(d));
      tr.points.push_back(dets[d]);
      tracks.push_back(std::move(tr));
      next_active.push_back(static_cast<int>(tracks.size()) - 1);
    }
    std::sort(next_active.begin(), next_active.end());
    active = std::move(next_active);
  }
  return tracks;
}

std::vector<std::int32_t> threshold_cumulative_labels(
    const std::vector<std::vector<double>>& targets, double threshold) {
  std::size_t T = 0;
  for (const auto& s : targets) T = std::max(T, s.size());
  std::vector<std::int32_t> cum(T, 0);
  for (const auto& s : targets) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (s[t] > threshold) {
        for (std::size_t u = t; u < T; ++u) ++cum[u];
        break;
      }
    }
  }
  return cum;
}

void DatasetManifest::save(const std::string& path) const {
  json j;
  j["format_version"] = format_version;
  j["seed"] = seed;
  j["config"] =
      config_json.empty() ? json::object() : json::parse(config_json);
  json s = json::object();
  for (const auto& [name, files] : splits) s[name] = files;
  j["splits"] = s;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << j.dump(2) << "\n";
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j = json::parse(in);
  DatasetManifest m;
  m.format_version = j.value("format_version", kEpisodeFormatVersion);
  m.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("config")) m.config_json = j["config"].dump();
  for (auto& [name, files] : j.at("splits").items())
    m.splits[name] = files.get<std::vector<std::string>>();
  return m;
}

std::vector<Episode> load_split(const DatasetManifest& m,
                                const std::string& split,
                                const std::string& dir) {
  auto it = m.splits.find(split);
  if (it == m.splits.end())
    throw std::runtime_error("manifest has no split named '" + split + "'");
  std::vector<Episode> eps;
  eps.reserve(it->second.size());
  for (const std::string& file : it->second)
    eps.push_back(load_episode(dir + "/" + file));
  return eps;
}

void write_episode_summary_csv(const std::vector<Episode>& eps,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "id,T,total_kills\r\n";
  for (const Episode& ep : eps) {
    std::int32_t kills = ep.frames.empty() ? 0 : ep.frames.back().cum_kills;
    out << ep.id << "," << ep.length() << "," << kills << "\r\n";
  }
}

}  // namespace blink
