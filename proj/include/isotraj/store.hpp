#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "isotraj/errors.hpp"
#include "isotraj/ingest.hpp"
#include "isotraj/util.hpp"

namespace isotraj {

struct CellKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  auto operator<=>(const CellKey&) const = default;
};

/// One heading-histogram bin: how many cell crossings left the cell in this
/// direction band, plus the mean exit direction as a vector sum.
struct HeadingBin {
  std::uint64_t count = 0;
  double sum_sin = 0.0;
  double sum_cos = 0.0;
};

struct CellStats {
  std::uint64_t visits = 0;  // cell crossings, equals the sum of bin counts
  int first_day = 0;
  int last_day = 0;
  std::vector<HeadingBin> bins;
};

/// Spatial-hash history of previous drives. Each cell records one observation
/// per crossing: the heading the trajectory had when it left the cell. The
/// store also remembers every ingested (trajectory hash, day) pair so that
/// duplicate submissions are rejected outright.
class PathStore {
public:
  explicit PathStore(double cell_m = 5.0, int heading_bins = 8)
      : cell_m_(cell_m), bins_(heading_bins) {
    if (!(cell_m > 0.0)) throw config_error("store cell size must be positive");
    if (heading_bins < 2) throw config_error("store needs at least 2 heading bins");
  }

  double cell_size() const { return cell_m_; }
  int heading_bins() const { return bins_; }
  std::size_t cell_count() const { return cells_.size(); }

  CellKey cell_of(double x, double y) const {
    return {static_cast<std::int64_t>(std::floor(x / cell_m_)),
            static_cast<std::int64_t>(std::floor(y / cell_m_))};
  }

  const CellStats* find(CellKey key) const {
    auto it = cells_.find(key);
    return it == cells_.end() ? nullptr : &it->second;
  }

  static std::uint64_t trajectory_hash(const std::vector<PathPoint>& traj) {
    std::string text;
    for (const auto& p : traj) {
      text += std::to_string(p.tick);
      text += ',';
      text += format_double(p.position.x);
      text += ',';
      text += format_double(p.position.y);
      text += ',';
      text += format_double(p.position.z);
      text += ',';
      text += format_double(p.heading_deg);
      text += ',';
      text += format_double(p.speed_mps);
      text += '\n';
    }
    return fnv1a(text);
  }

  /// Folds one trajectory into the store. Counting is per cell crossing; each
  /// crossing contributes the exit heading to the cell's histogram.
  void update(const std::vector<PathPoint>& traj, int day) {
    if (day < 1) throw std::invalid_argument("day must be >= 1");
    if (traj.empty()) throw insufficient_data_error("empty trajectory");
    auto key = std::make_pair(trajectory_hash(traj), day);
    if (ingested_.contains(key))
      throw duplicate_ingestion_error("trajectory already ingested for day " +
                                      std::to_string(day));

    std::size_t i = 0;
    while (i < traj.size()) {
      CellKey cell = cell_of(traj[i].position.x, traj[i].position.y);
      std::size_t j = i;
      while (j + 1 < traj.size() &&
             cell_of(traj[j + 1].position.x, traj[j + 1].position.y) == cell)
        ++j;
      record(cell, traj[j].heading_deg, day);
      i = j + 1;
    }
    ingested_.insert(key);
  }

  /// Non-empty histogram bins of a cell as rollout branches. The branch
  /// heading is the bin's mean exit heading quantized to 1e-9 rad, which keeps
  /// lookups identical after re-ingesting the same history.
  struct Branch {
    double heading_rad = 0.0;
    double fraction = 0.0;  // count / visits
    std::uint64_t count = 0;
  };

  std::vector<Branch> branches(CellKey key) const {
    std::vector<Branch> out;
    const CellStats* cell = find(key);
    if (!cell || cell->visits == 0) return out;
    for (const auto& bin : cell->bins) {
      if (bin.count == 0) continue;
      double n = static_cast<double>(bin.count);
      double h = std::atan2(bin.sum_sin / n, bin.sum_cos / n);
      h = std::nearbyint(h * 1e9) / 1e9;
      out.push_back({h, static_cast<double>(bin.count) / static_cast<double>(cell->visits),
                     bin.count});
    }
    return out;
  }

  std::set<int> days() const {
    std::set<int> d;
    for (const auto& [hash, day] : ingested_) d.insert(day);
    return d;
  }

  std::uint64_t total_visits() const {
    std::uint64_t n = 0;
    for (const auto& [key, cell] : cells_) n += cell.visits;
    return n;
  }

  /// Deterministic plain-text serialization; floats use shortest round-trip
  /// form so save/load preserves every bit.
  void save(std::ostream& out) const {
    out << "# isotraj path store v1\n";
    out << "cell_m " << format_double(cell_m_) << "\n";
    out << "bins " << bins_ << "\n";
    for (const auto& [hash, day] : ingested_) out << "ingested " << hash << " " << day << "\n";
    for (const auto& [key, cell] : cells_) {
      out << "cell " << key.ix << " " << key.iy << " " << cell.visits << " " << cell.first_day
          << " " << cell.last_day;
      for (const auto& bin : cell.bins)
        out << " " << bin.count << " " << format_double(bin.sum_sin) << " "
            << format_double(bin.sum_cos);
      out << "\n";
    }
  }

  static PathStore load(std::istream& in) {
    std::string raw;
    std::size_t lineno = 0;
    double cell_m = 5.0;
    int bins = 8;
    bool header_done = false;
    PathStore store(cell_m, bins);
    while (std::getline(in, raw)) {
      ++lineno;
      auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto tok = split(line, ' ');
      if (tok[0] == "cell_m" && tok.size() == 2) {
        cell_m = parse_double(tok[1], lineno);
      } else if (tok[0] == "bins" && tok.size() == 2) {
        bins = static_cast<int>(parse_int(tok[1], lineno));
      } else if (tok[0] == "ingested" && tok.size() == 3) {
        if (!header_done) {
          store = PathStore(cell_m, bins);
          header_done = true;
        }
        store.ingested_.emplace(parse_uint64(tok[1], lineno),
                                static_cast<int>(parse_int(tok[2], lineno)));
      } else if (tok[0] == "cell") {
        if (!header_done) {
          store = PathStore(cell_m, bins);
          header_done = true;
        }
        if (tok.size() != 5 + 1 + static_cast<std::size_t>(store.bins_) * 3)
          throw parse_error("store cell row has wrong field count", lineno);
        CellKey key{parse_int(tok[1], lineno), parse_int(tok[2], lineno)};
        CellStats cell;
        cell.visits = parse_uint64(tok[3], lineno);
        cell.first_day = static_cast<int>(parse_int(tok[4], lineno));
        cell.last_day = static_cast<int>(parse_int(tok[5], lineno));
        cell.bins.resize(static_cast<std::size_t>(store.bins_));
        for (int b = 0; b < store.bins_; ++b) {
          cell.bins[b].count = parse_uint64(tok[6 + 3 * b], lineno);
          cell.bins[b].sum_sin = parse_double(tok[7 + 3 * b], lineno);
          cell.bins[b].sum_cos = parse_double(tok[8 + 3 * b], lineno);
        }
        store.cells_[key] = std::move(cell);
      } else {
        throw parse_error("unrecognized store row '" + std::string(tok[0]) + "'", lineno);
      }
    }
    if (!header_done) store = PathStore(cell_m, bins);
    return store;
  }

private:
  void record(CellKey cell, double heading_deg, int day) {
    CellStats& stats = cells_[cell];
    if (stats.bins.empty()) {
      stats.bins.resize(static_cast<std::size_t>(bins_));
      stats.first_day = day;
    }
    stats.visits += 1;
    stats.last_day = std::max(stats.last_day, day);
    stats.first_day = std::min(stats.first_day, day);
    double h = heading_deg * std::numbers::pi / 180.0;
    int b = static_cast<int>(std::floor(heading_deg / (360.0 / bins_)));
    if (b < 0) b = 0;
    if (b >= bins_) b = bins_ - 1;
    auto& bin = stats.bins[static_cast<std::size_t>(b)];
    bin.count += 1;
    bin.sum_sin += std::sin(h);
    bin.sum_cos += std::cos(h);
  }

  double cell_m_;
  int bins_;
  std::map<CellKey, CellStats> cells_;
  std::set<std::pair<std::uint64_t, int>> ingested_;
};

inline void update_store(PathStore& store, const std::vector<PathPoint>& trajectory, int day) {
  store.update(trajectory, day);
}

}  // namespace isotraj
