#pragma once

#include <optional>
#include <string>
#include <vector>

namespace desgn {

struct Season {
  std::string name;
  int n_day = 0;           // representative-day weight for operating costs
  int hours_per_day = 24;  // timepoints contributed by this season block
  int start_hour = 0;      // hour-of-day of the block's first timepoint
};

/// Concatenation of per-season timepoint blocks. One block may be marked
/// robust: it links sizing decisions but contributes no operating cost.
struct Timeline {
  std::vector<Season> seasons;
  std::optional<int> robust_index;
  double dt_hours = 1.0;

  int total_timepoints() const;
  int season_of(int t) const;          // season block containing timepoint t
  int block_start(int s) const;        // first timepoint of season s
  int block_end(int s) const;          // one past the last timepoint of season s
  int hour_of_day(int t) const;
  bool is_robust(int s) const { return robust_index && *robust_index == s; }
  int n_normal_seasons() const;
  int first_normal_season() const;

  /// Night tariff applies before 07:00.
  bool is_night(int t) const { return hour_of_day(t) < 7; }

  void validate() const;
};

Timeline load_timeline(const std::string& path);

}  // namespace desgn
