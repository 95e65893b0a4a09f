#pragma once

#include <optional>

#include "dtse/arz.hpp"

namespace dtse {

/// The effective study domain on the road: N cells of length dh starting at
/// road coordinate `start`. Cell indices returned here are 1-based.
struct Domain {
  double start = 0.0;
  int n_cells = 0;
  double dh = 0.0;

  static Domain from(const arz::ModelParams& p, double start) { return {start, p.n_cells, p.dh}; }

  double end() const { return start + n_cells * dh; }
  bool contains(double pos) const { return pos >= start && pos < end(); }

  /// Left-closed cells: [start + (i-1) dh, start + i dh).
  std::optional<int> cell_of(double pos) const;
};

}  // namespace dtse
