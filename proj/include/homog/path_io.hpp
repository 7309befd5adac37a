#pragma once

// PathEnsemble files.
//
// Binary layout, little-endian:
//   char[8]  magic "HPATHS01"
//   u32 dims, u32 n, f64 dt, u64 num_paths, u32 flags, u32 record_every
//     flags: 1 clock, 2 time-changed positions, 4 martingale and bracket
//   per path:
//     u64 m; f64 times[m]; f64 positions[m*d]; f64 projected[m*d]
//     flags & 1: f64 clock[m]
//     flags & 2: f64 step; u64 count; f64 timechanged[count*d]
//     flags & 4: f64 martingale[m*d]; f64 bracket[m*d*d]
//
// CSV: path,sample,t,x_1..x_d,y_1..y_d[,clock][,m_1..m_d], one row per
// recorded sample.

#include <iosfwd>

#include "homog/diffusion.hpp"

namespace homog {

void write_paths_binary(std::ostream& out, const PathEnsemble& paths);
/// Throws std::runtime_error on a bad magic or a truncated file.
PathEnsemble read_paths_binary(std::istream& in);
void write_paths_csv(std::ostream& out, const PathEnsemble& paths);

}  // namespace homog
