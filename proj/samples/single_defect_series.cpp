// Localization around a single missing-tile defect on a 50x50 square torus.
// Prints the probability series and the detected peak.
//
//   ./single_defect_series [mass] [steps]

#include <cstdlib>
#include <iostream>

#include "diracwalk.hpp"

int main(int argc, char** argv) {
  using namespace dqw;
  RunSetup s;
  s.grid = GridSpec{GridKind::Square, 50, 50, 1.0};
  s.coin.mass = argc > 1 ? std::atof(argv[1]) : 0.0;
  s.centres = {Vec2{25.0, 25.0}};
  s.t_max = argc > 2 ? static_cast<std::size_t>(std::atoi(argv[2])) : 200;

  const RunResult r = run_single(s);
  write_series_csv(std::cout, r.series);
  std::cerr << "peak t = " << r.peak.t_peak << ", p = " << r.peak.p_peak;
  if (r.peak.period_estimate) std::cerr << ", period ~ " << *r.peak.period_estimate;
  std::cerr << '\n';
}
