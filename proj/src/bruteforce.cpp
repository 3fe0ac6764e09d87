#include "wellopt/bruteforce.hpp"

#include <cmath>

#include <fmt/format.h>

#include "wellopt/errors.hpp"
#include "wellopt/search.hpp"

namespace wellopt {

BruteForceResult enumerate_vertical_placements(const ReservoirProblem& problem, int workers,
                                               long max_placements) {
  const auto& spec = problem.spec();
  if (!spec.fixed_controls) throw Error("brute force needs fixed controls (controls.fixed)");
  for (const auto& w : spec.wells)
    if (w.kind != ShapeKind::Vertical) throw Error("brute force supports vertical wells only");

  const auto& g = spec.model->grid;
  const long cells = static_cast<long>(g.nx) * g.ny;
  const auto nwells = spec.wells.size();
  double total = 1.0;
  for (std::size_t w = 0; w < nwells; ++w) total *= static_cast<double>(cells - static_cast<long>(w));
  if (total > static_cast<double>(max_placements))
    throw Error(fmt::format("{} placements exceed the brute-force limit of {}", total, max_placements));

  BruteForceResult out;
  out.placements = static_cast<long>(std::llround(total));
  Evaluator ev(problem, out.placements, workers);
  ev.set_stage("bruteforce");

  Candidate c;
  for (const auto& w : spec.wells) c.wells.push_back({w.role, VerticalWell{}, w.label});
  std::vector<long> slot(nwells, 0);
  std::vector<Point> batch;
  auto flush = [&] {
    if (batch.empty()) return;
    for (auto& r : ev.evaluate_batch(batch)) {
      offer(out.best, r);
      out.records.push_back(std::move(r));
    }
    batch.clear();
  };

  for (;;) {
    bool distinct = true;
    for (std::size_t a = 0; a < nwells && distinct; ++a)
      for (std::size_t b = a + 1; b < nwells; ++b)
        if (slot[a] == slot[b]) {
          distinct = false;
          break;
        }
    if (distinct) {
      for (std::size_t w = 0; w < nwells; ++w)
        c.wells[w].shape = VerticalWell{static_cast<int>(slot[w] % g.nx), static_cast<int>(slot[w] / g.nx)};
      batch.push_back(problem.encode(c));
      if (batch.size() >= 256) flush();
    }
    std::size_t w = 0;
    while (w < nwells && ++slot[w] == cells) slot[w++] = 0;
    if (w == nwells) break;
  }
  flush();
  return out;
}

}  // namespace wellopt
