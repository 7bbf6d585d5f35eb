#include "prevmap/samplers.hpp"

#include <algorithm>
#include <optional>

#include "prevmap/simd/kernels.hpp"

namespace prevmap {

namespace {

simd::CellTable table_of(const GridDensity& kernel) {
  return {kernel.values(), kernel.region().nx(), kernel.region().ny()};
}

/// Index drawn proportionally to weights (sum given); nullopt if all zero.
std::optional<std::size_t> draw_index(std::span<const double> weights, double total, Rng& rng) {
  if (!(total > 0.0)) return std::nullopt;
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    acc += weights[j];
    last_positive = j;
    if (acc > target) return j;
  }
  return last_positive;
}

double sum_of(std::span<const double> w) {
  double s = 0.0;
  for (double x : w) s += x;
  return s;
}

/// One GLS step: unit-square coordinates of the selected shifted point.
std::optional<Point> gls_step(const simd::CellTable& table, const DesignPointSet& design,
                              std::vector<double>& weights, Rng& rng) {
  for (std::size_t attempt = 0; attempt < kGlsMaxShiftAttempts; ++attempt) {
    const double sx = uniform01(rng);
    const double sy = uniform01(rng);
    simd::shifted_cell_values(design.u, design.v, sx, sy, table, weights);
    const auto j = draw_index(weights, sum_of(weights), rng);
    if (j) return Point{simd::wrap_add(design.u[*j], sx), simd::wrap_add(design.v[*j], sy)};
  }
  return std::nullopt;
}

void require_positive_mass(const GridDensity& kernel) {
  if (!(integrate(kernel) > 0.0)) throw ComputationError("sampling kernel integrates to zero");
}

}  // namespace

std::string to_string(SamplerId id) {
  switch (id) {
    case SamplerId::gls: return "gls";
    case SamplerId::sir: return "sir";
    case SamplerId::mh: return "mh";
  }
  return "?";
}

SamplerId sampler_from_string(const std::string& name) {
  if (name == "gls") return SamplerId::gls;
  if (name == "sir") return SamplerId::sir;
  if (name == "mh") return SamplerId::mh;
  throw ConfigError("unknown position sampler \"" + name + "\"");
}

PositionDraw gls_sample(const GridDensity& kernel, const DesignPointSet& design, std::size_t r,
                        Rng& rng) {
  if (r == 0) throw ConfigError("gls_sample needs r >= 1");
  if (design.size() == 0) throw ConfigError("gls_sample needs a non-empty design");
  const NormalizedDensity phi = sampling_density(kernel);
  const simd::CellTable table = table_of(kernel);
  const Region& region = kernel.region();

  PositionDraw draw;
  draw.sampler = SamplerId::gls;
  draw.positions.reserve(r);
  draw.phi_values.reserve(r);
  std::vector<double> weights(design.size());
  while (draw.positions.size() < r) {
    const auto unit = gls_step(table, design, weights, rng);
    if (!unit)
      throw ComputationError("GLS: every shifted design point had zero kernel in " +
                             std::to_string(kGlsMaxShiftAttempts) + " attempts");
    const Point p = region.from_unit(unit->x, unit->y);
    const double value = evaluate(phi.density, p);
    // Only reachable on non-unit bounds when the affine map rounds across a
    // cell edge into a zero cell; such a step is redone.
    if (!(value > 0.0)) continue;
    draw.positions.push_back(p);
    draw.phi_values.push_back(value);
  }
  return draw;
}

PositionDraw sir_sample(const GridDensity& kernel, std::size_t r, std::size_t pool_size, Rng& rng) {
  if (r == 0) throw ConfigError("sir_sample needs r >= 1");
  if (pool_size < r) throw ConfigError("sir_sample needs pool_size >= r");
  const NormalizedDensity phi = sampling_density(kernel);
  const Region& region = kernel.region();

  std::vector<double> pu(pool_size), pv(pool_size), weights(pool_size);
  for (std::size_t k = 0; k < pool_size; ++k) {
    pu[k] = uniform01(rng);
    pv[k] = uniform01(rng);
  }
  simd::shifted_cell_values(pu, pv, 0.0, 0.0, table_of(kernel), weights);
  std::vector<double> cumulative(pool_size);
  double acc = 0.0;
  for (std::size_t k = 0; k < pool_size; ++k) cumulative[k] = acc += weights[k];
  if (!(acc > 0.0)) throw ComputationError("SIR: every pool point had zero kernel");

  PositionDraw draw;
  draw.sampler = SamplerId::sir;
  while (draw.positions.size() < r) {
    const double target = uniform01(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    // upper_bound lands on the first point whose weight pushes past target.
    while (weights[static_cast<std::size_t>(it - cumulative.begin())] <= 0.0) --it;
    const auto k = static_cast<std::size_t>(it - cumulative.begin());
    const Point p = region.from_unit(pu[k], pv[k]);
    const double value = evaluate(phi.density, p);
    if (!(value > 0.0)) continue;
    draw.positions.push_back(p);
    draw.phi_values.push_back(value);
  }
  return draw;
}

PositionDraw mh_sample(const GridDensity& kernel, const DesignPointSet& design, std::size_t r,
                       const MhOptions& options, Rng& rng) {
  if (r == 0) throw ConfigError("mh_sample needs r >= 1");
  if (!(options.proposal_sd > 0.0)) throw ConfigError("MH proposal_sd must be positive");
  if (options.thinning == 0) throw ConfigError("MH thinning must be >= 1");
  require_positive_mass(kernel);
  const NormalizedDensity phi = sampling_density(kernel);
  const Region& region = kernel.region();
  const simd::CellTable table = table_of(kernel);
  auto kernel_at = [&](double u, double v) { return kernel[region.cell_of_unit(u, v)]; };

  // Kernel-weighted design point; unshifted first, random shifts if needed.
  std::vector<double> weights(design.size());
  simd::shifted_cell_values(design.u, design.v, 0.0, 0.0, table, weights);
  Point state;
  if (auto j = draw_index(weights, sum_of(weights), rng)) {
    state = design.at(*j);
  } else if (auto unit = gls_step(table, design, weights, rng)) {
    state = *unit;
  } else {
    throw ComputationError("MH: no design point with positive kernel to start from");
  }
  double current = kernel_at(state.x, state.y);

  std::normal_distribution<double> step_x(0.0, options.proposal_sd / region.width());
  std::normal_distribution<double> step_y(0.0, options.proposal_sd / region.height());
  auto advance = [&] {
    const double u = state.x + step_x(rng);
    const double v = state.y + step_y(rng);
    const double accept_draw = uniform01(rng);
    if (!(u >= 0.0 && u < 1.0 && v >= 0.0 && v < 1.0)) return;
    const double proposed = kernel_at(u, v);
    if (proposed <= 0.0) return;
    if (proposed >= current || accept_draw * current < proposed) {
      state = {u, v};
      current = proposed;
    }
  };

  for (std::size_t s = 0; s < options.burn_in; ++s) advance();
  PositionDraw draw;
  draw.sampler = SamplerId::mh;
  draw.positions.reserve(r);
  draw.phi_values.reserve(r);
  while (draw.positions.size() < r) {
    for (std::size_t s = 0; s < options.thinning; ++s) advance();
    const Point p = region.from_unit(state.x, state.y);
    const double value = evaluate(phi.density, p);
    if (!(value > 0.0)) continue;
    draw.positions.push_back(p);
    draw.phi_values.push_back(value);
  }
  return draw;
}

}  // namespace prevmap
