#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "prevmap/density.hpp"
#include "prevmap/design.hpp"
#include "prevmap/random.hpp"

namespace prevmap {

enum class SamplerId { gls, sir, mh };

std::string to_string(SamplerId id);
/// Accepts "gls", "sir", "mh"; throws ConfigError otherwise.
SamplerId sampler_from_string(const std::string& name);

/// Sampling positions with the normalized sampling density at each.
struct PositionDraw {
  std::vector<Point> positions;
  std::vector<double> phi_values;
  SamplerId sampler = SamplerId::gls;

  std::size_t size() const { return positions.size(); }
};

/// Global likelihood sampling. For each position: shift the design by a
/// uniform random vector modulo 1, weight the shifted points by the kernel
/// (zero outside the region) and draw one of them from that multinomial.
/// A shift whose points all carry zero weight is redrawn, up to 1000 times.
PositionDraw gls_sample(const GridDensity& kernel, const DesignPointSet& design, std::size_t r,
                        Rng& rng);

/// Sampling/importance resampling with a uniform proposal on the enclosing
/// rectangle; resamples r of pool_size points with replacement.
PositionDraw sir_sample(const GridDensity& kernel, std::size_t r, std::size_t pool_size, Rng& rng);

struct MhOptions {
  /// Per-axis standard deviation of the random-walk increment, in region
  /// units. 1/4 corresponds to covariance I/16 on the unit square.
  double proposal_sd = 0.25;
  std::size_t burn_in = 1000;
  std::size_t thinning = 50;
};

/// Random-walk Metropolis. The chain starts at a kernel-weighted design
/// point; proposals leaving the region have zero kernel and are rejected.
PositionDraw mh_sample(const GridDensity& kernel, const DesignPointSet& design, std::size_t r,
                       const MhOptions& options, Rng& rng);

inline constexpr std::size_t kGlsMaxShiftAttempts = 1000;
inline constexpr std::size_t kSirPoolFactor = 50;

}  // namespace prevmap
