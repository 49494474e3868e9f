#pragma once

// Real-Time Matched Frames: how many correctly matched queries a technique
// can actually deliver when frames arrive faster than it can process them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "vprbench/error.hpp"

namespace vpr {

struct RmfParams {
  double fps = 50.0;               // camera sampling rate F
  double frames_per_meter = 0.0;   // D
  double velocity = 0.0;           // V, meters per second
  double k = 1.0;                  // unitless pipeline down-sampling constant
  double retrieval_time = 0.0;     // t_R, seconds per query

  friend bool operator==(const RmfParams&, const RmfParams&) = default;
};

struct RmfResult {
  double incoming_rate = 0.0;
  std::int64_t vpr_rate = 0;
  // Set when the floored VPR rate was 0 and 1 / t_R was used in its place.
  bool used_unfloored_rate = false;
  std::int64_t frame_interval = 1;  // G
  std::size_t n_queries = 0;
  std::size_t matched = 0;          // M_q
  std::size_t rmf = 0;

  friend bool operator==(const RmfResult&, const RmfResult&) = default;
};

namespace detail {
inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidParam, std::string(name) + " must be positive and finite");
  }
}
}  // namespace detail

/// min(K * D * V, F)
inline double incoming_frame_rate(double fps, double k, double frames_per_meter, double velocity) {
  detail::require_positive(fps, "F");
  detail::require_positive(k, "K");
  detail::require_positive(frames_per_meter, "D");
  detail::require_positive(velocity, "V");
  return std::min(k * frames_per_meter * velocity, fps);
}

/// floor(1 / t_R)
inline std::int64_t vpr_frame_rate(double retrieval_time) {
  detail::require_positive(retrieval_time, "t_R");
  return static_cast<std::int64_t>(std::floor(1.0 / retrieval_time));
}

/// G = floor(max(incoming / vpr, 1)). When the floored VPR rate is 0 the
/// caller's unfloored rate (1 / t_R) stands in for it.
inline std::int64_t frame_interval(double incoming, std::int64_t vpr_rate,
                                   std::optional<double> unfloored_rate = std::nullopt) {
  detail::require_positive(incoming, "incoming frame rate");
  if (vpr_rate < 0) throw Error(ErrorCode::InvalidParam, "VPR frame rate must be non-negative");
  double denom = static_cast<double>(vpr_rate);
  if (vpr_rate == 0) {
    if (!unfloored_rate || !(*unfloored_rate > 0.0) || !std::isfinite(*unfloored_rate)) {
      throw Error(ErrorCode::InvalidParam, "VPR frame rate is 0 and no unfloored rate was supplied");
    }
    denom = *unfloored_rate;
  }
  return static_cast<std::int64_t>(std::floor(std::max(incoming / denom, 1.0)));
}

struct RmfCount {
  std::size_t matched = 0;  // M_q
  std::size_t rmf = 0;
};

/// Counts matches at the indices a technique with frame interval G gets to
/// process: index 0 and every index i with (i + 1) % G == 0.
inline RmfCount compute_rmf(std::span<const std::uint8_t> matches, std::int64_t g) {
  if (g < 1) throw Error(ErrorCode::InvalidParam, "frame interval G must be >= 1");
  const auto period = static_cast<std::size_t>(g);
  RmfCount out;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (matches[i] > 1) throw Error(ErrorCode::InvalidParam, "matches list entries must be 0 or 1");
    out.matched += matches[i];
    if (((i + 1) % period == 0 || i == 0) && matches[i] == 1) ++out.rmf;
  }
  return out;
}

/// Full chain from parameters and a matches list to the metric. When D or V
/// is unset (<= 0) the incoming rate is the camera rate F.
inline RmfResult evaluate_rmf(const RmfParams& p, std::span<const std::uint8_t> matches) {
  RmfResult r;
  if (p.frames_per_meter > 0.0 || p.velocity > 0.0) {
    r.incoming_rate = incoming_frame_rate(p.fps, p.k, p.frames_per_meter, p.velocity);
  } else {
    detail::require_positive(p.fps, "F");
    r.incoming_rate = p.fps;
  }
  r.vpr_rate = vpr_frame_rate(p.retrieval_time);
  r.used_unfloored_rate = r.vpr_rate == 0;
  r.frame_interval = frame_interval(r.incoming_rate, r.vpr_rate, 1.0 / p.retrieval_time);
  const RmfCount c = compute_rmf(matches, r.frame_interval);
  r.n_queries = matches.size();
  r.matched = c.matched;
  r.rmf = c.rmf;
  return r;
}

}  // namespace vpr
