#pragma once
#include "dcuprl/arena.hpp"
#include "dcuprl/camera.hpp"
#include "dcuprl/rng.hpp"

namespace dcuprl {

// Reward constants: a small keep-alive bonus while clear of obstacles and
// a terminal penalty when the closest visible range drops below the
// clearance threshold.
inline constexpr float kRewardNavigating = 0.01f;
inline constexpr float kRewardCollision = -1.0f;
inline constexpr float kClearanceThreshold = 0.62f; // meters
inline constexpr double kStartAltitude = 2.0;       // meters, held constant

struct VehicleState {
    double x = 0.0, y = 0.0;
    double yaw = 0.0; // (-pi, pi]
    double altitude = kStartAltitude;
};

/// Velocity command after scaling/clamping: linear in [0, 0.22] m/s,
/// angular in [-0.25, 0.25] rad/s.
struct Action {
    double linear = 0.0;
    double angular = 0.0;
};

inline constexpr double kLinearMax = 0.22;
inline constexpr double kAngularMax = 0.25;

/// Map normalized tanh outputs (-1,1)^2 onto the velocity box:
/// linear = 0.11*(a0+1), angular = 0.25*a1.
Action scale_action(double a0, double a1);

struct StepOutcome {
    VehicleState next;
    float reward = 0.0f;
    bool done = false;
    float min_depth = 0.0f;
};

/// Reward table: navigating while min_depth >= threshold (inclusive),
/// collision (and episode end) below it.
inline float reward_from_min_depth(float min_depth) {
    return min_depth >= kClearanceThreshold ? kRewardNavigating : kRewardCollision;
}

/**
 * Planar unicycle vehicle with a forward column-raycast camera, stepped
 * at a fixed dt. Collision is judged on the post-move depth image's
 * minimum value, nothing else. Pure given (state, action, arena); the
 * only randomness is the reset yaw draw, which the caller provides.
 */
class Sim {
public:
    Sim(Arena arena, CameraConfig cam, double dt = 0.1);

    const Arena& arena() const { return arena_; }
    const CameraConfig& camera() const { return cam_; }
    const VehicleState& state() const { return state_; }
    double dt() const { return dt_; }

    /// Place the vehicle at the arena start pose. Yaw comes from the
    /// arena file when fixed, otherwise uniform over (-pi, pi].
    VehicleState reset(Rng& rng);

    /// Integrate one unicycle step, re-render, and judge the reward.
    /// Out-of-range commands are clamped and counted.
    StepOutcome step(const Action& a);

    /// Frames at the current pose (rays are cached per pose change).
    const DepthImage& depth_frame() const { return depth_; }
    PixelImage pixel_frame() const { return pixel_from_rays(rays_, cam_); }
    const RaySweep& rays() const { return rays_; }

    long clamp_warnings() const { return clamp_warnings_; }

private:
    Arena arena_;
    CameraConfig cam_;
    double dt_;
    VehicleState state_;
    RaySweep rays_;
    DepthImage depth_;
    long clamp_warnings_ = 0;

    void rerender();
};

} // namespace dcuprl
