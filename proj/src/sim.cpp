#include "dcuprl/sim.hpp"

#include <algorithm>
#include <cmath>

#include "dcuprl/tensor.hpp"

namespace dcuprl {

Action scale_action(double a0, double a1) {
    Action act;
    act.linear = 0.11 * (a0 + 1.0);
    act.angular = kAngularMax * a1;
    act.linear = std::clamp(act.linear, 0.0, kLinearMax);
    act.angular = std::clamp(act.angular, -kAngularMax, kAngularMax);
    return act;
}

Sim::Sim(Arena arena, CameraConfig cam, double dt)
    : arena_(std::move(arena)), cam_(cam), dt_(dt) {
    if (dt_ <= 0.0) throw ContractError("sim: dt must be positive");
    cam_.validate();
}

void Sim::rerender() {
    rays_ = sweep_rays(arena_, state_.x, state_.y, state_.yaw, cam_);
    depth_ = depth_from_rays(rays_, cam_);
}

VehicleState Sim::reset(Rng& rng) {
    state_.x = arena_.start_x;
    state_.y = arena_.start_y;
    state_.altitude = kStartAltitude;
    if (arena_.start_yaw) {
        state_.yaw = wrap_angle(*arena_.start_yaw);
    } else {
        // pi - u*2pi covers (-pi, pi]
        state_.yaw = 3.141592653589793238 - rng.uniform() * 6.283185307179586477;
    }
    rerender();
    return state_;
}

StepOutcome Sim::step(const Action& a) {
    Action cmd = a;
    if (cmd.linear < 0.0 || cmd.linear > kLinearMax || cmd.angular < -kAngularMax ||
        cmd.angular > kAngularMax) {
        ++clamp_warnings_;
        cmd.linear = std::clamp(cmd.linear, 0.0, kLinearMax);
        cmd.angular = std::clamp(cmd.angular, -kAngularMax, kAngularMax);
    }

    state_.x += cmd.linear * std::cos(state_.yaw) * dt_;
    state_.y += cmd.linear * std::sin(state_.yaw) * dt_;
    state_.yaw = wrap_angle(state_.yaw + cmd.angular * dt_);
    rerender();

    StepOutcome out;
    out.next = state_;
    out.min_depth = depth_.min_value();
    out.reward = reward_from_min_depth(out.min_depth);
    out.done = out.reward == kRewardCollision;
    return out;
}

} // namespace dcuprl
