#include "gapcore/bicycle.hpp"

#include <cmath>
#include <stdexcept>

namespace gapcore {

namespace {

inline double sign(double x) { return (x > 0.0) - (x < 0.0); }

inline double wrap_pi(double a) { return std::remainder(a, 2.0 * kPi); }

// Direction angle of a vector under the simulator's convention: a heading
// angle psi moves the wheel by (-sin psi, cos psi) per unit length.
inline double direction_angle(double vx, double vy) { return std::atan2(-vx, vy); }

} // namespace

BicycleSim::BicycleSim(const BicycleParams& p) : p_(p) {
    total_mass_ = p_.mass_cycle + p_.mass_rider;
    inertia_bike_ = 13.0 / 3.0 * p_.mass_cycle * p_.cm_height * p_.cm_height +
                    p_.mass_rider * (p_.cm_height + p_.cm_to_rider) * (p_.cm_height + p_.cm_to_rider);
    inertia_dc_ = p_.mass_tyre * p_.tyre_radius * p_.tyre_radius;
    inertia_dv_ = 1.5 * p_.mass_tyre * p_.tyre_radius * p_.tyre_radius;
    inertia_dl_ = 0.5 * p_.mass_tyre * p_.tyre_radius * p_.tyre_radius;
    sigma_dot_ = p_.speed / p_.tyre_radius;
}

double BicycleSim::action_torque(int action) {
    static const double torque[3] = {-2.0, 0.0, 2.0};
    return torque[action / 3];
}

double BicycleSim::action_displacement(int action) {
    static const double disp[3] = {-0.02, 0.0, 0.02};
    return disp[action % 3];
}

BicycleState BicycleSim::initial_state(Rng& rng) const {
    BicycleState s;
    s.omega = rng.uniform(-p_.start_tilt_magnitude, p_.start_tilt_magnitude);
    s.xf = 0.0;
    s.yf = -p_.start_distance;
    s.xb = 0.0;
    s.yb = -p_.start_distance - p_.wheelbase;
    return s;
}

bool BicycleSim::fallen(const BicycleState& s) const {
    return std::fabs(s.omega) > p_.fall_angle;
}

bool BicycleSim::at_goal(const BicycleState& s) const {
    return std::hypot(s.xf, s.yf) <= p_.goal_radius;
}

double BicycleSim::fall_reward() const { return -(0.75 * kPi * kPi - 1.0) * 0.001; }

double BicycleSim::shaping_reward(double psi) const {
    return (kPi * kPi / 4.0 - psi * psi - 1.0) * 0.001;
}

BicycleOutcome BicycleSim::step(BicycleState& s, int action, double noise) const {
    if (action < 0 || action >= n_actions)
        throw std::invalid_argument("bicycle action out of range");
    if (terminal(s)) throw std::logic_error("stepping a terminal bicycle state");

    const double torque = action_torque(action);
    const double displacement = action_displacement(action) + noise;
    const double v = p_.speed;
    const double l = p_.wheelbase;
    const double dt = p_.dt;

    // Turning geometry; inverse radii go to zero as the handlebar straightens.
    double inv_rf = 0.0, inv_rb = 0.0, inv_rcm = 0.0;
    if (s.theta != 0.0) {
        inv_rf = std::fabs(std::sin(s.theta)) / l;
        inv_rb = std::fabs(std::tan(s.theta)) / l;
        double lcot = l / std::tan(s.theta);
        inv_rcm = 1.0 / std::sqrt((l - p_.front_to_cm) * (l - p_.front_to_cm) + lcot * lcot);
    }

    const double phi = s.omega + std::atan(displacement / p_.cm_height);
    const double omega_ddot =
        (p_.cm_height * total_mass_ * p_.gravity * std::sin(phi) -
         std::cos(phi) *
             (inertia_dc_ * sigma_dot_ * s.theta_dot +
              sign(s.theta) * v * v *
                  (p_.mass_tyre * p_.tyre_radius * (inv_rf + inv_rb) +
                   total_mass_ * p_.cm_height * inv_rcm))) /
        inertia_bike_;
    const double theta_ddot = (torque - inertia_dv_ * sigma_dot_ * s.omega_dot) / inertia_dl_;

    // Semi-implicit Euler in the original's order: theta_ddot is formed from
    // the pre-update omega_dot.
    s.omega_dot += omega_ddot * dt;
    s.omega += s.omega_dot * dt;
    s.theta_dot += theta_ddot * dt;
    s.theta += s.theta_dot * dt;
    if (s.theta > p_.handlebar_limit) s.theta = p_.handlebar_limit;
    if (s.theta < -p_.handlebar_limit) s.theta = -p_.handlebar_limit;

    // Wheel positions advance along chords of their turning circles.
    const double heading = direction_angle(s.xf - s.xb, s.yf - s.yb);
    double front_arc = v * dt * 0.5 * inv_rf;
    front_arc = front_arc > 1.0 ? sign(heading + s.theta) * kPi / 2.0
                                : sign(heading + s.theta) * std::asin(front_arc);
    s.xf += v * dt * -std::sin(heading + s.theta + front_arc);
    s.yf += v * dt * std::cos(heading + s.theta + front_arc);
    double back_arc = v * dt * 0.5 * inv_rb;
    back_arc = back_arc > 1.0 ? sign(heading) * kPi / 2.0
                              : sign(heading) * std::asin(back_arc);
    s.xb += v * dt * -std::sin(heading + back_arc);
    s.yb += v * dt * std::cos(heading + back_arc);

    // The chord updates let the wheelbase drift; pull the back wheel in when
    // the drift exceeds a centimeter, as the original simulator does.
    double dist = std::hypot(s.xf - s.xb, s.yf - s.yb);
    if (std::fabs(dist - l) > 0.01) {
        s.xb += (s.xb - s.xf) * (l - dist) / dist;
        s.yb += (s.yb - s.yf) * (l - dist) / dist;
    }

    BicycleOutcome out;
    if (fallen(s)) {
        out.fallen = true;
        out.reward = fall_reward();
    } else if (at_goal(s)) {
        out.goal = true;
        out.reward = 1.0;
    } else {
        double heading_after = direction_angle(s.xf - s.xb, s.yf - s.yb);
        double goal_dir = direction_angle(-s.xf, -s.yf);
        out.reward = shaping_reward(wrap_pi(goal_dir - heading_after));
    }
    return out;
}

BicycleOutcome BicycleSim::step(BicycleState& s, int action, Rng& rng) const {
    return step(s, action, rng.uniform(-p_.noise_magnitude, p_.noise_magnitude));
}

void BicycleSim::features(const BicycleState& s, std::span<double> out) const {
    out[0] = s.omega;
    out[1] = s.omega_dot;
    out[2] = s.theta;
    out[3] = s.theta_dot;
    double heading = direction_angle(s.xf - s.xb, s.yf - s.yb);
    double goal_dir = direction_angle(-s.xf, -s.yf);
    out[4] = wrap_pi(goal_dir - heading);
    out[5] = std::hypot(s.xf, s.yf);
}

std::array<double, BicycleSim::n_features> BicycleSim::features(const BicycleState& s) const {
    std::array<double, n_features> f{};
    features(s, f);
    return f;
}

BicycleState BicycleSim::from_features(std::span<const double> f) const {
    BicycleState s;
    s.omega = f[0];
    s.omega_dot = f[1];
    s.theta = f[2];
    s.theta_dot = f[3];
    double psi = f[4];
    double d = f[5];
    // Front wheel due south of the goal; heading rotated so the goal sits at
    // angle psi from it.
    s.xf = 0.0;
    s.yf = -d;
    s.xb = s.xf - p_.wheelbase * std::sin(psi);
    s.yb = s.yf - p_.wheelbase * std::cos(psi);
    return s;
}

GridScheme bicycle_grid(int nodes_per_dim, bool swap_tilt_bounds) {
    if (nodes_per_dim < 2) throw std::invalid_argument("bicycle grid needs >= 2 nodes per dim");
    double omega_bound = 4.0 * kPi / 9.0;
    double theta_bound = kPi / 15.0;
    if (swap_tilt_bounds) std::swap(omega_bound, theta_bound);
    numvec lower = {-omega_bound, -2.0, -theta_bound, -0.5, -kPi, 10.0};
    numvec upper = {omega_bound, 2.0, theta_bound, 0.5, kPi, 1200.0};
    indvec resolution(6, nodes_per_dim);
    return GridScheme(std::move(lower), std::move(upper), std::move(resolution));
}

SamplerHandle bicycle_sampler(const BicycleSim& sim, int sample_count, uint64_t seed) {
    SamplerHandle handle;
    handle.sample_count = sample_count;
    handle.seed = seed;
    handle.step = [sim](std::span<const double> x, int action, int, Rng& rng,
                        std::span<double> next, double& reward, bool& terminal) {
        BicycleState s = sim.from_features(x);
        if (sim.fallen(s)) {
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = x[i];
            reward = sim.fall_reward();
            terminal = true;
            return;
        }
        if (sim.at_goal(s)) {
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = x[i];
            reward = 1.0;
            terminal = true;
            return;
        }
        BicycleOutcome out = sim.step(s, action, rng);
        sim.features(s, next);
        reward = out.reward;
        terminal = out.terminal();
    };
    return handle;
}

} // namespace gapcore
