#pragma once

#include "gapcore/grid.hpp"
#include "gapcore/qvi.hpp"
#include "gapcore/rng.hpp"

#include <array>
#include <span>

namespace gapcore {

/// Full simulator state of the Randlov-Alstrom bicycle. Tilt and handlebar
/// angles plus rates, and the world positions of both wheel contact points
/// (the goal sits at the origin of this frame). The six-dimensional feature
/// vector (omega, omega_dot, theta, theta_dot, psi, d) is derived from it.
struct BicycleState {
    double omega = 0.0;      // tilt angle from vertical (rad)
    double omega_dot = 0.0;  // tilt rate (rad/s)
    double theta = 0.0;      // handlebar angle (rad)
    double theta_dot = 0.0;  // handlebar rate (rad/s)
    double xf = 0.0, yf = 0.0; // front wheel contact
    double xb = 0.0, yb = 0.0; // back wheel contact
};

struct BicycleParams {
    double dt = 0.01;            // one simulator step = 1/100 s
    double speed = 10.0 / 3.6;   // m/s
    double gravity = 9.82;
    double cm_height = 0.94;           // h: centre of mass height
    double cm_to_rider = 0.30;         // dCM
    double front_to_cm = 0.66;         // c
    double wheelbase = 1.11;           // l
    double mass_cycle = 15.0;          // Mc
    double mass_tyre = 1.7;            // Md
    double mass_rider = 60.0;          // Mp
    double tyre_radius = 0.34;         // r
    double fall_angle = kPi / 15.0;   // |omega| beyond this ends the episode
    double handlebar_limit = 1.3963;   // 80 degrees
    double goal_radius = 10.0;
    double start_distance = 1000.0;    // goal is 1 km north of the start
    double noise_magnitude = 0.02;     // rider-displacement noise, +-2 cm
    double start_tilt_magnitude = 0.02; // start perturbation on omega (rad)
};

struct BicycleOutcome {
    double reward = 0.0;
    bool fallen = false;
    bool goal = false;
    bool terminal() const { return fallen || goal; }
};

class BicycleSim {
public:
    static constexpr int n_actions = 9; // {torque -2,0,2} x {displacement -0.02,0,0.02}
    static constexpr int n_features = 6;

    explicit BicycleSim(const BicycleParams& p = {});

    const BicycleParams& params() const { return p_; }

    static double action_torque(int action);       // N m
    static double action_displacement(int action);  // m

    /// Upright start 1 km south of the goal, heading at it, with a small
    /// random tilt perturbation.
    BicycleState initial_state(Rng& rng) const;

    bool fallen(const BicycleState& s) const;
    bool at_goal(const BicycleState& s) const;
    bool terminal(const BicycleState& s) const { return fallen(s) || at_goal(s); }

    /// Advances the physics by one dt in place. `noise` is the
    /// rider-displacement noise draw for this step (uniform in
    /// +-noise_magnitude in normal operation; pass 0 for deterministic
    /// stepping). Throws std::logic_error when called on a terminal state.
    BicycleOutcome step(BicycleState& s, int action, double noise) const;

    /// Convenience: draws the noise from rng and steps.
    BicycleOutcome step(BicycleState& s, int action, Rng& rng) const;

    /// (omega, omega_dot, theta, theta_dot, psi, d). psi is the signed angle
    /// between the heading and the goal direction, wrapped to [-pi, pi]; d
    /// the front-wheel distance to the goal centre.
    void features(const BicycleState& s, std::span<double> out) const;
    std::array<double, n_features> features(const BicycleState& s) const;

    /// Canonical simulator state with the given feature vector; position and
    /// heading are placed in the goal frame (the (psi, d) pair determines
    /// them up to a rotation the dynamics cannot observe).
    BicycleState from_features(std::span<const double> f) const;

    /// -c, the reward for falling: c = (3/4 pi^2 - 1) * 0.001.
    double fall_reward() const;
    /// (pi^2/4 - psi^2 - 1) * 0.001, the per-step heading shaping.
    double shaping_reward(double psi) const;

private:
    BicycleParams p_;
    double inertia_bike_;   // 13/3 Mc h^2 + Mp (h + dCM)^2
    double inertia_dc_;     // Md r^2
    double inertia_dv_;     // 3/2 Md r^2
    double inertia_dl_;     // 1/2 Md r^2
    double sigma_dot_;      // tyre angular velocity v / r
    double total_mass_;     // Mc + Mp
};

/// Standard feature bounds for gridding: omega +-4pi/9, omega_dot +-2,
/// theta +-pi/15, theta_dot +-0.5, psi +-pi, d [10, 1200]. The omega/theta ranges look swapped relative to
/// the simulator's fall and handlebar limits; `swap_tilt_bounds` applies the
/// corrected pairing for experimentation.
GridScheme bicycle_grid(int nodes_per_dim, bool swap_tilt_bounds = false);

/// Sampler over bicycle dynamics for the grid operators. Nodes inside a
/// terminal region act as absorbing boundary conditions: their draws return
/// the terminal reward with no continuation.
SamplerHandle bicycle_sampler(const BicycleSim& sim, int sample_count, uint64_t seed);

} // namespace gapcore
