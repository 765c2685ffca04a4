#ifndef SEQFILL_EXPERIMENTS_HPP
#define SEQFILL_EXPERIMENTS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

namespace seqfill {

// --- 2-D toy curve -------------------------------------------------------

inline constexpr double kToyDomainLo = -2.0 * M_PI;
inline constexpr double kToyDomainHi = 2.0 * M_PI;

struct ToySpec {
    int n_points = 1000;
    double noise_sigma = 0.2;
    std::uint64_t seed = 0;
};

double toy_forward(double x);

// Unordered sample of (x, toy_forward(x)) + isotropic noise, x ~ U(domain).
Eigen::MatrixXd toy_training_set(const ToySpec& spec);

// n equispaced points traversing the domain, mapped through the curve,
// plus optional isotropic noise.
Eigen::MatrixXd toy_trajectory(int n, double noise_sigma, std::uint64_t seed);

// --- two-link planar arm --------------------------------------------------

struct ArmSpec {
    double l1 = 0.8;
    double l2 = 0.2;
    double theta1_lo = 0.3, theta1_hi = 1.2;
    double theta2_lo = M_PI / 2.0, theta2_hi = 3.0 * M_PI / 2.0;

    bool in_actuator_space(const Eigen::Vector2d& theta) const;
};

Eigen::Vector2d arm_forward(const Eigen::Vector2d& theta, const ArmSpec& arm = {});

// Analytic inverse kinematics: 0, 1 or 2 joint configurations inside the
// actuator space. Empty when the point is outside the reachable annulus.
std::vector<Eigen::Vector2d> arm_inverse_analytic(const Eigen::Vector2d& x,
                                                  const ArmSpec& arm = {});

// Rows (theta1, theta2, x1, x2): theta uniform on the actuator space,
// x its forward image, spherical noise added to all four coordinates.
Eigen::MatrixXd arm_training_set(int n, double noise_sigma, std::uint64_t seed,
                                 const ArmSpec& arm = {});

// Default evaluation trajectory: a smooth sweep through the actuator space
// that crosses the elbow-ambiguous region (theta2 passing through pi), so
// both inverse branches stay available along the way. Rows as in
// arm_training_set.
Eigen::MatrixXd arm_trajectory(int n, double noise_sigma, std::uint64_t seed,
                               const ArmSpec& arm = {});

// --- masks ----------------------------------------------------------------

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Marks the named columns missing at every row.
Mask make_mask_columns(int n, int d, const std::vector<int>& missing_cols);
// Marks each cell independently missing with probability p.
Mask make_mask_random(int n, int d, double p, std::uint64_t seed);

}  // namespace seqfill

#endif
