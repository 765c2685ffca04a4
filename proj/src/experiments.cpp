#include "seqfill/experiments.hpp"

#include <cmath>
#include <stdexcept>

#include "seqfill/util.hpp"

namespace seqfill {

double toy_forward(double x) { return x + 3.0 * std::sin(x); }

Eigen::MatrixXd toy_training_set(const ToySpec& spec) {
    if (spec.n_points < 1) throw std::invalid_argument("n_points must be >= 1");
    if (spec.noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
    Rng rng(spec.seed, /*stream=*/11);
    Eigen::MatrixXd out(spec.n_points, 2);
    for (int i = 0; i < spec.n_points; ++i) {
        const double x = rng.uniform(kToyDomainLo, kToyDomainHi);
        out(i, 0) = x + spec.noise_sigma * rng.normal();
        out(i, 1) = toy_forward(x) + spec.noise_sigma * rng.normal();
    }
    return out;
}

Eigen::MatrixXd toy_trajectory(int n, double noise_sigma, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("trajectory needs n >= 2");
    if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
    Rng rng(seed, /*stream=*/12);
    Eigen::MatrixXd out(n, 2);
    for (int i = 0; i < n; ++i) {
        const double x =
            kToyDomainLo + (kToyDomainHi - kToyDomainLo) * i / (n - 1);
        out(i, 0) = x;
        out(i, 1) = toy_forward(x);
        if (noise_sigma > 0.0) {
            out(i, 0) += noise_sigma * rng.normal();
            out(i, 1) += noise_sigma * rng.normal();
        }
    }
    return out;
}

bool ArmSpec::in_actuator_space(const Eigen::Vector2d& theta) const {
    return theta[0] >= theta1_lo && theta[0] <= theta1_hi &&
           theta[1] >= theta2_lo && theta[1] <= theta2_hi;
}

Eigen::Vector2d arm_forward(const Eigen::Vector2d& theta, const ArmSpec& arm) {
    return {arm.l1 * std::cos(theta[0]) + arm.l2 * std::cos(theta[0] + theta[1]),
            arm.l1 * std::sin(theta[0]) + arm.l2 * std::sin(theta[0] + theta[1])};
}

std::vector<Eigen::Vector2d> arm_inverse_analytic(const Eigen::Vector2d& x,
                                                  const ArmSpec& arm) {
    std::vector<Eigen::Vector2d> solutions;
    const double r2 = x.squaredNorm();
    double c = (r2 - arm.l1 * arm.l1 - arm.l2 * arm.l2) / (2.0 * arm.l1 * arm.l2);
    if (std::abs(c) > 1.0 + 1e-12) return solutions;  // outside the annulus
    c = std::clamp(c, -1.0, 1.0);
    const double elbow = std::acos(c);
    for (const double theta2_raw : {elbow, -elbow}) {
        const double theta1 = std::atan2(x[1], x[0]) -
                              std::atan2(arm.l2 * std::sin(theta2_raw),
                                         arm.l1 + arm.l2 * std::cos(theta2_raw));
        // Bring theta2 into [0, 2pi) before the actuator-space check.
        double theta2 = theta2_raw < 0.0 ? theta2_raw + 2.0 * M_PI : theta2_raw;
        const Eigen::Vector2d theta{theta1, theta2};
        if (!arm.in_actuator_space(theta)) continue;
        if ((arm_forward(theta, arm) - x).norm() >= 1e-9) continue;
        bool duplicate = false;
        for (const auto& s : solutions)
            if ((s - theta).norm() < 1e-12) duplicate = true;
        if (!duplicate) solutions.push_back(theta);
    }
    return solutions;
}

Eigen::MatrixXd arm_training_set(int n, double noise_sigma, std::uint64_t seed,
                                 const ArmSpec& arm) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
    Rng rng(seed, /*stream=*/13);
    Eigen::MatrixXd out(n, 4);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d theta{rng.uniform(arm.theta1_lo, arm.theta1_hi),
                                    rng.uniform(arm.theta2_lo, arm.theta2_hi)};
        const Eigen::Vector2d x = arm_forward(theta, arm);
        out(i, 0) = theta[0];
        out(i, 1) = theta[1];
        out(i, 2) = x[0];
        out(i, 3) = x[1];
    }
    if (noise_sigma > 0.0)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 4; ++j) out(i, j) += noise_sigma * rng.normal();
    return out;
}

Eigen::MatrixXd arm_trajectory(int n, double noise_sigma, std::uint64_t seed,
                               const ArmSpec& arm) {
    if (n < 2) throw std::invalid_argument("trajectory needs n >= 2");
    if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
    Rng rng(seed, /*stream=*/14);
    Eigen::MatrixXd out(n, 4);
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / (n - 1);
        // theta2 sweeps 0.55pi..1.45pi (through the fold at pi) while theta1
        // arcs inside its range; both elbow branches remain inside the
        // actuator space for the whole sweep.
        const Eigen::Vector2d theta{0.75 + 0.4 * std::sin(2.0 * M_PI * s),
                                    M_PI * (0.55 + 0.9 * s)};
        const Eigen::Vector2d x = arm_forward(theta, arm);
        out(i, 0) = theta[0];
        out(i, 1) = theta[1];
        out(i, 2) = x[0];
        out(i, 3) = x[1];
    }
    if (noise_sigma > 0.0)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 4; ++j) out(i, j) += noise_sigma * rng.normal();
    return out;
}

Mask make_mask_columns(int n, int d, const std::vector<int>& missing_cols) {
    if (n < 1 || d < 1) throw std::invalid_argument("mask shape must be positive");
    Mask mask = Mask::Constant(n, d, true);
    for (int c : missing_cols) {
        if (c < 0 || c >= d) throw std::invalid_argument("mask column out of range");
        mask.col(c).setConstant(false);
    }
    return mask;
}

Mask make_mask_random(int n, int d, double p, std::uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("mask shape must be positive");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must be in [0,1]");
    Rng rng(seed, /*stream=*/15);
    Mask mask(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) mask(i, j) = rng.uniform01() >= p;
    return mask;
}

}  // namespace seqfill
