#ifndef SEQFILL_MODES_HPP
#define SEQFILL_MODES_HPP

#include <Eigen/Dense>
#include <vector>

#include "seqfill/mixture.hpp"

namespace seqfill {

// All local maxima of a mixture density, sorted by descending log-density.
struct ModeSet {
    std::vector<Eigen::VectorXd> points;
    std::vector<double> log_densities;
    // Centroid indices whose hill-climb hit the iteration cap before
    // meeting the tolerances; their end points are still merged in.
    std::vector<int> non_converged_starts;

    int size() const { return static_cast<int>(points.size()); }
};

struct ModeSearchOptions {
    double tol_step = 1e-8;
    double tol_grad = 1e-6;           // relative: ||grad p|| / p at a mode
    double merge_radius_factor = 1e-4;  // radius = factor * variance scale
    int max_iter = 500;
};

// One mean-shift step: x' = (sum_k r_k S_k^-1)^-1 sum_k r_k S_k^-1 mu_k with
// r_k = p(k|x). For a shared isotropic covariance this is the plain
// responsibility-weighted centroid average. Density never decreases along
// the iteration for Gaussian components.
Eigen::VectorXd fixed_point_step(const GaussianMixture& gm, const Eigen::VectorXd& x);

// ||grad p(x)|| / p(x); zero exactly at stationary points.
double relative_gradient_norm(const GaussianMixture& gm, const Eigen::VectorXd& x);

// Hill-climbs from every centroid, then merges converged points within the
// merge radius keeping the higher-density representative.
ModeSet find_all_modes(const GaussianMixture& gm, const ModeSearchOptions& opts = {});

// Highest-density mode.
Eigen::VectorXd global_mode(const GaussianMixture& gm, const ModeSearchOptions& opts = {});

}  // namespace seqfill

#endif
