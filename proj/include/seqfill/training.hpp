#ifndef SEQFILL_TRAINING_HPP
#define SEQFILL_TRAINING_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "seqfill/mixture.hpp"

namespace seqfill {

struct TrainConfig {
    int max_iter = 200;
    double rel_tol = 1e-6;       // relative log-likelihood change stop
    std::uint64_t seed = 0;
    int components = 1;          // mixture components / latent grid count
    int latent_dim = 1;          // GTM only
    int basis_count = 9;         // GTM only; must be a latent_dim-th power
    double width_factor = 1.0;   // GTM basis width as multiple of centre separation
    double ridge = 0.0;          // GTM optional weight regulariser
};

template <typename Model>
struct FitResult {
    Model model;
    std::vector<double> log_likelihood;  // one entry per EM iteration
    std::vector<std::string> warnings;
};

// Plain EM for a mixture with per-component isotropic variances.
// Initialisation: means are K distinct data points chosen by seeded draw,
// variances the global data variance, weights uniform.
FitResult<GaussianMixture> em_fit_isotropic(const Eigen::MatrixXd& data, int k,
                                            const TrainConfig& cfg);

// Generative topographic mapping: a regular latent grid mapped through
// Gaussian RBFs into data space, inducing an equal-weight isotropic mixture.
struct GtmModel {
    int latent_dim = 1;
    int grid_side = 0;    // grid count = grid_side^latent_dim
    int basis_side = 0;   // RBF count = basis_side^latent_dim
    double basis_width = 0.0;
    Eigen::MatrixXd weight_matrix;  // D x (F+1), last column is the bias
    double variance = 1.0;          // shared isotropic

    int grid_count() const;
    int basis_count() const;
    int data_dim() const { return static_cast<int>(weight_matrix.rows()); }
    Eigen::MatrixXd latent_grid() const;    // K x L, regular grid in [-1,1]^L
    Eigen::MatrixXd basis_centres() const;  // F x L
    // Phi: K x (F+1) matrix of basis activations at the latent grid points.
    Eigen::MatrixXd basis_matrix() const;
    void validate() const;
};

FitResult<GtmModel> gtm_fit(const Eigen::MatrixXd& data, const TrainConfig& cfg);

// Equal-weight shared-isotropic mixture with means W * phi(x_k).
GaussianMixture gtm_to_mixture(const GtmModel& gtm);

}  // namespace seqfill

#endif
