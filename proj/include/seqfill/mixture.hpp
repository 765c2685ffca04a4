#ifndef SEQFILL_MIXTURE_HPP
#define SEQFILL_MIXTURE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace seqfill {

// Partition of the coordinate indices {0..D-1} into present and missing
// sets, both sorted and duplicate-free.
struct IndexSplit {
    std::vector<int> present;
    std::vector<int> missing;

    // Builds the split from the present set; everything else is missing.
    static IndexSplit from_present(int dim, std::vector<int> present_indices);
    // Builds the split from a boolean row (true = present).
    static IndexSplit from_mask_row(const std::vector<bool>& row);

    int dim() const { return static_cast<int>(present.size() + missing.size()); }
    void validate(int dim) const;
};

enum class CovarianceKind { SharedIsotropic, Diagonal };

// Gaussian mixture with either a single isotropic variance shared by all
// components or one diagonal variance vector per component. Immutable
// after construction; all operations are pure.
class GaussianMixture {
public:
    static GaussianMixture shared_isotropic(Eigen::VectorXd weights,
                                            Eigen::MatrixXd means,
                                            double variance);
    static GaussianMixture diagonal(Eigen::VectorXd weights,
                                    Eigen::MatrixXd means,
                                    Eigen::MatrixXd variances);

    int components() const { return static_cast<int>(means_.rows()); }
    int dim() const { return static_cast<int>(means_.cols()); }
    CovarianceKind covariance_kind() const { return kind_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::MatrixXd& means() const { return means_; }

    // Variance of component k along coordinate d.
    double variance(int k, int d) const {
        return kind_ == CovarianceKind::SharedIsotropic ? shared_variance_
                                                        : variances_(k, d);
    }
    double shared_variance() const;
    const Eigen::MatrixXd& variances() const;  // Diagonal kind only, K x D

    // Root-mean of all component variances; the natural length scale.
    double variance_scale() const;

    // ln p(t), evaluated with log-sum-exp so that densities far below the
    // double underflow threshold still produce a finite logarithm.
    double log_density(const Eigen::VectorXd& t) const;

    // ln w_k + ln N(t; mu_k, Sigma_k) for all k (unnormalised).
    Eigen::VectorXd log_joint_terms(const Eigen::VectorXd& t) const;

    // p(k|t), normalised in log space.
    Eigen::VectorXd responsibilities(const Eigen::VectorXd& t) const;

    // Mixture over the kept coordinates; weights unchanged.
    GaussianMixture marginal(const std::vector<int>& keep) const;

    // p(t_missing | t_present = observed). With an empty present set this
    // is the mixture itself. Throws std::domain_error("observation outside
    // model support") for non-finite observations.
    GaussianMixture condition(const IndexSplit& split,
                              const Eigen::VectorXd& observed) const;

    Eigen::VectorXd mean() const;

    // n independent draws, one per row; bit-reproducible per seed.
    Eigen::MatrixXd sample(int n, std::uint64_t seed) const;

private:
    GaussianMixture() = default;
    void validate() const;

    CovarianceKind kind_ = CovarianceKind::SharedIsotropic;
    Eigen::VectorXd weights_;    // K
    Eigen::MatrixXd means_;      // K x D
    Eigen::MatrixXd variances_;  // K x D (diagonal kind)
    double shared_variance_ = 1.0;
};

}  // namespace seqfill

#endif
