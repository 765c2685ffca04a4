#include "seqfill/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqfill/util.hpp"

namespace seqfill {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(const Eigen::VectorXd& v) {
    double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

}  // namespace

IndexSplit IndexSplit::from_present(int dim, std::vector<int> present_indices) {
    IndexSplit split;
    split.present = std::move(present_indices);
    std::sort(split.present.begin(), split.present.end());
    std::vector<bool> seen(dim, false);
    for (int i : split.present) {
        if (i < 0 || i >= dim) throw std::invalid_argument("present index out of range");
        if (seen[i]) throw std::invalid_argument("duplicate present index");
        seen[i] = true;
    }
    for (int d = 0; d < dim; ++d)
        if (!seen[d]) split.missing.push_back(d);
    return split;
}

IndexSplit IndexSplit::from_mask_row(const std::vector<bool>& row) {
    IndexSplit split;
    for (int d = 0; d < static_cast<int>(row.size()); ++d)
        (row[d] ? split.present : split.missing).push_back(d);
    return split;
}

void IndexSplit::validate(int d) const {
    std::vector<bool> seen(d, false);
    auto check = [&](const std::vector<int>& idx) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= d) throw std::invalid_argument("index out of range");
            if (seen[idx[i]]) throw std::invalid_argument("index sets overlap");
            if (i > 0 && idx[i - 1] >= idx[i]) throw std::invalid_argument("indices not sorted");
            seen[idx[i]] = true;
        }
    };
    check(present);
    check(missing);
    if (static_cast<int>(present.size() + missing.size()) != d)
        throw std::invalid_argument("present and missing do not cover all coordinates");
}

GaussianMixture GaussianMixture::shared_isotropic(Eigen::VectorXd weights,
                                                  Eigen::MatrixXd means,
                                                  double variance) {
    GaussianMixture gm;
    gm.kind_ = CovarianceKind::SharedIsotropic;
    gm.weights_ = std::move(weights);
    gm.means_ = std::move(means);
    gm.shared_variance_ = variance;
    gm.validate();
    return gm;
}

GaussianMixture GaussianMixture::diagonal(Eigen::VectorXd weights,
                                          Eigen::MatrixXd means,
                                          Eigen::MatrixXd variances) {
    GaussianMixture gm;
    gm.kind_ = CovarianceKind::Diagonal;
    gm.weights_ = std::move(weights);
    gm.means_ = std::move(means);
    gm.variances_ = std::move(variances);
    gm.validate();
    return gm;
}

void GaussianMixture::validate() const {
    const int k = components();
    const int d = dim();
    if (k < 1 || d < 1) throw std::invalid_argument("mixture needs K >= 1 and dim >= 1");
    if (weights_.size() != k) throw std::invalid_argument("weight count != component count");
    if (weights_.minCoeff() < 0.0) throw std::invalid_argument("negative mixture weight");
    if (std::abs(weights_.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("mixture weights must sum to 1");
    if (kind_ == CovarianceKind::SharedIsotropic) {
        if (!(shared_variance_ > 0.0)) throw std::invalid_argument("variance must be positive");
    } else {
        if (variances_.rows() != k || variances_.cols() != d)
            throw std::invalid_argument("variance matrix shape mismatch");
        if (!(variances_.minCoeff() > 0.0))
            throw std::invalid_argument("variance must be positive");
    }
    if (!means_.allFinite()) throw std::invalid_argument("non-finite component mean");
}

double GaussianMixture::shared_variance() const {
    if (kind_ != CovarianceKind::SharedIsotropic)
        throw std::logic_error("mixture does not use a shared variance");
    return shared_variance_;
}

const Eigen::MatrixXd& GaussianMixture::variances() const {
    if (kind_ != CovarianceKind::Diagonal)
        throw std::logic_error("mixture does not use per-component variances");
    return variances_;
}

double GaussianMixture::variance_scale() const {
    if (kind_ == CovarianceKind::SharedIsotropic) return std::sqrt(shared_variance_);
    return std::sqrt(variances_.mean());
}

Eigen::VectorXd GaussianMixture::log_joint_terms(const Eigen::VectorXd& t) const {
    if (t.size() != dim()) throw std::invalid_argument("point dimension mismatch");
    const int k = components();
    const int d = dim();
    Eigen::VectorXd out(k);
    for (int i = 0; i < k; ++i) {
        double quad = 0.0, logdet = 0.0;
        for (int j = 0; j < d; ++j) {
            const double var = variance(i, j);
            const double diff = t[j] - means_(i, j);
            quad += diff * diff / var;
            logdet += std::log(var);
        }
        const double lw = weights_[i] > 0.0 ? std::log(weights_[i])
                                            : -std::numeric_limits<double>::infinity();
        out[i] = lw - 0.5 * (d * kLog2Pi + logdet + quad);
    }
    return out;
}

double GaussianMixture::log_density(const Eigen::VectorXd& t) const {
    return log_sum_exp(log_joint_terms(t));
}

Eigen::VectorXd GaussianMixture::responsibilities(const Eigen::VectorXd& t) const {
    Eigen::VectorXd lt = log_joint_terms(t);
    double lse = log_sum_exp(lt);
    Eigen::VectorXd r(lt.size());
    for (Eigen::Index i = 0; i < lt.size(); ++i) r[i] = std::exp(lt[i] - lse);
    return r;
}

GaussianMixture GaussianMixture::marginal(const std::vector<int>& keep) const {
    if (keep.empty()) throw std::invalid_argument("marginal needs at least one coordinate");
    std::vector<bool> seen(dim(), false);
    for (int i : keep) {
        if (i < 0 || i >= dim()) throw std::invalid_argument("marginal index out of range");
        if (seen[i]) throw std::invalid_argument("duplicate marginal index");
        seen[i] = true;
    }
    const int k = components();
    Eigen::MatrixXd means(k, keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) means.col(c) = means_.col(keep[c]);
    if (kind_ == CovarianceKind::SharedIsotropic)
        return shared_isotropic(weights_, std::move(means), shared_variance_);
    Eigen::MatrixXd vars(k, keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) vars.col(c) = variances_.col(keep[c]);
    return diagonal(weights_, std::move(means), std::move(vars));
}

GaussianMixture GaussianMixture::condition(const IndexSplit& split,
                                           const Eigen::VectorXd& observed) const {
    split.validate(dim());
    if (static_cast<int>(split.present.size()) != observed.size())
        throw std::invalid_argument("observed length != number of present coordinates");
    if (split.present.empty()) return *this;
    if (!observed.allFinite())
        throw std::domain_error("observation outside model support");
    if (split.missing.empty())
        throw std::invalid_argument("conditioning leaves no missing coordinates");

    const int k = components();
    Eigen::VectorXd logw(k);
    for (int i = 0; i < k; ++i) {
        double quad = 0.0, logdet = 0.0;
        for (std::size_t c = 0; c < split.present.size(); ++c) {
            const int d = split.present[c];
            const double var = variance(i, d);
            const double diff = observed[c] - means_(i, d);
            quad += diff * diff / var;
            logdet += std::log(var);
        }
        const double lw = weights_[i] > 0.0 ? std::log(weights_[i])
                                            : -std::numeric_limits<double>::infinity();
        logw[i] = lw - 0.5 * (static_cast<double>(split.present.size()) * kLog2Pi +
                              logdet + quad);
    }
    const double lse = log_sum_exp(logw);
    if (!std::isfinite(lse)) throw std::domain_error("observation outside model support");
    Eigen::VectorXd new_weights(k);
    for (int i = 0; i < k; ++i) new_weights[i] = std::exp(logw[i] - lse);
    new_weights /= new_weights.sum();  // absorb rounding so the simplex invariant holds

    Eigen::MatrixXd means(k, split.missing.size());
    for (std::size_t c = 0; c < split.missing.size(); ++c)
        means.col(c) = means_.col(split.missing[c]);
    if (kind_ == CovarianceKind::SharedIsotropic)
        return shared_isotropic(std::move(new_weights), std::move(means), shared_variance_);
    Eigen::MatrixXd vars(k, split.missing.size());
    for (std::size_t c = 0; c < split.missing.size(); ++c)
        vars.col(c) = variances_.col(split.missing[c]);
    return diagonal(std::move(new_weights), std::move(means), std::move(vars));
}

Eigen::VectorXd GaussianMixture::mean() const {
    return means_.transpose() * weights_;
}

Eigen::MatrixXd GaussianMixture::sample(int n, std::uint64_t seed) const {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    Rng rng(seed);
    const int k = components();
    const int d = dim();
    Eigen::MatrixXd out(n, d);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        int comp = k - 1;
        double cum = 0.0;
        for (int j = 0; j < k; ++j) {
            cum += weights_[j];
            if (u < cum) {
                comp = j;
                break;
            }
        }
        for (int j = 0; j < d; ++j)
            out(i, j) = means_(comp, j) + std::sqrt(variance(comp, j)) * rng.normal();
    }
    return out;
}

}  // namespace seqfill
