#include "seqfill/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "seqfill/util.hpp"

namespace seqfill {

Eigen::VectorXd fixed_point_step(const GaussianMixture& gm, const Eigen::VectorXd& x) {
    if (!x.allFinite()) throw std::invalid_argument("fixed_point_step needs a finite point");
    const Eigen::VectorXd r = gm.responsibilities(x);
    const int d = gm.dim();
    const int k = gm.components();
    if (gm.covariance_kind() == CovarianceKind::SharedIsotropic)
        return gm.means().transpose() * r;
    Eigen::VectorXd num = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd den = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < d; ++j) {
            const double prec = r[i] / gm.variance(i, j);
            num[j] += prec * gm.means()(i, j);
            den[j] += prec;
        }
    }
    return num.cwiseQuotient(den);
}

double relative_gradient_norm(const GaussianMixture& gm, const Eigen::VectorXd& x) {
    const Eigen::VectorXd r = gm.responsibilities(x);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(gm.dim());
    for (int i = 0; i < gm.components(); ++i)
        for (int j = 0; j < gm.dim(); ++j)
            g[j] += r[i] * (gm.means()(i, j) - x[j]) / gm.variance(i, j);
    return g.norm();
}

ModeSet find_all_modes(const GaussianMixture& gm, const ModeSearchOptions& opts) {
    const int k = gm.components();
    std::vector<Eigen::VectorXd> ends(k);
    std::vector<char> converged(k, 0);

    parallel_for(k, [&](std::size_t start) {
        Eigen::VectorXd x = gm.means().row(static_cast<int>(start)).transpose();
        bool ok = false;
        for (int it = 0; it < opts.max_iter; ++it) {
            Eigen::VectorXd next = fixed_point_step(gm, x);
            const double step = (next - x).norm();
            x = std::move(next);
            if (step < opts.tol_step && relative_gradient_norm(gm, x) < opts.tol_grad) {
                ok = true;
                break;
            }
        }
        ends[start] = std::move(x);
        converged[start] = ok ? 1 : 0;
    });

    ModeSet result;
    for (int i = 0; i < k; ++i)
        if (!converged[i]) result.non_converged_starts.push_back(i);

    std::vector<double> ld(k);
    for (int i = 0; i < k; ++i) ld[i] = gm.log_density(ends[i]);

    // Sort candidate end points by descending density (ties by start index)
    // and keep the first representative of each merge-radius cluster.
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ld[a] > ld[b]; });

    const double radius =
        std::max(opts.merge_radius_factor * gm.variance_scale(), 1e-12);
    for (int idx : order) {
        bool duplicate = false;
        for (const auto& kept : result.points) {
            if ((kept - ends[idx]).norm() < radius) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            result.points.push_back(ends[idx]);
            result.log_densities.push_back(ld[idx]);
        }
    }
    return result;
}

Eigen::VectorXd global_mode(const GaussianMixture& gm, const ModeSearchOptions& opts) {
    return find_all_modes(gm, opts).points.front();
}

}  // namespace seqfill
