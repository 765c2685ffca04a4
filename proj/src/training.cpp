#include "seqfill/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "seqfill/util.hpp"

namespace seqfill {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp_col(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

// Regular grid of side^dims points covering [-1,1]^dims, first axis fastest.
Eigen::MatrixXd regular_grid(int side, int dims) {
    const int count = static_cast<int>(std::llround(std::pow(side, dims)));
    Eigen::MatrixXd grid(count, dims);
    for (int i = 0; i < count; ++i) {
        int rem = i;
        for (int d = 0; d < dims; ++d) {
            const int idx = rem % side;
            rem /= side;
            grid(i, d) = side == 1 ? 0.0 : -1.0 + 2.0 * idx / (side - 1);
        }
    }
    return grid;
}

int integer_root(int count, int dims, const char* what) {
    const int side = static_cast<int>(std::llround(std::pow(count, 1.0 / dims)));
    for (int s = std::max(1, side - 1); s <= side + 1; ++s)
        if (static_cast<int>(std::llround(std::pow(s, dims))) == count) return s;
    throw std::invalid_argument(std::string(what) +
                                " must be a perfect latent_dim-th power");
}

}  // namespace

FitResult<GaussianMixture> em_fit_isotropic(const Eigen::MatrixXd& data, int k,
                                            const TrainConfig& cfg) {
    const int n = static_cast<int>(data.rows());
    const int d = static_cast<int>(data.cols());
    if (k < 1) throw std::invalid_argument("component count must be >= 1");
    if (n <= k) throw std::invalid_argument("need more data points than components");
    if (!data.allFinite()) throw std::invalid_argument("training data must be finite");
    if (cfg.max_iter < 1 || !(cfg.rel_tol > 0.0))
        throw std::invalid_argument("bad training config");

    std::vector<double> log_likelihood;
    std::vector<std::string> warnings;

    // Seeded draw of K distinct rows for the initial means.
    Rng rng(cfg.seed, /*stream=*/1);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.index(n - i));
        std::swap(order[i], order[j]);
    }
    Eigen::MatrixXd means(k, d);
    for (int i = 0; i < k; ++i) means.row(i) = data.row(order[i]);

    const Eigen::RowVectorXd data_mean = data.colwise().mean();
    const double global_var =
        (data.rowwise() - data_mean).squaredNorm() / (static_cast<double>(n) * d);
    const double var_floor = 1e-10 * global_var;
    Eigen::VectorXd variances = Eigen::VectorXd::Constant(k, global_var);
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(k, 1.0 / k);

    Eigen::MatrixXd log_terms(n, k);
    Eigen::MatrixXd resp(n, k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    bool warned_collapse = false;

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        // E step, in log space.
        parallel_for(n, [&](std::size_t i) {
            for (int j = 0; j < k; ++j) {
                const double quad =
                    (data.row(i) - means.row(j)).squaredNorm() / variances[j];
                log_terms(i, j) = std::log(weights[j]) -
                                  0.5 * (d * (kLog2Pi + std::log(variances[j])) + quad);
            }
        });
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            const double lse = log_sum_exp_col(log_terms.row(i).transpose());
            ll += lse;
            for (int j = 0; j < k; ++j) resp(i, j) = std::exp(log_terms(i, j) - lse);
        }
        log_likelihood.push_back(ll);

        // M step.
        const Eigen::VectorXd nk = resp.colwise().sum().transpose();
        weights = nk / static_cast<double>(n);
        means = resp.transpose() * data;
        means.array().colwise() /= nk.array();
        for (int j = 0; j < k; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += resp(i, j) * (data.row(i) - means.row(j)).squaredNorm();
            variances[j] = s / (nk[j] * d);
            if (variances[j] < var_floor) {
                variances[j] = var_floor;
                if (!warned_collapse) {
                    warnings.push_back("variance collapse clamped to floor");
                    warned_collapse = true;
                }
            }
        }

        if (iter > 0 && std::abs(ll - prev_ll) <= cfg.rel_tol * std::abs(prev_ll)) break;
        prev_ll = ll;
    }

    Eigen::MatrixXd var_matrix(k, d);
    for (int j = 0; j < k; ++j) var_matrix.row(j).setConstant(variances[j]);
    return {GaussianMixture::diagonal(weights, means, var_matrix),
            std::move(log_likelihood), std::move(warnings)};
}

int GtmModel::grid_count() const {
    return static_cast<int>(std::llround(std::pow(grid_side, latent_dim)));
}

int GtmModel::basis_count() const {
    return static_cast<int>(std::llround(std::pow(basis_side, latent_dim)));
}

Eigen::MatrixXd GtmModel::latent_grid() const { return regular_grid(grid_side, latent_dim); }

Eigen::MatrixXd GtmModel::basis_centres() const {
    return regular_grid(basis_side, latent_dim);
}

Eigen::MatrixXd GtmModel::basis_matrix() const {
    const Eigen::MatrixXd grid = latent_grid();
    const Eigen::MatrixXd centres = basis_centres();
    const int k = grid_count();
    const int f = basis_count();
    Eigen::MatrixXd phi(k, f + 1);
    const double denom = 2.0 * basis_width * basis_width;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < f; ++j)
            phi(i, j) = std::exp(-(grid.row(i) - centres.row(j)).squaredNorm() / denom);
        phi(i, f) = 1.0;
    }
    return phi;
}

void GtmModel::validate() const {
    if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
    if (grid_side < 1 || basis_side < 1)
        throw std::invalid_argument("grid and basis sides must be >= 1");
    if (!(basis_width > 0.0)) throw std::invalid_argument("basis width must be positive");
    if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
    if (weight_matrix.cols() != basis_count() + 1)
        throw std::invalid_argument("weight matrix must have F+1 columns");
}

FitResult<GtmModel> gtm_fit(const Eigen::MatrixXd& data, const TrainConfig& cfg) {
    const int n = static_cast<int>(data.rows());
    const int d = static_cast<int>(data.cols());
    const int l = cfg.latent_dim;
    if (l < 1 || l > d) throw std::invalid_argument("latent_dim must be in [1, D]");
    if (cfg.max_iter < 1 || !(cfg.rel_tol > 0.0))
        throw std::invalid_argument("bad training config");
    if (!data.allFinite()) throw std::invalid_argument("training data must be finite");

    GtmModel model;
    model.latent_dim = l;
    model.grid_side = integer_root(cfg.components, l, "grid count");
    model.basis_side = integer_root(cfg.basis_count, l, "basis count");
    const double separation =
        model.basis_side > 1 ? 2.0 / (model.basis_side - 1) : 2.0;
    model.basis_width = cfg.width_factor * separation;

    const int k = model.grid_count();
    const int f = model.basis_count();
    if (n <= f) throw std::invalid_argument("need more data points than basis functions");

    const Eigen::MatrixXd grid = model.latent_grid();
    const Eigen::MatrixXd phi = model.basis_matrix();  // K x (F+1)

    // Deterministic initialisation: map the latent grid onto the top-L
    // principal components, scaled so grid spread matches data spread,
    // then fit W to that target by least squares.
    const Eigen::RowVectorXd data_mean = data.colwise().mean();
    const Eigen::MatrixXd centred = data.rowwise() - data_mean;
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw std::runtime_error("PCA eigensolver failed");
    // Eigenvalues ascend; take the top L (and the next one for the noise floor).
    Eigen::MatrixXd target(k, d);
    for (int i = 0; i < k; ++i) target.row(i) = data_mean;
    for (int c = 0; c < l; ++c) {
        Eigen::VectorXd axis = eig.eigenvectors().col(d - 1 - c);
        // Fix the sign so initialisation does not depend on solver internals.
        int arg_max = 0;
        axis.cwiseAbs().maxCoeff(&arg_max);
        if (axis[arg_max] < 0.0) axis = -axis;
        const double eigval = std::max(eig.eigenvalues()[d - 1 - c], 0.0);
        const Eigen::VectorXd coord = grid.col(c);
        const double coord_sd =
            std::sqrt((coord.array() - coord.mean()).square().mean());
        const double scale = coord_sd > 0.0 ? std::sqrt(eigval) / coord_sd : 0.0;
        target += coord * (scale * axis.transpose());
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> init_solver(phi);
    model.weight_matrix = init_solver.solve(target).transpose();  // D x (F+1)

    Eigen::MatrixXd y = phi * model.weight_matrix.transpose();  // K x D grid images
    double init_var;
    {
        // Mean nearest-neighbour gap between grid images sets a lower bound
        // on a useful component width.
        double gap = 0.0;
        for (int i = 0; i < k; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j)
                if (j != i) best = std::min(best, (y.row(i) - y.row(j)).squaredNorm());
            gap += std::sqrt(best);
        }
        gap /= k;
        const double resid = l < d ? eig.eigenvalues()[d - 1 - l] : 0.0;
        init_var = std::max({resid, 0.25 * gap * gap, 1e-12});
    }
    model.variance = init_var;

    FitResult<GtmModel> fit;
    const double log_k = std::log(static_cast<double>(k));
    Eigen::MatrixXd resp(k, n);
    double prev_ll = -std::numeric_limits<double>::infinity();
    bool warned_singular = false;

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        // E step: responsibilities of grid points for each datum.
        const double var = model.variance;
        std::vector<double> point_ll(n);
        parallel_for(n, [&](std::size_t i) {
            Eigen::VectorXd lt(k);
            for (int j = 0; j < k; ++j) {
                const double quad = (data.row(i) - y.row(j)).squaredNorm() / var;
                lt[j] = -0.5 * (d * (kLog2Pi + std::log(var)) + quad);
            }
            const double lse = log_sum_exp_col(lt);
            point_ll[i] = lse - log_k;
            for (int j = 0; j < k; ++j) resp(j, i) = std::exp(lt[j] - lse);
        });
        double ll = 0.0;
        for (int i = 0; i < n; ++i) ll += point_ll[i];
        fit.log_likelihood.push_back(ll);

        // M step: weights from the (optionally ridge-stabilised) normal
        // equations, solved with a rank-revealing factorisation.
        const Eigen::VectorXd g = resp.rowwise().sum();
        Eigen::MatrixXd a = phi.transpose() * g.asDiagonal() * phi;
        if (cfg.ridge > 0.0)
            a += cfg.ridge * Eigen::MatrixXd::Identity(f + 1, f + 1);
        const Eigen::MatrixXd b = phi.transpose() * (resp * data);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> solver(a);
        if (solver.rank() < f + 1 && !warned_singular) {
            fit.warnings.push_back("singular M-step system; least-squares solution used");
            warned_singular = true;
        }
        model.weight_matrix = solver.solve(b).transpose();
        y = phi * model.weight_matrix.transpose();

        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j)
                s += resp(j, i) * (data.row(i) - y.row(j)).squaredNorm();
        model.variance = std::max(s / (static_cast<double>(n) * d), 1e-300);

        if (iter > 0 && std::abs(ll - prev_ll) <= cfg.rel_tol * std::abs(prev_ll)) break;
        prev_ll = ll;
    }

    model.validate();
    fit.model = std::move(model);
    return fit;
}

GaussianMixture gtm_to_mixture(const GtmModel& gtm) {
    gtm.validate();
    const int k = gtm.grid_count();
    const Eigen::MatrixXd means = gtm.basis_matrix() * gtm.weight_matrix.transpose();
    return GaussianMixture::shared_isotropic(
        Eigen::VectorXd::Constant(k, 1.0 / k), means, gtm.variance);
}

}  // namespace seqfill
