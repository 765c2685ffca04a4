#include "seqfill/constraints.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace seqfill {

double Norm::operator()(const Eigen::VectorXd& v) const {
    switch (kind) {
        case Kind::Euclidean:
            return v.norm();
        case Kind::SquaredEuclidean:
            return v.squaredNorm();
        case Kind::WeightedEuclidean: {
            if (weights.size() != v.size())
                throw std::invalid_argument("norm weight length mismatch");
            return std::sqrt(weights.cwiseProduct(v.cwiseAbs2()).sum());
        }
    }
    return 0.0;
}

Norm Norm::weighted_euclidean(Eigen::VectorXd w) {
    if (w.size() == 0 || !(w.minCoeff() > 0.0))
        throw std::invalid_argument("norm weights must be strictly positive");
    return {Kind::WeightedEuclidean, std::move(w)};
}

ConstraintSpec ConstraintSpec::default_continuity() {
    ConstraintSpec spec;
    spec.continuity.push_back({Norm::euclidean(), 1.0, {}, false});
    return spec;
}

void ConstraintSpec::validate() const {
    std::size_t n_terms = continuity.size() + smoothness.size() + quadratic.size() + forward.size();
    if (n_terms == 0) throw std::invalid_argument("constraint spec needs at least one term");
    double coef_sum = 0.0;
    auto check_coef = [&](double c) {
        if (c < 0.0) throw std::invalid_argument("constraint coefficient must be >= 0");
        coef_sum += c;
    };
    for (const auto& t : continuity) check_coef(t.coef);
    for (const auto& t : smoothness) check_coef(t.coef);
    for (const auto& t : quadratic) {
        check_coef(t.coef);
        if (t.q.rows() != t.q.cols() || t.q.rows() != t.t0.size())
            throw std::invalid_argument("quadratic term shape mismatch");
        if ((t.q - t.q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("quadratic matrix must be symmetric");
    }
    for (const auto& t : forward) {
        check_coef(t.coef);
        if (!t.map) throw std::invalid_argument("forward-mapping term has no map");
    }
    if (coef_sum == 0.0) throw std::invalid_argument("all constraint coefficients are zero");
}

double continuity_cost(const Eigen::MatrixXd& seq, const Norm& norm,
                       const std::optional<Eigen::VectorXd>& step_weights) {
    if (!seq.allFinite()) throw std::invalid_argument("non-finite sequence value");
    const int n = static_cast<int>(seq.rows());
    if (step_weights && step_weights->size() != n - 1)
        throw std::invalid_argument("step weight count must be N-1");
    double total = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double w = step_weights ? (*step_weights)[i] : 1.0;
        total += w * norm(seq.row(i).transpose() - seq.row(i + 1).transpose());
    }
    return total;
}

double smoothness_cost(const Eigen::MatrixXd& seq, const Norm& norm) {
    if (!seq.allFinite()) throw std::invalid_argument("non-finite sequence value");
    const int n = static_cast<int>(seq.rows());
    double total = 0.0;
    for (int i = 1; i + 1 < n; ++i)
        total += norm(seq.row(i + 1).transpose() - 2.0 * seq.row(i).transpose() +
                      seq.row(i - 1).transpose());
    return total;
}

double quadratic_cost(const Eigen::MatrixXd& seq, const Eigen::MatrixXd& q,
                      const Eigen::VectorXd& t0) {
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("quadratic matrix must be symmetric");
    double total = 0.0;
    for (int i = 0; i < seq.rows(); ++i) {
        const Eigen::VectorXd d = seq.row(i).transpose() - t0;
        total += d.dot(q * d);
    }
    return total;
}

double forward_mapping_cost(const Eigen::MatrixXd& seq_present,
                            const Eigen::MatrixXd& seq_missing,
                            const ForwardMap& map, const Norm& norm) {
    if (seq_present.rows() != seq_missing.rows())
        throw std::invalid_argument("present/missing blocks must have equal length");
    // The missing block cancels between the two stacked vectors, so only
    // the present-block discrepancy contributes.
    double total = 0.0;
    for (int i = 0; i < seq_present.rows(); ++i)
        total += norm(seq_present.row(i).transpose() -
                      map(seq_missing.row(i).transpose()));
    return total;
}

double node_cost(const ConstraintSpec& spec, const Eigen::VectorXd& a) {
    double total = 0.0;
    for (const auto& t : spec.quadratic) {
        const Eigen::VectorXd d = a - t.t0;
        total += t.coef * d.dot(t.q * d);
    }
    for (const auto& t : spec.forward) {
        Eigen::VectorXd present(t.present.size()), missing(t.missing.size());
        for (std::size_t c = 0; c < t.present.size(); ++c) present[c] = a[t.present[c]];
        for (std::size_t c = 0; c < t.missing.size(); ++c) missing[c] = a[t.missing[c]];
        total += t.coef * t.norm(present - t.map(missing));
    }
    return total;
}

double edge_cost(const ConstraintSpec& spec, int edge, const Eigen::VectorXd& a,
                 const Eigen::VectorXd& b) {
    double total = 0.0;
    for (const auto& t : spec.continuity) {
        const double w = t.step_weights ? (*t.step_weights)[edge] : 1.0;
        total += t.coef * w * t.norm(a - b);
    }
    return total;
}

double triple_cost(const ConstraintSpec& spec, const Eigen::VectorXd& prev,
                   const Eigen::VectorXd& mid, const Eigen::VectorXd& next) {
    double total = 0.0;
    for (const auto& t : spec.smoothness) total += t.coef * t.norm(next - 2.0 * mid + prev);
    return total;
}

double total_cost(const ConstraintSpec& spec, const Eigen::MatrixXd& seq) {
    double total = 0.0;
    for (const auto& t : spec.continuity)
        total += t.coef * continuity_cost(seq, t.norm, t.step_weights);
    for (const auto& t : spec.smoothness) total += t.coef * smoothness_cost(seq, t.norm);
    for (const auto& t : spec.quadratic) total += t.coef * quadratic_cost(seq, t.q, t.t0);
    for (const auto& t : spec.forward) {
        Eigen::MatrixXd present(seq.rows(), t.present.size());
        Eigen::MatrixXd missing(seq.rows(), t.missing.size());
        for (std::size_t c = 0; c < t.present.size(); ++c)
            present.col(c) = seq.col(t.present[c]);
        for (std::size_t c = 0; c < t.missing.size(); ++c)
            missing.col(c) = seq.col(t.missing[c]);
        total += t.coef * forward_mapping_cost(present, missing, t.map, t.norm);
    }
    return total;
}

namespace {

Norm parse_norm(const nlohmann::json& j) {
    if (j.is_null()) return Norm::euclidean();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "euclidean") return Norm::euclidean();
        if (s == "squared_euclidean") return Norm::squared_euclidean();
        throw std::invalid_argument("unknown norm: " + s);
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "weighted_euclidean") {
        const auto w = j.at("weights").get<std::vector<double>>();
        return Norm::weighted_euclidean(
            Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()));
    }
    throw std::invalid_argument("unknown norm kind: " + kind);
}

}  // namespace

ConstraintSpec parse_constraint_spec(const std::string& json_text,
                                     const MapResolver& resolve_map) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad constraint JSON: ") + e.what());
    }
    ConstraintSpec spec;
    for (const auto& term : j.at("terms")) {
        const std::string kind = term.at("kind").get<std::string>();
        const double coef = term.value("coef", 1.0);
        const Norm norm = parse_norm(term.contains("norm") ? term["norm"] : nlohmann::json());
        if (kind == "continuity") {
            ContinuityTerm t{norm, coef, {}, term.value("use_timestamps", false)};
            if (term.contains("step_weights")) {
                const auto w = term["step_weights"].get<std::vector<double>>();
                t.step_weights = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
            }
            spec.continuity.push_back(std::move(t));
        } else if (kind == "smoothness") {
            spec.smoothness.push_back({norm, coef});
        } else if (kind == "quadratic") {
            const auto rows = term.at("q").get<std::vector<std::vector<double>>>();
            const auto t0v = term.at("t0").get<std::vector<double>>();
            Eigen::MatrixXd q(rows.size(), rows.empty() ? 0 : rows[0].size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != static_cast<std::size_t>(q.cols()))
                    throw std::invalid_argument("ragged quadratic matrix");
                for (std::size_t c = 0; c < rows[r].size(); ++c) q(r, c) = rows[r][c];
            }
            spec.quadratic.push_back(
                {std::move(q), Eigen::Map<const Eigen::VectorXd>(t0v.data(), t0v.size()),
                 coef});
        } else if (kind == "forward_mapping") {
            const std::string name = term.at("map").get<std::string>();
            if (!resolve_map)
                throw std::invalid_argument("no forward-map resolver registered");
            ForwardMap map = resolve_map(name);
            if (!map) throw std::invalid_argument("unknown forward map: " + name);
            spec.forward.push_back({std::move(map), norm, coef, {}, {}});
        } else {
            throw std::invalid_argument("unknown constraint kind: " + kind);
        }
    }
    spec.validate();
    return spec;
}

}  // namespace seqfill
