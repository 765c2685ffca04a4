#ifndef SEQFILL_CONSTRAINTS_HPP
#define SEQFILL_CONSTRAINTS_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace seqfill {

// Distance used inside constraint terms.
struct Norm {
    enum class Kind { Euclidean, SquaredEuclidean, WeightedEuclidean };
    Kind kind = Kind::Euclidean;
    Eigen::VectorXd weights;  // WeightedEuclidean only, strictly positive

    double operator()(const Eigen::VectorXd& v) const;
    static Norm euclidean() { return {}; }
    static Norm squared_euclidean() { return {Kind::SquaredEuclidean, {}}; }
    static Norm weighted_euclidean(Eigen::VectorXd w);
};

using ForwardMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Total polygonal-length style term over consecutive points. When
// use_timestamps is set, step n is weighted by 1/(z_{n+1} - z_n); explicit
// step_weights take precedence.
struct ContinuityTerm {
    Norm norm;
    double coef = 1.0;
    std::optional<Eigen::VectorXd> step_weights;  // length N-1
    bool use_timestamps = false;
};

struct SmoothnessTerm {
    Norm norm;
    double coef = 1.0;
};

struct QuadraticTerm {
    Eigen::MatrixXd q;   // symmetric PSD
    Eigen::VectorXd t0;
    double coef = 1.0;
};

// Penalises candidates whose present block disagrees with the forward image
// of their missing block; requires a missing-data pattern that is constant
// over the sequence.
struct ForwardMappingTerm {
    ForwardMap map;  // maps the missing block onto the present block
    Norm norm;
    double coef = 1.0;
    std::vector<int> present;  // coordinate indices of the present block
    std::vector<int> missing;
};

struct ConstraintSpec {
    std::vector<ContinuityTerm> continuity;
    std::vector<SmoothnessTerm> smoothness;
    std::vector<QuadraticTerm> quadratic;
    std::vector<ForwardMappingTerm> forward;

    static ConstraintSpec default_continuity();
    bool has_smoothness() const { return !smoothness.empty(); }
    bool has_node_terms() const { return !quadratic.empty() || !forward.empty(); }
    // At least one term, all coefficients >= 0, not all zero; Q symmetric.
    void validate() const;
};

double continuity_cost(const Eigen::MatrixXd& seq, const Norm& norm,
                       const std::optional<Eigen::VectorXd>& step_weights = {});
double smoothness_cost(const Eigen::MatrixXd& seq, const Norm& norm);
double quadratic_cost(const Eigen::MatrixXd& seq, const Eigen::MatrixXd& q,
                      const Eigen::VectorXd& t0);
double forward_mapping_cost(const Eigen::MatrixXd& seq_present,
                            const Eigen::MatrixXd& seq_missing,
                            const ForwardMap& map, const Norm& norm);

// Per-node cost (quadratic + forward terms) of one candidate vector.
double node_cost(const ConstraintSpec& spec, const Eigen::VectorXd& a);
// Continuity cost of the edge between steps `edge` and `edge`+1.
double edge_cost(const ConstraintSpec& spec, int edge, const Eigen::VectorXd& a,
                 const Eigen::VectorXd& b);
// Smoothness cost centred on `mid`.
double triple_cost(const ConstraintSpec& spec, const Eigen::VectorXd& prev,
                   const Eigen::VectorXd& mid, const Eigen::VectorXd& next);
// Full objective of a complete sequence.
double total_cost(const ConstraintSpec& spec, const Eigen::MatrixXd& seq);

// Parses {"terms":[{"kind":"continuity","norm":"euclidean","coef":1.0},...]}.
// Forward-mapping terms name their map; resolve_map turns that name into a
// callable (the CLI registers the built-in experiment mappings).
using MapResolver = std::function<ForwardMap(const std::string&)>;
ConstraintSpec parse_constraint_spec(const std::string& json_text,
                                     const MapResolver& resolve_map = {});

}  // namespace seqfill

#endif
