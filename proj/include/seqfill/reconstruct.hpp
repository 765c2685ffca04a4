#ifndef SEQFILL_RECONSTRUCT_HPP
#define SEQFILL_RECONSTRUCT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqfill/constraints.hpp"
#include "seqfill/mixture.hpp"
#include "seqfill/modes.hpp"

namespace seqfill {

// Sequence of N D-vectors with a boolean presence mask. Missing cells hold
// NaN and are never read; the mask is authoritative.
struct MaskedSequence {
    Eigen::MatrixXd values;  // N x D
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  // true = present
    std::optional<Eigen::VectorXd> timestamps;  // strictly increasing

    int steps() const { return static_cast<int>(values.rows()); }
    int dim() const { return static_cast<int>(values.cols()); }
    bool row_all_present(int n) const { return mask.row(n).all(); }
    bool row_all_missing(int n) const { return !mask.row(n).any(); }
    std::vector<bool> mask_row(int n) const;
    void validate() const;

    static MaskedSequence from_complete(Eigen::MatrixXd values,
                                        Eigen::Array<bool, Eigen::Dynamic,
                                                     Eigen::Dynamic> mask);
};

enum class Provenance { Observed, Mode, Mean, Centroid, Sample };

struct Candidate {
    Eigen::VectorXd value;  // full D-vector, present coordinates copied verbatim
    Provenance tag = Provenance::Mode;
};

// One layer of candidates per sequence step.
struct CandidateSet {
    std::vector<std::vector<Candidate>> layers;

    int steps() const { return static_cast<int>(layers.size()); }
    int layer_size(int n) const { return static_cast<int>(layers[n].size()); }
    std::vector<int> layer_sizes() const;
    void validate() const;  // every layer non-empty
};

struct CandidatePolicy {
    enum class Kind { Modes, ModesMeanIfUnimodal, Samples };
    Kind kind = Kind::Modes;
    int sample_count = 6;
    std::uint64_t seed = 0;
    bool all_centroids_when_all_missing = false;
    ModeSearchOptions mode_search;
    // Conditional components whose weight falls below this fraction of the
    // largest weight are dropped before the mode search. Such components
    // carry no numerically meaningful posterior mass, yet each could seed a
    // far-tail local maximum that derails the global constraint. 0 keeps
    // every component.
    double component_weight_floor = 1e-12;
};

// Conditions the mixture on the present coordinates of one masked row and
// applies the policy to produce full-vector candidates. step_index selects
// the per-step random substream for the sampling policy.
std::vector<Candidate> candidates_for_step(const GaussianMixture& gm,
                                           const Eigen::VectorXd& row_values,
                                           const std::vector<bool>& row_mask,
                                           const CandidatePolicy& policy,
                                           int step_index = 0);

CandidateSet build_candidates(const GaussianMixture& gm, const MaskedSequence& seq,
                              const CandidatePolicy& policy);

// Forward-recursion state of the shortest-path search: per layer and node,
// the best predecessor and the accumulated length.
struct PathTable {
    std::vector<std::vector<int>> parent;
    std::vector<std::vector<double>> length;
};

struct PathResult {
    Eigen::MatrixXd sequence;  // N x D
    double total_cost = 0.0;
    std::vector<int> chosen;   // candidate index per layer
};

// Exact minimiser over all layer paths. Edge costs come from continuity
// terms, node costs from quadratic/forward terms; a smoothness term switches
// the recursion to pair states, which keeps it exact. Ties break towards the
// lowest candidate index.
PathResult dp_reconstruct(const CandidateSet& cands, const ConstraintSpec& spec,
                          PathTable* table_out = nullptr);

struct GreedyStart {
    bool automatic = true;  // first layer of minimal size
    int layer = 0;
};

// Starts from the lowest-index node of the start layer and extends leftwards
// and rightwards along locally cheapest edges. The reported cost is the full
// objective of the resulting sequence, so it never beats dp_reconstruct.
PathResult greedy_reconstruct(const CandidateSet& cands, const ConstraintSpec& spec,
                              GreedyStart start = {});

// Maximal layer ranges [first, last] cut after every singleton layer. Running
// the DP per range (seeding each range with the frozen edge off the previous
// singleton) and concatenating reproduces the whole-graph optimum.
std::vector<std::pair<int, int>> split_at_singletons(const CandidateSet& cands);

// Chunked DP over split_at_singletons ranges; exact for specs without
// smoothness terms (those couple nodes across a singleton cut).
PathResult piecewise_dp(const CandidateSet& cands, const ConstraintSpec& spec);

enum class Method { Mean, GlobalMode, RandomMode, ClosestMode, GreedyMode, DpMode, MeanDp, SampDp };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct ReconstructOptions {
    std::uint64_t seed = 0;
    int sample_count = 6;  // sampdp
    bool all_centroids_when_all_missing = false;
    std::optional<Eigen::MatrixXd> truth;  // required by cmode
    ModeSearchOptions mode_search;
    double component_weight_floor = 1e-12;
};

struct Reconstruction {
    Eigen::MatrixXd sequence;
    double total_cost = 0.0;        // objective under the constraint spec
    std::vector<int> layer_sizes;   // nu_n
    std::vector<int> chosen;        // selected candidate per step
};

Reconstruction reconstruct(const GaussianMixture& gm, const MaskedSequence& seq,
                           Method method, const ConstraintSpec& spec,
                           const ReconstructOptions& opts = {});

double avg_squared_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& recon);

}  // namespace seqfill

#endif
