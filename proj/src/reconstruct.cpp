#include "seqfill/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqfill/util.hpp"

namespace seqfill {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Canonical left-to-right accumulation of a path objective. Both DP and the
// greedy search report costs in exactly this order, so their values are
// comparable bit for bit (and match an enumeration that sums the same way).
double path_cost(const CandidateSet& cands, const ConstraintSpec& spec,
                 const std::vector<int>& chosen) {
    const int n = cands.steps();
    double total = node_cost(spec, cands.layers[0][chosen[0]].value);
    for (int i = 1; i < n; ++i) {
        total += edge_cost(spec, i - 1, cands.layers[i - 1][chosen[i - 1]].value,
                           cands.layers[i][chosen[i]].value);
        total += node_cost(spec, cands.layers[i][chosen[i]].value);
        if (i >= 2)
            total += triple_cost(spec, cands.layers[i - 2][chosen[i - 2]].value,
                                 cands.layers[i - 1][chosen[i - 1]].value,
                                 cands.layers[i][chosen[i]].value);
    }
    return total;
}

Eigen::MatrixXd assemble_sequence(const CandidateSet& cands,
                                  const std::vector<int>& chosen) {
    const int n = cands.steps();
    const int d = static_cast<int>(cands.layers[0][0].value.size());
    Eigen::MatrixXd seq(n, d);
    for (int i = 0; i < n; ++i) seq.row(i) = cands.layers[i][chosen[i]].value.transpose();
    return seq;
}

PathResult result_from_chosen(const CandidateSet& cands, const ConstraintSpec& spec,
                              std::vector<int> chosen) {
    PathResult res;
    res.total_cost = path_cost(cands, spec, chosen);
    res.sequence = assemble_sequence(cands, chosen);
    res.chosen = std::move(chosen);
    return res;
}

// Plain forward recursion over single-node states; seeds layer `first` with
// `init` (used by the piecewise solver to resume after a frozen singleton).
PathResult dp_nodes(const CandidateSet& cands, const ConstraintSpec& spec, int first,
                    int last, const std::vector<double>& init, PathTable* table_out) {
    const int layers = last - first + 1;
    std::vector<std::vector<double>> length(layers);
    std::vector<std::vector<int>> parent(layers);
    length[0] = init;
    parent[0].assign(init.size(), -1);
    for (int n = 1; n < layers; ++n) {
        const auto& prev = cands.layers[first + n - 1];
        const auto& cur = cands.layers[first + n];
        length[n].resize(cur.size());
        parent[n].resize(cur.size());
        for (std::size_t i = 0; i < cur.size(); ++i) {
            double best = kInf;
            int best_j = 0;
            for (std::size_t j = 0; j < prev.size(); ++j) {
                const double c =
                    length[n - 1][j] + edge_cost(spec, first + n - 1, prev[j].value,
                                                 cur[i].value);
                if (c < best) {
                    best = c;
                    best_j = static_cast<int>(j);
                }
            }
            length[n][i] = best + node_cost(spec, cur[i].value);
            parent[n][i] = best_j;
        }
    }
    int end = 0;
    for (std::size_t i = 1; i < length[layers - 1].size(); ++i)
        if (length[layers - 1][i] < length[layers - 1][end]) end = static_cast<int>(i);

    PathResult res;
    res.total_cost = length[layers - 1][end];
    res.chosen.assign(layers, 0);
    res.chosen[layers - 1] = end;
    for (int n = layers - 1; n > 0; --n)
        res.chosen[n - 1] = parent[n][res.chosen[n]];
    if (table_out) {
        table_out->length = std::move(length);
        table_out->parent = std::move(parent);
    }
    return res;
}

// Pair-state recursion used when a smoothness term couples three
// consecutive layers; still an exact minimisation.
PathResult dp_pairs(const CandidateSet& cands, const ConstraintSpec& spec) {
    const int n = cands.steps();
    const auto& layers = cands.layers;
    const int s0 = static_cast<int>(layers[0].size());
    const int s1 = static_cast<int>(layers[1].size());
    // State (j, i): node j at the previous layer, node i at the current one.
    std::vector<std::vector<double>> length(n - 1);
    std::vector<std::vector<int>> parent(n - 1);
    length[0].resize(s0 * s1);
    parent[0].assign(s0 * s1, -1);
    for (int j = 0; j < s0; ++j)
        for (int i = 0; i < s1; ++i)
            length[0][j * s1 + i] = node_cost(spec, layers[0][j].value) +
                                    edge_cost(spec, 0, layers[0][j].value,
                                              layers[1][i].value) +
                                    node_cost(spec, layers[1][i].value);
    for (int stage = 1; stage < n - 1; ++stage) {
        const int cur = stage + 1;
        const int sp = static_cast<int>(layers[stage - 1].size());
        const int sj = static_cast<int>(layers[stage].size());
        const int si = static_cast<int>(layers[cur].size());
        length[stage].resize(sj * si);
        parent[stage].resize(sj * si);
        for (int j = 0; j < sj; ++j) {
            for (int i = 0; i < si; ++i) {
                double best = kInf;
                int best_k = 0;
                for (int k = 0; k < sp; ++k) {
                    const double c = length[stage - 1][k * sj + j] +
                                     triple_cost(spec, layers[stage - 1][k].value,
                                                 layers[stage][j].value,
                                                 layers[cur][i].value);
                    if (c < best) {
                        best = c;
                        best_k = k;
                    }
                }
                length[stage][j * si + i] =
                    best +
                    edge_cost(spec, stage, layers[stage][j].value, layers[cur][i].value) +
                    node_cost(spec, layers[cur][i].value);
                parent[stage][j * si + i] = best_k;
            }
        }
    }
    const int last = n - 2;
    int end = 0;
    for (std::size_t s = 1; s < length[last].size(); ++s)
        if (length[last][s] < length[last][end]) end = static_cast<int>(s);

    PathResult res;
    res.total_cost = length[last][end];
    res.chosen.assign(n, 0);
    const int si_last = static_cast<int>(layers[n - 1].size());
    res.chosen[n - 1] = end % si_last;
    res.chosen[n - 2] = end / si_last;
    for (int stage = last; stage >= 1; --stage) {
        const int state = res.chosen[stage] * static_cast<int>(layers[stage + 1].size()) +
                          res.chosen[stage + 1];
        res.chosen[stage - 1] = parent[stage][state];
    }
    res.sequence = assemble_sequence(cands, res.chosen);
    return res;
}

}  // namespace

std::vector<bool> MaskedSequence::mask_row(int n) const {
    std::vector<bool> row(dim());
    for (int d = 0; d < dim(); ++d) row[d] = mask(n, d);
    return row;
}

void MaskedSequence::validate() const {
    if (steps() < 1 || dim() < 1) throw std::invalid_argument("sequence must be non-empty");
    if (mask.rows() != values.rows() || mask.cols() != values.cols())
        throw std::invalid_argument("mask shape differs from value shape");
    for (int i = 0; i < steps(); ++i)
        for (int d = 0; d < dim(); ++d)
            if (mask(i, d) && !std::isfinite(values(i, d)))
                throw std::invalid_argument("present entry is not finite");
    if (timestamps) {
        if (timestamps->size() != steps())
            throw std::invalid_argument("timestamp count differs from step count");
        for (int i = 1; i < steps(); ++i)
            if (!((*timestamps)[i] > (*timestamps)[i - 1]))
                throw std::invalid_argument("timestamps must be strictly increasing");
    }
}

MaskedSequence MaskedSequence::from_complete(
    Eigen::MatrixXd values, Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask) {
    MaskedSequence seq;
    seq.values = std::move(values);
    seq.mask = std::move(mask);
    for (int i = 0; i < seq.steps(); ++i)
        for (int d = 0; d < seq.dim(); ++d)
            if (!seq.mask(i, d)) seq.values(i, d) = std::numeric_limits<double>::quiet_NaN();
    seq.validate();
    return seq;
}

std::vector<int> CandidateSet::layer_sizes() const {
    std::vector<int> sizes(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i)
        sizes[i] = static_cast<int>(layers[i].size());
    return sizes;
}

void CandidateSet::validate() const {
    if (layers.empty()) throw std::invalid_argument("candidate set has no layers");
    for (const auto& layer : layers)
        if (layer.empty()) throw std::invalid_argument("empty candidate layer");
}

namespace {

// Drops components whose weight is negligible relative to the largest one.
// The kept weights are renormalised; mode locations of the surviving bulk
// are unchanged up to the discarded mass.
GaussianMixture prune_components(const GaussianMixture& gm, double floor) {
    if (floor <= 0.0) return gm;
    const double cutoff = gm.weights().maxCoeff() * floor;
    std::vector<int> keep;
    for (int k = 0; k < gm.components(); ++k)
        if (gm.weights()[k] >= cutoff) keep.push_back(k);
    if (static_cast<int>(keep.size()) == gm.components()) return gm;
    Eigen::VectorXd weights(keep.size());
    Eigen::MatrixXd means(keep.size(), gm.dim());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        weights[i] = gm.weights()[keep[i]];
        means.row(i) = gm.means().row(keep[i]);
    }
    weights /= weights.sum();
    if (gm.covariance_kind() == CovarianceKind::SharedIsotropic)
        return GaussianMixture::shared_isotropic(std::move(weights), std::move(means),
                                                 gm.shared_variance());
    Eigen::MatrixXd vars(keep.size(), gm.dim());
    for (std::size_t i = 0; i < keep.size(); ++i)
        vars.row(i) = gm.variances().row(keep[i]);
    return GaussianMixture::diagonal(std::move(weights), std::move(means),
                                     std::move(vars));
}

}  // namespace

std::vector<Candidate> candidates_for_step(const GaussianMixture& gm,
                                           const Eigen::VectorXd& row_values,
                                           const std::vector<bool>& row_mask,
                                           const CandidatePolicy& policy,
                                           int step_index) {
    if (row_values.size() != gm.dim() ||
        static_cast<int>(row_mask.size()) != gm.dim())
        throw std::invalid_argument("row dimension differs from model dimension");

    const IndexSplit split = IndexSplit::from_mask_row(row_mask);
    if (split.missing.empty()) return {{row_values, Provenance::Observed}};

    auto embed = [&](const Eigen::VectorXd& fill, Provenance tag) {
        Candidate c;
        c.tag = tag;
        c.value = row_values;
        for (std::size_t p = 0; p < split.missing.size(); ++p)
            c.value[split.missing[p]] = fill[p];
        return c;
    };

    if (split.present.empty() && policy.all_centroids_when_all_missing) {
        std::vector<Candidate> out;
        out.reserve(gm.components());
        for (int k = 0; k < gm.components(); ++k)
            out.push_back(embed(gm.means().row(k).transpose(), Provenance::Centroid));
        return out;
    }

    Eigen::VectorXd observed(split.present.size());
    for (std::size_t p = 0; p < split.present.size(); ++p)
        observed[p] = row_values[split.present[p]];
    const GaussianMixture cond = prune_components(
        gm.condition(split, observed), policy.component_weight_floor);

    std::vector<Candidate> out;
    switch (policy.kind) {
        case CandidatePolicy::Kind::Modes: {
            const ModeSet modes = find_all_modes(cond, policy.mode_search);
            for (const auto& m : modes.points) out.push_back(embed(m, Provenance::Mode));
            break;
        }
        case CandidatePolicy::Kind::ModesMeanIfUnimodal: {
            const ModeSet modes = find_all_modes(cond, policy.mode_search);
            if (modes.size() == 1) {
                out.push_back(embed(cond.mean(), Provenance::Mean));
            } else {
                for (const auto& m : modes.points)
                    out.push_back(embed(m, Provenance::Mode));
            }
            break;
        }
        case CandidatePolicy::Kind::Samples: {
            if (policy.sample_count < 1)
                throw std::invalid_argument("sample count must be >= 1");
            Rng stream(policy.seed, 0x5a0 + static_cast<std::uint64_t>(step_index));
            const Eigen::MatrixXd draws =
                cond.sample(policy.sample_count, stream.next_u64());
            for (int s = 0; s < draws.rows(); ++s)
                out.push_back(embed(draws.row(s).transpose(), Provenance::Sample));
            break;
        }
    }
    return out;
}

CandidateSet build_candidates(const GaussianMixture& gm, const MaskedSequence& seq,
                              const CandidatePolicy& policy) {
    seq.validate();
    CandidateSet cands;
    cands.layers.resize(seq.steps());
    std::vector<std::exception_ptr> errors(seq.steps());
    parallel_for(seq.steps(), [&](std::size_t n) {
        try {
            cands.layers[n] = candidates_for_step(gm, seq.values.row(n).transpose(),
                                                  seq.mask_row(static_cast<int>(n)),
                                                  policy, static_cast<int>(n));
        } catch (...) {
            errors[n] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    cands.validate();
    return cands;
}

PathResult dp_reconstruct(const CandidateSet& cands, const ConstraintSpec& spec,
                          PathTable* table_out) {
    cands.validate();
    spec.validate();
    const int n = cands.steps();
    if (n == 1 || !spec.has_smoothness()) {
        std::vector<double> init(cands.layers[0].size());
        for (std::size_t i = 0; i < init.size(); ++i)
            init[i] = node_cost(spec, cands.layers[0][i].value);
        PathResult res = dp_nodes(cands, spec, 0, n - 1, init, table_out);
        res.sequence = assemble_sequence(cands, res.chosen);
        return res;
    }
    if (table_out) *table_out = {};  // pair-state table has no per-node form
    return dp_pairs(cands, spec);
}

PathResult greedy_reconstruct(const CandidateSet& cands, const ConstraintSpec& spec,
                              GreedyStart start) {
    cands.validate();
    spec.validate();
    const int n = cands.steps();
    int s0 = 0;
    if (start.automatic) {
        for (int i = 1; i < n; ++i)
            if (cands.layer_size(i) < cands.layer_size(s0)) s0 = i;
    } else {
        if (start.layer < 0 || start.layer >= n)
            throw std::invalid_argument("greedy start layer out of range");
        s0 = start.layer;
    }

    std::vector<int> chosen(n, 0);
    auto pick = [&](int layer, const Eigen::VectorXd& anchor, int edge) {
        const auto& nodes = cands.layers[layer];
        int best_i = 0;
        double best = kInf;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double c = edge_cost(spec, edge, anchor, nodes[i].value) +
                             node_cost(spec, nodes[i].value);
            if (c < best) {
                best = c;
                best_i = static_cast<int>(i);
            }
        }
        return best_i;
    };
    for (int i = s0 + 1; i < n; ++i)
        chosen[i] = pick(i, cands.layers[i - 1][chosen[i - 1]].value, i - 1);
    for (int i = s0 - 1; i >= 0; --i)
        chosen[i] = pick(i, cands.layers[i + 1][chosen[i + 1]].value, i);
    return result_from_chosen(cands, spec, std::move(chosen));
}

std::vector<std::pair<int, int>> split_at_singletons(const CandidateSet& cands) {
    cands.validate();
    std::vector<std::pair<int, int>> ranges;
    int start = 0;
    for (int i = 0; i < cands.steps(); ++i) {
        if (cands.layer_size(i) == 1) {
            ranges.emplace_back(start, i);
            start = i + 1;
        }
    }
    if (start < cands.steps()) ranges.emplace_back(start, cands.steps() - 1);
    return ranges;
}

PathResult piecewise_dp(const CandidateSet& cands, const ConstraintSpec& spec) {
    cands.validate();
    spec.validate();
    if (spec.has_smoothness())
        throw std::invalid_argument(
            "piecewise DP requires costs that do not span a singleton cut");
    const auto ranges = split_at_singletons(cands);
    PathResult res;
    res.chosen.reserve(cands.steps());
    double running = 0.0;
    for (const auto& [first, last] : ranges) {
        std::vector<double> init(cands.layers[first].size());
        for (std::size_t i = 0; i < init.size(); ++i) {
            init[i] = running;
            if (first > 0)
                init[i] += edge_cost(spec, first - 1,
                                     cands.layers[first - 1][0].value,
                                     cands.layers[first][i].value);
            init[i] += node_cost(spec, cands.layers[first][i].value);
        }
        PathResult part = dp_nodes(cands, spec, first, last, init, nullptr);
        running = part.total_cost;
        res.chosen.insert(res.chosen.end(), part.chosen.begin(), part.chosen.end());
    }
    res.total_cost = running;
    res.sequence = assemble_sequence(cands, res.chosen);
    return res;
}

Method parse_method(const std::string& name) {
    if (name == "mean") return Method::Mean;
    if (name == "gmode") return Method::GlobalMode;
    if (name == "rmode") return Method::RandomMode;
    if (name == "cmode") return Method::ClosestMode;
    if (name == "grmode") return Method::GreedyMode;
    if (name == "dpmode") return Method::DpMode;
    if (name == "meandp") return Method::MeanDp;
    if (name == "sampdp") return Method::SampDp;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Mean: return "mean";
        case Method::GlobalMode: return "gmode";
        case Method::RandomMode: return "rmode";
        case Method::ClosestMode: return "cmode";
        case Method::GreedyMode: return "grmode";
        case Method::DpMode: return "dpmode";
        case Method::MeanDp: return "meandp";
        case Method::SampDp: return "sampdp";
    }
    return "?";
}

namespace {

// Expands deferred pieces of the user spec against a concrete sequence:
// timestamp-driven step weights and the present/missing split of
// forward-mapping terms (which require a constant pattern).
ConstraintSpec resolve_spec(const ConstraintSpec& spec, const MaskedSequence& seq) {
    ConstraintSpec resolved = spec;
    for (auto& term : resolved.continuity) {
        if (term.step_weights) {
            if (term.step_weights->size() != seq.steps() - 1)
                throw std::invalid_argument("step weight count must be N-1");
            continue;
        }
        if (!term.use_timestamps) continue;
        if (!seq.timestamps)
            throw std::invalid_argument("constraint needs timestamps but none given");
        Eigen::VectorXd w(seq.steps() - 1);
        for (int i = 0; i + 1 < seq.steps(); ++i)
            w[i] = 1.0 / ((*seq.timestamps)[i + 1] - (*seq.timestamps)[i]);
        term.step_weights = std::move(w);
    }
    if (!resolved.forward.empty()) {
        for (int i = 1; i < seq.steps(); ++i)
            if ((seq.mask.row(i) != seq.mask.row(0)).any())
                throw std::invalid_argument(
                    "forward-mapping constraint requires constant pattern");
        const IndexSplit split = IndexSplit::from_mask_row(seq.mask_row(0));
        if (split.missing.empty())
            throw std::invalid_argument(
                "forward-mapping constraint needs missing coordinates");
        for (auto& term : resolved.forward) {
            if (term.present.empty() && term.missing.empty()) {
                term.present = split.present;
                term.missing = split.missing;
            }
        }
    }
    return resolved;
}

}  // namespace

Reconstruction reconstruct(const GaussianMixture& gm, const MaskedSequence& seq,
                           Method method, const ConstraintSpec& spec,
                           const ReconstructOptions& opts) {
    seq.validate();
    if (gm.dim() != seq.dim())
        throw std::invalid_argument("model dimension differs from sequence dimension");
    if (method == Method::ClosestMode) {
        if (!opts.truth) throw std::invalid_argument("cmode requires the true sequence");
        if (opts.truth->rows() != seq.steps() || opts.truth->cols() != seq.dim())
            throw std::invalid_argument("truth shape differs from sequence shape");
    }
    const ConstraintSpec resolved = resolve_spec(spec, seq);

    CandidatePolicy policy;
    policy.seed = opts.seed;
    policy.sample_count = opts.sample_count;
    policy.all_centroids_when_all_missing = opts.all_centroids_when_all_missing;
    policy.mode_search = opts.mode_search;
    policy.component_weight_floor = opts.component_weight_floor;
    switch (method) {
        case Method::MeanDp: policy.kind = CandidatePolicy::Kind::ModesMeanIfUnimodal; break;
        case Method::SampDp: policy.kind = CandidatePolicy::Kind::Samples; break;
        default: policy.kind = CandidatePolicy::Kind::Modes; break;
    }
    // gmode and rmode are defined through the modes of the (joint)
    // distribution, so the centroid fallback never applies to them.
    if (method == Method::GlobalMode || method == Method::RandomMode)
        policy.all_centroids_when_all_missing = false;

    Reconstruction rec;
    if (method == Method::Mean) {
        rec.sequence.resize(seq.steps(), seq.dim());
        rec.layer_sizes.assign(seq.steps(), 1);
        rec.chosen.assign(seq.steps(), 0);
        std::vector<std::exception_ptr> errors(seq.steps());
        parallel_for(seq.steps(), [&](std::size_t n) {
            try {
                const int i = static_cast<int>(n);
                const IndexSplit split = IndexSplit::from_mask_row(seq.mask_row(i));
                Eigen::VectorXd row = seq.values.row(i).transpose();
                if (!split.missing.empty()) {
                    Eigen::VectorXd observed(split.present.size());
                    for (std::size_t p = 0; p < split.present.size(); ++p)
                        observed[p] = row[split.present[p]];
                    const Eigen::VectorXd fill =
                        gm.condition(split, observed).mean();
                    for (std::size_t p = 0; p < split.missing.size(); ++p)
                        row[split.missing[p]] = fill[p];
                }
                rec.sequence.row(i) = row.transpose();
            } catch (...) {
                errors[n] = std::current_exception();
            }
        });
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
        rec.total_cost = total_cost(resolved, rec.sequence);
        return rec;
    }

    const CandidateSet cands = build_candidates(gm, seq, policy);
    rec.layer_sizes = cands.layer_sizes();

    switch (method) {
        case Method::GlobalMode: {
            // Layers are sorted by descending density, so the global mode is
            // always candidate 0.
            rec.chosen.assign(seq.steps(), 0);
            rec.sequence = assemble_sequence(cands, rec.chosen);
            break;
        }
        case Method::RandomMode: {
            rec.chosen.resize(seq.steps());
            for (int n = 0; n < seq.steps(); ++n) {
                Rng stream(opts.seed, 0x700 + static_cast<std::uint64_t>(n));
                rec.chosen[n] =
                    static_cast<int>(stream.index(cands.layer_size(n)));
            }
            rec.sequence = assemble_sequence(cands, rec.chosen);
            break;
        }
        case Method::ClosestMode: {
            rec.chosen.resize(seq.steps());
            for (int n = 0; n < seq.steps(); ++n) {
                const Eigen::VectorXd truth_row = opts.truth->row(n).transpose();
                int best = 0;
                double best_d = kInf;
                for (int i = 0; i < cands.layer_size(n); ++i) {
                    const double d = (cands.layers[n][i].value - truth_row).norm();
                    if (d < best_d) {
                        best_d = d;
                        best = i;
                    }
                }
                rec.chosen[n] = best;
            }
            rec.sequence = assemble_sequence(cands, rec.chosen);
            break;
        }
        case Method::GreedyMode: {
            PathResult res = greedy_reconstruct(cands, resolved);
            rec.sequence = std::move(res.sequence);
            rec.chosen = std::move(res.chosen);
            rec.total_cost = res.total_cost;
            return rec;
        }
        case Method::DpMode:
        case Method::MeanDp:
        case Method::SampDp: {
            PathResult res = dp_reconstruct(cands, resolved);
            rec.sequence = std::move(res.sequence);
            rec.chosen = std::move(res.chosen);
            rec.total_cost = res.total_cost;
            return rec;
        }
        default:
            throw std::logic_error("unhandled method");
    }
    rec.total_cost = path_cost(cands, resolved, rec.chosen);
    return rec;
}

double avg_squared_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& recon) {
    if (truth.rows() != recon.rows() || truth.cols() != recon.cols())
        throw std::invalid_argument("sequence shapes differ");
    double total = 0.0;
    for (int i = 0; i < truth.rows(); ++i)
        total += (truth.row(i) - recon.row(i)).squaredNorm();
    return total / static_cast<double>(truth.rows());
}

}  // namespace seqfill
