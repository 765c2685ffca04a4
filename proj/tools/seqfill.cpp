// seqfill: train joint density models, reconstruct masked sequences and
// reproduce the toy-curve / robot-arm experiments from the command line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqfill/experiments.hpp"
#include "seqfill/io.hpp"
#include "seqfill/modes.hpp"
#include "seqfill/reconstruct.hpp"
#include "seqfill/training.hpp"
#include "seqfill/util.hpp"

namespace {

using nlohmann::json;
using namespace seqfill;

// Exit codes: 0 success, 1 invalid arguments or hyperparameters, 2 file
// I/O or parse failure, 3 shape/dimension mismatch, 4 numeric domain error.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitShape = 3;
constexpr int kExitDomain = 4;

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ForwardMap builtin_forward_map(const std::string& name) {
    if (name == "toy")
        return [](const Eigen::VectorXd& missing) {
            Eigen::VectorXd out(1);
            out[0] = toy_forward(missing[0]);
            return out;
        };
    if (name == "arm")
        return [](const Eigen::VectorXd& missing) {
            const Eigen::Vector2d x = arm_forward({missing[0], missing[1]});
            Eigen::VectorXd out(2);
            out << x[0], x[1];
            return out;
        };
    return {};
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

ConstraintSpec load_constraint(const std::string& arg) {
    std::string text = arg;
    if (!arg.empty() && arg[0] == '@') text = read_file(arg.substr(1));
    return parse_constraint_spec(text, builtin_forward_map);
}

json args_echo(int argc, char** argv) {
    json a = json::array();
    for (int i = 0; i < argc; ++i) a.push_back(argv[i]);
    return a;
}

// ---------------------------------------------------------------- train ---

struct TrainArgs {
    std::string data_file, model_kind = "gm", out_file;
    TrainConfig cfg;
};

int cmd_train(const TrainArgs& a) {
    const Eigen::MatrixXd data = read_matrix_csv(a.data_file);
    if (a.model_kind == "gm") {
        auto fit = em_fit_isotropic(data, a.cfg.components, a.cfg);
        for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
        save_mixture_json(a.out_file, fit.model);
        std::cerr << "trained gm: K=" << a.cfg.components
                  << " iters=" << fit.log_likelihood.size()
                  << " ll=" << fit.log_likelihood.back() << "\n";
    } else if (a.model_kind == "gtm") {
        auto fit = gtm_fit(data, a.cfg);
        for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
        save_gtm_json(a.out_file, fit.model);
        std::cerr << "trained gtm: K=" << fit.model.grid_count()
                  << " F=" << fit.model.basis_count()
                  << " iters=" << fit.log_likelihood.size()
                  << " ll=" << fit.log_likelihood.back()
                  << " var=" << fit.model.variance << "\n";
    } else {
        throw std::invalid_argument("--model must be gm or gtm");
    }
    return kExitOk;
}

// ------------------------------------------------------------- generate ---

int cmd_generate_matrix(const Eigen::MatrixXd& data,
                        const std::vector<std::string>& header,
                        const std::string& out_file) {
    write_matrix_csv(out_file, data, header);
    return kExitOk;
}

// -------------------------------------------------------------- masking ---

int cmd_mask_apply(const std::string& data_file, const std::string& mask_file,
                   const std::string& out_file) {
    const SequenceCsv input = read_sequence_csv(data_file);
    const Mask mask = read_mask_csv(mask_file);
    if (mask.rows() != input.seq.steps() || mask.cols() != input.seq.dim())
        throw ShapeError("mask shape differs from data shape");
    std::ostringstream out;
    if (!input.header.empty()) {
        for (std::size_t c = 0; c < input.header.size(); ++c)
            out << (c ? "," : "") << input.header[c];
        out << "\n";
    }
    for (int r = 0; r < input.seq.steps(); ++r) {
        bool first = true;
        if (input.has_timestamp_column) {
            out << format_double((*input.seq.timestamps)[r]);
            first = false;
        }
        for (int c = 0; c < input.seq.dim(); ++c) {
            out << (first ? "" : ",");
            first = false;
            if (mask(r, c) && input.seq.mask(r, c)) out << input.raw_cells[r][c];
        }
        out << "\n";
    }
    write_file(out_file, out.str());
    return kExitOk;
}

// ---------------------------------------------------------- reconstruct ---

struct ReconstructArgs {
    std::string seq_file, model_file, method, out_file;
    std::string truth_file, constraint, mask_file, diagnostics_file, plot_prefix;
    ReconstructOptions opts;
    json echo;
};

void emit_plot_data(const std::string& prefix, const Eigen::MatrixXd& recon,
                    const CandidateSet* cands, const std::vector<int>& chosen) {
    {
        std::ostringstream csv;
        csv << "step,candidate,chosen,tag";
        for (int d = 0; d < recon.cols(); ++d) csv << ",c" << d;
        csv << "\n";
        auto tag_name = [](Provenance p) {
            switch (p) {
                case Provenance::Observed: return "observed";
                case Provenance::Mode: return "mode";
                case Provenance::Mean: return "mean";
                case Provenance::Centroid: return "centroid";
                case Provenance::Sample: return "sample";
            }
            return "?";
        };
        if (cands) {
            for (int n = 0; n < cands->steps(); ++n)
                for (int i = 0; i < cands->layer_size(n); ++i) {
                    csv << n << "," << i << "," << (chosen[n] == i ? 1 : 0) << ","
                        << tag_name(cands->layers[n][i].tag);
                    for (int d = 0; d < recon.cols(); ++d)
                        csv << "," << format_double(cands->layers[n][i].value[d]);
                    csv << "\n";
                }
        } else {
            for (int n = 0; n < recon.rows(); ++n) {
                csv << n << ",0,1,reconstruction";
                for (int d = 0; d < recon.cols(); ++d)
                    csv << "," << format_double(recon(n, d));
                csv << "\n";
            }
        }
        write_file(prefix + ".candidates.csv", csv.str());
    }
    if (recon.cols() < 2) return;
    // Simple SVG: candidate cloud plus the reconstructed polyline, first two
    // coordinates only.
    double xlo = recon.col(0).minCoeff(), xhi = recon.col(0).maxCoeff();
    double ylo = recon.col(1).minCoeff(), yhi = recon.col(1).maxCoeff();
    if (cands)
        for (const auto& layer : cands->layers)
            for (const auto& c : layer) {
                xlo = std::min(xlo, c.value[0]);
                xhi = std::max(xhi, c.value[0]);
                ylo = std::min(ylo, c.value[1]);
                yhi = std::max(yhi, c.value[1]);
            }
    const double pad_x = 0.05 * (xhi - xlo + 1e-9), pad_y = 0.05 * (yhi - ylo + 1e-9);
    xlo -= pad_x; xhi += pad_x; ylo -= pad_y; yhi += pad_y;
    const double w = 640, h = 640;
    auto px = [&](double x) { return (x - xlo) / (xhi - xlo) * w; };
    auto py = [&](double y) { return h - (y - ylo) / (yhi - ylo) * h; };
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
        << h << "' viewBox='0 0 " << w << " " << h << "'>\n";
    if (cands)
        for (const auto& layer : cands->layers)
            for (const auto& c : layer)
                svg << "<circle cx='" << px(c.value[0]) << "' cy='" << py(c.value[1])
                    << "' r='2.5' fill='#9aa7b8'/>\n";
    svg << "<polyline fill='none' stroke='#c0392b' stroke-width='1.5' points='";
    for (int n = 0; n < recon.rows(); ++n)
        svg << px(recon(n, 0)) << "," << py(recon(n, 1)) << " ";
    svg << "'/>\n</svg>\n";
    write_file(prefix + ".svg", svg.str());
}

int cmd_reconstruct(const ReconstructArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    const LoadedModel model = load_model_json(a.model_file);
    const GaussianMixture gm = model.as_mixture();

    SequenceCsv input = read_sequence_csv(a.seq_file);
    if (!a.mask_file.empty()) {
        const Mask mask = read_mask_csv(a.mask_file);
        if (mask.rows() != input.seq.steps() || mask.cols() != input.seq.dim())
            throw ShapeError("mask shape differs from sequence shape");
        for (int r = 0; r < input.seq.steps(); ++r)
            for (int c = 0; c < input.seq.dim(); ++c)
                if (!mask(r, c)) {
                    input.seq.mask(r, c) = false;
                    input.seq.values(r, c) = std::numeric_limits<double>::quiet_NaN();
                }
    }
    if (gm.dim() != input.seq.dim())
        throw ShapeError("model dimension differs from sequence dimension");

    const Method method = parse_method(a.method);
    ReconstructOptions opts = a.opts;
    if (!a.truth_file.empty()) {
        const SequenceCsv truth = read_sequence_csv(a.truth_file);
        if (!truth.seq.mask.all()) throw std::invalid_argument("truth must be complete");
        if (truth.seq.steps() != input.seq.steps() || truth.seq.dim() != input.seq.dim())
            throw ShapeError("truth shape differs from sequence shape");
        opts.truth = truth.seq.values;
    }
    const ConstraintSpec spec = a.constraint.empty()
                                    ? ConstraintSpec::default_continuity()
                                    : load_constraint(a.constraint);

    const Reconstruction rec = reconstruct(gm, input.seq, method, spec, opts);
    write_sequence_csv(a.out_file, input, rec.sequence);

    if (!a.plot_prefix.empty()) {
        if (method == Method::Mean) {
            emit_plot_data(a.plot_prefix, rec.sequence, nullptr, rec.chosen);
        } else {
            CandidatePolicy policy;
            policy.seed = opts.seed;
            policy.sample_count = opts.sample_count;
            policy.all_centroids_when_all_missing = opts.all_centroids_when_all_missing;
            policy.component_weight_floor = opts.component_weight_floor;
            if (method == Method::MeanDp)
                policy.kind = CandidatePolicy::Kind::ModesMeanIfUnimodal;
            else if (method == Method::SampDp)
                policy.kind = CandidatePolicy::Kind::Samples;
            const CandidateSet cands = build_candidates(gm, input.seq, policy);
            emit_plot_data(a.plot_prefix, rec.sequence, &cands, rec.chosen);
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    json diag;
    diag["command"] = a.echo;
    diag["method"] = a.method;
    diag["model_file"] = a.model_file;
    diag["model_hash"] = fnv1a_hex(read_file(a.model_file));
    diag["seed"] = opts.seed;
    diag["total_cost"] = rec.total_cost;
    diag["wall_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    json steps = json::array();
    for (int n = 0; n < input.seq.steps(); ++n)
        steps.push_back({{"n", n},
                         {"nu", rec.layer_sizes[n]},
                         {"chosen", rec.chosen[n]}});
    diag["steps"] = std::move(steps);
    const std::string diag_file =
        a.diagnostics_file.empty() ? a.out_file + ".diag.json" : a.diagnostics_file;
    write_file(diag_file, diag.dump(2) + "\n");
    return kExitOk;
}

// ------------------------------------------------------------- evaluate ---

struct EvalEntry {
    std::string label, method, file;
};

int cmd_evaluate(const std::string& truth_file, const std::vector<std::string>& recon_args,
                 const std::string& json_file, const std::string& table_file,
                 const json& echo) {
    const auto t0 = std::chrono::steady_clock::now();
    const SequenceCsv truth = read_sequence_csv(truth_file);
    if (!truth.seq.mask.all()) throw std::invalid_argument("truth must be complete");

    std::vector<EvalEntry> entries;
    for (const auto& arg : recon_args) {
        // [LABEL:]METHOD:FILE (FILE may contain ':' only on exotic paths).
        const std::size_t first = arg.find(':');
        if (first == std::string::npos)
            throw std::invalid_argument("--recon expects [label:]method:file, got " + arg);
        const std::size_t second = arg.find(':', first + 1);
        EvalEntry e;
        if (second == std::string::npos) {
            e.label = "all";
            e.method = arg.substr(0, first);
            e.file = arg.substr(first + 1);
        } else {
            e.label = arg.substr(0, first);
            e.method = arg.substr(first + 1, second - first - 1);
            e.file = arg.substr(second + 1);
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw std::invalid_argument("no --recon entries given");

    std::vector<std::string> labels, methods;
    std::map<std::pair<std::string, std::string>, double> errors;
    json recons = json::array();
    for (const auto& e : entries) {
        const SequenceCsv recon = read_sequence_csv(e.file);
        if (recon.seq.steps() != truth.seq.steps() || recon.seq.dim() != truth.seq.dim())
            throw ShapeError("reconstruction shape differs from truth: " + e.file);
        if (!recon.seq.mask.all())
            throw std::invalid_argument("reconstruction has missing cells: " + e.file);
        const double err = avg_squared_error(truth.seq.values, recon.seq.values);
        errors[{e.label, e.method}] = err;
        if (std::find(labels.begin(), labels.end(), e.label) == labels.end())
            labels.push_back(e.label);
        if (std::find(methods.begin(), methods.end(), e.method) == methods.end())
            methods.push_back(e.method);
        json entry = {{"label", e.label}, {"method", e.method}, {"file", e.file},
                      {"error", err}, {"file_hash", fnv1a_hex(read_file(e.file))}};
        try {
            entry["diagnostics"] = json::parse(read_file(e.file + ".diag.json"));
        } catch (...) {
            // no diagnostics next to this reconstruction
        }
        recons.push_back(std::move(entry));
    }

    // Fixed-width table, methods as columns and mask labels as rows.
    std::ostringstream table;
    const int wlab = 10, wcol = 12;
    table << std::string(wlab, ' ');
    for (const auto& m : methods)
        table << std::string(wcol - std::min<std::size_t>(m.size(), wcol), ' ') << m;
    table << "\n";
    for (const auto& l : labels) {
        table << l << std::string(wlab - std::min<std::size_t>(l.size(), wlab), ' ');
        for (const auto& m : methods) {
            auto it = errors.find({l, m});
            const std::string cell = it == errors.end() ? "-" : fixed4(it->second);
            table << std::string(wcol - std::min<std::size_t>(cell.size(), wcol), ' ')
                  << cell;
        }
        table << "\n";
    }
    std::cout << table.str();
    if (!table_file.empty()) write_file(table_file, table.str());

    const auto t1 = std::chrono::steady_clock::now();
    json report;
    report["command"] = echo;
    report["truth"] = truth_file;
    report["truth_hash"] = fnv1a_hex(read_file(truth_file));
    report["reconstructions"] = std::move(recons);
    report["wall_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    if (!json_file.empty()) write_file(json_file, report.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------- modes ---

int cmd_modes(const std::string& model_file, const std::string& condition,
              const std::string& out_file) {
    const GaussianMixture gm = load_model_json(model_file).as_mixture();
    GaussianMixture target = gm;
    if (!condition.empty()) {
        std::vector<int> dims;
        std::vector<double> values;
        std::stringstream ss(condition);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::size_t eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("bad --condition entry: " + item);
            std::size_t pos = 0;
            int dim;
            double value;
            try {
                dim = std::stoi(item.substr(0, eq), &pos);
                value = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw std::invalid_argument("bad --condition entry: " + item);
            }
            if (dim < 0 || dim >= gm.dim())
                throw std::invalid_argument("condition dimension out of range");
            dims.push_back(dim);
            values.push_back(value);
        }
        std::vector<int> order(dims.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return dims[a] < dims[b]; });
        std::vector<int> present;
        Eigen::VectorXd observed(dims.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            present.push_back(dims[order[i]]);
            observed[i] = values[order[i]];
        }
        target = gm.condition(IndexSplit::from_present(gm.dim(), present), observed);
    }
    const ModeSet modes = find_all_modes(target);
    json out;
    out["modes"] = json::array();
    for (int i = 0; i < modes.size(); ++i) {
        json point = json::array();
        for (int d = 0; d < modes.points[i].size(); ++d) point.push_back(modes.points[i][d]);
        out["modes"].push_back({{"point", std::move(point)},
                                {"log_density", modes.log_densities[i]}});
    }
    if (!modes.non_converged_starts.empty())
        out["non_converged_starts"] = modes.non_converged_starts;
    const std::string text = out.dump(2) + "\n";
    if (out_file.empty())
        std::cout << text;
    else
        write_file(out_file, text);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequence reconstruction with Gaussian-mixture conditional modes"};
    app.require_subcommand(1);
    const json echo = args_echo(argc, argv);

    // train
    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Fit a density model to a complete CSV");
    train_cmd->add_option("data", train.data_file, "training CSV")->required();
    train_cmd->add_option("--model", train.model_kind, "gm or gtm")->required();
    train_cmd->add_option("--k", train.cfg.components, "components / latent grid count")
        ->required();
    train_cmd->add_option("--latent-dim", train.cfg.latent_dim, "GTM latent dimension");
    train_cmd->add_option("--gtm-basis", train.cfg.basis_count, "GTM RBF count");
    train_cmd->add_option("--gtm-width-factor", train.cfg.width_factor,
                          "RBF width as multiple of centre separation");
    train_cmd->add_option("--ridge", train.cfg.ridge, "GTM weight regulariser");
    train_cmd->add_option("--seed", train.cfg.seed, "training seed");
    train_cmd->add_option("--max-iter", train.cfg.max_iter, "EM iteration cap");
    train_cmd->add_option("--rel-tol", train.cfg.rel_tol, "relative log-likelihood stop");
    train_cmd->add_option("--out", train.out_file, "output model JSON")->required();

    // generate
    auto* gen = app.add_subcommand("generate", "Write experiment data sets");
    gen->require_subcommand(1);
    struct GenArgs {
        int n = 0, rows = 0, cols = 0;
        double sigma = 0.0, p = 0.5;
        std::uint64_t seed = 0;
        bool seed_given = false;
        std::string out, kind = "random";
        std::vector<int> missing_cols;
    } g;
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", g.seed, "generator seed")
            ->each([&](const std::string&) { g.seed_given = true; });
    };
    auto* g_toy_train = gen->add_subcommand("toy-train", "toy curve training set");
    g_toy_train->add_option("--n", g.n)->required();
    g_toy_train->add_option("--sigma", g.sigma)->default_val(0.2);
    add_seed(g_toy_train);
    g_toy_train->add_option("--out", g.out)->required();
    auto* g_toy_traj = gen->add_subcommand("toy-traj", "toy curve trajectory");
    g_toy_traj->add_option("--n", g.n)->required();
    g_toy_traj->add_option("--sigma", g.sigma)->default_val(0.0);
    add_seed(g_toy_traj);
    g_toy_traj->add_option("--out", g.out)->required();
    auto* g_arm_train = gen->add_subcommand("arm-train", "robot arm training set");
    g_arm_train->add_option("--n", g.n)->required();
    g_arm_train->add_option("--sigma", g.sigma)->default_val(0.05);
    add_seed(g_arm_train);
    g_arm_train->add_option("--out", g.out)->required();
    auto* g_arm_traj = gen->add_subcommand("arm-traj", "robot arm trajectory");
    g_arm_traj->add_option("--n", g.n)->required();
    g_arm_traj->add_option("--sigma", g.sigma)->default_val(0.01);
    add_seed(g_arm_traj);
    g_arm_traj->add_option("--out", g.out)->required();
    auto* g_mask = gen->add_subcommand("mask", "presence mask");
    g_mask->add_option("--kind", g.kind, "fwd, inv or random")->required();
    g_mask->add_option("--missing-cols", g.missing_cols, "columns for fwd/inv masks");
    g_mask->add_option("--p", g.p, "missing probability for random masks");
    g_mask->add_option("--rows", g.rows)->required();
    g_mask->add_option("--cols", g.cols)->required();
    add_seed(g_mask);
    g_mask->add_option("--out", g.out)->required();

    // mask-apply
    std::string ma_data, ma_mask, ma_out;
    auto* mask_apply = app.add_subcommand("mask-apply", "Blank masked cells of a CSV");
    mask_apply->add_option("--data", ma_data)->required();
    mask_apply->add_option("--mask", ma_mask)->required();
    mask_apply->add_option("--out", ma_out)->required();

    // reconstruct
    ReconstructArgs rec;
    bool all_centroids = false;
    auto* rec_cmd = app.add_subcommand("reconstruct", "Fill missing cells of a sequence");
    rec_cmd->add_option("sequence", rec.seq_file, "masked sequence CSV")->required();
    rec_cmd->add_option("--model", rec.model_file)->required();
    rec_cmd->add_option("--method", rec.method,
                        "mean, gmode, rmode, cmode, grmode, dpmode, meandp or sampdp")
        ->required();
    rec_cmd->add_option("--truth", rec.truth_file, "complete CSV (cmode)");
    rec_cmd->add_option("--constraint", rec.constraint, "constraint JSON or @file");
    rec_cmd->add_option("--samples", rec.opts.sample_count, "samples per step (sampdp)");
    rec_cmd->add_option("--seed", rec.opts.seed, "seed for rmode/sampdp");
    rec_cmd->add_option("--component-weight-floor", rec.opts.component_weight_floor,
                        "drop conditional components below this relative weight");
    rec_cmd->add_flag("--all-centroids-when-all-missing", all_centroids,
                      "use every centroid when a step is fully missing");
    rec_cmd->add_option("--mask", rec.mask_file, "extra mask CSV to apply");
    rec_cmd->add_option("--out", rec.out_file, "reconstructed CSV")->required();
    rec_cmd->add_option("--diagnostics", rec.diagnostics_file,
                        "diagnostics JSON (default <out>.diag.json)");
    rec_cmd->add_option("--emit-plot-data", rec.plot_prefix,
                        "write <prefix>.candidates.csv and <prefix>.svg");

    // evaluate
    std::string ev_truth, ev_json, ev_table;
    std::vector<std::string> ev_recons;
    auto* eval_cmd = app.add_subcommand("evaluate", "Average squared error report");
    eval_cmd->add_option("--truth", ev_truth)->required();
    eval_cmd->add_option("--recon", ev_recons, "[label:]method:file")->required();
    eval_cmd->add_option("--json", ev_json, "JSON report file");
    eval_cmd->add_option("--table", ev_table, "text table file");

    // modes
    std::string mo_model, mo_condition, mo_out;
    auto* modes_cmd = app.add_subcommand("modes", "List density modes");
    modes_cmd->add_option("--model", mo_model)->required();
    modes_cmd->add_option("--condition", mo_condition, "\"dim=value,...\"");
    modes_cmd->add_option("--out", mo_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*train_cmd) return cmd_train(train);
        if (*mask_apply) return cmd_mask_apply(ma_data, ma_mask, ma_out);
        if (*rec_cmd) {
            rec.opts.all_centroids_when_all_missing = all_centroids;
            rec.echo = echo;
            return cmd_reconstruct(rec);
        }
        if (*eval_cmd) return cmd_evaluate(ev_truth, ev_recons, ev_json, ev_table, echo);
        if (*modes_cmd) return cmd_modes(mo_model, mo_condition, mo_out);
        if (*gen) {
            auto need_seed = [&](bool stochastic) {
                if (stochastic && !g.seed_given)
                    throw std::invalid_argument("--seed is required for stochastic output");
            };
            if (gen->got_subcommand("toy-train")) {
                need_seed(true);
                return cmd_generate_matrix(toy_training_set({g.n, g.sigma, g.seed}),
                                           {"t1", "t2"}, g.out);
            }
            if (gen->got_subcommand("toy-traj")) {
                need_seed(g.sigma > 0.0);
                return cmd_generate_matrix(toy_trajectory(g.n, g.sigma, g.seed),
                                           {"t1", "t2"}, g.out);
            }
            if (gen->got_subcommand("arm-train")) {
                need_seed(true);
                return cmd_generate_matrix(arm_training_set(g.n, g.sigma, g.seed),
                                           {"theta1", "theta2", "x1", "x2"}, g.out);
            }
            if (gen->got_subcommand("arm-traj")) {
                need_seed(g.sigma > 0.0);
                return cmd_generate_matrix(arm_trajectory(g.n, g.sigma, g.seed),
                                           {"theta1", "theta2", "x1", "x2"}, g.out);
            }
            if (gen->got_subcommand("mask")) {
                Mask mask;
                if (g.kind == "random") {
                    need_seed(true);
                    mask = make_mask_random(g.rows, g.cols, g.p, g.seed);
                } else if (g.kind == "fwd" || g.kind == "inv") {
                    if (g.missing_cols.empty())
                        throw std::invalid_argument(
                            "--missing-cols is required for fwd/inv masks");
                    mask = make_mask_columns(g.rows, g.cols, g.missing_cols);
                } else {
                    throw std::invalid_argument("--kind must be fwd, inv or random");
                }
                write_mask_csv(g.out, mask);
                return kExitOk;
            }
        }
        throw std::invalid_argument("no subcommand given");
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitShape;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
