#include "seqfill/io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "seqfill/util.hpp"

namespace seqfill {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) lines.push_back(line);
    }
    if (lines.empty()) throw std::runtime_error("empty file: " + path);
    return lines;
}

bool looks_like_header(const std::vector<std::string>& cells) {
    for (const auto& c : cells) {
        double v;
        if (!c.empty() && !parse_double(c, v)) return true;
    }
    return false;
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << contents;
    if (!out) throw std::runtime_error("write failed: " + path);
}

SequenceCsv read_sequence_csv(const std::string& path) {
    const auto lines = read_lines(path);
    SequenceCsv out;
    std::size_t first_row = 0;
    auto cells0 = split_csv_line(lines[0]);
    if (looks_like_header(cells0)) {
        out.header = cells0;
        out.has_timestamp_column = !cells0.empty() && cells0[0] == "z";
        first_row = 1;
    }
    if (first_row >= lines.size()) throw std::runtime_error("no data rows: " + path);

    const std::size_t n = lines.size() - first_row;
    std::size_t cols = split_csv_line(lines[first_row]).size();
    if (!out.header.empty() && out.header.size() != cols)
        throw std::runtime_error("header width differs from data width: " + path);
    const std::size_t value_cols = cols - (out.has_timestamp_column ? 1 : 0);
    if (value_cols < 1) throw std::runtime_error("no value columns: " + path);

    out.seq.values.resize(n, value_cols);
    out.seq.mask.resize(n, value_cols);
    Eigen::VectorXd ts(n);
    out.raw_cells.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto cells = split_csv_line(lines[first_row + r]);
        if (cells.size() != cols)
            throw std::runtime_error("ragged CSV row in " + path);
        std::size_t base = 0;
        if (out.has_timestamp_column) {
            if (!parse_double(cells[0], ts[r]))
                throw std::runtime_error("bad timestamp in " + path);
            base = 1;
        }
        out.raw_cells[r].assign(cells.begin() + base, cells.end());
        for (std::size_t c = 0; c < value_cols; ++c) {
            const std::string& cell = cells[base + c];
            if (cell.empty()) {
                out.seq.mask(r, c) = false;
                out.seq.values(r, c) = std::numeric_limits<double>::quiet_NaN();
            } else {
                double v;
                if (!parse_double(cell, v))
                    throw std::runtime_error("bad number '" + cell + "' in " + path);
                out.seq.mask(r, c) = true;
                out.seq.values(r, c) = v;
            }
        }
    }
    if (out.has_timestamp_column) out.seq.timestamps = ts;
    out.seq.validate();
    return out;
}

void write_sequence_csv(const std::string& path, const SequenceCsv& input,
                        const Eigen::MatrixXd& filled) {
    if (filled.rows() != input.seq.steps() || filled.cols() != input.seq.dim())
        throw std::invalid_argument("filled shape differs from input shape");
    std::ostringstream out;
    if (!input.header.empty()) {
        for (std::size_t c = 0; c < input.header.size(); ++c)
            out << (c ? "," : "") << input.header[c];
        out << "\n";
    }
    for (int r = 0; r < filled.rows(); ++r) {
        bool first = true;
        if (input.has_timestamp_column) {
            out << format_double((*input.seq.timestamps)[r]);
            first = false;
        }
        for (int c = 0; c < filled.cols(); ++c) {
            out << (first ? "" : ",");
            first = false;
            if (input.seq.mask(r, c))
                out << input.raw_cells[r][c];
            else
                out << format_double(filled(r, c));
        }
        out << "\n";
    }
    write_file(path, out.str());
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    const auto lines = read_lines(path);
    std::size_t first_row = looks_like_header(split_csv_line(lines[0])) ? 1 : 0;
    if (first_row >= lines.size()) throw std::runtime_error("no data rows: " + path);
    const std::size_t n = lines.size() - first_row;
    const std::size_t cols = split_csv_line(lines[first_row]).size();
    Eigen::MatrixXd values(n, cols);
    for (std::size_t r = 0; r < n; ++r) {
        auto cells = split_csv_line(lines[first_row + r]);
        if (cells.size() != cols) throw std::runtime_error("ragged CSV row in " + path);
        for (std::size_t c = 0; c < cols; ++c) {
            if (!parse_double(cells[c], values(r, c)))
                throw std::runtime_error("incomplete or non-numeric cell in " + path);
        }
    }
    return values;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header) {
    std::ostringstream out;
    if (!header.empty()) {
        if (static_cast<int>(header.size()) != values.cols())
            throw std::invalid_argument("header width differs from data width");
        for (std::size_t c = 0; c < header.size(); ++c)
            out << (c ? "," : "") << header[c];
        out << "\n";
    }
    for (int r = 0; r < values.rows(); ++r) {
        for (int c = 0; c < values.cols(); ++c)
            out << (c ? "," : "") << format_double(values(r, c));
        out << "\n";
    }
    write_file(path, out.str());
}

Mask read_mask_csv(const std::string& path) {
    const Eigen::MatrixXd m = read_matrix_csv(path);
    Mask mask(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            if (m(r, c) != 0.0 && m(r, c) != 1.0)
                throw std::runtime_error("mask cells must be 0 or 1: " + path);
            mask(r, c) = m(r, c) == 1.0;
        }
    return mask;
}

void write_mask_csv(const std::string& path, const Mask& mask) {
    std::ostringstream out;
    for (int r = 0; r < mask.rows(); ++r) {
        for (int c = 0; c < mask.cols(); ++c)
            out << (c ? "," : "") << (mask(r, c) ? '1' : '0');
        out << "\n";
    }
    write_file(path, out.str());
}

std::string mixture_to_json(const GaussianMixture& gm) {
    json j;
    j["version"] = 1;
    j["dim"] = gm.dim();
    j["covariance_kind"] = gm.covariance_kind() == CovarianceKind::SharedIsotropic
                               ? "shared_isotropic"
                               : "diagonal";
    j["weights"] = std::vector<double>(gm.weights().data(),
                                       gm.weights().data() + gm.components());
    json means = json::array();
    for (int k = 0; k < gm.components(); ++k) {
        json row = json::array();
        for (int d = 0; d < gm.dim(); ++d) row.push_back(gm.means()(k, d));
        means.push_back(std::move(row));
    }
    j["means"] = std::move(means);
    if (gm.covariance_kind() == CovarianceKind::SharedIsotropic) {
        j["variances"] = gm.shared_variance();
    } else {
        json vars = json::array();
        for (int k = 0; k < gm.components(); ++k) {
            json row = json::array();
            for (int d = 0; d < gm.dim(); ++d) row.push_back(gm.variances()(k, d));
            vars.push_back(std::move(row));
        }
        j["variances"] = std::move(vars);
    }
    return j.dump(2) + "\n";
}

GaussianMixture mixture_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error("unsupported model version");
    const int dim = j.at("dim").get<int>();
    const auto w = j.at("weights").get<std::vector<double>>();
    const int k = static_cast<int>(w.size());
    Eigen::VectorXd weights = Eigen::Map<const Eigen::VectorXd>(w.data(), k);
    const auto means_rows = j.at("means").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(means_rows.size()) != k)
        throw std::runtime_error("mean count differs from weight count");
    Eigen::MatrixXd means(k, dim);
    for (int i = 0; i < k; ++i) {
        if (static_cast<int>(means_rows[i].size()) != dim)
            throw std::runtime_error("mean length differs from dim");
        for (int d = 0; d < dim; ++d) means(i, d) = means_rows[i][d];
    }
    const std::string kind = j.at("covariance_kind").get<std::string>();
    if (kind == "shared_isotropic")
        return GaussianMixture::shared_isotropic(weights, means,
                                                 j.at("variances").get<double>());
    if (kind != "diagonal") throw std::runtime_error("unknown covariance kind: " + kind);
    const auto var_rows = j.at("variances").get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd vars(k, dim);
    for (int i = 0; i < k; ++i)
        for (int d = 0; d < dim; ++d) vars(i, d) = var_rows[i][d];
    return GaussianMixture::diagonal(weights, means, vars);
}

std::string gtm_to_json(const GtmModel& gtm) {
    json j;
    j["version"] = 1;
    j["latent_dim"] = gtm.latent_dim;
    j["grid_side"] = gtm.grid_side;
    j["basis_side"] = gtm.basis_side;
    j["basis_width"] = gtm.basis_width;
    json w = json::array();
    for (int r = 0; r < gtm.weight_matrix.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < gtm.weight_matrix.cols(); ++c)
            row.push_back(gtm.weight_matrix(r, c));
        w.push_back(std::move(row));
    }
    j["weight_matrix"] = std::move(w);
    j["variance"] = gtm.variance;
    return j.dump(2) + "\n";
}

GtmModel gtm_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error("unsupported model version");
    GtmModel gtm;
    gtm.latent_dim = j.at("latent_dim").get<int>();
    gtm.grid_side = j.at("grid_side").get<int>();
    gtm.basis_side = j.at("basis_side").get<int>();
    gtm.basis_width = j.at("basis_width").get<double>();
    gtm.variance = j.at("variance").get<double>();
    const auto rows = j.at("weight_matrix").get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw std::runtime_error("empty weight matrix");
    gtm.weight_matrix.resize(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw std::runtime_error("ragged weight matrix");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            gtm.weight_matrix(r, c) = rows[r][c];
    }
    gtm.validate();
    return gtm;
}

void save_mixture_json(const std::string& path, const GaussianMixture& gm) {
    write_file(path, mixture_to_json(gm));
}

void save_gtm_json(const std::string& path, const GtmModel& gtm) {
    write_file(path, gtm_to_json(gtm));
}

GaussianMixture LoadedModel::as_mixture() const {
    if (mixture) return *mixture;
    if (gtm) return gtm_to_mixture(*gtm);
    throw std::logic_error("empty model");
}

LoadedModel load_model_json(const std::string& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error("bad model JSON in " + path + ": " + e.what());
    }
    LoadedModel model;
    if (j.contains("covariance_kind"))
        model.mixture = mixture_from_json(text);
    else if (j.contains("latent_dim"))
        model.gtm = gtm_from_json(text);
    else
        throw std::runtime_error("unrecognised model file: " + path);
    return model;
}

}  // namespace seqfill
