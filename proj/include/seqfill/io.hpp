#ifndef SEQFILL_IO_HPP
#define SEQFILL_IO_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "seqfill/experiments.hpp"
#include "seqfill/mixture.hpp"
#include "seqfill/reconstruct.hpp"
#include "seqfill/training.hpp"

namespace seqfill {

// Sequence CSV: one row per step, one column per coordinate, empty cell =
// missing. An optional leading column named "z" carries timestamps. The
// original cell tokens are kept so present values can be echoed
// byte-for-byte into the output.
struct SequenceCsv {
    MaskedSequence seq;
    std::vector<std::string> header;  // empty when the file had none
    bool has_timestamp_column = false;
    std::vector<std::vector<std::string>> raw_cells;  // value cells only
};

SequenceCsv read_sequence_csv(const std::string& path);

// Mirrors the input layout with every cell filled; present cells reuse the
// original tokens.
void write_sequence_csv(const std::string& path, const SequenceCsv& input,
                        const Eigen::MatrixXd& filled);

// Complete numeric matrix (training data); header row optional, missing
// cells rejected.
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header = {});

Mask read_mask_csv(const std::string& path);
void write_mask_csv(const std::string& path, const Mask& mask);

// Model files are JSON; the two kinds are distinguished by their fields
// (covariance_kind vs latent_dim).
void save_mixture_json(const std::string& path, const GaussianMixture& gm);
void save_gtm_json(const std::string& path, const GtmModel& gtm);

std::string mixture_to_json(const GaussianMixture& gm);
std::string gtm_to_json(const GtmModel& gtm);
GaussianMixture mixture_from_json(const std::string& text);
GtmModel gtm_from_json(const std::string& text);

struct LoadedModel {
    std::optional<GaussianMixture> mixture;
    std::optional<GtmModel> gtm;
    // The mixture view of whichever model was loaded.
    GaussianMixture as_mixture() const;
};

LoadedModel load_model_json(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace seqfill

#endif
