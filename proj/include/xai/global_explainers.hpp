#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "xai/predictor.hpp"

namespace xai {

struct PDPResult {
    std::string feature;
    std::vector<Cell> grid;                          // sorted ascending for continuous
    std::vector<std::vector<double>> means;          // grid x n_outputs
    std::vector<std::vector<std::vector<double>>> ice;  // retained rows x grid x n_outputs
    std::size_t ice_retained = 0;
};

struct ALEResult {
    std::string feature;
    std::vector<double> edges;                       // strictly increasing
    std::vector<std::vector<double>> effects;        // per edge x n_outputs, weighted mean 0
    std::vector<std::size_t> bin_counts;
};

struct SensitivityResult {
    std::vector<std::string> features;
    std::vector<double> mu;
    std::vector<double> mu_star;
    std::vector<double> sigma;
    std::size_t trajectories = 0;
    int levels = 0;
};

// Brute-force grid average: mean prediction over the background with the
// feature forced to each grid value. Grid = G quantiles (continuous) or all
// categories. No sampling; equals the double-loop oracle exactly.
PDPResult pdp(const TabularPredictor& predictor, const TabularBatch& background,
              const std::string& feature, std::size_t grid_size = 20,
              std::size_t ice_retained = 0);

ALEResult ale(const TabularPredictor& predictor, const TabularBatch& background,
              const std::string& feature, std::size_t n_bins = 10);

// Morris elementary-effects screening over a continuous hypercube.
SensitivityResult morris(const ModelHandle& model,
                         const std::vector<std::string>& feature_names,
                         const std::vector<std::pair<double, double>>& bounds,
                         std::size_t r_trajectories, int p_levels, std::uint64_t seed,
                         std::size_t output_index = 0);

nlohmann::json pdp_to_json(const PDPResult& r);
nlohmann::json ale_to_json(const ALEResult& r);
nlohmann::json sensitivity_to_json(const SensitivityResult& r);

}  // namespace xai
