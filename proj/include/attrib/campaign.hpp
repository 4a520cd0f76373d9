#pragma once

#include <optional>
#include <string>

#include "attrib/attack.hpp"
#include "attrib/data.hpp"
#include "attrib/geometry.hpp"

namespace attrib {

struct Percentiles {
    double median = 0.0, p10 = 0.0, p25 = 0.0, p75 = 0.0, p90 = 0.0;
};

Percentiles percentiles(std::vector<double> v);

struct CampaignConfig {
    Method method = Method::Gradient;
    MethodSpec spec;
    AttackConfig attack;
    int runs = 20;
    std::uint64_t seed = 0;
    std::size_t grid_rows = 28, grid_cols = 28;
    std::string out_dir;  // empty: no artifacts written
};

struct RunRecord {
    int run = 0;
    std::size_t source_index = 0, target_index = 0;
    bool failed = false;
    std::string error;
    double map_pcc = 0.0, map_ssim = 0.0, map_mse = 0.0;
    double image_pcc = 0.0, image_ssim = 0.0, image_mse = 0.0;
    double output_delta_logits = 0.0, output_delta_softmax = 0.0;
    bool class_preserved = false;
};

struct CampaignSummary {
    std::vector<RunRecord> records;
    Percentiles map_pcc, map_mse, map_ssim, image_mse, output_delta_softmax;
    int class_preserved_count = 0;
    int completed = 0;

    std::string to_json() const;
};

/// Seeded source/target pair sampling without replacement, one manipulate()
/// call per pair; per-run failures land in the summary without aborting.
CampaignSummary run_attack_campaign(const Network& net_relu, const Dataset& pool,
                                    const CampaignConfig& cfg);

struct DefenseConfig {
    Method method = Method::Gradient;
    MethodSpec spec;
    int runs = 20;
    std::uint64_t seed = 0;
    double beta_smooth = 0.8;
    int smoothgrad_samples = 10;
    // Desk-scale images need coarser noise than the reference experiments
    // for SmoothGrad to act as a defense; pilot-calibrated.
    double smoothgrad_noise = 0.3;
    std::size_t grid_rows = 28, grid_cols = 28;
    std::vector<double> recovery_betas = {100, 50, 30, 20, 10, 7, 5, 3, 2, 1};
    std::string out_dir;
};

struct DefenseSummary {
    // per-run target-map PCC for each arm
    std::vector<double> plain_pcc, beta_pcc, smoothgrad_pcc;
    double median_plain = 0.0, median_beta = 0.0, median_smoothgrad = 0.0;
    // recovery curve for the first manipulated image: one row per beta
    std::vector<double> recovery_beta, recovery_pcc_original, recovery_pcc_target;

    std::string to_json() const;
};

DefenseSummary run_defense_eval(const Network& net_relu, const Dataset& pool,
                                const DefenseConfig& cfg);

struct GeometryStudyConfig {
    std::uint64_t seed = 7;
    double beta = 1.0;
    double arc_budget = 2.0;
    double step = 0.005;
    std::size_t theorem2_samples = 1000000;
    std::string out_dir;
};

struct GeometryStudySummary {
    geom::Theorem1Report theorem1;
    geom::Theorem2Report theorem2;
    double contour_max_residual = 0.0;  // max |f - c| over trace vertices
    std::size_t contour_vertices = 0;

    std::string to_json() const;
};

GeometryStudySummary run_geometry_study(const GeometryStudyConfig& cfg);

}  // namespace attrib
