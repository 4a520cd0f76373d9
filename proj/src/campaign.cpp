#include "attrib/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "attrib/io.hpp"
#include "attrib/train.hpp"

namespace attrib {

Percentiles percentiles(std::vector<double> v) {
    Percentiles p;
    if (v.empty()) return p;
    std::sort(v.begin(), v.end());
    auto at = [&](double q) {
        const double pos = q * double(v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        const double frac = pos - double(lo);
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };
    p.median = at(0.5);
    p.p10 = at(0.10);
    p.p25 = at(0.25);
    p.p75 = at(0.75);
    p.p90 = at(0.90);
    return p;
}

namespace {

nlohmann::ordered_json percentiles_json(const Percentiles& p) {
    return {{"median", p.median}, {"p10", p.p10}, {"p25", p.p25},
            {"p75", p.p75}, {"p90", p.p90}};
}

// Disjoint (source, target) index pairs, sampled without replacement.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t pool,
                                                              int runs,
                                                              std::uint64_t seed) {
    if (pool < 2 * static_cast<std::size_t>(runs))
        throw std::invalid_argument("campaign: pool too small for " +
                                    std::to_string(runs) + " disjoint pairs");
    std::vector<std::size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (int r = 0; r < runs; ++r) pairs.emplace_back(idx[2 * r], idx[2 * r + 1]);
    return pairs;
}

nlohmann::ordered_json record_json(const RunRecord& r) {
    nlohmann::ordered_json j;
    j["run"] = r.run;
    j["source_index"] = r.source_index;
    j["target_index"] = r.target_index;
    j["failed"] = r.failed;
    if (r.failed) {
        j["error"] = r.error;
        return j;
    }
    j["map"] = {{"pcc", r.map_pcc}, {"ssim", r.map_ssim}, {"mse", r.map_mse}};
    j["image"] = {{"pcc", r.image_pcc}, {"ssim", r.image_ssim}, {"mse", r.image_mse}};
    j["output_delta_logits"] = r.output_delta_logits;
    j["output_delta_softmax"] = r.output_delta_softmax;
    j["class_preserved"] = r.class_preserved;
    return j;
}

}  // namespace

std::string CampaignSummary::to_json() const {
    nlohmann::ordered_json j;
    j["completed"] = completed;
    j["class_preserved_count"] = class_preserved_count;
    j["map_pcc"] = percentiles_json(map_pcc);
    j["map_mse"] = percentiles_json(map_mse);
    j["map_ssim"] = percentiles_json(map_ssim);
    j["image_mse"] = percentiles_json(image_mse);
    j["output_delta_softmax"] = percentiles_json(output_delta_softmax);
    auto runs = nlohmann::ordered_json::array();
    for (const auto& r : records) runs.push_back(record_json(r));
    j["runs"] = runs;
    return j.dump(2);
}

CampaignSummary run_attack_campaign(const Network& net_relu, const Dataset& pool,
                                    const CampaignConfig& cfg) {
    CampaignSummary sum;
    if (cfg.runs == 0) return sum;
    auto pairs = sample_pairs(pool.size(), cfg.runs, cfg.seed);

    std::vector<double> mp, mm, ms, im, od;
    for (int r = 0; r < cfg.runs; ++r) {
        RunRecord rec;
        rec.run = r;
        rec.source_index = pairs[r].first;
        rec.target_index = pairs[r].second;
        try {
            const Tensor& x = pool.images[rec.source_index];
            const Tensor& xt = pool.images[rec.target_index];
            const int k = predict(net_relu, x);
            const int kt = predict(net_relu, xt);
            ExplanationMap target = target_from_image(net_relu, xt, kt, cfg.spec);
            AttackConfig ac = cfg.attack;
            ac.seed = cfg.seed + static_cast<std::uint64_t>(r);
            AttackResult res = manipulate(net_relu, x, target, k, cfg.spec, ac,
                                          cfg.grid_rows, cfg.grid_cols);
            rec.map_pcc = res.final_map_similarity.pcc;
            rec.map_ssim = res.final_map_similarity.ssim;
            rec.map_mse = res.final_map_similarity.mse;
            rec.image_pcc = res.image_similarity.pcc;
            rec.image_ssim = res.image_similarity.ssim;
            rec.image_mse = res.image_similarity.mse;
            rec.output_delta_logits = res.output_delta_logits;
            rec.output_delta_softmax = res.output_delta_softmax;
            rec.class_preserved = res.class_preserved;
            mp.push_back(rec.map_pcc);
            mm.push_back(rec.map_mse);
            ms.push_back(rec.map_ssim);
            im.push_back(rec.image_mse);
            od.push_back(rec.output_delta_softmax);
            if (rec.class_preserved) ++sum.class_preserved_count;
            ++sum.completed;

            if (!cfg.out_dir.empty()) {
                io::write_atomic(cfg.out_dir + "/run_" + std::to_string(r) + ".json",
                                 record_json(rec).dump(2) + "\n");
                io::write_pgm(cfg.out_dir + "/run_" + std::to_string(r) + "_xadv.pgm",
                              res.x_adv.data, cfg.grid_rows, cfg.grid_cols);
            }
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
        sum.records.push_back(std::move(rec));
    }
    sum.map_pcc = percentiles(mp);
    sum.map_mse = percentiles(mm);
    sum.map_ssim = percentiles(ms);
    sum.image_mse = percentiles(im);
    sum.output_delta_softmax = percentiles(od);

    if (!cfg.out_dir.empty()) {
        std::string csv = "run,map_pcc,map_ssim,map_mse,image_mse,"
                          "output_delta_softmax,class_preserved,failed\n";
        std::ostringstream rows;
        rows.precision(17);
        for (const auto& r : sum.records)
            rows << r.run << "," << r.map_pcc << "," << r.map_ssim << "," << r.map_mse
                 << "," << r.image_mse << "," << r.output_delta_softmax << ","
                 << (r.class_preserved ? 1 : 0) << "," << (r.failed ? 1 : 0) << "\n";
        io::write_atomic(cfg.out_dir + "/campaign.csv", csv + rows.str());
        io::write_atomic(cfg.out_dir + "/campaign.json", sum.to_json() + "\n");
    }
    return sum;
}

std::string DefenseSummary::to_json() const {
    nlohmann::ordered_json j;
    j["plain_pcc"] = plain_pcc;
    j["beta_pcc"] = beta_pcc;
    j["smoothgrad_pcc"] = smoothgrad_pcc;
    j["median_plain"] = median_plain;
    j["median_beta"] = median_beta;
    j["median_smoothgrad"] = median_smoothgrad;
    j["recovery_beta"] = recovery_beta;
    j["recovery_pcc_original"] = recovery_pcc_original;
    j["recovery_pcc_target"] = recovery_pcc_target;
    return j.dump(2);
}

DefenseSummary run_defense_eval(const Network& net_relu, const Dataset& pool,
                                const DefenseConfig& cfg) {
    DefenseSummary sum;
    auto pairs = sample_pairs(pool.size(), cfg.runs, cfg.seed);
    Tensor first_manipulated;
    ExplanationMap first_target, first_original;
    int first_k = 0;

    for (int r = 0; r < cfg.runs; ++r) {
        const Tensor& x = pool.images[pairs[r].first];
        const Tensor& xt = pool.images[pairs[r].second];
        const int k = predict(net_relu, x);
        const int kt = predict(net_relu, xt);
        ExplanationMap target = target_from_image(net_relu, xt, kt, cfg.spec);

        // plain arm
        AttackConfig plain = AttackConfig::defaults_for(cfg.method);
        plain.seed = cfg.seed + static_cast<std::uint64_t>(r);
        AttackResult res_plain = manipulate(net_relu, x, target, k, cfg.spec, plain,
                                            cfg.grid_rows, cfg.grid_cols);
        sum.plain_pcc.push_back(res_plain.final_map_similarity.pcc);

        // beta-smoothed arm
        AttackConfig bsm = AttackConfig::defaults_for_beta_smoothed(cfg.method,
                                                                    cfg.beta_smooth);
        bsm.seed = plain.seed;
        AttackResult res_beta = manipulate(net_relu, x, target, k, cfg.spec, bsm,
                                           cfg.grid_rows, cfg.grid_cols);
        sum.beta_pcc.push_back(res_beta.final_map_similarity.pcc);

        // smoothgrad arm
        AttackConfig sg = AttackConfig::defaults_for(cfg.method);
        sg.smoothing = SmoothingSpec::smoothgrad(cfg.smoothgrad_samples,
                                                 cfg.smoothgrad_noise, plain.seed);
        sg.seed = plain.seed;
        AttackResult res_sg = manipulate(net_relu, x, target, k, cfg.spec, sg,
                                         cfg.grid_rows, cfg.grid_cols);
        sum.smoothgrad_pcc.push_back(res_sg.final_map_similarity.pcc);

        if (r == 0) {
            first_manipulated = res_plain.x_adv;
            first_target = target;
            first_original =
                normalize(pixel_relevance(explain(net_relu, x, k, cfg.spec), 1));
            first_k = k;
        }
    }
    sum.median_plain = percentiles(sum.plain_pcc).median;
    sum.median_beta = percentiles(sum.beta_pcc).median;
    sum.median_smoothgrad = percentiles(sum.smoothgrad_pcc).median;

    // recovery curve: beta-smoothed maps of the manipulated image vs the
    // original and the target explanation
    for (double b : cfg.recovery_betas) {
        ExplanationMap m = smooth_explain(net_relu, first_manipulated, first_k, cfg.spec,
                                          SmoothingSpec::beta_smoothing(b));
        ExplanationMap mn = normalize(pixel_relevance(m, 1));
        sum.recovery_beta.push_back(b);
        sum.recovery_pcc_original.push_back(pcc(mn.values.data, first_original.values.data));
        sum.recovery_pcc_target.push_back(pcc(mn.values.data, first_target.values.data));
    }

    if (!cfg.out_dir.empty()) {
        std::ostringstream scatter;
        scatter.precision(17);
        scatter << "run,plain_pcc,beta_pcc,smoothgrad_pcc\n";
        for (std::size_t i = 0; i < sum.plain_pcc.size(); ++i)
            scatter << i << "," << sum.plain_pcc[i] << "," << sum.beta_pcc[i] << ","
                    << sum.smoothgrad_pcc[i] << "\n";
        io::write_atomic(cfg.out_dir + "/defense_scatter.csv", scatter.str());

        std::ostringstream rec;
        rec.precision(17);
        rec << "beta,pcc_to_original,pcc_to_target\n";
        for (std::size_t i = 0; i < sum.recovery_beta.size(); ++i)
            rec << sum.recovery_beta[i] << "," << sum.recovery_pcc_original[i] << ","
                << sum.recovery_pcc_target[i] << "\n";
        io::write_atomic(cfg.out_dir + "/recovery_curve.csv", rec.str());
        io::write_atomic(cfg.out_dir + "/defense.json", sum.to_json() + "\n");
    }
    return sum;
}

std::string GeometryStudySummary::to_json() const {
    nlohmann::ordered_json j;
    j["theorem1"] = nlohmann::ordered_json::parse(theorem1.to_json());
    j["theorem2"] = nlohmann::ordered_json::parse(theorem2.to_json());
    j["contour_max_residual"] = contour_max_residual;
    j["contour_vertices"] = contour_vertices;
    return j.dump(2);
}

GeometryStudySummary run_geometry_study(const GeometryStudyConfig& cfg) {
    Network toy = geom::make_toy_network(cfg.seed, cfg.beta);
    geom::NetworkField field(toy, 0);

    Vec p0{0.25, 0.1};
    geom::LevelTrace tr = geom::trace_level_set_2d(field, p0, cfg.arc_budget, cfg.step);
    if (!tr.complete) throw std::runtime_error("geometry study: " + tr.error);

    GeometryStudySummary sum;
    sum.contour_vertices = tr.points.size();
    for (const auto& p : tr.points)
        sum.contour_max_residual =
            std::max(sum.contour_max_residual, std::fabs(field.value(p) - tr.level));

    const double ct = geom::curvature_bound_constant(toy);
    sum.theorem1 = geom::verify_theorem1(field, tr, cfg.beta, ct);

    std::mt19937_64 rng(cfg.seed + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Tensor w(3);
    for (double& v : w.data) v = u(rng);
    Tensor x(3);
    for (double& v : x.data) v = 0.2 * u(rng);
    sum.theorem2 = geom::verify_theorem2(w, 2.0, x, cfg.theorem2_samples, cfg.seed + 2);

    if (!cfg.out_dir.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "x,y,f,lambda\n";
        for (const auto& p : tr.points) {
            geom::CurvatureReport cr = geom::curvature_report(field, p);
            csv << p[0] << "," << p[1] << "," << field.value(p) << ","
                << (cr.curvatures.empty() ? 0.0 : cr.curvatures[0]) << "\n";
        }
        io::write_atomic(cfg.out_dir + "/contour.csv", csv.str());
        io::write_atomic(cfg.out_dir + "/theorem1.json", sum.theorem1.to_json() + "\n");
        io::write_atomic(cfg.out_dir + "/theorem2.json", sum.theorem2.to_json() + "\n");
        io::write_atomic(cfg.out_dir + "/geometry.json", sum.to_json() + "\n");

        // rasterized field over [-1,1]^2 plus a relu rasterization
        const std::size_t N = 200;
        Vec raster(N * N), raster_relu(N * N);
        Network toy_relu = toy.with_activation(Activation::relu());
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                Vec p{-1.0 + 2.0 * double(j) / double(N - 1),
                      1.0 - 2.0 * double(i) / double(N - 1)};
                raster[i * N + j] = field.value(p);
                raster_relu[i * N + j] =
                    forward(toy_relu, Tensor::from_vec(p)).logits[0];
            }
        io::write_pgm(cfg.out_dir + "/toy_field.pgm", raster, N, N);
        io::write_pgm(cfg.out_dir + "/toy_field_relu.pgm", raster_relu, N, N);
    }
    return sum;
}

}  // namespace attrib
