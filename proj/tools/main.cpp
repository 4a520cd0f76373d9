#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "attrib/campaign.hpp"
#include "attrib/io.hpp"
#include "attrib/train.hpp"

namespace fs = std::filesystem;
using namespace attrib;

namespace {

std::vector<std::size_t> parse_arch(const std::string& s) {
    std::vector<std::size_t> sizes;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) sizes.push_back(std::stoul(tok));
    return sizes;
}

MethodSpec make_spec(Method m, int ig_steps, const Network& net, const Dataset& data,
                     std::size_t pattern_subset) {
    MethodSpec spec;
    spec.kind = m;
    spec.ig_steps = ig_steps;
    if (m == Method::PatternAttribution) {
        Dataset sub;
        sub.rows = data.rows;
        sub.cols = data.cols;
        sub.num_classes = data.num_classes;
        const std::size_t n = std::min(pattern_subset, data.size());
        for (std::size_t i = 0; i < n; ++i) {
            sub.images.push_back(data.images[i]);
            sub.labels.push_back(data.labels[i]);
        }
        spec.patterns = learn_patterns(net, sub);
    }
    return spec;
}

Vec read_csv_row(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open " + path);
    std::string line;
    std::getline(f, line);
    Vec v;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"explanation-map attack, defense and curvature toolkit"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic IDX digit dataset");
    std::string synth_dir = "data";
    std::size_t synth_train = 6000, synth_test = 1000;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out-dir", synth_dir);
    synth->add_option("--train-count", synth_train);
    synth->add_option("--test-count", synth_test);
    synth->add_option("--seed", synth_seed);

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train a dense network");
    std::string tr_images, tr_labels, tr_test_images, tr_test_labels, tr_out = "model.json";
    std::string tr_arch = "784,128,64,10";
    TrainConfig tr_cfg;
    train_cmd->add_option("--images", tr_images)->required();
    train_cmd->add_option("--labels", tr_labels)->required();
    train_cmd->add_option("--test-images", tr_test_images);
    train_cmd->add_option("--test-labels", tr_test_labels);
    train_cmd->add_option("--arch", tr_arch, "comma-separated layer sizes");
    train_cmd->add_option("--epochs", tr_cfg.epochs);
    train_cmd->add_option("--lr", tr_cfg.lr);
    train_cmd->add_option("--batch-size", tr_cfg.batch_size);
    train_cmd->add_option("--seed", tr_cfg.seed);
    train_cmd->add_option("--out", tr_out);

    // ---- explain ----
    auto* explain_cmd = app.add_subcommand("explain", "explanation map for one image");
    std::string ex_model, ex_images, ex_labels, ex_method = "gradient", ex_dir = "out";
    std::string ex_smooth = "none";
    std::size_t ex_index = 0;
    int ex_ig_steps = 30, ex_sg_samples = 10;
    double ex_beta = 0.8, ex_noise = 0.1;
    std::uint64_t ex_seed = 0;
    explain_cmd->add_option("--model", ex_model)->required();
    explain_cmd->add_option("--images", ex_images)->required();
    explain_cmd->add_option("--labels", ex_labels)->required();
    explain_cmd->add_option("--index", ex_index);
    explain_cmd->add_option("--method", ex_method);
    explain_cmd->add_option("--ig-steps", ex_ig_steps);
    explain_cmd->add_option("--smoothing", ex_smooth, "none|beta|smoothgrad");
    explain_cmd->add_option("--beta", ex_beta);
    explain_cmd->add_option("--samples", ex_sg_samples);
    explain_cmd->add_option("--noise", ex_noise);
    explain_cmd->add_option("--seed", ex_seed);
    explain_cmd->add_option("--out-dir", ex_dir);

    // ---- attack ----
    auto* attack_cmd = app.add_subcommand("attack", "targeted manipulation campaign");
    std::string at_model, at_images, at_labels, at_method = "gradient", at_dir = "attack_out";
    int at_runs = 20, at_iters = -1, at_ig_steps = 30;
    double at_lr = -1.0, at_wh = -1.0, at_wg = -1.0, at_wx = -1.0;
    std::uint64_t at_seed = 0;
    attack_cmd->add_option("--model", at_model)->required();
    attack_cmd->add_option("--images", at_images)->required();
    attack_cmd->add_option("--labels", at_labels)->required();
    attack_cmd->add_option("--method", at_method);
    attack_cmd->add_option("--runs", at_runs);
    attack_cmd->add_option("--iterations", at_iters, "override method default");
    attack_cmd->add_option("--lr", at_lr, "override method default");
    attack_cmd->add_option("--weight-h", at_wh, "override method default");
    attack_cmd->add_option("--weight-g", at_wg, "override method default");
    attack_cmd->add_option("--weight-x", at_wx, "override method default");
    attack_cmd->add_option("--ig-steps", at_ig_steps);
    attack_cmd->add_option("--seed", at_seed)->required();
    attack_cmd->add_option("--out-dir", at_dir);

    // ---- defend ----
    auto* defend_cmd = app.add_subcommand("defend", "smoothing-defense evaluation");
    std::string df_model, df_images, df_labels, df_method = "gradient", df_dir = "defense_out";
    int df_runs = 20, df_samples = 10;
    double df_beta = 0.8, df_noise = 0.3;
    std::uint64_t df_seed = 0;
    defend_cmd->add_option("--model", df_model)->required();
    defend_cmd->add_option("--images", df_images)->required();
    defend_cmd->add_option("--labels", df_labels)->required();
    defend_cmd->add_option("--method", df_method);
    defend_cmd->add_option("--runs", df_runs);
    defend_cmd->add_option("--beta", df_beta);
    defend_cmd->add_option("--samples", df_samples);
    defend_cmd->add_option("--noise", df_noise);
    defend_cmd->add_option("--seed", df_seed)->required();
    defend_cmd->add_option("--out-dir", df_dir);

    // ---- geometry ----
    auto* geo_cmd = app.add_subcommand("geometry", "toy-field curvature study");
    GeometryStudyConfig geo_cfg;
    std::uint64_t geo_seed = 0;
    geo_cmd->add_option("--seed", geo_seed)->required();
    geo_cmd->add_option("--beta", geo_cfg.beta);
    geo_cmd->add_option("--arc-budget", geo_cfg.arc_budget);
    geo_cmd->add_option("--step", geo_cfg.step);
    geo_cmd->add_option("--t2-samples", geo_cfg.theorem2_samples);
    geo_cmd->add_option("--out-dir", geo_cfg.out_dir);

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "similarity report for two CSV rows");
    std::string rp_a, rp_b, rp_kind = "map";
    std::size_t rp_rows = 28, rp_cols = 28;
    report_cmd->add_option("--a", rp_a)->required();
    report_cmd->add_option("--b", rp_b)->required();
    report_cmd->add_option("--kind", rp_kind, "map|image");
    report_cmd->add_option("--rows", rp_rows);
    report_cmd->add_option("--cols", rp_cols);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*synth) {
            fs::create_directories(synth_dir);
            Dataset train_ds = make_synthetic_digits(synth_train, synth_seed);
            Dataset test_ds = make_synthetic_digits(synth_test, synth_seed + 1);
            save_idx(train_ds, synth_dir + "/train-images-idx3-ubyte",
                     synth_dir + "/train-labels-idx1-ubyte");
            save_idx(test_ds, synth_dir + "/test-images-idx3-ubyte",
                     synth_dir + "/test-labels-idx1-ubyte");
            std::cout << "wrote " << train_ds.size() << " train / " << test_ds.size()
                      << " test samples under " << synth_dir << "\n";
        } else if (*train_cmd) {
            Dataset ds = load_idx(tr_images, tr_labels);
            auto sizes = parse_arch(tr_arch);
            Network net = make_network(sizes, Activation::relu(), tr_cfg.seed);
            TrainResult res = attrib::train(net, ds, tr_cfg);
            std::cout << "train accuracy: " << res.train_accuracy << "\n";
            if (!tr_test_images.empty()) {
                Dataset test_ds = load_idx(tr_test_images, tr_test_labels);
                std::cout << "test accuracy: " << accuracy(res.net, test_ds) << "\n";
            }
            res.net.save(tr_out);
            std::cout << "model written to " << tr_out << "\n";
        } else if (*explain_cmd) {
            Network net = Network::load(ex_model);
            Dataset ds = load_idx(ex_images, ex_labels);
            if (ex_index >= ds.size()) throw std::invalid_argument("--index out of range");
            Method m = method_from_string(ex_method);
            MethodSpec spec = make_spec(m, ex_ig_steps, net, ds, 500);
            SmoothingSpec smooth = SmoothingSpec::none();
            if (ex_smooth == "beta") smooth = SmoothingSpec::beta_smoothing(ex_beta);
            else if (ex_smooth == "smoothgrad")
                smooth = SmoothingSpec::smoothgrad(ex_sg_samples, ex_noise, ex_seed);
            else if (ex_smooth != "none")
                throw std::invalid_argument("--smoothing must be none|beta|smoothgrad");
            const Tensor& x = ds.images[ex_index];
            const int k = predict(net, x);
            ExplanationMap raw = smooth_explain(net, x, k, spec, smooth);
            ExplanationMap shown = normalize(pixel_relevance(raw, 1));
            fs::create_directories(ex_dir);
            io::write_csv_row(ex_dir + "/raw_map.csv", raw.values.data);
            io::write_csv_row(ex_dir + "/map.csv", shown.values.data);
            io::write_pgm(ex_dir + "/map.pgm", shown.values.data, ds.rows, ds.cols);
            std::cout << "explained index " << ex_index << " (class " << k << ") with "
                      << method_name(m) << "; artifacts in " << ex_dir << "\n";
        } else if (*attack_cmd) {
            Network net = Network::load(at_model);
            Dataset ds = load_idx(at_images, at_labels);
            CampaignConfig cfg;
            cfg.method = method_from_string(at_method);
            cfg.spec = make_spec(cfg.method, at_ig_steps, net, ds, 500);
            cfg.attack = AttackConfig::defaults_for(cfg.method);
            if (at_iters >= 0) cfg.attack.iterations = at_iters;
            if (at_lr > 0) cfg.attack.lr = at_lr;
            if (at_wh >= 0) cfg.attack.weight_h = at_wh;
            if (at_wg >= 0) cfg.attack.weight_g = at_wg;
            if (at_wx >= 0) cfg.attack.weight_x = at_wx;
            cfg.runs = at_runs;
            cfg.seed = at_seed;
            cfg.grid_rows = ds.rows;
            cfg.grid_cols = ds.cols;
            fs::create_directories(at_dir);
            cfg.out_dir = at_dir;
            CampaignSummary sum = run_attack_campaign(net, ds, cfg);
            std::cout << sum.to_json() << "\n";
            if (sum.completed < at_runs) return 2;
        } else if (*defend_cmd) {
            Network net = Network::load(df_model);
            Dataset ds = load_idx(df_images, df_labels);
            DefenseConfig cfg;
            cfg.method = method_from_string(df_method);
            cfg.spec = make_spec(cfg.method, 30, net, ds, 500);
            cfg.runs = df_runs;
            cfg.seed = df_seed;
            cfg.beta_smooth = df_beta;
            cfg.smoothgrad_samples = df_samples;
            cfg.smoothgrad_noise = df_noise;
            cfg.grid_rows = ds.rows;
            cfg.grid_cols = ds.cols;
            fs::create_directories(df_dir);
            cfg.out_dir = df_dir;
            DefenseSummary sum = run_defense_eval(net, ds, cfg);
            std::cout << sum.to_json() << "\n";
        } else if (*geo_cmd) {
            geo_cfg.seed = geo_seed;
            if (!geo_cfg.out_dir.empty()) fs::create_directories(geo_cfg.out_dir);
            GeometryStudySummary sum = run_geometry_study(geo_cfg);
            std::cout << sum.to_json() << "\n";
        } else if (*report_cmd) {
            Vec a = read_csv_row(rp_a), b = read_csv_row(rp_b);
            CompareKind kind = rp_kind == "image" ? CompareKind::Image : CompareKind::Map;
            SimilarityReport r = report(a, b, kind, rp_rows, rp_cols);
            std::cout << r.to_json() << "\n";
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
