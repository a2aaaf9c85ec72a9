// nucleograde command-line tool: run, train-nucleoli, eval, synth.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "csv.hpp"
#include "image_io.hpp"
#include "nucleograde/config.hpp"
#include "nucleograde/report.hpp"
#include "nucleograde/synthetic.hpp"

namespace fs = std::filesystem;
using namespace nucleograde;

namespace {

enum Exit : int { kOk = 0, kConfigError = 1, kInputError = 2, kImageFailures = 3 };

struct ExitError : std::runtime_error {
    int code;
    ExitError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw ExitError(kInputError, "cannot write " + path.string());
}

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ExitError(kInputError, "input directory not found: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png" || ext == ".tif" || ext == ".tiff") out.push_back(e.path());
    }
    std::ranges::sort(out);
    if (out.empty()) throw ExitError(kInputError, "no PNG or TIFF images in " + dir.string());
    return out;
}

pipeline::PipelineConfig load_config_or_exit(const std::string& path) {
    try {
        if (path.empty()) return pipeline::PipelineConfig{};
        return config::load_config(path);
    } catch (const Error& e) {
        throw ExitError(kConfigError, e.what());
    }
}

std::optional<features::LinearSvmModel> load_model_or_exit(const std::string& path) {
    if (path.empty()) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw ExitError(kConfigError, "cannot read nucleoli model " + path);
    try {
        return features::load_model(in);
    } catch (const Error& e) {
        throw ExitError(kConfigError, e.what());
    }
}

/// centers.csv: image_id,x,y
pipeline::GroundTruth read_ground_truth(const std::string& centers_csv, const std::string& scores_csv) {
    pipeline::GroundTruth gt;
    std::map<std::string, std::vector<Point>> centers;
    const auto t = cli::read_csv(centers_csv, {"image_id", "x", "y"});
    const int ci = t.column("image_id"), cx = t.column("x"), cy = t.column("y");
    for (const auto& row : t.rows) {
        centers[row[ci]].push_back({cli::to_double(row[cx], centers_csv), cli::to_double(row[cy], centers_csv)});
    }
    gt.centers.assign(centers.begin(), centers.end());
    if (!scores_csv.empty()) {
        const auto s = cli::read_csv(scores_csv, {"image_id", "slide_score"});
        const int si = s.column("image_id"), ss = s.column("slide_score");
        for (const auto& row : s.rows) {
            const int v = cli::to_int(row[ss], scores_csv);
            if (v < 1 || v > 3) throw Error(ErrorCode::OutOfRange, scores_csv + ": slide score must be 1, 2 or 3");
            gt.slide_scores.emplace_back(row[si], v);
        }
    }
    return gt;
}

/// Baseline from explicit values or healthy annotations (image_path,x,y),
/// paths relative to the annotation file.
std::optional<scoring::NormalBaseline> resolve_baseline(pipeline::PipelineConfig& cfg,
                                                        const features::LinearSvmModel* model) {
    if (cfg.baseline) return cfg.baseline;
    if (cfg.baseline_annotations.empty()) return std::nullopt;
    const auto t = cli::read_csv(cfg.baseline_annotations, {"image_path", "x", "y"});
    const fs::path base = fs::path(cfg.baseline_annotations).parent_path();
    std::map<std::string, std::vector<Point>> by_image;
    for (const auto& row : t.rows) {
        by_image[row[t.column("image_path")]].push_back(
            {cli::to_double(row[t.column("x")], cfg.baseline_annotations),
             cli::to_double(row[t.column("y")], cfg.baseline_annotations)});
    }
    std::vector<features::NucleusFeatures> feats;
    for (const auto& [rel, pts] : by_image) {
        const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
        const auto more = pipeline::measure_healthy(cli::read_rgb(p.string()), pts, cfg, model);
        feats.insert(feats.end(), more.begin(), more.end());
    }
    const auto b = scoring::baseline_from_features(feats);
    if (cfg.derive_r_healthy) {
        cfg.centers.r_healthy = pipeline::healthy_radius(b);
        cfg.contour.r_seed = cfg.centers.r_healthy;
    }
    return b;
}

struct RunOptions {
    std::string config;
    std::string input;
    std::string output;
    bool overlays = false;
    std::string gt;
    std::string gt_scores;
    int jobs = 0;
};

struct ImageOutcome {
    std::string id;
    nlohmann::json report;
    std::vector<Point> seeds;
    std::optional<int> slide_score;
    bool failed = false;
};

int cmd_run(const RunOptions& o) {
    auto cfg = load_config_or_exit(o.config);
    if (o.jobs > 0) cfg.workers = o.jobs;
    const auto model = load_model_or_exit(cfg.nucleoli_model);
    const auto* model_ptr = model ? &*model : nullptr;
    const auto images = list_images(o.input);

    std::optional<scoring::NormalBaseline> baseline;
    try {
        baseline = resolve_baseline(cfg, model_ptr);
    } catch (const Error& e) {
        throw ExitError(kInputError, std::string("baseline: ") + e.what());
    }
    std::optional<pipeline::GroundTruth> gt;
    if (!o.gt.empty()) {
        try {
            gt = read_ground_truth(o.gt, o.gt_scores);
        } catch (const Error& e) {
            throw ExitError(kInputError, e.what());
        }
    }

    fs::create_directories(o.output);
    const std::string hash = config::config_hash(cfg);
    std::vector<ImageOutcome> outcomes(images.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < images.size(); i = next++) {
            auto& out = outcomes[i];
            out.id = images[i].stem().string();
            try {
                const auto img = cli::read_rgb(images[i].string());
                const auto r = pipeline::process_image(out.id, img, cfg, baseline, model_ptr);
                out.report = report::image_report(r, hash, baseline);
                out.seeds = r.seed_points();
                out.slide_score = r.slide_score;
                out.failed = r.has_failures() ||
                             std::ranges::any_of(r.quarters, [](const auto& q) { return q.status == "failed"; });
                write_text(fs::path(o.output) / (out.id + ".json"), report::dump(out.report));
                cli::write_labels((fs::path(o.output) / (out.id + "_labels.png")).string(), r);
                if (o.overlays) {
                    cli::write_rgb((fs::path(o.output) / (out.id + "_overlay.png")).string(), cli::overlay(img, r));
                }
            } catch (const std::exception& e) {
                out.failed = true;
                out.report = {{"schema", report::kSchema},
                              {"image_id", out.id},
                              {"config_hash", hash},
                              {"slide_score", nullptr},
                              {"quarters", nlohmann::json::array()},
                              {"error", e.what()}};
                std::lock_guard lock(log_mutex);
                std::cerr << out.id << ": " << e.what() << '\n';
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(cfg.workers, static_cast<int>(images.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Single reporting pass over the per-image results, in input order.
    std::string seeds_csv = "image_id,x,y\n";
    std::vector<nlohmann::json> docs;
    std::vector<pipeline::Prediction> preds;
    bool any_failed = false;
    for (const auto& out : outcomes) {
        for (const auto& p : out.seeds) {
            seeds_csv += out.id + "," + features::detail::format_double(p.x) + "," +
                         features::detail::format_double(p.y) + "\n";
        }
        docs.push_back(out.report);
        preds.push_back({out.id, out.seeds, out.slide_score});
        any_failed |= out.failed;
    }
    std::optional<pipeline::Evaluation> ev;
    if (gt) {
        try {
            ev = pipeline::evaluate(preds, *gt, cfg.match_radius);
        } catch (const Error& e) {
            throw ExitError(kInputError, e.what());
        }
    }
    write_text(fs::path(o.output) / "seeds.csv", seeds_csv);
    write_text(fs::path(o.output) / "report.json", report::dump(report::run_report(docs, cfg, baseline, ev)));
    return any_failed ? kImageFailures : kOk;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_csv, const std::string& scores_csv,
             double match_radius, const std::string& output) {
    pipeline::GroundTruth gt;
    std::vector<pipeline::Prediction> preds;
    try {
        gt = read_ground_truth(gt_csv, scores_csv);
        std::map<std::string, pipeline::Prediction> by_id;
        std::ifstream rin(fs::path(pred_dir) / "report.json");
        if (!rin) throw Error(ErrorCode::IoError, "no report.json in " + pred_dir);
        const auto rep = nlohmann::json::parse(rin);
        std::vector<std::string> order;
        for (const auto& img : rep.at("images")) {
            const std::string id = img.at("image_id");
            order.push_back(id);
            by_id[id].image_id = id;
            if (!img.at("slide_score").is_null()) by_id[id].slide_score = img.at("slide_score").get<int>();
        }
        const auto seeds = cli::read_csv((fs::path(pred_dir) / "seeds.csv").string(), {"image_id", "x", "y"});
        for (const auto& row : seeds.rows) {
            const std::string& id = row[seeds.column("image_id")];
            if (!by_id.contains(id)) throw Error(ErrorCode::InvalidArgument, "seeds.csv names unknown image " + id);
            by_id[id].centers.push_back(
                {cli::to_double(row[seeds.column("x")], "seeds.csv"), cli::to_double(row[seeds.column("y")], "seeds.csv")});
        }
        for (const auto& id : order) preds.push_back(by_id[id]);
    } catch (const nlohmann::json::exception& e) {
        throw ExitError(kInputError, e.what());
    } catch (const Error& e) {
        throw ExitError(kInputError, e.what());
    }
    pipeline::Evaluation ev;
    try {
        ev = pipeline::evaluate(preds, gt, match_radius);
    } catch (const Error& e) {
        throw ExitError(kInputError, e.what());
    }
    nlohmann::json j = {{"schema", report::kSchema},
                        {"match_radius", match_radius},
                        {"metrics", report::to_json(ev)},
                        {"metadata", report::metadata()}};
    const std::string text = report::dump(j);
    if (output.empty()) std::cout << text;
    else write_text(output, text);
    return kOk;
}

/// ann.csv: image_path,x,y,label (label 1 = nucleolus).
int cmd_train(const std::string& ann_csv, const std::string& output, const std::string& config_path, double c_reg,
              int iterations) {
    const auto cfg = load_config_or_exit(config_path);
    std::vector<std::vector<double>> samples;
    std::vector<int> labels;
    std::optional<int> negative;
    try {
        const auto t = cli::read_csv(ann_csv, {"image_path", "x", "y", "label"});
        const fs::path base = fs::path(ann_csv).parent_path();
        std::map<std::string, RgbImage> cache;
        for (const auto& row : t.rows) {
            const std::string rel = row[t.column("image_path")];
            const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
            auto it = cache.find(p.string());
            if (it == cache.end()) it = cache.emplace(p.string(), cli::read_rgb(p.string())).first;
            const Point at{cli::to_double(row[t.column("x")], ann_csv), cli::to_double(row[t.column("y")], ann_csv)};
            const int label = cli::to_int(row[t.column("label")], ann_csv);
            if (label != cfg.nucleoli.nucleolus_label) {
                if (negative && *negative != label) {
                    throw Error(ErrorCode::InvalidArgument, "annotations use more than two labels");
                }
                negative = label;
            }
            samples.push_back(features::nucleoli_training_sample(it->second, at, cfg.nucleoli));
            labels.push_back(label);
        }
    } catch (const Error& e) {
        throw ExitError(kInputError, e.what());
    }
    features::SvmTrainOptions opt;
    opt.c_reg = c_reg;
    opt.iterations = iterations;
    features::SvmTrainResult res;
    try {
        res = features::svm_train_detailed(samples, labels, opt, cfg.nucleoli.nucleolus_label, negative.value_or(0));
    } catch (const Error& e) {
        throw ExitError(kInputError, e.what());
    }
    std::ofstream out(output);
    if (!out) throw ExitError(kInputError, "cannot write " + output);
    features::save_model(out, res.model);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) correct += features::svm_predict(res.model, samples[i]) == labels[i];
    std::cout << "trained on " << samples.size() << " samples, training accuracy "
              << static_cast<double>(correct) / static_cast<double>(samples.size()) << '\n';
    return kOk;
}

int cmd_synth(const std::string& output, std::uint32_t seed, int count, double noise) {
    synthetic::SlideSpec spec;
    spec.seed = seed;
    spec.count = count;
    spec.look.noise_sigma = noise;
    const auto slide = synthetic::generate_slide(spec);
    fs::create_directories(fs::path(output) / "images");
    cli::write_rgb((fs::path(output) / "images" / "slide.png").string(), slide.image);

    std::string centers = "image_id,x,y\n";
    for (const auto& e : slide.nuclei) {
        centers += "slide," + features::detail::format_double(e.center.x) + "," +
                   features::detail::format_double(e.center.y) + "\n";
    }
    write_text(fs::path(output) / "centers.csv", centers);
    // Every planted nucleus exceeds 3x the baseline area, so anisonucleosis is 3.
    write_text(fs::path(output) / "scores.csv", "image_id,slide_score\nslide,3\n");

    const auto b = synthetic::planted_baseline(spec);
    const auto fmt = [](double v) { return features::detail::format_double(v); };
    std::string toml = "# Synthetic slide configuration\n\n[centers]\nr_healthy = 4\n\n[baseline]\n";
    toml += "normal_area = " + fmt(b.normal_area) + "\n";
    toml += "normal_mean_intensity = " + fmt(b.normal_mean_intensity) + "\n";
    toml += "normal_circularity = " + fmt(b.normal_circularity) + "\n";
    toml += "normal_nucleoli = 0.0\n";
    write_text(fs::path(output) / "config.toml", toml);
    std::cout << "wrote " << slide.nuclei.size() << " nuclei to " << output << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nucleograde: nuclear pleomorphism scoring for H&E images"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Detect, segment and score every image in a directory");
    run_cmd->add_option("--config", run.config, "TOML configuration file");
    run_cmd->add_option("--input", run.input, "Directory of PNG/TIFF images")->required();
    run_cmd->add_option("--output", run.output, "Output directory")->required();
    run_cmd->add_flag("--overlays", run.overlays, "Write boundary overlay PNGs");
    run_cmd->add_option("--gt", run.gt, "Ground-truth centres CSV (image_id,x,y)");
    run_cmd->add_option("--gt-scores", run.gt_scores, "Ground-truth slide scores CSV (image_id,slide_score)");
    run_cmd->add_option("--jobs", run.jobs, "Worker threads (overrides config)")->check(CLI::PositiveNumber);

    std::string ann, model_out, train_cfg;
    double c_reg = 100.0;
    int iterations = 10000;
    auto* train_cmd = app.add_subcommand("train-nucleoli", "Train the nucleoli classifier");
    train_cmd->add_option("--annotations", ann, "CSV with image_path,x,y,label")->required();
    train_cmd->add_option("--output", model_out, "Model file to write")->required();
    train_cmd->add_option("--config", train_cfg, "TOML configuration (nucleoli section)");
    train_cmd->add_option("--c-reg", c_reg, "SVM regularization constant")->check(CLI::PositiveNumber);
    train_cmd->add_option("--iterations", iterations, "Training iterations")->check(CLI::PositiveNumber);

    std::string pred_dir, gt_csv, gt_scores, eval_out;
    double match_radius = 8.0;
    auto* eval_cmd = app.add_subcommand("eval", "Compare a run directory with ground truth");
    eval_cmd->add_option("--pred", pred_dir, "Output directory of a previous run")->required();
    eval_cmd->add_option("--gt", gt_csv, "Ground-truth centres CSV (image_id,x,y)")->required();
    eval_cmd->add_option("--gt-scores", gt_scores, "Ground-truth slide scores CSV (image_id,slide_score)");
    eval_cmd->add_option("--match-radius", match_radius, "Centre matching radius in pixels")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--output", eval_out, "Write metrics JSON here instead of stdout");

    std::string synth_out;
    std::uint32_t synth_seed = 2024;
    int synth_count = 30;
    double synth_noise = 0.0;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic slide with ground truth and a config");
    synth_cmd->add_option("--output", synth_out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "Random seed");
    synth_cmd->add_option("--count", synth_count, "Number of nuclei")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--noise", synth_noise, "Per-channel noise standard deviation")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*train_cmd) return cmd_train(ann, model_out, train_cfg, c_reg, iterations);
        if (*eval_cmd) return cmd_eval(pred_dir, gt_csv, gt_scores, match_radius, eval_out);
        if (*synth_cmd) return cmd_synth(synth_out, synth_seed, synth_count, synth_noise);
    } catch (const ExitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kOk;
}
