// Command line front end: superpixels, evaluate, segment-vessels, diagnose.
// Configuration resolves preset < config file < explicit flags; every run
// writes its fully resolved configuration next to its primary output, and
// that sidecar feeds back in through --config for byte-identical reruns.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "esseg/clustering.hpp"
#include "esseg/color.hpp"
#include "esseg/decoder.hpp"
#include "esseg/errors.hpp"
#include "esseg/foreground.hpp"
#include "esseg/image_io.hpp"
#include "esseg/labeling.hpp"
#include "esseg/metrics.hpp"

namespace fs = std::filesystem;
using namespace esseg;

namespace {

struct RunConfig {
    std::string command;
    std::string preset = "natural";
    DecoderConfig decoder;
    int clusters = 100;
    int threads = 1;
    std::string threshold_domain = "superpixel"; // or "pixel"
    std::string sweep;
};

DecoderConfig preset_config(const std::string& name) {
    if (name == "natural") return natural_preset();
    if (name == "downsized") return downsized_preset();
    throw param_error("unknown preset '" + name + "' (choose natural or downsized)");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& v, const std::string& key) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size()) throw param_error("config: " + key + "=" + v + " is not an integer");
    return out;
}

double parse_real(const std::string& v, const std::string& key) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size()) throw param_error("config: " + key + "=" + v + " is not a number");
    return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw param_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_key(RunConfig& rc, const std::string& k, const std::string& v) {
    if (k == "preset") return; // consumed before the preset is instantiated
    if (k == "clusters")
        rc.clusters = int(parse_int(v, k));
    else if (k == "seed")
        rc.decoder.seed = std::uint64_t(parse_int(v, k));
    else if (k == "lambda")
        rc.decoder.lambda = parse_real(v, k);
    else if (k == "blur_factor")
        rc.decoder.blur_factor = parse_real(v, k);
    else if (k == "channels")
        rc.decoder.channels = int(parse_int(v, k));
    else if (k == "blocks")
        rc.decoder.blocks = int(parse_int(v, k));
    else if (k == "decoders")
        rc.decoder.ensemble = int(parse_int(v, k));
    else if (k == "levels")
        rc.decoder.levels = int(parse_int(v, k));
    else if (k == "steps")
        rc.decoder.steps = int(parse_int(v, k));
    else if (k == "lr_decay_step")
        rc.decoder.lr_decay_step = int(parse_int(v, k));
    else if (k == "lr_decay_factor")
        rc.decoder.lr_decay_factor = parse_real(v, k);
    else if (k == "dropout")
        rc.decoder.dropout_p = parse_real(v, k);
    else if (k == "lr")
        rc.decoder.lr = parse_real(v, k);
    else if (k == "threads")
        rc.threads = int(parse_int(v, k));
    else if (k == "threshold_domain")
        rc.threshold_domain = v;
    else if (k == "sweep")
        rc.sweep = v;
    else
        throw param_error("config: unknown key '" + k + "'");
}

// Everything the decoder-driven commands share. Option pointers let the
// resolver see which flags were given explicitly.
struct CommonOpts {
    int clusters = 0;
    std::uint64_t seed = 0;
    double lambda = 0.0, blur_factor = 0.0, dropout = 0.0, lr = 0.0;
    int channels = 0, blocks = 0, decoders = 0, steps = 0, threads = 0;
    std::string preset, config_path;

    CLI::Option *o_clusters = nullptr, *o_seed = nullptr, *o_lambda = nullptr,
                *o_blur = nullptr, *o_channels = nullptr, *o_blocks = nullptr,
                *o_decoders = nullptr, *o_steps = nullptr, *o_dropout = nullptr,
                *o_lr = nullptr, *o_preset = nullptr, *o_threads = nullptr;

    void attach(CLI::App* cmd) {
        o_clusters = cmd->add_option("--clusters", clusters, "Requested cluster count");
        o_seed = cmd->add_option("--seed", seed, "Run seed");
        o_lambda = cmd->add_option("--lambda", lambda, "Spatial loss weight in [0,1]");
        o_blur = cmd->add_option("--blur-factor", blur_factor,
                                 "Input blur factor b; blur width is 2*floor(b*w*h/2)+1");
        o_channels = cmd->add_option("--channels", channels, "Decoder hidden width");
        o_blocks = cmd->add_option("--blocks", blocks, "Decoder upsampling blocks");
        o_decoders = cmd->add_option("--decoders", decoders, "Ensemble size");
        o_steps = cmd->add_option(
            "--steps", steps,
            "Optimization steps (the decay step is capped to this value)");
        o_dropout = cmd->add_option("--dropout", dropout, "Channel dropout rate in [0,1)");
        o_lr = cmd->add_option("--lr", lr, "Adam learning rate");
        o_preset = cmd->add_option("--preset", preset,
                                   "Hyperparameter preset: natural or downsized");
        o_threads = cmd->add_option("--threads", threads,
                                    "Worker threads (results do not depend on this)");
        cmd->add_option("--config", config_path,
                        "key=value file applied over the preset; flags still win");
    }
};

RunConfig resolve(const CommonOpts& f, const std::string& command,
                  const std::string& default_preset, int default_clusters) {
    std::map<std::string, std::string> kv;
    if (!f.config_path.empty()) kv = read_config_file(f.config_path);

    std::string preset = default_preset;
    if (auto it = kv.find("preset"); it != kv.end()) preset = it->second;
    if (f.o_preset->count() > 0) preset = f.preset;

    RunConfig rc;
    rc.command = command;
    rc.preset = preset;
    rc.decoder = preset_config(preset);
    rc.clusters = default_clusters;
    if (const char* env = std::getenv("ESSEG_THREADS")) {
        const long long n = parse_int(env, "ESSEG_THREADS");
        if (n < 1) throw param_error("ESSEG_THREADS must be a positive integer");
        rc.threads = int(n);
    }

    for (const auto& [k, v] : kv) apply_key(rc, k, v);

    if (f.o_clusters->count() > 0) rc.clusters = f.clusters;
    if (f.o_seed->count() > 0) rc.decoder.seed = f.seed;
    if (f.o_lambda->count() > 0) rc.decoder.lambda = f.lambda;
    if (f.o_blur->count() > 0) rc.decoder.blur_factor = f.blur_factor;
    if (f.o_channels->count() > 0) rc.decoder.channels = f.channels;
    if (f.o_blocks->count() > 0) rc.decoder.blocks = f.blocks;
    if (f.o_decoders->count() > 0) rc.decoder.ensemble = f.decoders;
    if (f.o_steps->count() > 0) rc.decoder.steps = f.steps;
    if (f.o_dropout->count() > 0) rc.decoder.dropout_p = f.dropout;
    if (f.o_lr->count() > 0) rc.decoder.lr = f.lr;
    if (f.o_threads->count() > 0) rc.threads = f.threads;

    rc.decoder.lr_decay_step = std::min(rc.decoder.lr_decay_step, rc.decoder.steps);
    validate(rc.decoder);
    if (rc.clusters < 1) throw param_error("clusters must be >= 1");
    if (rc.threads < 1) throw param_error("threads must be >= 1");
    if (rc.threshold_domain != "superpixel" && rc.threshold_domain != "pixel")
        throw param_error("threshold_domain must be superpixel or pixel");
    return rc;
}

std::string format_real(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

// The sidecar is itself a valid --config file; paths and the command go in
// as comments so reruns are anchored to explicit arguments, not history.
std::string sidecar_text(const RunConfig& rc,
                         const std::vector<std::pair<std::string, std::string>>& notes) {
    std::ostringstream out;
    out << "# resolved run configuration; reuse with --config\n";
    out << "# command: " << rc.command << "\n";
    for (const auto& [k, v] : notes) out << "# " << k << ": " << v << "\n";
    out << "preset=" << rc.preset << "\n";
    out << "clusters=" << rc.clusters << "\n";
    out << "seed=" << rc.decoder.seed << "\n";
    out << "lambda=" << format_real(rc.decoder.lambda) << "\n";
    out << "blur_factor=" << format_real(rc.decoder.blur_factor) << "\n";
    out << "channels=" << rc.decoder.channels << "\n";
    out << "blocks=" << rc.decoder.blocks << "\n";
    out << "decoders=" << rc.decoder.ensemble << "\n";
    out << "levels=" << rc.decoder.levels << "\n";
    out << "steps=" << rc.decoder.steps << "\n";
    out << "lr_decay_step=" << rc.decoder.lr_decay_step << "\n";
    out << "lr_decay_factor=" << format_real(rc.decoder.lr_decay_factor) << "\n";
    out << "dropout=" << format_real(rc.decoder.dropout_p) << "\n";
    out << "lr=" << format_real(rc.decoder.lr) << "\n";
    out << "threads=" << rc.threads << "\n";
    if (rc.command == "segment-vessels")
        out << "threshold_domain=" << rc.threshold_domain << "\n";
    if (rc.command == "diagnose") out << "sweep=" << rc.sweep << "\n";
    return out.str();
}

GrayImage to_gray(const LoadedImage& img) {
    if (std::holds_alternative<GrayImage>(img)) return std::get<GrayImage>(img);
    return rgb_to_lightness(std::get<RgbImage>(img));
}

FitImage to_fit_image(const LoadedImage& img) {
    if (std::holds_alternative<GrayImage>(img))
        return FitImage::from_gray(std::get<GrayImage>(img));
    return FitImage::from_rgb(std::get<RgbImage>(img));
}

RgbImage to_rgb(const LoadedImage& img) {
    if (std::holds_alternative<GrayImage>(img))
        return RgbImage::replicate(std::get<GrayImage>(img));
    return std::get<RgbImage>(img);
}

void write_overlay(const LoadedImage& base, const Labeling& labels,
                   const std::string& path) {
    RgbImage img = to_rgb(base);
    const BinaryMask edges = boundary_mask(labels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (edges.at(x, y)) {
                img.at(0, x, y) = 1.0;
                img.at(1, x, y) = 0.0;
                img.at(2, x, y) = 0.0;
            }
    save_image(img, path);
}

int cmd_superpixels(const RunConfig& rc, const std::string& input,
                    const std::string& output, const std::string& overlay,
                    const std::string& csv) {
    const LoadedImage img = load_image(input);
    const FitImage fit_img = to_fit_image(img);
    const EmbeddingMap emb = extract_embeddings(fit_img, rc.decoder, rc.threads);
    Rng rng = cluster_rng(rc.decoder.seed);
    ClusterOptions copts;
    copts.threads = rc.threads;
    const Labeling labels = cluster(emb, rc.clusters, rng, copts);

    save_labeling(labels, output);
    if (!csv.empty()) save_labeling_csv(labels, csv);
    if (!overlay.empty()) write_overlay(img, labels, overlay);
    write_file_atomic(output + ".meta",
                      sidecar_text(rc, {{"input", input}, {"output", output}}));
    std::cout << output << ": " << labels.num_labels << " superpixels, "
              << count_regions(labels) << " regions\n";
    return 0;
}

int cmd_evaluate(const RunConfig& rc, const std::string& labels_path,
                 const std::vector<std::string>& gt_paths, const std::string& csv) {
    const Labeling sp = load_labeling(labels_path);
    std::vector<Labeling> gts;
    std::vector<std::string> names;
    gts.reserve(gt_paths.size());
    for (const std::string& path : gt_paths) {
        gts.push_back(load_labeling(path));
        names.push_back(fs::path(path).filename().string());
    }
    const MetricReport report = evaluate(sp, gts);
    const std::string text =
        metric_report_csv(report, fs::path(labels_path).filename().string(), names);
    write_file_atomic(csv, text);
    write_file_atomic(csv + ".meta",
                      sidecar_text(rc, {{"labels", labels_path}, {"output", csv}}));
    std::cout << text;
    return 0;
}

int cmd_segment_vessels(const RunConfig& rc, const std::string& input_dir,
                        const std::string& output_dir, const std::string& gold_dir,
                        const std::string& csv_name) {
    std::vector<fs::path> slices;
    for (const auto& entry : fs::directory_iterator(input_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".png" || ext == ".ppm") slices.push_back(entry.path());
    }
    std::sort(slices.begin(), slices.end());
    if (slices.empty())
        throw param_error("segment-vessels: no .pgm/.png/.ppm slices in " + input_dir);
    fs::create_directories(output_dir);

    SegmentOptions so;
    so.domain = rc.threshold_domain == "pixel" ? ThresholdDomain::per_pixel
                                               : ThresholdDomain::per_superpixel;
    so.clusters = rc.clusters;
    so.threads = rc.threads;

    std::ostringstream table;
    table << std::setprecision(12) << "slice,se,sp,dc,ji\n";
    bool any_gold = false;
    std::vector<std::string> failures;
    int done = 0;
    for (const fs::path& slice_path : slices) {
        try {
            const GrayImage slice = to_gray(load_image(slice_path.string()));
            const SliceSegmentation seg = segment_slice(slice, rc.decoder, so);

            GrayImage mask_img(seg.mask.width, seg.mask.height);
            for (std::size_t p = 0; p < seg.mask.values.size(); ++p)
                mask_img.values[p] = seg.mask.values[p] ? 1.0 : 0.0;
            const fs::path mask_path =
                fs::path(output_dir) / (slice_path.stem().string() + "_mask.pgm");
            save_image(mask_img, mask_path.string());

            if (!gold_dir.empty()) {
                const fs::path gold_path = fs::path(gold_dir) / slice_path.filename();
                const GrayImage gold_img = to_gray(load_image(gold_path.string()));
                if (gold_img.width != seg.mask.width || gold_img.height != seg.mask.height)
                    throw shape_error("gold mask size differs from slice");
                BinaryMask gold(gold_img.width, gold_img.height);
                for (std::size_t p = 0; p < gold.values.size(); ++p)
                    gold.values[p] = gold_img.values[p] > 0.5 ? 1 : 0;
                const BinaryMetrics m = binary_metrics(seg.mask, gold);
                table << slice_path.filename().string() << ',' << m.se << ',' << m.sp
                      << ',' << m.dc << ',' << m.ji << '\n';
                any_gold = true;
            }
            ++done;
        } catch (const std::exception& e) {
            std::cerr << "error: " << slice_path.string() << ": " << e.what() << "\n";
            failures.push_back(slice_path.filename().string());
        }
    }

    if (any_gold)
        write_file_atomic((fs::path(output_dir) / csv_name).string(), table.str());
    write_file_atomic((fs::path(output_dir) / "run.meta").string(),
                      sidecar_text(rc, {{"input", input_dir}, {"output", output_dir}}));

    std::cout << done << "/" << slices.size() << " slices segmented";
    if (!failures.empty()) {
        std::cout << "; failed:";
        for (const std::string& f : failures) std::cout << ' ' << f;
    }
    std::cout << "\n";
    return done > 0 ? 0 : 1;
}

struct Sweep {
    bool over_sigma = false;
    std::vector<double> values;
};

Sweep parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw param_error("sweep must look like b=5e-05,0.0001 or sigma=1,3,5");
    const std::string key = trim(text.substr(0, eq));
    Sweep sweep;
    if (key == "sigma")
        sweep.over_sigma = true;
    else if (key != "b")
        throw param_error("sweep parameter must be b or sigma, got '" + key + "'");
    std::stringstream rest(text.substr(eq + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        const std::string tok = trim(item);
        if (tok.empty()) continue;
        const double v = parse_real(tok, "sweep");
        if (!(v > 0.0)) throw param_error("sweep values must be positive");
        sweep.values.push_back(v);
    }
    if (sweep.values.empty()) throw param_error("sweep lists no values");
    return sweep;
}

int cmd_diagnose(const RunConfig& rc, const std::string& input, const std::string& csv) {
    if (rc.decoder.steps < 1) throw param_error("diagnose needs steps >= 1");
    const Sweep sweep = parse_sweep(rc.sweep);
    const FitImage img = to_fit_image(load_image(input));

    std::ostringstream out;
    out << std::setprecision(12) << "param,value,avg_regions,avg_loss\n";
    for (const double value : sweep.values) {
        DecoderConfig cfg = rc.decoder;
        double sigma_override = 0.0;
        if (sweep.over_sigma)
            sigma_override = value;
        else
            cfg.blur_factor = value;
        double regions = 0.0, loss = 0.0;
        for (int m = 0; m < cfg.ensemble; ++m) {
            const FitResult fit_result = fit(img, cfg, m, sigma_override);
            regions += count_activated_regions(fit_result.last_relu);
            loss += fit_result.history.back().total;
        }
        regions /= double(cfg.ensemble);
        loss /= double(cfg.ensemble);
        out << (sweep.over_sigma ? "sigma" : "b") << ',' << value << ',' << regions << ','
            << loss << '\n';
    }
    write_file_atomic(csv, out.str());
    write_file_atomic(csv + ".meta",
                      sidecar_text(rc, {{"input", input}, {"output", csv}}));
    std::cout << out.str();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superpixels from per-pixel decoder embeddings, plus microscopy "
                 "foreground segmentation"};
    app.require_subcommand(1);

    CommonOpts sp_opts, ev_opts, sv_opts, dg_opts;

    std::string sp_input, sp_output, sp_overlay, sp_csv;
    CLI::App* sp_cmd =
        app.add_subcommand("superpixels", "Segment one image into superpixels");
    sp_cmd->add_option("input", sp_input, "Image (PPM/PGM/PNG)")->required();
    sp_cmd->add_option("-o,--output", sp_output, "Label map output (16-bit PGM)")
        ->required();
    sp_opts.attach(sp_cmd);
    sp_cmd->add_option("--overlay", sp_overlay, "Write the image with red boundaries");
    sp_cmd->add_option("--csv", sp_csv, "Also write labels as x,y,label CSV");

    std::string ev_labels, ev_csv;
    std::vector<std::string> ev_gts;
    CLI::App* ev_cmd =
        app.add_subcommand("evaluate", "Score a label map against ground truths");
    ev_cmd->add_option("labels", ev_labels, "Label map (PGM)")->required();
    ev_cmd->add_option("ground_truth", ev_gts, "Ground-truth label maps (PGM)")
        ->required();
    ev_cmd->add_option("--csv", ev_csv, "Metric report output")->required();
    ev_opts.attach(ev_cmd);

    std::string sv_input, sv_output, sv_gold, sv_csv = "metrics.csv";
    bool sv_per_pixel = false;
    CLI::App* sv_cmd = app.add_subcommand(
        "segment-vessels", "Foreground masks for a directory of microscopy slices");
    sv_cmd->add_option("input_dir", sv_input, "Directory of slices")->required();
    sv_cmd->add_option("-o,--output", sv_output, "Directory for masks")->required();
    sv_opts.attach(sv_cmd);
    sv_cmd->add_option("--gold", sv_gold, "Directory of reference masks (same names)");
    sv_cmd->add_option("--csv", sv_csv, "Metrics file name inside the output directory");
    sv_cmd->add_flag("--per-pixel-threshold", sv_per_pixel,
                     "Threshold the per-pixel map instead of the coefficient table");

    std::string dg_input, dg_csv, dg_sweep;
    CLI::App* dg_cmd = app.add_subcommand(
        "diagnose", "Sweep the input blur and report activated-region counts");
    dg_cmd->add_option("input", dg_input, "Image (PPM/PGM/PNG)")->required();
    dg_cmd->add_option("--sweep", dg_sweep, "b=v1,v2,... or sigma=v1,v2,...");
    dg_cmd->add_option("--csv", dg_csv, "Sweep table output")->required();
    dg_opts.attach(dg_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sp_cmd->parsed()) {
            const RunConfig rc = resolve(sp_opts, "superpixels", "natural", 100);
            return cmd_superpixels(rc, sp_input, sp_output, sp_overlay, sp_csv);
        }
        if (ev_cmd->parsed()) {
            const RunConfig rc = resolve(ev_opts, "evaluate", "natural", 100);
            return cmd_evaluate(rc, ev_labels, ev_gts, ev_csv);
        }
        if (sv_cmd->parsed()) {
            RunConfig rc = resolve(sv_opts, "segment-vessels", "downsized", 200);
            if (sv_per_pixel) rc.threshold_domain = "pixel";
            return cmd_segment_vessels(rc, sv_input, sv_output, sv_gold, sv_csv);
        }
        if (dg_cmd->parsed()) {
            RunConfig rc = resolve(dg_opts, "diagnose", "natural", 100);
            if (!dg_sweep.empty()) rc.sweep = dg_sweep;
            if (rc.sweep.empty())
                throw param_error("diagnose needs --sweep (or a sweep= config entry)");
            return cmd_diagnose(rc, dg_input, dg_csv);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
