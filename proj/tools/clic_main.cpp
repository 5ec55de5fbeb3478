#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clic/checkpoint.hpp"
#include "clic/error.hpp"
#include "clic/finetune.hpp"
#include "clic/fusion.hpp"
#include "clic/heuristics.hpp"
#include "clic/icd.hpp"
#include "clic/image_io.hpp"
#include "clic/manifest.hpp"
#include "clic/metrics.hpp"
#include "clic/moco.hpp"
#include "clic/rcm.hpp"
#include "clic/rng.hpp"
#include "clic/synth.hpp"

namespace {

using nlohmann::ordered_json;

void write_json_file(const ordered_json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw clic::IoError("cannot write " + path.string());
    }
    out << j.dump(2) << "\n";
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw clic::IoError("cannot write " + path.string());
    }
    out << text;
}

std::string format_double(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

ordered_json failures_json(const std::vector<std::pair<std::string, std::string>>& failures) {
    ordered_json arr = ordered_json::array();
    for (const auto& [path, reason] : failures) {
        arr.push_back({{"path", path}, {"reason", reason}});
    }
    return arr;
}

clic::Manifest scored_to_manifest(const clic::ScoredManifest& scored) {
    clic::Manifest manifest;
    manifest.entries.reserve(scored.entries.size());
    for (const auto& entry : scored.entries) {
        clic::ManifestEntry out;
        out.path = entry.path;
        out.score = entry.score;
        out.id = entry.id;
        manifest.entries.push_back(std::move(out));
    }
    return manifest;
}

std::vector<clic::LabeledImage> load_labeled(const clic::Manifest& manifest) {
    std::vector<clic::LabeledImage> labeled;
    labeled.reserve(manifest.size());
    for (const auto& entry : manifest.entries) {
        if (!entry.score) {
            throw clic::UsageError("entry " + entry.path +
                                   " has no score; a labeled manifest is required");
        }
        labeled.push_back({clic::load_image(entry.path), clic::ICScore{*entry.score},
                           entry.effective_id()});
    }
    return labeled;
}

std::string histogram_csv(const clic::Histogram& hist) {
    std::string csv = "bin_left,bin_right,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        csv += format_double(hist.edges[i]) + "," + format_double(hist.edges[i + 1]) + "," +
               std::to_string(hist.counts[i]) + "\n";
    }
    return csv;
}

std::string histogram_svg(const clic::Histogram& hist, const std::string& title) {
    constexpr int kWidth = 640, kHeight = 400, kMargin = 40;
    const int plot_w = kWidth - 2 * kMargin;
    const int plot_h = kHeight - 2 * kMargin;
    int max_count = 1;
    for (int c : hist.counts) {
        max_count = std::max(max_count, c);
    }

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\">\n";
    svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "  <text x=\"" + std::to_string(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
    const std::size_t bins = hist.counts.size();
    for (std::size_t i = 0; i < bins; ++i) {
        const double x0 = kMargin + static_cast<double>(i) * plot_w / static_cast<double>(bins);
        const double bar_w = static_cast<double>(plot_w) / static_cast<double>(bins);
        const double h = static_cast<double>(hist.counts[i]) * plot_h / max_count;
        svg += "  <rect x=\"" + format_double(x0, 2) + "\" y=\"" +
               format_double(kMargin + plot_h - h, 2) + "\" width=\"" +
               format_double(bar_w, 2) + "\" height=\"" + format_double(h, 2) +
               "\" fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }
    svg += "  <line x1=\"" + std::to_string(kMargin) + "\" y1=\"" +
           std::to_string(kMargin + plot_h) + "\" x2=\"" + std::to_string(kMargin + plot_w) +
           "\" y2=\"" + std::to_string(kMargin + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "  <text x=\"" + std::to_string(kMargin) + "\" y=\"" +
           std::to_string(kMargin + plot_h + 16) +
           "\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
    svg += "  <text x=\"" + std::to_string(kMargin + plot_w) + "\" y=\"" +
           std::to_string(kMargin + plot_h + 16) + "\" text-anchor=\"end\" "
           "font-family=\"sans-serif\" font-size=\"11\">1</text>\n";
    svg += "  <text x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(kMargin - 6) +
           "\" font-family=\"sans-serif\" font-size=\"11\">max " +
           std::to_string(max_count) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

ordered_json normal_fit_json(const clic::NormalFit& fit) {
    ordered_json j;
    j["mu"] = fit.mu;
    j["sigma"] = fit.sigma;
    j["n"] = fit.n;
    j["ks"] = fit.ks;
    j["degenerate"] = fit.degenerate;
    return j;
}

struct SynthArgs {
    int count = 0;
    int side = 64;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string manifest;
};

void run_synth(const SynthArgs& args) {
    const auto manifest = clic::synth_corpus(args.count, args.side, args.seed, args.out_dir);
    clic::write_manifest(manifest, args.manifest);
    std::printf("synthesized %zu images into %s (manifest: %s)\n", manifest.size(),
                args.out_dir.c_str(), args.manifest.c_str());
}

struct ScoreArgs {
    std::string manifest;
    std::string scorer;
    std::string out;
    std::string report;
    std::string encoder;
    std::string head;
    std::uint64_t seed = 0;
    int jobs = 1;
};

void run_score(const ScoreArgs& args) {
    const auto manifest = clic::read_manifest(args.manifest);

    std::optional<clic::EncoderParams> encoder;
    std::optional<clic::RegressionHead> head;
    if (args.scorer == "clic") {
        if (args.encoder.empty() || args.head.empty()) {
            throw clic::UsageError("the clic scorer needs --encoder and --head");
        }
        encoder = clic::load_encoder(args.encoder);
        head = clic::load_head(args.head);
    }
    const auto scored = clic::score_dataset(manifest, args.scorer,
                                            encoder ? &*encoder : nullptr,
                                            head ? &*head : nullptr, args.jobs);
    clic::write_manifest(scored_to_manifest(scored), args.out);

    std::vector<double> scores;
    scores.reserve(scored.entries.size());
    for (const auto& entry : scored.entries) {
        scores.push_back(entry.score);
    }
    double mean = 0.0;
    for (double s : scores) {
        mean += s;
    }
    if (!scores.empty()) {
        mean /= static_cast<double>(scores.size());
    }

    ordered_json report;
    report["config"] = {{"manifest", args.manifest}, {"scorer", args.scorer},
                        {"out", args.out},           {"encoder", args.encoder},
                        {"head", args.head},         {"jobs", args.jobs},
                        {"seed", args.seed}};
    report["n_scored"] = scores.size();
    report["n_failed"] = scored.failures.size();
    report["mean"] = mean;
    report["normal_fit"] =
        scores.size() >= 2 ? normal_fit_json(clic::fit_normal(scores)) : ordered_json(nullptr);
    report["failures"] = failures_json(scored.failures);
    if (!args.report.empty()) {
        write_json_file(report, args.report);
    }
    std::fputs((report.dump(2) + "\n").c_str(), stdout);
}

struct ExpandArgs {
    std::string manifest;
    int c = 2;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string out;
    std::string report;
    bool keep_originals = false;
};

void run_expand(const ExpandArgs& args) {
    const auto manifest = clic::read_manifest(args.manifest);
    clic::Rng rng(args.seed);
    const auto result =
        clic::expand_dataset(manifest, args.c, rng, args.out_dir, args.keep_originals);
    clic::write_manifest(result.manifest, args.out);

    const int factor = clic::mixed_sample_count(args.c);
    if (args.keep_originals) {
        std::printf("expansion: %dx (%dx generated + originals)\n", factor + 1, factor);
    } else {
        std::printf("expansion: %dx\n", factor);
    }
    const std::size_t generated =
        result.manifest.size() - (args.keep_originals
                                      ? manifest.size() - result.failures.size()
                                      : 0);
    std::printf("sources: %zu, generated: %zu, failed: %zu\n", manifest.size(), generated,
                result.failures.size());

    if (!args.report.empty()) {
        ordered_json report;
        report["config"] = {{"manifest", args.manifest},
                            {"c", args.c},
                            {"seed", args.seed},
                            {"out_dir", args.out_dir},
                            {"out", args.out},
                            {"keep_originals", args.keep_originals}};
        report["factor"] = factor;
        report["sources"] = manifest.size();
        report["generated"] = generated;
        report["failures"] = failures_json(result.failures);
        write_json_file(report, args.report);
    }
    if (result.manifest.empty() && !manifest.empty()) {
        throw clic::Error("every manifest entry failed to expand");
    }
}

struct TrainArgs {
    std::string manifest;
    std::string out_dir;
    clic::TrainConfig config;
    bool resume = false;
};

void run_train(const TrainArgs& args) {
    const auto manifest = clic::read_manifest(args.manifest);
    const auto result = clic::train(args.config, manifest, args.out_dir, args.resume);
    if (result.loss_history.empty()) {
        std::printf("training already complete (%d epochs)\n", args.config.epochs);
        return;
    }
    std::printf("trained %zu epochs, first loss %s, final loss %s\n",
                result.loss_history.size(), format_double(result.loss_history.front()).c_str(),
                format_double(result.loss_history.back()).c_str());
}

struct FinetuneArgs {
    std::string manifest;
    std::string encoder;
    std::string out;
    std::string report;
    clic::FinetuneConfig config;
};

void run_finetune(const FinetuneArgs& args) {
    const auto manifest = clic::read_manifest(args.manifest);
    const auto labeled = load_labeled(manifest);
    const auto encoder = clic::load_encoder(args.encoder);
    const auto head = clic::finetune(encoder, labeled, args.config);
    clic::save_head(head, args.out);

    ordered_json report;
    report["config"] = {{"manifest", args.manifest},
                        {"encoder", args.encoder},
                        {"out", args.out},
                        {"batch_size", args.config.batch_size},
                        {"lr", args.config.lr},
                        {"momentum", args.config.momentum},
                        {"weight_decay", args.config.weight_decay},
                        {"epochs", args.config.epochs},
                        {"seed", args.config.seed}};
    report["n"] = labeled.size();
    if (!args.report.empty()) {
        write_json_file(report, args.report);
    }
    std::printf("finetuned head on %zu examples -> %s\n", labeled.size(), args.out.c_str());
}

struct EvalArgs {
    std::string manifest;
    std::string encoder;
    std::string head;
    std::string out;
    std::uint64_t seed = 0;
};

void run_eval(const EvalArgs& args) {
    const auto manifest = clic::read_manifest(args.manifest);
    const auto labeled = load_labeled(manifest);
    const auto encoder = clic::load_encoder(args.encoder);
    const auto head = clic::load_head(args.head);
    const auto eval = clic::evaluate(encoder, head, labeled);

    ordered_json report;
    report["config"] = {{"manifest", args.manifest},
                        {"encoder", args.encoder},
                        {"head", args.head},
                        {"seed", args.seed}};
    report["pcc"] = eval.pcc;
    report["srcc"] = eval.srcc;
    report["n"] = eval.n;
    report["scorer"] = eval.scorer;
    ordered_json rows = ordered_json::array();
    for (const auto& row : eval.rows) {
        rows.push_back({{"id", row.id}, {"prediction", row.prediction}, {"label", row.label}});
    }
    report["rows"] = rows;
    write_json_file(report, args.out);
    std::printf("pcc=%s srcc=%s n=%d\n", format_double(eval.pcc).c_str(),
                format_double(eval.srcc).c_str(), eval.n);
}

struct IcdArgs {
    std::string manifest;
    std::string scorer;
    int bins = 50;
    std::string out;
    std::string hist_csv;
    std::string svg;
    std::string encoder;
    std::string head;
    std::uint64_t seed = 0;
    int jobs = 1;
};

void run_icd(const IcdArgs& args) {
    const auto manifest = clic::read_manifest(args.manifest);
    std::optional<clic::EncoderParams> encoder;
    std::optional<clic::RegressionHead> head;
    if (args.scorer == "clic") {
        if (args.encoder.empty() || args.head.empty()) {
            throw clic::UsageError("the clic scorer needs --encoder and --head");
        }
        encoder = clic::load_encoder(args.encoder);
        head = clic::load_head(args.head);
    }
    const auto scored = clic::score_dataset(manifest, args.scorer,
                                            encoder ? &*encoder : nullptr,
                                            head ? &*head : nullptr, args.jobs);
    std::vector<double> scores;
    scores.reserve(scored.entries.size());
    for (const auto& entry : scored.entries) {
        scores.push_back(entry.score);
    }

    const auto hist = clic::histogram(scores, args.bins);
    std::size_t mode_bin = 0;
    for (std::size_t i = 1; i < hist.counts.size(); ++i) {
        if (hist.counts[i] > hist.counts[mode_bin]) {
            mode_bin = i;
        }
    }

    ordered_json report;
    report["config"] = {{"manifest", args.manifest}, {"scorer", args.scorer},
                        {"bins", args.bins},         {"encoder", args.encoder},
                        {"head", args.head},         {"jobs", args.jobs},
                        {"seed", args.seed}};
    report["n"] = scores.size();
    report["n_failed"] = scored.failures.size();
    report["normal_fit"] =
        scores.size() >= 2 ? normal_fit_json(clic::fit_normal(scores)) : ordered_json(nullptr);
    report["histogram"] = {{"edges", hist.edges}, {"counts", hist.counts}};
    report["mode_bin"] = {{"index", mode_bin},
                          {"left", hist.edges[mode_bin]},
                          {"right", hist.edges[mode_bin + 1]},
                          {"count", hist.counts.empty() ? 0 : hist.counts[mode_bin]}};
    report["failures"] = failures_json(scored.failures);
    write_json_file(report, args.out);

    if (!args.hist_csv.empty()) {
        write_text_file(histogram_csv(hist), args.hist_csv);
    }
    if (!args.svg.empty()) {
        write_text_file(histogram_svg(hist, "complexity distribution (" + args.scorer + ")"),
                        args.svg);
    }
    std::printf("scored %zu images (%zu failed) -> %s\n", scores.size(),
                scored.failures.size(), args.out.c_str());
}

struct StratifyArgs {
    std::string scored;
    double lo = 0.3;
    double hi = 0.7;
    std::string out_dir;
};

void run_stratify(const StratifyArgs& args) {
    const auto manifest = clic::read_manifest(args.scored);
    clic::ScoredManifest scored;
    for (const auto& entry : manifest.entries) {
        if (!entry.score) {
            throw clic::UsageError("entry " + entry.path +
                                   " has no score; stratify needs a scored manifest");
        }
        scored.entries.push_back({entry.path, *entry.score, entry.effective_id()});
    }
    const auto strata = clic::stratify(scored, args.lo, args.hi);

    std::error_code ec;
    std::filesystem::create_directories(args.out_dir, ec);
    if (ec || !std::filesystem::is_directory(args.out_dir)) {
        throw clic::IoError("cannot create output directory " + args.out_dir);
    }
    const auto dir = std::filesystem::path(args.out_dir);
    clic::write_manifest(strata.low, dir / "low.jsonl");
    clic::write_manifest(strata.mid, dir / "mid.jsonl");
    clic::write_manifest(strata.high, dir / "high.jsonl");
    std::printf("low=%zu mid=%zu high=%zu (lo=%s hi=%s)\n", strata.low.size(),
                strata.mid.size(), strata.high.size(), format_double(args.lo, 3).c_str(),
                format_double(args.hi, 3).c_str());
}

struct FewshotArgs {
    std::string manifest;
    std::string encoder;
    std::vector<int> ns;
    std::string out;
    std::string report;
    clic::FinetuneConfig config;
};

void run_fewshot(const FewshotArgs& args) {
    const auto manifest = clic::read_manifest(args.manifest);
    const auto labeled = load_labeled(manifest);
    const auto encoder = clic::load_encoder(args.encoder);
    const auto rows = clic::few_shot_curve(encoder, labeled, args.ns, args.config);

    std::string csv = "n,pcc,srcc\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.n) + "," + format_double(row.pcc) + "," +
               format_double(row.srcc) + "\n";
        std::printf("n=%d pcc=%s srcc=%s\n", row.n, format_double(row.pcc).c_str(),
                    format_double(row.srcc).c_str());
    }
    write_text_file(csv, args.out);

    if (!args.report.empty()) {
        ordered_json report;
        report["config"] = {{"manifest", args.manifest},
                            {"encoder", args.encoder},
                            {"ns", args.ns},
                            {"out", args.out},
                            {"batch_size", args.config.batch_size},
                            {"lr", args.config.lr},
                            {"momentum", args.config.momentum},
                            {"weight_decay", args.config.weight_decay},
                            {"epochs", args.config.epochs},
                            {"seed", args.config.seed}};
        ordered_json rows_json = ordered_json::array();
        for (const auto& row : rows) {
            rows_json.push_back({{"n", row.n}, {"pcc", row.pcc}, {"srcc", row.srcc}});
        }
        report["rows"] = rows_json;
        write_json_file(report, args.report);
    }
}

struct FuseArgs {
    std::string task;
    std::string ic;
    double weight = 0.5;
    std::string out;
};

void run_fuse_demo(const FuseArgs& args) {
    const auto task = clic::read_feature_map(args.task);
    const auto ic = clic::read_feature_map(args.ic);
    const auto fused = clic::fuse(task, ic, args.weight);
    clic::write_feature_map(fused, args.out);
    std::printf("fused [%d,%d,%d] + %s * aligned([%d,%d,%d]) -> %s\n", task.channels,
                task.height, task.width, format_double(args.weight, 3).c_str(), ic.channels,
                ic.height, ic.width, args.out.c_str());
}

void add_seed_option(CLI::App* cmd, std::uint64_t& seed) {
    cmd->add_option("--seed", seed, "RNG seed (env CLIC_SEED)")->envname("CLIC_SEED");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CLIC: contrastive image-complexity toolkit"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    cmd_synth->add_option("--count", synth.count, "Number of images")->required();
    cmd_synth->add_option("--side", synth.side, "Image side length");
    cmd_synth->add_option("--out-dir", synth.out_dir, "Directory for PNGs")->required();
    cmd_synth->add_option("--manifest", synth.manifest, "Manifest output path")->required();
    add_seed_option(cmd_synth, synth.seed);
    cmd_synth->callback([&] { run_synth(synth); });

    ScoreArgs score;
    auto* cmd_score = app.add_subcommand("score", "Score a manifest with one scorer");
    cmd_score->add_option("--manifest", score.manifest, "Input manifest")->required();
    cmd_score->add_option("--scorer", score.scorer, "entropy | edge | compress | clic")
        ->required();
    cmd_score->add_option("--out", score.out, "Scored manifest output")->required();
    cmd_score->add_option("--report", score.report, "Summary JSON output");
    cmd_score->add_option("--encoder", score.encoder, "Encoder checkpoint (clic scorer)");
    cmd_score->add_option("--head", score.head, "Head checkpoint (clic scorer)");
    cmd_score->add_option("--jobs", score.jobs, "Worker threads");
    add_seed_option(cmd_score, score.seed);
    cmd_score->callback([&] { run_score(score); });

    ExpandArgs expand;
    auto* cmd_expand = app.add_subcommand("expand", "Crop-and-mix dataset expansion");
    cmd_expand->add_option("--manifest", expand.manifest, "Input manifest")->required();
    cmd_expand->add_option("--c", expand.c, "Crop hyperparameter (>= 2)")->required();
    cmd_expand->add_option("--out-dir", expand.out_dir, "Directory for generated PNGs")
        ->required();
    cmd_expand->add_option("--out", expand.out, "Generated manifest output")->required();
    cmd_expand->add_option("--report", expand.report, "Report JSON output");
    cmd_expand->add_flag("--keep-originals", expand.keep_originals,
                         "Append source entries to the output manifest");
    add_seed_option(cmd_expand, expand.seed);
    cmd_expand->callback([&] { run_expand(expand); });

    TrainArgs train;
    auto* cmd_train = app.add_subcommand("train", "Contrastive pre-training");
    cmd_train->add_option("--manifest", train.manifest, "Training manifest")->required();
    cmd_train->add_option("--out-dir", train.out_dir, "Checkpoint directory")->required();
    cmd_train->add_option("--epochs", train.config.epochs, "Training epochs");
    cmd_train->add_option("--batch-size", train.config.batch_size, "Images per step");
    cmd_train->add_option("--lr", train.config.lr, "Base learning rate");
    cmd_train->add_option("--queue-capacity", train.config.queue_capacity,
                          "Negative queue size (multiple of batch)");
    cmd_train->add_option("--c", train.config.rcm_c, "Crop hyperparameter");
    cmd_train->add_option("--momentum-m", train.config.momentum_m,
                          "Key-encoder momentum coefficient");
    cmd_train->add_option("--tau", train.config.temperature, "Softmax temperature");
    cmd_train->add_option("--sgd-momentum", train.config.sgd_momentum, "SGD momentum");
    cmd_train->add_option("--weight-decay", train.config.weight_decay, "Weight decay");
    cmd_train->add_flag("--resume", train.resume, "Continue from state.bin in --out-dir");
    add_seed_option(cmd_train, train.config.seed);
    cmd_train->callback([&] { run_train(train); });

    FinetuneArgs finetune;
    auto* cmd_finetune = app.add_subcommand("finetune", "Train the scoring head");
    cmd_finetune->add_option("--manifest", finetune.manifest, "Labeled manifest")->required();
    cmd_finetune->add_option("--encoder", finetune.encoder, "Encoder checkpoint")->required();
    cmd_finetune->add_option("--out", finetune.out, "Head checkpoint output")->required();
    cmd_finetune->add_option("--report", finetune.report, "Report JSON output");
    cmd_finetune->add_option("--epochs", finetune.config.epochs, "Epochs");
    cmd_finetune->add_option("--batch-size", finetune.config.batch_size, "Batch size");
    cmd_finetune->add_option("--lr", finetune.config.lr, "Learning rate");
    cmd_finetune->add_option("--momentum", finetune.config.momentum, "SGD momentum");
    cmd_finetune->add_option("--weight-decay", finetune.config.weight_decay, "Weight decay");
    add_seed_option(cmd_finetune, finetune.config.seed);
    cmd_finetune->callback([&] { run_finetune(finetune); });

    EvalArgs eval;
    auto* cmd_eval = app.add_subcommand("eval", "Correlate predictions with labels");
    cmd_eval->add_option("--manifest", eval.manifest, "Labeled manifest")->required();
    cmd_eval->add_option("--encoder", eval.encoder, "Encoder checkpoint")->required();
    cmd_eval->add_option("--head", eval.head, "Head checkpoint")->required();
    cmd_eval->add_option("--out", eval.out, "Report JSON output")->required();
    add_seed_option(cmd_eval, eval.seed);
    cmd_eval->callback([&] { run_eval(eval); });

    IcdArgs icd;
    auto* cmd_icd = app.add_subcommand("icd", "Complexity distribution analysis");
    cmd_icd->add_option("--manifest", icd.manifest, "Input manifest")->required();
    cmd_icd->add_option("--scorer", icd.scorer, "entropy | edge | compress | clic")
        ->required();
    cmd_icd->add_option("--bins", icd.bins, "Histogram bins");
    cmd_icd->add_option("--out", icd.out, "Report JSON output")->required();
    cmd_icd->add_option("--hist-csv", icd.hist_csv, "Histogram CSV output");
    cmd_icd->add_option("--svg", icd.svg, "Histogram SVG output");
    cmd_icd->add_option("--encoder", icd.encoder, "Encoder checkpoint (clic scorer)");
    cmd_icd->add_option("--head", icd.head, "Head checkpoint (clic scorer)");
    cmd_icd->add_option("--jobs", icd.jobs, "Worker threads");
    add_seed_option(cmd_icd, icd.seed);
    cmd_icd->callback([&] { run_icd(icd); });

    StratifyArgs stratify;
    auto* cmd_stratify = app.add_subcommand("stratify", "Split a scored manifest into strata");
    cmd_stratify->add_option("--scored", stratify.scored, "Scored manifest")->required();
    cmd_stratify->add_option("--lo", stratify.lo, "Low threshold (strict <)");
    cmd_stratify->add_option("--hi", stratify.hi, "High threshold (strict >)");
    cmd_stratify->add_option("--out-dir", stratify.out_dir, "Directory for strata manifests")
        ->required();
    cmd_stratify->callback([&] { run_stratify(stratify); });

    FewshotArgs fewshot;
    auto* cmd_fewshot = app.add_subcommand("fewshot", "Few-shot fine-tuning sweep");
    cmd_fewshot->add_option("--manifest", fewshot.manifest, "Labeled pool manifest")
        ->required();
    cmd_fewshot->add_option("--encoder", fewshot.encoder, "Encoder checkpoint")->required();
    cmd_fewshot->add_option("--ns", fewshot.ns, "Sample counts, ascending")
        ->required()
        ->delimiter(',');
    cmd_fewshot->add_option("--out", fewshot.out, "Curve CSV output")->required();
    cmd_fewshot->add_option("--report", fewshot.report, "Report JSON output");
    cmd_fewshot->add_option("--epochs", fewshot.config.epochs, "Epochs per run");
    cmd_fewshot->add_option("--batch-size", fewshot.config.batch_size, "Batch size");
    cmd_fewshot->add_option("--lr", fewshot.config.lr, "Learning rate");
    add_seed_option(cmd_fewshot, fewshot.config.seed);
    cmd_fewshot->callback([&] { run_fewshot(fewshot); });

    FuseArgs fuse;
    auto* cmd_fuse = app.add_subcommand("fuse-demo", "Fuse a complexity map into a task map");
    cmd_fuse->add_option("--task", fuse.task, "Task feature-map blob")->required();
    cmd_fuse->add_option("--ic", fuse.ic, "Complexity feature-map blob")->required();
    cmd_fuse->add_option("--weight", fuse.weight, "Fusion weight");
    cmd_fuse->add_option("--out", fuse.out, "Fused blob output")->required();
    cmd_fuse->callback([&] { run_fuse_demo(fuse); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const clic::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const clic::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
