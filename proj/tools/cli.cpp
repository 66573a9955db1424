#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corebank/error.hpp"
#include "corebank/evaluation.hpp"
#include "corebank/features.hpp"
#include "corebank/memory_bank.hpp"
#include "corebank/online.hpp"
#include "corebank/rng.hpp"
#include "corebank/scoring.hpp"
#include "corebank/testbed.hpp"
#include "run_config.hpp"

namespace corebank::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Collects flag → config-path bindings; flags given on the command line
// override the config file.
class Overrides {
public:
    template <typename T>
    CLI::Option* bind(CLI::App* cmd, const std::string& flag, const std::string& pointer,
                      const std::string& help) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = cmd->add_option(flag, *value, help);
        appliers_.push_back([opt, value, pointer](json& cfg) {
            if (opt->count() > 0) cfg[json::json_pointer(pointer)] = *value;
        });
        return opt;
    }

    CLI::Option* bind_flag(CLI::App* cmd, const std::string& flag, const std::string& pointer,
                           bool when_set, const std::string& help) {
        CLI::Option* opt = cmd->add_flag(flag, help);
        appliers_.push_back([opt, pointer, when_set](json& cfg) {
            if (opt->count() > 0) cfg[json::json_pointer(pointer)] = when_set;
        });
        return opt;
    }

    // Comma-separated list flag stored as a JSON array of strings.
    // When `enables` is set, giving the flag also sets that boolean key.
    CLI::Option* bind_list(CLI::App* cmd, const std::string& flag, const std::string& pointer,
                           const std::string& help, const std::string& enables = "") {
        auto value = std::make_shared<std::vector<std::string>>();
        CLI::Option* opt = cmd->add_option(flag, *value, help)->delimiter(',');
        appliers_.push_back([opt, value, pointer, enables](json& cfg) {
            if (opt->count() == 0) return;
            cfg[json::json_pointer(pointer)] = *value;
            if (!enables.empty()) cfg[json::json_pointer(enables)] = true;
        });
        return opt;
    }

    CLI::Option* bind_seeds(CLI::App* cmd, const std::string& flag, const std::string& pointer,
                            const std::string& help) {
        auto value = std::make_shared<std::vector<std::uint64_t>>();
        CLI::Option* opt = cmd->add_option(flag, *value, help)->delimiter(',');
        appliers_.push_back([opt, value, pointer](json& cfg) {
            if (opt->count() > 0) cfg[json::json_pointer(pointer)] = *value;
        });
        return opt;
    }

    void apply(json& cfg) const {
        for (const auto& f : appliers_) f(cfg);
    }

private:
    std::vector<std::function<void(json&)>> appliers_;
};

void add_extractor_flags(CLI::App* cmd, Overrides& o) {
    o.bind<int>(cmd, "--patch-size", "/extractor/patch_size", "Patch side in pixels");
    o.bind<int>(cmd, "--stride", "/extractor/stride", "Patch stride in pixels");
    o.bind<int>(cmd, "--radius", "/extractor/neighborhood_radius", "Neighborhood radius in grid cells");
}

void add_adapt_flags(CLI::App* cmd, Overrides& o) {
    o.bind<long long>(cmd, "--max-new", "/budget/max_new", "Embeddings admitted per image (or per sample)");
    o.bind<double>(cmd, "--tau", "/budget/min_distance", "Squared-distance admission threshold");
    o.bind<std::string>(cmd, "--budget-scope", "/budget/scope", "per_image | per_sample");
    o.bind_list(cmd, "--augment", "/augment/ops", "Enable augmentation with these ops, e.g. sharpen,blur",
                "/augment/enabled");
    o.bind_flag(cmd, "--no-augment", "/augment/enabled", false, "Disable augmentation");
    o.bind<std::string>(cmd, "--strategy", "/protocol/strategy", "ikcenter | baseline");
    o.bind<double>(cmd, "--baseline-ratio", "/protocol/baseline_ratio", "Baseline subsampling ratio");
}

std::vector<fs::path> list_images(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".png") found.push_back(e.path());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw IoError("no such image or directory: " + in);
        }
    }
    return out;
}

void ensure_dir(const fs::path& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

void echo_config(const json& cfg, const fs::path& dir) {
    ensure_dir(dir);
    write_text((dir.empty() ? fs::path(".") : dir) / "effective_config.json", cfg.dump(2) + "\n");
}

std::size_t count_of(const json& cfg, const char* section, const char* key) {
    const json& v = cfg.at(section).at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw UsageError(std::string(section) + "." + key + " must be a non-negative integer");
    return v.get<std::size_t>();
}

std::string need_path(const json& cfg, const char* key, const char* flag) {
    const std::string v = cfg.at("paths").at(key).get<std::string>();
    if (v.empty()) throw UsageError(std::string(flag) + " is required");
    return v;
}

std::unique_ptr<Extractor> make_extractor(const json& cfg) {
    const std::string emb = cfg.at("paths").at("embeddings").get<std::string>();
    if (!emb.empty()) return std::make_unique<PrecomputedExtractor>(load_precomputed(emb));
    return std::make_unique<DescriptorExtractor>(extractor_from(cfg));
}

// --- commands ----------------------------------------------------------------

int cmd_synth(const json& cfg, std::ostream& out) {
    DatasetLayout layout;
    layout.train_variants = count_of(cfg, "protocol", "pretrain_variants");
    layout.eval_variants = count_of(cfg, "protocol", "eval_variants");
    layout.defects_per_variant = count_of(cfg, "protocol", "defects_per_variant");
    layout.seed = cfg.at("seeds").at("data").get<std::uint64_t>();
    layout.drift = cfg.at("protocol").at("drift").get<bool>();
    if (layout.defects_per_variant < 1) throw UsageError("--defects-per-variant must be >= 1");
    const fs::path root = need_path(cfg, "out", "--out");
    try {
        write_dataset(layout, root);
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    echo_config(cfg, root);
    out << "wrote " << layout.train_variants << " train and " << layout.eval_variants
        << " eval variants to " << root.string() << "\n";
    return 0;
}

int cmd_pretrain(const json& cfg, std::ostream& out) {
    const fs::path bank_path = need_path(cfg, "out", "--out");
    const double ratio = cfg.at("protocol").at("coreset_ratio").get<double>();
    if (!(ratio > 0.0 && ratio <= 1.0)) throw UsageError("--coreset-ratio must be in (0, 1]");
    const auto seed = cfg.at("seeds").at("coreset").get<std::uint64_t>();

    std::vector<EmbeddingSet> pool;
    const std::string emb = cfg.at("paths").at("embeddings").get<std::string>();
    if (!emb.empty()) {
        pool = load_precomputed(emb);
    } else {
        const std::string dataset = need_path(cfg, "dataset", "--train-dir");
        const ExtractorConfig ecfg = extractor_from(cfg);
        for (const auto& p : list_images({dataset}))
            pool.push_back(DescriptorExtractor(ecfg).extract(read_png(p), p.stem().string()));
    }
    std::size_t n = 0;
    for (const auto& s : pool) n += s.size();
    if (n == 0) throw InvalidInput("no training embeddings found");
    const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
    const MemoryBank bank = offline_greedy_coreset(pool, std::max<std::size_t>(k, 1), seed);
    ensure_dir(bank_path.parent_path());
    save_bank(bank, bank_path);
    echo_config(cfg, bank_path.parent_path());
    out << "pretrained bank: " << bank.size() << " of " << n << " embeddings, dim " << bank.dim()
        << " -> " << bank_path.string() << "\n";
    return 0;
}

int cmd_adapt(const json& cfg, const std::vector<std::string>& images, std::ostream& out) {
    const fs::path in_bank = need_path(cfg, "bank", "--bank");
    const fs::path out_bank = need_path(cfg, "out", "--out");
    AdaptationConfig acfg = adaptation_from(cfg);
    if (!fs::exists(in_bank)) throw IoError("bank file not found: " + in_bank.string());
    MemoryBank bank = load_bank(in_bank);
    const auto extractor = make_extractor(cfg);

    std::vector<StreamSample> stream;
    const auto paths = list_images(images);
    for (std::size_t i = 0; i < paths.size(); ++i)
        stream.push_back({read_png(paths[i]), paths[i].stem().string(), static_cast<std::int64_t>(i)});

    const std::size_t before = bank.size();
    const AdaptationReport report = run_session(stream, bank, acfg, *extractor);
    ensure_dir(out_bank.parent_path());
    save_bank(bank, out_bank);

    fs::path report_path = cfg.at("paths").at("report").get<std::string>();
    if (report_path.empty()) report_path = fs::path(out_bank).replace_extension(".report.csv");
    ensure_dir(report_path.parent_path());
    write_text(report_path, report_csv(report));
    write_text(fs::path(report_path).replace_extension(".json"), report_json(report));
    echo_config(cfg, out_bank.parent_path());

    out << "adapted on " << report.steps.size() << " samples with " << to_string(acfg.strategy)
        << ": bank " << before << " -> " << bank.size() << " entries\n";
    if (report.failure) std::rethrow_exception(report.failure);
    return 0;
}

int cmd_score(const json& cfg, const std::vector<std::string>& images, const std::string& maps_dir,
              std::ostream& out) {
    const fs::path bank_path = need_path(cfg, "bank", "--bank");
    const fs::path scores_path = need_path(cfg, "out", "--out");
    ScoreMode mode;
    try {
        mode = parse_score_mode(cfg.at("protocol").at("mode").get<std::string>());
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    const double sigma = cfg.at("protocol").at("smooth_sigma").get<double>();
    if (!(sigma >= 0.0)) throw UsageError("--sigma must be >= 0");
    const ExtractorConfig ecfg = extractor_from(cfg);
    const MemoryBank bank = load_bank(bank_path);
    const auto extractor = make_extractor(cfg);

    std::ostringstream csv;
    csv << "file,score_" << to_string(mode) << "\n";
    if (!maps_dir.empty()) ensure_dir(maps_dir);
    for (const auto& p : list_images(images)) {
        const Image image = read_png(p);
        const EmbeddingSet set = extractor->extract(image, p.stem().string());
        const PatchScores scores = patch_scores(set, bank);
        csv << p.filename().string() << ',' << std::setprecision(12) << image_score(scores, mode) << "\n";
        if (!maps_dir.empty()) {
            const AnomalyMap map = to_anomaly_map(scores, image.width, image.height, ecfg, sigma);
            const fs::path base = fs::path(maps_dir) / p.stem();
            write_anomaly_map_png(map, base.string() + "_map.png", base.string() + "_map.json");
            write_anomaly_map_raw(map, base.string() + "_map.cgem", p.stem().string());
        }
    }
    ensure_dir(scores_path.parent_path());
    write_text(scores_path, csv.str());
    echo_config(cfg, scores_path.parent_path());
    out << "scored images -> " << scores_path.string() << "\n";
    return 0;
}

int cmd_eval(const json& cfg, bool save_banks, std::ostream& out) {
    const fs::path dir = need_path(cfg, "out", "--out");
    const ProtocolOptions options = protocol_from(cfg);
    const auto seeds = cfg.at("seeds").at("runs").get<std::vector<std::uint64_t>>();
    if (seeds.empty()) throw UsageError("at least one run seed is required");

    std::vector<ProtocolRun> runs;
    for (auto seed : seeds) {
        try {
            runs.push_back(run_seeded_protocol(options, seed));
        } catch (const InvalidInput& e) {
            throw UsageError(e.what());
        }
        out << "seed " << seed << " done\n";
    }
    const auto summary = summarize(runs);
    ensure_dir(dir);
    write_text(dir / "runs.csv", runs_csv(runs));
    write_text(dir / "curves.csv", curves_csv(runs));
    write_text(dir / "summary.csv", summary_csv(summary));
    write_text(dir / "report.json", protocol_json(runs, summary));
    for (ProtocolArm arm : options.arms) {
        const std::string name = to_string(arm);
        write_text(dir / ("curve_" + name + "_auroc.dat"), curve_dat(runs, arm, options.mode, CurveMetric::Auroc));
        write_text(dir / ("curve_" + name + "_aupr.dat"), curve_dat(runs, arm, options.mode, CurveMetric::Aupr));
    }
    if (save_banks) {
        ensure_dir(dir / "banks");
        for (const auto& run : runs)
            for (const auto& a : run.arms)
                save_bank(a.bank, dir / "banks" / ("seed" + std::to_string(run.seed) + "_" + to_string(a.arm) + ".cgmb"));
    }
    echo_config(cfg, dir);
    out << summary_csv(summary);
    return 0;
}

int cmd_bench(const json& cfg, std::size_t reps, std::ostream& out) {
    const fs::path dir = need_path(cfg, "out", "--out");
    if (reps == 0) throw UsageError("--reps must be >= 1");
    const ExtractorConfig ecfg = extractor_from(cfg);
    AdaptationConfig acfg = adaptation_from(cfg);
    const double ratio = cfg.at("protocol").at("coreset_ratio").get<double>();
    const auto seed = cfg.at("seeds").at("data").get<std::uint64_t>();
    const auto n_pre = count_of(cfg, "protocol", "pretrain_variants");

    const auto pre = enumerate_variants(std::max<std::size_t>(n_pre, 1), derive_seed(seed, 1),
                                        [](const SceneConfig& c) { return c.has_shape() && !c.has_rotation(); });
    const auto fresh = enumerate_variants(10, derive_seed(seed, 2),
                                          [](const SceneConfig& c) { return c.has_rotation(); });
    std::vector<EmbeddingSet> pool;
    for (std::size_t i = 0; i < pre.size(); ++i)
        pool.push_back(DescriptorExtractor(ecfg).extract(render_normal(pre[i]), "pretrain_" + std::to_string(i)));
    std::size_t n = 0;
    for (const auto& s : pool) n += s.size();
    const MemoryBank pretrained = offline_greedy_coreset(
        pool, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)))), seed);
    std::vector<Image> batch;
    for (const auto& c : fresh) batch.push_back(render_normal(c));

    std::size_t next = 0;
    const LatencyStats online = benchmark([&] {
        MemoryBank bank = pretrained;
        ingest({batch[next % batch.size()], "bench", 0}, bank, acfg);
        ++next;
    }, reps);
    const LatencyStats batched = benchmark([&] {
        batch_recoreset_step(pool, batch, ecfg, ratio, seed);
    }, reps);
    const EmbeddingSet query = extract_patches(batch.front(), ecfg);
    const LatencyStats inference = benchmark([&] {
        const EmbeddingSet q = extract_patches(batch.front(), ecfg);
        image_score(patch_scores(q, pretrained), ScoreMode::Max);
    }, reps);

    MemoryBank adapted = pretrained;
    std::vector<StreamSample> stream;
    for (std::size_t i = 0; i < batch.size(); ++i)
        stream.push_back({batch[i], "bench_" + std::to_string(i), static_cast<std::int64_t>(i)});
    run_session(stream, adapted, acfg);

    std::ostringstream csv;
    csv << "metric,reps,mean_seconds,p95_seconds,min_seconds,max_seconds,bytes\n";
    auto row = [&](const char* name, const LatencyStats& s) {
        csv << name << ',' << s.reps << ',' << s.mean_seconds << ',' << s.p95_seconds << ','
            << s.min_seconds << ',' << s.max_seconds << ",\n";
    };
    row("train_step_online", online);
    row("train_step_batch10", batched);
    row("inference", inference);
    csv << "bank_bytes_pretrained,,,,,," << measure_bank(pretrained).total() << "\n";
    csv << "bank_bytes_after_10_samples,,,,,," << measure_bank(adapted).total() << "\n";
    csv << "query_embedding_bytes,,,,,," << query.byte_size() << "\n";
    ensure_dir(dir);
    write_text(dir / "bench.csv", csv.str());
    echo_config(cfg, dir);
    out << csv.str();
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"corebank: memory-bank anomaly detection with online coreset adaptation"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON run config (flags override it)");

    Overrides synth_o, pre_o, adapt_o, score_o, eval_o, bench_o;

    CLI::App* synth = app.add_subcommand("synth", "Render a synthetic five-slot dataset");
    synth->add_option("--config", config_path, "JSON run config");
    synth_o.bind<long long>(synth, "--variants", "/protocol/pretrain_variants", "Training variants");
    synth_o.bind<long long>(synth, "--eval-variants", "/protocol/eval_variants", "Evaluation variants");
    synth_o.bind<long long>(synth, "--defects-per-variant", "/protocol/defects_per_variant", "Defective images per eval variant");
    synth_o.bind<std::uint64_t>(synth, "--seed", "/seeds/data", "Data seed");
    synth_o.bind<std::string>(synth, "--out", "/paths/out", "Output dataset directory");
    synth_o.bind_flag(synth, "--no-drift", "/protocol/drift", false, "Draw train and eval layouts from one family");

    CLI::App* pre = app.add_subcommand("pretrain", "Build a bank by offline greedy coreset");
    pre->add_option("--config", config_path, "JSON run config");
    pre_o.bind<std::string>(pre, "--train-dir", "/paths/dataset", "Directory of normal training PNGs");
    pre_o.bind<std::string>(pre, "--embeddings", "/paths/embeddings", "CGEM file instead of images");
    pre_o.bind<double>(pre, "--coreset-ratio", "/protocol/coreset_ratio", "Fraction of embeddings kept");
    pre_o.bind<std::uint64_t>(pre, "--seed", "/seeds/coreset", "Coreset seed");
    pre_o.bind<std::string>(pre, "--out", "/paths/out", "Output CGMB bank");
    add_extractor_flags(pre, pre_o);

    std::vector<std::string> adapt_images;
    CLI::App* adapt = app.add_subcommand("adapt", "Stream normal images into a bank");
    adapt->add_option("--config", config_path, "JSON run config");
    adapt->add_option("--images", adapt_images, "PNG files or directories, streamed in order")->required();
    adapt_o.bind<std::string>(adapt, "--bank", "/paths/bank", "Input CGMB bank");
    adapt_o.bind<std::string>(adapt, "--out", "/paths/out", "Output CGMB bank");
    adapt_o.bind<std::string>(adapt, "--report", "/paths/report", "Report CSV path");
    adapt_o.bind<std::string>(adapt, "--embeddings", "/paths/embeddings", "CGEM file keyed by image stem");
    adapt_o.bind<std::uint64_t>(adapt, "--seed", "/seeds/adapt", "Baseline subsampling seed");
    add_adapt_flags(adapt, adapt_o);
    add_extractor_flags(adapt, adapt_o);

    std::vector<std::string> score_images;
    std::string maps_dir;
    CLI::App* score = app.add_subcommand("score", "Score images against a bank");
    score->add_option("--config", config_path, "JSON run config");
    score->add_option("--images", score_images, "PNG files or directories")->required();
    score->add_option("--maps", maps_dir, "Directory for anomaly map PNG/JSON/CGEM files");
    score_o.bind<std::string>(score, "--bank", "/paths/bank", "CGMB bank");
    score_o.bind<std::string>(score, "--out", "/paths/out", "Scores CSV");
    score_o.bind<std::string>(score, "--mode", "/protocol/mode", "max | mean");
    score_o.bind<double>(score, "--sigma", "/protocol/smooth_sigma", "Gaussian smoothing of maps (pixels)");
    score_o.bind<std::string>(score, "--embeddings", "/paths/embeddings", "CGEM file keyed by image stem");
    add_extractor_flags(score, score_o);

    bool save_banks = false;
    CLI::App* eval = app.add_subcommand("eval", "Run the drift-then-adapt protocol");
    eval->add_option("--config", config_path, "JSON run config");
    eval->add_flag("--save-banks", save_banks, "Write every final bank");
    eval_o.bind<std::string>(eval, "--out", "/paths/out", "Output directory");
    eval_o.bind_seeds(eval, "--seeds", "/seeds/runs", "Comma-separated run seeds");
    eval_o.bind<long long>(eval, "--pretrain-variants", "/protocol/pretrain_variants", "Pre-training variants");
    eval_o.bind<long long>(eval, "--adapt-variants", "/protocol/adapt_variants", "Adaptation variants");
    eval_o.bind<long long>(eval, "--eval-variants", "/protocol/eval_variants", "Evaluation variants");
    eval_o.bind<long long>(eval, "--defects-per-variant", "/protocol/defects_per_variant", "Defective images per eval variant");
    eval_o.bind<double>(eval, "--coreset-ratio", "/protocol/coreset_ratio", "Pre-training coreset ratio");
    eval_o.bind<std::string>(eval, "--mode", "/protocol/mode", "max | mean");
    eval_o.bind_list(eval, "--arms", "/protocol/arms", "Comma-separated protocol arms");
    eval_o.bind<long long>(eval, "--max-new", "/budget/max_new", "Per-image feature budget");
    eval_o.bind<double>(eval, "--tau", "/budget/min_distance", "Squared-distance admission threshold");
    eval_o.bind_list(eval, "--augment", "/augment/ops", "Augmentation ops");
    add_extractor_flags(eval, eval_o);

    std::size_t reps = 10;
    CLI::App* bench = app.add_subcommand("bench", "Latency and memory benchmark");
    bench->add_option("--config", config_path, "JSON run config");
    bench->add_option("--reps", reps, "Timed repetitions (after 3 warm-up runs)");
    bench_o.bind<std::string>(bench, "--out", "/paths/out", "Output directory");
    bench_o.bind<std::uint64_t>(bench, "--seed", "/seeds/data", "Data seed");
    bench_o.bind<long long>(bench, "--pretrain-variants", "/protocol/pretrain_variants", "Pre-training variants");
    add_adapt_flags(bench, bench_o);
    add_extractor_flags(bench, bench_o);

    std::vector<std::string> argv_store{"corebank"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        json cfg = default_run_config();
        if (!config_path.empty()) merge_run_config(cfg, load_run_config(config_path));
        if (synth->parsed()) {
            synth_o.apply(cfg);
            return cmd_synth(cfg, out);
        }
        if (pre->parsed()) {
            pre_o.apply(cfg);
            return cmd_pretrain(cfg, out);
        }
        if (adapt->parsed()) {
            adapt_o.apply(cfg);
            return cmd_adapt(cfg, adapt_images, out);
        }
        if (score->parsed()) {
            score_o.apply(cfg);
            return cmd_score(cfg, score_images, maps_dir, out);
        }
        if (eval->parsed()) {
            eval_o.apply(cfg);
            return cmd_eval(cfg, save_banks, out);
        }
        if (bench->parsed()) {
            bench_o.apply(cfg);
            return cmd_bench(cfg, reps, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace corebank::cli
