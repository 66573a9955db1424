#include "run_config.hpp"

#include <fstream>

#include "corebank/error.hpp"

namespace corebank::cli {

nlohmann::json default_run_config() {
    nlohmann::json arms = nlohmann::json::array();
    for (ProtocolArm a : all_protocol_arms()) arms.push_back(to_string(a));
    return {
        {"extractor", {{"patch_size", 8}, {"stride", 8}, {"neighborhood_radius", 1}}},
        {"augment", {{"enabled", false}, {"ops", {"sharpen", "blur"}}}},
        {"budget", {{"max_new", 24}, {"min_distance", 0.0}, {"scope", "per_image"}}},
        {"protocol",
         {{"pretrain_variants", 20},
          {"adapt_variants", 10},
          {"eval_variants", 10},
          {"defects_per_variant", 3},
          {"coreset_ratio", 0.1},
          {"mode", "max"},
          {"arms", arms},
          {"pixel_metrics", true},
          {"strategy", "ikcenter"},
          {"baseline_ratio", 0.05},
          {"smooth_sigma", 4.0},
          {"drift", true}}},
        {"seeds", {{"data", 7}, {"coreset", 0}, {"adapt", 0}, {"runs", {1, 2, 3, 4, 5}}}},
        {"paths", {{"dataset", ""}, {"bank", ""}, {"out", ""}, {"report", ""}, {"embeddings", ""}}},
    };
}

namespace {

bool same_kind(const nlohmann::json& a, const nlohmann::json& b) {
    if (a.is_number() && b.is_number()) {
        // An integer default only accepts integers.
        return !(a.is_number_integer() && !b.is_number_integer());
    }
    return a.type() == b.type();
}

}  // namespace

void merge_run_config(nlohmann::json& base, const nlohmann::json& overrides, const std::string& where) {
    if (!overrides.is_object()) throw UsageError("config" + where + " must be a JSON object");
    for (const auto& [key, value] : overrides.items()) {
        const std::string path = where + "." + key;
        if (!base.contains(key)) throw UsageError("unknown config key '" + path.substr(1) + "'");
        auto& slot = base[key];
        if (slot.is_object()) {
            merge_run_config(slot, value, path);
        } else {
            if (!same_kind(slot, value))
                throw UsageError("config key '" + path.substr(1) + "' has the wrong type");
            slot = value;
        }
    }
}

nlohmann::json load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
    }
}

namespace {

template <typename T>
T read(const nlohmann::json& cfg, const char* section, const char* key) {
    try {
        return cfg.at(section).at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw UsageError(std::string("config key '") + section + "." + key + "' is invalid");
    }
}

std::size_t count(const nlohmann::json& cfg, const char* section, const char* key) {
    const auto v = read<long long>(cfg, section, key);
    if (v < 0) throw UsageError(std::string(section) + "." + key + " must be >= 0");
    return static_cast<std::size_t>(v);
}

template <typename T>
T checked(T value, bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
    return value;
}

}  // namespace

ExtractorConfig extractor_from(const nlohmann::json& cfg) {
    ExtractorConfig e;
    e.patch_size = read<int>(cfg, "extractor", "patch_size");
    e.stride = read<int>(cfg, "extractor", "stride");
    e.neighborhood_radius = read<int>(cfg, "extractor", "neighborhood_radius");
    try {
        e.validate();
    } catch (const InvalidInput& err) {
        throw UsageError(err.what());
    }
    return e;
}

AdaptationConfig adaptation_from(const nlohmann::json& cfg) {
    AdaptationConfig a;
    try {
        a.extractor = extractor_from(cfg);
        a.augment.enabled = read<bool>(cfg, "augment", "enabled");
        for (const auto& op : read<std::vector<std::string>>(cfg, "augment", "ops"))
            a.augment.ops.push_back(parse_augment_op(op));
        const auto max_new = read<long long>(cfg, "budget", "max_new");
        a.budget.max_new = static_cast<std::size_t>(checked(max_new, max_new >= 0, "budget.max_new must be >= 0"));
        a.budget.min_distance = read<double>(cfg, "budget", "min_distance");
        a.budget_scope = parse_budget_scope(read<std::string>(cfg, "budget", "scope"));
        a.strategy = parse_strategy(read<std::string>(cfg, "protocol", "strategy"));
        a.baseline_ratio = read<double>(cfg, "protocol", "baseline_ratio");
        a.seed = read<std::uint64_t>(cfg, "seeds", "adapt");
        a.validate();
    } catch (const InvalidInput& err) {
        throw UsageError(err.what());
    }
    return a;
}

ProtocolOptions protocol_from(const nlohmann::json& cfg) {
    ProtocolOptions p;
    try {
        p.extractor = extractor_from(cfg);
        p.pretrain_variants = count(cfg, "protocol", "pretrain_variants");
        p.adapt_variants = count(cfg, "protocol", "adapt_variants");
        p.eval_variants = count(cfg, "protocol", "eval_variants");
        p.defects_per_variant = count(cfg, "protocol", "defects_per_variant");
        p.coreset_ratio = read<double>(cfg, "protocol", "coreset_ratio");
        p.mode = parse_score_mode(read<std::string>(cfg, "protocol", "mode"));
        p.pixel_metrics = read<bool>(cfg, "protocol", "pixel_metrics");
        p.arms.clear();
        for (const auto& a : read<std::vector<std::string>>(cfg, "protocol", "arms"))
            p.arms.push_back(parse_protocol_arm(a));
        p.augment_ops.clear();
        for (const auto& op : read<std::vector<std::string>>(cfg, "augment", "ops"))
            p.augment_ops.push_back(parse_augment_op(op));
        p.max_new = count(cfg, "budget", "max_new");
        p.min_distance = read<double>(cfg, "budget", "min_distance");
        p.validate();
    } catch (const InvalidInput& err) {
        throw UsageError(err.what());
    }
    return p;
}

}  // namespace corebank::cli
