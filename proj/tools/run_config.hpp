#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "corebank/evaluation.hpp"
#include "corebank/online.hpp"

namespace corebank::cli {

// Bad flags, bad config files or invalid settings; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every recognized key with its default. Sections: extractor, augment,
// budget, protocol, seeds, paths.
nlohmann::json default_run_config();

// Overlays `overrides` on `base`. Keys unknown to the defaults, or values of a
// different JSON type than the default, raise UsageError.
void merge_run_config(nlohmann::json& base, const nlohmann::json& overrides,
                      const std::string& where = "");

nlohmann::json load_run_config(const std::filesystem::path& path);

ExtractorConfig extractor_from(const nlohmann::json& cfg);
AdaptationConfig adaptation_from(const nlohmann::json& cfg);
ProtocolOptions protocol_from(const nlohmann::json& cfg);

}  // namespace corebank::cli
