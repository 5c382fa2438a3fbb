#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "socialscope/errors.hpp"

#include "socialscope/botdetect.hpp"
#include "socialscope/corpus.hpp"
#include "socialscope/graphs.hpp"
#include "socialscope/sentiment.hpp"
#include "socialscope/stats.hpp"
#include "socialscope/streams.hpp"
#include "socialscope/tailfit.hpp"

namespace socialscope {

enum class Phase { Ingest, Sentiment, Network, Streams, Bots, Fit, Report };

std::string_view to_string(Phase p);
/// Throws ConfigError for an unknown phase name.
Phase parse_phase(std::string_view s);
/// Comma separated phase list; "all" selects every phase.
std::set<Phase> parse_phases(std::string_view list);

/// Which language subset the analyses look at.
enum class LanguageScope { de, en, all };

struct LexiconPaths {
    std::filesystem::path sentiment;
    std::filesystem::path emotion;
};

struct AnnotationConfig {
    std::filesystem::path path;
    std::string stream;
    std::vector<std::string> vocabulary;
    std::vector<LabelRule> rules;
};

struct BotConfig {
    std::string provider = "file";  // "file" or "http"
    std::filesystem::path scores;   // file provider
    HttpProviderConfig http;
    Thresholds thresholds;
    HeuristicRules heuristic;
    unsigned concurrency = 4;
};

struct TailfitConfig {
    int n_sims = 1000;
    double significance = kDefaultSignificance;
    bool pin_xmin = false;
    CommonTail common_tail = CommonTail::Lower;
    std::vector<ModelFamily> families = {ModelFamily::PowerLaw, ModelFamily::LogNormal, ModelFamily::Exponential,
                                         ModelFamily::Poisson};
};

/// Fully resolved run configuration; relative paths are anchored at the config
/// file's directory.
struct RunConfig {
    std::vector<std::filesystem::path> inputs;
    LanguageScope language = LanguageScope::de;
    std::uint64_t seed = 1;
    bool seed_defaulted = false;
    unsigned workers = 0;
    std::vector<std::string> selector_hashtags;
    std::vector<std::vector<std::string>> selector_conjunctions;
    std::optional<std::filesystem::path> normalization;
    std::map<Language, LexiconPaths> lexicons;
    std::vector<Target> targets;
    std::optional<std::filesystem::path> categories;
    std::vector<std::string> egos;
    std::set<HashtagCategory> excluded_categories = {HashtagCategory::Other};
    std::optional<std::filesystem::path> streams;
    std::optional<AnnotationConfig> annotations;
    std::vector<std::string> trajectories;
    std::filesystem::path followers_a;
    std::filesystem::path followers_b;
    std::vector<std::pair<std::string, std::string>> markers;  // date, label
    std::optional<std::pair<std::string, std::string>> range;
    BotConfig bots;
    TailfitConfig tailfit;
    double resolution = 1.0;
    bool offline = false;
    std::filesystem::path out = "out";

    /// Snapshot with every default materialized.
    nlohmann::ordered_json to_json() const;
};

/// Collects every field-level problem instead of stopping at the first.
class ConfigValidationError : public ConfigError {
public:
    explicit ConfigValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> language;
    std::optional<std::filesystem::path> out;
    std::optional<unsigned> workers;
    bool offline = false;
};

/// Parses and validates. Flags in `overrides` win over file values. Throws
/// ConfigValidationError listing every problem found.
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                       const ConfigOverrides& overrides = {});

struct RunResult {
    int exit_code = 0;
    std::vector<Phase> completed;
    std::optional<Phase> failed;
    std::string error;
};

/// Runs the requested phases in dependency order, caching each phase's output
/// under config.out. A phase whose inputs are missing from the cache fails with
/// a message naming the missing file. Progress and diagnostics go to `log`.
RunResult run_phases(const RunConfig& config, const std::set<Phase>& phases, std::ostream& log);

/// Section names written by the analysis phases.
const std::vector<std::string>& section_names();

}  // namespace socialscope
