#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "socialscope/corpus.hpp"

namespace socialscope {

struct KeywordStream {
    std::string name;
    std::vector<std::string> patterns;
    /// Unset means every language.
    std::optional<Language> language;
};

/// A stream whose patterns compiled (case-insensitive ECMAScript regexes).
class CompiledStream {
public:
    /// Throws ConfigError for an empty name, no patterns or a bad pattern.
    explicit CompiledStream(KeywordStream def);
    const KeywordStream& definition() const { return def_; }
    const std::string& name() const { return def_.name; }
    bool matches(const MessageRecord& record) const;

private:
    KeywordStream def_;
    std::vector<std::regex> regexes_;
};

/// JSON array of {name, patterns[], lang}; lang may be "de", "en" or "any".
/// All patterns are compiled here; duplicate names throw ConfigError.
std::vector<CompiledStream> parse_streams(std::string_view json);
std::vector<CompiledStream> load_streams(const std::filesystem::path& path);

/// Daily count of records matching any pattern; a record counts once.
DailySeries track_stream(const Corpus& corpus, const CompiledStream& stream, const DateRange& range,
                         const std::vector<Marker>& markers = {});

struct NamedSeries {
    std::string name;
    DailySeries series;
};

/// One series per stream, in definition order.
std::vector<NamedSeries> track_streams(const Corpus& corpus, const std::vector<CompiledStream>& streams,
                                       const DateRange& range);

/// date column plus one count column per stream.
std::string streams_csv(const std::vector<NamedSeries>& series);

/// Identity of a message's content: hash of the case-folded, whitespace-collapsed
/// text with any "RT @user:" header removed.
std::string content_key(const MessageRecord& record);

struct Trajectory {
    std::string key;
    std::string content_key;
    std::string origin_author;
    DateRange range;
    /// Cumulative retweets per day, indexed by follower code.
    std::array<std::vector<std::uint64_t>, 4> cumulative;
    std::array<std::uint64_t, 4> totals{};
    std::array<std::size_t, 4> distinct_spreaders{};
    std::uint64_t total_retweets = 0;
    std::size_t total_spreaders = 0;
    /// Retweets per distinct spreader; 0 when never retweeted.
    double mean_per_spreader = 0.0;
    std::string top_spreader;
    std::uint64_t top_spreader_count = 0;
    /// Percentage of all retweets made by the most active spreader.
    double max_spreader_share = 0.0;

    /// date, code, cumulative
    std::string to_csv() const;
};

/// The original is the earliest non-retweet record carrying the content of the
/// record identified by `key` (record_key or content_key); every other record
/// with the same content is a retweet or copy. Throws NotFoundError for an
/// unknown key. The range defaults to the origin day through the last copy.
Trajectory retweet_trajectory(const Corpus& corpus, std::string_view key,
                              std::optional<DateRange> range = std::nullopt);

struct AnnotationSet {
    std::set<std::string> vocabulary;
    std::map<std::string, std::string> entries;  // message key -> label

    /// CSV (message_key, label). Throws ConfigError for an empty vocabulary, a
    /// label outside it or a key labeled twice differently.
    static AnnotationSet parse(std::string_view csv_content, std::set<std::string> vocabulary);
    static AnnotationSet load(const std::filesystem::path& path, std::set<std::string> vocabulary);
};

struct LabelCounts {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t matched = 0;
    std::vector<std::string> unmatched_keys;

    std::string to_csv() const;
};

/// Counts labels over annotations whose key resolves to a corpus record
/// (record_key or content_key). Throws ConfigError for an empty vocabulary.
LabelCounts join_annotations(const Corpus& corpus, const AnnotationSet& annotations);

struct LabelRule {
    std::string keyword;
    std::string label;
};

struct LabelSuggestion {
    std::string record_key;
    std::string label;
    std::string keyword;
};

/// Keyword hints for analysts; the output is a worksheet, never an AnnotationSet.
/// Only records matching `scope` (when given) are considered. Throws ConfigError
/// for a rule label outside the vocabulary.
std::vector<LabelSuggestion> suggest_labels(const Corpus& corpus, const std::vector<LabelRule>& rules,
                                            const std::set<std::string>& vocabulary,
                                            const CompiledStream* scope = nullptr);
std::string suggestions_csv(const std::vector<LabelSuggestion>& suggestions);

}  // namespace socialscope
