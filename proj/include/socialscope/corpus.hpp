#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "socialscope/dates.hpp"

namespace socialscope {

enum class Language { de, en, other };

std::string_view to_string(Language lang);
/// "de"/"en" (any case) map to themselves, anything else to `other`.
Language parse_language(std::string_view s);

/// Which candidate(s) the author follows. Values are the on-disk encoding.
enum class FollowerCode : std::uint8_t { Neither = 0, CandidateA = 1, CandidateB = 2, Both = 3 };

struct MessageRecord {
    std::optional<std::string> id;
    std::string author;  // case-folded
    UtcTime timestamp{};
    std::string text;
    std::uint64_t retweet_count = 0;
    std::uint64_t like_count = 0;
    std::optional<std::uint64_t> reply_count;
    Language language = Language::other;
    FollowerCode follower_code = FollowerCode::Neither;
    bool is_retweet = false;
};

struct Reject {
    std::size_t line = 0;  // 1-based, counting the CSV header
    std::string reason;
};

struct Provenance {
    std::vector<std::string> sources;
    std::string ingested_at;
};

struct Corpus {
    std::vector<MessageRecord> records;
    Provenance provenance;
    std::size_t dedup_removed = 0;
    std::vector<Reject> rejects;

    std::size_t size() const { return records.size(); }
};

/// Canonical record order: timestamp, then author, then text hash. Stable.
void sort_canonical(std::vector<MessageRecord>& records);

/// Stop-word ratio classifier used when a record carries no language tag.
class LanguageClassifier {
public:
    LanguageClassifier();
    LanguageClassifier(std::set<std::string> german, std::set<std::string> english, double min_ratio);

    Language classify(std::string_view text) const;

private:
    std::set<std::string> german_;
    std::set<std::string> english_;
    double min_ratio_;
};

enum class InputFormat { JsonLines, Csv };

/// Guesses from the extension: ".csv" is CSV, everything else JSON lines.
InputFormat format_for_path(const std::filesystem::path& path);

/// Parses all records; record-level problems land in `rejects`. Throws
/// IngestError when the stream itself cannot be read.
Corpus ingest(std::istream& in, InputFormat format, std::string_view source_name = "<stream>",
              const LanguageClassifier& classifier = LanguageClassifier{});
Corpus ingest_file(const std::filesystem::path& path, std::optional<InputFormat> format = std::nullopt,
                   const LanguageClassifier& classifier = LanguageClassifier{});

/// Concatenates and re-sorts; rejects and provenance are merged.
Corpus merge(std::vector<Corpus> parts);

/// JSON-lines rendering that `ingest` reads back losslessly.
std::string to_json_lines(const Corpus& corpus);

/// Message id when present, otherwise author + timestamp + exact text.
std::string dedup_key(const MessageRecord& record);

/// Short stable handle for a record: its id, or "h" + hex hash of the dedup key.
std::string record_key(const MessageRecord& record);

/// Keeps the first record (in record order) per dedup key.
Corpus deduplicate(Corpus corpus);

struct NormalizationTable {
    struct Entry {
        std::string pattern;
        std::string replacement;
        bool case_insensitive = false;
    };
    std::vector<Entry> entries;

    /// Two or three column CSV: pattern, replacement[, "ci"].
    static NormalizationTable parse_csv(std::string_view content);
    static NormalizationTable load(const std::filesystem::path& path);
    /// Spelling fixes for the candidate and country names.
    static NormalizationTable shipped();
};

/// Applies each entry in table order, replacing non-overlapping matches left to right.
std::string normalize_text(std::string_view text, const NormalizationTable& table);
Corpus normalize_corpus(Corpus corpus, const NormalizationTable& table);

struct SelectorSet {
    std::set<std::string> hashtags;
    std::vector<std::set<std::string>> conjunctions;

    /// Case-folds entries; throws ConfigError if empty or an entry lacks '#'.
    static SelectorSet make(const std::vector<std::string>& hashtags,
                            const std::vector<std::vector<std::string>>& conjunctions = {});
    bool matches(std::string_view text) const;
};

Corpus filter_by_selectors(const Corpus& corpus, const SelectorSet& selectors);

using UsernameSet = std::set<std::string>;

/// One username per line, case-folded, optional leading '@' dropped.
UsernameSet load_usernames(const std::filesystem::path& path);

Corpus assign_follower_codes(Corpus corpus, const UsernameSet& followers_a, const UsernameSet& followers_b);

struct Marker {
    Date date;
    std::string label;
};

struct DailySeries {
    DateRange range;
    std::vector<std::uint64_t> counts;
    std::vector<Marker> markers;

    std::uint64_t total() const;
    /// Index of the first maximum; -1 for an empty series.
    int peak_index() const;
    std::string to_csv() const;
};

/// Counts per UTC day. Markers outside the range raise ParameterError.
DailySeries daily_counts(const Corpus& corpus, const DateRange& range, const std::vector<Marker>& markers = {});

/// Earliest and latest UTC day in the corpus. Throws ParameterError when empty.
DateRange corpus_range(const Corpus& corpus);

std::map<Language, Corpus> partition_by_language(const Corpus& corpus);
Corpus filter_language(const Corpus& corpus, Language lang);

}  // namespace socialscope
