#pragma once

#include <array>
#include <bitset>
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

/// Dual-scale strength: positive in [1,5], negative in [-5,-1].
struct SentimentScore {
    int positive = 1;
    int negative = -1;

    bool operator==(const SentimentScore&) const = default;
};

enum class PolarityCategory { Positive, Negative, Neutral, Overlap };

std::string_view to_string(PolarityCategory c);

/// Plutchik's eight basic emotions, in lexicon label order.
enum class Emotion { anger, anticipation, disgust, fear, joy, sadness, surprise, trust };
inline constexpr std::size_t kEmotionCount = 8;
inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"};

struct EmotionVector {
    std::array<std::uint32_t, kEmotionCount> counts{};

    std::uint32_t operator[](Emotion e) const { return counts[static_cast<std::size_t>(e)]; }
    std::uint32_t& operator[](Emotion e) { return counts[static_cast<std::size_t>(e)]; }
    EmotionVector& operator+=(const EmotionVector& o);
    bool operator==(const EmotionVector&) const = default;
    std::uint64_t total() const;
};

struct Token {
    std::string text;  // case-folded
    std::optional<int> emoticon_strength;
};
using Sentence = std::vector<Token>;

/// Lexicon-driven polarity strengths. Terms ending in '*' are stems and match any
/// token with that prefix; exact entries win over stems, longer stems over shorter.
class SentimentLexicon {
public:
    /// Sectioned TSV: "[terms]" (default), "[boosters]", "[negators]",
    /// "[emoticons]"; '#' starts a comment line. Throws ConfigError.
    static SentimentLexicon parse(std::string_view content);
    static SentimentLexicon load(const std::filesystem::path& path);

    void add_term(std::string term, int strength);
    void add_booster(std::string term, int delta);
    void add_negator(std::string term);
    void add_emoticon(std::string emoticon, int strength);

    std::optional<int> term_strength(std::string_view token) const;
    std::optional<int> booster(std::string_view token) const;
    bool is_negator(std::string_view token) const;
    std::optional<int> emoticon(std::string_view chunk) const;

private:
    std::map<std::string, int, std::less<>> exact_;
    std::vector<std::pair<std::string, int>> stems_;  // longest first
    std::map<std::string, int, std::less<>> boosters_;
    std::set<std::string, std::less<>> negators_;
    std::map<std::string, int, std::less<>> emoticons_;
};

/// Splits on whitespace and punctuation; '.', '!' and '?' end a sentence.
/// Whitespace-delimited chunks that are known emoticons stay intact.
std::vector<Sentence> tokenize(std::string_view text, const SentimentLexicon* lexicon = nullptr);

struct ScoringOptions {
    /// A run of three or more identical letters adds one to the term's magnitude.
    bool emphasis_rule = true;
    /// Negators act on terms up to this many tokens later.
    int negation_window = 2;
};

SentimentScore score_polarity(std::string_view text, const SentimentLexicon& lexicon, const ScoringOptions& options = {});

/// Throws ParameterError for scores outside the dual scale.
PolarityCategory categorize_polarity(SentimentScore score);

/// Word-emotion associations in the three-column (word, label, 0/1) layout.
class EmotionLexicon {
public:
    struct Entry {
        std::bitset<kEmotionCount> emotions;
        bool positive = false;
        bool negative = false;
    };

    static EmotionLexicon parse(std::string_view content);
    static EmotionLexicon load(const std::filesystem::path& path);

    void add(std::string word, std::bitset<kEmotionCount> emotions, bool positive = false, bool negative = false);
    const Entry* find(std::string_view word) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, Entry, std::less<>> entries_;
};

/// Token-frequency counts: a word occurring twice counts twice.
EmotionVector emotion_vector(std::string_view text, const EmotionLexicon& lexicon);

/// Per-language lexicons; records in a language without lexicons are flagged.
struct LexiconBundle {
    std::map<Language, SentimentLexicon> polarity;
    std::map<Language, EmotionLexicon> emotion;
    ScoringOptions options;
};

struct MessageSentiment {
    SentimentScore score;
    PolarityCategory category = PolarityCategory::Neutral;
    EmotionVector emotions;
    bool unsupported_language = false;
};

MessageSentiment analyze(const MessageRecord& record, const LexiconBundle& lexicons);
std::vector<MessageSentiment> analyze_corpus(const Corpus& corpus, const LexiconBundle& lexicons);

/// A candidate or topic, identified by case-insensitive regular expressions over
/// names, hashtags and handles.
struct Target {
    std::string name;
    std::vector<std::string> patterns;
};

class TargetMatcher {
public:
    /// Throws ConfigError for empty pattern lists or patterns that do not compile.
    explicit TargetMatcher(std::vector<Target> targets);

    bool matches(std::string_view target, std::string_view text) const;
    std::vector<std::string> matching_targets(std::string_view text) const;
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::vector<std::vector<std::regex>> patterns_;
};

struct TargetedScore {
    std::string record_key;
    std::size_t record_index = 0;
    std::string target;
    SentimentScore score;
    PolarityCategory category = PolarityCategory::Neutral;
    /// The record also mentions another target; left for manual annotation.
    bool ambiguous = false;
};

std::vector<TargetedScore> sentiment_toward(const Corpus& corpus, const TargetMatcher& targets,
                                            std::string_view target, const LexiconBundle& lexicons);

}  // namespace socialscope
