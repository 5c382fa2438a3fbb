#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "socialscope/corpus.hpp"

namespace socialscope {

enum class BotCategory { Human, PotentialBot, Bot };
enum class AbsenceReason { AccountGone, InsufficientData, ProviderError };

std::string_view to_string(BotCategory c);
std::string_view to_string(AbsenceReason r);

/// Exactly one of score / absence is set.
struct BotScore {
    std::string username;
    std::optional<double> score;
    std::optional<AbsenceReason> absence;

    static BotScore present(std::string username, double score);
    static BotScore absent(std::string username, AbsenceReason reason);
};

struct Thresholds {
    double human_max = 0.5;
    double potential_max = 0.90;
};

/// score <= human_max -> Human, <= potential_max -> PotentialBot, else Bot.
/// Throws ParameterError outside [0, 1].
BotCategory categorize_score(double score, const Thresholds& thresholds = {});

struct CategoryCounts {
    std::size_t human = 0;
    std::size_t potential_bot = 0;
    std::size_t bot = 0;
    std::size_t absent = 0;

    std::size_t scored() const { return human + potential_bot + bot; }
    std::size_t total() const { return scored() + absent; }
};

CategoryCounts count_categories(const std::vector<BotScore>& scores, const Thresholds& thresholds = {});

struct ActivityProfile {
    std::string username;
    std::map<Date, std::uint64_t> daily_counts;
    std::uint64_t tweets = 0;
    std::uint64_t retweets_generated = 0;
    std::uint64_t retweets_received = 0;
    std::uint64_t likes_received = 0;
};

/// One profile per author, days in UTC.
std::map<std::string, ActivityProfile> activity_profiles(const Corpus& corpus);

struct HeuristicRules {
    std::uint64_t daily_volume = 50;
    std::size_t min_days = 3;
    std::string name_token = "bot";
    /// Only days inside the window count toward the volume rule.
    std::optional<DateRange> window;
};

enum class HeuristicReason { Volume, Name };
std::string_view to_string(HeuristicReason r);

struct HeuristicFlag {
    bool flagged = false;
    std::set<HeuristicReason> reasons;
};

HeuristicFlag heuristic_flag(const ActivityProfile& profile, std::string_view username,
                             const HeuristicRules& rules = {});

/// Authors flagged by heuristic_flag.
std::set<std::string> heuristic_flagged(const Corpus& corpus, const HeuristicRules& rules = {});

/// Source of bot scores for single accounts.
class ScoreProvider {
public:
    virtual ~ScoreProvider() = default;
    /// Never throws for per-account problems; they come back as absences.
    virtual BotScore fetch(const std::string& username) = 0;
};

/// Scores from a (username, score) CSV. Unknown accounts are AccountGone; an
/// empty or "NA" score is InsufficientData.
class LocalScoreProvider : public ScoreProvider {
public:
    explicit LocalScoreProvider(std::map<std::string, std::optional<double>> scores);
    static LocalScoreProvider parse(std::string_view csv_content);
    static LocalScoreProvider load(const std::filesystem::path& path);
    BotScore fetch(const std::string& username) override;

private:
    std::map<std::string, std::optional<double>> scores_;
};

struct HttpProviderConfig {
    std::string base_url;  // e.g. "http://localhost:8080"
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    /// Requests per second across all workers; 0 disables pacing.
    double rate_limit = 5.0;
    std::chrono::seconds timeout{10};
};

/// GET {base_url}/score?username=NAME returning {"username": ..., "score": ...}.
/// Non-200 answers are retried with exponential backoff; after the last attempt
/// a 404 becomes AccountGone and anything else ProviderError.
class HttpScoreProvider : public ScoreProvider {
public:
    explicit HttpScoreProvider(HttpProviderConfig config);
    BotScore fetch(const std::string& username) override;

private:
    void pace();

    HttpProviderConfig config_;
    std::mutex pace_mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
};

/// On-disk cache "username,score,fetched_at". Present scores and AccountGone
/// are cached; transient failures are not.
class ScoreCache {
public:
    explicit ScoreCache(std::filesystem::path path);
    std::optional<BotScore> lookup(const std::string& username) const;
    void store(const BotScore& score, std::string fetched_at);
    /// Rewrites the file in username order.
    void save() const;
    std::size_t size() const { return entries_.size(); }

private:
    struct Entry {
        BotScore score;
        std::string fetched_at;
    };
    std::filesystem::path path_;
    std::map<std::string, Entry> entries_;
};

struct FetchOptions {
    unsigned concurrency = 4;
};

/// One BotScore per requested username, in request order. Cached entries skip
/// the provider; new results are written to the cache by the calling thread.
std::vector<BotScore> fetch_scores(const std::vector<std::string>& usernames, ScoreProvider& provider,
                                   ScoreCache* cache = nullptr, const FetchOptions& options = {});

/// Activity table rows: percentages of whole-corpus totals attributable to the flagged set.
struct ActivityShares {
    double generated_content = 0.0;
    double rt_received = 0.0;
    double like_count = 0.0;
    double rt_generated = 0.0;
    double follower_share_a = 0.0;
    double follower_share_b = 0.0;
};

/// Shares of messages, retweets received, likes and retweets generated by the
/// flagged authors, plus the share of each candidate's followers among authors
/// that are flagged. Flagged names absent from the corpus are reported in
/// `warnings`. Throws ParameterError for an empty corpus.
ActivityShares bot_activity_table(const Corpus& corpus, const std::set<std::string>& flagged,
                                  std::vector<std::string>* warnings = nullptr);

/// Rows generated_content ... follower_share_B, one column per method.
std::string activity_table_csv(const std::vector<std::pair<std::string, ActivityShares>>& methods);

/// Heuristic verdict against score category for every scored or absent account.
struct MethodConfusion {
    // [flagged by heuristic][Human, PotentialBot, Bot, Absent]
    std::size_t counts[2][4] = {};
    std::string to_csv() const;
};

MethodConfusion method_confusion(const std::vector<BotScore>& scores, const std::set<std::string>& heuristic,
                                 const Thresholds& thresholds = {});

}  // namespace socialscope
