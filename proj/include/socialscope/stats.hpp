#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "socialscope/corpus.hpp"
#include "socialscope/sentiment.hpp"

namespace socialscope {

/// Product-moment correlation. Throws ParameterError for unequal lengths or
/// fewer than two points, UndefinedError when both inputs are constant. A
/// single constant input gives 0.
double pearson(std::span<const double> x, std::span<const double> y);

struct EngagementSummary {
    std::string group;
    std::size_t n = 0;
    double mean_retweets = 0.0;
    double mean_replies = 0.0;
    double mean_likes = 0.0;
    /// Records without a reply count; they contribute 0 to mean_replies.
    std::size_t replies_missing = 0;
};

using GroupingFn = std::function<std::string(const MessageRecord&, std::size_t index)>;

/// One row per non-empty group, ordered by group key.
std::vector<EngagementSummary> engagement_summary(const Corpus& corpus, const GroupingFn& grouping);
std::string engagement_csv(const std::vector<EngagementSummary>& rows);

/// Pearson correlation between the presence (0/1) of each emotion in a message
/// and its reply count. Emotions without variance or an all-constant pair are
/// left out.
std::map<Emotion, double> emotion_reply_correlations(const Corpus& corpus,
                                                     const std::vector<MessageSentiment>& sentiments);

struct OpinionCell {
    std::uint64_t positive = 0;
    std::uint64_t negative = 0;
    std::uint64_t overlap = 0;
    std::uint64_t neutral = 0;

    std::uint64_t total() const { return positive + negative + overlap + neutral; }
};

/// Rows are follower codes 0..3; the candidate comparison reads the CandidateA and
/// CandidateB rows. Columns are the targets in order of first appearance.
struct OpinionMatrix {
    std::vector<std::string> targets;
    std::map<std::pair<FollowerCode, std::string>, OpinionCell> cells;
    bool distinct_users = false;

    const OpinionCell& at(FollowerCode code, const std::string& target) const;
    std::string to_csv() const;
};

/// Tallies targeted scores by the author's follower code. With distinct_users,
/// each (author, target, category) counts at most once.
OpinionMatrix opinion_matrix(const Corpus& corpus, const std::vector<TargetedScore>& scores,
                             bool distinct_users = false);

/// Formats with 6 significant digits.
std::string format_number(double v);
/// Rounds every floating-point number in `j` to 6 significant digits.
nlohmann::ordered_json rounded(const nlohmann::ordered_json& j);

struct ReportArtifact {
    std::string filename;
    std::string content;
};

struct ReportSection {
    std::string name;
    std::string module;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    std::vector<ReportArtifact> artifacts;

    nlohmann::ordered_json to_json() const;
    static ReportSection from_json(const nlohmann::ordered_json& j);
};

struct ReportBundle {
    std::vector<ReportSection> sections;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::map<std::string, std::uint64_t> seeds;
};

/// Writes index.json plus <section>/summary.json and the section artifacts.
/// Sections are emitted in name order. Throws IoError when the directory
/// cannot be written.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir);

}  // namespace socialscope
