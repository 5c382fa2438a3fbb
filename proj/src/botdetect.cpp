#include "socialscope/botdetect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/parallel.hpp"
#include "socialscope/text.hpp"

namespace socialscope {

std::string_view to_string(BotCategory c) {
    switch (c) {
        case BotCategory::Human: return "human";
        case BotCategory::PotentialBot: return "potential_bot";
        case BotCategory::Bot: return "bot";
    }
    return "human";
}

std::string_view to_string(AbsenceReason r) {
    switch (r) {
        case AbsenceReason::AccountGone: return "account_gone";
        case AbsenceReason::InsufficientData: return "insufficient_data";
        case AbsenceReason::ProviderError: return "provider_error";
    }
    return "provider_error";
}

std::string_view to_string(HeuristicReason r) { return r == HeuristicReason::Volume ? "volume" : "name"; }

BotScore BotScore::present(std::string username, double score) { return {std::move(username), score, std::nullopt}; }

BotScore BotScore::absent(std::string username, AbsenceReason reason) {
    return {std::move(username), std::nullopt, reason};
}

BotCategory categorize_score(double score, const Thresholds& thresholds) {
    if (!(score >= 0.0 && score <= 1.0))
        throw ParameterError("bot score " + std::to_string(score) + " outside [0, 1]");
    if (score <= thresholds.human_max) return BotCategory::Human;
    if (score <= thresholds.potential_max) return BotCategory::PotentialBot;
    return BotCategory::Bot;
}

CategoryCounts count_categories(const std::vector<BotScore>& scores, const Thresholds& thresholds) {
    CategoryCounts c;
    for (const auto& s : scores) {
        if (!s.score) {
            ++c.absent;
            continue;
        }
        switch (categorize_score(*s.score, thresholds)) {
            case BotCategory::Human: ++c.human; break;
            case BotCategory::PotentialBot: ++c.potential_bot; break;
            case BotCategory::Bot: ++c.bot; break;
        }
    }
    return c;
}

std::map<std::string, ActivityProfile> activity_profiles(const Corpus& corpus) {
    std::map<std::string, ActivityProfile> out;
    for (const auto& r : corpus.records) {
        auto& p = out[r.author];
        p.username = r.author;
        ++p.daily_counts[utc_date(r.timestamp)];
        ++p.tweets;
        if (r.is_retweet) ++p.retweets_generated;
        p.retweets_received += r.retweet_count;
        p.likes_received += r.like_count;
    }
    return out;
}

HeuristicFlag heuristic_flag(const ActivityProfile& profile, std::string_view username, const HeuristicRules& rules) {
    HeuristicFlag f;
    std::size_t heavy_days = 0;
    for (const auto& [day, count] : profile.daily_counts) {
        if (rules.window && !rules.window->contains(day)) continue;
        if (count >= rules.daily_volume) ++heavy_days;
    }
    if (heavy_days >= rules.min_days) f.reasons.insert(HeuristicReason::Volume);
    if (!rules.name_token.empty() && text::contains_ci(username, rules.name_token))
        f.reasons.insert(HeuristicReason::Name);
    f.flagged = !f.reasons.empty();
    return f;
}

std::set<std::string> heuristic_flagged(const Corpus& corpus, const HeuristicRules& rules) {
    std::set<std::string> out;
    for (const auto& [name, profile] : activity_profiles(corpus))
        if (heuristic_flag(profile, name, rules).flagged) out.insert(name);
    return out;
}

// ---------------------------------------------------------------------------
// Providers

namespace {

std::string normalize_username(std::string_view s) {
    auto t = text::trim(s);
    if (!t.empty() && t.front() == '@') t.remove_prefix(1);
    return text::casefold(t);
}

std::optional<double> parse_score_field(std::string_view field, const std::string& context) {
    auto t = text::trim(field);
    if (t.empty() || text::casefold(t) == "na") return std::nullopt;
    std::string s(t);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !(v >= 0.0 && v <= 1.0)) throw ConfigError(context + ": bad score '" + s + "'");
    return v;
}

std::string now_stamp() {
    return format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

}  // namespace

LocalScoreProvider::LocalScoreProvider(std::map<std::string, std::optional<double>> scores)
    : scores_(std::move(scores)) {}

LocalScoreProvider LocalScoreProvider::parse(std::string_view csv_content) {
    std::map<std::string, std::optional<double>> scores;
    auto rows = csv::parse(csv_content);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.empty()) continue;
        if (i == 0 && text::casefold(text::trim(row[0])) == "username") continue;
        if (row.size() < 2) throw ConfigError("score file row " + std::to_string(i + 1) + " needs username and score");
        scores[normalize_username(row[0])] = parse_score_field(row[1], "score file row " + std::to_string(i + 1));
    }
    return LocalScoreProvider(std::move(scores));
}

LocalScoreProvider LocalScoreProvider::load(const std::filesystem::path& path) {
    return parse(io::read_file(path));
}

BotScore LocalScoreProvider::fetch(const std::string& username) {
    auto key = normalize_username(username);
    auto it = scores_.find(key);
    if (it == scores_.end()) return BotScore::absent(key, AbsenceReason::AccountGone);
    if (!it->second) return BotScore::absent(key, AbsenceReason::InsufficientData);
    return BotScore::present(key, *it->second);
}

HttpScoreProvider::HttpScoreProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ConfigError("score provider URL is empty");
    if (config_.max_attempts < 1) throw ConfigError("score provider needs at least one attempt");
}

void HttpScoreProvider::pace() {
    if (config_.rate_limit <= 0.0) return;
    auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / config_.rate_limit));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(pace_mutex_);
        auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_slot_);
        next_slot_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
}

BotScore HttpScoreProvider::fetch(const std::string& username) {
    auto key = normalize_username(username);
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    auto backoff = config_.initial_backoff;
    int last_status = 0;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        pace();
        auto res = client.Get("/score", httplib::Params{{"username", key}}, httplib::Headers{});
        if (!res) {
            last_status = 0;
            continue;
        }
        last_status = res->status;
        if (res->status != 200) continue;
        try {
            auto body = nlohmann::json::parse(res->body);
            const auto& score = body.at("score");
            if (score.is_null()) return BotScore::absent(key, AbsenceReason::InsufficientData);
            double v = score.get<double>();
            if (!(v >= 0.0 && v <= 1.0)) return BotScore::absent(key, AbsenceReason::ProviderError);
            return BotScore::present(key, v);
        } catch (const nlohmann::json::exception&) {
            return BotScore::absent(key, AbsenceReason::ProviderError);
        }
    }
    return BotScore::absent(key, last_status == 404 ? AbsenceReason::AccountGone : AbsenceReason::ProviderError);
}

ScoreCache::ScoreCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) return;
    auto rows = csv::parse(io::read_file(path_));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() < 3 || (i == 0 && row[0] == "username")) continue;
        auto name = normalize_username(row[0]);
        auto score = parse_score_field(row[1], "cache row " + std::to_string(i + 1));
        BotScore s = score ? BotScore::present(name, *score) : BotScore::absent(name, AbsenceReason::AccountGone);
        entries_[name] = Entry{std::move(s), row[2]};
    }
}

std::optional<BotScore> ScoreCache::lookup(const std::string& username) const {
    auto it = entries_.find(normalize_username(username));
    if (it == entries_.end()) return std::nullopt;
    return it->second.score;
}

void ScoreCache::store(const BotScore& score, std::string fetched_at) {
    if (!score.score && score.absence != AbsenceReason::AccountGone) return;
    entries_[score.username] = Entry{score, std::move(fetched_at)};
}

void ScoreCache::save() const {
    std::string out = "username,score,fetched_at\n";
    for (const auto& [name, e] : entries_) {
        std::ostringstream score;
        if (e.score.score) {
            score.precision(17);
            score << *e.score.score;
        }
        out += csv::format_row({name, score.str(), e.fetched_at});
    }
    io::write_file(path_, out);
}

std::vector<BotScore> fetch_scores(const std::vector<std::string>& usernames, ScoreProvider& provider,
                                   ScoreCache* cache, const FetchOptions& options) {
    std::vector<std::optional<BotScore>> results(usernames.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < usernames.size(); ++i) {
        if (cache) results[i] = cache->lookup(usernames[i]);
        if (!results[i]) pending.push_back(i);
    }
    parallel_for(pending.size(), std::max(1u, options.concurrency), [&](std::size_t j) {
        std::size_t i = pending[j];
        try {
            results[i] = provider.fetch(usernames[i]);
        } catch (const std::exception&) {
            results[i] = BotScore::absent(normalize_username(usernames[i]), AbsenceReason::ProviderError);
        }
    });
    if (cache && !pending.empty()) {
        auto stamp = now_stamp();
        for (auto i : pending) cache->store(*results[i], stamp);
        cache->save();
    }
    std::vector<BotScore> out;
    out.reserve(results.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

// ---------------------------------------------------------------------------
// Activity shares

ActivityShares bot_activity_table(const Corpus& corpus, const std::set<std::string>& flagged,
                                  std::vector<std::string>* warnings) {
    if (corpus.records.empty()) throw ParameterError("bot activity table needs a non-empty corpus");
    struct Totals {
        double messages = 0, rt_received = 0, likes = 0, rt_generated = 0;
    } all, bots;
    // follower code per author: the code on their first record
    std::map<std::string, FollowerCode> codes;
    for (const auto& r : corpus.records) {
        codes.emplace(r.author, r.follower_code);
        bool is_bot = flagged.count(r.author) > 0;
        for (Totals* t : {&all, is_bot ? &bots : nullptr}) {
            if (!t) continue;
            t->messages += 1;
            t->rt_received += static_cast<double>(r.retweet_count);
            t->likes += static_cast<double>(r.like_count);
            t->rt_generated += r.is_retweet ? 1 : 0;
        }
    }
    if (warnings)
        for (const auto& name : flagged)
            if (!codes.count(name)) warnings->push_back("flagged account '" + name + "' has no messages in the corpus");

    double followers_a = 0, followers_b = 0, flagged_a = 0, flagged_b = 0;
    for (const auto& [name, code] : codes) {
        bool a = code == FollowerCode::CandidateA || code == FollowerCode::Both;
        bool b = code == FollowerCode::CandidateB || code == FollowerCode::Both;
        bool is_bot = flagged.count(name) > 0;
        followers_a += a;
        followers_b += b;
        flagged_a += a && is_bot;
        flagged_b += b && is_bot;
    }
    auto pct = [](double num, double den) { return den > 0 ? 100.0 * num / den : 0.0; };
    ActivityShares s;
    s.generated_content = pct(bots.messages, all.messages);
    s.rt_received = pct(bots.rt_received, all.rt_received);
    s.like_count = pct(bots.likes, all.likes);
    s.rt_generated = pct(bots.rt_generated, all.rt_generated);
    s.follower_share_a = pct(flagged_a, followers_a);
    s.follower_share_b = pct(flagged_b, followers_b);
    return s;
}

std::string activity_table_csv(const std::vector<std::pair<std::string, ActivityShares>>& methods) {
    csv::Row header{"row"};
    for (const auto& [name, shares] : methods) header.push_back(name);
    std::string out = csv::format_row(header);
    const std::pair<const char*, double ActivityShares::*> rows[] = {
        {"generated_content", &ActivityShares::generated_content},
        {"rt_received", &ActivityShares::rt_received},
        {"like_count", &ActivityShares::like_count},
        {"rt_generated", &ActivityShares::rt_generated},
        {"follower_share_A", &ActivityShares::follower_share_a},
        {"follower_share_B", &ActivityShares::follower_share_b},
    };
    for (const auto& [label, member] : rows) {
        csv::Row row{label};
        for (const auto& [name, shares] : methods) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", shares.*member);
            row.push_back(buf);
        }
        out += csv::format_row(row);
    }
    return out;
}

MethodConfusion method_confusion(const std::vector<BotScore>& scores, const std::set<std::string>& heuristic,
                                 const Thresholds& thresholds) {
    MethodConfusion m;
    for (const auto& s : scores) {
        int row = heuristic.count(s.username) ? 1 : 0;
        int col = s.score ? static_cast<int>(categorize_score(*s.score, thresholds)) : 3;
        ++m.counts[row][col];
    }
    return m;
}

std::string MethodConfusion::to_csv() const {
    std::string out = csv::format_row({"heuristic", "human", "potential_bot", "bot", "absent"});
    for (int row = 0; row < 2; ++row) {
        csv::Row r{row ? "flagged" : "not_flagged"};
        for (int col = 0; col < 4; ++col) r.push_back(std::to_string(counts[row][col]));
        out += csv::format_row(r);
    }
    return out;
}

}  // namespace socialscope
