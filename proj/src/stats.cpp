#include "socialscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"

namespace socialscope {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ParameterError("pearson needs vectors of equal length");
    if (x.size() < 2) throw ParameterError("pearson needs at least two points");
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0 && syy == 0) throw UndefinedError("correlation undefined: both inputs are constant");
    if (sxx == 0 || syy == 0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<EngagementSummary> engagement_summary(const Corpus& corpus, const GroupingFn& grouping) {
    struct Acc {
        std::size_t n = 0, missing = 0;
        double rt = 0, rep = 0, like = 0;
    };
    std::map<std::string, Acc> groups;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const auto& r = corpus.records[i];
        auto& a = groups[grouping(r, i)];
        ++a.n;
        a.rt += static_cast<double>(r.retweet_count);
        a.like += static_cast<double>(r.like_count);
        if (r.reply_count)
            a.rep += static_cast<double>(*r.reply_count);
        else
            ++a.missing;
    }
    std::vector<EngagementSummary> out;
    for (const auto& [key, a] : groups) {
        double n = static_cast<double>(a.n);
        out.push_back({key, a.n, a.rt / n, a.rep / n, a.like / n, a.missing});
    }
    return out;
}

std::string engagement_csv(const std::vector<EngagementSummary>& rows) {
    std::string out = csv::format_row({"group", "n", "mean_retweets", "mean_replies", "mean_likes", "replies_missing"});
    for (const auto& r : rows)
        out += csv::format_row({r.group, std::to_string(r.n), format_number(r.mean_retweets),
                                format_number(r.mean_replies), format_number(r.mean_likes),
                                std::to_string(r.replies_missing)});
    return out;
}

std::map<Emotion, double> emotion_reply_correlations(const Corpus& corpus,
                                                     const std::vector<MessageSentiment>& sentiments) {
    if (sentiments.size() != corpus.records.size())
        throw ParameterError("sentiment results do not line up with the corpus");
    std::map<Emotion, double> out;
    if (corpus.records.size() < 2) return out;
    std::vector<double> replies;
    for (const auto& r : corpus.records) replies.push_back(static_cast<double>(r.reply_count.value_or(0)));
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        std::vector<double> presence;
        for (const auto& s : sentiments) presence.push_back(s.emotions.counts[e] > 0 ? 1.0 : 0.0);
        if (std::all_of(presence.begin(), presence.end(), [&](double v) { return v == presence.front(); })) continue;
        try {
            out[static_cast<Emotion>(e)] = pearson(presence, replies);
        } catch (const UndefinedError&) {
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Opinion matrix

const OpinionCell& OpinionMatrix::at(FollowerCode code, const std::string& target) const {
    static const OpinionCell empty;
    auto it = cells.find({code, target});
    return it == cells.end() ? empty : it->second;
}

std::string OpinionMatrix::to_csv() const {
    std::string out = csv::format_row({"follower_code", "target", "positive", "negative", "overlap", "neutral"});
    for (int c = 0; c < 4; ++c) {
        auto code = static_cast<FollowerCode>(c);
        for (const auto& t : targets) {
            const auto& cell = at(code, t);
            out += csv::format_row({std::to_string(c), t, std::to_string(cell.positive), std::to_string(cell.negative),
                                    std::to_string(cell.overlap), std::to_string(cell.neutral)});
        }
    }
    return out;
}

OpinionMatrix opinion_matrix(const Corpus& corpus, const std::vector<TargetedScore>& scores, bool distinct_users) {
    OpinionMatrix m;
    m.distinct_users = distinct_users;
    std::set<std::tuple<std::string, std::string, PolarityCategory>> seen;
    for (const auto& s : scores) {
        if (s.record_index >= corpus.records.size()) throw ParameterError("targeted score refers to a missing record");
        const auto& r = corpus.records[s.record_index];
        if (std::find(m.targets.begin(), m.targets.end(), s.target) == m.targets.end()) m.targets.push_back(s.target);
        if (distinct_users && !seen.insert({r.author, s.target, s.category}).second) continue;
        auto& cell = m.cells[{r.follower_code, s.target}];
        switch (s.category) {
            case PolarityCategory::Positive: ++cell.positive; break;
            case PolarityCategory::Negative: ++cell.negative; break;
            case PolarityCategory::Overlap: ++cell.overlap; break;
            case PolarityCategory::Neutral: ++cell.neutral; break;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Report

std::string format_number(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    std::string s(buf);
    return s == "-0" ? "0" : s;
}

nlohmann::ordered_json rounded(const nlohmann::ordered_json& j) {
    if (j.is_number_float()) {
        double v = j.get<double>();
        if (!std::isfinite(v)) return nullptr;
        double r = std::stod(format_number(v));
        return r == 0.0 ? 0.0 : r;
    }
    if (j.is_array()) {
        auto out = nlohmann::ordered_json::array();
        for (const auto& e : j) out.push_back(rounded(e));
        return out;
    }
    if (j.is_object()) {
        auto out = nlohmann::ordered_json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = rounded(it.value());
        return out;
    }
    return j;
}

nlohmann::ordered_json ReportSection::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["module"] = module;
    j["config"] = config;
    j["summary"] = summary;
    auto arts = nlohmann::ordered_json::array();
    for (const auto& a : artifacts) arts.push_back({{"filename", a.filename}, {"content", a.content}});
    j["artifacts"] = arts;
    return j;
}

ReportSection ReportSection::from_json(const nlohmann::ordered_json& j) {
    ReportSection s;
    s.name = j.at("name").get<std::string>();
    s.module = j.at("module").get<std::string>();
    s.config = j.at("config");
    s.summary = j.at("summary");
    for (const auto& a : j.at("artifacts"))
        s.artifacts.push_back({a.at("filename").get<std::string>(), a.at("content").get<std::string>()});
    return s;
}

void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create report directory " + dir.string());

    std::vector<const ReportSection*> order;
    for (const auto& s : bundle.sections) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->name < b->name; });

    nlohmann::ordered_json index;
    index["sections"] = nlohmann::ordered_json::array();
    for (const auto* s : order) {
        nlohmann::ordered_json entry;
        entry["name"] = s->name;
        entry["module"] = s->module;
        entry["config"] = rounded(s->config);
        entry["summary"] = s->name + "/summary.json";
        auto files = nlohmann::ordered_json::array();
        for (const auto& a : s->artifacts) files.push_back(s->name + "/" + a.filename);
        entry["files"] = files;
        index["sections"].push_back(entry);

        io::write_file(dir / s->name / "summary.json", rounded(s->summary).dump(2) + "\n");
        for (const auto& a : s->artifacts) io::write_file(dir / s->name / a.filename, a.content);
    }
    index["config"] = rounded(bundle.config);
    nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
    for (const auto& [k, v] : bundle.seeds) seeds[k] = v;
    index["seeds"] = seeds;
    io::write_file(dir / "index.json", index.dump(2) + "\n");
}

}  // namespace socialscope
