#include "socialscope/streams.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"

#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/parallel.hpp"
#include "socialscope/text.hpp"

namespace socialscope {

CompiledStream::CompiledStream(KeywordStream def) : def_(std::move(def)) {
    if (def_.name.empty()) throw ConfigError("stream without a name");
    if (def_.patterns.empty()) throw ConfigError("stream '" + def_.name + "' has no patterns");
    for (const auto& p : def_.patterns) {
        try {
            regexes_.emplace_back(p, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
        } catch (const std::regex_error& e) {
            throw ConfigError("stream '" + def_.name + "': pattern '" + p + "' does not compile: " + e.what());
        }
    }
}

bool CompiledStream::matches(const MessageRecord& record) const {
    if (def_.language && record.language != *def_.language) return false;
    for (const auto& re : regexes_)
        if (std::regex_search(record.text, re)) return true;
    return false;
}

std::vector<CompiledStream> parse_streams(std::string_view json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("stream definitions are not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ConfigError("stream definitions must be a JSON array");
    std::vector<CompiledStream> out;
    std::set<std::string> names;
    for (const auto& item : doc) {
        KeywordStream s;
        try {
            s.name = item.at("name").get<std::string>();
            s.patterns = item.at("patterns").get<std::vector<std::string>>();
            if (item.contains("lang") && !item["lang"].is_null()) {
                auto lang = text::casefold(item["lang"].get<std::string>());
                if (lang == "de")
                    s.language = Language::de;
                else if (lang == "en")
                    s.language = Language::en;
                else if (lang != "any" && lang != "all" && !lang.empty())
                    throw ConfigError("stream '" + s.name + "': unknown language '" + lang + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed stream definition: ") + e.what());
        }
        if (!names.insert(s.name).second) throw ConfigError("duplicate stream name '" + s.name + "'");
        out.emplace_back(std::move(s));
    }
    return out;
}

std::vector<CompiledStream> load_streams(const std::filesystem::path& path) { return parse_streams(io::read_file(path)); }

DailySeries track_stream(const Corpus& corpus, const CompiledStream& stream, const DateRange& range,
                         const std::vector<Marker>& markers) {
    auto series = daily_counts(Corpus{}, range, markers);
    for (const auto& r : corpus.records) {
        Date d = utc_date(r.timestamp);
        if (range.contains(d) && stream.matches(r)) ++series.counts[static_cast<std::size_t>(range.index_of(d))];
    }
    return series;
}

std::vector<NamedSeries> track_streams(const Corpus& corpus, const std::vector<CompiledStream>& streams,
                                       const DateRange& range) {
    std::vector<NamedSeries> out(streams.size());
    parallel_for(streams.size(), 0, [&](std::size_t i) {
        out[i] = NamedSeries{streams[i].name(), track_stream(corpus, streams[i], range)};
    });
    return out;
}

std::string streams_csv(const std::vector<NamedSeries>& series) {
    csv::Row header{"date"};
    for (const auto& s : series) header.push_back(s.name);
    std::string out = csv::format_row(header);
    if (series.empty()) return out;
    const auto& range = series.front().series.range;
    for (int i = 0; i < range.days(); ++i) {
        csv::Row row{format_date(range.start + std::chrono::days(i))};
        for (const auto& s : series) row.push_back(std::to_string(s.series.counts[static_cast<std::size_t>(i)]));
        out += csv::format_row(row);
    }
    return out;
}

std::string content_key(const MessageRecord& record) {
    auto body = text::casefold(text::collapse_whitespace(text::strip_retweet_prefix(record.text)));
    return "t" + text::hex64(text::fnv1a64(body));
}

// ---------------------------------------------------------------------------
// Trajectories

Trajectory retweet_trajectory(const Corpus& corpus, std::string_view key, std::optional<DateRange> range) {
    std::optional<std::string> content;
    for (const auto& r : corpus.records) {
        if (record_key(r) == key || content_key(r) == key) {
            content = content_key(r);
            break;
        }
    }
    if (!content) throw NotFoundError("no message with key '" + std::string(key) + "'");

    std::vector<const MessageRecord*> family;
    for (const auto& r : corpus.records)
        if (content_key(r) == *content) family.push_back(&r);
    std::stable_sort(family.begin(), family.end(),
                     [](const auto* a, const auto* b) { return a->timestamp < b->timestamp; });
    // the earliest non-retweet is the original; fall back to the earliest record
    auto origin_it = std::find_if(family.begin(), family.end(), [](const auto* r) { return !r->is_retweet; });
    if (origin_it == family.end()) origin_it = family.begin();
    const MessageRecord* origin = *origin_it;
    family.erase(origin_it);

    Trajectory t;
    t.key = std::string(key);
    t.content_key = *content;
    t.origin_author = origin->author;
    Date first = utc_date(origin->timestamp);
    Date last = family.empty() ? first : std::max(first, utc_date(family.back()->timestamp));
    t.range = range ? *range : DateRange::make(first, last);

    std::size_t days = static_cast<std::size_t>(t.range.days());
    std::array<std::vector<std::uint64_t>, 4> daily;
    for (auto& d : daily) d.assign(days, 0);
    std::array<std::map<std::string, std::uint64_t>, 4> per_code;
    std::map<std::string, std::uint64_t> per_spreader;
    for (const auto* r : family) {
        Date d = utc_date(r->timestamp);
        if (!t.range.contains(d)) continue;
        auto code = static_cast<std::size_t>(r->follower_code);
        ++daily[code][static_cast<std::size_t>(t.range.index_of(d))];
        ++per_code[code][r->author];
        ++per_spreader[r->author];
        ++t.totals[code];
        ++t.total_retweets;
    }
    for (std::size_t c = 0; c < 4; ++c) {
        t.cumulative[c].resize(days);
        std::uint64_t run = 0;
        for (std::size_t i = 0; i < days; ++i) t.cumulative[c][i] = run += daily[c][i];
        t.distinct_spreaders[c] = per_code[c].size();
    }
    t.total_spreaders = per_spreader.size();
    if (t.total_spreaders > 0) {
        t.mean_per_spreader = static_cast<double>(t.total_retweets) / static_cast<double>(t.total_spreaders);
        for (const auto& [name, count] : per_spreader) {
            if (count > t.top_spreader_count) {
                t.top_spreader = name;
                t.top_spreader_count = count;
            }
        }
        t.max_spreader_share = 100.0 * static_cast<double>(t.top_spreader_count) / static_cast<double>(t.total_retweets);
    }
    return t;
}

std::string Trajectory::to_csv() const {
    std::string out = csv::format_row({"date", "code", "cumulative"});
    for (int i = 0; i < range.days(); ++i) {
        auto date = format_date(range.start + std::chrono::days(i));
        for (std::size_t c = 0; c < 4; ++c)
            out += csv::format_row({date, std::to_string(c), std::to_string(cumulative[c][static_cast<std::size_t>(i)])});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Annotations

AnnotationSet AnnotationSet::parse(std::string_view csv_content, std::set<std::string> vocabulary) {
    if (vocabulary.empty()) throw ConfigError("annotation vocabulary is empty");
    AnnotationSet set;
    set.vocabulary = std::move(vocabulary);
    auto rows = csv::parse(csv_content);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (i == 0 && !row.empty() && text::trim(row[0]) == "message_key") continue;
        if (row.size() < 2) throw ConfigError("annotation row " + std::to_string(i + 1) + " needs key and label");
        std::string k(text::trim(row[0])), label(text::trim(row[1]));
        if (!set.vocabulary.count(label))
            throw ConfigError("annotation row " + std::to_string(i + 1) + ": label '" + label + "' not in vocabulary");
        auto [it, inserted] = set.entries.emplace(k, label);
        if (!inserted && it->second != label)
            throw ConfigError("message '" + k + "' annotated as both '" + it->second + "' and '" + label + "'");
    }
    return set;
}

AnnotationSet AnnotationSet::load(const std::filesystem::path& path, std::set<std::string> vocabulary) {
    return parse(io::read_file(path), std::move(vocabulary));
}

LabelCounts join_annotations(const Corpus& corpus, const AnnotationSet& annotations) {
    if (annotations.vocabulary.empty()) throw ConfigError("annotation vocabulary is empty");
    std::set<std::string> keys;
    for (const auto& r : corpus.records) {
        keys.insert(record_key(r));
        keys.insert(content_key(r));
    }
    LabelCounts out;
    for (const auto& [k, label] : annotations.entries) {
        if (keys.count(k)) {
            ++out.counts[label];
            ++out.matched;
        } else {
            out.unmatched_keys.push_back(k);
        }
    }
    return out;
}

std::string LabelCounts::to_csv() const {
    std::string out = csv::format_row({"label", "count"});
    for (const auto& [label, n] : counts) out += csv::format_row({label, std::to_string(n)});
    return out;
}

std::vector<LabelSuggestion> suggest_labels(const Corpus& corpus, const std::vector<LabelRule>& rules,
                                            const std::set<std::string>& vocabulary, const CompiledStream* scope) {
    for (const auto& rule : rules)
        if (!vocabulary.count(rule.label)) throw ConfigError("rule label '" + rule.label + "' not in vocabulary");
    std::vector<LabelSuggestion> out;
    for (const auto& r : corpus.records) {
        if (scope && !scope->matches(r)) continue;
        for (const auto& rule : rules) {
            if (text::contains_ci(r.text, rule.keyword)) {
                out.push_back({record_key(r), rule.label, rule.keyword});
                break;
            }
        }
    }
    return out;
}

std::string suggestions_csv(const std::vector<LabelSuggestion>& suggestions) {
    std::string out = csv::format_row({"message_key", "suggested_label", "keyword"});
    for (const auto& s : suggestions) out += csv::format_row({s.record_key, s.label, s.keyword});
    return out;
}

}  // namespace socialscope
