#include "socialscope/corpus.hpp"

#include <algorithm>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/text.hpp"

namespace socialscope {

using nlohmann::json;

std::string_view to_string(Language lang) {
    switch (lang) {
        case Language::de: return "de";
        case Language::en: return "en";
        case Language::other: return "other";
    }
    return "other";
}

Language parse_language(std::string_view s) {
    auto f = text::casefold(text::trim(s));
    if (f == "de") return Language::de;
    if (f == "en") return Language::en;
    return Language::other;
}

void sort_canonical(std::vector<MessageRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const MessageRecord& a, const MessageRecord& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        if (a.author != b.author) return a.author < b.author;
        return text::fnv1a64(a.text) < text::fnv1a64(b.text);
    });
}

// ---------------------------------------------------------------------------
// Language heuristic

namespace {

std::vector<std::string> lowercase_words(std::string_view s) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : s) {
        if (text::is_word_byte(static_cast<unsigned char>(ch))) {
            cur.push_back(ch);
        } else if (!cur.empty()) {
            words.push_back(text::casefold(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(text::casefold(cur));
    return words;
}

}  // namespace

LanguageClassifier::LanguageClassifier()
    : LanguageClassifier({"der", "die", "das", "und", "ist", "nicht", "ein", "eine", "ich", "wir", "sie", "mit",
                          "für", "auf", "den", "dem", "zu", "von", "es", "auch", "wie", "wird", "sich", "im"},
                         {"the", "and", "is", "not", "a", "an", "i", "we", "they", "with", "for", "on", "to", "of",
                          "it", "this", "that", "be", "are", "was", "in", "will", "you", "he"},
                         0.15) {}

LanguageClassifier::LanguageClassifier(std::set<std::string> german, std::set<std::string> english, double min_ratio)
    : german_(std::move(german)), english_(std::move(english)), min_ratio_(min_ratio) {}

Language LanguageClassifier::classify(std::string_view s) const {
    auto words = lowercase_words(s);
    if (words.empty()) return Language::other;
    std::size_t de = 0, en = 0;
    for (const auto& w : words) {
        de += german_.count(w);
        en += english_.count(w);
    }
    double n = static_cast<double>(words.size());
    double rde = de / n, ren = en / n;
    if (rde >= min_ratio_ && rde > ren) return Language::de;
    if (ren >= min_ratio_ && ren > rde) return Language::en;
    return Language::other;
}

// ---------------------------------------------------------------------------
// Ingestion

InputFormat format_for_path(const std::filesystem::path& path) {
    return text::casefold(path.extension().string()) == ".csv" ? InputFormat::Csv : InputFormat::JsonLines;
}

namespace {

// Field values normalized to optional strings so JSON and CSV share validation.
struct RawFields {
    std::optional<std::string> id, author, ts, text, rt_count, like_count, reply_count, lang, follower, retweet;
};

std::optional<std::uint64_t> parse_count(const std::string& s, std::string& error, const char* name) {
    auto t = text::trim(s);
    if (t.empty()) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : t) {
        if (c < '0' || c > '9') {
            error = std::string(name) + " is not a non-negative integer";
            return std::nullopt;
        }
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

std::optional<MessageRecord> build_record(const RawFields& f, const LanguageClassifier& classifier,
                                          std::string& error) {
    if (!f.author || text::trim(*f.author).empty()) {
        error = "missing author";
        return std::nullopt;
    }
    if (!f.ts || text::trim(*f.ts).empty()) {
        error = "missing timestamp";
        return std::nullopt;
    }
    if (!f.text) {
        error = "missing text";
        return std::nullopt;
    }
    if (!text::is_valid_utf8(*f.text) || !text::is_valid_utf8(*f.author)) {
        error = "invalid UTF-8";
        return std::nullopt;
    }
    auto ts = parse_timestamp(*f.ts);
    if (!ts) {
        error = "unparseable timestamp '" + *f.ts + "'";
        return std::nullopt;
    }

    MessageRecord r;
    if (f.id && !text::trim(*f.id).empty()) r.id = std::string(text::trim(*f.id));
    std::string_view author = text::trim(*f.author);
    if (!author.empty() && author.front() == '@') author.remove_prefix(1);
    r.author = text::casefold(author);
    r.timestamp = *ts;
    r.text = *f.text;

    if (f.rt_count) {
        auto v = parse_count(*f.rt_count, error, "rt_count");
        if (!error.empty()) return std::nullopt;
        r.retweet_count = v.value_or(0);
    }
    if (f.like_count) {
        auto v = parse_count(*f.like_count, error, "like_count");
        if (!error.empty()) return std::nullopt;
        r.like_count = v.value_or(0);
    }
    if (f.reply_count) {
        r.reply_count = parse_count(*f.reply_count, error, "reply_count");
        if (!error.empty()) return std::nullopt;
    }
    if (f.follower && !text::trim(*f.follower).empty()) {
        auto code = parse_count(*f.follower, error, "follower");
        if (!error.empty()) return std::nullopt;
        if (!code || *code > 3) {
            error = "follower code outside 0..3";
            return std::nullopt;
        }
        r.follower_code = static_cast<FollowerCode>(*code);
    }
    if (f.lang && !text::trim(*f.lang).empty())
        r.language = parse_language(*f.lang);
    else
        r.language = classifier.classify(r.text);

    bool flag = false;
    if (f.retweet) {
        auto v = text::casefold(text::trim(*f.retweet));
        flag = v == "true" || v == "1" || v == "yes";
    }
    r.is_retweet = flag || text::has_retweet_prefix(r.text);
    return r;
}

std::optional<std::string> json_field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_boolean()) return it->get<bool>() ? "true" : "false";
    if (it->is_number_integer() || it->is_number_unsigned()) return it->dump();
    if (it->is_number_float()) return std::string("x");  // rejected by count parsing
    return it->dump();
}

void ingest_json_lines(std::istream& in, Corpus& corpus, const LanguageClassifier& classifier) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            corpus.rejects.push_back({lineno, "malformed JSON"});
            continue;
        }
        if (!obj.is_object()) {
            corpus.rejects.push_back({lineno, "record is not a JSON object"});
            continue;
        }
        RawFields f;
        f.id = json_field(obj, "id");
        f.author = json_field(obj, "author");
        f.ts = json_field(obj, "ts");
        f.text = json_field(obj, "text");
        f.rt_count = json_field(obj, "rt_count");
        f.like_count = json_field(obj, "like_count");
        f.reply_count = json_field(obj, "reply_count");
        f.lang = json_field(obj, "lang");
        f.follower = json_field(obj, "follower");
        f.retweet = json_field(obj, "retweet");
        std::string error;
        if (auto r = build_record(f, classifier, error))
            corpus.records.push_back(std::move(*r));
        else
            corpus.rejects.push_back({lineno, error});
    }
    if (in.bad()) throw IngestError("read error while ingesting JSON lines");
}

void ingest_csv(std::istream& in, Corpus& corpus, const LanguageClassifier& classifier) {
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IngestError("read error while ingesting CSV");
    auto rows = csv::parse(ss.str());
    if (rows.empty()) return;
    const auto& header = rows.front();
    auto column = [&](const char* name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (text::trim(header[i]) == name) return i;
        return std::nullopt;
    };
    auto c_id = column("id"), c_author = column("author"), c_ts = column("ts"), c_text = column("text"),
         c_rt = column("rt_count"), c_like = column("like_count"), c_reply = column("reply_count"),
         c_lang = column("lang"), c_follower = column("follower"), c_retweet = column("retweet");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != header.size()) {
            corpus.rejects.push_back({i + 1, "expected " + std::to_string(header.size()) + " fields, got " +
                                                 std::to_string(row.size())});
            continue;
        }
        auto get = [&](const std::optional<std::size_t>& c) -> std::optional<std::string> {
            if (!c) return std::nullopt;
            if (row[*c].empty() && c != c_text) return std::nullopt;
            return row[*c];
        };
        RawFields f{get(c_id),   get(c_author), get(c_ts),   get(c_text),     get(c_rt),
                    get(c_like), get(c_reply),  get(c_lang), get(c_follower), get(c_retweet)};
        std::string error;
        if (auto r = build_record(f, classifier, error))
            corpus.records.push_back(std::move(*r));
        else
            corpus.rejects.push_back({i + 1, error});
    }
}

}  // namespace

Corpus ingest(std::istream& in, InputFormat format, std::string_view source_name,
              const LanguageClassifier& classifier) {
    if (!in) throw IngestError("unreadable input stream " + std::string(source_name));
    Corpus corpus;
    corpus.provenance.sources.emplace_back(source_name);
    if (format == InputFormat::JsonLines)
        ingest_json_lines(in, corpus, classifier);
    else
        ingest_csv(in, corpus, classifier);
    sort_canonical(corpus.records);
    return corpus;
}

Corpus ingest_file(const std::filesystem::path& path, std::optional<InputFormat> format,
                   const LanguageClassifier& classifier) {
    std::string content;
    try {
        content = io::read_file(path);
    } catch (const IoError& e) {
        throw IngestError(e.what());
    }
    std::istringstream in(content);
    return ingest(in, format.value_or(format_for_path(path)), path.string(), classifier);
}

Corpus merge(std::vector<Corpus> parts) {
    Corpus out;
    for (auto& p : parts) {
        out.records.insert(out.records.end(), std::make_move_iterator(p.records.begin()),
                           std::make_move_iterator(p.records.end()));
        out.rejects.insert(out.rejects.end(), p.rejects.begin(), p.rejects.end());
        out.provenance.sources.insert(out.provenance.sources.end(), p.provenance.sources.begin(),
                                      p.provenance.sources.end());
        out.dedup_removed += p.dedup_removed;
        if (out.provenance.ingested_at.empty()) out.provenance.ingested_at = p.provenance.ingested_at;
    }
    sort_canonical(out.records);
    return out;
}

std::string to_json_lines(const Corpus& corpus) {
    std::string out;
    for (const auto& r : corpus.records) {
        json obj;
        if (r.id) obj["id"] = *r.id;
        obj["author"] = r.author;
        obj["ts"] = format_timestamp(r.timestamp);
        obj["text"] = r.text;
        obj["rt_count"] = r.retweet_count;
        obj["like_count"] = r.like_count;
        if (r.reply_count) obj["reply_count"] = *r.reply_count;
        obj["lang"] = to_string(r.language);
        obj["follower"] = static_cast<int>(r.follower_code);
        if (r.is_retweet) obj["retweet"] = true;
        out += obj.dump();
        out.push_back('\n');
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cleaning

std::string dedup_key(const MessageRecord& record) {
    if (record.id) return "id:" + *record.id;
    return "k:" + record.author + '\x1f' + std::to_string(record.timestamp.time_since_epoch().count()) + '\x1f' +
           record.text;
}

std::string record_key(const MessageRecord& record) {
    if (record.id) return *record.id;
    return "h" + text::hex64(text::fnv1a64(dedup_key(record)));
}

Corpus deduplicate(Corpus corpus) {
    std::unordered_set<std::string> seen;
    std::vector<MessageRecord> kept;
    kept.reserve(corpus.records.size());
    for (auto& r : corpus.records)
        if (seen.insert(dedup_key(r)).second) kept.push_back(std::move(r));
    corpus.dedup_removed += corpus.records.size() - kept.size();
    corpus.records = std::move(kept);
    return corpus;
}

NormalizationTable NormalizationTable::parse_csv(std::string_view content) {
    NormalizationTable table;
    for (const auto& row : csv::parse(content)) {
        if (row.size() < 2 || row.size() > 3) throw ConfigError("normalization table rows need 2 or 3 columns");
        if (row[0].empty()) throw ConfigError("normalization pattern must be non-empty");
        bool ci = row.size() == 3 && text::casefold(text::trim(row[2])) == "ci";
        if (row.size() == 3 && !ci && !text::trim(row[2]).empty())
            throw ConfigError("unknown normalization flag '" + row[2] + "'");
        table.entries.push_back({row[0], row[1], ci});
    }
    return table;
}

NormalizationTable NormalizationTable::load(const std::filesystem::path& path) {
    return parse_csv(io::read_file(path));
}

NormalizationTable NormalizationTable::shipped() {
    return {{{"Oesterreich", "Österreich", false},
             {"van der Belen", "Van der Bellen", false},
             {"Van der Belen", "Van der Bellen", false},
             {"Van Der Bellen", "Van der Bellen", false}}};
}

std::string normalize_text(std::string_view input, const NormalizationTable& table) {
    std::string current(input);
    for (const auto& e : table.entries) {
        // casefold preserves byte offsets, so positions found in the folded copy
        // address the original text.
        std::string haystack = e.case_insensitive ? text::casefold(current) : current;
        std::string needle = e.case_insensitive ? text::casefold(e.pattern) : e.pattern;
        std::string out;
        std::size_t pos = 0;
        while (true) {
            auto hit = haystack.find(needle, pos);
            if (hit == std::string::npos) break;
            out.append(current, pos, hit - pos);
            out += e.replacement;
            pos = hit + needle.size();
        }
        out.append(current, pos, std::string::npos);
        current = std::move(out);
    }
    return current;
}

Corpus normalize_corpus(Corpus corpus, const NormalizationTable& table) {
    for (auto& r : corpus.records) r.text = normalize_text(r.text, table);
    sort_canonical(corpus.records);
    return corpus;
}

SelectorSet SelectorSet::make(const std::vector<std::string>& hashtags,
                              const std::vector<std::vector<std::string>>& conjunctions) {
    SelectorSet s;
    auto fold = [](const std::string& tag) {
        auto t = text::trim(tag);
        if (t.size() < 2 || t.front() != '#') throw ConfigError("selector '" + tag + "' must start with '#'");
        return text::casefold(t);
    };
    for (const auto& h : hashtags) s.hashtags.insert(fold(h));
    for (const auto& group : conjunctions) {
        if (group.empty()) throw ConfigError("empty hashtag conjunction");
        std::set<std::string> c;
        for (const auto& h : group) c.insert(fold(h));
        s.conjunctions.push_back(std::move(c));
    }
    if (s.hashtags.empty() && s.conjunctions.empty()) throw ConfigError("selector set is empty");
    return s;
}

bool SelectorSet::matches(std::string_view msg) const {
    std::set<std::string> present;
    for (const auto& tag : text::extract_hashtags(msg)) present.insert(text::casefold(tag));
    for (const auto& tag : present)
        if (hashtags.count(tag)) return true;
    for (const auto& c : conjunctions)
        if (std::includes(present.begin(), present.end(), c.begin(), c.end())) return true;
    return false;
}

Corpus filter_by_selectors(const Corpus& corpus, const SelectorSet& selectors) {
    Corpus out;
    out.provenance = corpus.provenance;
    out.dedup_removed = corpus.dedup_removed;
    out.rejects = corpus.rejects;
    for (const auto& r : corpus.records)
        if (selectors.matches(r.text)) out.records.push_back(r);
    return out;
}

UsernameSet load_usernames(const std::filesystem::path& path) {
    UsernameSet names;
    for (auto line : io::read_lines(path)) {
        std::string_view v = line;
        if (v.front() == '@') v.remove_prefix(1);
        names.insert(text::casefold(v));
    }
    return names;
}

Corpus assign_follower_codes(Corpus corpus, const UsernameSet& followers_a, const UsernameSet& followers_b) {
    for (auto& r : corpus.records) {
        bool a = followers_a.count(r.author) > 0;
        bool b = followers_b.count(r.author) > 0;
        r.follower_code = static_cast<FollowerCode>((a ? 1 : 0) | (b ? 2 : 0));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Series and partitions

std::uint64_t DailySeries::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

int DailySeries::peak_index() const {
    if (counts.empty()) return -1;
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::string DailySeries::to_csv() const {
    std::string out = "date,count,marker\n";
    for (int i = 0; i < static_cast<int>(counts.size()); ++i) {
        Date d = range.start + std::chrono::days{i};
        std::string label;
        for (const auto& m : markers)
            if (m.date == d) label += (label.empty() ? "" : "; ") + m.label;
        out += csv::format_row({format_date(d), std::to_string(counts[i]), label});
    }
    return out;
}

DailySeries daily_counts(const Corpus& corpus, const DateRange& range, const std::vector<Marker>& markers) {
    DailySeries s{range, std::vector<std::uint64_t>(static_cast<std::size_t>(range.days()), 0), {}};
    for (const auto& m : markers) {
        if (!range.contains(m.date)) throw ParameterError("marker '" + m.label + "' outside the series range");
        s.markers.push_back(m);
    }
    for (const auto& r : corpus.records) {
        Date d = utc_date(r.timestamp);
        if (range.contains(d)) ++s.counts[static_cast<std::size_t>(range.index_of(d))];
    }
    return s;
}

DateRange corpus_range(const Corpus& corpus) {
    if (corpus.records.empty()) throw ParameterError("empty corpus has no date range");
    auto [lo, hi] = std::minmax_element(corpus.records.begin(), corpus.records.end(),
                                        [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    return DateRange::make(utc_date(lo->timestamp), utc_date(hi->timestamp));
}

std::map<Language, Corpus> partition_by_language(const Corpus& corpus) {
    std::map<Language, Corpus> parts;
    for (Language l : {Language::de, Language::en, Language::other}) parts[l].provenance = corpus.provenance;
    for (const auto& r : corpus.records) parts[r.language].records.push_back(r);
    return parts;
}

Corpus filter_language(const Corpus& corpus, Language lang) {
    Corpus out;
    out.provenance = corpus.provenance;
    out.dedup_removed = corpus.dedup_removed;
    for (const auto& r : corpus.records)
        if (r.language == lang) out.records.push_back(r);
    return out;
}

}  // namespace socialscope
