#include "socialscope/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/random.hpp"
#include "socialscope/streams.hpp"
#include "socialscope/text.hpp"

namespace socialscope {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Phases

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Ingest: return "ingest";
        case Phase::Sentiment: return "sentiment";
        case Phase::Network: return "network";
        case Phase::Streams: return "streams";
        case Phase::Bots: return "bots";
        case Phase::Fit: return "fit";
        case Phase::Report: return "report";
    }
    return "ingest";
}

namespace {

constexpr Phase kPhaseOrder[] = {Phase::Ingest, Phase::Sentiment, Phase::Network, Phase::Streams,
                                 Phase::Bots,   Phase::Fit,       Phase::Report};

}  // namespace

Phase parse_phase(std::string_view s) {
    auto name = text::casefold(text::trim(s));
    for (auto p : kPhaseOrder)
        if (to_string(p) == name) return p;
    throw ConfigError("unknown phase '" + std::string(s) + "'");
}

std::set<Phase> parse_phases(std::string_view list) {
    std::set<Phase> out;
    std::string item;
    std::istringstream in{std::string(list)};
    while (std::getline(in, item, ',')) {
        auto t = text::trim(item);
        if (t.empty()) continue;
        if (text::casefold(t) == "all") {
            out.insert(std::begin(kPhaseOrder), std::end(kPhaseOrder));
            continue;
        }
        out.insert(parse_phase(t));
    }
    if (out.empty()) throw ConfigError("empty phase list");
    return out;
}

const std::vector<std::string>& section_names() {
    static const std::vector<std::string> names = {"corpus",       "sentiment", "hashtag_network", "mention_network",
                                                   "tailfit",      "bots",      "streams"};
    return names;
}

// ---------------------------------------------------------------------------
// Configuration

ConfigValidationError::ConfigValidationError(std::vector<std::string> problems)
    : ConfigError([&] {
          std::string msg = "invalid configuration:";
          for (const auto& p : problems) msg += "\n  " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

namespace {

std::string_view scope_name(LanguageScope s) {
    switch (s) {
        case LanguageScope::de: return "de";
        case LanguageScope::en: return "en";
        case LanguageScope::all: return "all";
    }
    return "all";
}

std::optional<LanguageScope> parse_scope(std::string_view s) {
    auto t = text::casefold(s);
    if (t == "de") return LanguageScope::de;
    if (t == "en") return LanguageScope::en;
    if (t == "all") return LanguageScope::all;
    return std::nullopt;
}

// Reads config fields while recording every problem with its field path.
struct Reader {
    const nlohmann::json& doc;
    fs::path base;
    std::vector<std::string> problems;

    const nlohmann::json* get(const nlohmann::json& obj, const std::string& key) {
        if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) return nullptr;
        return &obj[key];
    }

    template <typename T>
    std::optional<T> value(const nlohmann::json& obj, const std::string& key, const std::string& field) {
        const auto* v = get(obj, key);
        if (!v) return std::nullopt;
        try {
            return v->get<T>();
        } catch (const nlohmann::json::exception&) {
            problems.push_back(field + ": wrong type");
            return std::nullopt;
        }
    }

    std::optional<fs::path> path(const nlohmann::json& obj, const std::string& key, const std::string& field,
                                 bool required) {
        auto s = value<std::string>(obj, key, field);
        if (!s) {
            if (required) problems.push_back(field + ": required");
            return std::nullopt;
        }
        fs::path p = fs::path(*s).is_absolute() ? fs::path(*s) : base / *s;
        if (!fs::exists(p)) {
            problems.push_back(field + ": file not found: " + p.string());
            return std::nullopt;
        }
        return p;
    }
};

}  // namespace

RunConfig parse_config(const nlohmann::json& doc, const fs::path& base_dir, const ConfigOverrides& overrides) {
    if (!doc.is_object()) throw ConfigValidationError({"<root>: configuration must be a JSON object"});
    Reader rd{doc, base_dir, {}};
    RunConfig c;

    if (const auto* inputs = rd.get(doc, "inputs")) {
        if (!inputs->is_array() || inputs->empty()) {
            rd.problems.push_back("inputs: must be a non-empty array");
        } else {
            for (std::size_t i = 0; i < inputs->size(); ++i) {
                nlohmann::json holder = {{"p", (*inputs)[i]}};
                if (auto p = rd.path(holder, "p", "inputs[" + std::to_string(i) + "]", true)) c.inputs.push_back(*p);
            }
        }
    } else {
        rd.problems.push_back("inputs: required");
    }

    auto lang = overrides.language ? overrides.language : rd.value<std::string>(doc, "language", "language");
    if (lang) {
        if (auto s = parse_scope(*lang))
            c.language = *s;
        else
            rd.problems.push_back("language: expected de, en or all, got '" + *lang + "'");
    }

    if (overrides.seed) {
        c.seed = *overrides.seed;
    } else if (auto s = rd.value<std::uint64_t>(doc, "seed", "seed")) {
        c.seed = *s;
    } else {
        c.seed_defaulted = true;
    }
    if (auto w = rd.value<unsigned>(doc, "workers", "workers")) c.workers = *w;
    if (overrides.workers) c.workers = *overrides.workers;

    if (const auto* sel = rd.get(doc, "selectors")) {
        if (auto h = rd.value<std::vector<std::string>>(*sel, "hashtags", "selectors.hashtags")) c.selector_hashtags = *h;
        if (auto cj = rd.value<std::vector<std::vector<std::string>>>(*sel, "conjunctions", "selectors.conjunctions"))
            c.selector_conjunctions = *cj;
        try {
            SelectorSet::make(c.selector_hashtags, c.selector_conjunctions);
        } catch (const ConfigError& e) {
            rd.problems.push_back(std::string("selectors: ") + e.what());
        }
    }
    c.normalization = rd.path(doc, "normalization", "normalization", false);

    if (const auto* lex = rd.get(doc, "lexicons")) {
        for (auto [lang_name, lang_value] : {std::pair{"de", Language::de}, std::pair{"en", Language::en}}) {
            const auto* entry = rd.get(*lex, lang_name);
            if (!entry) continue;
            std::string f = std::string("lexicons.") + lang_name;
            auto s = rd.path(*entry, "sentiment", f + ".sentiment", true);
            auto e = rd.path(*entry, "emotion", f + ".emotion", true);
            if (s && e) c.lexicons[lang_value] = LexiconPaths{*s, *e};
        }
    }
    if (c.lexicons.empty()) rd.problems.push_back("lexicons: at least one language needs lexicon files");

    if (const auto* targets = rd.get(doc, "targets")) {
        for (std::size_t i = 0; i < targets->size(); ++i) {
            std::string f = "targets[" + std::to_string(i) + "]";
            auto name = rd.value<std::string>((*targets)[i], "name", f + ".name");
            auto patterns = rd.value<std::vector<std::string>>((*targets)[i], "patterns", f + ".patterns");
            if (!name || !patterns) {
                rd.problems.push_back(f + ": needs name and patterns");
                continue;
            }
            c.targets.push_back({*name, *patterns});
        }
        try {
            if (!c.targets.empty()) TargetMatcher check(c.targets);
        } catch (const ConfigError& e) {
            rd.problems.push_back(std::string("targets: ") + e.what());
        }
    }
    c.categories = rd.path(doc, "categories", "categories", false);
    if (auto egos = rd.value<std::vector<std::string>>(doc, "egos", "egos")) c.egos = *egos;
    if (auto ex = rd.value<std::vector<std::string>>(doc, "exclude_categories", "exclude_categories")) {
        c.excluded_categories.clear();
        for (const auto& name : *ex) {
            try {
                c.excluded_categories.insert(parse_hashtag_category(name));
            } catch (const ConfigError& e) {
                rd.problems.push_back(std::string("exclude_categories: ") + e.what());
            }
        }
    }
    c.streams = rd.path(doc, "streams", "streams", false);
    if (c.streams) {
        try {
            load_streams(*c.streams);
        } catch (const Error& e) {
            rd.problems.push_back(std::string("streams: ") + e.what());
        }
    }
    if (const auto* ann = rd.get(doc, "annotations")) {
        AnnotationConfig a;
        auto p = rd.path(*ann, "path", "annotations.path", true);
        if (p) a.path = *p;
        if (auto s = rd.value<std::string>(*ann, "stream", "annotations.stream")) a.stream = *s;
        if (auto v = rd.value<std::vector<std::string>>(*ann, "vocabulary", "annotations.vocabulary")) a.vocabulary = *v;
        if (a.vocabulary.empty()) rd.problems.push_back("annotations.vocabulary: must not be empty");
        if (const auto* rules = rd.get(*ann, "rules")) {
            for (const auto& r : *rules) {
                auto kw = rd.value<std::string>(r, "keyword", "annotations.rules.keyword");
                auto label = rd.value<std::string>(r, "label", "annotations.rules.label");
                if (kw && label) a.rules.push_back({*kw, *label});
            }
        }
        if (p) c.annotations = a;
    }
    if (auto t = rd.value<std::vector<std::string>>(doc, "trajectories", "trajectories")) c.trajectories = *t;

    if (const auto* fol = rd.get(doc, "followers")) {
        if (auto a = rd.path(*fol, "a", "followers.a", true)) c.followers_a = *a;
        if (auto b = rd.path(*fol, "b", "followers.b", true)) c.followers_b = *b;
    }
    if (const auto* markers = rd.get(doc, "markers")) {
        for (const auto& m : *markers) {
            auto d = rd.value<std::string>(m, "date", "markers.date");
            auto l = rd.value<std::string>(m, "label", "markers.label");
            if (!d || !parse_date(*d)) {
                rd.problems.push_back("markers: bad date");
                continue;
            }
            c.markers.emplace_back(*d, l.value_or(""));
        }
    }
    if (const auto* range = rd.get(doc, "range")) {
        auto s = rd.value<std::string>(*range, "start", "range.start");
        auto e = rd.value<std::string>(*range, "end", "range.end");
        try {
            if (!s || !e) throw ConfigError("needs start and end");
            DateRange::parse(*s, *e);
            c.range = std::pair{*s, *e};
        } catch (const Error& ex) {
            rd.problems.push_back(std::string("range: ") + ex.what());
        }
    }

    if (const auto* bots = rd.get(doc, "bots")) {
        auto& b = c.bots;
        if (auto prov = rd.value<std::string>(*bots, "provider", "bots.provider")) b.provider = *prov;
        if (b.provider == "file") {
            if (auto p = rd.path(*bots, "scores", "bots.scores", true)) b.scores = *p;
        } else if (b.provider == "http") {
            if (auto u = rd.value<std::string>(*bots, "url", "bots.url")) {
                b.http.base_url = *u;
                // built without TLS
                if (u->rfind("http://", 0) != 0) rd.problems.push_back("bots.url: only http:// URLs are supported");
            } else {
                rd.problems.push_back("bots.url: required for the http provider");
            }
            if (auto r = rd.value<double>(*bots, "rate_limit", "bots.rate_limit")) b.http.rate_limit = *r;
            if (auto a = rd.value<int>(*bots, "max_attempts", "bots.max_attempts")) b.http.max_attempts = *a;
            if (overrides.offline)
                rd.problems.push_back("bots.provider: http provider is not allowed in offline mode");
        } else {
            rd.problems.push_back("bots.provider: expected file or http, got '" + b.provider + "'");
        }
        if (auto t = rd.value<std::vector<double>>(*bots, "thresholds", "bots.thresholds")) {
            if (t->size() != 2 || !((*t)[0] >= 0 && (*t)[0] < (*t)[1] && (*t)[1] <= 1))
                rd.problems.push_back("bots.thresholds: expected [t1, t2] with 0 <= t1 < t2 <= 1");
            else
                b.thresholds = {(*t)[0], (*t)[1]};
        }
        if (auto v = rd.value<std::uint64_t>(*bots, "daily_volume", "bots.daily_volume")) b.heuristic.daily_volume = *v;
        if (auto v = rd.value<std::size_t>(*bots, "min_days", "bots.min_days")) b.heuristic.min_days = *v;
        if (auto v = rd.value<std::string>(*bots, "name_token", "bots.name_token")) b.heuristic.name_token = *v;
        if (auto v = rd.value<unsigned>(*bots, "concurrency", "bots.concurrency")) b.concurrency = *v;
    }

    if (const auto* tf = rd.get(doc, "tailfit")) {
        auto& t = c.tailfit;
        if (auto v = rd.value<int>(*tf, "n_sims", "tailfit.n_sims")) t.n_sims = *v;
        if (t.n_sims < 100) rd.problems.push_back("tailfit.n_sims: must be at least 100");
        if (auto v = rd.value<double>(*tf, "significance", "tailfit.significance")) t.significance = *v;
        if (!(t.significance > 0 && t.significance < 1)) rd.problems.push_back("tailfit.significance: must be in (0, 1)");
        if (auto v = rd.value<bool>(*tf, "pin_xmin", "tailfit.pin_xmin")) t.pin_xmin = *v;
        if (auto v = rd.value<std::string>(*tf, "common_tail", "tailfit.common_tail")) {
            try {
                t.common_tail = parse_common_tail(*v);
            } catch (const Error& e) {
                rd.problems.push_back(std::string("tailfit.common_tail: ") + e.what());
            }
        }
        if (auto fams = rd.value<std::vector<std::string>>(*tf, "families", "tailfit.families")) {
            t.families.clear();
            for (const auto& f : *fams) {
                try {
                    t.families.push_back(parse_model_family(f));
                } catch (const Error& e) {
                    rd.problems.push_back(std::string("tailfit.families: ") + e.what());
                }
            }
            if (t.families.size() < 2) rd.problems.push_back("tailfit.families: need at least two families");
        }
    }
    if (auto r = rd.value<double>(doc, "resolution", "resolution")) c.resolution = *r;
    if (!(c.resolution > 0)) rd.problems.push_back("resolution: must be positive");

    if (auto o = rd.value<std::string>(doc, "out", "out")) c.out = fs::path(*o).is_absolute() ? fs::path(*o) : base_dir / *o;
    else c.out = base_dir / "out";
    if (overrides.out) c.out = *overrides.out;
    c.offline = overrides.offline;

    if (!rd.problems.empty()) throw ConfigValidationError(std::move(rd.problems));
    return c;
}

RunConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
    std::string content;
    try {
        content = io::read_file(path);
    } catch (const IoError& e) {
        throw ConfigValidationError({std::string("<file>: ") + e.what()});
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigValidationError({std::string("<file>: not valid JSON: ") + e.what()});
    }
    auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    return parse_config(doc, base, overrides);
}

nlohmann::ordered_json RunConfig::to_json() const {
    auto rel = [](const fs::path& p) { return p.lexically_normal().generic_string(); };
    ojson j;
    auto ins = ojson::array();
    for (const auto& p : inputs) ins.push_back(rel(p));
    j["inputs"] = ins;
    j["language"] = scope_name(language);
    j["seed"] = seed;
    j["selectors"] = {{"hashtags", selector_hashtags}, {"conjunctions", selector_conjunctions}};
    j["normalization"] = normalization ? ojson(rel(*normalization)) : ojson("shipped");
    ojson lex = ojson::object();
    for (const auto& [lang, p] : lexicons)
        lex[std::string(socialscope::to_string(lang))] = {{"sentiment", rel(p.sentiment)}, {"emotion", rel(p.emotion)}};
    j["lexicons"] = lex;
    auto tg = ojson::array();
    for (const auto& t : targets) tg.push_back({{"name", t.name}, {"patterns", t.patterns}});
    j["targets"] = tg;
    j["categories"] = categories ? ojson(rel(*categories)) : ojson(nullptr);
    j["egos"] = egos;
    auto ex = ojson::array();
    for (auto c : excluded_categories) ex.push_back(socialscope::to_string(c));
    j["exclude_categories"] = ex;
    j["streams"] = streams ? ojson(rel(*streams)) : ojson(nullptr);
    if (annotations) {
        auto rules = ojson::array();
        for (const auto& r : annotations->rules) rules.push_back({{"keyword", r.keyword}, {"label", r.label}});
        j["annotations"] = {{"path", rel(annotations->path)},
                            {"stream", annotations->stream},
                            {"vocabulary", annotations->vocabulary},
                            {"rules", rules}};
    } else {
        j["annotations"] = nullptr;
    }
    j["trajectories"] = trajectories;
    j["followers"] = {{"a", rel(followers_a)}, {"b", rel(followers_b)}};
    auto mk = ojson::array();
    for (const auto& [d, l] : markers) mk.push_back({{"date", d}, {"label", l}});
    j["markers"] = mk;
    j["range"] = range ? ojson({{"start", range->first}, {"end", range->second}}) : ojson(nullptr);
    ojson b;
    b["provider"] = bots.provider;
    if (bots.provider == "file")
        b["scores"] = rel(bots.scores);
    else
        b["url"] = bots.http.base_url;
    b["thresholds"] = {bots.thresholds.human_max, bots.thresholds.potential_max};
    b["daily_volume"] = bots.heuristic.daily_volume;
    b["min_days"] = bots.heuristic.min_days;
    b["name_token"] = bots.heuristic.name_token;
    j["bots"] = b;
    auto fams = ojson::array();
    for (auto f : tailfit.families) fams.push_back(socialscope::to_string(f));
    j["tailfit"] = {{"n_sims", tailfit.n_sims},
                    {"significance", tailfit.significance},
                    {"pin_xmin", tailfit.pin_xmin},
                    {"common_tail", socialscope::to_string(tailfit.common_tail)},
                    {"families", fams}};
    j["resolution"] = resolution;
    j["offline"] = offline;
    return j;
}

// ---------------------------------------------------------------------------
// Phase implementations

namespace {

struct Context {
    const RunConfig& config;
    std::ostream& log;

    fs::path cache_dir() const { return config.out / "cache"; }
    fs::path corpus_cache() const { return cache_dir() / "corpus.jsonl"; }
    fs::path section_cache(const std::string& name) const { return cache_dir() / "sections" / (name + ".json"); }

    std::uint64_t seed_for(std::string_view purpose) const { return derive_seed(config.seed, text::fnv1a64(purpose)); }

    void require(const fs::path& p, std::string_view producer) const {
        if (!fs::exists(p))
            throw NotFoundError("missing cache " + p.string() + "; run the " + std::string(producer) + " phase first");
    }

    Corpus load_corpus() const {
        require(corpus_cache(), "ingest");
        return ingest_file(corpus_cache(), InputFormat::JsonLines);
    }

    Corpus scoped(const Corpus& corpus) const {
        switch (config.language) {
            case LanguageScope::de: return filter_language(corpus, Language::de);
            case LanguageScope::en: return filter_language(corpus, Language::en);
            case LanguageScope::all: return corpus;
        }
        return corpus;
    }

    DateRange range_for(const Corpus& corpus) const {
        if (config.range) return DateRange::parse(config.range->first, config.range->second);
        return corpus_range(corpus);
    }

    std::vector<Marker> markers_in(const DateRange& range) const {
        std::vector<Marker> out;
        for (const auto& [d, label] : config.markers) {
            auto date = *parse_date(d);
            if (range.contains(date)) out.push_back({date, label});
        }
        return out;
    }

    void save_section(const ReportSection& s) const {
        io::write_file(section_cache(s.name), s.to_json().dump(1) + "\n");
    }
};

ojson section_config(const RunConfig& c) {
    return {{"language", scope_name(c.language)}, {"seed", c.seed}};
}

std::string rejects_csv(const Corpus& c) {
    std::string out = csv::format_row({"line", "reason"});
    for (const auto& r : c.rejects) out += csv::format_row({std::to_string(r.line), r.reason});
    return out;
}

void phase_ingest(const Context& ctx) {
    const auto& cfg = ctx.config;
    std::vector<Corpus> parts;
    for (const auto& p : cfg.inputs) {
        ctx.log << "  reading " << p.string() << "\n";
        auto part = ingest_file(p);
        part.provenance.sources = {p.filename().string()};
        parts.push_back(std::move(part));
    }
    auto corpus = merge(std::move(parts));
    std::size_t raw = corpus.records.size() + corpus.rejects.size();
    std::size_t parsed = corpus.records.size();
    corpus = deduplicate(std::move(corpus));
    auto table = cfg.normalization ? NormalizationTable::load(*cfg.normalization) : NormalizationTable::shipped();
    corpus = normalize_corpus(std::move(corpus), table);
    std::size_t before_selectors = corpus.records.size();
    if (!cfg.selector_hashtags.empty() || !cfg.selector_conjunctions.empty())
        corpus = filter_by_selectors(corpus, SelectorSet::make(cfg.selector_hashtags, cfg.selector_conjunctions));
    if (!cfg.followers_a.empty() && !cfg.followers_b.empty())
        corpus = assign_follower_codes(std::move(corpus), load_usernames(cfg.followers_a), load_usernames(cfg.followers_b));

    io::write_file(ctx.corpus_cache(), to_json_lines(corpus));
    io::write_file(cfg.out / "ingest" / "rejects.csv", rejects_csv(corpus));
    ctx.log << "  " << corpus.records.size() << " records kept, " << corpus.rejects.size() << " rejected, "
            << corpus.dedup_removed << " duplicates removed\n";

    ReportSection s{"corpus", "corpus", section_config(cfg), {}, {}};
    s.summary["lines_read"] = raw;
    s.summary["parsed"] = parsed;
    s.summary["rejected"] = corpus.rejects.size();
    s.summary["duplicates_removed"] = corpus.dedup_removed;
    s.summary["selector_dropped"] = before_selectors - corpus.records.size();
    s.summary["records"] = corpus.records.size();
    ojson by_lang = ojson::object();
    for (const auto& [lang, part] : partition_by_language(corpus))
        by_lang[std::string(socialscope::to_string(lang))] = part.records.size();
    s.summary["by_language"] = by_lang;
    std::array<std::size_t, 4> codes{};
    std::set<std::string> authors;
    std::size_t retweets = 0;
    for (const auto& r : corpus.records) {
        ++codes[static_cast<std::size_t>(r.follower_code)];
        authors.insert(r.author);
        retweets += r.is_retweet;
    }
    s.summary["by_follower_code"] = codes;
    s.summary["authors"] = authors.size();
    s.summary["retweets"] = retweets;
    s.artifacts.push_back({"rejects.csv", rejects_csv(corpus)});
    if (!corpus.records.empty()) {
        auto range = ctx.range_for(corpus);
        auto series = daily_counts(corpus, range, ctx.markers_in(range));
        s.summary["range"] = {{"start", format_date(range.start)}, {"end", format_date(range.end)}};
        s.summary["peak_day"] = format_date(range.start + std::chrono::days(series.peak_index()));
        s.artifacts.push_back({"daily_counts.csv", series.to_csv()});
    }
    ctx.save_section(s);
}

LexiconBundle load_lexicons(const RunConfig& cfg) {
    LexiconBundle b;
    for (const auto& [lang, p] : cfg.lexicons) {
        b.polarity.emplace(lang, SentimentLexicon::load(p.sentiment));
        b.emotion.emplace(lang, EmotionLexicon::load(p.emotion));
    }
    return b;
}

void phase_sentiment(const Context& ctx) {
    const auto& cfg = ctx.config;
    auto corpus = ctx.scoped(ctx.load_corpus());
    auto lexicons = load_lexicons(cfg);
    auto results = analyze_corpus(corpus, lexicons);

    ReportSection s{"sentiment", "sentiment", section_config(cfg), {}, {}};
    std::map<std::string, std::map<std::string, std::uint64_t>> by_lang;
    EmotionVector emotions;
    std::size_t unsupported = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].unsupported_language) {
            ++unsupported;
            continue;
        }
        ++by_lang[std::string(socialscope::to_string(corpus.records[i].language))]
                 [std::string(socialscope::to_string(results[i].category))];
        emotions += results[i].emotions;
    }
    ojson cats = ojson::object();
    for (const auto& [lang, counts] : by_lang) {
        ojson c = ojson::object();
        for (auto cat : {PolarityCategory::Positive, PolarityCategory::Negative, PolarityCategory::Neutral,
                         PolarityCategory::Overlap}) {
            auto it = counts.find(std::string(socialscope::to_string(cat)));
            c[std::string(socialscope::to_string(cat))] = it == counts.end() ? 0 : it->second;
        }
        cats[lang] = c;
    }
    s.summary["categories"] = cats;
    s.summary["unsupported_language"] = unsupported;
    ojson emo = ojson::object();
    for (std::size_t e = 0; e < kEmotionCount; ++e) emo[std::string(kEmotionNames[e])] = emotions.counts[e];
    s.summary["emotions"] = emo;

    std::string polarity_csv = csv::format_row({"record_key", "language", "positive", "negative", "category"});
    for (std::size_t i = 0; i < results.size(); ++i)
        polarity_csv += csv::format_row({record_key(corpus.records[i]),
                                         std::string(socialscope::to_string(corpus.records[i].language)),
                                         std::to_string(results[i].score.positive),
                                         std::to_string(results[i].score.negative),
                                         std::string(socialscope::to_string(results[i].category))});
    s.artifacts.push_back({"polarity.csv", polarity_csv});

    // retweet / like correlation over original messages
    std::vector<double> rts, likes;
    for (const auto& r : corpus.records) {
        if (r.is_retweet) continue;
        rts.push_back(static_cast<double>(r.retweet_count));
        likes.push_back(static_cast<double>(r.like_count));
    }
    try {
        s.summary["pearson_retweets_likes"] = pearson(rts, likes);
    } catch (const Error& e) {
        s.summary["pearson_retweets_likes"] = nullptr;
    }
    ojson emo_corr = ojson::object();
    for (const auto& [e, r] : emotion_reply_correlations(corpus, results))
        emo_corr[std::string(kEmotionNames[static_cast<std::size_t>(e)])] = r;
    s.summary["emotion_reply_correlation"] = emo_corr;

    auto by_polarity = engagement_summary(corpus, [&](const MessageRecord&, std::size_t i) {
        return std::string(socialscope::to_string(results[i].category));
    });
    auto by_code = engagement_summary(
        corpus, [](const MessageRecord& r, std::size_t) { return std::to_string(static_cast<int>(r.follower_code)); });
    s.artifacts.push_back({"engagement_by_polarity.csv", engagement_csv(by_polarity)});
    s.artifacts.push_back({"engagement_by_follower_code.csv", engagement_csv(by_code)});

    if (!cfg.targets.empty()) {
        TargetMatcher matcher(cfg.targets);
        std::vector<TargetedScore> all;
        ojson per_target = ojson::object();
        for (const auto& t : cfg.targets) {
            auto scores = sentiment_toward(corpus, matcher, t.name, lexicons);
            std::size_t ambiguous = 0;
            for (const auto& sc : scores) ambiguous += sc.ambiguous;
            per_target[t.name] = {{"mentions", scores.size()}, {"ambiguous", ambiguous}};
            all.insert(all.end(), scores.begin(), scores.end());
        }
        s.summary["targets"] = per_target;
        auto by_mention = engagement_summary(corpus, [&](const MessageRecord& r, std::size_t) {
            auto names = matcher.matching_targets(r.text);
            if (names.empty()) return std::string("none");
            std::string key;
            for (const auto& n : names) key += (key.empty() ? "" : "+") + n;
            return key;
        });
        s.artifacts.push_back({"engagement_by_mention.csv", engagement_csv(by_mention)});
        auto matrix = opinion_matrix(corpus, all);
        auto users = opinion_matrix(corpus, all, true);
        s.artifacts.push_back({"opinion_matrix.csv", matrix.to_csv()});
        s.artifacts.push_back({"opinion_matrix_users.csv", users.to_csv()});
        ojson fig = ojson::object();
        for (auto code : {FollowerCode::CandidateA, FollowerCode::CandidateB}) {
            ojson row = ojson::object();
            for (const auto& t : matrix.targets) {
                const auto& cell = matrix.at(code, t);
                row[t] = {{"positive", cell.positive}, {"negative", cell.negative}, {"overlap", cell.overlap}};
            }
            fig[code == FollowerCode::CandidateA ? "followers_a" : "followers_b"] = row;
        }
        s.summary["opinion_matrix"] = fig;
    }
    ctx.save_section(s);
}

ojson top_k(const std::vector<std::pair<std::string, double>>& items, std::size_t k) {
    auto sorted = items;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    ojson out = ojson::array();
    for (std::size_t i = 0; i < std::min(k, sorted.size()); ++i) out.push_back({sorted[i].first, sorted[i].second});
    return out;
}

std::string degrees_text(const Graph& g, DegreeMode mode) {
    std::string out;
    for (const auto& [name, d] : degree_sequence(g, mode))
        if (d > 0) out += std::to_string(d) + "\n";
    return out;
}

void phase_network(const Context& ctx) {
    const auto& cfg = ctx.config;
    auto corpus = ctx.scoped(ctx.load_corpus());

    // mention network
    auto mentions = build_mention_graph(corpus);
    ReportSection ms{"mention_network", "graphs", section_config(cfg), {}, {}};
    ms.config["resolution"] = cfg.resolution;
    ms.summary["vertices"] = mentions.vertex_count();
    ms.summary["edges"] = mentions.edge_count();
    if (mentions.vertex_count() >= 2) ms.summary["density"] = density(mentions);
    if (mentions.vertex_count() >= 1) ms.summary["average_degree"] = average_degree(mentions);
    auto comps = components(mentions);
    ms.summary["components"] = comps.size();
    ms.summary["largest_component"] = comps.empty() ? 0 : comps.front();
    std::vector<std::pair<std::string, double>> indeg, outdeg, btw;
    std::size_t zero_in = 0, zero_out = 0;
    for (const auto& [n, d] : degree_sequence(mentions, DegreeMode::In)) {
        indeg.emplace_back(n, static_cast<double>(d));
        zero_in += d == 0;
    }
    for (const auto& [n, d] : degree_sequence(mentions, DegreeMode::Out)) {
        outdeg.emplace_back(n, static_cast<double>(d));
        zero_out += d == 0;
    }
    ms.summary["zero_in_degree"] = zero_in;
    ms.summary["zero_out_degree"] = zero_out;
    ms.summary["top_in_degree"] = top_k(indeg, 10);
    ms.summary["top_out_degree"] = top_k(outdeg, 10);
    auto b = betweenness(mentions);
    for (std::size_t v = 0; v < b.size(); ++v) btw.emplace_back(mentions.name(v), b[v]);
    ms.summary["top_betweenness"] = top_k(btw, 10);
    auto communities = detect_communities(mentions, cfg.resolution, ctx.seed_for("mention_communities"));
    ms.summary["communities"] = communities.community_count();
    ms.summary["modularity"] = communities.modularity;
    ms.artifacts.push_back({"edges.csv", export_edge_list_csv(mentions)});
    io::write_file(ctx.cache_dir() / "degrees_in.txt", degrees_text(mentions, DegreeMode::In));
    io::write_file(ctx.cache_dir() / "degrees_out.txt", degrees_text(mentions, DegreeMode::Out));

    // hashtag network and ego networks
    auto tags = build_hashtag_graph(corpus);
    ReportSection hs{"hashtag_network", "graphs", section_config(cfg), {}, {}};
    hs.config["egos"] = cfg.egos;
    hs.summary["vertices"] = tags.vertex_count();
    hs.summary["edges"] = tags.edge_count();
    if (tags.vertex_count() >= 2) hs.summary["density"] = density(tags);
    std::vector<std::pair<std::string, double>> tagdeg;
    for (const auto& [n, d] : degree_sequence(tags, DegreeMode::Total)) tagdeg.emplace_back(n, static_cast<double>(d));
    hs.summary["top_degree"] = top_k(tagdeg, 15);
    CategoryMap categories;
    if (cfg.categories) categories = load_category_map(*cfg.categories);
    ojson egos = ojson::object();
    for (const auto& ego_name : cfg.egos) {
        auto ego_key = text::casefold(ego_name);
        ojson e;
        try {
            auto full = ego_network(tags, ego_key);
            e["vertices"] = full.graph.vertex_count();
            e["edges"] = full.graph.edge_count();
            if (full.graph.vertex_count() >= 2) e["density"] = density(full.graph);
            if (cfg.categories) {
                auto filtered = ego_network(tags, ego_key, &categories, cfg.excluded_categories);
                e["filtered_vertices"] = filtered.graph.vertex_count();
                e["filtered_edges"] = filtered.graph.edge_count();
                if (filtered.graph.vertex_count() >= 2) e["filtered_density"] = density(filtered.graph);
                try {
                    ojson shares = ojson::object();
                    for (const auto& [cat, pct] : hashtag_category_shares(filtered))
                        shares[std::string(socialscope::to_string(cat))] = pct;
                    e["category_shares"] = shares;
                } catch (const ParameterError&) {
                    e["category_shares"] = nullptr;
                }
                auto comm = detect_communities(filtered.graph, cfg.resolution, ctx.seed_for("ego:" + ego_key));
                e["communities"] = comm.community_count();
                e["modularity"] = comm.modularity;
                auto file = "ego_" + ego_key.substr(ego_key.front() == '#' ? 1 : 0) + ".graphml";
                hs.artifacts.push_back({file, export_graphml(filtered.graph, &filtered.labels, &comm)});
            }
        } catch (const NotFoundError& ex) {
            e["error"] = ex.what();
        }
        egos[ego_key] = e;
    }
    hs.summary["egos"] = egos;
    hs.artifacts.push_back({"edges.csv", export_edge_list_csv(tags)});
    ctx.save_section(ms);
    ctx.save_section(hs);
}

void phase_streams(const Context& ctx) {
    const auto& cfg = ctx.config;
    auto corpus = ctx.scoped(ctx.load_corpus());
    ReportSection s{"streams", "streams", section_config(cfg), {}, {}};
    if (corpus.records.empty()) throw ParameterError("no records in the language scope");
    auto range = ctx.range_for(corpus);
    s.config["range"] = {{"start", format_date(range.start)}, {"end", format_date(range.end)}};
    std::vector<CompiledStream> streams;
    if (cfg.streams) streams = load_streams(*cfg.streams);
    auto series = track_streams(corpus, streams, range);
    ojson per = ojson::object();
    for (const auto& ns : series) {
        int peak = ns.series.peak_index();
        per[ns.name] = {{"total", ns.series.total()},
                        {"peak_day", ns.series.total() ? ojson(format_date(range.start + std::chrono::days(peak)))
                                                       : ojson(nullptr)},
                        {"peak_count", ns.series.total() ? ns.series.counts[static_cast<std::size_t>(peak)] : 0}};
    }
    s.summary["streams"] = per;
    s.artifacts.push_back({"streams_daily.csv", streams_csv(series)});

    ojson trajectories = ojson::object();
    for (const auto& key : cfg.trajectories) {
        auto t = retweet_trajectory(corpus, key);
        ojson j;
        j["origin_author"] = t.origin_author;
        j["retweets"] = t.total_retweets;
        j["spreaders"] = t.total_spreaders;
        j["mean_per_spreader"] = t.mean_per_spreader;
        j["max_spreader_share"] = t.max_spreader_share;
        j["by_follower_code"] = {{"retweets", t.totals}, {"spreaders", t.distinct_spreaders}};
        trajectories[key] = j;
        s.artifacts.push_back({"trajectory_" + key + ".csv", t.to_csv()});
    }
    s.summary["trajectories"] = trajectories;

    if (cfg.annotations) {
        const auto& a = *cfg.annotations;
        std::set<std::string> vocab(a.vocabulary.begin(), a.vocabulary.end());
        auto set = AnnotationSet::load(a.path, vocab);
        auto counts = join_annotations(corpus, set);
        ojson c = ojson::object();
        for (const auto& [label, n] : counts.counts) c[label] = n;
        s.summary["annotations"] = {{"counts", c}, {"matched", counts.matched}, {"unmatched", counts.unmatched_keys}};
        s.artifacts.push_back({"annotation_counts.csv", counts.to_csv()});
        const CompiledStream* scope = nullptr;
        for (const auto& st : streams)
            if (st.name() == a.stream) scope = &st;
        if (!a.stream.empty() && !scope) throw ConfigError("annotations.stream '" + a.stream + "' is not a defined stream");
        if (!a.rules.empty()) {
            auto suggestions = suggest_labels(corpus, a.rules, vocab, scope);
            s.summary["label_suggestions"] = suggestions.size();
            s.artifacts.push_back({"label_suggestions.csv", suggestions_csv(suggestions)});
        }
    }
    ctx.save_section(s);
}

void phase_bots(const Context& ctx) {
    const auto& cfg = ctx.config;
    auto corpus = ctx.scoped(ctx.load_corpus());
    ReportSection s{"bots", "botdetect", section_config(cfg), {}, {}};
    s.config["thresholds"] = {cfg.bots.thresholds.human_max, cfg.bots.thresholds.potential_max};
    s.config["provider"] = cfg.bots.provider;

    std::set<std::string> author_set;
    for (const auto& r : corpus.records) author_set.insert(r.author);
    std::vector<std::string> authors(author_set.begin(), author_set.end());

    std::unique_ptr<ScoreProvider> provider;
    std::optional<ScoreCache> cache;
    if (cfg.bots.provider == "http") {
        if (cfg.offline) throw ConfigError("http bot provider requested in offline mode");
        provider = std::make_unique<HttpScoreProvider>(cfg.bots.http);
        cache.emplace(ctx.cache_dir() / "bot_scores.csv");
    } else {
        provider = std::make_unique<LocalScoreProvider>(LocalScoreProvider::load(cfg.bots.scores));
    }
    auto scores = fetch_scores(authors, *provider, cache ? &*cache : nullptr, FetchOptions{cfg.bots.concurrency});
    auto counts = count_categories(scores, cfg.bots.thresholds);
    std::map<std::string, std::size_t> absences;
    for (const auto& sc : scores)
        if (sc.absence) ++absences[std::string(socialscope::to_string(*sc.absence))];
    s.summary["accounts"] = scores.size();
    s.summary["categories"] = {{"human", counts.human},
                               {"potential_bot", counts.potential_bot},
                               {"bot", counts.bot},
                               {"absent", counts.absent}};
    ojson abs = ojson::object();
    for (const auto& [k, v] : absences) abs[k] = v;
    s.summary["absences"] = abs;
    s.summary["absent_share"] = scores.empty() ? 0.0 : 100.0 * static_cast<double>(counts.absent) / scores.size();

    HeuristicRules rules = cfg.bots.heuristic;
    rules.window = ctx.range_for(corpus);
    auto flagged = heuristic_flagged(corpus, rules);
    auto profiles = activity_profiles(corpus);
    ojson flagged_json = ojson::array();
    for (const auto& name : flagged) {
        auto f = heuristic_flag(profiles.at(name), name, rules);
        ojson reasons = ojson::array();
        for (auto r : f.reasons) reasons.push_back(socialscope::to_string(r));
        flagged_json.push_back({{"username", name}, {"reasons", reasons}, {"tweets", profiles.at(name).tweets}});
    }
    s.summary["heuristic_flagged"] = flagged_json;

    std::set<std::string> scored_bots, scored_any;
    std::string categories_csv = csv::format_row({"username", "score", "category", "absence"});
    for (const auto& sc : scores) {
        std::string score, cat, absence;
        if (sc.score) {
            auto c = categorize_score(*sc.score, cfg.bots.thresholds);
            score = format_number(*sc.score);
            cat = socialscope::to_string(c);
            if (c == BotCategory::Bot) scored_bots.insert(sc.username);
            if (c != BotCategory::Human) scored_any.insert(sc.username);
        } else {
            absence = socialscope::to_string(*sc.absence);
        }
        categories_csv += csv::format_row({sc.username, score, cat, absence});
    }
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, ActivityShares>> methods = {
        {"heuristic", bot_activity_table(corpus, flagged, &warnings)},
        {"score_bot", bot_activity_table(corpus, scored_bots, &warnings)},
        {"score_potential_or_bot", bot_activity_table(corpus, scored_any, &warnings)},
    };
    ojson table = ojson::object();
    for (const auto& [name, sh] : methods)
        table[name] = {{"generated_content", sh.generated_content}, {"rt_received", sh.rt_received},
                       {"like_count", sh.like_count},               {"rt_generated", sh.rt_generated},
                       {"follower_share_A", sh.follower_share_a},   {"follower_share_B", sh.follower_share_b}};
    s.summary["activity"] = table;
    auto confusion = method_confusion(scores, flagged, cfg.bots.thresholds);
    s.summary["heuristic_vs_score"] = {{"flagged", confusion.counts[1]}, {"not_flagged", confusion.counts[0]}};
    s.artifacts.push_back({"activity_table.csv", activity_table_csv(methods)});
    s.artifacts.push_back({"confusion.csv", confusion.to_csv()});
    s.artifacts.push_back({"scores.csv", categories_csv});
    ctx.save_section(s);
}

void phase_fit(const Context& ctx) {
    const auto& cfg = ctx.config;
    ReportSection s{"tailfit", "tailfit", section_config(cfg), {}, {}};
    auto fams = ojson::array();
    for (auto f : cfg.tailfit.families) fams.push_back(socialscope::to_string(f));
    s.config["families"] = fams;
    s.config["n_sims"] = cfg.tailfit.n_sims;
    s.config["significance"] = cfg.tailfit.significance;
    s.config["pin_xmin"] = cfg.tailfit.pin_xmin;
    s.config["common_tail"] = socialscope::to_string(cfg.tailfit.common_tail);
    for (const char* kind : {"in", "out"}) {
        auto path = ctx.cache_dir() / (std::string("degrees_") + kind + ".txt");
        ctx.require(path, "network");
        auto sample = DegreeSample::parse(io::read_file(path));
        std::string key = std::string(kind) + "_degree";
        if (sample.size() < 2) {
            s.summary[key] = {{"n", sample.size()}, {"error", "fewer than two nonzero degrees"}};
            continue;
        }
        SelectConfig sc;
        sc.n_sims = cfg.tailfit.n_sims;
        sc.seed = ctx.seed_for(std::string("tailfit:") + kind);
        sc.significance = cfg.tailfit.significance;
        sc.pin_xmin = cfg.tailfit.pin_xmin;
        sc.common_tail = cfg.tailfit.common_tail;
        sc.workers = cfg.workers;
        ctx.log << "  fitting " << kind << "-degree sample (n=" << sample.size() << ", " << sc.n_sims << " sims)\n";
        auto report = select_best(sample, cfg.tailfit.families, sc);
        auto j = report.to_json();
        j["n"] = sample.size();
        s.summary[key] = j;
        s.artifacts.push_back({key + "_ccdf.csv", report.ccdf_csv(sample)});
    }
    ctx.save_section(s);
}

void phase_report(const Context& ctx) {
    ReportBundle bundle;
    bundle.config = ctx.config.to_json();
    bundle.seeds["run"] = ctx.config.seed;
    bundle.seeds["mention_communities"] = ctx.seed_for("mention_communities");
    bundle.seeds["tailfit_in"] = ctx.seed_for("tailfit:in");
    bundle.seeds["tailfit_out"] = ctx.seed_for("tailfit:out");
    std::vector<std::string> missing;
    for (const auto& name : section_names()) {
        auto p = ctx.section_cache(name);
        if (!fs::exists(p)) {
            missing.push_back(name);
            continue;
        }
        bundle.sections.push_back(ReportSection::from_json(ojson::parse(io::read_file(p))));
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        ctx.log << "  report is missing sections: " << list << "\n";
    }
    emit_report(bundle, ctx.config.out / "report");
    ctx.log << "  wrote " << bundle.sections.size() << " sections to " << (ctx.config.out / "report").string() << "\n";
}

}  // namespace

RunResult run_phases(const RunConfig& config, const std::set<Phase>& phases, std::ostream& log) {
    RunResult result;
    Context ctx{config, log};
    if (config.seed_defaulted) log << "no seed configured; using seed " << config.seed << "\n";
    io::write_file(config.out / "config.resolved.json", config.to_json().dump(2) + "\n");
    auto failed_marker = config.out / "FAILED.json";
    std::error_code ec;
    fs::remove(failed_marker, ec);
    for (auto phase : kPhaseOrder) {
        if (!phases.count(phase)) continue;
        log << "[" << to_string(phase) << "]\n";
        try {
            switch (phase) {
                case Phase::Ingest: phase_ingest(ctx); break;
                case Phase::Sentiment: phase_sentiment(ctx); break;
                case Phase::Network: phase_network(ctx); break;
                case Phase::Streams: phase_streams(ctx); break;
                case Phase::Bots: phase_bots(ctx); break;
                case Phase::Fit: phase_fit(ctx); break;
                case Phase::Report: phase_report(ctx); break;
            }
            result.completed.push_back(phase);
        } catch (const std::exception& e) {
            result.failed = phase;
            result.error = e.what();
            result.exit_code = dynamic_cast<const ConfigError*>(&e) ? 2 : 1;
            ojson marker = {{"phase", to_string(phase)}, {"error", e.what()}};
            auto done = ojson::array();
            for (auto p : result.completed) done.push_back(to_string(p));
            marker["completed"] = done;
            io::write_file(failed_marker, marker.dump(2) + "\n");
            log << "error in " << to_string(phase) << " phase: " << e.what() << "\n";
            return result;
        }
    }
    return result;
}

}  // namespace socialscope
