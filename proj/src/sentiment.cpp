#include "socialscope/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/text.hpp"

namespace socialscope {

std::string_view to_string(PolarityCategory c) {
    switch (c) {
        case PolarityCategory::Positive: return "positive";
        case PolarityCategory::Negative: return "negative";
        case PolarityCategory::Neutral: return "neutral";
        case PolarityCategory::Overlap: return "overlap";
    }
    return "neutral";
}

EmotionVector& EmotionVector::operator+=(const EmotionVector& o) {
    for (std::size_t i = 0; i < kEmotionCount; ++i) counts[i] += o.counts[i];
    return *this;
}

std::uint64_t EmotionVector::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

// ---------------------------------------------------------------------------
// Lexicon

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        cols.emplace_back(text::trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cols;
}

int parse_int(const std::string& s, std::size_t lineno) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(lineno) + ": '" + s + "' is not an integer");
    }
}

bool valid_strength(int s) { return (s >= 2 && s <= 5) || (s <= -2 && s >= -5); }

}  // namespace

void SentimentLexicon::add_term(std::string term, int strength) {
    if (!valid_strength(strength))
        throw ConfigError("term '" + term + "' strength " + std::to_string(strength) + " outside [-5,-2] U [2,5]");
    term = text::casefold(term);
    if (term.empty() || term == "*") throw ConfigError("empty lexicon term");
    if (term.back() == '*') {
        term.pop_back();
        auto it = std::find_if(stems_.begin(), stems_.end(), [&](const auto& p) { return p.first == term; });
        if (it != stems_.end())
            it->second = strength;
        else
            stems_.emplace_back(std::move(term), strength);
        std::stable_sort(stems_.begin(), stems_.end(),
                         [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    } else {
        exact_[std::move(term)] = strength;
    }
}

void SentimentLexicon::add_booster(std::string term, int delta) {
    if (delta != 1 && delta != -1) throw ConfigError("booster '" + term + "' must be +1 or -1");
    boosters_[text::casefold(term)] = delta;
}

void SentimentLexicon::add_negator(std::string term) { negators_.insert(text::casefold(term)); }

void SentimentLexicon::add_emoticon(std::string emoticon, int strength) {
    if (!valid_strength(strength))
        throw ConfigError("emoticon '" + emoticon + "' strength outside [-5,-2] U [2,5]");
    emoticons_[std::move(emoticon)] = strength;
}

std::optional<int> SentimentLexicon::term_strength(std::string_view token) const {
    if (auto it = exact_.find(token); it != exact_.end()) return it->second;
    for (const auto& [stem, strength] : stems_)
        if (token.size() >= stem.size() && token.substr(0, stem.size()) == stem) return strength;
    return std::nullopt;
}

std::optional<int> SentimentLexicon::booster(std::string_view token) const {
    if (auto it = boosters_.find(token); it != boosters_.end()) return it->second;
    return std::nullopt;
}

bool SentimentLexicon::is_negator(std::string_view token) const { return negators_.find(token) != negators_.end(); }

std::optional<int> SentimentLexicon::emoticon(std::string_view chunk) const {
    if (auto it = emoticons_.find(chunk); it != emoticons_.end()) return it->second;
    return std::nullopt;
}

SentimentLexicon SentimentLexicon::parse(std::string_view content) {
    SentimentLexicon lex;
    enum class Section { Terms, Boosters, Negators, Emoticons } section = Section::Terms;
    std::istringstream in{std::string(content)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t.front() == '[') {
            if (t == "[terms]") section = Section::Terms;
            else if (t == "[boosters]") section = Section::Boosters;
            else if (t == "[negators]") section = Section::Negators;
            else if (t == "[emoticons]") section = Section::Emoticons;
            else throw ConfigError("line " + std::to_string(lineno) + ": unknown section " + std::string(t));
            continue;
        }
        auto cols = split_tabs(t);
        if (section == Section::Negators) {
            lex.add_negator(cols[0]);
            continue;
        }
        if (cols.size() != 2) throw ConfigError("line " + std::to_string(lineno) + ": expected two tab-separated columns");
        int v = parse_int(cols[1], lineno);
        switch (section) {
            case Section::Terms: lex.add_term(cols[0], v); break;
            case Section::Boosters: lex.add_booster(cols[0], v); break;
            case Section::Emoticons: lex.add_emoticon(cols[0], v); break;
            case Section::Negators: break;
        }
    }
    return lex;
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

// ---------------------------------------------------------------------------
// Tokenizer

std::vector<Sentence> tokenize(std::string_view input, const SentimentLexicon* lexicon) {
    std::vector<Sentence> sentences(1);
    auto end_sentence = [&] {
        if (!sentences.back().empty()) sentences.emplace_back();
    };
    std::size_t i = 0;
    while (i < input.size()) {
        while (i < input.size() && std::isspace(static_cast<unsigned char>(input[i]))) ++i;
        std::size_t j = i;
        while (j < input.size() && !std::isspace(static_cast<unsigned char>(input[j]))) ++j;
        std::string_view chunk = input.substr(i, j - i);
        i = j;
        if (chunk.empty()) continue;
        if (lexicon) {
            if (auto s = lexicon->emoticon(chunk)) {
                sentences.back().push_back({std::string(chunk), s});
                continue;
            }
        }
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) sentences.back().push_back({text::casefold(cur), std::nullopt});
            cur.clear();
        };
        for (std::size_t k = 0; k < chunk.size(); ++k) {
            auto c = static_cast<unsigned char>(chunk[k]);
            if (text::is_word_byte(c) || (c == '\'' && !cur.empty())) {
                cur.push_back(static_cast<char>(c));
            } else {
                flush();
                if (c == '.' || c == '!' || c == '?') end_sentence();
            }
        }
        flush();
    }
    if (sentences.size() > 1 && sentences.back().empty()) sentences.pop_back();
    if (sentences.size() == 1 && sentences.front().empty()) sentences.clear();
    return sentences;
}

// ---------------------------------------------------------------------------
// Polarity

namespace {

bool has_letter_run(std::string_view token) {
    int run = 1;
    for (std::size_t k = 1; k < token.size(); ++k) {
        bool letter = std::isalpha(static_cast<unsigned char>(token[k])) != 0;
        run = (letter && token[k] == token[k - 1]) ? run + 1 : 1;
        if (run >= 3) return true;
    }
    return false;
}

// Shortens runs of three or more identical letters to `keep` letters.
std::string collapse_runs(std::string_view token, int keep) {
    std::string out;
    for (std::size_t k = 0; k < token.size();) {
        std::size_t e = k;
        while (e < token.size() && token[e] == token[k]) ++e;
        std::size_t len = e - k;
        bool letter = std::isalpha(static_cast<unsigned char>(token[k])) != 0;
        out.append(letter && len >= 3 ? static_cast<std::size_t>(keep) : len, token[k]);
        k = e;
    }
    return out;
}

struct TermHit {
    int strength;
    bool emphasised;
};

std::optional<TermHit> lookup(const Token& tok, const SentimentLexicon& lex) {
    if (tok.emoticon_strength) return TermHit{*tok.emoticon_strength, false};
    if (auto s = lex.term_strength(tok.text)) return TermHit{*s, has_letter_run(tok.text)};
    if (!has_letter_run(tok.text)) return std::nullopt;
    for (int keep : {2, 1})
        if (auto s = lex.term_strength(collapse_runs(tok.text, keep))) return TermHit{*s, true};
    return std::nullopt;
}

}  // namespace

SentimentScore score_polarity(std::string_view input, const SentimentLexicon& lexicon, const ScoringOptions& options) {
    SentimentScore score;
    for (const auto& sentence : tokenize(input, &lexicon)) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            auto hit = lookup(sentence[i], lexicon);
            if (!hit) continue;
            int magnitude = std::abs(hit->strength);
            bool positive = hit->strength > 0;
            if (i > 0 && !sentence[i - 1].emoticon_strength)
                if (auto b = lexicon.booster(sentence[i - 1].text)) magnitude += *b;
            if (options.emphasis_rule && hit->emphasised) magnitude += 1;
            magnitude = std::clamp(magnitude, 2, 5);

            bool negated = false;
            for (int back = 1; back <= options.negation_window && back <= static_cast<int>(i); ++back)
                negated = negated || lexicon.is_negator(sentence[i - static_cast<std::size_t>(back)].text);
            if (negated) {
                if (!positive) continue;  // negated negative term carries no evidence
                positive = false;
                magnitude = std::max(2, magnitude - 1);
            }
            if (positive)
                score.positive = std::max(score.positive, magnitude);
            else
                score.negative = std::min(score.negative, -magnitude);
        }
    }
    return score;
}

PolarityCategory categorize_polarity(SentimentScore s) {
    if (s.positive < 1 || s.positive > 5 || s.negative > -1 || s.negative < -5)
        throw ParameterError("sentiment score (" + std::to_string(s.positive) + "," + std::to_string(s.negative) +
                             ") outside the dual scale");
    bool pos = s.positive >= 2, neg = s.negative <= -2;
    if (pos && neg) return PolarityCategory::Overlap;
    if (pos) return PolarityCategory::Positive;
    if (neg) return PolarityCategory::Negative;
    return PolarityCategory::Neutral;
}

// ---------------------------------------------------------------------------
// Emotions

void EmotionLexicon::add(std::string word, std::bitset<kEmotionCount> emotions, bool positive, bool negative) {
    auto& e = entries_[text::casefold(word)];
    e.emotions |= emotions;
    e.positive = e.positive || positive;
    e.negative = e.negative || negative;
}

const EmotionLexicon::Entry* EmotionLexicon::find(std::string_view word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
}

EmotionLexicon EmotionLexicon::parse(std::string_view content) {
    EmotionLexicon lex;
    std::istringstream in{std::string(content)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto cols = split_tabs(t);
        if (cols.size() != 3) throw ConfigError("line " + std::to_string(lineno) + ": expected word, label, flag");
        int flag = parse_int(cols[2], lineno);
        if (flag != 0 && flag != 1) throw ConfigError("line " + std::to_string(lineno) + ": flag must be 0 or 1");
        std::bitset<kEmotionCount> bits;
        bool pos = false, neg = false;
        if (cols[1] == "positive") {
            pos = flag == 1;
        } else if (cols[1] == "negative") {
            neg = flag == 1;
        } else {
            auto it = std::find(kEmotionNames.begin(), kEmotionNames.end(), cols[1]);
            if (it == kEmotionNames.end())
                throw ConfigError("line " + std::to_string(lineno) + ": unknown affect label '" + cols[1] + "'");
            if (flag == 1) bits.set(static_cast<std::size_t>(it - kEmotionNames.begin()));
        }
        lex.add(cols[0], bits, pos, neg);
    }
    return lex;
}

EmotionLexicon EmotionLexicon::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

EmotionVector emotion_vector(std::string_view input, const EmotionLexicon& lexicon) {
    EmotionVector v;
    for (const auto& sentence : tokenize(input))
        for (const auto& tok : sentence)
            if (const auto* e = lexicon.find(tok.text))
                for (std::size_t k = 0; k < kEmotionCount; ++k)
                    if (e->emotions.test(k)) ++v.counts[k];
    return v;
}

// ---------------------------------------------------------------------------
// Corpus scoring

MessageSentiment analyze(const MessageRecord& record, const LexiconBundle& lexicons) {
    MessageSentiment out;
    auto pol = lexicons.polarity.find(record.language);
    auto emo = lexicons.emotion.find(record.language);
    if (pol == lexicons.polarity.end() && emo == lexicons.emotion.end()) {
        out.unsupported_language = true;
        return out;
    }
    if (pol != lexicons.polarity.end()) out.score = score_polarity(record.text, pol->second, lexicons.options);
    out.category = categorize_polarity(out.score);
    if (emo != lexicons.emotion.end()) out.emotions = emotion_vector(record.text, emo->second);
    return out;
}

std::vector<MessageSentiment> analyze_corpus(const Corpus& corpus, const LexiconBundle& lexicons) {
    std::vector<MessageSentiment> out;
    out.reserve(corpus.records.size());
    for (const auto& r : corpus.records) out.push_back(analyze(r, lexicons));
    return out;
}

TargetMatcher::TargetMatcher(std::vector<Target> targets) {
    for (auto& t : targets) {
        if (t.patterns.empty()) throw ConfigError("target '" + t.name + "' has no patterns");
        std::vector<std::regex> compiled;
        for (const auto& p : t.patterns) {
            try {
                compiled.emplace_back(p, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
            } catch (const std::regex_error& e) {
                throw ConfigError("target '" + t.name + "': pattern '" + p + "' does not compile: " + e.what());
            }
        }
        names_.push_back(t.name);
        patterns_.push_back(std::move(compiled));
    }
}

bool TargetMatcher::matches(std::string_view target, std::string_view msg) const {
    auto it = std::find(names_.begin(), names_.end(), target);
    if (it == names_.end()) throw NotFoundError("unknown target '" + std::string(target) + "'");
    for (const auto& re : patterns_[static_cast<std::size_t>(it - names_.begin())])
        if (std::regex_search(msg.begin(), msg.end(), re)) return true;
    return false;
}

std::vector<std::string> TargetMatcher::matching_targets(std::string_view msg) const {
    std::vector<std::string> hits;
    for (const auto& name : names_)
        if (matches(name, msg)) hits.push_back(name);
    return hits;
}

std::vector<TargetedScore> sentiment_toward(const Corpus& corpus, const TargetMatcher& targets,
                                            std::string_view target, const LexiconBundle& lexicons) {
    std::vector<TargetedScore> out;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const auto& r = corpus.records[i];
        if (!targets.matches(target, r.text)) continue;
        auto all = targets.matching_targets(r.text);
        auto s = analyze(r, lexicons);
        out.push_back({record_key(r), i, std::string(target), s.score, s.category, all.size() > 1});
    }
    return out;
}

}  // namespace socialscope
