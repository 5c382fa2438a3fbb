#include <array>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/random.hpp"
#include "socialscope/sentiment.hpp"

using namespace socialscope;
using fixtures::rec;

namespace {

SentimentLexicon small_lexicon() {
    return SentimentLexicon::parse(
        "[terms]\n"
        "great\t3\n"
        "good\t2\n"
        "awful\t-4\n"
        "bad\t-2\n"
        "lov*\t3\n"
        "lovely\t2\n"
        "[boosters]\n"
        "very\t1\n"
        "slightly\t-1\n"
        "[negators]\n"
        "not\n"
        "never\n"
        "[emoticons]\n"
        ":)\t2\n"
        ":(\t-2\n");
}

ScoringOptions no_emphasis() {
    ScoringOptions o;
    o.emphasis_rule = false;
    return o;
}

}  // namespace

TEST_CASE("score_polarity rule traces") {
    auto lex = small_lexicon();
    CHECK(score_polarity("nothing to see here", lex) == SentimentScore{1, -1});
    CHECK(score_polarity("great great day", lex, no_emphasis()) == SentimentScore{3, -1});
    CHECK(score_polarity("not great", lex) == SentimentScore{1, -2});
    // negation reaches two tokens back, not three
    CHECK(score_polarity("not so great", lex) == SentimentScore{1, -2});
    CHECK(score_polarity("not so very great", lex) == SentimentScore{4, -1});
    // negated negative term carries no evidence
    CHECK(score_polarity("not bad", lex) == SentimentScore{1, -1});
    // boosters adjust by one and clamp to [2, 5]
    CHECK(score_polarity("very great", lex) == SentimentScore{4, -1});
    CHECK(score_polarity("slightly good", lex) == SentimentScore{2, -1});
    CHECK(score_polarity("very awful", lex) == SentimentScore{1, -5});
    // emphasis by repeated letters
    CHECK(score_polarity("greaaat", lex) == SentimentScore{4, -1});
    CHECK(score_polarity("greaaat", lex, no_emphasis()) == SentimentScore{3, -1});
    // stems, with exact entries winning
    CHECK(score_polarity("loving it", lex) == SentimentScore{3, -1});
    CHECK(score_polarity("lovely", lex) == SentimentScore{2, -1});
    // emoticons stay intact
    CHECK(score_polarity("ok :(", lex) == SentimentScore{1, -2});
    // sentence maxima combine componentwise
    CHECK(score_polarity("Great day. Awful night!", lex) == SentimentScore{3, -4});
    CHECK(score_polarity("GREAT", lex) == SentimentScore{3, -1});
}

TEST_CASE("categorize_polarity matches the full decision table") {
    // rows: positive 1..5, columns: negative -1..-5
    const char* table[5][5] = {
        {"neutral", "negative", "negative", "negative", "negative"},
        {"positive", "overlap", "overlap", "overlap", "overlap"},
        {"positive", "overlap", "overlap", "overlap", "overlap"},
        {"positive", "overlap", "overlap", "overlap", "overlap"},
        {"positive", "overlap", "overlap", "overlap", "overlap"},
    };
    int checked = 0;
    for (int p = 1; p <= 5; ++p)
        for (int n = -1; n >= -5; --n) {
            CHECK(to_string(categorize_polarity({p, n})) == table[p - 1][-n - 1]);
            ++checked;
        }
    CHECK(checked == 25);
    CHECK(categorize_polarity({4, -1}) == PolarityCategory::Positive);
    CHECK(categorize_polarity({3, -4}) == PolarityCategory::Overlap);
    CHECK_THROWS_AS(categorize_polarity({0, -1}), ParameterError);
    CHECK_THROWS_AS(categorize_polarity({1, 0}), ParameterError);
    CHECK_THROWS_AS(categorize_polarity({6, -1}), ParameterError);
}

TEST_CASE("lexicon validation") {
    CHECK_THROWS_AS(SentimentLexicon::parse("good\t7\n"), ConfigError);
    CHECK_THROWS_AS(SentimentLexicon::parse("good\t1\n"), ConfigError);
    CHECK_THROWS_AS(SentimentLexicon::parse("[weird]\n"), ConfigError);
    CHECK_THROWS_AS(SentimentLexicon::parse("[boosters]\nvery\t2\n"), ConfigError);
    CHECK_THROWS_AS(EmotionLexicon::parse("word\tglee\t1\n"), ConfigError);
    CHECK_THROWS_AS(EmotionLexicon::parse("word\tjoy\t2\n"), ConfigError);
}

TEST_CASE("shipped lexicons load") {
    for (const char* lang : {"de", "en"}) {
        std::string dir = SOCIALSCOPE_DATA_DIR;
        auto s = SentimentLexicon::load(dir + "/lexicons/sentiment_" + lang + ".tsv");
        auto e = EmotionLexicon::load(dir + "/lexicons/emotion_" + lang + ".tsv");
        CHECK(e.size() > 20);
        CHECK(s.is_negator(std::string(lang) == "de" ? "nicht" : "not"));
    }
}

TEST_CASE("emotion_vector counts tokens") {
    auto lex = EmotionLexicon::parse(
        "abandon\tfear\t1\nabandon\tsadness\t1\nabandon\tjoy\t0\n"
        "happy\tjoy\t1\nsmile\tjoy\t1\ntrust\ttrust\t1\nhappy\tpositive\t1\n");
    CHECK(emotion_vector("", lex) == EmotionVector{});
    auto v = emotion_vector("abandon abandon", lex);
    CHECK(v[Emotion::fear] == 2);
    CHECK(v[Emotion::sadness] == 2);
    CHECK(v.total() == 4);
    auto w = emotion_vector("Happy people smile, happy days; we trust you.", lex);
    CHECK(w[Emotion::joy] == 3);
    CHECK(w[Emotion::trust] == 1);
    CHECK(w.total() == 4);
}

TEST_CASE("emotion vectors equal a lexicon-scan oracle on 200 messages") {
    // vocabulary with known labels; the generator's bookkeeping is the oracle
    std::vector<std::pair<std::string, std::vector<Emotion>>> vocab = {
        {"angst", {Emotion::fear}},
        {"wut", {Emotion::anger}},
        {"freude", {Emotion::joy}},
        {"vertrauen", {Emotion::trust}},
        {"ekel", {Emotion::disgust, Emotion::anger}},
        {"trauer", {Emotion::sadness}},
        {"überraschung", {Emotion::surprise, Emotion::anticipation}},
        {"hoffnung", {Emotion::anticipation, Emotion::joy, Emotion::trust}},
    };
    std::string content;
    for (const auto& [w, labels] : vocab)
        for (std::size_t k = 0; k < kEmotionCount; ++k) {
            bool on = false;
            for (auto e : labels) on = on || static_cast<std::size_t>(e) == k;
            content += w + "\t" + std::string(kEmotionNames[k]) + "\t" + (on ? "1" : "0") + "\n";
        }
    auto lex = EmotionLexicon::parse(content);
    std::vector<std::string> filler = {"die", "wahl", "heute", "und", "morgen", "#bpw16", "@orf", "2016", "x"};
    std::vector<std::string> punct = {" ", " ", ", ", "! ", ". ", "? ", " - "};
    Rng rng(17);
    for (int m = 0; m < 200; ++m) {
        std::string msg;
        std::array<std::uint32_t, kEmotionCount> expected{};
        int words = 1 + static_cast<int>(rng.below(15));
        for (int k = 0; k < words; ++k) {
            if (rng.uniform() < 0.4) {
                const auto& [w, labels] = vocab[rng.below(vocab.size())];
                std::string surface = w;
                if (rng.uniform() < 0.3) surface[0] = static_cast<char>(std::toupper(surface[0]));
                msg += surface;
                for (auto e : labels) ++expected[static_cast<std::size_t>(e)];
            } else {
                msg += filler[rng.below(filler.size())];
            }
            msg += punct[rng.below(punct.size())];
        }
        CHECK_MESSAGE(emotion_vector(msg, lex).counts == expected, msg);
    }
}

TEST_CASE("additivity and monotonicity over 1000 random texts") {
    auto pol = small_lexicon();
    auto emo = EmotionLexicon::parse("great\tjoy\t1\nawful\tfear\t1\nawful\tanger\t1\nday\tanticipation\t1\n");
    std::vector<std::string> words = {"great", "good", "awful", "bad", "very", "not", "day", "the", "vote",
                                      "lovely", "loving", "slightly", "never", ":)", ":(", "gooood", "."};
    Rng rng(99);
    auto random_text = [&] {
        std::string s;
        int n = static_cast<int>(rng.below(10));
        for (int k = 0; k < n; ++k) s += (k ? " " : "") + words[rng.below(words.size())];
        return s;
    };
    for (int i = 0; i < 1000; ++i) {
        auto a = random_text(), b = random_text();
        auto sum = emotion_vector(a, emo);
        sum += emotion_vector(b, emo);
        CHECK(emotion_vector(a + " " + b, emo) == sum);

        // appending a positive term never lowers the positive score, and a negative
        // term never raises the negative score
        auto base = score_polarity(a, pol);
        auto plus = score_polarity(a + " great", pol);
        auto minus = score_polarity(a + " awful", pol);
        CHECK(plus.positive >= base.positive);
        CHECK(minus.negative <= base.negative);
        CHECK(score_polarity(a, pol) == base);
    }
}

TEST_CASE("analyze flags unsupported languages") {
    LexiconBundle b;
    b.polarity.emplace(Language::en, small_lexicon());
    auto r = analyze(rec("a", "2016-12-01T00:00:00Z", "great", 0, 0, 0, Language::de), b);
    CHECK(r.unsupported_language);
    CHECK(r.score == SentimentScore{1, -1});
    auto e = analyze(rec("a", "2016-12-01T00:00:00Z", "great", 0, 0, 0, Language::en), b);
    CHECK_FALSE(e.unsupported_language);
    CHECK(e.category == PolarityCategory::Positive);
}

TEST_CASE("sentiment_toward scores exactly the matching records") {
    LexiconBundle b;
    b.polarity.emplace(Language::en, small_lexicon());
    TargetMatcher m({{"vdb", {"van der bellen", "#vdb\\b", "@vanderbellen"}}, {"hofer", {"hofer"}}});
    Corpus c;
    std::vector<std::string> texts = {"Van der Bellen is great", "nothing here", "#VdB awful", "@vanderbellen good",
                                      "hofer bad",               "#vdbx no",     "weather",    "Hofer and Van der Bellen",
                                      "nope",                    "#vdb!"};
    for (std::size_t i = 0; i < texts.size(); ++i)
        c.records.push_back(rec("u", "2016-12-01T00:00:0" + std::to_string(i) + "Z", texts[i], 0, 0, 0, Language::en));
    std::vector<std::size_t> oracle;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::string low = texts[i];
        for (auto& ch : low) ch = static_cast<char>(std::tolower(ch));
        bool hit = low.find("van der bellen") != std::string::npos || low.find("@vanderbellen") != std::string::npos ||
                   (low.find("#vdb") != std::string::npos && low.find("#vdbx") == std::string::npos);
        if (hit) oracle.push_back(i);
    }
    auto scores = sentiment_toward(c, m, "vdb", b);
    REQUIRE(scores.size() == oracle.size());
    CHECK(scores.size() == 5);
    for (std::size_t k = 0; k < scores.size(); ++k) CHECK(scores[k].record_index == oracle[k]);
    std::size_t ambiguous = 0;
    for (const auto& s : scores) ambiguous += s.ambiguous;
    CHECK(ambiguous == 1);
    CHECK(sentiment_toward(Corpus{}, m, "vdb", b).empty());
    CHECK_THROWS_AS(TargetMatcher(std::vector<Target>{Target{"x", {"("}}}), ConfigError);
    CHECK_THROWS_AS(TargetMatcher(std::vector<Target>{Target{"x", {}}}), ConfigError);
}

TEST_CASE("corpus emotion totals are the sum of record vectors") {
    LexiconBundle b;
    b.emotion.emplace(Language::de, EmotionLexicon::parse("angst\tfear\t1\nfreude\tjoy\t1\n"));
    Corpus c;
    c.records = {rec("a", "2016-12-01T00:00:00Z", "Angst und Freude"), rec("b", "2016-12-01T00:00:01Z", "angst angst")};
    EmotionVector total;
    for (const auto& s : analyze_corpus(c, b)) total += s.emotions;
    CHECK(total[Emotion::fear] == 3);
    CHECK(total[Emotion::joy] == 1);
}
