#include <algorithm>
#include <regex>

#include "doctest.h"
#include "fixtures.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/random.hpp"
#include "socialscope/streams.hpp"

using namespace socialscope;
using fixtures::rec;
using fixtures::with_code;
using fixtures::with_id;

namespace {

std::string stamp(int day, int minute) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "2016-12-%02dT%02d:%02d:00Z", day, minute / 60 % 24, minute % 60);
    return buf;
}

}  // namespace

TEST_CASE("stream definitions") {
    auto s = parse_streams(R"([{"name":"spy","patterns":["spion","james bond"],"lang":"any"},
                                {"name":"cancer","patterns":["krebs"],"lang":"de"}])");
    REQUIRE(s.size() == 2);
    CHECK_FALSE(s[0].definition().language);
    CHECK(s[1].definition().language == Language::de);
    CHECK_THROWS_AS(parse_streams(R"([{"name":"a","patterns":["x"]},{"name":"a","patterns":["y"]}])"), ConfigError);
    CHECK_THROWS_AS(parse_streams(R"([{"name":"a","patterns":["("]}])"), ConfigError);
    CHECK_THROWS_AS(parse_streams(R"([{"name":"a","patterns":[]}])"), ConfigError);
    CHECK_THROWS_AS(parse_streams(R"([{"name":"","patterns":["x"]}])"), ConfigError);
    CHECK_THROWS_AS(parse_streams(R"([{"name":"a","patterns":["x"],"lang":"fr"}])"), ConfigError);
    CHECK_THROWS_AS(parse_streams("{"), ConfigError);
}

TEST_CASE("track_stream counts each record once per day") {
    auto streams = parse_streams(R"([{"name":"spy","patterns":["spion","james\\s+bond","#spy"],"lang":"any"},
                                     {"name":"de_only","patterns":["spion"],"lang":"de"}])");
    std::vector<std::string> texts = {"Ein Spion!", "james  bond and a spion", "#SPY", "nothing", "spionage",
                                      "James Bond", "#spyware", "bond"};
    Corpus c;
    Rng rng(6);
    std::vector<std::uint64_t> want(10, 0), want_de(10, 0);
    for (int i = 0; i < 600; ++i) {
        int day = 1 + static_cast<int>(rng.below(10));
        const auto& t = texts[rng.below(texts.size())];
        auto lang = rng.uniform() < 0.5 ? Language::de : Language::en;
        c.records.push_back(rec("u" + std::to_string(i), stamp(day, i), t, 0, 0, 0, lang));
        std::string low = t;
        std::transform(low.begin(), low.end(), low.begin(), ::tolower);
        bool hit = low.find("spion") != std::string::npos || low.find("james") != std::string::npos ||
                   low.find("#spy") != std::string::npos;
        want[day - 1] += hit;
        want_de[day - 1] += lang == Language::de && low.find("spion") != std::string::npos;
    }
    auto range = DateRange::parse("2016-12-01", "2016-12-10");
    auto series = track_stream(c, streams[0], range);
    CHECK(series.counts == want);
    CHECK(track_stream(c, streams[1], range).counts == want_de);
    auto both = track_streams(c, streams, range);
    CHECK(both.size() == 2);
    CHECK(both[0].name == "spy");
    CHECK(streams_csv(both).rfind("date,spy,de_only\n", 0) == 0);
    // markers outside the range are rejected
    CHECK_THROWS_AS(track_stream(c, streams[0], range, {{*parse_date("2017-01-01"), "x"}}), ParameterError);
}

TEST_CASE("trajectory of a planted video") {
    Corpus c;
    auto origin = with_id(rec("origin", stamp(1, 0), "Watch this video https://t.co/x"), "v1");
    c.records.push_back(origin);
    c.records.push_back(rec("other", stamp(1, 5), "unrelated"));
    std::vector<int> per_spreader = {3, 3, 12, 4, 4, 4, 4, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3};
    std::array<std::uint64_t, 4> by_code{};
    int minute = 10;
    for (std::size_t s = 0; s < per_spreader.size(); ++s) {
        auto code = s < 2 ? FollowerCode::CandidateB : FollowerCode::CandidateA;
        for (int k = 0; k < per_spreader[s]; ++k) {
            int day = 1 + (minute / 200);
            c.records.push_back(with_code(rec("fan" + std::to_string(s), stamp(day, minute % 1440),
                                              "RT @origin: Watch  this video https://t.co/x"),
                                          code));
            ++by_code[static_cast<int>(code)];
            minute += 7;
        }
    }
    auto t = retweet_trajectory(c, "v1");
    CHECK(t.origin_author == "origin");
    CHECK(t.total_retweets == 68);
    CHECK(t.total_spreaders == 18);
    CHECK(t.mean_per_spreader == doctest::Approx(3.78).epsilon(0.002));
    CHECK(t.max_spreader_share == doctest::Approx(17.65).epsilon(0.001));
    CHECK(t.top_spreader == "fan2");
    CHECK(t.top_spreader_count == 12);
    for (int code = 0; code < 4; ++code) {
        CHECK(t.totals[code] == by_code[code]);
        REQUIRE_FALSE(t.cumulative[code].empty());
        CHECK(t.cumulative[code].back() == by_code[code]);
        CHECK(std::is_sorted(t.cumulative[code].begin(), t.cumulative[code].end()));
    }
    CHECK(t.distinct_spreaders[static_cast<int>(FollowerCode::CandidateB)] == 2);
    CHECK(t.to_csv().rfind("date,code,cumulative\n", 0) == 0);
    // the content key finds the same family
    CHECK(retweet_trajectory(c, content_key(origin)).total_retweets == 68);
    CHECK_THROWS_AS(retweet_trajectory(c, "nope"), NotFoundError);

    Corpus lonely;
    lonely.records.push_back(with_id(rec("solo", stamp(1, 0), "just me"), "s1"));
    auto l = retweet_trajectory(lonely, "s1");
    CHECK(l.total_retweets == 0);
    CHECK(l.mean_per_spreader == 0.0);
}

TEST_CASE("annotation join reproduces the label table") {
    std::set<std::string> vocab = {"seek", "annoy", "threat", "sarcasm", "amuse"};
    std::vector<std::pair<std::string, int>> planted = {
        {"seek", 53}, {"annoy", 13}, {"threat", 23}, {"sarcasm", 36}, {"amuse", 10}};
    std::vector<std::string> labels;
    for (const auto& [l, n] : planted) labels.insert(labels.end(), n, l);
    Rng rng(12);
    for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

    Corpus c;
    std::string csv = "message_key,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto id = "m" + std::to_string(i);
        c.records.push_back(with_id(rec("u", stamp(1, static_cast<int>(i)), "spion " + id), id));
        csv += id + "," + labels[i] + "\n";
    }
    csv += "missing1,seek\n";
    auto set = AnnotationSet::parse(csv, vocab);
    auto counts = join_annotations(c, set);
    for (const auto& [l, n] : planted) CHECK(counts.counts.at(l) == static_cast<std::uint64_t>(n));
    CHECK(counts.matched == 135);
    CHECK(counts.unmatched_keys == std::vector<std::string>{"missing1"});
    CHECK(counts.to_csv().find("sarcasm,36") != std::string::npos);

    CHECK_THROWS_AS(AnnotationSet::parse("a,joy\n", vocab), ConfigError);
    CHECK_THROWS_AS(AnnotationSet::parse("a,seek\n", {}), ConfigError);
    CHECK_THROWS_AS(AnnotationSet::parse("a,seek\na,amuse\n", vocab), ConfigError);
    CHECK_NOTHROW(AnnotationSet::parse("a,seek\na,seek\n", vocab));
}

TEST_CASE("label suggestions stay inside the scope") {
    std::set<std::string> vocab = {"amuse", "sarcasm"};
    auto scope = parse_streams(R"([{"name":"spy","patterns":["spion"]}])");
    Corpus c;
    c.records = {with_id(rec("a", stamp(1, 0), "Spion? Popcorn!"), "1"), with_id(rec("b", stamp(1, 1), "popcorn only"), "2"),
                 with_id(rec("c", stamp(1, 2), "spion like James Bond"), "3")};
    std::vector<LabelRule> rules = {{"popcorn", "amuse"}, {"james bond", "sarcasm"}};
    auto all = suggest_labels(c, rules, vocab);
    CHECK(all.size() == 3);
    auto scoped = suggest_labels(c, rules, vocab, &scope[0]);
    REQUIRE(scoped.size() == 2);
    CHECK(scoped[0].record_key == "1");
    CHECK(scoped[0].label == "amuse");
    CHECK(scoped[1].label == "sarcasm");
    CHECK_THROWS_AS(suggest_labels(c, {{"x", "threat"}}, vocab), ConfigError);
    CHECK(suggestions_csv(scoped).find("popcorn") != std::string::npos);
}
