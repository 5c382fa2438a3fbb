#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/random.hpp"
#include "socialscope/stats.hpp"

using namespace socialscope;
using fixtures::rec;
using fixtures::with_code;
namespace fs = std::filesystem;

namespace {

double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Chooses which k of the n messages carry an emotion so that the presence
// indicator correlates with `replies` as close to `target` as swaps allow.
std::vector<double> plant_presence(const std::vector<double>& replies, std::size_t k, double target, Rng& rng) {
    std::size_t n = replies.size();
    double mean = 0, ss = 0;
    for (double r : replies) mean += r;
    mean /= static_cast<double>(n);
    for (double r : replies) ss += (r - mean) * (r - mean);
    double kk = static_cast<double>(k);
    double want = kk * mean + target * std::sqrt(kk * (static_cast<double>(n) - kk) / static_cast<double>(n) * ss);

    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) p[i] = 1.0;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    double s1 = 0;
    for (std::size_t i = 0; i < n; ++i) s1 += p[i] * replies[i];
    for (int iter = 0; iter < 200000 && std::abs(s1 - want) > 0.5; ++iter) {
        std::size_t i = rng.below(n), j = rng.below(n);
        if (p[i] != 1.0 || p[j] != 0.0) continue;
        double next = s1 - replies[i] + replies[j];
        if (std::abs(next - want) < std::abs(s1 - want)) {
            std::swap(p[i], p[j]);
            s1 = next;
        }
    }
    return p;
}

}  // namespace

TEST_CASE("pearson") {
    std::vector<double> x = {1, 2, 3, 4, 5.5};
    std::vector<double> neg = {-1, -2, -3, -4, -5.5};
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    std::vector<double> c = {2, 2, 2, 2, 2};
    CHECK(pearson(x, c) == 0.0);
    CHECK_THROWS_AS(pearson(c, c), UndefinedError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), ParameterError);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), ParameterError);

    // planted 0.94: y = r x' + sqrt(1 - r^2) e', with e' orthogonalized against x'
    Rng rng(94);
    std::size_t n = 500;
    std::vector<double> a(n), e(n);
    for (auto& v : a) v = rng.normal();
    for (auto& v : e) v = rng.normal();
    auto standardize = [](std::vector<double>& v) {
        double m = 0, s = 0;
        for (double t : v) m += t;
        m /= static_cast<double>(v.size());
        for (double& t : v) t -= m;
        for (double t : v) s += t * t;
        s = std::sqrt(s);
        for (double& t : v) t /= s;
    };
    standardize(a);
    standardize(e);
    double dot = 0;
    for (std::size_t i = 0; i < n; ++i) dot += a[i] * e[i];
    for (std::size_t i = 0; i < n; ++i) e[i] -= dot * a[i];
    standardize(e);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.94 * a[i] + std::sqrt(1 - 0.94 * 0.94) * e[i];
    CHECK(std::abs(pearson(a, y) - 0.94) < 0.005);
    CHECK(pearson(a, y) == doctest::Approx(0.94).epsilon(1e-10));

    for (int t = 0; t < 100; ++t) {
        std::vector<double> u(2 + rng.below(50)), v(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = std::round(rng.uniform() * 100);
            v[i] = u[i] * rng.uniform() + rng.normal() * 10;
        }
        CHECK(pearson(u, v) == doctest::Approx(naive_pearson(u, v)).epsilon(1e-9));
    }
}

TEST_CASE("emotion reply correlations on planted fixtures") {
    Rng rng(7);
    std::size_t n = 4000;
    Corpus c;
    std::vector<double> replies(n);
    for (std::size_t i = 0; i < n; ++i) {
        replies[i] = static_cast<double>(rng.below(3) == 0 ? rng.below(40) : rng.below(4));
        c.records.push_back(rec("u", "2016-12-01T00:00:00Z", "x", 0, 0, static_cast<std::uint64_t>(replies[i])));
    }
    std::vector<std::pair<Emotion, double>> planted = {
        {Emotion::anger, -0.0012}, {Emotion::fear, 0.023}, {Emotion::joy, 0.14}, {Emotion::trust, 0.12}};
    std::vector<MessageSentiment> sentiments(n);
    std::map<Emotion, std::vector<double>> presence;
    for (const auto& [e, target] : planted) {
        presence[e] = plant_presence(replies, 900, target, rng);
        for (std::size_t i = 0; i < n; ++i) sentiments[i].emotions.counts[static_cast<std::size_t>(e)] = presence[e][i] > 0 ? 2 : 0;
    }
    auto got = emotion_reply_correlations(c, sentiments);
    CHECK(got.size() == planted.size());  // emotions never present are left out
    for (const auto& [e, target] : planted) {
        CHECK(got.at(e) == doctest::Approx(naive_pearson(presence[e], replies)).epsilon(1e-9));
        CHECK(std::abs(got.at(e) - target) < 1e-3);
    }
    sentiments.pop_back();
    CHECK_THROWS_AS(emotion_reply_correlations(c, sentiments), ParameterError);
}

TEST_CASE("engagement summary conserves totals") {
    Rng rng(3);
    Corpus c;
    double rt = 0, likes = 0, replies = 0;
    std::size_t missing = 0;
    for (int i = 0; i < 1000; ++i) {
        std::optional<std::uint64_t> rep = rng.uniform() < 0.1 ? std::nullopt : std::optional<std::uint64_t>(rng.below(9));
        auto r = with_code(rec("u" + std::to_string(i % 50), "2016-12-01T00:00:00Z", "x", rng.below(30), rng.below(60), rep),
                           static_cast<FollowerCode>(rng.below(4)));
        c.records.push_back(r);
        rt += r.retweet_count;
        likes += r.like_count;
        replies += r.reply_count.value_or(0);
        missing += !rep;
    }
    auto rows = engagement_summary(c, [](const MessageRecord& r, std::size_t) {
        return std::to_string(static_cast<int>(r.follower_code));
    });
    CHECK(rows.size() == 4);
    double srt = 0, slikes = 0, sreplies = 0;
    std::size_t sn = 0, smissing = 0;
    for (const auto& row : rows) {
        sn += row.n;
        srt += row.mean_retweets * row.n;
        slikes += row.mean_likes * row.n;
        sreplies += row.mean_replies * row.n;
        smissing += row.replies_missing;
    }
    CHECK(sn == 1000);
    CHECK(srt == doctest::Approx(rt));
    CHECK(slikes == doctest::Approx(likes));
    CHECK(sreplies == doctest::Approx(replies));
    CHECK(smissing == missing);
    CHECK(std::is_sorted(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.group < b.group; }));
    CHECK(engagement_csv(rows).find("replies_missing") != std::string::npos);
}

TEST_CASE("opinion matrix totals match the targeted scores") {
    LexiconBundle b;
    b.polarity.emplace(Language::de, SentimentLexicon::parse("gut\t3\nschlecht\t-3\n"));
    TargetMatcher m(std::vector<Target>{{"vdb", {"vdb"}}, {"hofer", {"hofer"}}});
    std::vector<std::string> texts = {"vdb gut", "hofer schlecht", "vdb gut schlecht", "hofer", "vdb und hofer gut",
                                      "wetter"};
    Rng rng(11);
    Corpus c;
    for (int i = 0; i < 400; ++i)
        c.records.push_back(with_code(rec("a" + std::to_string(rng.below(40)), "2016-12-01T00:00:00Z",
                                          texts[rng.below(texts.size())]),
                                      static_cast<FollowerCode>(rng.below(4))));
    std::vector<TargetedScore> all;
    std::map<std::string, std::size_t> sizes;
    for (const char* t : {"vdb", "hofer"}) {
        auto s = sentiment_toward(c, m, t, b);
        sizes[t] = s.size();
        all.insert(all.end(), s.begin(), s.end());
    }
    auto matrix = opinion_matrix(c, all);
    CHECK(matrix.targets == std::vector<std::string>{"vdb", "hofer"});
    for (const auto& [t, n] : sizes) {
        std::uint64_t sum = 0;
        for (int code = 0; code < 4; ++code) sum += matrix.at(static_cast<FollowerCode>(code), t).total();
        CHECK(sum == n);
    }
    auto users = opinion_matrix(c, all, true);
    for (const auto& [t, n] : sizes) {
        std::uint64_t sum = 0;
        for (int code = 0; code < 4; ++code) sum += users.at(static_cast<FollowerCode>(code), t).total();
        CHECK(sum <= n);
        CHECK(sum <= 40 * 4);
    }
    CHECK(matrix.to_csv().rfind("follower_code,target", 0) == 0);
}

TEST_CASE("number formatting") {
    CHECK(format_number(3.777777777) == "3.77778");
    CHECK(format_number(17.6470588) == "17.6471");
    CHECK(format_number(2.0) == "2");
    nlohmann::ordered_json j = {{"a", 0.123456789}, {"b", {1.0 / 3.0, 7}}, {"c", "text"}};
    auto r = rounded(j);
    CHECK(r["a"].get<double>() == 0.123457);
    CHECK(r["b"][1] == 7);
    CHECK(r["c"] == "text");
}

TEST_CASE("emit_report") {
    auto dir = fs::temp_directory_path() / ("socialscope_report_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    emit_report(ReportBundle{}, dir / "empty");
    auto index = nlohmann::json::parse(std::ifstream(dir / "empty" / "index.json"));
    CHECK(index["sections"].size() == 0);

    ReportBundle bundle;
    for (const char* name : {"streams", "corpus", "sentiment", "hashtag_network", "mention_network", "tailfit", "bots"}) {
        ReportSection s;
        s.name = name;
        s.module = name;
        s.summary["value"] = 1.0 / 7.0;
        s.artifacts.push_back({"data.csv", "a,b\n1,2\n"});
        bundle.sections.push_back(s);
    }
    bundle.seeds["run"] = 2016;
    emit_report(bundle, dir / "full");
    auto full = nlohmann::json::parse(std::ifstream(dir / "full" / "index.json"));
    REQUIRE(full["sections"].size() == 7);
    CHECK(full["sections"][0]["name"] == "bots");
    CHECK(full["seeds"]["run"] == 2016);
    for (const auto& s : full["sections"]) {
        CHECK(fs::exists(dir / "full" / s["summary"].get<std::string>()));
        CHECK(fs::exists(dir / "full" / s["files"][0].get<std::string>()));
    }
    auto summary = nlohmann::json::parse(std::ifstream(dir / "full" / "corpus" / "summary.json"));
    CHECK(summary["value"].get<double>() == 0.142857);

    auto round = ReportSection::from_json(bundle.sections[0].to_json());
    CHECK(round.name == "streams");
    fs::remove_all(dir);
}
