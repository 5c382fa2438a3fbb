#include "socialscope/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/random.hpp"
#include "socialscope/streams.hpp"

namespace socialscope {

namespace {

using Words = std::vector<std::string>;

struct Account {
    std::string name;
    FollowerCode code = FollowerCode::Neither;
    double activity = 1.0;
    double fame = 1.0;
    bool german = true;
};

const Words kDePositive = {"gut", "super", "toll", "großartig", "stark", "klug", "mutig", "ehrlich", "sympathisch",
                           "vernünftig", "wunderbar"};
const Words kDeNegative = {"schlecht", "schlimm", "furchtbar", "peinlich", "dumm", "gefährlich", "verlogen",
                           "lächerlich", "unfair"};
const Words kEnPositive = {"good", "great", "awesome", "excellent", "brave", "honest", "wonderful", "nice"};
const Words kEnNegative = {"bad", "terrible", "horrible", "awful", "stupid", "dangerous", "ridiculous", "wrong"};
const Words kDeEmotion = {"Wut", "Angst", "Hoffnung", "Freude", "Sorge", "Vertrauen", "Hass", "Stolz"};
const Words kEnEmotion = {"anger", "fear", "hope", "trust", "hate", "surprise", "pride", "sadness"};

const Words kGeneral = {"#bpw16", "#bpw16", "#bpw16", "#vdb", "#hofer", "#vanderbellen", "#norberthofer",
                        "#Österreich", "#presidentialelection", "#austrianelection"};
const Words kSupportA = {"#vote4vdb", "#teamvanderbellen", "#mehrdennje", "#vdb16"};
const Words kSupportB = {"#hofer4president", "#hofer2016", "#norberthofer2016"};
const Words kAgainstA = {"#notovdb", "#vollderbluff"};
const Words kAgainstB = {"#nohofer", "#notohofer", "#womenagainsthofer"};
const Words kTopics = {"#islam", "#trump", "#brexit", "#burka", "#terror", "#öxit", "#marinelepen", "#hillaryclinton"};
const Words kOther = {"#styria", "#monday", "#christmas", "#wien", "#kaffee", "#fussball"};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[rng.below(v.size())];
}

std::size_t pick_weighted(Rng& rng, const std::vector<double>& cumulative) {
    double u = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::string candidate_name(bool vdb, bool german, Rng& rng) {
    if (vdb) {
        // a few misspellings for the normalization table to fix
        double u = rng.uniform();
        if (u < 0.04) return "van der Belen";
        if (u < 0.06) return "Van Der Bellen";
        return "Van der Bellen";
    }
    return german && rng.uniform() < 0.3 ? "Norbert Hofer" : "Hofer";
}

struct Builder {
    Rng rng;
    DateRange range;
    std::vector<Account> accounts;
    std::vector<double> activity_cum, fame_cum;
    std::vector<MessageRecord> records;
    std::uint64_t next_id = 1;

    std::string make_id() {
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%07llu", static_cast<unsigned long long>(next_id++));
        return buf;
    }

    UtcTime time_on(Date day) {
        // daytime-heavy: 06:00 to 23:59
        auto secs = 6 * 3600 + static_cast<long long>(rng.below(18 * 3600));
        return UtcTime{day.time_since_epoch()} + std::chrono::seconds(secs);
    }

    MessageRecord& add(std::size_t author, UtcTime ts, std::string text, bool german) {
        MessageRecord r;
        r.id = make_id();
        r.author = accounts[author].name;
        r.timestamp = ts;
        r.text = std::move(text);
        r.language = german ? Language::de : Language::en;
        r.follower_code = accounts[author].code;
        r.reply_count = rng.uniform() < 0.7 ? rng.below(3) : rng.below(12);
        records.push_back(std::move(r));
        return records.back();
    }
};

std::string opinion_sentence(Builder& b, bool german, bool about_vdb, bool positive) {
    auto cand = candidate_name(about_vdb, german, b.rng);
    const auto& adj = german ? (positive ? kDePositive : kDeNegative) : (positive ? kEnPositive : kEnNegative);
    const auto& word = pick(b.rng, adj);
    int form = static_cast<int>(b.rng.below(5));
    std::string booster = b.rng.uniform() < 0.2 ? (german ? "sehr " : "very ") : "";
    if (german) {
        switch (form) {
            case 0: return cand + " war heute " + booster + word;
            case 1: return "Ehrlich gesagt finde ich " + cand + " " + booster + word;
            case 2: return cand + " im TV: " + booster + word + "!";
            case 3: return pick(b.rng, kDeEmotion) + " wegen " + cand + ", " + word;
            default: return "Die Rede von " + cand + " war " + booster + word + ".";
        }
    }
    switch (form) {
        case 0: return cand + " was " + booster + word + " today";
        case 1: return "Honestly " + cand + " is " + booster + word;
        case 2: return cand + " on TV: " + booster + word + "!";
        case 3: return "So much " + pick(b.rng, kEnEmotion) + " about " + cand + ", " + word;
        default: return "The speech by " + cand + " was " + booster + word + ".";
    }
}

std::string neutral_sentence(Builder& b, bool german) {
    static const Words de = {"Heute Abend Diskussion im ORF", "Wer schaut das Duell?", "Wahlkarte ist abgeschickt",
                             "Morgen ist Wahl in Oesterreich", "Erste Hochrechnung um 17 Uhr", "Interessante Umfrage"};
    static const Words en = {"Watching the debate tonight", "Austria votes on Sunday", "First projections at 5pm",
                             "Interesting poll from Austria", "Long queue at the polling station"};
    return pick(b.rng, german ? de : en);
}

std::string hashtags_for(Builder& b, bool about_vdb, bool positive) {
    std::vector<std::string> tags;
    tags.push_back(about_vdb ? (b.rng.uniform() < 0.5 ? "#vdb" : "#vanderbellen") : "#hofer");
    std::size_t extra = b.rng.below(3);
    for (std::size_t i = 0; i < extra; ++i) {
        double u = b.rng.uniform();
        if (u < 0.35)
            tags.push_back(pick(b.rng, kGeneral));
        else if (u < 0.55)
            tags.push_back(pick(b.rng, positive == about_vdb ? kSupportA : kSupportB));
        else if (u < 0.72)
            tags.push_back(pick(b.rng, positive == about_vdb ? kAgainstB : kAgainstA));
        else if (u < 0.9)
            tags.push_back(pick(b.rng, kTopics));
        else
            tags.push_back(pick(b.rng, kOther));
    }
    std::string out;
    std::set<std::string> seen;
    for (const auto& t : tags)
        if (seen.insert(t).second) out += " " + t;
    return out;
}

std::string mention_for(Builder& b, std::size_t author) {
    double u = b.rng.uniform();
    std::size_t target;
    if (u < 0.35)
        target = 0;
    else if (u < 0.55)
        target = 1;
    else
        target = pick_weighted(b.rng, b.fame_cum);
    if (target == author) return "";
    return "@" + b.accounts[target].name + " ";
}

}  // namespace

SynthDataset generate_synthetic(const SynthConfig& config) {
    if (config.messages < 1000 || config.accounts < 100)
        throw ParameterError("synthetic corpus needs at least 1000 messages and 100 accounts");
    Builder b{Rng(config.seed), DateRange::parse(config.start, config.end), {}, {}, {}, {}};
    auto date = [](const char* s) { return *parse_date(s); };

    // accounts: both candidates, self-declared bots, two volume posters, crowd
    b.accounts.push_back({"vanderbellen", FollowerCode::Neither, 0.0, 60.0, true});
    b.accounts.push_back({"norbertghofer", FollowerCode::Neither, 0.0, 35.0, true});
    for (const char* name : {"newsbotde", "wahlbot16", "austriabot", "tweetbot_at"})
        b.accounts.push_back({name, FollowerCode::Neither, 2.0, 1.0, true});
    b.accounts.push_back({"dauerposter", FollowerCode::CandidateB, 3.0, 1.0, true});
    b.accounts.push_back({"nachtschicht_at", FollowerCode::CandidateA, 3.0, 1.0, true});
    std::size_t first_crowd = b.accounts.size();
    for (std::size_t i = first_crowd; i < config.accounts; ++i) {
        Account a;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%04zu", b.rng.uniform() < 0.5 ? "user" : "at_", i);
        a.name = buf;
        double u = b.rng.uniform();
        a.code = u < 0.30 ? FollowerCode::CandidateA
                          : u < 0.45 ? FollowerCode::CandidateB : u < 0.50 ? FollowerCode::Both : FollowerCode::Neither;
        a.activity = std::exp(1.1 * b.rng.normal());
        a.fame = std::exp(1.4 * b.rng.normal());
        a.german = b.rng.uniform() < 0.75;
        b.accounts.push_back(a);
    }
    double cum = 0;
    for (const auto& a : b.accounts) b.activity_cum.push_back(cum += a.activity);
    cum = 0;
    for (const auto& a : b.accounts) b.fame_cum.push_back(cum += a.fame);

    // day weights with the TV debate and election peaks
    std::vector<double> day_cum;
    cum = 0;
    for (int d = 0; d < b.range.days(); ++d) {
        Date day = b.range.start + std::chrono::days(d);
        double w = 1.0;
        if (day == date("2016-12-01")) w = 3.0;
        if (day == date("2016-12-04")) w = 4.0;
        if (day == date("2016-12-05")) w = 2.0;
        day_cum.push_back(cum += w);
    }
    auto random_day = [&] { return b.range.start + std::chrono::days(pick_weighted(b.rng, day_cum)); };

    // candidate accounts
    for (int i = 0; i < 25; ++i) {
        bool own = b.rng.uniform() < 0.8;
        b.add(0, b.time_on(random_day()), opinion_sentence(b, true, own, own) + " #vanderbellen #bpw16", true);
    }
    for (int i = 0; i < 18; ++i) {
        bool attack = b.rng.uniform() < 0.6;
        b.add(1, b.time_on(random_day()), opinion_sentence(b, true, attack, !attack) + " #bpw16", true);
    }

    // the video statement and its spreaders
    std::string video_text = "Bisher habe ich immer FPÖ gewählt. Warum ich jetzt #VanderBellen wähle. #bpw16";
    auto& video = b.add(0, UtcTime{date("2016-12-01").time_since_epoch()} + std::chrono::hours(7) +
                               std::chrono::minutes(37),
                        video_text, true);
    std::string video_key = *video.id;
    UtcTime video_time = video.timestamp;

    // volume posters: 52-58 messages on each of three or four days
    for (std::size_t who : {first_crowd - 2, first_crowd - 1}) {
        int days = 3 + static_cast<int>(b.rng.below(2));
        for (int d = 0; d < days; ++d) {
            Date day = date("2016-11-28") + std::chrono::days(2 * d);
            int n = 52 + static_cast<int>(b.rng.below(7));
            for (int k = 0; k < n; ++k) {
                bool vdb = b.rng.uniform() < 0.5;
                bool pos = (b.accounts[who].code == FollowerCode::CandidateA) == vdb;
                b.add(who, b.time_on(day), mention_for(b, who) + opinion_sentence(b, true, vdb, pos) + hashtags_for(b, vdb, pos), true);
            }
        }
    }

    // misinformation streams with planted peaks
    struct Rumor {
        const char* peak;
        int count;
        Words de, en;
    };
    std::vector<Rumor> rumors = {
        {"2016-11-24", 30, {"Hat Van der Bellen Krebs? Gerüchte im Netz", "Krebs-Gerücht über #vdb"},
         {"Rumor: does Van der Bellen have cancer?", "Cancer rumors about #vdb"}},
        {"2016-11-28", 26, {"Demenz bei Van der Bellen? Sicher nicht", "Das Demenz-Gerücht wieder #vdb"},
         {"Dementia claims about Van der Bellen again", "Is #vdb showing dementia?"}},
        {"2016-12-06", 18, {"Van der Bellen ein Freimaurer? #bpw16", "Freimaurer-Geschichte um #vdb"},
         {"Van der Bellen a freemason? #bpw16", "The freemason story about #vdb"}},
    };
    for (const auto& rumor : rumors) {
        for (int k = 0; k < rumor.count; ++k) {
            Date day = b.rng.uniform() < 0.5 ? date(rumor.peak)
                                             : date(rumor.peak) + std::chrono::days(static_cast<int>(b.rng.below(7)) - 3);
            if (!b.range.contains(day)) day = date(rumor.peak);
            std::size_t who = pick_weighted(b.rng, b.activity_cum);
            bool german = b.accounts[who].german;
            b.add(who, b.time_on(day), pick(b.rng, german ? rumor.de : rumor.en) + " " + std::to_string(k), german);
        }
    }

    // the spy accusation: 135 reactions, labeled by the planted taxonomy
    struct Reaction {
        const char* label;
        int count;
        Words texts;
    };
    std::vector<Reaction> reactions = {
        {"seek", 53, {"Was Alexander #VanderBellen a spy?", "War #VanderBellen wirklich ein Spion?"}},
        {"annoy", 13, {"What next is #VdB going to be? First a spy, now this", "Erst Spion, was kommt als nächstes #vdb"}},
        {"threat", 23, {"Spy accusations might cost #VanDerBellen the elections", "Der Spion-Vorwurf kostet #vdb die Wahl"}},
        {"sarcasm", 36, {"#VanDerBond: A spy who loved me.", "#VanDerBellen aka spy agent, endlich James Bond als Präsident"}},
        {"amuse", 10, {"Get your popcorn, the spy debate on @ORF", "Popcorn bereit, Spion-Debatte im @ORF"}},
    };
    std::ostringstream annotations;
    annotations << "message_key,label\n";
    for (const auto& reaction : reactions) {
        for (int k = 0; k < reaction.count; ++k) {
            // the peak is the debate day, tailing off over the following three days
            double u = b.rng.uniform();
            int offset = u < 0.55 ? 0 : u < 0.75 ? 1 : u < 0.9 ? 2 : 3;
            Date day = date("2016-12-01") + std::chrono::days(offset);
            std::size_t who = pick_weighted(b.rng, b.activity_cum);
            const auto& t = pick(b.rng, reaction.texts);
            bool german = t.find("Spion") != std::string::npos || t.find("endlich") != std::string::npos;
            auto& r = b.add(who, b.time_on(day) + std::chrono::hours(offset == 0 ? 14 : 0), t + " (" + std::to_string(k) + ")", german);
            if (r.timestamp >= UtcTime{(day + std::chrono::days(1)).time_since_epoch()})
                r.timestamp = UtcTime{(day + std::chrono::days(1)).time_since_epoch()} - std::chrono::seconds(1);
            annotations << *r.id << ',' << reaction.label << '\n';
        }
    }

    // crowd originals
    std::size_t planted_rt = 68;
    std::size_t target = config.messages > b.records.size() + planted_rt ? config.messages - b.records.size() - planted_rt : 0;
    std::size_t originals = target * 7 / 10;
    std::vector<std::size_t> original_index;
    for (std::size_t k = 0; k < originals; ++k) {
        std::size_t who = first_crowd + pick_weighted(b.rng, b.activity_cum) % (b.accounts.size() - first_crowd);
        const auto& acc = b.accounts[who];
        bool german = acc.german;
        bool vdb = b.rng.uniform() < 0.55;
        bool lean_a = acc.code == FollowerCode::CandidateA || (acc.code == FollowerCode::Both && b.rng.uniform() < 0.5);
        bool lean_b = acc.code == FollowerCode::CandidateB;
        bool pos;
        if (lean_a)
            pos = vdb ? b.rng.uniform() < 0.75 : b.rng.uniform() < 0.2;
        else if (lean_b)
            pos = vdb ? b.rng.uniform() < 0.15 : b.rng.uniform() < 0.7;
        else
            pos = b.rng.uniform() < 0.5;
        std::string text;
        if (b.rng.uniform() < 0.45) text += mention_for(b, who);
        text += b.rng.uniform() < 0.15 ? neutral_sentence(b, german) : opinion_sentence(b, german, vdb, pos);
        text += hashtags_for(b, vdb, pos);
        if (b.rng.uniform() < 0.1) text += b.rng.uniform() < 0.5 ? " :)" : " :(";
        b.add(who, b.time_on(random_day()), text, german);
        original_index.push_back(b.records.size() - 1);
    }

    // retweets of crowd originals, popularity-weighted
    std::vector<double> viral_cum;
    cum = 0;
    for (std::size_t k = 0; k < original_index.size(); ++k) viral_cum.push_back(cum += std::exp(1.5 * b.rng.normal()));
    std::size_t retweets = target - originals;
    for (std::size_t k = 0; k < retweets; ++k) {
        std::size_t oi = original_index[pick_weighted(b.rng, viral_cum)];
        std::size_t who = first_crowd + pick_weighted(b.rng, b.activity_cum) % (b.accounts.size() - first_crowd);
        if (b.accounts[who].name == b.records[oi].author) continue;
        auto delay = std::chrono::seconds(static_cast<long long>(-std::log(b.rng.uniform_pos()) * 6 * 3600));
        UtcTime ts = b.records[oi].timestamp + delay;
        if (utc_date(ts) > b.range.end) ts = b.records[oi].timestamp + std::chrono::seconds(60);
        std::string text = "RT @" + b.records[oi].author + ": " + b.records[oi].text;
        bool german = b.records[oi].language == Language::de;
        auto& r = b.add(who, ts, text, german);
        r.is_retweet = true;
        r.reply_count = 0;
        ++b.records[oi].retweet_count;
    }

    // planted video spreaders: mostly followers of candidate A, two of B
    std::vector<std::size_t> fans_a, fans_b;
    for (std::size_t i = first_crowd; i < b.accounts.size(); ++i) {
        if (b.accounts[i].code == FollowerCode::CandidateA) fans_a.push_back(i);
        if (b.accounts[i].code == FollowerCode::CandidateB) fans_b.push_back(i);
    }
    std::size_t video_index = 0;
    for (std::size_t i = 0; i < b.records.size(); ++i)
        if (b.records[i].id == video_key) video_index = i;
    // 18 spreaders: two B fans with 3 each, one A fan with 12, then 5 x 4 and 10 x 3
    std::vector<std::size_t> spreaders, per_spreader;
    auto draw_distinct = [&](const std::vector<std::size_t>& pool, std::size_t k) {
        std::set<std::size_t> chosen;
        while (chosen.size() < k) {
            auto v = pool[b.rng.below(pool.size())];
            if (chosen.insert(v).second) spreaders.push_back(v);
        }
    };
    draw_distinct(fans_b, 2);
    draw_distinct(fans_a, 16);
    per_spreader = {3, 3, 12, 4, 4, 4, 4, 4, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3};
    for (std::size_t s = 0; s < spreaders.size(); ++s) {
        for (std::size_t k = 0; k < per_spreader[s]; ++k) {
            auto delay = std::chrono::seconds(static_cast<long long>(-std::log(b.rng.uniform_pos()) * 20 * 3600));
            auto& r = b.add(spreaders[s], video_time + delay, "RT @vanderbellen: " + video_text, true);
            r.is_retweet = true;
            r.reply_count = 0;
            ++b.records[video_index].retweet_count;
        }
    }

    // likes follow retweets with noise, so the two correlate strongly
    for (auto& r : b.records) {
        if (r.is_retweet) continue;
        double base = 1.4 * static_cast<double>(r.retweet_count) + std::abs(b.rng.normal()) * 1.5;
        if (r.author == "vanderbellen" || r.author == "norbertghofer") base += 40.0 + 20.0 * b.rng.uniform();
        r.like_count = static_cast<std::uint64_t>(std::floor(base));
    }

    SynthDataset out;
    for (const auto& a : b.accounts) {
        if (a.code == FollowerCode::CandidateA || a.code == FollowerCode::Both) out.followers_a.insert(a.name);
        if (a.code == FollowerCode::CandidateB || a.code == FollowerCode::Both) out.followers_b.insert(a.name);
    }
    sort_canonical(b.records);
    out.corpus.records = std::move(b.records);
    out.corpus.provenance.sources.push_back("synthetic:seed=" + std::to_string(config.seed));
    out.video_key = video_key;
    out.annotations_csv = annotations.str();

    // bot scores: most accounts human, a few potential bots and bots, some unavailable
    std::ostringstream scores;
    scores << "username,score\n";
    Rng srng(derive_seed(config.seed, 7));
    for (const auto& a : b.accounts) {
        double u = srng.uniform();
        if (a.name == "newsbotde") {
            scores << a.name << ",0.96\n";
            continue;
        }
        if (a.name == "wahlbot16") {
            scores << a.name << ",0.74\n";
            continue;
        }
        if (u < 0.024) continue;  // account gone
        if (u < 0.03) {
            scores << a.name << ",NA\n";
            continue;
        }
        double v = srng.uniform();
        double s = v < 0.93 ? 0.5 * srng.uniform() : v < 0.985 ? 0.51 + 0.39 * srng.uniform() : 0.91 + 0.09 * srng.uniform();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.2f", s);
        scores << a.name << ',' << buf << '\n';
    }
    out.bot_scores_csv = scores.str();
    return out;
}

void write_synthetic(const SynthDataset& data, const std::filesystem::path& dir) {
    auto lines = to_json_lines(data.corpus);
    // a duplicate of the first two records and two unusable lines, for the cleaning steps
    std::istringstream in(lines);
    std::string first, second;
    std::getline(in, first);
    std::getline(in, second);
    lines += first + "\n" + second + "\n";
    lines += "{\"id\": \"broken\", \"author\": \"x\"}\n";
    lines += "not json at all\n";
    io::write_file(dir / "corpus.jsonl", lines);
    std::string fa, fb;
    for (const auto& n : data.followers_a) fa += n + "\n";
    for (const auto& n : data.followers_b) fb += n + "\n";
    io::write_file(dir / "followers_a.txt", fa);
    io::write_file(dir / "followers_b.txt", fb);
    io::write_file(dir / "bot_scores.csv", data.bot_scores_csv);
    io::write_file(dir / "annotations.csv", data.annotations_csv);
}

}  // namespace socialscope
