#pragma once

// Small builders shared by the unit and acceptance tests.

#include <optional>
#include <string>

#include "socialscope/corpus.hpp"
#include "socialscope/dates.hpp"

namespace fixtures {

inline socialscope::UtcTime at(const std::string& ts) { return *socialscope::parse_timestamp(ts); }

inline socialscope::MessageRecord rec(std::string author, const std::string& ts, std::string text,
                                      std::uint64_t rt = 0, std::uint64_t likes = 0,
                                      std::optional<std::uint64_t> replies = 0,
                                      socialscope::Language lang = socialscope::Language::de) {
    socialscope::MessageRecord r;
    r.author = std::move(author);
    r.timestamp = at(ts);
    r.text = std::move(text);
    r.retweet_count = rt;
    r.like_count = likes;
    r.reply_count = replies;
    r.language = lang;
    r.is_retweet = r.text.rfind("RT @", 0) == 0;
    return r;
}

inline socialscope::MessageRecord with_id(socialscope::MessageRecord r, std::string id) {
    r.id = std::move(id);
    return r;
}

inline socialscope::MessageRecord with_code(socialscope::MessageRecord r, socialscope::FollowerCode code) {
    r.follower_code = code;
    return r;
}

}  // namespace fixtures
