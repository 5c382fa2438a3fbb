#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "socialscope/corpus.hpp"

namespace socialscope {

/// Parameters of the synthetic election corpus used for demos and end-to-end tests.
struct SynthConfig {
    std::uint64_t seed = 2016;
    std::size_t messages = 5000;
    std::size_t accounts = 1200;
    std::string start = "2016-11-20";
    std::string end = "2016-12-10";
};

struct SynthDataset {
    Corpus corpus;  // follower codes already set
    UsernameSet followers_a;
    UsernameSet followers_b;
    std::string bot_scores_csv;
    std::string annotations_csv;
    /// record_key of the candidate video statement whose retweets are planted.
    std::string video_key;
};

SynthDataset generate_synthetic(const SynthConfig& config);

/// Writes corpus.jsonl (with a few duplicate and malformed lines appended),
/// followers_a.txt, followers_b.txt, bot_scores.csv and annotations.csv.
void write_synthetic(const SynthDataset& data, const std::filesystem::path& dir);

}  // namespace socialscope
