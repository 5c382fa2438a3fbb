#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "socialscope/corpus.hpp"

namespace socialscope {

/// Simple weighted graph over named vertices. Self-loops are rejected and
/// parallel edges merge by summing weights. Undirected edges are stored once.
class Graph {
public:
    explicit Graph(bool directed) : directed_(directed) {}

    bool directed() const { return directed_; }
    std::size_t vertex_count() const { return names_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    /// Returns the vertex index, creating the vertex if needed.
    std::size_t add_vertex(std::string_view name);
    std::optional<std::size_t> find(std::string_view name) const;
    const std::string& name(std::size_t v) const { return names_[v]; }

    /// Adds `weight` to edge (u, v). Returns false for self-loops, which are dropped.
    bool add_edge(std::size_t u, std::size_t v, double weight = 1.0);
    bool add_edge(std::string_view u, std::string_view v, double weight = 1.0);

    bool has_edge(std::size_t u, std::size_t v) const;
    double weight(std::size_t u, std::size_t v) const;

    /// Out-neighbors (all neighbors when undirected), ordered by index.
    const std::map<std::size_t, double>& out_edges(std::size_t v) const { return out_[v]; }
    /// In-neighbors; for undirected graphs the same as out_edges.
    const std::map<std::size_t, double>& in_edges(std::size_t v) const { return directed_ ? in_[v] : out_[v]; }

    struct Edge {
        std::size_t source;
        std::size_t target;
        double weight;
    };
    /// Every edge once, ordered by (source, target); undirected edges have source < target.
    std::vector<Edge> edges() const;

    /// Optional human-readable label per vertex (e.g. the preferred hashtag spelling).
    void set_label(std::size_t v, std::string label) { labels_[v] = std::move(label); }
    std::string label(std::size_t v) const;

private:
    bool directed_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::map<std::size_t, double>> out_;
    std::vector<std::map<std::size_t, double>> in_;
    std::map<std::size_t, std::string> labels_;
    std::size_t edge_count_ = 0;
};

struct MentionOptions {
    /// Count the "RT @user" header of retweets as a mention.
    bool include_retweet_mentions = true;
};

/// Directed author -> mentioned-user graph, weight = number of messages.
/// Every author is a vertex even without mentions.
Graph build_mention_graph(const Corpus& corpus, const MentionOptions& options = {});

/// Undirected co-occurrence graph over case-folded hashtags; each message adds
/// one to every unordered pair of distinct hashtags it contains. Vertex labels
/// carry the most frequent surface form.
Graph build_hashtag_graph(const Corpus& corpus);

enum class HashtagCategory { Supporting, Against, General, ImportantTopics, Other };

std::string_view to_string(HashtagCategory c);
/// Accepts the category names case-insensitively; throws ConfigError otherwise.
HashtagCategory parse_hashtag_category(std::string_view s);

using CategoryMap = std::map<std::string, HashtagCategory>;

/// CSV of (hashtag, category). Hashtags are case-folded; a missing '#' is added.
CategoryMap parse_category_map(std::string_view content);
CategoryMap load_category_map(const std::filesystem::path& path);

struct EgoNetwork {
    std::string ego;
    Graph graph{false};
    std::map<std::string, HashtagCategory> labels;
};

/// One-step ego network: ego, its neighbors and every edge among them. With a
/// category map, vertices are labeled and those whose category is in
/// `excluded` are dropped (the ego always stays). Throws NotFoundError.
EgoNetwork ego_network(const Graph& graph, std::string_view ego, const CategoryMap* categories = nullptr,
                       const std::set<HashtagCategory>& excluded = {});

/// 2m / (n(n-1)) undirected, m / (n(n-1)) directed. Throws ParameterError for n < 2.
double density(std::size_t n, std::size_t m, bool directed);
double density(const Graph& graph);

/// 2m / n undirected, m / n directed. Throws ParameterError for n = 0.
double average_degree(std::size_t n, std::size_t m, bool directed);
double average_degree(const Graph& graph);

/// Weakly connected component sizes, descending.
std::vector<std::size_t> components(const Graph& graph);

enum class DegreeMode { In, Out, Total };

/// Unweighted degree of every vertex in index order. Total applies to
/// undirected graphs, In/Out to directed ones; other pairings throw ParameterError.
std::vector<std::pair<std::string, std::size_t>> degree_sequence(const Graph& graph, DegreeMode mode);

enum class PathMode { Directed, Undirected };

/// Raw (unnormalized) shortest-path betweenness, unweighted. Undirected mode
/// treats every edge as bidirectional and counts each unordered pair once.
std::vector<double> betweenness(const Graph& graph, PathMode mode = PathMode::Directed);

struct CommunityAssignment {
    std::vector<std::size_t> membership;  // per vertex, ids numbered by first appearance
    double modularity = 0.0;
    std::size_t community_count() const;
};

/// Weighted modularity of a partition; digraphs are symmetrized with summed weights.
double modularity(const Graph& graph, const std::vector<std::size_t>& membership, double resolution = 1.0);

/// Multi-level greedy modularity optimization (Louvain). The node visiting order
/// is shuffled from `seed`; results are deterministic for a given seed.
CommunityAssignment detect_communities(const Graph& graph, double resolution = 1.0, std::uint64_t seed = 1);

/// Percentages of labeled vertices per category over Supporting, Against,
/// General and ImportantTopics (Other excluded). Throws ParameterError when no
/// vertex carries one of those labels.
std::map<HashtagCategory, double> hashtag_category_shares(const EgoNetwork& ego);

/// "source,target,weight,directed" rows.
std::string export_edge_list_csv(const Graph& graph);
std::string export_graphml(const Graph& graph, const std::map<std::string, HashtagCategory>* labels = nullptr,
                           const CommunityAssignment* communities = nullptr);

}  // namespace socialscope
