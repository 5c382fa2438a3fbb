#include "socialscope/graphs.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>

#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/random.hpp"
#include "socialscope/text.hpp"

namespace socialscope {

// ---------------------------------------------------------------------------
// Graph

std::size_t Graph::add_vertex(std::string_view name) {
    std::string key(name);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    std::size_t v = names_.size();
    index_.emplace(key, v);
    names_.push_back(std::move(key));
    out_.emplace_back();
    if (directed_) in_.emplace_back();
    return v;
}

std::optional<std::size_t> Graph::find(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    return std::nullopt;
}

bool Graph::add_edge(std::size_t u, std::size_t v, double w) {
    if (u == v) return false;
    auto [it, fresh] = out_[u].try_emplace(v, 0.0);
    it->second += w;
    if (directed_)
        in_[v][u] += w;
    else
        out_[v][u] += w;
    if (fresh) ++edge_count_;
    return true;
}

bool Graph::add_edge(std::string_view u, std::string_view v, double w) {
    std::size_t a = add_vertex(u);
    std::size_t b = add_vertex(v);
    return add_edge(a, b, w);
}

bool Graph::has_edge(std::size_t u, std::size_t v) const { return out_[u].count(v) > 0; }

double Graph::weight(std::size_t u, std::size_t v) const {
    auto it = out_[u].find(v);
    return it == out_[u].end() ? 0.0 : it->second;
}

std::vector<Graph::Edge> Graph::edges() const {
    std::vector<Edge> list;
    list.reserve(edge_count_);
    for (std::size_t u = 0; u < out_.size(); ++u)
        for (const auto& [v, w] : out_[u])
            if (directed_ || u < v) list.push_back({u, v, w});
    return list;
}

std::string Graph::label(std::size_t v) const {
    auto it = labels_.find(v);
    return it == labels_.end() ? names_[v] : it->second;
}

// ---------------------------------------------------------------------------
// Construction

Graph build_mention_graph(const Corpus& corpus, const MentionOptions& options) {
    Graph g(true);
    for (const auto& r : corpus.records) {
        std::size_t author = g.add_vertex(r.author);
        std::string_view body = r.text;
        if (!options.include_retweet_mentions) body = text::strip_retweet_prefix(body);
        std::set<std::string> targets;
        for (auto& user : text::extract_mentions(body)) targets.insert(std::move(user));
        for (const auto& user : targets)
            if (user != r.author) g.add_edge(author, g.add_vertex(user));
    }
    return g;
}

Graph build_hashtag_graph(const Corpus& corpus) {
    Graph g(false);
    std::map<std::string, std::map<std::string, std::size_t>> surface_counts;
    for (const auto& r : corpus.records) {
        std::set<std::string> tags;
        for (const auto& raw : text::extract_hashtags(r.text)) {
            auto folded = text::casefold(raw);
            ++surface_counts[folded][raw];
            tags.insert(folded);
        }
        std::vector<std::size_t> ids;
        for (const auto& t : tags) ids.push_back(g.add_vertex(t));
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j) g.add_edge(ids[i], ids[j]);
    }
    for (const auto& [folded, forms] : surface_counts) {
        // most frequent spelling; ties go to the lexicographically smallest
        auto best = std::max_element(forms.begin(), forms.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
        g.set_label(*g.find(folded), best->first);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Categories and ego networks

std::string_view to_string(HashtagCategory c) {
    switch (c) {
        case HashtagCategory::Supporting: return "Supporting";
        case HashtagCategory::Against: return "Against";
        case HashtagCategory::General: return "General";
        case HashtagCategory::ImportantTopics: return "ImportantTopics";
        case HashtagCategory::Other: return "Other";
    }
    return "Other";
}

HashtagCategory parse_hashtag_category(std::string_view s) {
    auto f = text::casefold(text::trim(s));
    for (auto c : {HashtagCategory::Supporting, HashtagCategory::Against, HashtagCategory::General,
                   HashtagCategory::ImportantTopics, HashtagCategory::Other})
        if (text::casefold(to_string(c)) == f) return c;
    throw ConfigError("unknown hashtag category '" + std::string(s) + "'");
}

CategoryMap parse_category_map(std::string_view content) {
    CategoryMap map;
    for (const auto& row : csv::parse(content)) {
        if (row.size() != 2) throw ConfigError("category map rows need exactly two columns");
        auto tag = text::casefold(text::trim(row[0]));
        if (tag == "hashtag") continue;  // header
        if (tag.empty()) throw ConfigError("empty hashtag in category map");
        if (tag.front() != '#') tag.insert(tag.begin(), '#');
        auto cat = parse_hashtag_category(row[1]);
        auto [it, fresh] = map.emplace(tag, cat);
        if (!fresh && it->second != cat) throw ConfigError("hashtag " + tag + " has two categories");
    }
    return map;
}

CategoryMap load_category_map(const std::filesystem::path& path) { return parse_category_map(io::read_file(path)); }

EgoNetwork ego_network(const Graph& graph, std::string_view ego, const CategoryMap* categories,
                       const std::set<HashtagCategory>& excluded) {
    auto center = graph.find(ego);
    if (!center) throw NotFoundError("vertex '" + std::string(ego) + "' not in graph");

    std::set<std::size_t> members{*center};
    for (const auto& [v, w] : graph.out_edges(*center)) members.insert(v);
    for (const auto& [v, w] : graph.in_edges(*center)) members.insert(v);

    EgoNetwork net;
    net.ego = std::string(ego);
    net.graph = Graph(graph.directed());
    std::vector<std::size_t> kept;
    for (auto v : members) {
        const auto& name = graph.name(v);
        std::optional<HashtagCategory> cat;
        if (categories) {
            if (auto it = categories->find(name); it != categories->end()) cat = it->second;
        }
        if (v != *center && cat && excluded.count(*cat)) continue;
        if (cat) net.labels[name] = *cat;
        std::size_t id = net.graph.add_vertex(name);
        if (graph.label(v) != name) net.graph.set_label(id, graph.label(v));
        kept.push_back(v);
    }
    for (auto u : kept)
        for (const auto& [v, w] : graph.out_edges(u))
            if ((graph.directed() || u < v) && std::binary_search(kept.begin(), kept.end(), v))
                net.graph.add_edge(*net.graph.find(graph.name(u)), *net.graph.find(graph.name(v)), w);
    return net;
}

// ---------------------------------------------------------------------------
// Summary metrics

double density(std::size_t n, std::size_t m, bool directed) {
    if (n < 2) throw ParameterError("density undefined for fewer than two vertices");
    double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
    return (directed ? 1.0 : 2.0) * static_cast<double>(m) / pairs;
}

double density(const Graph& g) { return density(g.vertex_count(), g.edge_count(), g.directed()); }

double average_degree(std::size_t n, std::size_t m, bool directed) {
    if (n == 0) throw ParameterError("average degree undefined for an empty graph");
    return (directed ? 1.0 : 2.0) * static_cast<double>(m) / static_cast<double>(n);
}

double average_degree(const Graph& g) { return average_degree(g.vertex_count(), g.edge_count(), g.directed()); }

std::vector<std::size_t> components(const Graph& g) {
    std::size_t n = g.vertex_count();
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::size_t size = 0;
        seen[s] = true;
        stack.push_back(s);
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            ++size;
            auto visit = [&](const std::map<std::size_t, double>& adj) {
                for (const auto& [v, w] : adj)
                    if (!seen[v]) {
                        seen[v] = true;
                        stack.push_back(v);
                    }
            };
            visit(g.out_edges(u));
            if (g.directed()) visit(g.in_edges(u));
        }
        sizes.push_back(size);
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

std::vector<std::pair<std::string, std::size_t>> degree_sequence(const Graph& g, DegreeMode mode) {
    if (g.directed() == (mode == DegreeMode::Total))
        throw ParameterError(g.directed() ? "directed graphs need in or out degree mode"
                                          : "undirected graphs only have total degree");
    std::vector<std::pair<std::string, std::size_t>> seq;
    seq.reserve(g.vertex_count());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        std::size_t d = mode == DegreeMode::In ? g.in_edges(v).size() : g.out_edges(v).size();
        seq.emplace_back(g.name(v), d);
    }
    return seq;
}

std::vector<double> betweenness(const Graph& g, PathMode mode) {
    std::size_t n = g.vertex_count();
    bool undirected = !g.directed() || mode == PathMode::Undirected;

    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (const auto& [v, w] : g.out_edges(u)) adj[u].push_back(v);
        if (g.directed() && undirected)
            for (const auto& [v, w] : g.in_edges(u))
                if (!g.has_edge(u, v)) adj[u].push_back(v);
    }

    std::vector<double> score(n, 0.0);
    std::vector<std::vector<std::size_t>> preds(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<long> dist(n);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t v = 0; v < n; ++v) {
            preds[v].clear();
            sigma[v] = 0.0;
            delta[v] = 0.0;
            dist[v] = -1;
        }
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        std::queue<std::size_t> queue;
        queue.push(s);
        while (!queue.empty()) {
            auto v = queue.front();
            queue.pop();
            order.push_back(v);
            for (auto w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            auto w = *it;
            for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) score[w] += delta[w];
        }
    }
    if (undirected)
        for (auto& x : score) x /= 2.0;
    return score;
}

// ---------------------------------------------------------------------------
// Communities

std::size_t CommunityAssignment::community_count() const {
    return membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
}

namespace {

// Symmetric weighted adjacency. `self[i]` is the diagonal entry A_ii, so the
// strength k_i = self[i] + sum of adj weights and m2 = sum of all A_ij.
struct LevelGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    std::vector<double> self;
    std::vector<double> strength;
    double m2 = 0.0;

    std::size_t size() const { return adj.size(); }
};

LevelGraph symmetrize(const Graph& g) {
    std::size_t n = g.vertex_count();
    std::vector<std::map<std::size_t, double>> sym(n);
    for (const auto& e : g.edges()) {
        sym[e.source][e.target] += e.weight;
        sym[e.target][e.source] += e.weight;
    }
    LevelGraph lg;
    lg.adj.resize(n);
    lg.self.assign(n, 0.0);
    lg.strength.assign(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
        for (const auto& [v, w] : sym[u]) {
            lg.adj[u].emplace_back(v, w);
            lg.strength[u] += w;
        }
        lg.m2 += lg.strength[u];
    }
    return lg;
}

// One round of local moves. Returns communities numbered 0..c-1 by first
// appearance and whether any node changed community.
std::pair<std::vector<std::size_t>, bool> local_moves(const LevelGraph& lg, double resolution, Rng& rng) {
    std::size_t n = lg.size();
    std::vector<std::size_t> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> tot = lg.strength;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<double> link(n, 0.0);
    std::vector<std::size_t> touched;
    bool any_move = false;
    for (int pass = 0; pass < 1000; ++pass) {
        bool moved = false;
        for (auto i : order) {
            std::size_t home = comm[i];
            double k = lg.strength[i];
            touched.clear();
            touched.push_back(home);
            link[home] = 0.0;
            for (const auto& [j, w] : lg.adj[i]) {
                std::size_t c = comm[j];
                if (link[c] == 0.0 && std::find(touched.begin(), touched.end(), c) == touched.end())
                    touched.push_back(c);
                link[c] += w;
            }
            tot[home] -= k;
            std::size_t best = home;
            double best_gain = link[home] - resolution * tot[home] * k / lg.m2;
            for (auto c : touched) {
                double gain = link[c] - resolution * tot[c] * k / lg.m2;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best = c;
                }
            }
            tot[best] += k;
            comm[i] = best;
            if (best != home) moved = true;
            for (auto c : touched) link[c] = 0.0;
        }
        if (!moved) break;
        any_move = true;
    }

    std::vector<std::size_t> renumber(n, SIZE_MAX);
    std::size_t next = 0;
    for (auto& c : comm) {
        if (renumber[c] == SIZE_MAX) renumber[c] = next++;
        c = renumber[c];
    }
    return {comm, any_move};
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::size_t>& comm, std::size_t count) {
    std::vector<std::map<std::size_t, double>> sym(count);
    LevelGraph out;
    out.self.assign(count, 0.0);
    out.strength.assign(count, 0.0);
    out.adj.resize(count);
    for (std::size_t u = 0; u < lg.size(); ++u) {
        out.self[comm[u]] += lg.self[u];
        for (const auto& [v, w] : lg.adj[u]) {
            if (comm[u] == comm[v])
                out.self[comm[u]] += w;
            else
                sym[comm[u]][comm[v]] += w;
        }
    }
    for (std::size_t c = 0; c < count; ++c) {
        out.strength[c] = out.self[c];
        for (const auto& [d, w] : sym[c]) {
            out.adj[c].emplace_back(d, w);
            out.strength[c] += w;
        }
        out.m2 += out.strength[c];
    }
    return out;
}

}  // namespace

double modularity(const Graph& graph, const std::vector<std::size_t>& membership, double resolution) {
    if (membership.size() != graph.vertex_count()) throw ParameterError("membership size does not match the graph");
    auto lg = symmetrize(graph);
    if (lg.m2 == 0.0) return 0.0;
    std::map<std::size_t, double> inside, total;
    for (std::size_t u = 0; u < lg.size(); ++u) {
        total[membership[u]] += lg.strength[u];
        for (const auto& [v, w] : lg.adj[u])
            if (membership[u] == membership[v]) inside[membership[u]] += w;
    }
    double q = 0.0;
    for (const auto& [c, t] : total) q += inside[c] / lg.m2 - resolution * (t / lg.m2) * (t / lg.m2);
    return q;
}

CommunityAssignment detect_communities(const Graph& graph, double resolution, std::uint64_t seed) {
    std::size_t n = graph.vertex_count();
    CommunityAssignment result;
    result.membership.resize(n);
    std::iota(result.membership.begin(), result.membership.end(), 0);
    auto level = symmetrize(graph);
    if (level.m2 == 0.0) return result;

    Rng rng(seed);
    while (true) {
        auto [comm, moved] = local_moves(level, resolution, rng);
        if (!moved) break;
        std::size_t count = *std::max_element(comm.begin(), comm.end()) + 1;
        for (auto& m : result.membership) m = comm[m];
        level = aggregate(level, comm, count);
    }

    std::vector<std::size_t> renumber(n, SIZE_MAX);
    std::size_t next = 0;
    for (auto& m : result.membership) {
        if (renumber[m] == SIZE_MAX) renumber[m] = next++;
        m = renumber[m];
    }
    result.modularity = modularity(graph, result.membership, resolution);
    return result;
}

std::map<HashtagCategory, double> hashtag_category_shares(const EgoNetwork& ego) {
    std::map<HashtagCategory, double> counts{{HashtagCategory::Supporting, 0.0},
                                             {HashtagCategory::Against, 0.0},
                                             {HashtagCategory::General, 0.0},
                                             {HashtagCategory::ImportantTopics, 0.0}};
    double total = 0.0;
    for (std::size_t v = 0; v < ego.graph.vertex_count(); ++v) {
        auto it = ego.labels.find(ego.graph.name(v));
        if (it == ego.labels.end() || it->second == HashtagCategory::Other) continue;
        counts[it->second] += 1.0;
        total += 1.0;
    }
    if (total == 0.0) throw ParameterError("ego network '" + ego.ego + "' has no categorized vertices");
    for (auto& [c, x] : counts) x = 100.0 * x / total;
    return counts;
}

// ---------------------------------------------------------------------------
// Export

std::string export_edge_list_csv(const Graph& g) {
    std::ostringstream out;
    out << "source,target,weight,directed\n";
    for (const auto& e : g.edges()) {
        std::ostringstream w;
        w << e.weight;
        out << csv::format_row({g.name(e.source), g.name(e.target), w.str(), g.directed() ? "true" : "false"});
    }
    return out.str();
}

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string export_graphml(const Graph& g, const std::map<std::string, HashtagCategory>* labels,
                           const CommunityAssignment* communities) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
        << "  <key id=\"category\" for=\"node\" attr.name=\"category\" attr.type=\"string\"/>\n"
        << "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n"
        << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        << "  <graph id=\"G\" edgedefault=\"" << (g.directed() ? "directed" : "undirected") << "\">\n";
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        out << "    <node id=\"n" << v << "\">\n"
            << "      <data key=\"label\">" << xml_escape(g.label(v)) << "</data>\n";
        if (labels) {
            if (auto it = labels->find(g.name(v)); it != labels->end())
                out << "      <data key=\"category\">" << to_string(it->second) << "</data>\n";
        }
        if (communities && v < communities->membership.size())
            out << "      <data key=\"community\">" << communities->membership[v] << "</data>\n";
        out << "    </node>\n";
    }
    std::size_t id = 0;
    for (const auto& e : g.edges())
        out << "    <edge id=\"e" << id++ << "\" source=\"n" << e.source << "\" target=\"n" << e.target
            << "\"><data key=\"weight\">" << e.weight << "</data></edge>\n";
    out << "  </graph>\n</graphml>\n";
    return out.str();
}

}  // namespace socialscope
