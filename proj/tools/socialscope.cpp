// socialscope command line: runs pipeline phases from a JSON config.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "socialscope/csv.hpp"
#include "socialscope/errors.hpp"
#include "socialscope/pipeline.hpp"
#include "socialscope/synth.hpp"
#include "socialscope/text.hpp"

namespace fs = std::filesystem;
using namespace socialscope;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> lang;
    std::optional<std::string> out;
    std::optional<unsigned> workers;
    bool offline = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON run configuration")->required();
    cmd->add_option("--seed", c.seed, "seed for every stochastic step");
    cmd->add_option("--lang", c.lang, "language scope")->check(CLI::IsMember({"de", "en", "all"}));
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--workers", c.workers, "worker threads (0 = all cores)");
    cmd->add_flag("--offline", c.offline, "forbid network access by the bot score provider");
}

RunConfig resolve(const Common& c) {
    ConfigOverrides o;
    o.seed = c.seed;
    o.language = c.lang;
    if (c.out) o.out = fs::path(*c.out);
    o.workers = c.workers;
    o.offline = c.offline;
    return load_config(c.config, o);
}

int run(const Common& c, const std::set<Phase>& phases) {
    auto config = resolve(c);
    auto result = run_phases(config, phases, std::cerr);
    if (result.exit_code == 0) std::cerr << "done; outputs in " << config.out.string() << "\n";
    return result.exit_code;
}

// Ego network of one hashtag, read from the ingest cache.
int ego(const Common& c, const std::string& tag, bool filtered) {
    auto config = resolve(c);
    auto cache = config.out / "cache" / "corpus.jsonl";
    if (!fs::exists(cache)) throw NotFoundError("missing cache " + cache.string() + "; run the ingest phase first");
    auto corpus = ingest_file(cache, InputFormat::JsonLines);
    if (config.language == LanguageScope::de) corpus = filter_language(corpus, Language::de);
    if (config.language == LanguageScope::en) corpus = filter_language(corpus, Language::en);
    auto graph = build_hashtag_graph(corpus);
    auto key = text::casefold(tag);
    if (key.empty() || key.front() != '#') key = "#" + key;

    CategoryMap categories;
    if (filtered && !config.categories) throw ConfigError("--filtered needs a categories file in the config");
    if (config.categories) categories = load_category_map(*config.categories);
    auto net = filtered ? ego_network(graph, key, &categories, config.excluded_categories)
                        : ego_network(graph, key, config.categories ? &categories : nullptr);
    auto comm = detect_communities(net.graph, config.resolution, derive_seed(config.seed, text::fnv1a64("ego:" + key)));
    auto file = config.out / "ego" / (key.substr(1) + (filtered ? "_filtered" : "") + ".graphml");
    io::write_file(file, export_graphml(net.graph, &net.labels, &comm));

    nlohmann::ordered_json j;
    j["ego"] = key;
    j["vertices"] = net.graph.vertex_count();
    j["edges"] = net.graph.edge_count();
    if (net.graph.vertex_count() >= 2) j["density"] = density(net.graph);
    j["communities"] = comm.community_count();
    j["modularity"] = comm.modularity;
    j["graphml"] = file.string();
    std::cout << rounded(j).dump(2) << "\n";
    return 0;
}

// Standalone fit of a degree file, one integer per line.
int fit_file(const std::string& path, const std::vector<std::string>& families, int n_sims, std::uint64_t seed,
             unsigned workers) {
    auto sample = DegreeSample::parse(io::read_file(path));
    std::vector<ModelFamily> fams;
    for (const auto& f : families) fams.push_back(parse_model_family(f));
    SelectConfig sc;
    sc.n_sims = n_sims;
    sc.seed = seed;
    sc.workers = workers;
    auto report = select_best(sample, fams, sc);
    auto j = report.to_json();
    j["n"] = sample.size();
    std::cout << rounded(j).dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"socialscope: event analysis over social media corpora"};
    app.require_subcommand(1);

    Common common;
    std::string phase_list = "all";
    auto* run_cmd = app.add_subcommand("run", "run several phases (default all)");
    add_common(run_cmd, common);
    run_cmd->add_option("--phases", phase_list, "comma separated phases or 'all'");

    std::vector<std::pair<CLI::App*, Phase>> single;
    for (auto [name, phase, help] : {std::tuple{"ingest", Phase::Ingest, "read, clean and cache the corpus"},
                                     std::tuple{"sentiment", Phase::Sentiment, "polarity and emotion scoring"},
                                     std::tuple{"network", Phase::Network, "mention and hashtag networks"},
                                     std::tuple{"streams", Phase::Streams, "keyword streams, trajectories, annotations"},
                                     std::tuple{"bots", Phase::Bots, "bot scores and heuristics"},
                                     std::tuple{"report", Phase::Report, "assemble the report bundle"}}) {
        auto* cmd = app.add_subcommand(name, help);
        add_common(cmd, common);
        single.emplace_back(cmd, phase);
    }

    // fit runs the phase, or fits a degree file directly with --input
    std::string fit_input;
    std::vector<std::string> fit_families = {"power_law", "lognormal", "exponential", "poisson"};
    int fit_sims = 1000;
    std::uint64_t fit_seed = 1;
    unsigned fit_workers = 0;
    auto* fit_cmd = app.add_subcommand("fit", "heavy-tail model selection on the degree samples");
    fit_cmd->add_option("--config", common.config, "JSON run configuration");
    fit_cmd->add_option("--seed", common.seed, "seed");
    fit_cmd->add_option("--lang", common.lang)->check(CLI::IsMember({"de", "en", "all"}));
    fit_cmd->add_option("--out", common.out, "output directory");
    fit_cmd->add_option("--workers", common.workers, "worker threads");
    fit_cmd->add_flag("--offline", common.offline);
    fit_cmd->add_option("--input", fit_input, "degree file; skips the config and prints JSON");
    fit_cmd->add_option("--families", fit_families, "families for --input");
    fit_cmd->add_option("--sims", fit_sims, "bootstrap replicates for --input");

    std::string ego_tag;
    bool ego_filtered = false;
    auto* ego_cmd = app.add_subcommand("ego", "ego network of one hashtag");
    add_common(ego_cmd, common);
    ego_cmd->add_option("--tag", ego_tag, "ego hashtag")->required();
    ego_cmd->add_flag("--filtered", ego_filtered, "drop vertices in excluded categories");

    SynthConfig synth;
    std::string synth_out = "data/synthetic";
    auto* synth_cmd = app.add_subcommand("synth", "write the synthetic demo corpus");
    synth_cmd->add_option("--out", synth_out, "target directory");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");
    synth_cmd->add_option("--messages", synth.messages, "approximate message count");
    synth_cmd->add_option("--accounts", synth.accounts, "crowd size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) return run(common, parse_phases(phase_list));
        for (auto& [cmd, phase] : single)
            if (cmd->parsed()) return run(common, {phase});
        if (fit_cmd->parsed()) {
            if (!fit_input.empty()) {
                if (common.seed) fit_seed = *common.seed;
                if (common.workers) fit_workers = *common.workers;
                return fit_file(fit_input, fit_families, fit_sims, fit_seed, fit_workers);
            }
            if (common.config.empty()) throw ConfigError("fit needs --config or --input");
            return run(common, {Phase::Fit});
        }
        if (ego_cmd->parsed()) return ego(common, ego_tag, ego_filtered);
        if (synth_cmd->parsed()) {
            auto data = generate_synthetic(synth);
            write_synthetic(data, synth_out);
            std::cout << "wrote " << data.corpus.records.size() << " records to " << synth_out << "\n"
                      << "video_key " << data.video_key << "\n";
            return 0;
        }
    } catch (const ConfigValidationError& e) {
        std::cerr << "configuration errors:\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
