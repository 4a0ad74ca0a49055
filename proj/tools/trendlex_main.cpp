#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "trendlex/errors.hpp"
#include "trendlex/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"trendlex - lexicon-based trend mining over accepted-paper abstracts"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> corpus_paths;
    std::string lexicon_path, reference_path, out_dir, years_token;
    std::vector<std::string> venues;
    int workers = 0;
    int top_k = 0;

    app.add_option("--config", config_path, "run configuration file (JSON, // comments ok)");
    app.add_option("--corpus", corpus_paths, "input records (JSONL); repeatable");
    app.add_option("--lexicon", lexicon_path, "lexicon file");
    app.add_option("--reference", reference_path, "transcribed reference tables (CSV)");
    app.add_option("--years", years_token, "year range: trend, content, or A..B");
    app.add_option("--venues", venues, "venue filter; repeatable")->delimiter(',');
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "worker thread count")->check(CLI::PositiveNumber);
    app.add_option("--top-k", top_k, "entries in top-rising outputs")
        ->check(CLI::PositiveNumber);

    std::string harvest_venue, harvest_checkpoint, harvest_out, fixture_dir;
    int harvest_year = 0;
    double rps = 0.0;
    const std::pair<const char*, const char*> stages[] = {
        {"ingest", "load, validate, and deduplicate the corpus"},
        {"label", "assign lexicon categories to every record"},
        {"mine", "mine facet share tables within the labeled subset"},
        {"stats", "compute prevalence, trends, slopes, and tf-idf mass"},
        {"report", "render markdown tables, csv exports, and svg figures"},
        {"audit", "compare computed trends against the transcribed tables"},
        {"all", "run every stage in order"},
    };
    for (const auto& [name, help] : stages) app.add_subcommand(name, help)->fallthrough();
    CLI::App* harvest =
        app.add_subcommand("harvest", "fetch accepted-paper pages into a JSONL corpus");
    harvest->fallthrough();
    harvest->add_option("--venue", harvest_venue, "venue to harvest");
    harvest->add_option("--year", harvest_year, "year to harvest");
    harvest->add_option("--rps", rps, "max requests per second")->check(CLI::PositiveNumber);
    harvest->add_option("--checkpoint", harvest_checkpoint, "checkpoint file (ids, one per line)");
    harvest->add_option("--harvest-out", harvest_out, "output records file (JSONL)");
    harvest->add_option("--fixture-dir", fixture_dir,
                        "serve responses from this directory instead of HTTP");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    trendlex::RunConfig config;
    try {
        if (!config_path.empty()) config = trendlex::load_run_config(config_path);
        if (!corpus_paths.empty()) {
            config.corpus_paths.clear();
            for (const auto& p : corpus_paths) config.corpus_paths.emplace_back(p);
        }
        if (!lexicon_path.empty()) config.lexicon_path = lexicon_path;
        if (!reference_path.empty()) config.reference_path = reference_path;
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (!years_token.empty()) trendlex::apply_year_token(config, years_token);
        if (!venues.empty()) config.venues = venues;
        if (workers > 0) config.workers = workers;
        if (top_k > 0) config.top_k = static_cast<std::size_t>(top_k);
        if (!harvest_venue.empty()) config.harvest_venue = harvest_venue;
        if (harvest_year > 0) config.harvest_year = harvest_year;
        if (rps > 0) config.harvest_rps = rps;
        if (!harvest_checkpoint.empty()) config.harvest_checkpoint = harvest_checkpoint;
        if (!harvest_out.empty()) config.harvest_out = harvest_out;
        if (!fixture_dir.empty()) config.harvest_fixture_dir = fixture_dir;
    } catch (const trendlex::NotFound& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 2;
    } catch (const trendlex::Error& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 2;
    }

    return trendlex::run(app.get_subcommands().front()->get_name(), config);
}
