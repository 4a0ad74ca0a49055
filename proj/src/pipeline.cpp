#include "trendlex/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trendlex/csv.hpp"
#include "trendlex/errors.hpp"
#include "trendlex/facets.hpp"
#include "trendlex/lexicon.hpp"
#include "trendlex/normalizer.hpp"
#include "trendlex/record_store.hpp"
#include "trendlex/reporter.hpp"
#include "trendlex/stats.hpp"

using nlohmann::json;

namespace trendlex {

std::vector<int> YearRange::years() const {
    if (last < first) throw ConfigError("year range " + std::to_string(first) + ".." +
                                        std::to_string(last) + " is reversed");
    std::vector<int> out;
    for (int y = first; y <= last; ++y) out.push_back(y);
    return out;
}

void apply_year_token(RunConfig& config, const std::string& token) {
    if (token == "trend") {
        config.year_override = config.trend_years;
        return;
    }
    if (token == "content") {
        config.year_override = config.content_years;
        return;
    }
    std::size_t sep = token.find("..");
    if (sep == std::string::npos)
        throw ConfigError("years must be 'trend', 'content', or 'A..B', got '" + token + "'");
    try {
        YearRange range{std::stoi(token.substr(0, sep)), std::stoi(token.substr(sep + 2))};
        if (range.last < range.first)
            throw ConfigError("year range '" + token + "' is reversed");
        config.year_override = range;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("years must be 'trend', 'content', or 'A..B', got '" + token + "'");
    }
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

YearRange parse_year_pair(const json& value, const std::string& what) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
        !value[1].is_number_integer())
        throw ConfigError("config '" + what + "': expected [first, last]");
    YearRange range{value[0].get<int>(), value[1].get<int>()};
    if (range.last < range.first) throw ConfigError("config '" + what + "': reversed range");
    return range;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound(path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    json root = json::parse(buf.str(), nullptr, false, /*ignore_comments=*/true);
    if (root.is_discarded() || !root.is_object())
        throw ConfigError(path.string() + ": not a valid JSON object");

    std::filesystem::path base = path.parent_path();
    RunConfig config;
    if (root.contains("corpus")) {
        const json& c = root["corpus"];
        if (c.is_string()) {
            config.corpus_paths.push_back(resolve(base, c.get<std::string>()));
        } else if (c.is_array()) {
            for (const auto& v : c) {
                if (!v.is_string()) throw ConfigError("config 'corpus': expected paths");
                config.corpus_paths.push_back(resolve(base, v.get<std::string>()));
            }
        } else {
            throw ConfigError("config 'corpus': expected a path or list of paths");
        }
    }
    if (root.contains("lexicon"))
        config.lexicon_path = resolve(base, root["lexicon"].get<std::string>());
    if (root.contains("reference"))
        config.reference_path = resolve(base, root["reference"].get<std::string>());
    if (root.contains("out")) config.out_dir = resolve(base, root["out"].get<std::string>());
    if (root.contains("years")) {
        const json& years = root["years"];
        if (!years.is_object()) throw ConfigError("config 'years': expected an object");
        if (years.contains("trend"))
            config.trend_years = parse_year_pair(years["trend"], "years.trend");
        if (years.contains("content"))
            config.content_years = parse_year_pair(years["content"], "years.content");
    }
    if (root.contains("venues")) {
        if (!root["venues"].is_array()) throw ConfigError("config 'venues': expected a list");
        for (const auto& v : root["venues"]) config.venues.push_back(v.get<std::string>());
    }
    if (root.contains("workers")) {
        if (!root["workers"].is_number_integer() || root["workers"].get<int>() < 1)
            throw ConfigError("config 'workers': expected a positive integer");
        config.workers = root["workers"].get<int>();
    }
    if (root.contains("top_k")) {
        if (!root["top_k"].is_number_integer() || root["top_k"].get<int>() < 1)
            throw ConfigError("config 'top_k': expected a positive integer");
        config.top_k = static_cast<std::size_t>(root["top_k"].get<int>());
    }
    if (root.contains("harvest")) {
        const json& h = root["harvest"];
        if (!h.is_object()) throw ConfigError("config 'harvest': expected an object");
        if (h.contains("venue")) config.harvest_venue = h["venue"].get<std::string>();
        if (h.contains("year")) config.harvest_year = h["year"].get<int>();
        if (h.contains("rps")) config.harvest_rps = h["rps"].get<double>();
        if (h.contains("out")) config.harvest_out = resolve(base, h["out"].get<std::string>());
        if (h.contains("checkpoint"))
            config.harvest_checkpoint = resolve(base, h["checkpoint"].get<std::string>());
        if (h.contains("fixture_dir"))
            config.harvest_fixture_dir = resolve(base, h["fixture_dir"].get<std::string>());
        if (h.contains("endpoint")) {
            const json& e = h["endpoint"];
            if (!e.is_object()) throw ConfigError("config 'harvest.endpoint': expected an object");
            EndpointConfig& endpoint = config.endpoint;
            if (e.contains("listing_url"))
                endpoint.listing_url = e["listing_url"].get<std::string>();
            if (e.contains("listing_link_pattern"))
                endpoint.listing_link_pattern = e["listing_link_pattern"].get<std::string>();
            if (e.contains("detail_url_prefix"))
                endpoint.detail_url_prefix = e["detail_url_prefix"].get<std::string>();
            if (e.contains("detail_title_pattern"))
                endpoint.detail_title_pattern = e["detail_title_pattern"].get<std::string>();
            if (e.contains("detail_abstract_pattern"))
                endpoint.detail_abstract_pattern = e["detail_abstract_pattern"].get<std::string>();
            if (e.contains("first_page")) endpoint.first_page = e["first_page"].get<int>();
            if (e.contains("max_pages")) endpoint.max_pages = e["max_pages"].get<int>();
        }
    }
    return config;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("short write to " + path.string());
    std::cout << "wrote " << path.string() << "\n";
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Analysis stages may restrict the corpus to a venue subset; drop everything
// else (records and stats) so denominators and TF-IDF frequencies agree.
Corpus restrict_venues(Corpus corpus, const std::vector<std::string>& venues) {
    if (venues.empty()) return corpus;
    std::set<std::string> keep;
    for (const auto& v : venues) keep.insert(casefold_collapse(v));
    std::vector<PaperRecord> records;
    for (const auto& r : corpus.records())
        if (keep.count(r.venue)) records.push_back(r);
    CorpusStats stats;
    for (const auto& [key, slice] : corpus.stats().per_slice)
        if (keep.count(key.first)) {
            stats.per_slice[key] = slice;
            stats.total_retained += slice.retained;
        }
    return Corpus(std::move(records), std::move(stats));
}

struct Analysis {
    Corpus corpus;
    CompiledLexicon lexicon;
    std::vector<NormalizedDoc> docs;
    LabelMatrix labels;
};

Analysis load_analysis(const RunConfig& config) {
    if (config.lexicon_path.empty()) throw ConfigError("no lexicon configured");
    Corpus corpus = restrict_venues(load_corpus(config.out_dir / "corpus"), config.venues);
    CompiledLexicon lexicon(load_lexicon_file(config.lexicon_path));
    std::vector<NormalizedDoc> docs = normalize_corpus(corpus, lexicon, config.workers);
    LabelMatrix labels = label_corpus(corpus, docs, lexicon, config.workers);
    return Analysis{std::move(corpus), std::move(lexicon), std::move(docs), std::move(labels)};
}

void do_ingest(const RunConfig& config) {
    if (config.corpus_paths.empty()) throw ConfigError("no corpus inputs configured");
    ParseOptions options;
    options.content_start_year = config.content_years.first;
    std::vector<PaperRecord> all;
    std::vector<std::pair<std::string, Diagnostic>> diagnostics;
    for (const auto& path : config.corpus_paths) {
        ParseResult parsed = parse_records_file(path, options);
        all.insert(all.end(), parsed.records.begin(), parsed.records.end());
        for (const auto& d : parsed.diagnostics) diagnostics.emplace_back(path.string(), d);
    }
    FilterResult filtered = filter_and_dedup(all);
    Corpus corpus(std::move(filtered.retained), std::move(filtered.stats));
    persist_corpus(corpus, config.out_dir / "corpus");
    std::cout << "corpus: " << corpus.records().size() << " records retained\n";

    std::string report = "# ingest report\n";
    report += csv::join_row({"venue", "year", "raw", "empty_dropped", "duplicate_dropped",
                             "retained"});
    report += '\n';
    for (const auto& [key, slice] : corpus.stats().per_slice) {
        report += csv::join_row({key.first, std::to_string(key.second),
                                 std::to_string(slice.raw_count),
                                 std::to_string(slice.empty_dropped),
                                 std::to_string(slice.duplicate_dropped),
                                 std::to_string(slice.retained)});
        report += '\n';
    }
    report += "# total_retained," + std::to_string(corpus.stats().total_retained) + "\n";
    for (const auto& [file, d] : diagnostics)
        report += "# diagnostic," + file + ":" + std::to_string(d.line) + "," +
                  csv::escape_field(d.message) + "\n";
    write_file(config.out_dir / "ingest_report.csv", report);
}

void do_harvest(const RunConfig& config) {
    if (config.harvest_venue.empty() || config.harvest_year == 0)
        throw ConfigError("harvest needs a venue and a year");
    if (config.endpoint.listing_url.empty())
        throw ConfigError("harvest endpoint is not configured");

    HarvestJob job;
    job.venue = config.harvest_venue;
    job.year = config.harvest_year;
    job.endpoint = config.endpoint;
    job.rate_limit = config.harvest_rps;
    if (!config.harvest_checkpoint.empty()) {
        job.checkpoint_path = config.harvest_checkpoint;
        job.checkpoint = load_checkpoint(config.harvest_checkpoint);
    }

    Transport transport;
    if (!config.harvest_fixture_dir.empty()) {
        // Offline mode: URLs map to files named by their kebab-cased form.
        std::filesystem::path dir = config.harvest_fixture_dir;
        transport = [dir](const std::string& url) -> HttpResponse {
            std::filesystem::path file = dir / (kebab_case(url) + ".html");
            std::ifstream in(file, std::ios::binary);
            if (!in) return {404, ""};
            std::ostringstream buf;
            buf << in.rdbuf();
            return {200, buf.str()};
        };
    } else {
        transport = make_http_transport();
    }

    std::filesystem::path target = config.harvest_out.empty()
                                       ? config.out_dir / "harvested.jsonl"
                                       : config.harvest_out;
    std::filesystem::create_directories(target.parent_path());
    // Records are streamed to disk as they are emitted, each line flushed
    // before the harvester checkpoints the id, so an interrupted run leaves a
    // usable (records, checkpoint) pair behind. A resume therefore appends to
    // the records already on disk; a fresh run starts the file over.
    bool resuming = !job.checkpoint.empty();
    std::ofstream out(target,
                      std::ios::binary | (resuming ? std::ios::app : std::ios::trunc));
    if (!out) throw Error("cannot write " + target.string());
    job.on_record = [&out, &target](const PaperRecord& r) {
        json line = {{"id", r.id},       {"venue", r.venue},       {"year", r.year},
                     {"title", r.title}, {"abstract", r.abstract},
        };
        out << line.dump() << '\n';
        out.flush();
        if (!out) throw Error("short write to " + target.string());
    };

    HarvestResult result = harvest(job, transport);
    std::cout << "wrote " << target.string() << "\n";
    std::cout << "harvest: fetched=" << result.report.fetched
              << " skipped=" << result.report.skipped << " failed=" << result.report.failed
              << "\n";
    for (const auto& d : result.report.diagnostics)
        std::cerr << "harvest diagnostic: " << d.message << "\n";
}

void do_label(const RunConfig& config) {
    Analysis a = load_analysis(config);
    std::cout << a.lexicon.spec().summary() << "\n";
    write_file(config.out_dir / "labels.csv", a.labels.to_csv());
}

void do_mine(const RunConfig& config) {
    Analysis a = load_analysis(config);
    std::vector<int> years = config.active_content_years().years();
    for (const auto& facet : facet_registry(a.lexicon.spec())) {
        FacetShareTable table =
            mine_facet(facet, a.labels, a.corpus, a.docs, years, a.lexicon, config.workers);
        write_file(config.out_dir / ("facet-" + kebab_case(facet.name) + ".csv"),
                   table.to_csv());
    }
}

void do_stats(const RunConfig& config) {
    Analysis a = load_analysis(config);
    const auto& categories = a.labels.categories;
    std::vector<int> trend_years = config.active_trend_years().years();
    std::vector<int> content_years = config.active_content_years().years();

    std::vector<YearlySeries> prevalence;
    for (const auto& category : categories)
        prevalence.push_back(prevalence_series(category, a.labels, a.corpus, trend_years));
    write_file(config.out_dir / "prevalence.csv", series_to_csv(prevalence));

    TfidfMassTable mass = tfidf_mass_table(a.labels, a.docs, trend_years);
    std::string mass_csv = csv::join_row({"category", "year", "raw_mass", "normalized"});
    mass_csv += '\n';
    for (std::size_t c = 0; c < mass.categories.size(); ++c)
        for (std::size_t y = 0; y < mass.years.size(); ++y) {
            mass_csv += csv::join_row({mass.categories[c], std::to_string(mass.years[y]),
                                       format_value(mass.raw[c][y]),
                                       format_value(mass.normalized[c][y])});
            mass_csv += '\n';
        }
    write_file(config.out_dir / "tfidf_mass.csv", mass_csv);

    std::vector<TrendSummary> summaries;
    for (const auto& category : categories)
        summaries.push_back(
            summarize(prevalence_series(category, a.labels, a.corpus, content_years)));
    std::string summary_csv = csv::join_row({"label", "trend_pp", "slope_pp_per_year"});
    summary_csv += '\n';
    for (const auto& s : summaries) {
        summary_csv += csv::join_row(
            {s.label, format_value(s.trend_pp), format_value(s.slope_pp_per_year)});
        summary_csv += '\n';
    }
    write_file(config.out_dir / "summaries.csv", summary_csv);

    std::size_t k = std::min(config.top_k, summaries.size());
    if (k == 0) k = summaries.size();
    std::vector<TrendSummary> rising = top_rising(summaries, k);
    std::string rising_csv = csv::join_row({"rank", "label", "slope_pp_per_year", "trend_pp"});
    rising_csv += '\n';
    for (std::size_t i = 0; i < rising.size(); ++i) {
        rising_csv += csv::join_row({std::to_string(i + 1), rising[i].label,
                                     format_value(rising[i].slope_pp_per_year),
                                     format_value(rising[i].trend_pp)});
        rising_csv += '\n';
    }
    write_file(config.out_dir / "top_rising.csv", rising_csv);

    std::string venue_csv =
        csv::join_row({"category", "venue", "year", "matched", "total", "fraction"});
    venue_csv += '\n';
    for (const auto& category : categories) {
        CrossVenueMatrix matrix = cross_venue_matrix(category, a.labels, a.corpus);
        for (const auto& venue : matrix.venues)
            for (int year : matrix.years) {
                auto it = matrix.cells.find({venue, year});
                std::vector<std::string> fields{category, venue, std::to_string(year)};
                if (it == matrix.cells.end()) {
                    fields.insert(fields.end(), {"", "", "ABSENT"});
                } else {
                    fields.push_back(std::to_string(it->second.matched));
                    fields.push_back(std::to_string(it->second.total));
                    fields.push_back(format_value(it->second.fraction));
                }
                venue_csv += csv::join_row(fields);
                venue_csv += '\n';
            }
    }
    write_file(config.out_dir / "cross_venue.csv", venue_csv);
}

void do_report(const RunConfig& config) {
    Analysis a = load_analysis(config);
    const auto& categories = a.labels.categories;
    std::vector<int> trend_years = config.active_trend_years().years();
    std::vector<int> content_years = config.active_content_years().years();

    std::string tables_md = "# Facet tables\n\n";
    for (const auto& facet : facet_registry(a.lexicon.spec())) {
        FacetShareTable table =
            mine_facet(facet, a.labels, a.corpus, a.docs, content_years, a.lexicon,
                       config.workers);
        std::string title = facet.name + " - share of '" + facet.within_category +
                            "' documents, " + std::to_string(content_years.front()) + "-" +
                            std::to_string(content_years.back());
        TableModel model = facet_table_model(table, title);
        tables_md += render_table(model, TableFormat::markdown);
        tables_md += "\n";
        write_file(config.out_dir / ("table-" + kebab_case(facet.name) + ".csv"),
                   render_table(model, TableFormat::csv));
    }
    write_file(config.out_dir / "tables.md", tables_md);

    FigureModel prevalence_fig;
    prevalence_fig.kind = FigureKind::small_multiples;
    prevalence_fig.title = "Prevalence by category, " +
                           std::to_string(trend_years.front()) + "-" +
                           std::to_string(trend_years.back());
    for (const auto& category : categories) {
        YearlySeries series = prevalence_series(category, a.labels, a.corpus, trend_years);
        FigureSeries fs;
        fs.label = category;
        for (const auto& p : series.points) {
            fs.x.push_back(p.year);
            fs.y.push_back(p.value);
        }
        prevalence_fig.series.push_back(std::move(fs));
    }
    write_file(config.out_dir / "fig-prevalence-by-category.svg",
               render_figure(prevalence_fig));

    TfidfMassTable mass = tfidf_mass_table(a.labels, a.docs, trend_years);
    FigureModel intensity_fig;
    intensity_fig.kind = FigureKind::small_multiples;
    intensity_fig.title = "Normalized topic intensity by category";
    for (std::size_t c = 0; c < mass.categories.size(); ++c) {
        FigureSeries fs;
        fs.label = mass.categories[c];
        for (std::size_t y = 0; y < mass.years.size(); ++y) {
            fs.x.push_back(mass.years[y]);
            fs.y.push_back(mass.normalized[c][y]);
        }
        intensity_fig.series.push_back(std::move(fs));
    }
    write_file(config.out_dir / "fig-topic-intensity.svg", render_figure(intensity_fig));

    // Rank categories by the slope of their normalized mass trajectory.
    std::vector<TrendSummary> mass_summaries;
    for (std::size_t c = 0; c < mass.categories.size(); ++c) {
        YearlySeries series;
        series.label = mass.categories[c];
        series.unit = SeriesUnit::mass;
        for (std::size_t y = 0; y < mass.years.size(); ++y)
            series.points.push_back({mass.years[y], mass.normalized[c][y]});
        TrendSummary summary;
        summary.label = series.label;
        summary.series = series;
        summary.trend_pp = 0.0;
        summary.slope_pp_per_year = ls_slope(series);
        mass_summaries.push_back(std::move(summary));
    }
    std::size_t k = std::min(config.top_k, mass_summaries.size());
    if (k == 0) k = mass_summaries.size();
    std::vector<TrendSummary> rising = top_rising(mass_summaries, k);
    FigureModel bar_fig;
    bar_fig.kind = FigureKind::bar;
    bar_fig.title = "Fastest-rising categories by mass-trajectory slope";
    for (const auto& s : rising)
        bar_fig.series.push_back(FigureSeries{s.label, {}, {s.slope_pp_per_year}});
    write_file(config.out_dir / "fig-top-rising.svg", render_figure(bar_fig));

    FigureModel top_lines;
    top_lines.kind = FigureKind::multi_line;
    top_lines.title = "Prevalence trajectories, fastest-rising categories";
    std::size_t lines = std::min<std::size_t>(8, rising.size());
    for (std::size_t i = 0; i < lines; ++i) {
        YearlySeries series =
            prevalence_series(rising[i].label, a.labels, a.corpus, trend_years);
        FigureSeries fs;
        fs.label = series.label;
        for (const auto& p : series.points) {
            fs.x.push_back(p.year);
            fs.y.push_back(p.value);
        }
        top_lines.series.push_back(std::move(fs));
    }
    write_file(config.out_dir / "fig-prevalence-top.svg", render_figure(top_lines));
}

void do_audit(const RunConfig& config) {
    if (config.reference_path.empty()) throw ConfigError("no reference table configured");
    std::vector<ReferenceRow> rows = load_reference_rows(config.reference_path);
    std::vector<TrendSummary> computed = reference_summaries(rows);
    write_file(config.out_dir / "audit.md", discrepancy_report(computed, rows));
}

}  // namespace

int run(const std::string& command, const RunConfig& config) {
    try {
        if (command == "ingest") {
            do_ingest(config);
        } else if (command == "harvest") {
            do_harvest(config);
        } else if (command == "label") {
            do_label(config);
        } else if (command == "mine") {
            do_mine(config);
        } else if (command == "stats") {
            do_stats(config);
        } else if (command == "report") {
            do_report(config);
        } else if (command == "audit") {
            do_audit(config);
        } else if (command == "all") {
            do_ingest(config);
            do_label(config);
            do_mine(config);
            do_stats(config);
            do_report(config);
            do_audit(config);
        } else {
            throw BadArgument("unknown command '" + command + "'");
        }
        return 0;
    } catch (const NotFound& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 2;
    } catch (const VersionMismatch& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 2;
    } catch (const EmptySubset& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 3;
    } catch (const MissingYear& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "trendlex: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace trendlex
