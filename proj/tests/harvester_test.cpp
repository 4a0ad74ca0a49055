#include <doctest.h>

#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "trendlex/errors.hpp"
#include "trendlex/harvester.hpp"
#include "trendlex/reporter.hpp"

using namespace trendlex;

namespace {

EndpointConfig test_endpoint() {
    EndpointConfig endpoint;
    endpoint.listing_url = "http://proc.test/{venue}/{year}?page={page}";
    endpoint.listing_link_pattern = "href=\"(/paper/[a-z0-9-]+)\"";
    endpoint.detail_url_prefix = "http://proc.test";
    endpoint.detail_title_pattern = "<h1>(.*?)</h1>";
    endpoint.detail_abstract_pattern = "<p class=\"abstract\">(.*?)</p>";
    return endpoint;
}

HarvestJob test_job() {
    HarvestJob job;
    job.venue = "cvpr";
    job.year = 2025;
    job.endpoint = test_endpoint();
    job.rate_limit = 1000.0;  // keep unit tests fast
    return job;
}

std::map<std::string, std::string> fixture_pages() {
    std::map<std::string, std::string> pages;
    auto load = [&pages](const std::string& url, const std::string& file) {
        pages[url] = testsup::slurp(testsup::data_dir() / "fixtures" / file);
    };
    load("http://proc.test/cvpr/2025?page=1", "http-proc-test-cvpr-2025-page-1.html");
    load("http://proc.test/cvpr/2025?page=2", "http-proc-test-cvpr-2025-page-2.html");
    load("http://proc.test/paper/alpha-one", "http-proc-test-paper-alpha-one.html");
    load("http://proc.test/paper/beta-two", "http-proc-test-paper-beta-two.html");
    load("http://proc.test/paper/gamma-three", "http-proc-test-paper-gamma-three.html");
    load("http://proc.test/paper/delta-four", "http-proc-test-paper-delta-four.html");
    load("http://proc.test/paper/epsilon-five", "http-proc-test-paper-epsilon-five.html");
    return pages;
}

Transport map_transport(const std::map<std::string, std::string>& pages,
                        std::atomic<int>* calls = nullptr) {
    return [&pages, calls](const std::string& url) -> HttpResponse {
        if (calls) ++*calls;
        auto it = pages.find(url);
        if (it == pages.end()) return {404, ""};
        return {200, it->second};
    };
}

}  // namespace

TEST_CASE("expand_url substitutes venue, year, and page") {
    CHECK(expand_url("http://proc.test/{venue}/{year}?page={page}", "cvpr", 2025, 3) ==
          "http://proc.test/cvpr/2025?page=3");
}

TEST_CASE("two listing pages with five papers yield five records in discovery order") {
    std::map<std::string, std::string> pages = fixture_pages();
    HarvestResult result = harvest(test_job(), map_transport(pages));
    CHECK(result.report.fetched == 5);
    CHECK(result.report.skipped == 0);
    CHECK(result.report.failed == 0);
    REQUIRE(result.records.size() == 5);
    CHECK(result.records[0].id == "cvpr:2025:alpha-one");
    CHECK(result.records[1].id == "cvpr:2025:beta-two");
    CHECK(result.records[2].id == "cvpr:2025:gamma-three");
    CHECK(result.records[3].id == "cvpr:2025:delta-four");
    CHECK(result.records[4].id == "cvpr:2025:epsilon-five");
    CHECK(result.records[0].title == "Splatting Scenes at Interactive Rates");
    CHECK(result.records[0].venue == "cvpr");
    CHECK(result.records[0].year == 2025);
}

TEST_CASE("html entities decode and inline tags are stripped") {
    std::map<std::string, std::string> pages = fixture_pages();
    HarvestResult result = harvest(test_job(), map_transport(pages));
    REQUIRE(result.records.size() == 5);
    CHECK(result.records[1].title == "Instruction Tuning for Chart & Table Reading");
    CHECK(result.records[1].abstract ==
          "A vision-language assistant learns chart reading from rendered tables & axis "
          "labels, improving answer accuracy.");
}

TEST_CASE("checkpoint ids are skipped and counted") {
    std::map<std::string, std::string> pages = fixture_pages();
    HarvestJob job = test_job();
    job.checkpoint = {"cvpr:2025:beta-two", "cvpr:2025:delta-four"};
    HarvestResult result = harvest(job, map_transport(pages));
    CHECK(result.report.fetched == 3);
    CHECK(result.report.skipped == 2);
    REQUIRE(result.records.size() == 3);
    CHECK(result.records[0].id == "cvpr:2025:alpha-one");
    CHECK(result.records[1].id == "cvpr:2025:gamma-three");
    CHECK(result.records[2].id == "cvpr:2025:epsilon-five");
}

TEST_CASE("an always-failing transport raises NetworkError after the retry budget") {
    std::atomic<int> calls{0};
    Transport failing = [&calls](const std::string&) -> HttpResponse {
        ++calls;
        return {500, "server error"};
    };
    HarvestJob job = test_job();
    job.retries = 3;
    job.backoff_start_seconds = 0.0;
    try {
        harvest(job, failing);
        FAIL("expected NetworkError");
    } catch (const NetworkError& e) {
        std::string what = e.what();
        CHECK(what.find("http://proc.test/cvpr/2025?page=1") != std::string::npos);
    }
    CHECK(calls.load() == 3);  // exactly the retry budget, no records emitted
}

TEST_CASE("a 404 on the first listing page is an error, later pages end pagination") {
    std::map<std::string, std::string> pages = fixture_pages();
    // Page 3 is absent from the map: the 404 simply ends pagination.
    HarvestResult ok = harvest(test_job(), map_transport(pages));
    CHECK(ok.report.fetched == 5);

    std::map<std::string, std::string> empty_site;
    HarvestJob job = test_job();
    job.retries = 2;
    job.backoff_start_seconds = 0.0;
    CHECK_THROWS_AS(harvest(job, map_transport(empty_site)), NetworkError);
}

TEST_CASE("unparsable detail pages become diagnostics and the run continues") {
    std::map<std::string, std::string> pages = fixture_pages();
    pages["http://proc.test/paper/gamma-three"] = "<html><body>no structure here</body></html>";
    HarvestResult result = harvest(test_job(), map_transport(pages));
    CHECK(result.report.fetched == 4);
    CHECK(result.report.failed == 1);
    REQUIRE(result.report.diagnostics.size() == 1);
    CHECK(result.report.diagnostics[0].message.find("gamma-three") != std::string::npos);
    REQUIRE(result.records.size() == 4);
}

TEST_CASE("harvest is deterministic against a fixed transport") {
    std::map<std::string, std::string> pages = fixture_pages();
    HarvestResult a = harvest(test_job(), map_transport(pages));
    HarvestResult b = harvest(test_job(), map_transport(pages));
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i] == b.records[i]);
    CHECK(a.report.fetched == b.report.fetched);
}

TEST_CASE("worker count does not change emitted records or their order") {
    std::map<std::string, std::string> pages = fixture_pages();
    HarvestJob job = test_job();
    job.max_in_flight = 1;
    HarvestResult serial = harvest(job, map_transport(pages));
    job.max_in_flight = 8;
    HarvestResult wide = harvest(job, map_transport(pages));
    REQUIRE(serial.records.size() == wide.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i)
        CHECK(serial.records[i] == wide.records[i]);
}

TEST_CASE("emitted records pass parse_records with zero diagnostics") {
    std::map<std::string, std::string> pages = fixture_pages();
    HarvestResult result = harvest(test_job(), map_transport(pages));
    std::string jsonl;
    for (const auto& r : result.records) {
        // Mirror the CLI's serialization shape.
        jsonl += "{\"id\":\"" + r.id + "\",\"venue\":\"" + r.venue +
                 "\",\"year\":" + std::to_string(r.year) + ",\"title\":\"" + r.title +
                 "\",\"abstract\":\"" + r.abstract + "\"}\n";
    }
    std::istringstream in(jsonl);
    ParseResult parsed = parse_records(in);
    CHECK(parsed.diagnostics.empty());
    CHECK(parsed.records.size() == result.records.size());
}

TEST_CASE("checkpoint file is appended during the run and loads back") {
    testsup::TempDir tmp("checkpoint");
    std::map<std::string, std::string> pages = fixture_pages();
    HarvestJob job = test_job();
    job.checkpoint_path = tmp.path() / "cp.txt";
    HarvestResult first = harvest(job, map_transport(pages));
    CHECK(first.report.fetched == 5);
    std::set<std::string> ids = load_checkpoint(job.checkpoint_path);
    CHECK(ids.size() == 5);
    CHECK(ids.count("cvpr:2025:alpha-one") == 1);

    // Restart with the written checkpoint: everything is skipped.
    job.checkpoint = ids;
    HarvestResult second = harvest(job, map_transport(pages));
    CHECK(second.report.fetched == 0);
    CHECK(second.report.skipped == 5);
}

TEST_CASE("load_checkpoint on a missing file is empty") {
    testsup::TempDir tmp("nocp");
    CHECK(load_checkpoint(tmp.path() / "absent.txt").empty());
}

TEST_CASE("the sink sees records in discovery order, each before its id is checkpointed") {
    testsup::TempDir tmp("sink");
    std::map<std::string, std::string> pages = fixture_pages();
    HarvestJob job = test_job();
    job.max_in_flight = 8;
    job.checkpoint_path = tmp.path() / "cp.txt";
    std::vector<std::string> delivered;
    job.on_record = [&](const PaperRecord& r) {
        // At delivery time the id must not be checkpointed yet: a checkpoint
        // entry promises the record has already been handed over.
        CHECK(load_checkpoint(job.checkpoint_path).count(r.id) == 0);
        delivered.push_back(r.id);
    };
    HarvestResult result = harvest(job, map_transport(pages));
    REQUIRE(result.records.size() == delivered.size());
    for (std::size_t i = 0; i < delivered.size(); ++i)
        CHECK(delivered[i] == result.records[i].id);
    CHECK(load_checkpoint(job.checkpoint_path).size() == 5);
}

TEST_CASE("an aborted run checkpoints only delivered records and a resume completes the set") {
    testsup::TempDir tmp("abort");
    std::map<std::string, std::string> pages = fixture_pages();
    std::string broken = "http://proc.test/paper/delta-four";

    HarvestJob job = test_job();
    job.max_in_flight = 1;
    job.retries = 2;
    job.backoff_start_seconds = 0.0;
    job.checkpoint_path = tmp.path() / "cp.txt";
    std::vector<std::string> delivered;
    job.on_record = [&delivered](const PaperRecord& r) { delivered.push_back(r.id); };

    Transport flaky = [&pages, &broken](const std::string& url) -> HttpResponse {
        if (url == broken) return {500, "server error"};
        return map_transport(pages)(url);
    };
    CHECK_THROWS_AS(harvest(job, flaky), NetworkError);
    // The crash point is the fourth paper, so exactly the first three were
    // delivered, and the checkpoint names exactly those three.
    REQUIRE(delivered.size() == 3);
    CHECK(delivered[2] == "cvpr:2025:gamma-three");
    std::set<std::string> cp = load_checkpoint(job.checkpoint_path);
    CHECK(cp == std::set<std::string>(delivered.begin(), delivered.end()));

    // Resume against a healed transport: the delivered records are skipped,
    // the rest arrive, and the union covers all five papers exactly once.
    job.checkpoint = cp;
    HarvestResult second = harvest(job, map_transport(pages));
    CHECK(second.report.skipped == 3);
    CHECK(second.report.fetched == 2);
    REQUIRE(delivered.size() == 5);
    std::set<std::string> unique(delivered.begin(), delivered.end());
    CHECK(unique.size() == 5);
    CHECK(load_checkpoint(job.checkpoint_path).size() == 5);
}

TEST_CASE("the rate limiter spaces request starts with injected clocks") {
    std::map<std::string, std::string> pages = fixture_pages();
    double clock = 0.0;
    HarvestJob job = test_job();
    job.rate_limit = 2.0;  // 0.5 s between request starts
    job.max_in_flight = 1;
    job.now = [&clock] { return clock; };
    job.sleep = [&clock](double seconds) { clock += seconds; };
    std::atomic<int> calls{0};
    HarvestResult result = harvest(job, map_transport(pages, &calls));
    CHECK(result.report.fetched == 5);
    // 3 listing fetches (page 3 is the terminating 404) + 5 detail fetches.
    CHECK(calls.load() == 8);
    CHECK(clock == doctest::Approx(0.5 * (8 - 1)).epsilon(1e-9));
}

TEST_CASE("the on-disk fixture transport maps urls to kebab-cased files") {
    std::filesystem::path dir = testsup::data_dir() / "fixtures";
    Transport transport = [dir](const std::string& url) -> HttpResponse {
        std::filesystem::path file = dir / (kebab_case(url) + ".html");
        std::ifstream in(file, std::ios::binary);
        if (!in) return {404, ""};
        std::ostringstream buf;
        buf << in.rdbuf();
        return {200, buf.str()};
    };
    HarvestResult result = harvest(test_job(), transport);
    CHECK(result.report.fetched == 5);
    CHECK(result.report.failed == 0);
}
