#pragma once

#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "trendlex/record_store.hpp"

namespace trendlex {

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Injected fetch function; tests use fixture maps, the CLI wires a real
// client. Must be callable from multiple threads.
using Transport = std::function<HttpResponse(const std::string& url)>;

// Shapes a proceedings site: a paginated index of links plus a detail page
// with title/abstract regions, all configured as regex patterns.
struct EndpointConfig {
    std::string listing_url;              // template with {venue}, {year}, {page}
    std::string listing_link_pattern;     // first capture group: detail URL
    std::string detail_url_prefix;        // prepended to relative links
    std::string detail_title_pattern;     // first capture group: title
    std::string detail_abstract_pattern;  // first capture group: abstract
    int first_page = 1;
    int max_pages = 64;
};

struct HarvestJob {
    std::string venue;
    int year = 0;
    EndpointConfig endpoint;
    std::set<std::string> checkpoint;         // ids already fetched by earlier runs
    std::filesystem::path checkpoint_path;    // appended during the run; empty = off
    double rate_limit = 1.0;                  // requests per second, > 0
    int retries = 3;                          // attempts per URL
    double backoff_start_seconds = 1.0;       // doubles per failed attempt
    int max_in_flight = 4;

    // Optional streaming sink, called once per emitted record, in discovery
    // order, during the run. A record reaches the sink before its id is
    // appended to the checkpoint file, so a sink that persists records keeps
    // the (records, checkpoint) pair consistent across interrupted runs:
    // whatever the checkpoint says was fetched has already been handed over.
    std::function<void(const PaperRecord&)> on_record;

    // Injectable timing for tests; defaults are the monotonic clock and a
    // real sleep.
    std::function<double()> now;
    std::function<void(double)> sleep;
};

struct HarvestReport {
    std::size_t fetched = 0;  // records emitted this run
    std::size_t skipped = 0;  // checkpoint hits
    std::size_t failed = 0;   // detail pages that would not parse
    std::vector<Diagnostic> diagnostics;
};

struct HarvestResult {
    std::vector<PaperRecord> records;  // discovery order
    HarvestReport report;
};

// Walks listing pages until one yields no links, fetches each unseen detail
// page (at most max_in_flight concurrently, all sharing one rate limiter),
// and emits records in discovery order. Transport failures that survive the
// retry budget raise NetworkError with the failing URL; unparsable detail
// payloads become diagnostics and the run continues.
HarvestResult harvest(const HarvestJob& job, const Transport& transport);

std::string expand_url(const std::string& url_template, const std::string& venue, int year,
                       int page);

std::set<std::string> load_checkpoint(const std::filesystem::path& path);

// Real HTTP transport (honors http_proxy/https_proxy when set).
Transport make_http_transport();

}  // namespace trendlex
