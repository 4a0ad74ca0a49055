#include "trendlex/harvester.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include <boost/regex.hpp>
#include <httplib.h>

#include "trendlex/errors.hpp"
#include "trendlex/parallel.hpp"

namespace trendlex {

namespace {

HttpResponse http_get(const std::string& host_port, const std::string& path) {
    httplib::Client client("http://" + host_port);
    client.set_follow_location(true);
    if (const char* proxy = std::getenv("http_proxy")) {
        std::string p = proxy;
        std::size_t scheme = p.find("://");
        if (scheme != std::string::npos) p = p.substr(scheme + 3);
        while (!p.empty() && p.back() == '/') p.pop_back();
        std::size_t colon = p.find(':');
        if (colon != std::string::npos) {
            try {
                client.set_proxy(p.substr(0, colon), std::stoi(p.substr(colon + 1)));
            } catch (const std::exception&) {
                // Unusable proxy spec; fall through to a direct connection.
            }
        }
    }
    auto res = client.Get(path);
    if (!res) return {0, "connection failed"};
    return {res->status, res->body};
}

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

// Shared pacing for every request of one run: call starts are spaced at least
// 1/rate_limit seconds apart regardless of which worker issues them.
class RateLimiter {
public:
    RateLimiter(double rate, std::function<double()> now, std::function<void(double)> sleep)
        : interval_(1.0 / rate), now_(std::move(now)), sleep_(std::move(sleep)) {}

    void acquire() {
        double wait = 0.0;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            double t = now_();
            if (!primed_ || t >= next_) {
                next_ = t + interval_;
                primed_ = true;
                return;
            }
            wait = next_ - t;
            next_ += interval_;
        }
        sleep_(wait);
    }

private:
    double interval_;
    std::function<double()> now_;
    std::function<void(double)> sleep_;
    std::mutex mutex_;
    double next_ = 0.0;
    bool primed_ = false;
};

std::string decode_entities(const std::string& text) {
    std::string out;
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '&') {
            static const std::pair<const char*, char> kEntities[] = {
                {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&#39;", '\''},
            };
            bool replaced = false;
            for (const auto& [name, ch] : kEntities) {
                std::size_t len = std::char_traits<char>::length(name);
                if (text.compare(i, len, name) == 0) {
                    out += ch;
                    i += len;
                    replaced = true;
                    break;
                }
            }
            if (replaced) continue;
        }
        out += text[i++];
    }
    return out;
}

std::string tidy_capture(const std::string& raw) {
    // Strip tags, decode the common entities, collapse whitespace runs.
    std::string no_tags;
    bool in_tag = false;
    for (char c : raw) {
        if (c == '<') in_tag = true;
        else if (c == '>') in_tag = false;
        else if (!in_tag) no_tags += c;
    }
    std::string decoded = decode_entities(no_tags);
    std::string out;
    bool pending_space = false;
    for (char c : decoded) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

std::string paper_key(const std::string& url) {
    std::string path = url;
    std::size_t cut = path.find_first_of("?#");
    if (cut != std::string::npos) path.resize(cut);
    while (!path.empty() && path.back() == '/') path.pop_back();
    std::size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

boost::regex compile(const std::string& pattern, const std::string& what) {
    try {
        return boost::regex(pattern, boost::regex_constants::perl);
    } catch (const boost::regex_error& e) {
        throw ConfigError("endpoint " + what + " pattern: " + e.what());
    }
}

struct Fetcher {
    const HarvestJob& job;
    const Transport& transport;
    RateLimiter& limiter;

    // Returns the body, or throws NetworkError once the retry budget is gone.
    std::string fetch(const std::string& url, bool* not_found = nullptr) const {
        std::string detail = "no attempts made";
        for (int attempt = 1; attempt <= job.retries; ++attempt) {
            limiter.acquire();
            HttpResponse response;
            try {
                response = transport(url);
            } catch (const std::exception& e) {
                response.status = 0;
                detail = e.what();
            }
            if (response.status == 200) return response.body;
            if (response.status == 404 && not_found) {
                *not_found = true;
                return {};
            }
            if (response.status != 0) detail = "status " + std::to_string(response.status);
            if (attempt < job.retries)
                job.sleep(job.backoff_start_seconds * static_cast<double>(1 << (attempt - 1)));
        }
        throw NetworkError(url, detail + " after " + std::to_string(job.retries) + " attempts");
    }
};

}  // namespace

std::string expand_url(const std::string& url_template, const std::string& venue, int year,
                       int page) {
    std::string url = replace_all(url_template, "{venue}", venue);
    url = replace_all(url, "{year}", std::to_string(year));
    return replace_all(url, "{page}", std::to_string(page));
}

std::set<std::string> load_checkpoint(const std::filesystem::path& path) {
    std::set<std::string> ids;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.insert(line);
    }
    return ids;
}

HarvestResult harvest(const HarvestJob& job, const Transport& transport) {
    if (job.rate_limit <= 0.0) throw BadArgument("harvest: rate_limit must be > 0");
    if (job.retries < 1) throw BadArgument("harvest: retries must be >= 1");
    if (!transport) throw BadArgument("harvest: no transport");

    auto now = job.now ? job.now : [] {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    };
    auto sleep = job.sleep ? job.sleep : [](double seconds) {
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    };

    HarvestJob timed = job;
    timed.now = now;
    timed.sleep = sleep;
    RateLimiter limiter(job.rate_limit, now, sleep);
    Fetcher fetcher{timed, transport, limiter};

    boost::regex link_re = compile(job.endpoint.listing_link_pattern, "listing_link");
    boost::regex title_re = compile(job.endpoint.detail_title_pattern, "detail_title");
    boost::regex abstract_re = compile(job.endpoint.detail_abstract_pattern, "detail_abstract");

    // Phase 1: walk listing pages in order; pagination ends at the first page
    // with no links (or a 404 past the first page).
    std::vector<std::string> detail_urls;
    std::set<std::string> seen_urls;
    for (int page = job.endpoint.first_page;
         page < job.endpoint.first_page + job.endpoint.max_pages; ++page) {
        std::string url = expand_url(job.endpoint.listing_url, job.venue, job.year, page);
        bool not_found = false;
        std::string body =
            fetcher.fetch(url, page == job.endpoint.first_page ? nullptr : &not_found);
        if (not_found) break;
        std::size_t found = 0;
        auto it = boost::sregex_iterator(body.begin(), body.end(), link_re);
        for (; it != boost::sregex_iterator(); ++it) {
            std::string link = it->size() > 1 ? it->str(1) : it->str(0);
            if (link.rfind("http", 0) != 0) link = job.endpoint.detail_url_prefix + link;
            ++found;
            if (seen_urls.insert(link).second) detail_urls.push_back(link);
        }
        if (found == 0) break;
    }

    HarvestResult result;
    std::vector<std::string> pending;
    for (const auto& url : detail_urls) {
        std::string id = job.venue + ":" + std::to_string(job.year) + ":" + paper_key(url);
        if (job.checkpoint.count(id)) {
            ++result.report.skipped;
            continue;
        }
        pending.push_back(url);
    }

    // Phase 2: fetch detail pages, at most max_in_flight at a time. Slots are
    // indexed by discovery order and drained through a watermark: a slot is
    // emitted (sink call, then checkpoint append + flush) only once every
    // earlier slot has finished, so emission order never depends on timing,
    // and an id reaches the checkpoint only after its record has been handed
    // to the sink. If the run dies mid-way, the checkpoint never names a
    // record the caller has not received; a resume refetches at most the
    // slots past the watermark. Pages that fetched but failed to parse are
    // checkpointed too — refetching would reproduce the same broken page.
    struct Slot {
        bool done = false;
        bool ok = false;
        PaperRecord record;
        std::string diagnostic;
    };
    std::vector<Slot> slots(pending.size());
    std::vector<std::string> ids(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i)
        ids[i] = job.venue + ":" + std::to_string(job.year) + ":" + paper_key(pending[i]);

    std::mutex emit_mutex;
    std::size_t watermark = 0;
    bool emit_dead = false;  // a sink throw stops draining so no slot is emitted twice
    std::ofstream checkpoint_out;
    if (!job.checkpoint_path.empty())
        checkpoint_out.open(job.checkpoint_path, std::ios::app);

    parallel_for(pending.size(), job.max_in_flight, [&](std::size_t i) {
        const std::string& url = pending[i];
        std::string body = fetcher.fetch(url);
        boost::smatch title_m, abstract_m;
        if (!boost::regex_search(body, title_m, title_re)) {
            slots[i].diagnostic = "detail page " + url + ": title pattern found nothing";
        } else if (!boost::regex_search(body, abstract_m, abstract_re)) {
            slots[i].diagnostic = "detail page " + url + ": abstract pattern found nothing";
        } else {
            PaperRecord record;
            record.id = ids[i];
            record.venue = job.venue;
            record.year = job.year;
            record.title = tidy_capture(title_m.size() > 1 ? title_m.str(1) : title_m.str(0));
            record.abstract =
                tidy_capture(abstract_m.size() > 1 ? abstract_m.str(1) : abstract_m.str(0));
            if (record.title.empty() || record.abstract.empty()) {
                slots[i].diagnostic = "detail page " + url + ": empty title or abstract";
            } else {
                slots[i].ok = true;
                slots[i].record = std::move(record);
            }
        }
        std::lock_guard<std::mutex> lock(emit_mutex);
        slots[i].done = true;
        if (emit_dead) return;
        try {
            while (watermark < slots.size() && slots[watermark].done) {
                const Slot& ready = slots[watermark];
                if (ready.ok && job.on_record) job.on_record(ready.record);
                if (checkpoint_out.is_open()) {
                    checkpoint_out << ids[watermark] << '\n';
                    checkpoint_out.flush();
                }
                ++watermark;
            }
        } catch (...) {
            emit_dead = true;
            throw;
        }
    });

    for (auto& slot : slots) {
        if (slot.ok) {
            result.records.push_back(std::move(slot.record));
            ++result.report.fetched;
        } else {
            ++result.report.failed;
            result.report.diagnostics.push_back({0, slot.diagnostic});
        }
    }
    return result;
}

Transport make_http_transport() {
    return [](const std::string& url) -> HttpResponse {
        std::size_t scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return {0, "malformed url"};
        std::string scheme = url.substr(0, scheme_end);
        if (scheme != "http") return {0, "only plain http is supported by this build"};
        std::size_t host_begin = scheme_end + 3;
        std::size_t path_begin = url.find('/', host_begin);
        std::string host_port = url.substr(
            host_begin, path_begin == std::string::npos ? std::string::npos
                                                        : path_begin - host_begin);
        std::string path =
            path_begin == std::string::npos ? "/" : url.substr(path_begin);
        return http_get(host_port, path);
    };
}

}  // namespace trendlex
