#ifdef CITEVERIFY_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include "citeverify/index.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>

#include "citeverify/match.hpp"

namespace citeverify {

namespace {

constexpr const char* kCrossrefHost = "api.crossref.org";
constexpr const char* kS2Host = "api.semanticscholar.org";

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool doi_shape_ok(const std::string& doi) {
    static const std::regex kDoi(R"(10\.\d{4,9}/\S+)");
    return std::regex_match(doi, kDoi);
}

std::optional<int> coerce_year(const json& value) {
    if (value.is_number_integer()) return value.get<int>();
    if (value.is_string()) {
        try {
            return std::stoi(value.get<std::string>());
        } catch (...) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<CandidateRecord> normalize_crossref(const json& raw) {
    CandidateRecord rec;
    rec.source = Source::Crossref;
    if (!raw.contains("title") || !raw["title"].is_array() || raw["title"].empty())
        return std::nullopt;
    rec.title = raw["title"][0].get<std::string>();
    if (rec.title.empty()) return std::nullopt;

    if (raw.contains("author") && raw["author"].is_array()) {
        for (const auto& a : raw["author"]) {
            const std::string family = a.value("family", std::string());
            const std::string given = a.value("given", std::string());
            if (family.empty() && given.empty()) continue;
            if (family.empty())
                rec.authors.push_back(given);
            else if (given.empty())
                rec.authors.push_back(family);
            else
                rec.authors.push_back(family + ", " + given);
        }
    }
    if (raw.contains("container-title") && raw["container-title"].is_array() &&
        !raw["container-title"].empty()) {
        const std::string venue = raw["container-title"][0].get<std::string>();
        if (!venue.empty()) rec.venue = venue;
    }
    for (const char* key : {"issued", "published-print", "published-online", "created"}) {
        if (!raw.contains(key)) continue;
        const auto& date = raw[key];
        if (date.contains("date-parts") && date["date-parts"].is_array() &&
            !date["date-parts"].empty() && date["date-parts"][0].is_array() &&
            !date["date-parts"][0].empty()) {
            rec.year = coerce_year(date["date-parts"][0][0]);
            if (rec.year) break;
        }
    }
    if (raw.contains("DOI") && raw["DOI"].is_string()) {
        const std::string doi = raw["DOI"].get<std::string>();
        if (!doi.empty()) rec.doi = lowercase(doi);
    }
    return rec;
}

std::optional<CandidateRecord> normalize_s2(const json& raw) {
    CandidateRecord rec;
    rec.source = Source::SemanticScholar;
    if (!raw.contains("title") || !raw["title"].is_string()) return std::nullopt;
    rec.title = raw["title"].get<std::string>();
    if (rec.title.empty()) return std::nullopt;

    if (raw.contains("authors") && raw["authors"].is_array()) {
        for (const auto& a : raw["authors"]) {
            const std::string name = a.value("name", std::string());
            if (!name.empty()) rec.authors.push_back(name);
        }
    }
    if (raw.contains("venue") && raw["venue"].is_string()) {
        const std::string venue = raw["venue"].get<std::string>();
        if (!venue.empty()) rec.venue = venue;
    }
    if (raw.contains("year") && !raw["year"].is_null()) rec.year = coerce_year(raw["year"]);
    if (raw.contains("externalIds") && raw["externalIds"].is_object() &&
        raw["externalIds"].contains("DOI") && raw["externalIds"]["DOI"].is_string()) {
        const std::string doi = raw["externalIds"]["DOI"].get<std::string>();
        if (!doi.empty()) rec.doi = lowercase(doi);
    }
    return rec;
}

std::optional<CandidateRecord> normalize_fixture(const json& raw) {
    CandidateRecord rec;
    rec.source = Source::Fixture;
    if (!raw.contains("title") || !raw["title"].is_string()) return std::nullopt;
    rec.title = raw["title"].get<std::string>();
    if (rec.title.empty()) return std::nullopt;

    if (raw.contains("authors") && raw["authors"].is_array())
        rec.authors = raw["authors"].get<std::vector<std::string>>();
    if (raw.contains("venue") && raw["venue"].is_string() && !raw["venue"].get<std::string>().empty())
        rec.venue = raw["venue"].get<std::string>();
    if (raw.contains("year") && !raw["year"].is_null()) rec.year = coerce_year(raw["year"]);
    if (raw.contains("doi") && raw["doi"].is_string() && !raw["doi"].get<std::string>().empty())
        rec.doi = lowercase(raw["doi"].get<std::string>());
    return rec;
}

} // namespace

std::string source_name(Source s) {
    switch (s) {
        case Source::Crossref: return "crossref";
        case Source::SemanticScholar: return "semantic_scholar";
        case Source::Fixture: return "fixture";
    }
    return "fixture";
}

json candidate_to_json(const CandidateRecord& rec) {
    json obj;
    obj["source"] = source_name(rec.source);
    obj["title"] = rec.title;
    obj["authors"] = rec.authors;
    obj["venue"] = rec.venue ? json(*rec.venue) : json(nullptr);
    obj["year"] = rec.year ? json(*rec.year) : json(nullptr);
    obj["doi"] = rec.doi ? json(*rec.doi) : json(nullptr);
    return obj;
}

CandidateRecord candidate_from_json(const json& obj) {
    CandidateRecord rec;
    const std::string source = obj.value("source", "fixture");
    if (source == "crossref")
        rec.source = Source::Crossref;
    else if (source == "semantic_scholar")
        rec.source = Source::SemanticScholar;
    else
        rec.source = Source::Fixture;
    rec.title = obj.at("title").get<std::string>();
    if (obj.contains("authors")) rec.authors = obj["authors"].get<std::vector<std::string>>();
    if (obj.contains("venue") && !obj["venue"].is_null())
        rec.venue = obj["venue"].get<std::string>();
    if (obj.contains("year") && !obj["year"].is_null()) rec.year = obj["year"].get<int>();
    if (obj.contains("doi") && !obj["doi"].is_null()) rec.doi = obj["doi"].get<std::string>();
    return rec;
}

std::optional<CandidateRecord> normalize_record(const json& raw, Source source) {
    switch (source) {
        case Source::Crossref: return normalize_crossref(raw);
        case Source::SemanticScholar: return normalize_s2(raw);
        case Source::Fixture: return normalize_fixture(raw);
    }
    return std::nullopt;
}

void RetrievalConfig::validate() const {
    if (k < 1) throw InputError("retrieval k must be >= 1");
    if (rate_limit_per_sec <= 0.0) throw InputError("rate limit must be > 0");
    if (max_attempts < 1) throw InputError("max_attempts must be >= 1");
}

std::string lookup_kind_name(LookupKind k) {
    switch (k) {
        case LookupKind::Doi: return "doi";
        case LookupKind::S2Title: return "s2_title";
        case LookupKind::CrossrefTitle: return "crossref_title";
    }
    return "doi";
}

FixtureBackend::FixtureBackend(std::vector<CandidateRecord> records)
    : records_(std::move(records)) {}

FixtureBackend::FixtureBackend(const std::filesystem::path& fixture_dir) {
    const auto file = fixture_dir / "records.json";
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("fixture index not found: " + file.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw InputError("fixture index must be a JSON array: " + file.string());
    for (const auto& entry : doc) {
        auto rec = normalize_fixture(entry);
        if (rec) records_.push_back(std::move(*rec));
    }
}

std::optional<CandidateRecord> FixtureBackend::lookup_doi(const std::string& doi) {
    const std::string needle = lowercase(doi);
    for (const auto& rec : records_)
        if (rec.doi && lowercase(*rec.doi) == needle) return rec;
    return std::nullopt;
}

std::vector<CandidateRecord> FixtureBackend::search_title(TitleService, const std::string& title,
                                                          int k) {
    const auto query_tokens = normalize_text(title);
    const std::unordered_set<std::string> query(query_tokens.begin(), query_tokens.end());

    std::vector<std::pair<std::size_t, std::size_t>> hits; // (shared tokens, index)
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto tokens = normalize_text(records_[i].title);
        const std::unordered_set<std::string> distinct(tokens.begin(), tokens.end());
        std::size_t shared = 0;
        for (const auto& tok : distinct)
            if (query.count(tok)) ++shared;
        if (shared > 0) hits.emplace_back(shared, i);
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<CandidateRecord> out;
    for (const auto& [shared, idx] : hits) {
        if (static_cast<int>(out.size()) >= k) break;
        out.push_back(records_[idx]);
    }
    return out;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / (fnv1a64_hex(key) + ".json");
}

std::optional<json> ResponseCache::get(const std::string& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) return std::nullopt;
    return doc;
}

void ResponseCache::put(const std::string& key, const json& payload) const {
    const auto path = path_for(key);
    if (std::filesystem::exists(path)) return; // entries are immutable
    write_file_atomic(path, payload.dump(2) + "\n");
}

CachedBackend::CachedBackend(std::shared_ptr<IndexBackend> inner,
                             const std::filesystem::path& cache_dir)
    : inner_(std::move(inner)), cache_(cache_dir) {}

std::optional<CandidateRecord> CachedBackend::lookup_doi(const std::string& doi) {
    const std::string key = cache_key("crossref", "doi", lowercase(doi));
    if (auto hit = cache_.get(key)) {
        if (!hit->value("found", false)) return std::nullopt;
        return candidate_from_json((*hit)["record"]);
    }
    auto result = inner_->lookup_doi(doi);
    json payload;
    payload["found"] = result.has_value();
    if (result) payload["record"] = candidate_to_json(*result);
    cache_.put(key, payload);
    return result;
}

std::vector<CandidateRecord> CachedBackend::search_title(TitleService service,
                                                         const std::string& title, int k) {
    const std::string service_name =
        service == TitleService::SemanticScholar ? "semantic_scholar" : "crossref";
    const std::string key =
        cache_key(service_name, "title", normalize_join(title) + "|k=" + std::to_string(k));
    if (auto hit = cache_.get(key)) {
        std::vector<CandidateRecord> out;
        for (const auto& rec : (*hit)["records"]) out.push_back(candidate_from_json(rec));
        return out;
    }
    auto results = inner_->search_title(service, title, k);
    json payload;
    payload["records"] = json::array();
    for (const auto& rec : results) payload["records"].push_back(candidate_to_json(rec));
    cache_.put(key, payload);
    return results;
}

std::chrono::steady_clock::time_point SystemClock::now() {
    return std::chrono::steady_clock::now();
}

void SystemClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

RateLimiter::RateLimiter(Clock& clock, double rate_per_sec)
    : clock_(clock),
      min_interval_(static_cast<long long>(1000.0 / rate_per_sec)) {}

void RateLimiter::acquire() {
    std::lock_guard<std::mutex> lock(mutex_);
    auto now = clock_.now();
    if (last_) {
        const auto ready = *last_ + min_interval_;
        if (now < ready) {
            clock_.sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(ready - now));
            now = clock_.now();
            if (now < ready) now = ready; // clocks that do not advance on sleep
        }
    }
    last_ = now;
}

namespace {

class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(RetrievalConfig cfg) : cfg_(std::move(cfg)) {}

    HttpResponse get(const std::string& host, const std::string& path) override {
        HttpResponse out;
#ifndef CITEVERIFY_HAVE_OPENSSL
        out.error = "https support not built (OpenSSL missing); use the fixture backend";
        (void)host;
        (void)path;
        return out;
#else
        httplib::Client client("https://" + host);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(30, 0);
        client.set_follow_location(true);
        httplib::Headers headers;
        std::string agent = "citeverify/0.1";
        if (!cfg_.contact.empty()) agent += " (mailto:" + cfg_.contact + ")";
        headers.emplace("User-Agent", agent);
        if (host == kS2Host && !cfg_.s2_api_key.empty())
            headers.emplace("x-api-key", cfg_.s2_api_key);

        auto result = client.Get(path, headers);
        if (!result) {
            out.error = httplib::to_string(result.error());
            return out;
        }
        out.transport_ok = true;
        out.status = result->status;
        out.body = result->body;
        return out;
#endif
    }

private:
    RetrievalConfig cfg_;
};

} // namespace

std::unique_ptr<HttpTransport> make_httplib_transport(const RetrievalConfig& cfg) {
    return std::make_unique<HttplibTransport>(cfg);
}

LiveBackend::LiveBackend(std::unique_ptr<HttpTransport> transport, RetrievalConfig cfg)
    : owned_transport_(std::move(transport)),
      owned_clock_(std::make_unique<SystemClock>()),
      transport_(owned_transport_.get()),
      clock_(owned_clock_.get()),
      cfg_(std::move(cfg)) {
    cfg_.validate();
    crossref_limiter_ = std::make_unique<RateLimiter>(*clock_, cfg_.rate_limit_per_sec);
    s2_limiter_ = std::make_unique<RateLimiter>(*clock_, cfg_.rate_limit_per_sec);
}

LiveBackend::LiveBackend(HttpTransport& transport, Clock& clock, RetrievalConfig cfg)
    : transport_(&transport), clock_(&clock), cfg_(std::move(cfg)) {
    cfg_.validate();
    crossref_limiter_ = std::make_unique<RateLimiter>(*clock_, cfg_.rate_limit_per_sec);
    s2_limiter_ = std::make_unique<RateLimiter>(*clock_, cfg_.rate_limit_per_sec);
}

HttpResponse LiveBackend::request_with_retry(const std::string& host, const std::string& path,
                                             RateLimiter& limiter, const std::string& what,
                                             bool* not_found) {
    if (not_found) *not_found = false;
    auto backoff = cfg_.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        limiter.acquire();
        const HttpResponse resp = transport_->get(host, path);
        if (resp.transport_ok) {
            if (resp.status == 200) return resp;
            if (resp.status == 404) {
                if (not_found) *not_found = true;
                return resp;
            }
            if (resp.status == 429 || resp.status >= 500) {
                last_error = "HTTP " + std::to_string(resp.status);
            } else {
                throw RetrievalError(what + ": HTTP " + std::to_string(resp.status));
            }
        } else {
            last_error = resp.error.empty() ? "transport error" : resp.error;
        }
        if (attempt < cfg_.max_attempts) {
            clock_->sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw RetrievalError(what + " failed after " + std::to_string(cfg_.max_attempts) +
                         " attempts: " + last_error);
}

std::optional<CandidateRecord> LiveBackend::lookup_doi(const std::string& doi) {
    std::string path = "/works/" + url_encode(doi);
    if (!cfg_.contact.empty()) path += "?mailto=" + url_encode(cfg_.contact);
    bool not_found = false;
    const HttpResponse resp =
        request_with_retry(kCrossrefHost, path, *crossref_limiter_, "doi lookup " + doi, &not_found);
    if (not_found) return std::nullopt;
    json doc = json::parse(resp.body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("message"))
        throw RetrievalError("doi lookup " + doi + ": malformed response");
    return normalize_record(doc["message"], Source::Crossref);
}

std::vector<CandidateRecord> LiveBackend::search_title(TitleService service,
                                                       const std::string& title, int k) {
    std::string host, path, what;
    RateLimiter* limiter = nullptr;
    if (service == TitleService::SemanticScholar) {
        host = kS2Host;
        path = "/graph/v1/paper/search?query=" + url_encode(title) +
               "&limit=" + std::to_string(k) + "&fields=title,authors,venue,year,externalIds";
        what = "s2 title search";
        limiter = s2_limiter_.get();
    } else {
        host = kCrossrefHost;
        path = "/works?query.title=" + url_encode(title) + "&rows=" + std::to_string(k);
        if (!cfg_.contact.empty()) path += "&mailto=" + url_encode(cfg_.contact);
        what = "crossref title search";
        limiter = crossref_limiter_.get();
    }

    bool not_found = false;
    const HttpResponse resp = request_with_retry(host, path, *limiter, what, &not_found);
    if (not_found) return {};
    json doc = json::parse(resp.body, nullptr, false);
    if (doc.is_discarded()) throw RetrievalError(what + ": malformed response");

    std::vector<CandidateRecord> out;
    if (service == TitleService::SemanticScholar) {
        if (doc.contains("data") && doc["data"].is_array())
            for (const auto& raw : doc["data"]) {
                if (static_cast<int>(out.size()) >= k) break;
                if (auto rec = normalize_record(raw, Source::SemanticScholar))
                    out.push_back(std::move(*rec));
            }
    } else {
        if (doc.contains("message") && doc["message"].contains("items") &&
            doc["message"]["items"].is_array())
            for (const auto& raw : doc["message"]["items"]) {
                if (static_cast<int>(out.size()) >= k) break;
                if (auto rec = normalize_record(raw, Source::Crossref))
                    out.push_back(std::move(*rec));
            }
    }
    return out;
}

CandidateSet retrieve_candidates(const ParsedCitation& parsed, const RetrievalConfig& cfg,
                                 IndexBackend& backend) {
    cfg.validate();
    CandidateSet out;
    out.citation_index = parsed.citation_index;
    if (!parsed.parse_ok) return out;

    const bool doi_applicable = parsed.doi && doi_shape_ok(*parsed.doi);
    const bool title_applicable = parsed.title && !normalize_text(*parsed.title).empty();

    struct LookupFailure {
        LookupKind kind;
        std::string message;
    };
    std::vector<LookupFailure> failures;
    std::vector<CandidateRecord> merged;

    if (doi_applicable) {
        try {
            if (auto rec = backend.lookup_doi(*parsed.doi)) merged.push_back(std::move(*rec));
            out.lookups_attempted.insert(LookupKind::Doi);
        } catch (const RetrievalError& e) {
            failures.push_back({LookupKind::Doi, e.what()});
        }
    }
    if (title_applicable) {
        for (TitleService service : {TitleService::SemanticScholar, TitleService::Crossref}) {
            const LookupKind kind = service == TitleService::SemanticScholar
                                        ? LookupKind::S2Title
                                        : LookupKind::CrossrefTitle;
            try {
                auto results = backend.search_title(service, *parsed.title, cfg.k);
                for (auto& rec : results) merged.push_back(std::move(rec));
                out.lookups_attempted.insert(kind);
            } catch (const RetrievalError& e) {
                failures.push_back({kind, e.what()});
            }
        }
    }

    const std::size_t applicable = (doi_applicable ? 1u : 0u) + (title_applicable ? 2u : 0u);
    if (applicable > 0 && out.lookups_attempted.empty()) {
        std::string detail;
        for (const auto& f : failures) {
            if (!detail.empty()) detail += "; ";
            detail += lookup_kind_name(f.kind) + ": " + f.message;
        }
        throw RetrievalError("all lookups failed for citation " +
                             std::to_string(parsed.citation_index) + " (" + detail + ")");
    }

    // De-dup: lowercase DOI when both records carry one; first wins.
    std::unordered_set<std::string> seen_dois;
    for (auto& rec : merged) {
        if (rec.doi) {
            const std::string key = lowercase(*rec.doi);
            if (!seen_dois.insert(key).second) continue;
        }
        out.candidates.push_back(std::move(rec));
    }
    return out;
}

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0x0f];
        }
    }
    return out;
}

std::string cache_key(const std::string& service, const std::string& kind,
                      const std::string& query) {
    return service + "|" + kind + "|" + query;
}

} // namespace citeverify
