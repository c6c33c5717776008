#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "citeverify/jsonl.hpp"
#include "citeverify/refparse.hpp"

namespace citeverify {

enum class Source { Crossref, SemanticScholar, Fixture };

std::string source_name(Source s);

// A scholarly-index record normalized into the common shape all services
// share. Candidates from Crossref, Semantic Scholar, and the offline fixture
// are indistinguishable downstream except for `source`.
struct CandidateRecord {
    Source source = Source::Fixture;
    std::string title; // never empty
    std::vector<std::string> authors;
    std::optional<std::string> venue;
    std::optional<int> year;
    std::optional<std::string> doi;
};

json candidate_to_json(const CandidateRecord& rec);
CandidateRecord candidate_from_json(const json& obj);

// Maps a service-native payload (Crossref work message, S2 paper object, or a
// fixture entry) onto CandidateRecord. A record without a title is unusable
// and yields nullopt.
std::optional<CandidateRecord> normalize_record(const json& raw, Source source);

struct RetrievalConfig {
    int k = 5;                       // max candidates per title search
    double rate_limit_per_sec = 2.0; // outbound request ceiling, per service
    std::filesystem::path cache_dir;
    std::string contact;    // Crossref mailto etiquette
    std::string s2_api_key; // optional Semantic Scholar key
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};

    void validate() const;
};

enum class LookupKind { Doi, S2Title, CrossrefTitle };

std::string lookup_kind_name(LookupKind k);

// Outcome of the up-to-three-lookup protocol for one citation. A lookup that
// failed after retries is absent from lookups_attempted.
struct CandidateSet {
    int citation_index = 0;
    std::vector<CandidateRecord> candidates;
    std::set<LookupKind> lookups_attempted;
};

class RetrievalError : public std::runtime_error {
public:
    explicit RetrievalError(const std::string& what) : std::runtime_error(what) {}
};

enum class TitleService { SemanticScholar, Crossref };

class IndexBackend {
public:
    virtual ~IndexBackend() = default;

    // Direct DOI resolution (Crossref when live). Unresolvable DOI is a
    // normal miss (nullopt); RetrievalError signals the lookup itself failed.
    virtual std::optional<CandidateRecord> lookup_doi(const std::string& doi) = 0;

    // Title search returning at most k records in the service's native
    // relevance order.
    virtual std::vector<CandidateRecord> search_title(TitleService service,
                                                      const std::string& title, int k) = 0;
};

// Offline backend over a frozen record store. Relevance order for title
// search: shared normalized-token count with the query, descending, ties by
// insertion order.
class FixtureBackend : public IndexBackend {
public:
    explicit FixtureBackend(std::vector<CandidateRecord> records);
    // Loads `records.json` (a JSON array) from the fixture directory.
    explicit FixtureBackend(const std::filesystem::path& fixture_dir);

    std::optional<CandidateRecord> lookup_doi(const std::string& doi) override;
    std::vector<CandidateRecord> search_title(TitleService service, const std::string& title,
                                              int k) override;

    std::size_t size() const { return records_.size(); }

private:
    std::vector<CandidateRecord> records_;
};

// Immutable on-disk response cache: one JSON file per key, filename derived
// from a stable hash of the key. Safe for concurrent readers and writers.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<json> get(const std::string& key) const;
    void put(const std::string& key, const json& payload) const;

private:
    std::filesystem::path path_for(const std::string& key) const;
    std::filesystem::path dir_;
};

// Caching decorator. A cache hit issues zero calls on the inner backend, so
// repeated runs over an identical corpus are network-free after the first.
class CachedBackend : public IndexBackend {
public:
    CachedBackend(std::shared_ptr<IndexBackend> inner, const std::filesystem::path& cache_dir);

    std::optional<CandidateRecord> lookup_doi(const std::string& doi) override;
    std::vector<CandidateRecord> search_title(TitleService service, const std::string& title,
                                              int k) override;

private:
    std::shared_ptr<IndexBackend> inner_;
    ResponseCache cache_;
};

// Clock seam so rate limiting and backoff are testable without waiting.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::steady_clock::time_point now() = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock : public Clock {
public:
    std::chrono::steady_clock::time_point now() override;
    void sleep_for(std::chrono::milliseconds d) override;
};

// Enforces a minimum spacing of 1/rate seconds between acquisitions.
class RateLimiter {
public:
    RateLimiter(Clock& clock, double rate_per_sec);
    void acquire();

private:
    Clock& clock_;
    std::chrono::milliseconds min_interval_;
    std::optional<std::chrono::steady_clock::time_point> last_;
    std::mutex mutex_;
};

struct HttpResponse {
    bool transport_ok = false;
    int status = 0;
    std::string body;
    std::string error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string& host, const std::string& path) = 0;
};

// Real transport over cpp-httplib. Requires OpenSSL support at build time for
// the https:// scheme both live services use.
std::unique_ptr<HttpTransport> make_httplib_transport(const RetrievalConfig& cfg);

// Live backend speaking the Crossref REST API and the Semantic Scholar Graph
// API, with per-service rate limiting and bounded exponential-backoff retries
// on transport failures and 429/5xx responses.
class LiveBackend : public IndexBackend {
public:
    LiveBackend(std::unique_ptr<HttpTransport> transport, RetrievalConfig cfg);
    LiveBackend(HttpTransport& transport, Clock& clock, RetrievalConfig cfg); // non-owning, for tests

    std::optional<CandidateRecord> lookup_doi(const std::string& doi) override;
    std::vector<CandidateRecord> search_title(TitleService service, const std::string& title,
                                              int k) override;

private:
    HttpResponse request_with_retry(const std::string& host, const std::string& path,
                                    RateLimiter& limiter, const std::string& what,
                                    bool* not_found);

    std::unique_ptr<HttpTransport> owned_transport_;
    std::unique_ptr<Clock> owned_clock_;
    HttpTransport* transport_;
    Clock* clock_;
    RetrievalConfig cfg_;
    std::unique_ptr<RateLimiter> crossref_limiter_;
    std::unique_ptr<RateLimiter> s2_limiter_;
};

// Runs the three-lookup protocol for one parsed citation: DOI lookup when the
// citation carries a syntactically valid DOI, then both title searches when a
// title was parsed. Results are concatenated in that order and de-duplicated
// by lowercase DOI. Individual lookup failures degrade gracefully; only all
// applicable lookups failing raises RetrievalError.
CandidateSet retrieve_candidates(const ParsedCitation& parsed, const RetrievalConfig& cfg,
                                 IndexBackend& backend);

// Query-url helpers, exposed for tests.
std::string url_encode(const std::string& s);
std::string cache_key(const std::string& service, const std::string& kind,
                      const std::string& query);

} // namespace citeverify
