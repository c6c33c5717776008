#include "citeverify/refparse.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "citeverify/match.hpp"

namespace citeverify {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

bool is_reference_heading(const std::string& line) {
    std::string stripped;
    for (char c : line)
        if (c != '#' && c != '*' && c != '_') stripped += c;
    stripped = trim(stripped);
    if (!stripped.empty() && stripped.back() == ':') stripped.pop_back();
    const std::string key = lower(trim(stripped));
    return key == "references" || key == "bibliography" || key == "works cited" ||
           key == "reference list";
}

// Matches "[3]", "3.", "3)" at the start of a line; 4-digit prefixes are
// rejected so a year beginning a wrapped line is not mistaken for a marker.
const std::regex kEntryMarker(R"(^\s*(?:\[(\d{1,3})\]|(\d{1,3})[.)]\s))");
const std::regex kBulletMarker(R"(^\s*[-•*]\s+)");

bool has_entry_marker(const std::string& line) {
    return std::regex_search(line, kEntryMarker);
}

std::string strip_entry_marker(const std::string& line) {
    return std::regex_replace(line, kEntryMarker, "");
}

const std::regex kTitleLabel(R"((^|\n)\s*[Tt]itle\s*:)");

bool has_alnum(const std::string& s) {
    return std::any_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isalnum(c) != 0; });
}

// Pulls numbered entries out of a line span; wrapped lines join the entry
// they continue. Returns empty when no marker is present.
std::vector<std::string> collect_numbered(const std::vector<std::string>& lines,
                                          std::size_t begin) {
    std::vector<std::string> entries;
    for (std::size_t i = begin; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (has_entry_marker(line)) {
            entries.push_back(trim(strip_entry_marker(line)));
        } else if (!entries.empty() && !trim(line).empty()) {
            entries.back() += ' ';
            entries.back() += trim(line);
        }
    }
    return entries;
}

// Labeled layout: blocks of "Field: value" lines separated by blank lines,
// each block containing a Title line. Newlines are kept so the parser can
// split on labels.
std::vector<std::string> collect_labeled(const std::vector<std::string>& lines,
                                         std::size_t begin) {
    std::vector<std::string> blocks;
    std::string current;
    auto flush = [&] {
        if (std::regex_search(current, kTitleLabel)) blocks.push_back(trim(current));
        current.clear();
    };
    for (std::size_t i = begin; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) {
            flush();
        } else {
            // A fresh Title line starts the next block even without a blank gap.
            if (std::regex_search(line, std::regex(R"(^\s*[Tt]itle\s*:)")) && !current.empty())
                flush();
            if (!current.empty()) current += '\n';
            current += line;
        }
    }
    flush();
    return blocks;
}

const std::regex kDoiPattern(
    R"((?:doi\s*:\s*|https?://(?:dx\.)?doi\.org/)?(10\.\d{4,9}/[^\s"<>]+))",
    std::regex::icase);
const std::regex kUrlPattern(R"(https?://[^\s"<>]+)");
const std::regex kParenYear(R"(\((\d{4})\))");
const std::regex kBareYear(R"(\b(1[0-9]{3}|2[0-9]{3})\b)");

std::string strip_trailing_punct(std::string s) {
    while (!s.empty() && std::string(".,;:)]}>\"'").find(s.back()) != std::string::npos)
        s.pop_back();
    return s;
}

std::optional<int> year_in_range(const std::string& digits) {
    const int y = std::stoi(digits);
    if (y < 1000 || y > 3000) return std::nullopt;
    return y;
}

// "Field: value" lookup inside a labeled block.
std::optional<std::string> labeled_value(const std::string& block, const char* label) {
    const std::regex pat("(?:^|\\n)\\s*" + std::string(label) + "\\s*:\\s*([^\\n]*)",
                         std::regex::icase);
    std::smatch m;
    if (!std::regex_search(block, m, pat)) return std::nullopt;
    const std::string value = trim(m[1].str());
    if (value.empty()) return std::nullopt;
    return value;
}

ParsedCitation parse_labeled(const std::string& raw, int index) {
    ParsedCitation pc;
    pc.citation_index = index;
    if (auto t = labeled_value(raw, "title"); t && has_alnum(*t)) pc.title = *t;
    if (auto a = labeled_value(raw, "authors?")) pc.authors = split_authors(*a);
    if (auto v = labeled_value(raw, "venue")) pc.venue = *v;
    if (auto y = labeled_value(raw, "year")) {
        std::smatch m;
        if (std::regex_search(*y, m, kBareYear)) pc.year = year_in_range(m[1].str());
    }
    if (auto d = labeled_value(raw, "doi")) {
        std::smatch m;
        const std::string& text = *d;
        if (std::regex_search(text, m, kDoiPattern)) pc.doi = strip_trailing_punct(m[1].str());
    }
    if (auto u = labeled_value(raw, "url")) pc.url = strip_trailing_punct(*u);
    pc.parse_ok = pc.title.has_value();
    return pc;
}

bool looks_like_initials(const std::string& piece) {
    const auto tokens = normalize_text(piece);
    if (tokens.empty() || tokens.size() > 3) return false;
    return std::all_of(tokens.begin(), tokens.end(),
                       [](const std::string& t) { return t.size() <= 2; });
}

} // namespace

ModelOutput model_output_from_json(const json& obj) {
    ModelOutput out;
    try {
        out.claim_id = obj.at("claim_id").get<std::string>();
        out.model_id = obj.at("model_id").get<std::string>();
        out.condition = obj.at("condition").get<std::string>();
        out.output_text = obj.at("output_text").get<std::string>();
    } catch (const json::exception& e) {
        throw InputError(std::string("bad model output record: ") + e.what());
    }
    return out;
}

json parsed_citation_to_json(const ParsedCitation& pc) {
    json obj;
    obj["citation_index"] = pc.citation_index;
    obj["title"] = pc.title ? json(*pc.title) : json(nullptr);
    obj["authors"] = pc.authors;
    obj["venue"] = pc.venue ? json(*pc.venue) : json(nullptr);
    obj["year"] = pc.year ? json(*pc.year) : json(nullptr);
    obj["doi"] = pc.doi ? json(*pc.doi) : json(nullptr);
    obj["url"] = pc.url ? json(*pc.url) : json(nullptr);
    obj["parse_ok"] = pc.parse_ok;
    return obj;
}

ParsedCitation parsed_citation_from_json(const json& obj) {
    ParsedCitation pc;
    try {
        pc.citation_index = obj.at("citation_index").get<int>();
        if (obj.contains("title") && !obj["title"].is_null())
            pc.title = obj["title"].get<std::string>();
        if (obj.contains("authors")) pc.authors = obj["authors"].get<std::vector<std::string>>();
        if (obj.contains("venue") && !obj["venue"].is_null())
            pc.venue = obj["venue"].get<std::string>();
        if (obj.contains("year") && !obj["year"].is_null()) pc.year = obj["year"].get<int>();
        if (obj.contains("doi") && !obj["doi"].is_null())
            pc.doi = obj["doi"].get<std::string>();
        if (obj.contains("url") && !obj["url"].is_null())
            pc.url = obj["url"].get<std::string>();
        pc.parse_ok = obj.value("parse_ok", false);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad parsed citation record: ") + e.what());
    }
    return pc;
}

std::vector<std::string> extract_reference_block(const std::string& output_text) {
    const auto lines = split_lines(output_text);

    std::size_t block_begin = 0;
    bool heading_found = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_reference_heading(lines[i])) {
            block_begin = i + 1;
            heading_found = true;
            // keep scanning: the last heading wins if the text mentions one earlier
        }
    }

    auto numbered = collect_numbered(lines, heading_found ? block_begin : 0);
    if (!numbered.empty()) return numbered;

    auto labeled = collect_labeled(lines, heading_found ? block_begin : 0);
    if (!labeled.empty()) return labeled;

    if (!heading_found) return {};

    // Heading but no markers: every non-empty line below it is one entry.
    std::vector<std::string> entries;
    for (std::size_t i = block_begin; i < lines.size(); ++i) {
        std::string line = std::regex_replace(lines[i], kBulletMarker, "");
        line = trim(line);
        if (!line.empty()) entries.push_back(line);
    }
    return entries;
}

ParsedCitation parse_reference(const std::string& raw, int index) {
    if (std::regex_search(raw, kTitleLabel)) return parse_labeled(raw, index);

    ParsedCitation pc;
    pc.citation_index = index;
    std::string s = trim(std::regex_replace(raw, kEntryMarker, ""));

    std::smatch m;
    if (std::regex_search(s, m, kDoiPattern)) {
        pc.doi = strip_trailing_punct(m[1].str());
        s = trim(s.substr(0, m.position(0)) + " " + s.substr(m.position(0) + m.length(0)));
    }
    if (std::regex_search(s, m, kUrlPattern)) {
        pc.url = strip_trailing_punct(m.str(0));
        s = trim(s.substr(0, m.position(0)) + " " + s.substr(m.position(0) + m.length(0)));
    }

    std::string rest = s;
    if (std::regex_search(s, m, kParenYear)) {
        pc.year = year_in_range(m[1].str());
        const std::string author_seg = trim(s.substr(0, m.position(0)));
        pc.authors = split_authors(author_seg);
        rest = s.substr(m.position(0) + m.length(0));
    } else if (std::regex_search(s, m, kBareYear)) {
        pc.year = year_in_range(m[1].str());
    }

    rest = trim(rest);
    while (!rest.empty() && (rest.front() == '.' || rest.front() == ',')) rest = trim(rest.substr(1));

    // Sentence segments: title first, venue second. Trailing page/volume noise
    // stays inside the venue segment and is tolerated by fuzzy comparison.
    std::vector<std::string> segments;
    static const std::regex kSentenceSplit(R"(\.\s+)");
    std::sregex_token_iterator it(rest.begin(), rest.end(), kSentenceSplit, -1), end;
    for (; it != end; ++it) {
        std::string seg = trim(it->str());
        if (!seg.empty() && seg.back() == '.') seg.pop_back();
        seg = trim(seg);
        if (!seg.empty()) segments.push_back(seg);
    }

    if (!segments.empty() && has_alnum(segments[0])) pc.title = segments[0];
    if (segments.size() > 1 && has_alnum(segments[1])) pc.venue = segments[1];

    pc.parse_ok = pc.title.has_value();
    return pc;
}

std::size_t count_citations(const std::vector<ParsedCitation>& parsed) {
    return parsed.size();
}

std::string format_reference(const ParsedCitation& pc) {
    std::string out;
    for (std::size_t i = 0; i < pc.authors.size(); ++i) {
        if (i) out += "; ";
        out += pc.authors[i];
    }
    if (pc.year) {
        if (!out.empty()) out += ' ';
        out += '(' + std::to_string(*pc.year) + ").";
    }
    if (pc.title) {
        if (!out.empty()) out += ' ';
        out += *pc.title + '.';
    }
    if (pc.venue) {
        if (!out.empty()) out += ' ';
        out += *pc.venue + '.';
    }
    if (pc.doi) {
        if (!out.empty()) out += ' ';
        out += "doi:" + *pc.doi;
    }
    if (pc.url) {
        if (!out.empty()) out += ' ';
        out += *pc.url;
    }
    return out;
}

std::vector<std::string> split_authors(const std::string& s) {
    std::string cleaned = trim(s);
    if (cleaned.empty()) return {};

    // Drop "et al." tails; they carry no name information.
    static const std::regex kEtAl(R"([,;]?\s*et\s+al\.?\s*$)", std::regex::icase);
    cleaned = std::regex_replace(cleaned, kEtAl, "");
    if (cleaned.empty()) return {};

    std::vector<std::string> coarse;
    if (cleaned.find(';') != std::string::npos) {
        std::size_t pos = 0;
        while (pos <= cleaned.size()) {
            std::size_t sep = cleaned.find(';', pos);
            if (sep == std::string::npos) sep = cleaned.size();
            coarse.push_back(cleaned.substr(pos, sep - pos));
            pos = sep + 1;
        }
    } else {
        // Split on and/& first, then resolve commas inside each piece.
        static const std::regex kAnd(R"(\s+(?:and|&)\s+|,\s+(?:and|&)\s+)", std::regex::icase);
        std::sregex_token_iterator it(cleaned.begin(), cleaned.end(), kAnd, -1), end;
        for (; it != end; ++it) coarse.push_back(it->str());
    }

    std::vector<std::string> names;
    for (const auto& piece_raw : coarse) {
        const std::string piece = trim(piece_raw);
        if (piece.empty()) continue;
        if (piece.find(',') == std::string::npos) {
            names.push_back(piece);
            continue;
        }
        // "Doe, J., Smith, A." pairs each surname with the initials that
        // follow it; "John Doe, Anna Smith" keeps comma pieces whole.
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (pos <= piece.size()) {
            std::size_t sep = piece.find(',', pos);
            if (sep == std::string::npos) sep = piece.size();
            const std::string part = trim(piece.substr(pos, sep - pos));
            if (!part.empty()) parts.push_back(part);
            pos = sep + 1;
        }
        if (parts.size() >= 2 && looks_like_initials(parts[1])) {
            for (std::size_t i = 0; i < parts.size();) {
                if (i + 1 < parts.size() && looks_like_initials(parts[i + 1]) &&
                    !looks_like_initials(parts[i])) {
                    names.push_back(parts[i] + ", " + parts[i + 1]);
                    i += 2;
                } else {
                    names.push_back(parts[i]);
                    i += 1;
                }
            }
        } else {
            for (const auto& part : parts) names.push_back(part);
        }
    }
    return names;
}

} // namespace citeverify
