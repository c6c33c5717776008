#include "citeverify/match.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>

namespace citeverify {

namespace {

// Decodes one UTF-8 codepoint starting at `i`; advances `i`. Invalid bytes
// decode as themselves so normalization stays total.
std::uint32_t decode_utf8(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t j) { return static_cast<unsigned char>(s[j]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((b0 & 0xe0) == 0xc0) {
        len = 2;
        cp = b0 & 0x1f;
    } else if ((b0 & 0xf0) == 0xe0) {
        len = 3;
        cp = b0 & 0x0f;
    } else if ((b0 & 0xf8) == 0xf0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return b0;
    }
    if (i + len > s.size()) {
        ++i;
        return b0;
    }
    for (std::size_t j = 1; j < len; ++j) {
        const unsigned char bj = byte(i + j);
        if ((bj & 0xc0) != 0x80) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (bj & 0x3f);
    }
    i += len;
    return cp;
}

// ASCII base letters for Latin-1 Supplement and Latin Extended-A. Folding the
// precomposed letters and dropping combining marks (below) makes composed and
// decomposed spellings of the same name normalize identically.
const char* fold_latin(std::uint32_t cp) {
    if (cp >= 0xc0 && cp <= 0xc5) return "a";
    if (cp >= 0xe0 && cp <= 0xe5) return "a";
    if (cp == 0xc6 || cp == 0xe6) return "ae";
    if (cp == 0xc7 || cp == 0xe7) return "c";
    if ((cp >= 0xc8 && cp <= 0xcb) || (cp >= 0xe8 && cp <= 0xeb)) return "e";
    if ((cp >= 0xcc && cp <= 0xcf) || (cp >= 0xec && cp <= 0xef)) return "i";
    if (cp == 0xd0 || cp == 0xf0) return "d";
    if (cp == 0xd1 || cp == 0xf1) return "n";
    if ((cp >= 0xd2 && cp <= 0xd6) || cp == 0xd8) return "o";
    if ((cp >= 0xf2 && cp <= 0xf6) || cp == 0xf8) return "o";
    if ((cp >= 0xd9 && cp <= 0xdc) || (cp >= 0xf9 && cp <= 0xfc)) return "u";
    if (cp == 0xdd || cp == 0xfd || cp == 0xff) return "y";
    if (cp == 0xde || cp == 0xfe) return "th";
    if (cp == 0xdf) return "ss";
    if (cp >= 0x100 && cp <= 0x105) return "a";
    if (cp >= 0x106 && cp <= 0x10d) return "c";
    if (cp >= 0x10e && cp <= 0x111) return "d";
    if (cp >= 0x112 && cp <= 0x11b) return "e";
    if (cp >= 0x11c && cp <= 0x123) return "g";
    if (cp >= 0x124 && cp <= 0x127) return "h";
    if (cp >= 0x128 && cp <= 0x131) return "i";
    if (cp >= 0x132 && cp <= 0x133) return "ij";
    if (cp >= 0x134 && cp <= 0x135) return "j";
    if (cp >= 0x136 && cp <= 0x138) return "k";
    if (cp >= 0x139 && cp <= 0x142) return "l";
    if (cp >= 0x143 && cp <= 0x149) return "n";
    if (cp >= 0x14a && cp <= 0x14b) return "n";
    if (cp >= 0x14c && cp <= 0x151) return "o";
    if (cp >= 0x152 && cp <= 0x153) return "oe";
    if (cp >= 0x154 && cp <= 0x159) return "r";
    if (cp >= 0x15a && cp <= 0x161) return "s";
    if (cp >= 0x162 && cp <= 0x167) return "t";
    if (cp >= 0x168 && cp <= 0x173) return "u";
    if (cp >= 0x174 && cp <= 0x175) return "w";
    if (cp >= 0x176 && cp <= 0x178) return "y";
    if (cp >= 0x179 && cp <= 0x17e) return "z";
    if (cp == 0x17f) return "s";
    return nullptr;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& tok : tokens) {
        if (!out.empty()) out += ' ';
        out += tok;
    }
    return out;
}

} // namespace

std::vector<std::string> normalize_text(const std::string& s) {
    std::string flat;
    flat.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const std::uint32_t cp = decode_utf8(s, i);
        if (cp < 0x80) {
            const char c = static_cast<char>(cp);
            if (c >= 'A' && c <= 'Z')
                flat += static_cast<char>(c + 32);
            else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))
                flat += c;
            else
                flat += ' ';
            continue;
        }
        if (cp >= 0x300 && cp <= 0x36f) continue; // combining marks
        if (const char* folded = fold_latin(cp)) {
            flat += folded;
            continue;
        }
        // Anything else (CJK, symbols, typographic punctuation) separates.
        flat += ' ';
    }

    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos < flat.size()) {
        while (pos < flat.size() && flat[pos] == ' ') ++pos;
        std::size_t end = pos;
        while (end < flat.size() && flat[end] != ' ') ++end;
        if (end > pos) tokens.push_back(flat.substr(pos, end - pos));
        pos = end;
    }
    return tokens;
}

std::string normalize_join(const std::string& s) { return join_tokens(normalize_text(s)); }

std::size_t levenshtein(const std::string& a, const std::string& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double levenshtein_ratio(const std::string& a, const std::string& b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double token_set_ratio(const std::string& x, const std::string& z) {
    const auto tokens_x = normalize_text(x);
    const auto tokens_z = normalize_text(z);
    const std::set<std::string> set_x(tokens_x.begin(), tokens_x.end());
    const std::set<std::string> set_z(tokens_z.begin(), tokens_z.end());

    if (set_x.empty() && set_z.empty()) return 1.0;
    if (set_x.empty() || set_z.empty()) return 0.0;
    if (set_x == set_z) return 1.0;

    std::vector<std::string> inter, only_x, only_z;
    std::set_intersection(set_x.begin(), set_x.end(), set_z.begin(), set_z.end(),
                          std::back_inserter(inter));
    std::set_difference(set_x.begin(), set_x.end(), set_z.begin(), set_z.end(),
                        std::back_inserter(only_x));
    std::set_difference(set_z.begin(), set_z.end(), set_x.begin(), set_x.end(),
                        std::back_inserter(only_z));

    const std::string base = join_tokens(inter);
    auto with_diff = [&base](const std::vector<std::string>& diff) {
        std::string out = base;
        for (const auto& tok : diff) {
            if (!out.empty()) out += ' ';
            out += tok;
        }
        return out;
    };
    const std::string combined_x = with_diff(only_x);
    const std::string combined_z = with_diff(only_z);

    return std::max({levenshtein_ratio(base, combined_x), levenshtein_ratio(base, combined_z),
                     levenshtein_ratio(combined_x, combined_z)});
}

double partial_ratio(const std::string& x, const std::string& z) {
    std::string shorter = normalize_join(x);
    std::string longer = normalize_join(z);
    if (shorter.size() > longer.size()) std::swap(shorter, longer);

    if (shorter.empty()) return longer.empty() ? 1.0 : 0.0;

    const std::size_t m = shorter.size();
    double best = 0.0;
    for (std::size_t i = 0; i + m <= longer.size(); ++i) {
        best = std::max(best, levenshtein_ratio(shorter, longer.substr(i, m)));
        if (best == 1.0) break;
    }
    return best;
}

std::string last_name_key(const std::string& name) {
    std::string segment = name;
    if (const auto comma = segment.find(','); comma != std::string::npos)
        segment = segment.substr(0, comma);
    const auto tokens = normalize_text(segment);
    return tokens.empty() ? std::string() : tokens.back();
}

double author_overlap(const std::vector<std::string>& parsed_authors,
                      const std::vector<std::string>& candidate_authors) {
    std::set<std::string> parsed_names;
    for (const auto& name : parsed_authors) {
        const std::string key = last_name_key(name);
        if (!key.empty()) parsed_names.insert(key);
    }
    if (parsed_names.empty()) return 0.0;

    std::set<std::string> candidate_names;
    for (const auto& name : candidate_authors) {
        const std::string key = last_name_key(name);
        if (!key.empty()) candidate_names.insert(key);
    }

    std::size_t shared = 0;
    for (const auto& key : parsed_names)
        if (candidate_names.count(key)) ++shared;
    return static_cast<double>(shared) / static_cast<double>(parsed_names.size());
}

double year_agreement(const std::optional<int>& parsed_year,
                      const std::optional<int>& candidate_year) {
    if (!parsed_year || !candidate_year) return 0.0;
    const int diff = std::abs(*parsed_year - *candidate_year);
    if (diff == 0) return 1.0;
    if (diff == 1) return 0.5;
    return 0.0;
}

MatchScore score_candidate(const ParsedCitation& parsed, const CandidateRecord& candidate) {
    if (!parsed.title)
        throw std::invalid_argument("score_candidate requires a parsed title");

    MatchScore score;
    score.candidate = candidate;
    score.t = token_set_ratio(*parsed.title, candidate.title);
    score.a = author_overlap(parsed.authors, candidate.authors);
    score.y = year_agreement(parsed.year, candidate.year);
    score.v = (parsed.venue && candidate.venue) ? partial_ratio(*parsed.venue, *candidate.venue)
                                                : 0.0;
    score.s = kTitleWeight * score.t + kAuthorWeight * score.a + kYearWeight * score.y +
              kVenueWeight * score.v;
    return score;
}

} // namespace citeverify
