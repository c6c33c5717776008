#pragma once

#include <optional>
#include <string>
#include <vector>

#include "citeverify/jsonl.hpp"

namespace citeverify {

// One generated model output for a (claim, model, condition) run.
struct ModelOutput {
    std::string claim_id;
    std::string model_id;
    std::string condition;
    std::string output_text;
};

ModelOutput model_output_from_json(const json& obj);

// One reference decomposed into bibliographic fields. Parsing is total:
// garbage input yields parse_ok=false, never an exception.
struct ParsedCitation {
    int citation_index = 0; // 1-based ordinal within the output's reference list
    std::optional<std::string> title;
    std::vector<std::string> authors;
    std::optional<std::string> venue;
    std::optional<int> year;
    std::optional<std::string> doi;
    std::optional<std::string> url;
    bool parse_ok = false;
};

json parsed_citation_to_json(const ParsedCitation& pc);
ParsedCitation parsed_citation_from_json(const json& obj);

// Pulls the reference list out of a model output. Accepted layouts, tried in
// order: a references heading followed by entries, a numbered list ([n], n.,
// n)), labeled-field blocks containing "Title:". Returns entries in output
// order; no reference block means an empty list.
std::vector<std::string> extract_reference_block(const std::string& output_text);

// Rule-based field extraction from one raw reference string.
ParsedCitation parse_reference(const std::string& raw, int index);

// Realized citation count; parse failures included.
std::size_t count_citations(const std::vector<ParsedCitation>& parsed);

// Canonical single-line rendering ("Doe, J.; Smith, A. (2021). Title. Venue.
// doi:10.1000/xyz"). parse_reference inverts it exactly on well-formed fields.
std::string format_reference(const ParsedCitation& pc);

// Author-list splitting used by parse_reference; exposed for tests.
std::vector<std::string> split_authors(const std::string& s);

} // namespace citeverify
