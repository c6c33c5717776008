#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace citeverify {

using json = nlohmann::json;

// Thrown for unreadable or malformed input files. The CLI maps this to
// exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Reads a JSON-lines file. Blank lines are skipped. A malformed line throws
// InputError naming the file and 1-based line number.
std::vector<json> read_jsonl(const std::filesystem::path& path);

// Streaming variant: invokes `fn(line_number, object)` per record.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const json&)>& fn);

// Writes whole-file content atomically (temp file + rename), creating parent
// directories as needed.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// One compact JSON object per line, atomic write.
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

// FNV-1a 64-bit. Stable across platforms; used for cache filenames.
std::uint64_t fnv1a64(const std::string& s);

// 16-char lowercase hex of fnv1a64.
std::string fnv1a64_hex(const std::string& s);

} // namespace citeverify
