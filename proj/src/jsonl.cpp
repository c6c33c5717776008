#include "citeverify/jsonl.hpp"

#include <fstream>
#include <sstream>

namespace citeverify {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::vector<json> rows;
    for_each_jsonl(path, [&rows](std::size_t, const json& obj) { rows.push_back(obj); });
    return rows;
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded())
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": malformed JSON line");
        fn(lineno, obj);
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
    std::ostringstream out;
    for (const json& row : rows) out << row.dump() << '\n';
    write_file_atomic(path, out.str());
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& s) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(s);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace citeverify
