#include "sarbnn/mstar.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <cctype>
#include <map>

#include "sarbnn/error.hpp"
#include "sarbnn/io_util.hpp"

namespace sarbnn {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

float be_float(const unsigned char* p) {
    const std::uint32_t u = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
    return std::bit_cast<float>(u);
}

}  // namespace

Tensor decode_mstar(std::string_view bytes, const std::string& name) {
    const std::string_view end_tag = "[EndofPhoenixHeader]";
    const auto end = bytes.find(end_tag);
    if (bytes.substr(0, 1) != "[" || end == std::string_view::npos) {
        throw ValidationError(name + ": malformed Phoenix header at byte offset 0");
    }
    std::map<std::string, std::string> header;
    for (const std::string& line : split_lines(bytes.substr(0, end))) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) header[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
    }
    auto field = [&](const char* key, bool required) -> long long {
        auto it = header.find(key);
        if (it == header.end()) {
            if (required) throw ValidationError(name + ": Phoenix header lacks " + key);
            return 0;
        }
        return parse_int(it->second, name + " " + key);
    };
    const long long cols = field("NumberOfColumns", true);
    const long long rows = field("NumberOfRows", true);
    const long long phoenix_len = field("PhoenixHeaderLength", true);
    const long long native_len = field("native_header_length", false);
    if (rows <= 0 || cols <= 0 || phoenix_len <= 0 || native_len < 0) {
        throw ValidationError(name + ": Phoenix header has non-positive dimensions or lengths");
    }
    const std::size_t offset = static_cast<std::size_t>(phoenix_len + native_len);
    const std::size_t n = static_cast<std::size_t>(rows * cols);
    if (bytes.size() < offset || bytes.size() - offset < 4 * n) {
        throw ValidationError(name + ": truncated magnitude payload at byte offset " + std::to_string(bytes.size()) +
                              " (need " + std::to_string(offset + 4 * n) + ")");
    }
    Tensor out(Shape{1, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)});
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
    float peak = 0.0f;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::max(be_float(p + 4 * i), 0.0f);
        peak = std::max(peak, out[i]);
    }
    require_finite(out, name);
    if (peak > 0.0f) {
        for (float& v : out.data()) v /= peak;
    }
    return out;
}

Tensor read_mstar(const std::filesystem::path& path) { return decode_mstar(read_file(path), path.string()); }

ChipDataset ingest_mstar(const std::filesystem::path& root, Split split) {
    if (!std::filesystem::is_directory(root)) throw IoError("MSTAR root is not a directory: '" + root.string() + "'");
    std::vector<std::filesystem::path> classes;
    for (const auto& e : std::filesystem::directory_iterator(root)) {
        if (e.is_directory()) classes.push_back(e.path());
    }
    std::sort(classes.begin(), classes.end());
    ChipDataset ds;
    ds.num_classes = classes.size();
    ds.provenance = "ingested(" + root.string() + ")";
    for (std::size_t label = 0; label < classes.size(); ++label) {
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(classes[label])) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::string id = classes[label].filename().string() + "_" + f.stem().string();
            std::replace_if(id.begin(), id.end(), [](char c) { return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'); }, '_');
            ds.chips.push_back(Chip{read_mstar(f), label, id, split});
        }
    }
    ds.validate();
    return ds;
}

}  // namespace sarbnn
