#include "sarbnn/manifest.hpp"

#include <algorithm>

#include "sarbnn/error.hpp"
#include "sarbnn/io_util.hpp"
#include "sarbnn/pgm.hpp"

namespace sarbnn {
namespace {

bool safe_id(const std::string& id) {
    return !id.empty() && id != "." && id != ".." && std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    });
}

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

}  // namespace

void save_manifest(const ChipDataset& ds, const std::filesystem::path& manifest) {
    ds.validate();
    const std::filesystem::path dir = manifest.parent_path();
    std::string csv = "id,file,label,split\n";
    for (const Chip& c : ds.chips) {
        if (!safe_id(c.id)) throw ValidationError("chip id '" + c.id + "' is not usable as a file name");
        const std::string rel = "images/" + c.id + ".pgm";
        write_pgm(dir / rel, c.image);
        csv += c.id + "," + rel + "," + std::to_string(c.label) + "," + std::string(split_name(c.split)) + "\n";
    }
    write_file_atomic(manifest, csv);
}

ChipDataset load_manifest(const std::filesystem::path& manifest, std::size_t num_classes) {
    if (!std::filesystem::exists(manifest)) throw IoError("manifest not found: '" + manifest.string() + "'");
    const auto lines = split_lines(read_file(manifest));
    if (lines.empty() || lines[0] != "id,file,label,split") {
        throw ValidationError(where(manifest, 1) + ": malformed header (expected 'id,file,label,split')");
    }
    ChipDataset ds;
    ds.num_classes = num_classes;
    ds.provenance = "ingested(" + manifest.string() + ")";
    const std::filesystem::path dir = manifest.parent_path();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 4) throw ValidationError(where(manifest, i + 1) + ": expected 4 fields, got " + std::to_string(f.size()));
        const long long label = parse_int(f[2], where(manifest, i + 1) + " label");
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
            throw ValidationError(where(manifest, i + 1) + ": label " + f[2] + " out of range [0, " +
                                  std::to_string(num_classes) + ")");
        }
        const std::filesystem::path file = dir / f[1];
        if (!std::filesystem::exists(file)) {
            throw IoError(where(manifest, i + 1) + ": image for id '" + f[0] + "' missing ('" + file.string() + "')");
        }
        ds.chips.push_back(Chip{read_pgm(file), static_cast<std::size_t>(label), f[0], parse_split(f[3])});
    }
    ds.validate();
    return ds;
}

void save_scatterers(const std::vector<ScattererRow>& rows, const std::filesystem::path& path) {
    std::string csv = "id,scatterer_index,row,col,amplitude,radius\n";
    for (const ScattererRow& r : rows) {
        csv += r.id + "," + std::to_string(r.scatterer_index) + "," + std::to_string(r.row) + "," + std::to_string(r.col) +
               "," + format_double(r.amplitude) + "," + format_double(r.radius) + "\n";
    }
    write_file_atomic(path, csv);
}

std::vector<ScattererRow> load_scatterers(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("scatterer file not found: '" + path.string() + "'");
    const auto lines = split_lines(read_file(path));
    if (lines.empty() || lines[0] != "id,scatterer_index,row,col,amplitude,radius") {
        throw ValidationError(where(path, 1) + ": malformed header (expected 'id,scatterer_index,row,col,amplitude,radius')");
    }
    std::vector<ScattererRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split(lines[i], ',');
        const std::string at = where(path, i + 1);
        if (f.size() != 6) throw ValidationError(at + ": expected 6 fields, got " + std::to_string(f.size()));
        const long long idx = parse_int(f[1], at + " scatterer_index");
        const long long row = parse_int(f[2], at + " row");
        const long long col = parse_int(f[3], at + " col");
        if (idx < 0 || row < 0 || col < 0) throw ValidationError(at + ": negative index or coordinate");
        rows.push_back(ScattererRow{f[0], static_cast<std::size_t>(idx), static_cast<std::size_t>(row),
                                    static_cast<std::size_t>(col), parse_double(f[4], at + " amplitude"),
                                    parse_double(f[5], at + " radius")});
    }
    return rows;
}

}  // namespace sarbnn
