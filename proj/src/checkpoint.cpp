#include "sarbnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include <zlib.h>

#include "sarbnn/error.hpp"
#include "sarbnn/io_util.hpp"

namespace sarbnn {
namespace {

constexpr char kMagic[6] = {'B', 'N', 'N', 'V', '1', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(b[at + i])} << (8 * i);
    return v;
}

void put_floats(std::string& out, const Tensor& t) {
    for (float f : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
}

std::uint32_t crc32_of(std::string_view b) {
    return static_cast<std::uint32_t>(::crc32(0L, reinterpret_cast<const Bytef*>(b.data()), static_cast<uInt>(b.size())));
}

struct Reader {
    std::string_view bytes;
    const std::string& name;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError(name + ": " + what + " at byte offset " + std::to_string(pos));
    }
    std::uint32_t u32() {
        if (bytes.size() - pos < 4) fail("truncated checkpoint");
        const std::uint32_t v = get_u32(bytes, pos);
        pos += 4;
        return v;
    }
    void floats(Tensor& t) {
        if ((bytes.size() - pos) / 4 < t.size()) fail("truncated parameter array");
        for (float& f : t.data()) f = std::bit_cast<float>(u32());
    }
};

}  // namespace

std::string encode_checkpoint(const BayesianModel& model) {
    std::string out(kMagic, sizeof kMagic);
    put_u32(out, kCheckpointVersion);
    const std::string desc = "arch=" + render(model.spec()) + "\nprior_mean=" + format_double(model.prior().mean) +
                             "\nprior_stddev=" + format_double(model.prior().stddev) + "\n";
    put_u32(out, static_cast<std::uint32_t>(desc.size()));
    out += desc;
    for (const ParamLayer& p : model.params()) {
        put_floats(out, p.weight.mu);
        put_floats(out, p.bias.mu);
        put_floats(out, p.weight.rho);
        put_floats(out, p.bias.rho);
    }
    put_u32(out, crc32_of(out));
    return out;
}

BayesianModel decode_checkpoint(std::string_view bytes, const std::string& name) {
    Reader r{bytes, name};
    if (bytes.size() < sizeof kMagic + 12) r.fail("file too short to be a checkpoint");
    if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) r.fail("bad magic (not a BNNV1 checkpoint)");
    const std::uint32_t stored_crc = get_u32(bytes, bytes.size() - 4);
    if (stored_crc != crc32_of(bytes.substr(0, bytes.size() - 4))) {
        r.pos = bytes.size() - 4;
        r.fail("CRC mismatch (checkpoint is corrupt)");
    }
    bytes.remove_suffix(4);
    r.bytes = bytes;
    r.pos = sizeof kMagic;
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t len = r.u32();
    if (bytes.size() - r.pos < len) r.fail("truncated descriptor");
    std::map<std::string, std::string> kv;
    for (const std::string& line : split_lines(bytes.substr(r.pos, len))) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) r.fail("malformed descriptor line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    r.pos += len;
    for (const char* key : {"arch", "prior_mean", "prior_stddev"}) {
        if (!kv.count(key)) r.fail(std::string("descriptor lacks '") + key + "'");
    }
    const ArchitectureSpec spec = parse_architecture(kv["arch"]);
    const PriorSpec prior{parse_double(kv["prior_mean"], name + " prior_mean"), parse_double(kv["prior_stddev"], name + " prior_stddev")};

    // Shapes come from a freshly built model of the same architecture.
    BayesianModel shaped = build_model(spec, prior, 0);
    std::vector<ParamLayer> params = shaped.params();
    for (ParamLayer& p : params) {
        r.floats(p.weight.mu);
        r.floats(p.bias.mu);
        r.floats(p.weight.rho);
        r.floats(p.bias.rho);
    }
    if (r.pos != bytes.size()) r.fail("trailing bytes after parameter arrays");
    return assemble_model(spec, prior, std::move(params));
}

void save_checkpoint(const BayesianModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, encode_checkpoint(model));
}

BayesianModel load_checkpoint(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: '" + path.string() + "'");
    return decode_checkpoint(read_file(path), path.string());
}

}  // namespace sarbnn
