#include "sarbnn/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "sarbnn/error.hpp"
#include "sarbnn/io_util.hpp"

namespace sarbnn {
namespace {

constexpr double kMax16 = 65535.0;

struct HeaderReader {
    std::string_view bytes;
    const std::string& name;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError(name + ": " + what + " at byte offset " + std::to_string(pos));
    }

    void skip_space_and_comments() {
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos;
        unsigned long v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + static_cast<unsigned long>(bytes[pos] - '0');
            if (v > 1'000'000) fail(std::string("PGM ") + field + " too large");
            ++pos;
        }
        if (pos == start) fail(std::string("malformed PGM header, expected ") + field);
        return v;
    }
};

std::uint16_t to_sample(float v) {
    const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<std::uint16_t>(std::lround(c * kMax16));
}

}  // namespace

Tensor decode_pgm(std::string_view bytes, const std::string& name) {
    HeaderReader r{bytes, name};
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') r.fail("not a binary PGM (missing P5 magic)");
    r.pos = 2;
    const unsigned long w = r.number("width");
    const unsigned long h = r.number("height");
    const unsigned long maxval = r.number("maxval");
    if (w == 0 || h == 0) r.fail("PGM has zero width or height");
    if (maxval == 0 || maxval > 65535) r.fail("PGM maxval outside 1..65535");
    if (r.pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos]))) {
        r.fail("malformed PGM header, expected whitespace before raster");
    }
    ++r.pos;

    const std::size_t bps = maxval > 255 ? 2 : 1;
    const std::size_t need = w * h * bps;
    if (bytes.size() - r.pos < need) {
        r.pos = bytes.size();
        r.fail("truncated pixel payload (expected " + std::to_string(need) + " bytes of raster)");
    }
    Tensor out(Shape{1, h, w});
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + r.pos);
    for (std::size_t i = 0; i < w * h; ++i) {
        const unsigned v = bps == 2 ? (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
        if (v > maxval) {
            r.pos += i * bps;
            r.fail("sample exceeds maxval");
        }
        out[i] = static_cast<float>(static_cast<double>(v) / static_cast<double>(maxval));
    }
    return out;
}

Tensor read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path), path.string()); }

std::string encode_pgm(const Tensor& image) {
    std::size_t h = 0, w = 0;
    if (image.rank() == 2) {
        h = image.dim(0);
        w = image.dim(1);
    } else if (image.rank() == 3 && image.dim(0) == 1) {
        h = image.dim(1);
        w = image.dim(2);
    } else {
        throw ShapeError("encode_pgm", "[H, W] or [1, H, W]", shape_str(image.shape()));
    }
    std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
    const std::size_t header = out.size();
    out.resize(header + 2 * h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
        const std::uint16_t s = to_sample(image[i]);
        out[header + 2 * i] = static_cast<char>(s >> 8);
        out[header + 2 * i + 1] = static_cast<char>(s & 0xff);
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const Tensor& image) { write_file_atomic(path, encode_pgm(image)); }

void quantize_16bit(Tensor& image) {
    for (float& v : image.data()) v = static_cast<float>(static_cast<double>(to_sample(v)) / kMax16);
}

}  // namespace sarbnn
