#include "sarbnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <variant>

#include "sarbnn/error.hpp"
#include "sarbnn/pgm.hpp"
#include "sarbnn/rng.hpp"

namespace sarbnn {
namespace {

// Template primitives live in a unit frame, roughly [-1, 1]^2, y pointing down.
struct Capsule {
    double ax, ay, bx, by, r;
};
struct Disk {
    double cx, cy, r;
};
struct Ring {
    double cx, cy, r_in, r_out;
};
struct Polygon {
    std::vector<std::pair<double, double>> pts;  // convex, either winding
};
using Primitive = std::variant<Capsule, Disk, Ring, Polygon>;

bool inside(const Capsule& c, double x, double y) {
    const double dx = c.bx - c.ax, dy = c.by - c.ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((x - c.ax) * dx + (y - c.ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = x - (c.ax + t * dx), ey = y - (c.ay + t * dy);
    return ex * ex + ey * ey <= c.r * c.r;
}
bool inside(const Disk& d, double x, double y) {
    return (x - d.cx) * (x - d.cx) + (y - d.cy) * (y - d.cy) <= d.r * d.r;
}
bool inside(const Ring& r, double x, double y) {
    const double d2 = (x - r.cx) * (x - r.cx) + (y - r.cy) * (y - r.cy);
    return d2 >= r.r_in * r.r_in && d2 <= r.r_out * r.r_out;
}
bool inside(const Polygon& p, double x, double y) {
    int sign = 0;
    for (std::size_t i = 0; i < p.pts.size(); ++i) {
        const auto [x0, y0] = p.pts[i];
        const auto [x1, y1] = p.pts[(i + 1) % p.pts.size()];
        const double cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0);
        const int s = cross > 0 ? 1 : (cross < 0 ? -1 : 0);
        if (s == 0) continue;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return true;
}

const std::vector<Primitive>& template_for(std::size_t cls) {
    static const std::vector<std::vector<Primitive>> templates = {
        {Capsule{-1.0, 0.0, 1.0, 0.0, 0.25}},
        {Capsule{-1.0, 0.0, 1.0, 0.0, 0.2}, Capsule{0.0, -1.0, 0.0, 1.0, 0.2}},
        {Capsule{-0.8, -0.9, -0.8, 0.8, 0.2}, Capsule{-0.8, 0.8, 0.9, 0.8, 0.2}},
        {Capsule{-1.0, -0.8, 1.0, -0.8, 0.2}, Capsule{0.0, -0.8, 0.0, 1.0, 0.2}},
        {Capsule{-0.9, -0.9, 0.0, 0.9, 0.2}, Capsule{0.9, -0.9, 0.0, 0.9, 0.2}},
        {Disk{-0.6, -0.6, 0.22}, Disk{0.6, -0.5, 0.22}, Disk{0.0, 0.1, 0.22}, Disk{-0.5, 0.7, 0.22},
         Disk{0.6, 0.7, 0.22}},
        {Ring{0.0, 0.0, 0.6, 0.95}},
        {Polygon{{{-0.7, -0.7}, {0.7, -0.7}, {0.7, 0.7}, {-0.7, 0.7}}}},
        {Capsule{-1.0, -0.5, 1.0, -0.5, 0.18}, Capsule{-1.0, 0.5, 1.0, 0.5, 0.18}},
        {Polygon{{{0.0, -1.0}, {0.95, 0.8}, {-0.95, 0.8}}}},
    };
    return templates.at(cls);
}

bool template_hit(std::size_t cls, double u, double v) {
    for (const Primitive& p : template_for(cls)) {
        if (std::visit([&](const auto& prim) { return inside(prim, u, v); }, p)) return true;
    }
    return false;
}

}  // namespace

std::string_view split_name(Split s) noexcept {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Validation: return "validation";
    }
    return "train";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::Train;
    if (name == "test") return Split::Test;
    if (name == "validation") return Split::Validation;
    throw ValidationError("unknown split '" + std::string(name) + "' (expected train, test or validation)");
}

std::size_t ChipDataset::count(Split s) const {
    return static_cast<std::size_t>(std::count_if(chips.begin(), chips.end(), [s](const Chip& c) { return c.split == s; }));
}

ChipDataset ChipDataset::subset(Split s) const {
    ChipDataset out{{}, num_classes, provenance};
    for (const Chip& c : chips) {
        if (c.split == s) out.chips.push_back(c);
    }
    return out;
}

void ChipDataset::append(const ChipDataset& other) {
    if (other.num_classes != num_classes) {
        throw ValidationError("cannot merge datasets with " + std::to_string(num_classes) + " and " +
                              std::to_string(other.num_classes) + " classes");
    }
    chips.insert(chips.end(), other.chips.begin(), other.chips.end());
}

void ChipDataset::validate() const {
    std::unordered_set<std::string> ids;
    const Shape* shape = nullptr;
    for (const Chip& c : chips) {
        if (c.label >= num_classes) {
            throw ValidationError("chip '" + c.id + "': label " + std::to_string(c.label) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
        }
        if (c.image.rank() != 3 || c.image.dim(0) != 1) {
            throw ShapeError("chip '" + c.id + "'", "[1, H, W]", shape_str(c.image.shape()));
        }
        if (shape && *shape != c.image.shape()) throw ShapeError("chip '" + c.id + "'", shape_str(*shape), shape_str(c.image.shape()));
        shape = &c.image.shape();
        if (!ids.insert(c.id).second) throw ValidationError("duplicate chip id '" + c.id + "'");
    }
}

ChipDataset generate_synthetic(std::size_t num_classes, std::size_t per_class, std::size_t chip_size,
                               std::uint64_t seed, const SyntheticOptions& options) {
    if (per_class < 1) throw ValidationError("generate_synthetic: per_class must be >= 1");
    if (chip_size < 32) throw ValidationError("generate_synthetic: chip_size must be >= 32");
    if (num_classes < 2 || num_classes > kSyntheticTemplates) {
        throw ValidationError("generate_synthetic: num_classes must be in [2, " + std::to_string(kSyntheticTemplates) + "]");
    }
    if (options.speckle_looks < 1) throw ValidationError("generate_synthetic: speckle_looks must be >= 1");

    ChipDataset ds;
    ds.num_classes = num_classes;
    ds.provenance = "synthetic(seed=" + std::to_string(seed) + ")";
    const double n = static_cast<double>(chip_size);
    const double half_extent = 10.0 * n / 64.0;
    const double deg = std::numbers::pi / 180.0;

    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t cls = 0; cls < num_classes; ++cls) {
            const std::size_t index = i * num_classes + cls;
            Rng rng(derive_seed(seed, "synthetic-chip", index));
            std::uniform_real_distribution<double> unit(-1.0, 1.0);
            const double angle = unit(rng) * options.rotation_deg * deg;
            const double cx = (n - 1) / 2.0 + unit(rng) * options.max_shift;
            const double cy = (n - 1) / 2.0 + unit(rng) * options.max_shift;
            const double scale = half_extent * (1.0 + unit(rng) * options.scale_jitter);
            const double level = options.target_level * (1.0 + 0.2 * unit(rng));
            const double ca = std::cos(angle), sa = std::sin(angle);
            std::gamma_distribution<double> speckle(options.speckle_looks, 1.0 / options.speckle_looks);

            Tensor img(Shape{1, chip_size, chip_size});
            double target_sum = 0.0, bg_sum = 0.0;
            std::size_t target_n = 0, bg_n = 0;
            for (std::size_t y = 0; y < chip_size; ++y) {
                for (std::size_t x = 0; x < chip_size; ++x) {
                    const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
                    const double u = (ca * dx + sa * dy) / scale;
                    const double v = (-sa * dx + ca * dy) / scale;
                    const bool hit = template_hit(cls, u, v);
                    const double value = (hit ? level : options.background_level) * speckle(rng);
                    img[y * chip_size + x] = static_cast<float>(std::min(value, 1.0));
                    (hit ? target_sum : bg_sum) += std::min(value, 1.0);
                    (hit ? target_n : bg_n) += 1;
                }
            }
            quantize_16bit(img);
            if (target_n == 0 || bg_n == 0 || bg_sum / bg_n >= target_sum / target_n) {
                throw std::logic_error("generate_synthetic: background not darker than target on chip " +
                                       std::to_string(index));
            }
            ds.chips.push_back(Chip{std::move(img), cls, options.id_prefix + "_" + std::to_string(index), options.split});
        }
    }
    return ds;
}

Tensor crop(const Tensor& image, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
    if (image.rank() != 3) throw ShapeError("crop", "[C, H, W]", shape_str(image.shape()));
    const std::size_t c = image.dim(0), ih = image.dim(1), iw = image.dim(2);
    if (h == 0 || w == 0 || top + h > ih || left + w > iw) {
        throw ValidationError("crop: window " + std::to_string(h) + "x" + std::to_string(w) + " at (" +
                              std::to_string(top) + ", " + std::to_string(left) + ") does not fit in " +
                              std::to_string(ih) + "x" + std::to_string(iw));
    }
    Tensor out(Shape{c, h, w});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < h; ++y) {
            const float* src = image.data().data() + (ch * ih + top + y) * iw + left;
            std::copy(src, src + w, out.data().data() + (ch * h + y) * w);
        }
    }
    return out;
}

Tensor center_crop(const Tensor& image, std::size_t h, std::size_t w) {
    if (image.rank() != 3) throw ShapeError("center_crop", "[C, H, W]", shape_str(image.shape()));
    if (h > image.dim(1) || w > image.dim(2)) {
        throw ValidationError("center_crop: " + std::to_string(h) + "x" + std::to_string(w) + " larger than " +
                              std::to_string(image.dim(1)) + "x" + std::to_string(image.dim(2)));
    }
    return crop(image, (image.dim(1) - h) / 2, (image.dim(2) - w) / 2, h, w);
}

ChipDataset augment_and_crop(const ChipDataset& ds, const PreprocessSpec& spec, std::uint64_t seed,
                             std::vector<std::string>* warnings) {
    ChipDataset out{{}, ds.num_classes, ds.provenance};
    bool saw_train = false;
    for (std::size_t i = 0; i < ds.chips.size(); ++i) {
        const Chip& c = ds.chips[i];
        if (c.split != Split::Train) {
            out.chips.push_back(Chip{center_crop(c.image, spec.crop_h, spec.crop_w), c.label, c.id, c.split});
            continue;
        }
        saw_train = true;
        const std::size_t h = c.image.dim(1), w = c.image.dim(2);
        if (spec.patch_h > h || spec.patch_w > w) {
            throw ValidationError("augment_and_crop: patch " + std::to_string(spec.patch_h) + "x" +
                                  std::to_string(spec.patch_w) + " larger than chip '" + c.id + "'");
        }
        Rng rng(derive_seed(seed, "augment", i));
        std::uniform_int_distribution<std::size_t> top(0, h - spec.patch_h), left(0, w - spec.patch_w);
        for (std::size_t j = 0; j < spec.augment_count; ++j) {
            const std::size_t t = top(rng), l = left(rng);
            out.chips.push_back(Chip{crop(c.image, t, l, spec.patch_h, spec.patch_w), c.label,
                                     c.id + "_p" + std::to_string(j), Split::Train});
        }
    }
    if (saw_train && spec.augment_count == 0 && warnings) {
        warnings->push_back("augment_count = 0: training split is empty");
    }
    return out;
}

}  // namespace sarbnn
