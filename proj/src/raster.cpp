#include "mmdlp/raster.hpp"

#include "mmdlp/error.hpp"
#include "mmdlp/simd/bitops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>

#include <fmt/format.h>

namespace mmdlp {

void GridSpec::validate() const
{
    if (width_px == 0 || height_px == 0)
        throw Error(ErrorCode::InvalidArgument, "grid dimensions must be > 0");
    if (!(pitch_um > 0) || !std::isfinite(pitch_um))
        throw Error(ErrorCode::InvalidArgument, "grid pitch must be > 0");
}

GridSpec default_lcd_grid() { return {2560, 1620, 47.25, {0, 0}}; }

GridSpec centered_grid(std::uint32_t width_px, std::uint32_t height_px, double pitch_um, double cx, double cy)
{
    const double p = pitch_um / 1000.0;
    return {width_px, height_px, pitch_um, {cx - (width_px - 1) * p / 2, cy - (height_px - 1) * p / 2}};
}

MaskBitmap::MaskBitmap(const GridSpec& grid) : grid_(grid)
{
    grid.validate();
    stride_ = (grid.width_px + 63) / 64;
    words_.assign(stride_ * grid.height_px, 0);
}

void MaskBitmap::set(std::uint32_t i, std::uint32_t j, bool on)
{
    std::uint64_t& w = words_[j * stride_ + i / 64];
    const std::uint64_t bit = std::uint64_t(1) << (i % 64);
    w = on ? (w | bit) : (w & ~bit);
}

std::uint64_t MaskBitmap::count() const { return simd::popcount(words_); }

void MaskBitmap::merge(const MaskBitmap& other)
{
    if (!(other.grid_ == grid_))
        throw Error(ErrorCode::InvalidArgument, "cannot merge masks on different grids");
    simd::or_into(words_, other.words_);
}

namespace {

// Smallest index whose pixel center is >= v.
std::int64_t first_center_at_or_above(double v, double origin, double pitch)
{
    double t = std::ceil((v - origin) / pitch);
    t = std::clamp(t, -4e15, 4e15);
    auto i = static_cast<std::int64_t>(t);
    while (origin + static_cast<double>(i - 1) * pitch >= v)
        --i;
    while (origin + static_cast<double>(i) * pitch < v)
        ++i;
    return i;
}

struct Edge {
    Vec2 lo, hi; // lo.y < hi.y
};

} // namespace

void rasterize_into(MaskBitmap& mask, const std::vector<Contour>& contours, RasterStats* stats)
{
    const GridSpec& g = mask.grid();
    const double p = g.pitch_mm();

    std::vector<Edge> edges;
    std::int64_t row_min = INT64_MAX, row_max = INT64_MIN;
    for (const auto& c : contours) {
        const std::size_t n = c.points.size();
        if (n < 3)
            continue;
        for (std::size_t k = 0; k < n; ++k) {
            Vec2 a = c.points[k], b = c.points[(k + 1) % n];
            if (a.y == b.y)
                continue;
            // Canonical direction so a shared edge crosses rows at identical x.
            if (a.y > b.y || (a.y == b.y && a.x > b.x))
                std::swap(a, b);
            edges.push_back({a, b});
        }
    }
    if (edges.empty())
        return;

    // Edge table: for each sampled row, the x of every edge that spans it.
    std::vector<std::pair<std::int64_t, std::int64_t>> rows_of(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::int64_t j0 = first_center_at_or_above(edges[e].lo.y, g.origin_mm.y, p);
        const std::int64_t j1 = first_center_at_or_above(edges[e].hi.y, g.origin_mm.y, p);
        rows_of[e] = {j0, j1};
        if (j0 < j1) {
            row_min = std::min(row_min, j0);
            row_max = std::max(row_max, j1);
        }
    }
    if (row_min >= row_max)
        return;

    std::vector<std::vector<double>> crossings(static_cast<std::size_t>(row_max - row_min));
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const Edge& ed = edges[e];
        const double slope = (ed.hi.x - ed.lo.x) / (ed.hi.y - ed.lo.y);
        for (std::int64_t j = rows_of[e].first; j < rows_of[e].second; ++j) {
            const double yc = g.center_y(j);
            crossings[static_cast<std::size_t>(j - row_min)].push_back(ed.lo.x + (yc - ed.lo.y) * slope);
        }
    }

    for (std::int64_t j = row_min; j < row_max; ++j) {
        auto& xs = crossings[static_cast<std::size_t>(j - row_min)];
        std::sort(xs.begin(), xs.end());
        const bool row_in = j >= 0 && j < static_cast<std::int64_t>(g.height_px);
        for (std::size_t m = 0; m + 1 < xs.size(); m += 2) {
            const std::int64_t i0 = first_center_at_or_above(xs[m], g.origin_mm.x, p);
            const std::int64_t i1 = first_center_at_or_above(xs[m + 1], g.origin_mm.x, p);
            if (i0 >= i1)
                continue;
            const std::int64_t c0 = std::max<std::int64_t>(i0, 0);
            const std::int64_t c1 = row_in ? std::min<std::int64_t>(i1, g.width_px) : c0;
            if (c0 < c1)
                simd::fill_span(mask.row(static_cast<std::uint32_t>(j)).data(), static_cast<std::size_t>(c0),
                                static_cast<std::size_t>(c1));
            if (stats)
                stats->clipped_pixels += static_cast<std::uint64_t>((i1 - i0) - std::max<std::int64_t>(0, c1 - c0));
        }
    }
}

MaskBitmap rasterize(const LayerSlice& slice, const GridSpec& grid, RasterStats* stats)
{
    MaskBitmap mask(grid);
    std::map<std::uint32_t, std::vector<Contour>> groups;
    for (std::size_t i = 0; i < slice.contours.size(); ++i)
        groups[i < slice.group.size() ? slice.group[i] : 0].push_back(slice.contours[i]);
    for (const auto& [g, contours] : groups)
        rasterize_into(mask, contours, stats);
    return mask;
}

double mask_area(const MaskBitmap& mask)
{
    const double p = mask.grid().pitch_mm();
    return static_cast<double>(mask.count()) * p * p;
}

std::uint64_t overlap_pixels(const MaskBitmap& a, const MaskBitmap& b)
{
    if (!(a.grid() == b.grid()))
        throw Error(ErrorCode::InvalidArgument, "overlap requires masks on the same grid");
    return simd::and_popcount(a.words(), b.words());
}

namespace {

constexpr std::array<std::uint8_t, 256> make_reverse_table()
{
    std::array<std::uint8_t, 256> t{};
    for (int v = 0; v < 256; ++v) {
        std::uint8_t r = 0;
        for (int b = 0; b < 8; ++b)
            if (v & (1 << b))
                r |= static_cast<std::uint8_t>(0x80 >> b);
        t[v] = r;
    }
    return t;
}

constexpr auto kReverse = make_reverse_table();

} // namespace

std::string encode_pbm(const MaskBitmap& mask)
{
    const std::size_t row_bytes = (mask.width() + 7) / 8;
    std::string out = fmt::format("P4\n{} {}\n", mask.width(), mask.height());
    const std::size_t header = out.size();
    out.resize(header + row_bytes * mask.height());
    auto* dst = reinterpret_cast<unsigned char*>(out.data()) + header;
    for (std::uint32_t j = 0; j < mask.height(); ++j) {
        const auto row = mask.row(j);
        for (std::size_t b = 0; b < row_bytes; ++b)
            *dst++ = kReverse[(row[b / 8] >> (8 * (b % 8))) & 0xff];
    }
    return out;
}

MaskBitmap decode_pbm(std::string_view data, double pitch_um, Vec2 origin_mm)
{
    std::size_t pos = 0;
    auto fail = [](const char* what) -> MaskBitmap { throw Error(ErrorCode::IoFailure, std::string("PBM: ") + what); };
    auto skip_space = [&] {
        while (pos < data.size()) {
            if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n')
                    ++pos;
            } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&]() -> std::uint32_t {
        skip_space();
        std::uint64_t v = 0;
        const std::size_t start = pos;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos])))
            v = v * 10 + static_cast<std::uint64_t>(data[pos++] - '0');
        if (pos == start || v == 0 || v > UINT32_MAX)
            fail("bad dimension");
        return static_cast<std::uint32_t>(v);
    };
    if (data.substr(0, 2) != "P4")
        return fail("missing P4 magic");
    pos = 2;
    const std::uint32_t w = read_uint();
    const std::uint32_t h = read_uint();
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
        return fail("missing separator after header");
    ++pos;
    const std::size_t row_bytes = (w + 7) / 8;
    if (data.size() - pos < row_bytes * h)
        return fail("truncated raster");

    MaskBitmap mask(GridSpec{w, h, pitch_um, origin_mm});
    const auto* src = reinterpret_cast<const unsigned char*>(data.data()) + pos;
    for (std::uint32_t j = 0; j < h; ++j) {
        auto row = mask.row(j);
        for (std::size_t b = 0; b < row_bytes; ++b)
            row[b / 8] |= std::uint64_t(kReverse[*src++]) << (8 * (b % 8));
        if (w % 64)
            row[row.size() - 1] &= ~std::uint64_t(0) >> (64 - w % 64);
    }
    return mask;
}

void write_mask(const MaskBitmap& mask, const std::filesystem::path& path)
{
    const std::string data = encode_pbm(mask);
    std::ofstream out(path, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

MaskBitmap read_mask(const std::filesystem::path& path, double pitch_um, Vec2 origin_mm)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_pbm(data, pitch_um, origin_mm);
}

std::string mask_filename(std::size_t layer, std::string_view material)
{
    return fmt::format("layer{:05}_{}.pbm", layer, material);
}

} // namespace mmdlp
