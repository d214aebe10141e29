#pragma once

#include "mmdlp/slicing.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmdlp {

struct GridSpec {
    std::uint32_t width_px = 0;
    std::uint32_t height_px = 0;
    double pitch_um = 0;
    Vec2 origin_mm; // center of pixel (0, 0) in the build frame

    double pitch_mm() const { return pitch_um / 1000.0; }
    double center_x(std::int64_t i) const { return origin_mm.x + static_cast<double>(i) * pitch_mm(); }
    double center_y(std::int64_t j) const { return origin_mm.y + static_cast<double>(j) * pitch_mm(); }
    void validate() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Assumed "2K" panel: 2560 x 1620 at 47.25 um. Only a configuration default;
// nothing in the library depends on it.
GridSpec default_lcd_grid();

// Centers a grid of the given size on (cx, cy).
GridSpec centered_grid(std::uint32_t width_px, std::uint32_t height_px, double pitch_um, double cx, double cy);

// 1 = exposed. Row j holds pixels whose center y is center_y(j). Bit i of a
// row is stored in word i / 64 at bit position i % 64; bits past width_px
// are always zero.
class MaskBitmap {
public:
    MaskBitmap() = default;
    explicit MaskBitmap(const GridSpec& grid);

    const GridSpec& grid() const { return grid_; }
    std::uint32_t width() const { return grid_.width_px; }
    std::uint32_t height() const { return grid_.height_px; }
    std::size_t words_per_row() const { return stride_; }
    std::size_t bit_count() const { return std::size_t(grid_.width_px) * grid_.height_px; }

    bool get(std::uint32_t i, std::uint32_t j) const
    {
        return (words_[j * stride_ + i / 64] >> (i % 64)) & 1u;
    }
    void set(std::uint32_t i, std::uint32_t j, bool on = true);

    std::span<std::uint64_t> row(std::uint32_t j) { return {words_.data() + j * stride_, stride_}; }
    std::span<const std::uint64_t> row(std::uint32_t j) const { return {words_.data() + j * stride_, stride_}; }
    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> words() { return words_; }

    std::uint64_t count() const;
    bool empty() const { return count() == 0; }
    void merge(const MaskBitmap& other); // bitwise OR, same grid required

    friend bool operator==(const MaskBitmap& a, const MaskBitmap& b)
    {
        return a.grid_ == b.grid_ && a.words_ == b.words_;
    }

private:
    GridSpec grid_;
    std::size_t stride_ = 0;
    std::vector<std::uint64_t> words_;
};

struct RasterStats {
    std::uint64_t clipped_pixels = 0; // inside the fill but outside the grid
};

// Pixel set iff its center is inside the even-odd fill. A center exactly on a
// crossing belongs to the region on its +x side; rows are sampled half-open in
// y, so a center on a horizontal edge belongs to the region on its +y side.
void rasterize_into(MaskBitmap& mask, const std::vector<Contour>& contours, RasterStats* stats = nullptr);

// Union over the slice's unit groups of each group's even-odd fill.
MaskBitmap rasterize(const LayerSlice& slice, const GridSpec& grid, RasterStats* stats = nullptr);

double mask_area(const MaskBitmap& mask); // mm^2

std::uint64_t overlap_pixels(const MaskBitmap& a, const MaskBitmap& b);

// PBM P4: "P4\n<w> <h>\n", rows padded to whole bytes, MSB = leftmost pixel.
std::string encode_pbm(const MaskBitmap& mask);
MaskBitmap decode_pbm(std::string_view data, double pitch_um = 1.0, Vec2 origin_mm = {});
void write_mask(const MaskBitmap& mask, const std::filesystem::path& path);
MaskBitmap read_mask(const std::filesystem::path& path, double pitch_um = 1.0, Vec2 origin_mm = {});

// layer{k:05}_{material}.pbm
std::string mask_filename(std::size_t layer, std::string_view material);

} // namespace mmdlp
