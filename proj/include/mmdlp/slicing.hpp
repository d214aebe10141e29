#pragma once

#include "mmdlp/geometry_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mmdlp {

struct Vec2 {
    double x = 0, y = 0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Closed polyline; the closing edge back to points.front() is implicit.
struct Contour {
    std::vector<Vec2> points;

    double signed_area() const;
    double perimeter() const;
};

// Contours of one material at one z. `group` tags which assembly unit each
// contour came from: fill is even-odd within a group, union across groups.
struct LayerSlice {
    double z = 0;
    std::string material;
    std::vector<Contour> contours;
    std::vector<std::uint32_t> group;

    // Sum over groups of the even-odd area of that group's contours.
    double area() const;
};

struct Layer {
    std::size_t index = 0;
    double z = 0;
    std::vector<LayerSlice> slices; // sorted by material id, at most one each

    const LayerSlice* find(std::string_view material) const;
};

struct LayerStack {
    double layer_height = 0;
    std::vector<Layer> layers;
};

constexpr double kDefaultStitchEps = 1e-4;

// Sample height of layer k: (k + 0.5) * layer_height above the build plate.
double layer_z(std::size_t k, double layer_height);

// Even-odd area of a contour set (contours must not cross each other).
double even_odd_area(const std::vector<Contour>& contours);

// Cross-section of the transformed mesh with the plane at height z. When a
// vertex lies within eps of z the plane moves to z + eps/2 first. Throws
// OpenContour when the intersection segments do not close into loops.
std::vector<Contour> slice_at(const TriangleMesh& mesh, const RigidTransform& transform, double z,
                              double eps = kDefaultStitchEps);

std::size_t layer_count(const Assembly& assembly);

LayerStack build_layer_stack(const Assembly& assembly, double eps = kDefaultStitchEps);

// One text file per layer (layerNNNNN.txt) with material, contour count and
// vertices; meant for golden-file comparisons.
void write_layer_dump(const LayerStack& stack, const std::filesystem::path& dir);
std::string format_layer_dump(const Layer& layer);

} // namespace mmdlp
