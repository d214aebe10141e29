#pragma once

#include "mmdlp/geometry_io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mmdlp {

enum class Label : std::uint8_t { Void = 0, Substrate = 1, Precursor = 2 };

struct VoxelGrid {
    std::size_t nx = 0, ny = 0, nz = 0;
    double voxel = 0;   // mm
    Vec3 origin;        // min corner of cell (0, 0, 0)
    std::vector<Label> labels; // x fastest, then y, then z
    std::uint64_t overlap_cells = 0; // cells claimed by both roles
    std::vector<std::string> warnings;

    VoxelGrid() = default;
    VoxelGrid(std::size_t nx, std::size_t ny, std::size_t nz, double voxel, Vec3 origin);

    std::size_t size() const { return labels.size(); }
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (k * ny + j) * nx + i; }
    Label at(std::size_t i, std::size_t j, std::size_t k) const { return labels[index(i, j, k)]; }
    Label& at(std::size_t i, std::size_t j, std::size_t k) { return labels[index(i, j, k)]; }
    Vec3 center(std::size_t i, std::size_t j, std::size_t k) const;
    std::size_t count(Label l) const;
};

// Labels every cell whose center lies inside a unit (z-column crossing parity,
// one parity per unit). The domain is the assembly bounds padded by `padding`
// cells per side. Throws NonWatertightUnit for open unit meshes.
VoxelGrid voxelize(const Assembly& assembly, double voxel, int padding = 2);

// Per-cell flag: 1 for VOID cells 6-connected to a VOID cell on the grid
// boundary, 0 otherwise.
std::vector<std::uint8_t> flood_void(const VoxelGrid& grid);

struct PlatingBathRecipe {
    // mmol/L
    double nickel_sulfate_hexahydrate = 60;          // NiSO4·6H2O
    double sodium_hypophosphite_monohydrate = 240;   // NaH2PO2·H2O
    double trisodium_citrate_dihydrate = 200;        // C6H5Na3O7·2H2O
    double boric_acid = 500;                         // H3BO3
    std::string ph_adjustment = "H2SO4 / NaOH";
    double ph = 9.0;
    double temperature_c = 70;
    double deposition_window_min_minutes = 5;
    double deposition_window_max_minutes = 10;

    friend bool operator==(const PlatingBathRecipe&, const PlatingBathRecipe&) = default;
};

// Electroless Ni bath used for metallizing exposed precursor surfaces.
PlatingBathRecipe default_bath();

struct PlatedPatch {
    std::size_t face_count = 0;
    double area = 0; // mm^2
    Vec3 centroid;
};

struct PlatingReport {
    std::vector<PlatedPatch> patches; // ordered by first face in cell order
    double plated_area_total = 0;
    double buried_precursor_volume = 0;    // mm^3, precursor cells without a reachable void neighbor
    double unreachable_precursor_area = 0; // mm^2, precursor faces on sealed cavities
    std::size_t plated_faces = 0;
    std::size_t sealed_void_cells = 0;
    PlatingBathRecipe bath;
};

// A face plates iff it separates a PRECURSOR cell from a reachable VOID cell
// (outside the grid counts as reachable bath). Plated faces sharing an edge
// form one patch.
PlatingReport plating_report(const VoxelGrid& grid, const std::vector<std::uint8_t>& reachable);

std::string format_report(const PlatingReport& report, const VoxelGrid& grid);

// Text header (dims, voxel, origin) terminated by "data\n", then one label
// byte per cell in storage order.
std::string encode_label_dump(const VoxelGrid& grid);
void write_label_dump(const VoxelGrid& grid, const std::filesystem::path& path);

} // namespace mmdlp
