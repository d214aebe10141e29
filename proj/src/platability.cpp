#include "mmdlp/platability.hpp"

#include "mmdlp/error.hpp"
#include "mmdlp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <unordered_map>

#include <fmt/format.h>

namespace mmdlp {

VoxelGrid::VoxelGrid(std::size_t nx_, std::size_t ny_, std::size_t nz_, double voxel_, Vec3 origin_)
    : nx(nx_), ny(ny_), nz(nz_), voxel(voxel_), origin(origin_), labels(nx_ * ny_ * nz_, Label::Void)
{
    if (!(voxel_ > 0))
        throw Error(ErrorCode::InvalidArgument, "voxel size must be > 0");
}

Vec3 VoxelGrid::center(std::size_t i, std::size_t j, std::size_t k) const
{
    return {origin.x + (static_cast<double>(i) + 0.5) * voxel, origin.y + (static_cast<double>(j) + 0.5) * voxel,
            origin.z + (static_cast<double>(k) + 0.5) * voxel};
}

std::size_t VoxelGrid::count(Label l) const
{
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

PlatingBathRecipe default_bath() { return PlatingBathRecipe{}; }

namespace {

// Orientation of p against edge a->b, evaluated with the lower vertex index
// first so the two triangles sharing an edge get exactly negated values.
double edge_fn(const std::vector<Vec3>& v, std::uint32_t ia, std::uint32_t ib, double px, double py)
{
    const bool flip = ia > ib;
    if (flip)
        std::swap(ia, ib);
    const Vec3 a = v[ia], b = v[ib];
    const double d = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    return flip ? -d : d;
}

// z of every triangle crossing the vertical line through (px, py); nullopt
// when the line touches a triangle boundary exactly.
std::optional<std::vector<double>> column_hits(const std::vector<Vec3>& v, const std::vector<Triangle>& tris,
                                               const std::vector<std::uint32_t>& candidates, double px, double py)
{
    std::vector<double> hits;
    for (std::uint32_t t : candidates) {
        const Triangle& tri = tris[t];
        const double d0 = edge_fn(v, tri[0], tri[1], px, py);
        const double d1 = edge_fn(v, tri[1], tri[2], px, py);
        const double d2 = edge_fn(v, tri[2], tri[0], px, py);
        const bool pos = d0 > 0 || d1 > 0 || d2 > 0;
        const bool neg = d0 < 0 || d1 < 0 || d2 < 0;
        if (pos && neg)
            continue;
        if (d0 == 0 || d1 == 0 || d2 == 0)
            return std::nullopt;
        // Barycentric weights: d1 is opposite vertex 0, d2 opposite 1, d0 opposite 2.
        const double s = d0 + d1 + d2;
        hits.push_back((d1 * v[tri[0]].z + d2 * v[tri[1]].z + d0 * v[tri[2]].z) / s);
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

std::size_t cells_along(double extent, double voxel)
{
    return static_cast<std::size_t>(std::max(1.0, std::ceil(extent / voxel - 1e-9)));
}

} // namespace

VoxelGrid voxelize(const Assembly& assembly, double voxel, int padding)
{
    if (!(voxel > 0) || padding < 0)
        throw Error(ErrorCode::InvalidArgument, "voxel must be > 0 and padding >= 0");
    for (std::size_t u = 0; u < assembly.units.size(); ++u) {
        const MeshReport rep = validate_mesh(*assembly.units[u].mesh);
        if (!rep.watertight)
            throw Error(ErrorCode::NonWatertightUnit,
                        fmt::format("unit {} ('{}'): {} boundary, {} non-manifold edges", u,
                                    assembly.units[u].mesh->name, rep.boundary_edges, rep.nonmanifold_edges));
    }

    const Box3 b = assembly.bounds();
    if (b.empty())
        return VoxelGrid(static_cast<std::size_t>(2 * padding + 1), static_cast<std::size_t>(2 * padding + 1),
                         static_cast<std::size_t>(2 * padding + 1), voxel, {});
    const auto pad = static_cast<std::size_t>(padding);
    VoxelGrid grid(cells_along(b.max.x - b.min.x, voxel) + 2 * pad, cells_along(b.max.y - b.min.y, voxel) + 2 * pad,
                   cells_along(b.max.z - b.min.z, voxel) + 2 * pad, voxel,
                   b.min - Vec3{1, 1, 1} * (padding * voxel));

    // Bit 0: inside a substrate unit, bit 1: inside a precursor unit.
    std::vector<std::uint8_t> roles(grid.size(), 0);
    const double nudge = voxel * 1e-3;

    for (const auto& unit : assembly.units) {
        const std::vector<Vec3> wv = unit.world_vertices();
        const auto& tris = unit.mesh->triangles;
        const std::uint8_t bit = unit.material.role == MaterialRole::ActivePrecursor ? 2 : 1;

        std::vector<std::vector<std::uint32_t>> buckets(grid.nx * grid.ny);
        auto col_range = [&](double lo, double hi, double origin, std::size_t n) {
            // Columns whose (possibly nudged) ray may hit [lo, hi].
            const double a = std::floor((lo - origin) / voxel - 0.5) - 1;
            const double c = std::ceil((hi - origin) / voxel - 0.5) + 1;
            return std::pair{static_cast<std::size_t>(std::clamp(a, 0.0, double(n - 1))),
                             static_cast<std::size_t>(std::clamp(c, 0.0, double(n - 1)))};
        };
        for (std::uint32_t t = 0; t < tris.size(); ++t) {
            Box3 tb;
            for (int k = 0; k < 3; ++k)
                tb.expand(wv[tris[t][k]]);
            const auto [i0, i1] = col_range(tb.min.x, tb.max.x, grid.origin.x, grid.nx);
            const auto [j0, j1] = col_range(tb.min.y, tb.max.y, grid.origin.y, grid.ny);
            for (std::size_t j = j0; j <= j1; ++j)
                for (std::size_t i = i0; i <= i1; ++i)
                    buckets[j * grid.nx + i].push_back(t);
        }

        parallel_for(grid.ny, [&](std::size_t j) {
            for (std::size_t i = 0; i < grid.nx; ++i) {
                const auto& cand = buckets[j * grid.nx + i];
                if (cand.empty())
                    continue;
                const Vec3 c = grid.center(i, j, 0);
                std::optional<std::vector<double>> hits;
                for (int attempt = 0; attempt < 16 && !hits; ++attempt)
                    hits = column_hits(wv, tris, cand, c.x + attempt * nudge, c.y);
                if (!hits)
                    continue;
                for (std::size_t m = 0; m + 1 < hits->size(); m += 2) {
                    const double z0 = (*hits)[m], z1 = (*hits)[m + 1];
                    // cells with center in [z0, z1)
                    auto first = [&](double z) {
                        double kk = std::ceil((z - grid.origin.z) / voxel - 0.5);
                        kk = std::clamp(kk, 0.0, double(grid.nz));
                        auto k = static_cast<std::size_t>(kk);
                        while (k > 0 && grid.center(0, 0, k - 1).z >= z)
                            --k;
                        while (k < grid.nz && grid.center(0, 0, k).z < z)
                            ++k;
                        return k;
                    };
                    for (std::size_t k = first(z0), k1 = first(z1); k < k1; ++k)
                        roles[grid.index(i, j, k)] |= bit;
                }
            }
        });
    }

    for (std::size_t idx = 0; idx < roles.size(); ++idx) {
        switch (roles[idx]) {
        case 0: break;
        case 1: grid.labels[idx] = Label::Substrate; break;
        case 2: grid.labels[idx] = Label::Precursor; break;
        default:
            grid.labels[idx] = Label::Precursor;
            ++grid.overlap_cells;
        }
    }
    if (grid.overlap_cells)
        grid.warnings.push_back(fmt::format("{} cells inside both substrate and precursor units; labeled precursor",
                                            grid.overlap_cells));
    return grid;
}

std::vector<std::uint8_t> flood_void(const VoxelGrid& g)
{
    std::vector<std::uint8_t> reach(g.size(), 0);
    std::vector<std::size_t> frontier;
    auto seed = [&](std::size_t idx) {
        if (g.labels[idx] == Label::Void && !reach[idx]) {
            reach[idx] = 1;
            frontier.push_back(idx);
        }
    };
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i)
                if (i == 0 || j == 0 || k == 0 || i + 1 == g.nx || j + 1 == g.ny || k + 1 == g.nz)
                    seed(g.index(i, j, k));

    const std::size_t sx = 1, sy = g.nx, sz = g.nx * g.ny;
    while (!frontier.empty()) {
        const std::size_t idx = frontier.back();
        frontier.pop_back();
        const std::size_t i = idx % g.nx, j = (idx / g.nx) % g.ny, k = idx / sz;
        if (i > 0)
            seed(idx - sx);
        if (i + 1 < g.nx)
            seed(idx + sx);
        if (j > 0)
            seed(idx - sy);
        if (j + 1 < g.ny)
            seed(idx + sy);
        if (k > 0)
            seed(idx - sz);
        if (k + 1 < g.nz)
            seed(idx + sz);
    }
    return reach;
}

namespace {

struct Face {
    std::size_t i, j, k;
    int dir; // 0 -x, 1 +x, 2 -y, 3 +y, 4 -z, 5 +z
};

constexpr std::uint64_t kCoordBits = 20;

std::uint64_t edge_key(int axis, std::int64_t x, std::int64_t y, std::int64_t z)
{
    return std::uint64_t(axis) << (3 * kCoordBits) | std::uint64_t(x) << (2 * kCoordBits) |
           std::uint64_t(y) << kCoordBits | std::uint64_t(z);
}

// The four lattice edges bounding a face.
std::array<std::uint64_t, 4> face_edges(const Face& f)
{
    const int a = f.dir / 2;
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    std::int64_t base[3] = {std::int64_t(f.i), std::int64_t(f.j), std::int64_t(f.k)};
    base[a] += f.dir % 2;
    auto key = [&](int axis, int db, int dc) {
        std::int64_t p[3] = {base[0], base[1], base[2]};
        p[b] += db;
        p[c] += dc;
        return edge_key(axis, p[0], p[1], p[2]);
    };
    return {key(b, 0, 0), key(b, 0, 1), key(c, 0, 0), key(c, 1, 0)};
}

struct DisjointSets {
    std::vector<std::uint32_t> parent;
    std::uint32_t add()
    {
        parent.push_back(static_cast<std::uint32_t>(parent.size()));
        return parent.back();
    }
    std::uint32_t find(std::uint32_t a)
    {
        while (parent[a] != a)
            a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace

PlatingReport plating_report(const VoxelGrid& g, const std::vector<std::uint8_t>& reachable)
{
    if (reachable.size() != g.size())
        throw Error(ErrorCode::InvalidArgument, "reachability mask does not match grid");
    if (std::max({g.nx, g.ny, g.nz}) + 1 >= (std::size_t(1) << kCoordBits))
        throw Error(ErrorCode::InvalidArgument, "grid too large for face indexing");

    PlatingReport report;
    report.bath = default_bath();
    const double area1 = g.voxel * g.voxel;
    const double vol1 = area1 * g.voxel;

    for (std::size_t idx = 0; idx < g.size(); ++idx)
        if (g.labels[idx] == Label::Void && !reachable[idx])
            ++report.sealed_void_cells;

    std::vector<Face> faces;
    DisjointSets sets;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_owner;
    std::size_t unreachable_faces = 0;

    static constexpr int kStep[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
            for (std::size_t i = 0; i < g.nx; ++i) {
                if (g.at(i, j, k) != Label::Precursor)
                    continue;
                bool exposed = false;
                for (int d = 0; d < 6; ++d) {
                    const std::int64_t ni = std::int64_t(i) + kStep[d][0];
                    const std::int64_t nj = std::int64_t(j) + kStep[d][1];
                    const std::int64_t nk = std::int64_t(k) + kStep[d][2];
                    const bool outside = ni < 0 || nj < 0 || nk < 0 || ni >= std::int64_t(g.nx) ||
                                         nj >= std::int64_t(g.ny) || nk >= std::int64_t(g.nz);
                    bool plated = outside;
                    if (!outside) {
                        const std::size_t n = g.index(std::size_t(ni), std::size_t(nj), std::size_t(nk));
                        if (g.labels[n] != Label::Void)
                            continue;
                        if (!reachable[n]) {
                            ++unreachable_faces;
                            continue;
                        }
                        plated = true;
                    }
                    if (!plated)
                        continue;
                    exposed = true;
                    const Face f{i, j, k, d};
                    const std::uint32_t id = sets.add();
                    faces.push_back(f);
                    for (std::uint64_t e : face_edges(f)) {
                        auto [it, inserted] = edge_owner.try_emplace(e, id);
                        if (!inserted)
                            sets.unite(id, it->second);
                    }
                }
                if (!exposed)
                    report.buried_precursor_volume += vol1;
            }

    report.plated_faces = faces.size();
    report.unreachable_precursor_area = static_cast<double>(unreachable_faces) * area1;

    std::unordered_map<std::uint32_t, std::size_t> patch_of_root;
    std::vector<Vec3> sums;
    for (std::uint32_t f = 0; f < faces.size(); ++f) {
        const std::uint32_t root = sets.find(f);
        auto [it, inserted] = patch_of_root.try_emplace(root, report.patches.size());
        if (inserted) {
            report.patches.emplace_back();
            sums.emplace_back();
        }
        auto& patch = report.patches[it->second];
        ++patch.face_count;
        const Face& fc = faces[f];
        Vec3 c = g.center(fc.i, fc.j, fc.k);
        c = c + Vec3{double(kStep[fc.dir][0]), double(kStep[fc.dir][1]), double(kStep[fc.dir][2])} * (0.5 * g.voxel);
        sums[it->second] = sums[it->second] + c;
    }
    for (std::size_t p = 0; p < report.patches.size(); ++p) {
        auto& patch = report.patches[p];
        patch.area = static_cast<double>(patch.face_count) * area1;
        patch.centroid = sums[p] * (1.0 / static_cast<double>(patch.face_count));
        report.plated_area_total += patch.area;
    }
    return report;
}

std::string format_report(const PlatingReport& r, const VoxelGrid& g)
{
    std::string out = "# plating report\n";
    out += fmt::format("voxel_mm={}\n", g.voxel);
    out += fmt::format("dims={} {} {}\n", g.nx, g.ny, g.nz);
    out += fmt::format("origin_mm={:.6f} {:.6f} {:.6f}\n", g.origin.x, g.origin.y, g.origin.z);
    out += fmt::format("precursor_cells={}\nsubstrate_cells={}\n", g.count(Label::Precursor), g.count(Label::Substrate));
    out += fmt::format("overlap_cells={}\n", g.overlap_cells);
    out += fmt::format("sealed_void_cells={}\n", r.sealed_void_cells);
    out += fmt::format("plated_faces={}\n", r.plated_faces);
    out += fmt::format("plated_area_total_mm2={:.6f}\n", r.plated_area_total);
    out += fmt::format("unreachable_precursor_area_mm2={:.6f}\n", r.unreachable_precursor_area);
    out += fmt::format("buried_precursor_volume_mm3={:.6f}\n", r.buried_precursor_volume);
    out += fmt::format("patch_count={}\n", r.patches.size());
    const auto& b = r.bath;
    out += "# bath (electroless Ni)\n";
    out += fmt::format("bath.NiSO4_6H2O_mmol_L={}\n", b.nickel_sulfate_hexahydrate);
    out += fmt::format("bath.NaH2PO2_H2O_mmol_L={}\n", b.sodium_hypophosphite_monohydrate);
    out += fmt::format("bath.C6H5Na3O7_2H2O_mmol_L={}\n", b.trisodium_citrate_dihydrate);
    out += fmt::format("bath.H3BO3_mmol_L={}\n", b.boric_acid);
    out += fmt::format("bath.pH_adjustment={}\n", b.ph_adjustment);
    out += fmt::format("bath.pH={:.1f}\n", b.ph);
    out += fmt::format("bath.temperature_C={}\n", b.temperature_c);
    out += fmt::format("bath.deposition_window_min={}-{}\n", b.deposition_window_min_minutes,
                       b.deposition_window_max_minutes);
    out += "# patches: id faces area_mm2 centroid_x centroid_y centroid_z\n";
    for (std::size_t p = 0; p < r.patches.size(); ++p) {
        const auto& pt = r.patches[p];
        out += fmt::format("{} {} {:.6f} {:.6f} {:.6f} {:.6f}\n", p, pt.face_count, pt.area, pt.centroid.x,
                           pt.centroid.y, pt.centroid.z);
    }
    return out;
}

std::string encode_label_dump(const VoxelGrid& g)
{
    std::string out = "MMDLPVOX 1\n";
    out += fmt::format("dims {} {} {}\n", g.nx, g.ny, g.nz);
    out += fmt::format("voxel_mm {}\n", g.voxel);
    out += fmt::format("origin_mm {} {} {}\n", g.origin.x, g.origin.y, g.origin.z);
    out += "labels 0=void 1=substrate 2=precursor order=x,y,z\n";
    out += "data\n";
    const std::size_t header = out.size();
    out.resize(header + g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        out[header + i] = static_cast<char>(g.labels[i]);
    return out;
}

void write_label_dump(const VoxelGrid& grid, const std::filesystem::path& path)
{
    const std::string data = encode_label_dump(grid);
    std::ofstream out(path, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

} // namespace mmdlp
