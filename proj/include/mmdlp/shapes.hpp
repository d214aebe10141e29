#pragma once

// Closed, consistently oriented test and demo solids. Every generator returns
// an indexed (already welded) watertight mesh with positive signed volume.

#include "mmdlp/geometry_io.hpp"

#include <utility>
#include <vector>

namespace mmdlp::shapes {

TriangleMesh box(Vec3 min, Vec3 max);

// Icosahedron refined `subdivisions` times, vertices projected onto the sphere.
TriangleMesh icosphere(Vec3 center, double radius, int subdivisions);

// Distance from the center to the nearest face plane of an icosphere; every
// planar cross-section of the mesh contains the disc of this radius.
double icosphere_inradius(double radius, int subdivisions);

// Square tube around the z axis through `center` (x, y), half-widths inner < outer.
TriangleMesh square_tube(double cx, double cy, double inner_half, double outer_half, double z0, double z1);

// Solid of revolution around the vertical axis through (cx, cy). The profile is
// a simple closed polygon in the (radius, z) half-plane with radius >= 0;
// vertices with radius exactly 0 become poles.
TriangleMesh revolve(const std::vector<std::pair<double, double>>& profile, int segments, double cx = 0,
                     double cy = 0, double phase = 0);

// Hollow sphere of radii inner < outer with circular through-holes at both poles,
// hole_angle being the polar half-angle of each opening (0 gives a sealed shell
// built as two nested surfaces).
TriangleMesh pierced_shell(Vec3 center, double inner, double outer, double hole_angle, int segments);

// Solid cylinder along z.
TriangleMesh cylinder(double cx, double cy, double radius, double z0, double z1, int segments);

// Concatenate meshes (no welding).
TriangleMesh concat(const std::vector<TriangleMesh>& parts);

} // namespace mmdlp::shapes
