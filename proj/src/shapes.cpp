#include "mmdlp/shapes.hpp"

#include "mmdlp/error.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace mmdlp::shapes {

namespace {

void add_quad(TriangleMesh& m, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d)
{
    m.triangles.push_back({a, b, c});
    m.triangles.push_back({a, c, d});
}

void orient_outward(TriangleMesh& m)
{
    if (signed_volume(m) < 0)
        for (auto& t : m.triangles)
            std::swap(t[1], t[2]);
}

} // namespace

TriangleMesh box(Vec3 lo, Vec3 hi)
{
    TriangleMesh m;
    m.name = "box";
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
    add_quad(m, 0, 2, 3, 1); // z-
    add_quad(m, 4, 5, 7, 6); // z+
    add_quad(m, 0, 1, 5, 4); // y-
    add_quad(m, 2, 6, 7, 3); // y+
    add_quad(m, 0, 4, 6, 2); // x-
    add_quad(m, 1, 3, 7, 5); // x+
    return m;
}

TriangleMesh icosphere(Vec3 center, double radius, int subdivisions)
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    auto normalize = [](Vec3 p) { return p * (1.0 / std::sqrt(dot(p, p))); };
    for (auto& p : v)
        p = normalize(p);

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end())
                return it->second;
            const auto idx = static_cast<std::uint32_t>(v.size());
            v.push_back(normalize((v[a] + v[b]) * 0.5));
            mid.emplace(key, idx);
            return idx;
        };
        std::vector<Triangle> next;
        next.reserve(f.size() * 4);
        for (const auto& tri : f) {
            const auto ab = midpoint(tri[0], tri[1]);
            const auto bc = midpoint(tri[1], tri[2]);
            const auto ca = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }

    TriangleMesh m;
    m.name = "icosphere";
    m.vertices.reserve(v.size());
    for (const auto& p : v)
        m.vertices.push_back(center + p * radius);
    m.triangles = std::move(f);
    orient_outward(m);
    return m;
}

double icosphere_inradius(double radius, int subdivisions)
{
    const TriangleMesh m = icosphere({}, radius, subdivisions);
    double best = radius;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const Vec3 a = m.corner(t, 0);
        Vec3 n = cross(m.corner(t, 1) - a, m.corner(t, 2) - a);
        n = n * (1.0 / std::sqrt(dot(n, n)));
        best = std::min(best, std::abs(dot(n, a)));
    }
    return best;
}

TriangleMesh square_tube(double cx, double cy, double inner_half, double outer_half, double z0, double z1)
{
    if (!(inner_half > 0 && inner_half < outer_half && z0 < z1))
        throw Error(ErrorCode::InvalidArgument, "square_tube: need 0 < inner < outer and z0 < z1");
    TriangleMesh m;
    m.name = "square_tube";
    const double sx[4] = {-1, 1, 1, -1};
    const double sy[4] = {-1, -1, 1, 1};
    // index = level * 8 + ring * 4 + corner, ring 0 outer / 1 inner
    for (double z : {z0, z1})
        for (double h : {outer_half, inner_half})
            for (int k = 0; k < 4; ++k)
                m.vertices.push_back({cx + sx[k] * h, cy + sy[k] * h, z});
    auto o = [](int level, int k) { return std::uint32_t(level * 8 + (k % 4)); };
    auto in = [](int level, int k) { return std::uint32_t(level * 8 + 4 + (k % 4)); };
    for (int k = 0; k < 4; ++k) {
        add_quad(m, o(0, k), o(0, k + 1), o(1, k + 1), o(1, k));
        add_quad(m, in(0, k), in(1, k), in(1, k + 1), in(0, k + 1));
        add_quad(m, o(1, k), o(1, k + 1), in(1, k + 1), in(1, k));
        add_quad(m, o(0, k), in(0, k), in(0, k + 1), o(0, k + 1));
    }
    return m;
}

TriangleMesh revolve(const std::vector<std::pair<double, double>>& profile, int segments, double cx, double cy,
                     double phase)
{
    if (profile.size() < 3 || segments < 3)
        throw Error(ErrorCode::InvalidArgument, "revolve: need >= 3 profile points and >= 3 segments");
    TriangleMesh m;
    m.name = "revolve";
    const auto n = static_cast<std::uint32_t>(segments);
    std::vector<std::uint32_t> first(profile.size());
    std::vector<bool> pole(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const auto [r, z] = profile[i];
        if (r < 0)
            throw Error(ErrorCode::InvalidArgument, "revolve: negative radius in profile");
        first[i] = static_cast<std::uint32_t>(m.vertices.size());
        pole[i] = r == 0.0;
        if (pole[i]) {
            m.vertices.push_back({cx, cy, z});
            continue;
        }
        for (std::uint32_t s = 0; s < n; ++s) {
            const double a = phase + 2.0 * std::numbers::pi * s / n;
            m.vertices.push_back({cx + r * std::cos(a), cy + r * std::sin(a), z});
        }
    }
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const std::size_t j = (i + 1) % profile.size();
        if (pole[i] && pole[j])
            continue;
        for (std::uint32_t s = 0; s < n; ++s) {
            const std::uint32_t s1 = (s + 1) % n;
            if (pole[i]) {
                m.triangles.push_back({first[i], first[j] + s1, first[j] + s});
            } else if (pole[j]) {
                m.triangles.push_back({first[i] + s, first[i] + s1, first[j]});
            } else {
                add_quad(m, first[i] + s, first[i] + s1, first[j] + s1, first[j] + s);
            }
        }
    }
    orient_outward(m);
    return m;
}

TriangleMesh pierced_shell(Vec3 center, double inner, double outer, double hole_angle, int segments)
{
    if (!(inner > 0 && inner < outer && hole_angle >= 0 && hole_angle < std::numbers::pi / 2))
        throw Error(ErrorCode::InvalidArgument, "pierced_shell: bad radii or hole angle");
    const int arc = std::max(4, segments / 2);
    std::vector<std::pair<double, double>> profile;
    auto point = [](double radius, double theta) {
        // sin(0) and sin(pi) must land exactly on the axis to form poles.
        double r = radius * std::sin(theta);
        if (theta == 0.0 || theta == std::numbers::pi)
            r = 0.0;
        return std::pair{r, radius * std::cos(theta)};
    };
    const double span = std::numbers::pi - 2 * hole_angle;
    for (int k = 0; k <= arc; ++k)
        profile.push_back(point(outer, hole_angle + span * k / arc));
    for (int k = arc; k >= 0; --k)
        profile.push_back(point(inner, hole_angle + span * k / arc));
    TriangleMesh m = revolve(profile, segments, center.x, center.y);
    for (auto& v : m.vertices)
        v.z += center.z;
    m.name = "pierced_shell";
    return m;
}

TriangleMesh cylinder(double cx, double cy, double radius, double z0, double z1, int segments)
{
    TriangleMesh m = revolve({{0, z0}, {radius, z0}, {radius, z1}, {0, z1}}, segments, cx, cy);
    m.name = "cylinder";
    return m;
}

TriangleMesh concat(const std::vector<TriangleMesh>& parts)
{
    TriangleMesh m;
    for (const auto& p : parts) {
        const auto base = static_cast<std::uint32_t>(m.vertices.size());
        m.vertices.insert(m.vertices.end(), p.vertices.begin(), p.vertices.end());
        for (const auto& t : p.triangles)
            m.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
        if (!m.name.empty())
            m.name += "+";
        m.name += p.name;
    }
    return m;
}

} // namespace mmdlp::shapes
