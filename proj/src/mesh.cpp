#include "myers/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include <Eigen/Geometry>

namespace myers::mesh {

TriangleMesh icosphere(int level, double radius) {
    TriangleMesh m;
    const double zr = 1.0 / std::sqrt(5.0);
    const double rr = 2.0 / std::sqrt(5.0);
    m.vertices.emplace_back(0.0, 0.0, 1.0);
    for (int k = 0; k < 5; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 5.0;
        m.vertices.emplace_back(rr * std::cos(a), rr * std::sin(a), zr);
    }
    for (int k = 0; k < 5; ++k) {
        const double a = 2.0 * std::numbers::pi * (k + 0.5) / 5.0;
        m.vertices.emplace_back(rr * std::cos(a), rr * std::sin(a), -zr);
    }
    m.vertices.emplace_back(0.0, 0.0, -1.0);

    for (int k = 0; k < 5; ++k) {
        const int u0 = 1 + k, u1 = 1 + (k + 1) % 5;
        const int l0 = 6 + k, l1 = 6 + (k + 1) % 5;
        m.triangles.push_back({0, u0, u1});
        m.triangles.push_back({u0, l0, u1});
        m.triangles.push_back({u1, l0, l1});
        m.triangles.push_back({11, l1, l0});
    }

    for (int s = 0; s < level; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const Eigen::Vector3d p = (m.vertices[a] + m.vertices[b]).normalized();
            m.vertices.push_back(p);
            const int id = static_cast<int>(m.vertices.size() - 1);
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& t : m.triangles) {
            const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.triangles = std::move(next);
    }
    for (auto& v : m.vertices) v *= radius;
    return m;
}

double spherical_triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                               const Eigen::Vector3d& c, double radius) {
    // Van Oosterom & Strackee solid angle.
    const Eigen::Vector3d ua = a.normalized(), ub = b.normalized(), uc = c.normalized();
    const double num = std::fabs(ua.dot(ub.cross(uc)));
    const double den = 1.0 + ua.dot(ub) + ub.dot(uc) + uc.dot(ua);
    return 2.0 * std::atan2(num, den) * radius * radius;
}

int sphere_level_for_resolution(int resolution) {
    int lg = 0;
    while ((2 << lg) <= resolution) ++lg;
    return std::clamp(lg - 1, 2, 7);
}

}  // namespace myers::mesh
