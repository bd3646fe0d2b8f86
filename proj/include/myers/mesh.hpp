#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace myers::mesh {

struct TriangleMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
};

// Icosahedron with a vertex at each pole, refined `level` times by edge
// bisection and projected onto the sphere of the given radius.
TriangleMesh icosphere(int level, double radius = 1.0);

// Area of the geodesic triangle spanned by three points on a sphere.
double spherical_triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                               const Eigen::Vector3d& c, double radius);

// Subdivision level the sphere uses for a requested scalar resolution
// (64 -> 5, i.e. 10242 vertices).
int sphere_level_for_resolution(int resolution);

}  // namespace myers::mesh
