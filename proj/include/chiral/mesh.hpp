#pragma once

#include "chiral/material.hpp"
#include "chiral/objective.hpp"

#include <array>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

namespace chiral {

struct MeshOptions {
    int ring = 32;                 // vertices per cross-section
    int samples_per_segment = 10;  // rings per spline segment
    bool caps = false;
};

/// Triangulated tube around a wire. Ring i is centred at centers[i] and
/// spans normals[i], binormals[i] scaled by rho a and rho b.
struct TubeMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<double> params;
    std::vector<Vec3> centers;
    std::vector<Vec3> normals;
    std::vector<Vec3> binormals;
    int ring = 0;
    std::vector<std::string> warnings;
};

/// Sweeps the ellipse rho (a cos u, b sin u) along the adapted frame.
/// Between quadrature nodes the frame is the rebuilt rotation minimizing
/// frame plus twist, rotated by the interpolated offset to the stored
/// frame `state.frame`. `k` (same length unit) only feeds the accuracy
/// warning, which compares the mean radius rho sqrt(ab) with 0.1 / k.
TubeMesh tube_mesh(const DesignState& state, const Vec3& reference_normal,
                   const EllipticalCrossSection& cs, double rho, double k, const MeshOptions& options);

/// ASCII OFF with `#` comment lines for the provenance; coordinates are
/// multiplied by `scale`.
void write_off(std::ostream& out, const TubeMesh& mesh, double scale, const nlohmann::json& provenance);

}  // namespace chiral
