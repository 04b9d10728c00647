#pragma once

#include "chiral/objective.hpp"

#include <json.hpp>
#include <optional>
#include <string>

namespace chiral {

/// Wire design as stored on disk, SI units. The optional frame block holds
/// the propagated normals and twist rates at the curve quadrature nodes;
/// without it the frame is rebuilt as a rotation minimizing frame plus twist.
struct GeometryFile {
    double length_m = 0.0;
    std::vector<double> knot_parameters;
    Eigen::MatrixX3d spine_knots;
    Eigen::VectorXd twist_knots;
    Vec3 reference_normal = Vec3::UnitX();

    int points_per_segment = 11;
    std::vector<Vec3> frame_normals;
    std::vector<double> frame_twist_rates;

    // Material context (informational for scans and exports).
    std::optional<std::string> metal;
    std::optional<double> f_opt_thz;
    std::optional<double> aspect;
    std::optional<double> rho_m;

    nlohmann::json provenance;
};

nlohmann::json to_json(const GeometryFile& g);
GeometryFile geometry_from_json(const nlohmann::json& j);

void write_geometry(const std::string& path, const GeometryFile& g);
GeometryFile read_geometry(const std::string& path);

/// Snapshot of a design given in `unit_m` meters per length unit.
GeometryFile to_geometry_file(const DesignState& state, double length, double unit_m,
                              const CurveQuadrature& quad, const Vec3& reference_normal);

/// Design in meters with its frame at the quadrature nodes of `quad`, which
/// must be built on `partition(file)` with file.points_per_segment.
DesignState to_design_state(const GeometryFile& g, const CurveQuadrature& quad);

PartitionPtr partition_of(const GeometryFile& g);

/// Multiplies every length by `factor` (twist rates divide by it).
DesignState rescale(const DesignState& state, double factor);

nlohmann::json frame_to_json(const AdaptedFrame& frame);
AdaptedFrame frame_from_json(const nlohmann::json& j);

}  // namespace chiral
