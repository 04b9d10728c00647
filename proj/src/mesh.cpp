#include "chiral/mesh.hpp"

#include "chiral/frame.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace chiral {

namespace {

std::vector<double> export_samples(const KnotPartition& part, int per_segment) {
    std::vector<double> s;
    const auto& t = part.knots();
    for (std::size_t j = 0; j + 1 < t.size(); ++j) {
        for (int m = 0; m < per_segment; ++m) s.push_back(t[j] + (t[j + 1] - t[j]) * m / per_segment);
    }
    s.push_back(t.back());
    return s;
}

// Angle of the stored normal in the rebuilt (n, b) plane, unwrapped along the curve.
std::vector<double> frame_offsets(const AdaptedFrame& stored, const AdaptedFrame& rebuilt) {
    std::vector<double> d(stored.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = std::atan2(stored.normal[i].dot(rebuilt.binormal[i]), stored.normal[i].dot(rebuilt.normal[i]));
        if (i > 0) {
            const double two_pi = 2.0 * std::numbers::pi;
            d[i] -= two_pi * std::round((d[i] - d[i - 1]) / two_pi);
        }
    }
    return d;
}

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double t) {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.begin()) return y.front();
    if (it == x.end()) return y.back();
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - w) * y[i - 1] + w * y[i];
}

}  // namespace

TubeMesh tube_mesh(const DesignState& state, const Vec3& reference_normal,
                   const EllipticalCrossSection& cs, double rho, double k, const MeshOptions& options) {
    if (!(rho > 0.0)) throw GeometryError("tube thickness must be positive");
    if (options.ring < 3 || options.samples_per_segment < 1) throw GeometryError("mesh resolution too low");
    const PartitionPtr& part = state.spine.partition();

    const AdaptedFrame at_nodes =
        apply_twist(build_rmf(state.spine, state.frame.params, reference_normal), state.twist);
    const std::vector<double> offset = frame_offsets(state.frame, at_nodes);

    TubeMesh mesh;
    mesh.ring = options.ring;
    mesh.params = export_samples(*part, options.samples_per_segment);
    const AdaptedFrame rebuilt = apply_twist(build_rmf(state.spine, mesh.params, reference_normal), state.twist);
    for (std::size_t i = 0; i < mesh.params.size(); ++i) {
        const double d = interpolate(state.frame.params, offset, mesh.params[i]);
        const Vec3 n = std::cos(d) * rebuilt.normal[i] + std::sin(d) * rebuilt.binormal[i];
        const Vec3 b = -std::sin(d) * rebuilt.normal[i] + std::cos(d) * rebuilt.binormal[i];
        const Vec3 c = state.spine.eval(mesh.params[i]).p;
        mesh.centers.push_back(c);
        mesh.normals.push_back(n);
        mesh.binormals.push_back(b);
        for (int m = 0; m < options.ring; ++m) {
            const double u = 2.0 * std::numbers::pi * m / options.ring;
            mesh.vertices.push_back(c + rho * (cs.a * std::cos(u) * n + cs.b * std::sin(u) * b));
        }
    }

    const int R = options.ring;
    const int rings = static_cast<int>(mesh.params.size());
    for (int i = 0; i + 1 < rings; ++i) {
        for (int m = 0; m < R; ++m) {
            const int a0 = i * R + m, a1 = i * R + (m + 1) % R;
            const int b0 = a0 + R, b1 = a1 + R;
            mesh.faces.push_back({a0, a1, b1});
            mesh.faces.push_back({a0, b1, b0});
        }
    }
    if (options.caps) {
        const int first = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(mesh.centers.front());
        const int last = first + 1;
        mesh.vertices.push_back(mesh.centers.back());
        const int tail = (rings - 1) * R;
        for (int m = 0; m < R; ++m) {
            mesh.faces.push_back({first, (m + 1) % R, m});
            mesh.faces.push_back({last, tail + m, tail + (m + 1) % R});
        }
    }

    const double half_width = rho * std::max(cs.a, cs.b);
    const double k_radius = k * rho * std::sqrt(cs.a * cs.b);
    if (k_radius > 0.1) {
        std::ostringstream w;
        w << "k rho sqrt(ab) = " << k_radius << " exceeds 0.1; the thin-wire model is inaccurate at this thickness";
        mesh.warnings.push_back(w.str());
    }
    double kappa = 0.0;
    for (double t : mesh.params) kappa = std::max(kappa, curvature(state.spine, t));
    const SimplicityReport simple = check_simplicity(state.spine, mesh.params, 2.0 * half_width);
    if (!simple.simple || kappa * half_width >= 1.0) {
        std::ostringstream w;
        w << "tube self-intersects (min distance " << simple.min_distance << ", max curvature x half width "
          << kappa * half_width << ")";
        mesh.warnings.push_back(w.str());
    }
    return mesh;
}

void write_off(std::ostream& out, const TubeMesh& mesh, double scale, const nlohmann::json& provenance) {
    out << "OFF\n";
    out << "# provenance " << provenance.dump() << '\n';
    for (const auto& w : mesh.warnings) out << "# warning " << w << '\n';
    out << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices) out << scale * v.x() << ' ' << scale * v.y() << ' ' << scale * v.z() << '\n';
    for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

}  // namespace chiral
