#include "chiral/geometry_io.hpp"

#include <fstream>

namespace chiral {

using nlohmann::json;

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw GeometryError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json frame_to_json(const AdaptedFrame& frame) {
    json normals = json::array(), tangents = json::array();
    for (std::size_t i = 0; i < frame.size(); ++i) {
        normals.push_back(vec3_json(frame.normal[i]));
        tangents.push_back(vec3_json(frame.tangent[i]));
    }
    return {{"params", frame.params},
            {"tangents", tangents},
            {"normals", normals},
            {"twist_rates", frame.beta},
            {"twisted", frame.twisted}};
}

AdaptedFrame frame_from_json(const json& j) {
    AdaptedFrame f;
    f.params = j.at("params").get<std::vector<double>>();
    f.beta = j.at("twist_rates").get<std::vector<double>>();
    f.twisted = j.value("twisted", true);
    for (const auto& v : j.at("tangents")) f.tangent.push_back(vec3_from(v));
    for (const auto& v : j.at("normals")) f.normal.push_back(vec3_from(v));
    if (f.tangent.size() != f.params.size() || f.normal.size() != f.params.size() ||
        f.beta.size() != f.params.size()) {
        throw GeometryError("inconsistent frame block");
    }
    for (std::size_t i = 0; i < f.size(); ++i) f.binormal.push_back(f.tangent[i].cross(f.normal[i]));
    return f;
}

json to_json(const GeometryFile& g) {
    json spine = json::array();
    for (Eigen::Index i = 0; i < g.spine_knots.rows(); ++i) {
        spine.push_back(vec3_json(g.spine_knots.row(i).transpose()));
    }
    json j = {{"length_m", g.length_m},
              {"knot_parameters", g.knot_parameters},
              {"spine_knots", spine},
              {"twist_knots", std::vector<double>(g.twist_knots.data(),
                                                  g.twist_knots.data() + g.twist_knots.size())},
              {"reference_normal", vec3_json(g.reference_normal)}};
    if (!g.frame_normals.empty()) {
        json normals = json::array();
        for (const auto& n : g.frame_normals) normals.push_back(vec3_json(n));
        j["frame"] = {{"points_per_segment", g.points_per_segment},
                      {"normals", normals},
                      {"twist_rates", g.frame_twist_rates}};
    }
    if (g.metal) j["metal"] = *g.metal;
    if (g.f_opt_thz) j["f_opt_thz"] = *g.f_opt_thz;
    if (g.aspect) j["aspect"] = *g.aspect;
    if (g.rho_m) j["rho_m"] = *g.rho_m;
    if (!g.provenance.is_null()) j["provenance"] = g.provenance;
    return j;
}

GeometryFile geometry_from_json(const json& j) {
    GeometryFile g;
    try {
        g.length_m = j.at("length_m").get<double>();
        g.knot_parameters = j.at("knot_parameters").get<std::vector<double>>();
        const auto& spine = j.at("spine_knots");
        g.spine_knots.resize(static_cast<Eigen::Index>(spine.size()), 3);
        for (std::size_t i = 0; i < spine.size(); ++i) {
            g.spine_knots.row(static_cast<Eigen::Index>(i)) = vec3_from(spine[i]).transpose();
        }
        const auto twist = j.at("twist_knots").get<std::vector<double>>();
        g.twist_knots = Eigen::Map<const Eigen::VectorXd>(twist.data(), static_cast<Eigen::Index>(twist.size()));
        g.reference_normal = vec3_from(j.at("reference_normal"));
        if (j.contains("frame")) {
            const auto& f = j["frame"];
            g.points_per_segment = f.at("points_per_segment").get<int>();
            for (const auto& v : f.at("normals")) g.frame_normals.push_back(vec3_from(v));
            g.frame_twist_rates = f.at("twist_rates").get<std::vector<double>>();
        }
        if (j.contains("metal")) g.metal = j["metal"].get<std::string>();
        if (j.contains("f_opt_thz")) g.f_opt_thz = j["f_opt_thz"].get<double>();
        if (j.contains("aspect")) g.aspect = j["aspect"].get<double>();
        if (j.contains("rho_m")) g.rho_m = j["rho_m"].get<double>();
        if (j.contains("provenance")) g.provenance = j["provenance"];
    } catch (const json::exception& e) {
        throw GeometryError(std::string("malformed geometry file: ") + e.what());
    }
    const std::size_t n = g.knot_parameters.size();
    if (static_cast<std::size_t>(g.spine_knots.rows()) != n ||
        static_cast<std::size_t>(g.twist_knots.size()) != n) {
        throw GeometryError("geometry file: knot arrays differ in length");
    }
    return g;
}

void write_geometry(const std::string& path, const GeometryFile& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(g).dump(2) << '\n';
}

GeometryFile read_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw GeometryError(std::string("geometry file is not valid JSON: ") + e.what());
    }
    return geometry_from_json(j);
}

DesignState rescale(const DesignState& state, double factor) {
    std::vector<double> knots = state.spine.partition()->knots();
    for (double& t : knots) t *= factor;
    auto part = std::make_shared<const KnotPartition>(std::move(knots));
    DesignState out{SpineSpline(part, state.spine.knot_points() * factor),
                    TwistSpline(part, state.twist.knot_values()), state.frame};
    for (double& t : out.frame.params) t *= factor;
    for (double& b : out.frame.beta) b /= factor;
    return out;
}

GeometryFile to_geometry_file(const DesignState& state, double length, double unit_m,
                              const CurveQuadrature& quad, const Vec3& reference_normal) {
    const DesignState si = rescale(state, unit_m);
    GeometryFile g;
    g.length_m = length * unit_m;
    g.knot_parameters = si.spine.partition()->knots();
    g.spine_knots = si.spine.knot_points();
    g.twist_knots = si.twist.knot_values();
    g.reference_normal = reference_normal;
    g.points_per_segment = quad.points_per_segment();
    g.frame_normals = si.frame.normal;
    g.frame_twist_rates = si.frame.beta;
    return g;
}

PartitionPtr partition_of(const GeometryFile& g) {
    return std::make_shared<const KnotPartition>(g.knot_parameters);
}

DesignState to_design_state(const GeometryFile& g, const CurveQuadrature& quad) {
    const PartitionPtr& part = quad.partition();
    if (part->knots() != g.knot_parameters) {
        throw GeometryError("quadrature partition does not match the geometry file");
    }
    SpineSpline spine(part, g.spine_knots);
    TwistSpline twist(part, g.twist_knots);
    if (g.frame_normals.empty()) return DesignState::create(spine, twist, g.reference_normal, quad);

    if (g.frame_normals.size() != quad.size() || g.frame_twist_rates.size() != quad.size() ||
        g.points_per_segment != quad.points_per_segment()) {
        throw GeometryError("stored frame does not match the curve quadrature");
    }
    check_regularity(spine, quad.nodes());
    AdaptedFrame f;
    f.params = quad.nodes();
    f.beta = g.frame_twist_rates;
    f.twisted = true;
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const Vec3 t = spine.eval(quad.nodes()[i]).dp.normalized();
        const Vec3 n = (g.frame_normals[i] - g.frame_normals[i].dot(t) * t).normalized();
        f.tangent.push_back(t);
        f.normal.push_back(n);
        f.binormal.push_back(t.cross(n));
    }
    return {std::move(spine), std::move(twist), std::move(f)};
}

}  // namespace chiral
