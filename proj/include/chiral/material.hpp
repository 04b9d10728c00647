#pragma once

#include "chiral/spline.hpp"

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chiral {

using cplx = std::complex<double>;

// Vacuum constants in SI units.
inline constexpr double kEpsilon0 = 8.85e-12;
inline constexpr double kMu0 = 1.25e-6;

/// Wave number in 1/m at frequency f (THz).
double wave_number(double f_thz);
/// Vacuum wavelength in m at frequency f (THz).
double wavelength(double f_thz);

class MaterialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Metal { Silver, Gold };

Metal parse_metal(const std::string& tag);
std::string metal_name(Metal metal);

struct PermittivityRow {
    double f_thz;
    cplx eps;
};

/// Tabulated relative permittivity of one metal. Rows are strictly
/// increasing in frequency with Re eps < 0 < Im eps.
class PermittivityTable {
public:
    PermittivityTable(Metal metal, std::vector<PermittivityRow> rows);

    /// Built-in optical-band table (300 to 800 THz in 50 THz steps).
    static const PermittivityTable& builtin(Metal metal);

    /// Reads `metal,f_THz,re_eps,im_eps` rows; one table per metal found.
    static std::map<Metal, PermittivityTable> load_csv(const std::string& path);

    Metal metal() const { return metal_; }
    const std::vector<PermittivityRow>& rows() const { return rows_; }
    double f_min() const { return rows_.front().f_thz; }
    double f_max() const { return rows_.back().f_thz; }

    /// Exact at tabulated rows, piecewise linear (Re, Im separately) between.
    cplx lookup(double f_thz) const;

private:
    Metal metal_;
    std::vector<PermittivityRow> rows_;
};

cplx lookup_permittivity(Metal metal, double f_thz);

struct EllipticalCrossSection {
    double a;
    double b;

    EllipticalCrossSection(double a, double b);

    /// Normalized so that the long axis is 0.99.
    static EllipticalCrossSection from_aspect(double aspect);

    double area() const;
    double aspect() const { return b / a; }
};

// Mutation hook for the validation battery: flips the sign in front of
// eps in both denominators of the cross-section tensor.
enum class TensorVariant { Standard, FlippedDenominator };

/// Diagonal of the 2x2 cross-section tensor; entry 0 belongs to the
/// frame normal, entry 1 to the binormal.
Eigen::Vector2cd cross_section_tensor(const EllipticalCrossSection& cs, cplx eps_r,
                                      TensorVariant variant = TensorVariant::Standard);

struct PolarizationSample {
    Eigen::Matrix3cd tensor;
    Eigen::Vector2cd cross_section;
};

/// V diag(1, m) V^T for V = [t | n | b].
PolarizationSample polarization_tensor(const Eigen::Matrix3d& frame,
                                       const Eigen::Vector2cd& m);

/// Derivative of the frame matrix for a spine perturbation with derivative
/// dh (at the sample, parameter derivative) and a twist increment phi.
Eigen::Matrix3d frame_derivative(const Eigen::Matrix3d& frame, double speed, const Vec3& dh,
                                 double phi);

/// dV M V^T + V M dV^T.
Eigen::Matrix3cd polarization_tensor_derivative(const Eigen::Matrix3d& frame,
                                                const Eigen::Matrix3d& dframe,
                                                const Eigen::Vector2cd& m);

/// Frequency with Re eps(f) = -b/a by bisection to 0.1 THz, if bracketed.
std::optional<double> plasmonic_resonance(const EllipticalCrossSection& cs, Metal metal);
std::optional<double> plasmonic_resonance(double aspect, const PermittivityTable& table,
                                          double tol_thz = 0.1);

// Bound checks on the polarization tensor. All quantities are relative,
// so eps_0 cancels.

/// gamma = 3 pi/2 - (alpha + beta)/2 from the polar angles (in (pi, 3pi/2))
/// of conj(eps_r) and conj(eps_r - 1).
double bound_phase(cplx eps_r);

/// The three sign conditions the phase must satisfy.
bool bound_phase_admissible(cplx eps_r, double gamma);

/// xi . Im(conj(eps_r - 1) M) xi / Im(conj(eps_r - 1)); at most |xi|^2.
double imaginary_bound_ratio(const Eigen::Matrix3cd& M, cplx eps_r, const Vec3& xi);

/// xi . Re(e^{i gamma} conj(eps_r - 1) M) xi / Re(e^{i gamma} conj(eps_r - 1));
/// at least |xi|^2.
double real_bound_ratio(const Eigen::Matrix3cd& M, cplx eps_r, double gamma, const Vec3& xi);

}  // namespace chiral
