// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pointmatch/linalg.hpp"

namespace pointmatch {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structure-of-arrays coordinate block. Any size including zero; this is the
/// layout the SIMD kernels consume. PointSet wraps it with labels and the
/// nonempty/finite invariants for data that crosses the API boundary.
class Coords {
public:
    Coords() = default;
    explicit Coords(std::size_t n) : xs_(n, 0.0), ys_(n, 0.0), zs_(n, 0.0) {}

    std::size_t size() const { return xs_.size(); }
    bool empty() const { return xs_.empty(); }

    Vec3 at(std::size_t i) const { return {xs_[i], ys_[i], zs_[i]}; }
    void set(std::size_t i, const Vec3& p) {
        xs_[i] = p.x;
        ys_[i] = p.y;
        zs_[i] = p.z;
    }
    void push_back(const Vec3& p) {
        xs_.push_back(p.x);
        ys_.push_back(p.y);
        zs_.push_back(p.z);
    }

    const double* x() const { return xs_.data(); }
    const double* y() const { return ys_.data(); }
    const double* z() const { return zs_.data(); }
    double* x() { return xs_.data(); }
    double* y() { return ys_.data(); }
    double* z() { return zs_.data(); }

private:
    std::vector<double> xs_, ys_, zs_;
};

/// Labelled 3-D point configuration. Invariants: at least one point, finite
/// coordinates, unique ids.
struct PointSet {
    Coords coords;
    std::vector<std::string> ids;

    std::size_t size() const { return coords.size(); }
    Vec3 point(std::size_t i) const { return coords.at(i); }

    /// Validating constructor; throws Error on violated invariants.
    static PointSet make(Coords coords, std::vector<std::string> ids);
};

/// ZYX Euler angles: rotation = Rz(theta12) * Ry(theta13) * Rx(theta23),
/// theta12 and theta23 in [-pi, pi), theta13 in [-pi/2, pi/2]. Construction
/// through normalized() maps arbitrary inputs into range via the identity
/// (a, b, c) ~ (a + pi, pi - b, c + pi).
struct EulerAngles {
    double theta12 = 0.0;
    double theta13 = 0.0;
    double theta23 = 0.0;

    static EulerAngles normalized(double t12, double t13, double t23);
    bool in_range() const;
};

/// Proper rigid motion acting on row vectors: p -> p * rotation + translation.
struct RigidTransform {
    Mat3 rotation = Mat3::identity();
    Vec3 translation{};

    /// rotation^T rotation = I and det = +1, both within tol.
    bool is_rotation(double tol = 1e-10) const;
    RigidTransform compose_after(const RigidTransform& first) const;
};

/// Result of a partial Procrustes registration of source onto target.
struct ProcrustesFit {
    Mat3 rotation = Mat3::identity();  // Gamma-hat
    Vec3 translation{};                // gamma-hat
    double distance = 0.0;             // size-and-shape distance d_S
    Coords fitted;                     // source * rotation + translation
    bool degenerate = false;           // optimal rotation not unique (rank-deficient pairing)
};

/// Translate so the centroid is at the origin. Throws on an empty input.
Coords center(const Coords& ps);
PointSet center(const PointSet& ps);

/// Exact rotation matrices about the coordinate axes (row-vector convention).
Mat3 rot_x(double theta);
Mat3 rot_y(double theta);
Mat3 rot_z(double theta);

Mat3 euler_to_matrix(const EulerAngles& a);

/// Inverse of euler_to_matrix; the gimbal-locked case |theta13| = pi/2 fixes
/// theta23 = 0.
EulerAngles matrix_to_euler(const Mat3& r);

/// log of the SO(3) Haar density in Euler-angle coordinates:
/// log(cos theta13) - log(8 pi^2); -inf at theta13 = +/-pi/2.
double haar_log_density(const EulerAngles& a);

/// Optimal rotation + translation (no scaling) of source onto target over
/// paired points; minimizes the Frobenius residual, which the fit reports as
/// the size-and-shape distance. Both inputs are re-centered internally and
/// the implied translation is returned. Rank-deficient pairings (p <= 2 or
/// collinear) yield a well-defined fit with the degenerate flag set.
ProcrustesFit partial_procrustes(const Coords& source, const Coords& target);

Coords apply_transform(const Coords& ps, const RigidTransform& t);
PointSet apply_transform(const PointSet& ps, const RigidTransform& t);

}  // namespace pointmatch
