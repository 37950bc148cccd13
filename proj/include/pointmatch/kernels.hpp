// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace pointmatch::kernels {

// Low-level SoA kernels behind every arithmetic inner loop (centroids,
// residual sums, cross-covariances, rigid transforms, nearest-point scans).
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it. Per-point outputs
// (transform_points, nearest_index) are bit-identical across backends;
// reductions may differ by summation order within ~1e-13 relative.
struct Backend {
    const char* name;

    // out[3] = column means of (x, y, z), n >= 1.
    void (*centroid)(const double* x, const double* y, const double* z, std::size_t n,
                     double out[3]);

    // sum_i |a_i - b_i|^2 over paired points.
    double (*sum_sq_paired_diff)(const double* ax, const double* ay, const double* az,
                                 const double* bx, const double* by, const double* bz,
                                 std::size_t n);

    // out[9] (row-major 3x3) = sum_i a_i^T b_i, i.e. out[r*3+c] = sum a_i[r] * b_i[c].
    void (*cross_covariance)(const double* ax, const double* ay, const double* az,
                             const double* bx, const double* by, const double* bz,
                             std::size_t n, double out[9]);

    // Row-vector rigid motion: out_i = p_i * R + t, R row-major 3x3.
    // In-place allowed (out aliases input).
    void (*transform_points)(const double* x, const double* y, const double* z, std::size_t n,
                             const double rot[9], const double t[3], double* ox, double* oy,
                             double* oz);

    // sum_i |a_i * R + t - b_i|^2 without materializing the transformed points.
    double (*sum_sq_transformed_diff)(const double* ax, const double* ay, const double* az,
                                      std::size_t n, const double rot[9], const double t[3],
                                      const double* bx, const double* by, const double* bz);

    // argmin_j |p - q_j|^2, ties broken toward the lowest index; nq >= 1.
    // best_d2 (optional) receives the winning squared distance.
    std::size_t (*nearest_index)(double px, double py, double pz, const double* qx,
                                 const double* qy, const double* qz, std::size_t nq,
                                 double* best_d2);
};

const Backend& scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
#endif
bool avx2_available();

/// Active backend. Defaults to the best supported one; the POINTMATCH_KERNELS
/// environment variable ("scalar" or "avx2") overrides at startup.
const Backend& active();

/// Force a backend by name ("scalar", "avx2", "auto"). Throws on an unknown
/// or unsupported name. Intended for tests and benchmarking.
void set_backend(const std::string& name);

}  // namespace pointmatch::kernels
