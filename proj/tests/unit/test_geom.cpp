// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "pointmatch/geom.hpp"
#include "pointmatch/rng.hpp"
#include "test_support.hpp"

using namespace pointmatch;
using testsupport::kPi;

namespace {

Mat3 random_rotation(Rng& rng) {
    return euler_to_matrix(EulerAngles::normalized(rng.uniform(-kPi, kPi),
                                                   rng.uniform(-kPi / 2, kPi / 2),
                                                   rng.uniform(-kPi, kPi)));
}

bool is_so3(const Mat3& r, double tol) {
    return (r.transpose() * r).max_abs_diff(Mat3::identity()) <= tol &&
           std::abs(r.det() - 1.0) <= tol;
}

}  // namespace

TEST_SUITE("geom") {

TEST_CASE("center: examples and invariants") {
    Coords c;
    c.push_back({2, 0, 0});
    c.push_back({0, 0, 0});
    const Coords out = center(c);
    CHECK(out.at(0).x == doctest::Approx(1.0));
    CHECK(out.at(1).x == doctest::Approx(-1.0));

    Coords single;
    single.push_back({5, 5, 5});
    const Coords s = center(single);
    CHECK(s.at(0).norm() == doctest::Approx(0.0));

    // centroid at zero, pairwise distances preserved
    Rng rng(3);
    Coords r = testsupport::random_coords(rng, 9, 4.0);
    const Coords rc = center(r);
    double cx = 0, cy = 0, cz = 0;
    for (std::size_t i = 0; i < rc.size(); ++i) {
        cx += rc.at(i).x;
        cy += rc.at(i).y;
        cz += rc.at(i).z;
    }
    CHECK(std::abs(cx / 9) < 1e-12);
    CHECK(std::abs(cy / 9) < 1e-12);
    CHECK(std::abs(cz / 9) < 1e-12);
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = i + 1; j < r.size(); ++j)
            CHECK((r.at(i) - r.at(j)).norm() ==
                  doctest::Approx((rc.at(i) - rc.at(j)).norm()).epsilon(1e-12));

    CHECK_THROWS_AS(center(Coords{}), Error);
}

TEST_CASE("euler_to_matrix: axis conventions") {
    const Mat3 id = euler_to_matrix({0, 0, 0});
    CHECK(id.max_abs_diff(Mat3::identity()) < 1e-15);

    // Rz(pi/2): rows (cos, sin, 0), (-sin, cos, 0), (0, 0, 1)
    const Mat3 rz = euler_to_matrix({kPi / 2, 0, 0});
    CHECK(rz(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rz(0, 1) == doctest::Approx(1.0));
    CHECK(rz(1, 0) == doctest::Approx(-1.0));
    CHECK(rz(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rz(2, 2) == doctest::Approx(1.0));

    // Rx lower-left 2x2 block has the -sin
    const Mat3 rx = rot_x(0.3);
    CHECK(rx(1, 2) == doctest::Approx(std::sin(0.3)));
    CHECK(rx(2, 1) == doctest::Approx(-std::sin(0.3)));

    Rng rng(7);
    for (int i = 0; i < 200; ++i) CHECK(is_so3(random_rotation(rng), 1e-12));
}

TEST_CASE("matrix_to_euler inverts euler_to_matrix") {
    Rng rng(19);
    for (int i = 0; i < 500; ++i) {
        const EulerAngles a = {rng.uniform(-kPi, kPi), rng.uniform(-kPi / 2, kPi / 2),
                               rng.uniform(-kPi, kPi)};
        const Mat3 m = euler_to_matrix(a);
        const EulerAngles b = matrix_to_euler(m);
        CHECK(euler_to_matrix(b).max_abs_diff(m) < 1e-12);
        CHECK(b.in_range());
    }
}

TEST_CASE("angle normalization maps to the same rotation") {
    Rng rng(23);
    for (int i = 0; i < 300; ++i) {
        const double a = rng.uniform(-8, 8), b = rng.uniform(-8, 8), c = rng.uniform(-8, 8);
        const EulerAngles n = EulerAngles::normalized(a, b, c);
        CHECK(n.in_range());
        CHECK(euler_to_matrix(n).max_abs_diff(rot_z(a) * rot_y(b) * rot_x(c)) < 1e-12);
    }
}

TEST_CASE("haar_log_density values and normalization by quadrature") {
    CHECK(haar_log_density({0.5, 0.0, -2.0}) ==
          doctest::Approx(-std::log(8 * kPi * kPi)).epsilon(1e-14));
    CHECK(haar_log_density({0.0, kPi / 3, 0.0}) ==
          doctest::Approx(std::log(0.5) - std::log(8 * kPi * kPi)).epsilon(1e-14));
    CHECK(haar_log_density({0.0, kPi / 2, 0.0}) == -std::numeric_limits<double>::infinity());

    // 3-D Simpson over the full angle box
    const int n12 = 40, n13 = 80, n23 = 40;  // even counts
    const double h12 = 2 * kPi / n12, h13 = kPi / n13, h23 = 2 * kPi / n23;
    auto w = [](int i, int n) { return i == 0 || i == n ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0); };
    double integral = 0.0;
    for (int i = 0; i <= n12; ++i)
        for (int j = 0; j <= n13; ++j)
            for (int k = 0; k <= n23; ++k) {
                const EulerAngles a{-kPi + i * h12, -kPi / 2 + j * h13, -kPi + k * h23};
                const double dens = std::exp(haar_log_density(a));
                integral += w(i, n12) * w(j, n13) * w(k, n23) * dens;
            }
    integral *= h12 * h13 * h23 / 27.0;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("partial_procrustes: exact recovery of a known rotation") {
    Coords src;
    src.push_back({1, 0, 0});
    src.push_back({-1, 0.5, 0});
    src.push_back({0, -0.5, 1.5});
    src.push_back({0.2, 1.0, -0.7});
    const Coords src_c = center(src);

    const ProcrustesFit self = partial_procrustes(src_c, src_c);
    CHECK(self.rotation.max_abs_diff(Mat3::identity()) < 1e-10);
    CHECK(self.distance == doctest::Approx(0.0).epsilon(1e-12));

    const Mat3 rz = rot_z(kPi / 4);
    RigidTransform t{rz, Vec3{}};
    const Coords tgt = apply_transform(src_c, t);
    const ProcrustesFit fit = partial_procrustes(src_c, tgt);
    CHECK(fit.rotation.max_abs_diff(rz) < 1e-10);
    CHECK(fit.distance < 1e-10);
    CHECK(!fit.degenerate);
    CHECK(is_so3(fit.rotation, 1e-10));
}

TEST_CASE("partial_procrustes: grid oracle two-sided check on noisy pairs") {
    Rng rng(101);
    for (int rep = 0; rep < 3; ++rep) {
        Coords src = testsupport::random_coords(rng, 4, 2.0);
        const Mat3 r = random_rotation(rng);
        Coords tgt = apply_transform(src, {r, {0.4, -0.2, 0.9}});
        for (std::size_t i = 0; i < tgt.size(); ++i)
            tgt.set(i, tgt.at(i) + Vec3{rng.normal(0, 0.05), rng.normal(0, 0.05),
                                        rng.normal(0, 0.05)});
        const ProcrustesFit fit = partial_procrustes(src, tgt);
        const double grid = testsupport::grid_rotation_min(src, tgt, 0.05, 0.01);
        CHECK(fit.distance <= grid + 1e-9);
        CHECK(grid <= fit.distance + 0.05);  // grid resolution slack near the optimum
    }
}

TEST_CASE("partial_procrustes: translation maps source centroid onto target centroid") {
    Rng rng(55);
    const Coords src = testsupport::random_coords(rng, 6, 3.0);
    const Mat3 r = random_rotation(rng);
    const Vec3 shift{2.0, -7.0, 0.25};
    const Coords tgt = apply_transform(src, {r, shift});
    const ProcrustesFit fit = partial_procrustes(src, tgt);
    CHECK(fit.distance < 1e-9);
    // fitted = src * rot + trans reproduces the target
    for (std::size_t i = 0; i < src.size(); ++i)
        CHECK((fit.fitted.at(i) - tgt.at(i)).norm() < 1e-9);
}

TEST_CASE("partial_procrustes: invariance and optimality") {
    Rng rng(77);
    const Coords src = testsupport::random_coords(rng, 5, 3.0);
    const Coords tgt = testsupport::random_coords(rng, 5, 3.0);
    const double d0 = partial_procrustes(src, tgt).distance;

    for (int i = 0; i < 100; ++i) {
        const Mat3 r = random_rotation(rng);
        const Vec3 g{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const double d = partial_procrustes(apply_transform(src, {r, g}), tgt).distance;
        CHECK(d == doctest::Approx(d0).epsilon(1e-10));
    }

    const Coords src_c = center(src), tgt_c = center(tgt);
    for (int i = 0; i < 1000; ++i) {
        const double resid = testsupport::residual_at_rotation(src_c, tgt_c, random_rotation(rng));
        CHECK(d0 <= resid + 1e-12);
    }
}

TEST_CASE("partial_procrustes: reflection case still returns a proper rotation") {
    Rng rng(123);
    const Coords src = testsupport::random_coords(rng, 6, 2.0);
    Coords tgt(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        Vec3 p = src.at(i);
        tgt.set(i, {p.x, p.y, -p.z});  // mirrored: unconstrained optimum is a reflection
    }
    const ProcrustesFit fit = partial_procrustes(src, tgt);
    CHECK(is_so3(fit.rotation, 1e-10));
    CHECK(fit.distance > 0.1);  // reflection cannot be reproduced by a rotation
}

TEST_CASE("partial_procrustes: degenerate pairings are flagged but usable") {
    Coords one;
    one.push_back({1, 2, 3});
    Coords one_t;
    one_t.push_back({-4, 0, 1});
    const ProcrustesFit f1 = partial_procrustes(one, one_t);
    CHECK(f1.degenerate);
    CHECK(f1.distance == doctest::Approx(0.0));  // single pair registers exactly

    Coords two, two_t;
    two.push_back({1, 0, 0});
    two.push_back({-1, 0, 0});
    two_t.push_back({0, 2, 0});
    two_t.push_back({0, -2, 0});
    const ProcrustesFit f2 = partial_procrustes(two, two_t);
    CHECK(f2.degenerate);
    CHECK(is_so3(f2.rotation, 1e-9));
    // two points: optimal residual is the size mismatch sqrt(2) * (2 - 1)
    CHECK(f2.distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

    CHECK_THROWS_AS(partial_procrustes(Coords{}, Coords{}), Error);
    CHECK_THROWS_AS(partial_procrustes(one, two), Error);
}

TEST_CASE("apply_transform: examples and composition") {
    Coords origin;
    origin.push_back({0, 0, 0});
    const Coords moved = apply_transform(origin, {Mat3::identity(), {1, 2, 3}});
    CHECK((moved.at(0) - Vec3{1, 2, 3}).norm() < 1e-15);

    Rng rng(9);
    const Coords ps = testsupport::random_coords(rng, 8, 5.0);
    const RigidTransform t1{random_rotation(rng), {0.5, -1, 2}};
    const RigidTransform t2{random_rotation(rng), {-2, 0.25, 1}};
    const Coords a = apply_transform(apply_transform(ps, t1), t2);
    const Coords b = apply_transform(ps, t2.compose_after(t1));
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK((a.at(i) - b.at(i)).norm() < 1e-12);

    // pairwise distances preserved
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j)
            CHECK((a.at(i) - a.at(j)).norm() ==
                  doctest::Approx((ps.at(i) - ps.at(j)).norm()).epsilon(1e-12));
}

TEST_CASE("jacobi_eigen_sym4 solves random symmetric systems") {
    Rng rng(2024);
    for (int rep = 0; rep < 100; ++rep) {
        double a[4][4];
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) a[i][j] = a[j][i] = rng.uniform(-3, 3);
        const SymEig4 e = jacobi_eigen_sym4(a);
        for (int j = 0; j < 4; ++j) {
            for (int i = 0; i < 4; ++i) {
                double av = 0.0;
                for (int k = 0; k < 4; ++k) av += a[i][k] * e.vectors[k][j];
                CHECK(av == doctest::Approx(e.values[j] * e.vectors[i][j]).epsilon(1e-10).scale(4.0));
            }
        }
        CHECK(e.values[0] >= e.values[1]);
        CHECK(e.values[1] >= e.values[2]);
        CHECK(e.values[2] >= e.values[3]);
    }
}

TEST_CASE("PointSet invariants") {
    Coords c;
    c.push_back({0, 0, 0});
    CHECK_THROWS_AS(PointSet::make(Coords{}, {}), Error);
    CHECK_THROWS_AS(PointSet::make(c, {"a", "b"}), Error);
    Coords dup;
    dup.push_back({0, 0, 0});
    dup.push_back({1, 1, 1});
    CHECK_THROWS_AS(PointSet::make(dup, {"a", "a"}), Error);
    Coords bad;
    bad.push_back({std::nan(""), 0, 0});
    CHECK_THROWS_AS(PointSet::make(bad, {"a"}), Error);
}

}  // TEST_SUITE
