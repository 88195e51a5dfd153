#include <catch2/catch_amalgamated.hpp>

#include <eclsm/lsm.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

using namespace eclsm;

namespace {

Eigen::MatrixXcd random_matrix(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd z(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) z(i, j) = Complex(nd(rng), nd(rng));
    return z;
}

Eigen::VectorXcd random_vector(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = Complex(nd(rng), nd(rng));
    return v;
}

// Normal-equations route (eps I + Z* Z) g = Z* phi, solved densely. Entirely
// independent of the SVD filtering implementation.
Eigen::VectorXcd dense_tikhonov(const Eigen::MatrixXcd& z, const Eigen::VectorXcd& phi,
                                double eps) {
    const Eigen::MatrixXcd h =
        eps * Eigen::MatrixXcd::Identity(z.cols(), z.cols()) + z.adjoint() * z;
    return h.ldlt().solve(z.adjoint() * phi);
}

double dense_discrepancy_gap(const Eigen::MatrixXcd& z, const Eigen::VectorXcd& phi,
                             double eps, double delta) {
    const Eigen::VectorXcd g = dense_tikhonov(z, phi, eps);
    return (z * g - phi).squaredNorm() - delta * delta * g.squaredNorm();
}

}  // namespace

TEST_CASE("svd reconstructs the matrix and floors tiny singular values") {
    const Eigen::MatrixXcd z = random_matrix(8, 11);
    const SvdData svd = SvdData::decompose(z);
    REQUIRE(svd.rank() == 8);
    const Eigen::MatrixXcd rebuilt = svd.u * svd.s.asDiagonal() * svd.v.adjoint();
    CHECK((rebuilt - z).norm() <= 1e-12 * z.norm());
    for (int k = 1; k < svd.rank(); ++k) CHECK(svd.s[k] <= svd.s[k - 1]);

    // Append a numerically dead direction and watch it get cut.
    Eigen::MatrixXcd u = svd.u, v = svd.v;
    Eigen::VectorXd s = svd.s;
    s[7] = 1e-16 * s[0];
    const Eigen::MatrixXcd degenerate = u * s.asDiagonal() * v.adjoint();
    const SvdData cut = SvdData::decompose(degenerate);
    CHECK(cut.rank() == 7);

    CHECK_THROWS_AS(SvdData::decompose(Eigen::MatrixXcd::Zero(4, 4)), std::runtime_error);
}

TEST_CASE("tikhonov filtering matches the dense normal equations") {
    const Eigen::MatrixXcd z = random_matrix(8, 21);
    const Eigen::VectorXcd phi = random_vector(8, 22);
    const SvdData svd = SvdData::decompose(z);
    const double s1sq = svd.s[0] * svd.s[0];
    for (double eps : {1e-6 * s1sq, 1e-2 * s1sq, s1sq}) {
        const Eigen::VectorXcd g = tikhonov_solve(svd, phi, eps);
        const Eigen::VectorXcd g_ref = dense_tikhonov(z, phi, eps);
        CHECK((g - g_ref).norm() <= 1e-10 * g_ref.norm());
    }
    CHECK_THROWS_AS(tikhonov_solve(svd, phi, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(tikhonov_solve(svd, phi, -1.0), std::invalid_argument);
}

TEST_CASE("identity data makes the noise level itself the regularizer") {
    // With Z = I the discrepancy equation collapses to eps = delta exactly.
    const Eigen::MatrixXcd z = Eigen::MatrixXcd::Identity(6, 6);
    const SvdData svd = SvdData::decompose(z);
    const Eigen::VectorXcd phi = random_vector(6, 31);
    for (double delta : {1e-4, 1e-2, 0.3}) {
        const MorozovResult mr = morozov_epsilon(svd, phi, delta);
        CHECK(mr.bracket_flag == 0);
        CHECK(std::abs(mr.epsilon - delta) <= 1e-7 * delta);
    }
}

TEST_CASE("morozov root checks out against the dense functional") {
    const Eigen::MatrixXcd z = random_matrix(8, 41);
    const Eigen::VectorXcd phi = random_vector(8, 42);
    const SvdData svd = SvdData::decompose(z);
    const double delta = 0.1;
    const MorozovResult mr = morozov_epsilon(svd, phi, delta);
    REQUIRE(mr.bracket_flag == 0);
    // The independently computed functional must change sign across the root
    // and satisfy the discrepancy equality at it.
    CHECK(dense_discrepancy_gap(z, phi, mr.epsilon / 1.01, delta) < 0.0);
    CHECK(dense_discrepancy_gap(z, phi, mr.epsilon * 1.01, delta) > 0.0);
    const Eigen::VectorXcd g = dense_tikhonov(z, phi, mr.epsilon);
    const double mismatch = (z * g - phi).norm();
    CHECK(std::abs(mismatch - delta * g.norm()) <= 1e-6 * mismatch);

    // One sign change over the whole bracket: the root is unique.
    const double s1sq = svd.s[0] * svd.s[0];
    int sign_changes = 0;
    double prev = dense_discrepancy_gap(z, phi, 1e-16 * s1sq, delta);
    for (int k = 1; k <= 10000; ++k) {
        const double eps = 1e-16 * s1sq * std::pow(1e20, k / 10000.0);
        const double cur = dense_discrepancy_gap(z, phi, eps, delta);
        if ((prev < 0.0) != (cur < 0.0)) ++sign_changes;
        prev = cur;
    }
    CHECK(sign_changes == 1);
}

TEST_CASE("bracket flags report pinned solutions") {
    // Rank-deficient data with the probe vector orthogonal to the range:
    // no eps can push the discrepancy below delta |g|.
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(4, 4);
    z(0, 0) = 3.0;
    z(1, 1) = 1.0;
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
    phi[2] = 1.0;
    const SvdData svd = SvdData::decompose(z);
    const MorozovResult lo = morozov_epsilon(svd, phi, 0.01);
    CHECK(lo.bracket_flag == -1);
    // An absurd noise level pins the other end.
    const Eigen::VectorXcd in_range = random_vector(4, 5);
    const MorozovResult hi = morozov_epsilon(svd, in_range, 1e7);
    CHECK(hi.bracket_flag == +1);
    CHECK_THROWS_AS(morozov_epsilon(svd, phi, 0.0), std::invalid_argument);
}

TEST_CASE("scaling the probe vector leaves the choice of eps unchanged") {
    const Eigen::MatrixXcd z = random_matrix(8, 61);
    const Eigen::VectorXcd phi = random_vector(8, 62);
    const SvdData svd = SvdData::decompose(z);
    const MorozovResult a = morozov_epsilon(svd, phi, 0.05);
    const MorozovResult b = morozov_epsilon(svd, 1e3 * phi, 0.05);
    REQUIRE(a.bracket_flag == 0);
    CHECK(b.bracket_flag == 0);
    CHECK(std::abs(a.epsilon - b.epsilon) <= 1e-8 * a.epsilon);
    // and the solution norm scales linearly
    const double na = tikhonov_solve(svd, phi, a.epsilon).norm();
    const double nb = tikhonov_solve(svd, 1e3 * phi, b.epsilon).norm();
    CHECK(std::abs(nb - 1e3 * na) <= 1e-6 * nb);
}

TEST_CASE("joint data scaling is a noise-level shift") {
    // (c Z, c phi) at noise delta poses the same equation as (Z, phi) at
    // noise delta / c, so the regularized solution norms must agree.
    const Eigen::MatrixXcd z = random_matrix(8, 71);
    const Eigen::VectorXcd phi = random_vector(8, 72);
    const double c = 10.0;
    const SvdData svd = SvdData::decompose(z);
    const SvdData svd_scaled = SvdData::decompose(c * z);
    const MorozovResult base = morozov_epsilon(svd, phi, 0.01);
    const MorozovResult scaled = morozov_epsilon(svd_scaled, c * phi, 0.1);
    REQUIRE(base.bracket_flag == 0);
    REQUIRE(scaled.bracket_flag == 0);
    const double n_base = tikhonov_solve(svd, phi, base.epsilon).norm();
    const double n_scaled = tikhonov_solve(svd_scaled, c * phi, scaled.epsilon).norm();
    CHECK(std::abs(n_scaled - n_base) <= 1e-6 * n_base);
}

TEST_CASE("run_lsm indicator ignores a global data rescale") {
    // The discrepancy equation is posed relative to the largest singular
    // value, so scaling Z and phi together moves every epsilon by c^2 but
    // keeps g, and with it the indicator, unchanged.
    MultistaticMatrix data;
    data.z = random_matrix(8, 83);
    const SamplingGrid grid{0.011, 0.019, -0.01, 0.01, 6, 7};
    const double c = 1e3;
    auto make_rhs = [](double scale) {
        return RhsProvider([scale](Point2 xi) {
            Eigen::VectorXcd phi(8);
            for (int i = 0; i < 8; ++i)
                phi[i] = scale * Complex(std::sin(2.0 * xi.r * (i + 1) * 1e3),
                                         std::cos(xi.z * (i + 3) * 1e3));
            return phi;
        });
    };
    const IndicatorField base = run_lsm(data, grid, make_rhs(1.0), 0.02);
    MultistaticMatrix scaled = data;
    scaled.z *= c;
    const IndicatorField big = run_lsm(scaled, grid, make_rhs(c), 0.02);
    CHECK(big.argmax_index() == base.argmax_index());
    for (std::size_t i = 0; i < base.raw.size(); ++i)
        CHECK(std::abs(big.raw[i] - base.raw[i]) <= 1e-9 * base.raw[i]);
}

TEST_CASE("sampling grid indexing and validation") {
    SamplingGrid g{0.011, 0.019, -0.01, 0.01, 4, 5};
    CHECK_NOTHROW(g.validate());
    CHECK(g.size() == 20);
    CHECK(g.point(0, 0).r == Catch::Approx(0.012));
    CHECK(g.point(1, 0).r == Catch::Approx(0.014));
    CHECK(g.point(3, 0).r == Catch::Approx(0.018));
    CHECK(g.point(0, 0).z == Catch::Approx(-0.008));
    CHECK(g.index(2, 3) == 3 * 4 + 2);
    const Point2 p = g.point(g.index(2, 3));
    CHECK(p.r == g.point(2, 3).r);
    CHECK(p.z == g.point(2, 3).z);

    SamplingGrid bad = g;
    bad.n_r = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = g;
    bad.r_hi = bad.r_lo;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = g;
    bad.r_lo = -1e-3;
    bad.r_hi = 1e-3;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("run_lsm output is deterministic across worker counts") {
    MultistaticMatrix data;
    data.z = random_matrix(8, 81);
    const SamplingGrid grid{0.011, 0.019, -0.01, 0.01, 8, 10};
    RhsProvider rhs = [](Point2 xi) {
        Eigen::VectorXcd phi(8);
        for (int i = 0; i < 8; ++i)
            phi[i] = Complex(std::sin(3.0 * xi.r * (i + 1) * 1e3), std::cos(xi.z * (i + 2) * 1e3));
        return phi;
    };
    const IndicatorField one = run_lsm(data, grid, rhs, 0.01, 1);
    const IndicatorField four = run_lsm(data, grid, rhs, 0.01, 4);
    REQUIRE(one.raw.size() == four.raw.size());
    for (std::size_t i = 0; i < one.raw.size(); ++i) {
        CHECK(one.raw[i] == four.raw[i]);
        CHECK(one.epsilon[i] == four.epsilon[i]);
        CHECK(one.flag[i] == four.flag[i]);
        CHECK(one.raw[i] > 0.0);
        CHECK(one.epsilon[i] > 0.0);
    }
    // Normalization is an affine map onto [0, 1].
    const auto [mn, mx] = std::minmax_element(one.normalized.begin(), one.normalized.end());
    CHECK(*mn == 0.0);
    CHECK(*mx == 1.0);
    const int best = one.argmax_index();
    CHECK(one.normalized[best] == 1.0);
    CHECK(one.raw[best] == *std::max_element(one.raw.begin(), one.raw.end()));
}

TEST_CASE("run_lsm argument validation") {
    MultistaticMatrix data;
    data.z = random_matrix(8, 91);
    const SamplingGrid grid{0.011, 0.019, -0.01, 0.01, 2, 2};
    RhsProvider short_rhs = [](Point2) { return Eigen::VectorXcd::Zero(5).eval(); };
    CHECK_THROWS_AS(run_lsm(data, grid, short_rhs, 0.01), std::invalid_argument);

    MultistaticMatrix rect;
    rect.z = Eigen::MatrixXcd::Ones(3, 4);
    RhsProvider ok = [](Point2) { return Eigen::VectorXcd::Ones(3).eval(); };
    CHECK_THROWS_AS(run_lsm(rect, grid, ok, 0.01), std::invalid_argument);

    MultistaticMatrix zero;
    zero.z = Eigen::MatrixXcd::Zero(4, 4);
    RhsProvider ok4 = [](Point2) { return Eigen::VectorXcd::Ones(4).eval(); };
    CHECK_THROWS_AS(run_lsm(zero, grid, ok4, 0.01), std::runtime_error);
}

TEST_CASE("rhs providers reject sampling inside the wall") {
    // Two synthetic incident fields on a toy mesh stand in for the array.
    static const Mesh m = build_structured_mesh(0.02, -0.01, 0.01, 2e-3);
    auto fields = std::make_shared<std::vector<IncidentField>>();
    for (int k = 0; k < 2; ++k) {
        IncidentField f;
        f.total.mesh = &m;
        f.total.values = Eigen::VectorXcd::Constant(m.n_vertices(), Complex(k + 1.0, -1.0));
        fields->push_back(std::move(f));
    }
    const RhsProvider point_rhs = make_point_rhs(fields, 8.165e-3, 9.84e-3, 11.11e-3);
    const RhsProvider coil_rhs = make_coil_rhs(fields, 9.84e-3, 11.11e-3);
    const Eigen::VectorXcd a = point_rhs({12e-3, 0.0});
    CHECK(a.size() == 2);
    // reciprocity weight r_xi / r_probe against the constant field
    CHECK(std::abs(a[0] - Complex(1.0, -1.0) * (12e-3 / 8.165e-3)) <= 1e-14);
    const Eigen::VectorXcd b = coil_rhs({12e-3, 0.0});
    CHECK(std::abs(b[1] - Complex(2.0, -1.0)) <= 1e-14);
    CHECK_THROWS_AS(point_rhs({10.5e-3, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(coil_rhs({10.5e-3, 0.0}), std::invalid_argument);
    // Wall edges themselves stay allowed.
    CHECK_NOTHROW(point_rhs({9.84e-3, 0.0}));
    CHECK_NOTHROW(coil_rhs({11.11e-3, 0.0}));
    auto empty = std::make_shared<std::vector<IncidentField>>();
    CHECK_THROWS_AS(make_point_rhs(empty, 8.165e-3, 9.84e-3, 11.11e-3), std::invalid_argument);
    CHECK_THROWS_AS(make_coil_rhs(empty, 9.84e-3, 11.11e-3), std::invalid_argument);
}

TEST_CASE("argmax picks the first of equal maxima") {
    IndicatorField f;
    f.grid = SamplingGrid{0.0, 1.0, 0.0, 1.0, 2, 2};
    f.raw = {1.0, 3.0, 3.0, 2.0};
    CHECK(f.argmax_index() == 1);
}
