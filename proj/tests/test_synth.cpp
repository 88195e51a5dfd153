#include <catch2/catch_amalgamated.hpp>

#include <eclsm/synth.hpp>

#include <cmath>
#include <random>

using namespace eclsm;

namespace {

Mesh probe_bench_mesh(double h, bool with_deposit) {
    std::vector<double> rl = uniform_lines(0.0, 0.022, h);
    std::vector<double> zl = uniform_lines(-0.012, 0.012, h);
    snap_line(rl, 9.84e-3, 0.35 * h);
    snap_line(rl, 11.11e-3, 0.35 * h);
    Mesh m = build_tensor_mesh(rl, zl);
    std::vector<RegionSpec> regions{RegionSpec::tube_annulus(9.84e-3, 1.27e-3)};
    if (with_deposit) regions.push_back(RegionSpec::semi_disc(11.11e-3, 3e-3, 5e-3, 0.0));
    tag_regions(m, regions);
    return m;
}

MultistaticMatrix indexed_matrix(int n) {
    MultistaticMatrix m;
    m.z.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.z(i, j) = Complex(10.0 * i + j, -1.0);
    return m;
}

}  // namespace

TEST_CASE("probe positions are centered on z_center") {
    ProbeArray p;
    p.count = 4;
    p.spacing = 2.5e-3;
    p.z_center = 0.0;
    CHECK(p.position(0).z == Catch::Approx(-3.75e-3));
    CHECK(p.position(1).z == Catch::Approx(-1.25e-3));
    CHECK(p.position(2).z == Catch::Approx(1.25e-3));
    CHECK(p.position(3).z == Catch::Approx(3.75e-3));
    CHECK(p.position(0).r == p.radius);
    CHECK(p.z_first() == p.position(0).z);
    CHECK(p.z_last() == p.position(3).z);
    // Odd count puts the middle probe exactly on z_center.
    p.count = 5;
    CHECK(p.position(2).z == 0.0);
}

TEST_CASE("probe array validation") {
    ProbeArray p;
    p.count = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ProbeArray{};
    p.radius = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ProbeArray{};
    p.spacing = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ProbeArray{};
    p.kind = ProbeArray::Kind::Coil;
    p.coil_width = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ProbeArray{};
    p.kind = ProbeArray::Kind::Coil;
    p.radius = 1e-4;  // narrower than half the coil width
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("noise mapping is the documented generator transform") {
    MultistaticMatrix ones;
    ones.z = Eigen::MatrixXcd::Ones(3, 3);
    const double delta = 0.01;
    const std::uint64_t seed = 123;
    const MultistaticMatrix noisy = add_noise(ones, delta, seed);
    CHECK(noisy.delta == delta);
    CHECK(noisy.seed == seed);
    std::mt19937_64 rng(seed);
    auto draw = [&]() { return delta * (2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0); };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double re = draw();
            const double im = draw();
            REQUIRE(noisy.z(i, j) == Complex(1.0 + re, im));
        }
}

TEST_CASE("noise is bounded, centered and reproducible") {
    MultistaticMatrix base;
    base.z = Eigen::MatrixXcd::Ones(32, 32);
    const double delta = 0.02;
    const MultistaticMatrix a = add_noise(base, delta, 99);
    const MultistaticMatrix b = add_noise(base, delta, 99);
    const MultistaticMatrix c = add_noise(base, delta, 100);
    CHECK(a.z == b.z);
    CHECK(a.z != c.z);
    double mean_re = 0.0, mean_im = 0.0, max_dev = 0.0;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            const double re = a.z(i, j).real() - 1.0;
            const double im = a.z(i, j).imag();
            CHECK(std::abs(re) <= delta);
            CHECK(std::abs(im) <= delta);
            max_dev = std::max({max_dev, std::abs(re), std::abs(im)});
            mean_re += re;
            mean_im += im;
        }
    mean_re /= 1024.0;
    mean_im /= 1024.0;
    // 1024 uniform draws leave a sample-mean jitter of about delta / sqrt(3072).
    CHECK(std::abs(mean_re) <= 0.05 * delta);
    CHECK(std::abs(mean_im) <= 0.05 * delta);
    CHECK(max_dev > 0.5 * delta);  // the draws actually fill the range
    // Zero noise is the identity, stronger-than-half noise is refused.
    const MultistaticMatrix same = add_noise(base, 0.0, 7);
    CHECK(same.z == base.z);
    CHECK_THROWS_AS(add_noise(base, 0.6, 7), std::invalid_argument);
    CHECK_THROWS_AS(add_noise(base, -0.1, 7), std::invalid_argument);
}

TEST_CASE("band truncation conventions") {
    const MultistaticMatrix m = indexed_matrix(6);
    const MultistaticMatrix d = band_truncate(m, 1);  // exclusive default
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(d.z(i, j) == (i == j ? m.z(i, j) : Complex(0.0, 0.0)));
    const MultistaticMatrix tri = band_truncate(m, 1, BandConvention::Inclusive);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(tri.z(i, j) == (std::abs(i - j) <= 1 ? m.z(i, j) : Complex(0.0, 0.0)));
    // M = N keeps everything under both conventions.
    CHECK(band_truncate(m, 6).z == m.z);
    CHECK(band_truncate(m, 6, BandConvention::Inclusive).z == m.z);
    CHECK(band_truncate(m, 6).band == 6);
}

TEST_CASE("band truncation is idempotent and composes by the minimum") {
    const MultistaticMatrix m = indexed_matrix(8);
    const MultistaticMatrix b3 = band_truncate(m, 3);
    CHECK(band_truncate(b3, 3).z == b3.z);
    CHECK(band_truncate(band_truncate(m, 5), 3).z == b3.z);
    double prev = -1.0;
    for (int width = 1; width <= 8; ++width) {
        const double f = band_truncate(m, width).z.norm();
        CHECK(f >= prev);
        prev = f;
    }
    CHECK_THROWS_AS(band_truncate(m, 0), std::invalid_argument);
    CHECK_THROWS_AS(band_truncate(m, 9), std::invalid_argument);
}

TEST_CASE("no deposit means an exactly zero response") {
    const Mesh m = probe_bench_mesh(1e-3, false);
    ProbeArray probes;
    probes.count = 2;
    const MultistaticMatrix zp = synthesize_multistatic(m, default_materials(), 200.0 * kPi, probes);
    CHECK(zp.z.cwiseAbs().maxCoeff() == 0.0);
    probes.kind = ProbeArray::Kind::Coil;
    const MultistaticMatrix zc = synthesize_multistatic(m, default_materials(), 200.0 * kPi, probes);
    CHECK(zc.z.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zc.kind == ProbeArray::Kind::Coil);
}

TEST_CASE("deposit with matched properties is invisible") {
    // When the deposit coefficients equal the vacuum ones the perturbed and
    // reference systems coincide, so the response must vanish identically.
    const Mesh m = probe_bench_mesh(1e-3, true);
    MaterialTable t = default_materials();
    t.deposit.sigma = 0.0;
    t.force_mu_match = true;
    ProbeArray probes;
    probes.count = 2;
    const MultistaticMatrix z = synthesize_multistatic(m, t, 200.0 * kPi, probes);
    CHECK(z.z.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a real deposit produces a finite nonzero response") {
    const Mesh m = probe_bench_mesh(1e-3, true);
    ProbeArray probes;
    probes.count = 2;
    const MultistaticMatrix z = synthesize_multistatic(m, default_materials(), 200.0 * kPi, probes);
    CHECK(z.z.cwiseAbs().minCoeff() > 0.0);
    CHECK(z.z.allFinite());
    CHECK(z.size() == 2);
    CHECK(z.delta == 0.0);
    CHECK(z.band == 0);
}

TEST_CASE("probes inside conductive regions are rejected") {
    const Mesh m = probe_bench_mesh(1e-3, true);
    ProbeArray probes;
    probes.count = 2;
    probes.radius = 10.2e-3;  // inside the wall
    CHECK_THROWS_AS(synthesize_multistatic(m, default_materials(), 200.0 * kPi, probes),
                    std::invalid_argument);
}
