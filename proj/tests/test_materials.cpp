#include <catch2/catch_amalgamated.hpp>

#include <eclsm/materials.hpp>
#include <eclsm/mesh.hpp>

using namespace eclsm;

TEST_CASE("default table carries the canonical probe bench values") {
    const MaterialTable t = default_materials();
    CHECK(t.vacuum.sigma == 0.0);
    CHECK(t.vacuum.mu == 4.0e-7 * kPi);
    CHECK(t.tube.sigma == 0.97e3);
    CHECK(t.tube.mu == 4.04e-7 * kPi);
    CHECK(t.deposit.sigma == 1.75e3);
    CHECK(t.deposit.mu == 4.04e-7 * kPi);
    CHECK(!t.force_mu_match);
    CHECK_NOTHROW(t.validate());
}

TEST_CASE("props_for maps deposits to vacuum in the reference medium") {
    const MaterialTable t = default_materials();
    CHECK(t.props_for(RegionTag::Vacuum, true).sigma == 0.0);
    CHECK(t.props_for(RegionTag::Tube, true).sigma == t.tube.sigma);
    CHECK(t.props_for(RegionTag::Tube, false).sigma == t.tube.sigma);
    // Perturbed medium sees the deposit, reference medium sees vacuum there.
    CHECK(t.props_for(RegionTag::Deposit, true).sigma == t.deposit.sigma);
    CHECK(t.props_for(RegionTag::Deposit, true).mu == t.deposit.mu);
    CHECK(t.props_for(RegionTag::Deposit, false).sigma == t.vacuum.sigma);
    CHECK(t.props_for(RegionTag::Deposit, false).mu == t.vacuum.mu);
}

TEST_CASE("force_mu_match keeps deposit conductivity but vacuum permeability") {
    MaterialTable t = default_materials();
    t.force_mu_match = true;
    const MaterialProps p = t.props_for(RegionTag::Deposit, true);
    CHECK(p.sigma == t.deposit.sigma);
    CHECK(p.mu == t.vacuum.mu);
}

TEST_CASE("table validation flags unphysical entries") {
    MaterialTable t = default_materials();
    t.tube.sigma = -1.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = default_materials();
    t.deposit.mu = 0.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = default_materials();
    t.vacuum.sigma = 5.0;  // vacuum must stay lossless
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("material field expands the table onto mesh triangles") {
    Mesh m = build_structured_mesh(0.02, -0.01, 0.01, 1e-3);
    std::vector<double> rl = m.r_lines, zl = m.z_lines;
    snap_line(rl, 9.84e-3, 3e-4);
    snap_line(rl, 11.11e-3, 3e-4);
    m = build_tensor_mesh(rl, zl);
    tag_regions(m, {RegionSpec::tube_annulus(9.84e-3, 1.27e-3),
                    RegionSpec::semi_disc(11.11e-3, 3e-3, 5e-3, 0.0)});
    const MaterialTable t = default_materials();
    const MaterialField pert = coefficient_field(m, t, true);
    const MaterialField ref = coefficient_field(m, t, false);
    REQUIRE(pert.sigma.size() == m.triangles.size());
    bool saw_tube = false, saw_dep = false;
    for (std::size_t i = 0; i < m.triangles.size(); ++i) {
        switch (m.region_tags[i]) {
            case RegionTag::Vacuum:
                CHECK(pert.sigma[i] == 0.0);
                CHECK(ref.sigma[i] == 0.0);
                break;
            case RegionTag::Tube:
                saw_tube = true;
                CHECK(pert.sigma[i] == t.tube.sigma);
                CHECK(ref.sigma[i] == t.tube.sigma);
                break;
            case RegionTag::Deposit:
                saw_dep = true;
                CHECK(pert.sigma[i] == t.deposit.sigma);
                CHECK(ref.sigma[i] == 0.0);
                CHECK(ref.mu[i] == t.vacuum.mu);
                break;
        }
    }
    CHECK(saw_tube);
    CHECK(saw_dep);
}
