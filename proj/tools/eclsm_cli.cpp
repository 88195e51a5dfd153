// Command line front end: forward simulation, data synthesis, inversion and
// the canned study configurations. Exit codes: 0 success, 1 configuration or
// input validation problem, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "eclsm/eclsm.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int workers = 0;
  std::string band_convention;
};

void apply_overrides(eclsm::RunConfig& cfg, const GlobalOptions& opt) {
  if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
  if (opt.workers > 0) cfg.workers = opt.workers;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.band_convention == "inclusive")
    cfg.band_convention = eclsm::BandConvention::Inclusive;
  else if (opt.band_convention == "exclusive")
    cfg.band_convention = eclsm::BandConvention::Exclusive;
  else if (!opt.band_convention.empty())
    throw std::invalid_argument("--band-convention must be inclusive or exclusive");
  cfg.validate();
}

eclsm::RunConfig load_config(const GlobalOptions& opt) {
  eclsm::RunConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = eclsm::parse_config_text(eclsm::detail::read_file(opt.config_path));
  } else {
    cfg = eclsm::default_config();
  }
  apply_overrides(cfg, opt);
  return cfg;
}

fs::path prepare_out_dir(const eclsm::RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  // drop the effective configuration next to the results
  eclsm::detail::write_file((dir / "config.txt").string(),
                            eclsm::canonical_config_text(cfg));
  return dir;
}

int cmd_forward(const eclsm::RunConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  const std::uint64_t hash = eclsm::config_hash(cfg);

  const eclsm::Mesh mesh = eclsm::build_simulation_mesh(cfg, 1, true);
  const eclsm::MaterialField ref = eclsm::coefficient_field(mesh, cfg.materials, false);
  const eclsm::MaterialField pert = eclsm::coefficient_field(mesh, cfg.materials, true);
  const eclsm::FemSystem sys_ref(mesh, ref, cfg.omega);
  const eclsm::FemSystem sys_pert(mesh, pert, cfg.omega);

  const eclsm::IncidentField u0 =
      eclsm::incident_field(sys_ref, cfg.probes.source(cfg.source_index));
  const eclsm::ComplexField us = eclsm::scattered_field(sys_pert, ref, u0.total);
  eclsm::ComplexField total;
  total.mesh = &mesh;
  total.values = u0.total.values + us.values;

  eclsm::save_mesh((dir / "mesh.txt").string(), mesh, hash);
  eclsm::save_field_csv((dir / "incident.csv").string(), u0.total, hash);
  eclsm::save_field_csv((dir / "scattered.csv").string(), us, hash);
  eclsm::save_field_csv((dir / "total.csv").string(), total, hash);
  std::cout << "forward: source " << cfg.source_index << " of " << cfg.probes.count << ", mesh "
            << mesh.n_vertices() << " vertices, fields written to " << dir.string() << "\n";
  return 0;
}

int cmd_synthesize(const eclsm::RunConfig& cfg, const std::string& matrix_out) {
  const fs::path dir = prepare_out_dir(cfg);
  const std::uint64_t hash = eclsm::config_hash(cfg);
  const eclsm::SynthesisResult res = eclsm::synthesize_scenario(cfg);
  const std::string path =
      matrix_out.empty() ? (dir / "zmatrix.txt").string() : matrix_out;
  eclsm::save_matrix(path, res.measured, hash);
  std::cout << "synthesize: " << cfg.probes.count << "x" << cfg.probes.count << " "
            << (cfg.probes.kind == eclsm::ProbeArray::Kind::Point ? "point" : "coil")
            << " matrix, delta " << res.measured.delta << ", band "
            << (res.measured.band > 0 ? std::to_string(res.measured.band) : std::string("full"))
            << ", written to " << path << "\n";
  return 0;
}

void report_metrics(const eclsm::Metrics& m, const std::vector<eclsm::RegionSpec>& deposits) {
  std::printf("argmax: r = %.2f mm, z = %.2f mm (raw %.6g)\n", 1e3 * m.argmax.r,
              1e3 * m.argmax.z, m.raw_max);
  if (!deposits.empty()) {
    std::printf("argmax inside a deposit: %s\n", m.argmax_inside ? "yes" : "no");
    std::printf("indicator contrast (in/out): %.3f\n", m.contrast);
    std::printf("axial offset to nearest deposit centre: %.2f mm\n", 1e3 * m.z_offset);
    std::printf("local maxima after smoothing: %d (cover all deposits: %s)\n", m.local_maxima,
                m.maxima_cover_deposits ? "yes" : "no");
  }
}

int cmd_invert(const eclsm::RunConfig& cfg, const std::string& matrix_path) {
  const fs::path dir = prepare_out_dir(cfg);
  const std::uint64_t hash = eclsm::config_hash(cfg);
  const eclsm::LoadedMatrix loaded = eclsm::load_matrix(matrix_path);
  const eclsm::InversionResult res = eclsm::invert_scenario(cfg, loaded.matrix);
  eclsm::save_indicator((dir / "indicator.csv").string(), res.indicator, hash);
  eclsm::save_indicator_pgm((dir / "indicator.pgm").string(), res.indicator, hash);
  std::cout << "invert: " << loaded.matrix.size() << " probes, delta " << res.delta_used
            << ", grid " << res.indicator.grid.n_r << "x" << res.indicator.grid.n_z
            << ", results in " << dir.string() << "\n";
  report_metrics(eclsm::compute_metrics(res.indicator, cfg.deposits), cfg.deposits);
  return 0;
}

int cmd_reproduce(const std::string& id, const GlobalOptions& opt) {
  eclsm::RunConfig cfg = eclsm::reproduce_config(id);
  if (cfg.out_dir == "out") cfg.out_dir = "out/" + id;
  apply_overrides(cfg, opt);
  const fs::path dir = prepare_out_dir(cfg);
  const std::uint64_t hash = eclsm::config_hash(cfg);

  std::cout << "experiment " << id << "\n";
  const eclsm::SynthesisResult synth = eclsm::synthesize_scenario(cfg);
  eclsm::save_matrix((dir / "zmatrix.txt").string(), synth.measured, hash);
  const eclsm::InversionResult inv = eclsm::invert_scenario(cfg, synth.measured);
  eclsm::save_indicator((dir / "indicator.csv").string(), inv.indicator, hash);
  eclsm::save_indicator_pgm((dir / "indicator.pgm").string(), inv.indicator, hash);
  report_metrics(eclsm::compute_metrics(inv.indicator, cfg.deposits), cfg.deposits);
  std::cout << "results in " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric eddy-current simulation and linear sampling inversion"};
  app.set_version_flag("--version", eclsm::kVersion);
  app.require_subcommand(1);

  GlobalOptions opt;
  app.add_option("--config", opt.config_path, "configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "override the noise seed");
  app.add_option("--workers", opt.workers, "worker threads for the sampling loop");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--band-convention", opt.band_convention,
                 "band truncation convention: inclusive or exclusive");

  auto* fwd = app.add_subcommand("forward", "simulate one source and write the nodal fields");
  std::string matrix_out;
  auto* synth = app.add_subcommand("synthesize", "compute the multistatic matrix");
  synth->add_option("--matrix-out", matrix_out, "matrix output path");
  std::string matrix_path;
  auto* inv = app.add_subcommand("invert", "run the sampling inversion on a matrix file");
  inv->add_option("matrix", matrix_path, "multistatic matrix file")->required();
  std::string experiment;
  auto* rep = app.add_subcommand("reproduce", "run a canned study configuration end to end");
  rep->add_option("id", experiment, "experiment id (see message on error)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fwd->parsed()) return cmd_forward(load_config(opt));
    if (synth->parsed()) return cmd_synthesize(load_config(opt), matrix_out);
    if (inv->parsed()) return cmd_invert(load_config(opt), matrix_path);
    if (rep->parsed()) return cmd_reproduce(experiment, opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
