// evogen: simulate spatial Moran populations, read off their genealogies
// forward (pruned ancestry tracking) or backward (dual spatial coalescent),
// build measure representations, and run finite-system-scheme experiments.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evogen/coalescent.hpp"
#include "evogen/experiments.hpp"
#include "evogen/geo.hpp"
#include "evogen/measrep.hpp"
#include "evogen/moran.hpp"
#include "evogen/rng.hpp"
#include "evogen/serialize.hpp"
#include "evogen/umm.hpp"

namespace {

using evogen::EventLog;
using evogen::MigrationKernel;
using evogen::MoranConfig;
using nlohmann::json;

struct Global {
  std::uint64_t seed = 1;
  bool seed_given = false;
  int replicates = 0;  // 0: use the command default
  std::string out_dir = ".";
  std::string format = "csv";
};

std::string resolve(const Global& g, const std::string& name) {
  return (std::filesystem::path(g.out_dir) / name).string();
}

// Emits a table either as CSV (with a "# seed=" comment) or as JSON lines
// ({"seed":...} meta line, then one object per row).
void emit_table(const Global& g, const std::string& name,
                const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
  std::string path = resolve(g, name + (g.format == "csv" ? ".csv" : ".jsonl"));
  if (g.format == "csv") {
    evogen::write_file(path, evogen::csv_table(g.seed, header, rows));
  } else {
    std::string out = json{{"seed", g.seed}, {"columns", header}}.dump() + "\n";
    for (const auto& row : rows) {
      json j;
      for (std::size_t i = 0; i < header.size(); ++i) j[header[i]] = row[i];
      out += j.dump() + "\n";
    }
    evogen::write_file(path, out);
  }
  std::cout << "wrote " << path << "\n";
}

MigrationKernel load_kernel(const std::string& file, int fallback_dim) {
  if (file.empty()) return evogen::simple_walk_kernel(fallback_dim);
  return evogen::kernel_from_json(evogen::read_file(file));
}

MoranConfig moran_config_from_json(const std::string& file) {
  const json j = json::parse(evogen::read_file(file));
  MoranConfig c;
  c.torus = {j.at("torus").at("d").get<int>(), j.at("torus").at("half_width").get<int>()};
  c.n_per_site = j.value("n_per_site", 1);
  c.gamma = j.value("gamma", 1.0);
  if (j.contains("kernel"))
    c.kernel = evogen::kernel_from_json(j.at("kernel").dump());
  else
    c.kernel = evogen::simple_walk_kernel(c.torus.d);
  c.t_max = j.at("t_max").get<double>();
  c.seed = j.value("seed", std::uint64_t{1});
  c.max_events = j.value("max_events", std::uint64_t{1} << 62);
  c.placement = j.value("placement", std::string("uniform")) == "origin"
                    ? MoranConfig::Placement::origin
                    : MoranConfig::Placement::uniform;
  return c;
}

evogen::FssConfig fss_config_from_json(const std::string& file) {
  const json j = json::parse(evogen::read_file(file));
  evogen::FssConfig c;
  c.dimension = j.value("dimension", c.dimension);
  c.half_widths = j.value("half_widths", c.half_widths);
  c.n_per_site = j.value("n_per_site", c.n_per_site);
  c.gamma = j.value("gamma", c.gamma);
  c.horizon = j.value("horizon", c.horizon);
  c.replicates = j.value("replicates", c.replicates);
  c.h_grid = j.value("h_grid", c.h_grid);
  c.seed = j.value("seed", c.seed);
  c.green_truncation = j.value("green_truncation", c.green_truncation);
  c.parallel = j.value("parallel", c.parallel);
  return c;
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t next = csv.find(',', pos);
    if (next == std::string::npos) next = csv.size();
    grid.push_back(std::stod(csv.substr(pos, next - pos)));
    pos = next + 1;
  }
  return grid;
}

int cmd_d_const(const Global& g, double gamma, const std::string& kernel_file, int dim,
                int truncation, const std::string& method) {
  MigrationKernel kernel = load_kernel(kernel_file, dim);
  evogen::GreenOptions opt;
  opt.method = method == "mc" ? evogen::GreenMethod::monte_carlo
                              : evogen::GreenMethod::power_sum;
  opt.seed = g.seed;
  const evogen::GreenResult res = evogen::green_integral(evogen::symmetrize(kernel),
                                                         truncation, opt);
  if (res.divergent) {
    std::cerr << "error: Green integral diverges for this kernel (recurrent walk); "
                 "no diffusion constant exists\n";
    return 1;
  }
  // Irreducibility is only checked by finite truncation: warn, don't prove.
  evogen::GeoTorus probe{kernel.d, std::max(2, 2 * kernel.max_abs_offset())};
  if (!evogen::reaches_all_sites(evogen::wrap_kernel(evogen::symmetrize(kernel), probe),
                                 4 * probe.volume()))
    std::cerr << "warning: kernel does not reach all sites of a test torus within the "
                 "step budget; the walk may be reducible\n";
  const double d_const = evogen::diffusion_constant(gamma, res);
  emit_table(g, "d_const", {"gamma", "g", "D", "truncation", "partial_sum"},
             {{gamma, res.g, d_const, double(truncation), res.partial_sum}});
  std::printf("g = %.6f  D = %.6f\n", res.g, d_const);
  return 0;
}

int cmd_moran_simulate(const Global& g, const std::string& config_file,
                       const std::string& out_name) {
  MoranConfig c = moran_config_from_json(config_file);
  if (g.seed_given) c.seed = g.seed;
  const EventLog log = evogen::simulate_moran(c);
  evogen::write_file(resolve(g, out_name), evogen::event_log_to_jsonl(log));
  std::cout << "wrote " << resolve(g, out_name) << " (" << log.total_events << " events, t_end="
            << log.t_end << (log.truncated ? ", TRUNCATED" : "") << ")\n";
  return 0;
}

int cmd_moran_snapshot(const Global& g, const std::string& log_file, double t,
                       const std::string& out_name) {
  const EventLog log = evogen::event_log_from_jsonl(evogen::read_file(log_file));
  const evogen::AtomicUmm u = evogen::genealogy_snapshot(log, t);
  evogen::write_file(resolve(g, out_name), evogen::umm_to_json(u));
  std::cout << "wrote " << resolve(g, out_name) << " (" << u.leaf_count()
            << " leaves, root height " << u.root_height().t << ")\n";
  return 0;
}

int cmd_coal_simulate(const Global& g, int d, int half_width, int n, double gamma,
                      double horizon, const std::string& kernel_file,
                      const std::string& out_name) {
  evogen::CoalescentConfig c;
  c.torus = {d, half_width};
  c.kernel = load_kernel(kernel_file, d);
  c.gamma = gamma;
  c.horizon = horizon;
  c.seed = g.seed;
  std::vector<int> sites(n);
  evogen::Rng rng = evogen::Rng::substream(g.seed, 1);
  for (int& s : sites) s = int(rng.below(std::uint64_t(c.torus.volume())));
  c.initial = evogen::LabeledPartition::singletons(sites);
  const evogen::CoalescentPath path = evogen::simulate_spatial_kingman(c);
  evogen::write_file(resolve(g, out_name), evogen::coalescent_to_jsonl(path));
  std::cout << "wrote " << resolve(g, out_name) << " (" << path.events.size()
            << " jumps, " << path.block_count_at(horizon) << " blocks at horizon)\n";
  return 0;
}

int cmd_coal_from_log(const Global& g, const std::string& log_file, double T,
                      const std::string& out_name) {
  const EventLog log = evogen::event_log_from_jsonl(evogen::read_file(log_file));
  const evogen::CoalescentPath path = evogen::coalescent_from_event_log(log, T);
  evogen::write_file(resolve(g, out_name), evogen::coalescent_to_jsonl(path));
  std::cout << "wrote " << resolve(g, out_name) << " (" << path.events.size() << " jumps)\n";
  return 0;
}

int cmd_measrep_build(const Global& g, const std::string& log_file, double T,
                      const std::string& grid_csv, const std::string& out_name) {
  const EventLog log = evogen::event_log_from_jsonl(evogen::read_file(log_file));
  const std::vector<double> grid = grid_csv.empty() ? std::vector<double>{}
                                                     : parse_grid(grid_csv);
  const evogen::AtomicMeasurePath path =
      evogen::build_measure_representation(log, T, g.seed, grid);
  evogen::check_smr(path);
  evogen::write_file(resolve(g, out_name), evogen::measure_path_to_jsonl(path));
  std::cout << "wrote " << resolve(g, out_name) << " (" << path.snaps.size()
            << " snapshots, invariants ok)\n";
  return 0;
}

int cmd_measrep_mrca(const Global& g, const std::string& log_file, double T) {
  const EventLog log = evogen::event_log_from_jsonl(evogen::read_file(log_file));
  const evogen::AtomicMeasurePath path =
      evogen::build_measure_representation(log, T, g.seed, {});
  const auto mrca = evogen::mrca_time(path);
  emit_table(g, "mrca", {"T", "mrca_offset", "found"},
             {{T, mrca ? mrca->t : std::nan(""), mrca ? 1.0 : 0.0}});
  if (mrca)
    std::printf("one ancestor left at offset %.6f (time %.6f)\n", mrca->t,
                T + mrca->t);
  else
    std::printf("no fixation within horizon %.6f\n", path.t_end - T);
  return 0;
}

int cmd_measrep_pairdist(const Global& g, const std::string& log_file, double T,
                         const std::string& grid_csv) {
  const EventLog log = evogen::event_log_from_jsonl(evogen::read_file(log_file));
  const evogen::AtomicMeasurePath path =
      evogen::build_measure_representation(log, T, g.seed, {});
  std::vector<std::vector<double>> rows;
  for (double h : parse_grid(grid_csv))
    rows.push_back({h, evogen::pair_moment(path, h)});
  emit_table(g, "pairdist", {"h", "pair_moment"}, rows);
  return 0;
}

int cmd_fss(const Global& g, const std::string& config_file) {
  evogen::FssConfig c = config_file.empty() ? evogen::FssConfig{}
                                            : fss_config_from_json(config_file);
  if (g.seed_given) c.seed = g.seed;
  if (g.replicates > 0) c.replicates = g.replicates;
  const evogen::FssResult res = evogen::fss_experiment(c);
  std::vector<std::vector<double>> summary;
  std::vector<std::vector<double>> curves;
  for (const auto& s : res.sizes) {
    summary.push_back({double(s.half_width), double(s.volume), double(s.n),
                       double(s.replicates), double(s.censored), s.mean_mrca, s.se_mrca,
                       2.0 / res.D, s.sup_gap_pair_law, s.block_ks});
    for (std::size_t gi = 0; gi < res.h_grid.size(); ++gi)
      curves.push_back({double(s.half_width), res.h_grid[gi], s.mean_pair_curve[gi],
                        s.normalized_curve[gi], 1.0 - std::exp(-res.D * res.h_grid[gi]),
                        s.mean_block_count[gi]});
  }
  emit_table(g, "fss_summary",
             {"half_width", "volume", "n", "replicates", "censored", "mean_mrca",
              "se_mrca", "target_mrca", "sup_gap_pair_law", "block_ks"},
             summary);
  emit_table(g, "fss_curves",
             {"half_width", "h", "mean_sq_family", "normalized", "kingman_ref",
              "mean_blocks"},
             curves);
  std::printf("g = %.6f  D = %.6f  target MRCA = %.6f\n", res.g, res.D, 2.0 / res.D);
  for (const auto& s : res.sizes)
    std::printf("  V=%-4d mean MRCA %.4f +- %.4f  block KS %.4f\n", s.volume, s.mean_mrca,
                s.se_mrca, s.block_ks);
  return 0;
}

int cmd_check(const Global& g, int replicates) {
  const int R = replicates > 0 ? replicates : 50;
  int failures = 0;
  for (int r = 0; r < R; ++r) {
    const std::uint64_t seed = evogen::derive_seed(g.seed, std::uint64_t(r));
    evogen::Rng rng = evogen::Rng::substream(seed, 99);
    MoranConfig c;
    c.torus = {1 + int(rng.below(2)), 1 + int(rng.below(2))};
    c.n_per_site = 1 + int(rng.below(3));
    c.gamma = 0.5 + rng.uniform01();
    c.kernel = evogen::simple_walk_kernel(c.torus.d);
    c.t_max = 1.0 + rng.uniform01() * 2.0;
    c.seed = seed;
    try {
      const EventLog log = evogen::simulate_moran(c);
      const double T = 0.25 * log.t_end;
      const evogen::AtomicMeasurePath path =
          evogen::build_measure_representation(log, T, seed, {});
      evogen::check_smr(path);

      for (int k = 0; k < 4; ++k) {
        const double h = rng.uniform01() * (log.t_end - T);
        const auto& snap = path.at(h);
        // The dual anchored at T+h, read back to depth h, resolves the same
        // ancestor families the snapshot carries as atoms.
        const evogen::CoalescentPath dual =
            evogen::coalescent_from_event_log(log, T + h);
        if (int(snap.atoms.size()) != dual.block_count_at(h))
          throw std::runtime_error("atom count != dual block count");
        // Replaying the ancestor map forward gives the same families.
        const std::vector<int> anc = evogen::ancestors_all(log, T, T + h);
        for (const auto& a : snap.atoms)
          for (int m : a.members)
            if (anc[m] != a.representative)
              throw std::runtime_error("atom members != ancestor map");
        // ord(X_h) equals the family decomposition of the genealogy at T+h.
        const evogen::FamilyVector fv = evogen::family_size_decomposition(
            evogen::genealogy_snapshot(log, T + h), h);
        const evogen::FamilyVector fw = evogen::family_sizes(snap);
        if (fv.size() != fw.size())
          throw std::runtime_error("family count != atom count");
        for (std::size_t i = 0; i < fv.size(); ++i)
          if (std::abs(fv[i] - fw[i]) > 1e-12)
            throw std::runtime_error("family sizes != atom masses");
      }
    } catch (const std::exception& e) {
      std::cerr << "check seed " << seed << ": FAIL (" << e.what() << ")\n";
      ++failures;
    }
  }
  if (failures == 0) {
    std::cout << "check: all invariants hold on " << R << " random runs\n";
    return 0;
  }
  std::cout << "check: " << failures << "/" << R << " runs FAILED\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evogen: spatial Moran genealogies, dual coalescents, and "
               "measure representations"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Global g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Base RNG seed")->capture_default_str();
  app.add_option("--replicates", g.replicates, "Replicate count override");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Table format: csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  // geo
  auto* geo = app.add_subcommand("geo", "Random-walk geometry quantities");
  auto* dconst = geo->add_subcommand("d-const", "Green integral g and D = gamma/(1+gamma g)");
  double gamma = 1.0;
  std::string kernel_file;
  int dim = 3, truncation = 8192;
  std::string method = "power";
  dconst->add_option("--gamma", gamma, "Resampling rate")->capture_default_str();
  dconst->add_option("--kernel", kernel_file, "Kernel JSON file (default: simple walk)");
  dconst->add_option("--dimension", dim, "Simple-walk dimension when no kernel file")
      ->capture_default_str();
  dconst->add_option("--truncation", truncation, "Power-sum truncation")
      ->capture_default_str();
  dconst->add_option("--method", method, "power or mc")
      ->check(CLI::IsMember({"power", "mc"}));

  // moran
  auto* moran = app.add_subcommand("moran", "Forward spatial Moran simulation");
  auto* msim = moran->add_subcommand("simulate", "Run and write the event log");
  std::string moran_config, moran_out = "moran_log.jsonl";
  msim->add_option("--config", moran_config, "Moran config JSON")->required();
  msim->add_option("--out", moran_out, "Output log file")->capture_default_str();
  auto* msnap = moran->add_subcommand("snapshot", "Genealogy read off a log");
  std::string snap_log, snap_out = "snapshot.json";
  double snap_t = 0.0;
  msnap->add_option("--log", snap_log, "Event log file")->required();
  msnap->add_option("--t", snap_t, "Snapshot time")->required();
  msnap->add_option("--out", snap_out, "Output dendrogram JSON")->capture_default_str();

  // coal
  auto* coal = app.add_subcommand("coal", "Spatial Kingman coalescent");
  auto* csim = coal->add_subcommand("simulate", "Backward Gillespie simulation");
  int cd = 1, chw = 2, cn = 16;
  double cgamma = 1.0, chorizon = 10.0;
  std::string coal_kernel, coal_out = "coalescent.jsonl";
  csim->add_option("--d", cd, "Torus dimension")->capture_default_str();
  csim->add_option("--half-width", chw, "Torus half width")->capture_default_str();
  csim->add_option("--n", cn, "Number of lineages")->capture_default_str();
  csim->add_option("--gamma", cgamma, "Pair merge rate")->capture_default_str();
  csim->add_option("--horizon", chorizon, "Backward horizon")->capture_default_str();
  csim->add_option("--kernel", coal_kernel, "Kernel JSON file (default: simple walk)");
  csim->add_option("--out", coal_out, "Output path file")->capture_default_str();
  auto* cfrom = coal->add_subcommand("from-log", "Exact dual read of a forward log");
  std::string from_log, from_out = "coalescent.jsonl";
  double from_T = 0.0;
  cfrom->add_option("--log", from_log, "Event log file")->required();
  cfrom->add_option("--T", from_T, "Snapshot time")->required();
  cfrom->add_option("--out", from_out, "Output path file")->capture_default_str();

  // measrep
  auto* mr = app.add_subcommand("measrep", "Measure representation of a log");
  auto* mrb = mr->add_subcommand("build", "Build and verify the measure path");
  std::string mr_log, mr_grid, mr_out = "measure_path.jsonl";
  double mr_T = 0.0;
  mrb->add_option("--log", mr_log, "Event log file")->required();
  mrb->add_option("--T", mr_T, "Anchor time")->required();
  mrb->add_option("--h-grid", mr_grid, "Comma-separated lookback grid (default: events)");
  mrb->add_option("--out", mr_out, "Output path file")->capture_default_str();
  auto* mrm = mr->add_subcommand("mrca", "MRCA depth of the anchored path");
  std::string mrca_log;
  double mrca_T = 0.0;
  mrm->add_option("--log", mrca_log, "Event log file")->required();
  mrm->add_option("--T", mrca_T, "Anchor time")->required();
  auto* mrp = mr->add_subcommand("pairdist", "Pair moment sum of squared atom masses");
  std::string pd_log, pd_grid;
  double pd_T = 0.0;
  mrp->add_option("--log", pd_log, "Event log file")->required();
  mrp->add_option("--T", pd_T, "Anchor time")->required();
  mrp->add_option("--h-grid", pd_grid, "Comma-separated lookback grid")->required();

  // fss
  auto* fss = app.add_subcommand("fss", "Finite-system-scheme experiment");
  std::string fss_config;
  fss->add_option("--config", fss_config, "FSS config JSON (default config if omitted)");

  // check
  auto* check = app.add_subcommand("check", "Run the invariant suite on random runs");

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed_opt->count() > 0;

  try {
    if (dconst->parsed()) return cmd_d_const(g, gamma, kernel_file, dim, truncation, method);
    if (msim->parsed()) return cmd_moran_simulate(g, moran_config, moran_out);
    if (msnap->parsed()) return cmd_moran_snapshot(g, snap_log, snap_t, snap_out);
    if (csim->parsed())
      return cmd_coal_simulate(g, cd, chw, cn, cgamma, chorizon, coal_kernel, coal_out);
    if (cfrom->parsed()) return cmd_coal_from_log(g, from_log, from_T, from_out);
    if (mrb->parsed()) return cmd_measrep_build(g, mr_log, mr_T, mr_grid, mr_out);
    if (mrm->parsed()) return cmd_measrep_mrca(g, mrca_log, mrca_T);
    if (mrp->parsed()) return cmd_measrep_pairdist(g, pd_log, pd_T, pd_grid);
    if (fss->parsed()) return cmd_fss(g, fss_config);
    if (check->parsed()) return cmd_check(g, g.replicates);
    if (geo->parsed() || moran->parsed() || coal->parsed() || mr->parsed()) {
      std::cerr << "error: missing subcommand; see --help\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
