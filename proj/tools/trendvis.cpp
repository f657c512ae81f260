// SPDX-License-Identifier: Apache-2.0
//
// trendvis: batch front end for trajectory ingestion, visibility profiles,
// discrimination sweeps, synthetic data generation, and plot-data export.
//
// Exit codes: 0 success, 1 fatal domain/parse error, 2 usage error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trendvis/core.hpp"
#include "trendvis/errors.hpp"
#include "trendvis/ingest.hpp"
#include "trendvis/manifest.hpp"
#include "trendvis/oracle.hpp"
#include "trendvis/regression.hpp"
#include "trendvis/synth.hpp"
#include "trendvis/visibility.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize(const std::string& topic) {
  std::string out;
  for (char c : topic)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')
               ? c
               : '_';
  return out.empty() ? "_" : out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw trendvis::Error(trendvis::errc::io_error, "cannot open '" + path.string() + "'");
  return in;
}

// Reads a bundle directory: trajectories.csv (required) + meta.csv (optional).
trendvis::Dataset load_bundle(const fs::path& dir, const trendvis::ParseOptions& options) {
  trendvis::Dataset ds;
  ds.r_cap = options.r_cap;
  {
    std::ifstream in = open_input(dir / "trajectories.csv");
    ds.trajectories = trendvis::parse_trajectory_csv(in, options).trajectories;
  }
  if (fs::exists(dir / "meta.csv")) {
    std::ifstream in = open_input(dir / "meta.csv");
    ds.meta = trendvis::parse_metadata_csv(in, options).meta;
  }
  return ds;
}

fs::path require_out(const std::string& out_dir) {
  if (out_dir.empty()) throw UsageError("--out DIR is required for this command");
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw trendvis::Error(trendvis::errc::io_error,
                          "cannot create '" + dir.string() + "': " + ec.message());
  return dir;
}

struct GlobalFlags {
  bool strict = false;
  int r_cap = trendvis::kDefaultRankCap;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  trendvis::ParseOptions parse_options() const {
    trendvis::ParseOptions o;
    o.strict = strict;
    o.r_cap = r_cap;
    return o;
  }
};

void put_common_params(trendvis::RunManifest& m, const GlobalFlags& g) {
  m.parameters["strict"] = g.strict ? "true" : "false";
  m.parameters["r_cap"] = std::to_string(g.r_cap);
}

// --- ingest ---

struct IngestArgs {
  std::vector<std::string> snapshot_files;
  std::string trajectory_file;
  std::string meta_file;
  std::string epoch;
};

int cmd_ingest(const GlobalFlags& g, const IngestArgs& a) {
  if (a.snapshot_files.empty() == a.trajectory_file.empty())
    throw UsageError("ingest needs exactly one of --snapshots or --trajectories");
  const fs::path out = require_out(g.out_dir);

  trendvis::RunManifest manifest;
  manifest.command = "ingest";
  put_common_params(manifest, g);

  trendvis::ParseOptions options = g.parse_options();
  if (!a.epoch.empty()) options.epoch_iso = a.epoch;

  std::map<std::string, trendvis::Trajectory> trajectories;
  std::vector<trendvis::Diagnostic> diagnostics;
  std::string resolved_epoch = a.epoch;

  if (!a.snapshot_files.empty()) {
    // Merge order: epoch-adjusted time, then source name. Sorting the file
    // list by name plus a stable time sort gives exactly that.
    std::vector<std::string> files = a.snapshot_files;
    std::sort(files.begin(), files.end());
    std::vector<trendvis::Snapshot> snapshots;
    std::size_t entry_count = 0;
    for (const std::string& file : files) {
      manifest.add_input(file);
      std::ifstream in = open_input(file);
      trendvis::SnapshotParse parsed;
      try {
        parsed = trendvis::parse_snapshot_stream(in, options);
      } catch (const trendvis::Error& e) {
        throw trendvis::Error(e.code(), file + ": " + e.message());
      }
      if (!options.epoch_iso) options.epoch_iso = parsed.epoch_iso;
      resolved_epoch = parsed.epoch_iso.empty() ? resolved_epoch : parsed.epoch_iso;
      for (trendvis::Diagnostic& d : parsed.diagnostics) {
        d.where = file + ":" + d.where;
        diagnostics.push_back(std::move(d));
      }
      for (const trendvis::Snapshot& s : parsed.snapshots) entry_count += s.entries.size();
      snapshots.insert(snapshots.end(), std::make_move_iterator(parsed.snapshots.begin()),
                       std::make_move_iterator(parsed.snapshots.end()));
    }
    trendvis::TrajectoryParse folded = trendvis::snapshots_to_trajectories(snapshots, options);
    trajectories = std::move(folded.trajectories);
    for (trendvis::Diagnostic& d : folded.diagnostics) diagnostics.push_back(std::move(d));
    manifest.parameters["snapshot_entries"] = std::to_string(entry_count);
  } else {
    manifest.add_input(a.trajectory_file);
    std::ifstream in = open_input(a.trajectory_file);
    trendvis::TrajectoryParse parsed = trendvis::parse_trajectory_csv(in, options);
    trajectories = std::move(parsed.trajectories);
    diagnostics = std::move(parsed.diagnostics);
  }

  trendvis::Dataset ds;
  ds.r_cap = g.r_cap;
  ds.epoch_iso = resolved_epoch;
  ds.trajectories = std::move(trajectories);
  if (!a.meta_file.empty()) {
    manifest.add_input(a.meta_file);
    std::ifstream in = open_input(a.meta_file);
    trendvis::MetaParse parsed = trendvis::parse_metadata_csv(in, options);
    ds.meta = std::move(parsed.meta);
    for (trendvis::Diagnostic& d : parsed.diagnostics) diagnostics.push_back(std::move(d));
    // Join preflight only makes sense once both sides are present.
    for (trendvis::Diagnostic& d : trendvis::validate_dataset(ds)) diagnostics.push_back(std::move(d));
  }

  manifest.parameters["epoch"] = resolved_epoch;

  std::ostringstream traj_csv;
  trendvis::write_trajectory_csv(traj_csv, ds.trajectories);
  trendvis::atomic_write(out / "trajectories.csv", traj_csv.str());
  manifest.outputs.push_back("trajectories.csv");

  std::ostringstream meta_csv;
  trendvis::write_metadata_csv(meta_csv, ds.meta);
  trendvis::atomic_write(out / "meta.csv", meta_csv.str());
  manifest.outputs.push_back("meta.csv");

  std::ostringstream diag_csv;
  trendvis::write_diagnostics_csv(diag_csv, diagnostics);
  trendvis::atomic_write(out / "diagnostics.csv", diag_csv.str());
  manifest.outputs.push_back("diagnostics.csv");

  manifest.write(out);

  std::size_t n_obs = 0;
  for (const auto& [topic, traj] : ds.trajectories) n_obs += traj.obs.size();
  std::cout << "ingested " << ds.trajectories.size() << " topics, " << n_obs
            << " observations, " << diagnostics.size() << " diagnostics\n";
  return 0;
}

// --- visibility ---

struct VisibilityArgs {
  std::string bundle;
  std::vector<std::string> topics;
  std::string d_grid = "0:3:0.015";
  std::optional<double> at_d;
};

int cmd_visibility(const GlobalFlags& g, const VisibilityArgs& a) {
  const trendvis::Dataset ds = load_bundle(a.bundle, g.parse_options());
  std::vector<const trendvis::Trajectory*> selected;
  for (const std::string& topic : a.topics) {
    const auto it = ds.trajectories.find(topic);
    if (it == ds.trajectories.end())
      throw trendvis::Error(trendvis::errc::unknown_topic, "no trajectory for '" + topic + "'");
    selected.push_back(&it->second);
  }

  if (a.at_d) {
    for (const trendvis::Trajectory* traj : selected) {
      const double v = trendvis::visibility(*traj, *a.at_d);
      if (selected.size() > 1) std::cout << traj->topic << '\t';
      std::cout << fmt17(v) << '\n';
    }
    return 0;
  }

  const std::vector<double> grid = trendvis::DGrid::parse(a.d_grid).points();
  if (g.out_dir.empty()) {
    if (selected.size() != 1)
      throw UsageError("profiles for several topics need --out DIR");
    std::cout << "d,visibility\n";
    for (const auto& [d, v] : trendvis::visibility_profile(*selected[0], grid))
      std::cout << fmt17(d) << ',' << fmt17(v) << '\n';
    return 0;
  }

  const fs::path out = require_out(g.out_dir);
  trendvis::RunManifest manifest;
  manifest.command = "visibility";
  put_common_params(manifest, g);
  manifest.parameters["d_grid"] = a.d_grid;
  manifest.add_input(fs::path(a.bundle) / "trajectories.csv");
  for (const trendvis::Trajectory* traj : selected) {
    std::ostringstream csv;
    csv << "d,visibility\n";
    for (const auto& [d, v] : trendvis::visibility_profile(*traj, grid))
      csv << fmt17(d) << ',' << fmt17(v) << '\n';
    const std::string name = "visibility_" + sanitize(traj->topic) + ".csv";
    trendvis::atomic_write(out / name, csv.str());
    manifest.outputs.push_back(name);
  }
  manifest.write(out);
  return 0;
}

// --- sweep ---

struct SweepArgs {
  std::string bundle;
  double d_min = 0.0;
  double d_max = 3.0;
  double d_step = 0.015;
  std::string category;
  bool per_category = false;
  std::size_t min_topics = 30;
};

json boundary_json(trendvis::Boundary b) { return trendvis::boundary_name(b); }

int cmd_sweep(const GlobalFlags& g, const SweepArgs& a) {
  if (!(a.d_step > 0.0)) throw UsageError("--d-step must be > 0");
  const fs::path out = require_out(g.out_dir);

  trendvis::Dataset ds = load_bundle(a.bundle, g.parse_options());
  if (ds.meta.empty())
    throw trendvis::Error(trendvis::errc::io_error,
                          "bundle '" + a.bundle + "' has no usable meta.csv");
  if (!a.category.empty()) {
    trendvis::Dataset sub;
    sub.epoch_iso = ds.epoch_iso;
    sub.r_cap = ds.r_cap;
    for (const auto& [topic, m] : ds.meta) {
      if (m.category != a.category) continue;
      sub.meta.emplace(topic, m);
      const auto it = ds.trajectories.find(topic);
      if (it != ds.trajectories.end()) sub.trajectories.emplace(topic, it->second);
    }
    ds = std::move(sub);
  }

  const std::vector<double> grid =
      trendvis::DGrid{a.d_min, a.d_max, a.d_step}.points();
  const trendvis::SweepResult sweep = trendvis::sweep_dmax(ds, grid);

  trendvis::RunManifest manifest;
  manifest.command = "sweep";
  put_common_params(manifest, g);
  manifest.add_input(fs::path(a.bundle) / "trajectories.csv");
  manifest.add_input(fs::path(a.bundle) / "meta.csv");
  manifest.parameters["d_min"] = fmt17(a.d_min);
  manifest.parameters["d_max"] = fmt17(a.d_max);
  manifest.parameters["d_step"] = fmt17(a.d_step);
  manifest.parameters["min_topics"] = std::to_string(a.min_topics);
  if (!a.category.empty()) manifest.parameters["category"] = a.category;
  manifest.parameters["per_category"] = a.per_category ? "true" : "false";

  std::ostringstream curve_csv;
  curve_csv << "d,r2,n\n";
  for (const trendvis::SweepPoint& p : sweep.curve)
    curve_csv << fmt17(p.d) << ',' << fmt17(p.r2) << ',' << p.n << '\n';
  trendvis::atomic_write(out / "sweep.csv", curve_csv.str());
  manifest.outputs.push_back("sweep.csv");

  json summary;
  summary["d_max"] = sweep.d_max;
  summary["r2_max"] = sweep.r2_max;
  summary["boundary"] = boundary_json(sweep.boundary);
  summary["n"] = sweep.n;
  summary["grid_spec"] = {
      {"lo", a.d_min}, {"hi", a.d_max}, {"step", a.d_step}, {"points", grid.size()}};

  if (a.per_category) {
    const trendvis::PerCategoryResult per =
        trendvis::per_category_sweep(ds, grid, a.min_topics);
    std::ostringstream cat_csv;
    cat_csv << "category,r2_max,d_max,n_topics,boundary\n";
    for (const trendvis::CategoryReport& r : per.reports)
      cat_csv << trendvis::detail::csv_field(r.category) << ',' << fmt17(r.r2_max) << ','
              << fmt17(r.d_max) << ',' << r.n_topics << ',' << trendvis::boundary_name(r.boundary)
              << '\n';
    trendvis::atomic_write(out / "categories.csv", cat_csv.str());
    manifest.outputs.push_back("categories.csv");
    summary["skipped_categories"] = json::array();
    for (const auto& [label, n] : per.skipped)
      summary["skipped_categories"].push_back({{"category", label}, {"n_topics", n}});
  }

  trendvis::atomic_write(out / "summary.json", summary.dump(2) + "\n");
  manifest.outputs.push_back("summary.json");
  manifest.write(out);

  std::cout << "d_max=" << fmt17(sweep.d_max) << " r2_max=" << fmt17(sweep.r2_max)
            << " boundary=" << trendvis::boundary_name(sweep.boundary) << " n=" << sweep.n
            << '\n';
  return 0;
}

// --- synth ---

struct SynthArgs {
  std::string config_file;
};

int cmd_synth(const GlobalFlags& g, const SynthArgs& a, bool r_cap_set) {
  const fs::path out = require_out(g.out_dir);

  trendvis::RunManifest manifest;
  manifest.command = "synth";
  put_common_params(manifest, g);
  manifest.add_input(a.config_file);

  std::ifstream in = open_input(a.config_file);
  trendvis::SynthConfig cfg = trendvis::parse_synth_config(in);
  if (g.seed) cfg.seed = *g.seed;
  if (r_cap_set) cfg.r_cap = g.r_cap;
  cfg.validate();

  std::ostringstream cfg_text;
  trendvis::serialize_synth_config(cfg_text, cfg);
  manifest.parameters["config"] = cfg_text.str();

  const trendvis::Dataset ds = trendvis::generate_dataset(cfg);

  std::ostringstream traj_csv;
  trendvis::write_trajectory_csv(traj_csv, ds.trajectories);
  trendvis::atomic_write(out / "trajectories.csv", traj_csv.str());
  manifest.outputs.push_back("trajectories.csv");

  std::ostringstream meta_csv;
  trendvis::write_metadata_csv(meta_csv, ds.meta);
  trendvis::atomic_write(out / "meta.csv", meta_csv.str());
  manifest.outputs.push_back("meta.csv");

  std::ostringstream truth;
  truth << "category,d_star,b,c,sigma,seed\n";
  if (cfg.categories.empty()) {
    truth << "unknown," << fmt17(cfg.read_d_star) << ',' << fmt17(cfg.read_exponent_b) << ','
          << fmt17(cfg.read_scale_c) << ',' << fmt17(cfg.read_sigma) << ',' << cfg.seed << '\n';
  } else {
    for (const trendvis::SynthCategory& c : cfg.categories)
      truth << trendvis::detail::csv_field(c.label) << ','
            << fmt17(c.d_star.value_or(cfg.read_d_star)) << ',' << fmt17(cfg.read_exponent_b)
            << ',' << fmt17(cfg.read_scale_c) << ',' << fmt17(cfg.read_sigma) << ',' << cfg.seed
            << '\n';
  }
  trendvis::atomic_write(out / "truth.csv", truth.str());
  manifest.outputs.push_back("truth.csv");

  manifest.write(out);
  std::cout << "generated " << ds.trajectories.size() << " topics\n";
  return 0;
}

// --- report ---

struct ReportArgs {
  std::string bundle;
  std::string figures;
  std::vector<std::string> topics;
  double at_d = 0.8;
  double d_min = 0.0;
  double d_max = 3.0;
  double d_step = 0.015;
};

int cmd_report(const GlobalFlags& g, const ReportArgs& a) {
  if (!(a.d_step > 0.0)) throw UsageError("--d-step must be > 0");
  std::set<std::string> figures;
  {
    std::stringstream ss(a.figures);
    std::string fig;
    while (std::getline(ss, fig, ',')) {
      if (fig != "fig1" && fig != "fig2" && fig != "fig3" && fig != "fig4")
        throw UsageError("unknown figure '" + fig + "' (expected fig1..fig4)");
      figures.insert(fig);
    }
  }
  if (figures.empty()) throw UsageError("--figures needs at least one of fig1..fig4");
  const fs::path out = require_out(g.out_dir);

  const trendvis::Dataset ds = load_bundle(a.bundle, g.parse_options());
  const auto find_topic = [&](const std::string& topic) -> const trendvis::Trajectory& {
    const auto it = ds.trajectories.find(topic);
    if (it == ds.trajectories.end())
      throw trendvis::Error(trendvis::errc::unknown_topic, "no trajectory for '" + topic + "'");
    return it->second;
  };

  trendvis::RunManifest manifest;
  manifest.command = "report";
  put_common_params(manifest, g);
  manifest.add_input(fs::path(a.bundle) / "trajectories.csv");
  if (fs::exists(fs::path(a.bundle) / "meta.csv"))
    manifest.add_input(fs::path(a.bundle) / "meta.csv");
  manifest.parameters["figures"] = a.figures;
  manifest.parameters["at_d"] = fmt17(a.at_d);
  manifest.parameters["d_min"] = fmt17(a.d_min);
  manifest.parameters["d_max"] = fmt17(a.d_max);
  manifest.parameters["d_step"] = fmt17(a.d_step);

  const auto grid_points = [&]() {
    return trendvis::DGrid{a.d_min, a.d_max, a.d_step}.points();
  };

  if (figures.contains("fig1")) {
    if (a.topics.empty()) throw UsageError("fig1 needs at least one --topic");
    for (const std::string& topic : a.topics) {
      const trendvis::Trajectory& traj = find_topic(topic);
      std::ostringstream csv;
      csv << "t,rank\n";
      for (const trendvis::RankObservation& o : traj.obs) csv << o.t << ',' << o.rank << '\n';
      const std::string name = "fig1_" + sanitize(topic) + ".csv";
      trendvis::atomic_write(out / name, csv.str());
      manifest.outputs.push_back(name);
    }
  }

  if (figures.contains("fig2")) {
    if (a.topics.size() != 2) throw UsageError("fig2 needs exactly two --topic values");
    const std::vector<double> grid = grid_points();
    for (const std::string& topic : a.topics) {
      const trendvis::Trajectory& traj = find_topic(topic);
      std::ostringstream csv;
      csv << "d,visibility\n";
      for (const auto& [d, v] : trendvis::visibility_profile(traj, grid))
        csv << fmt17(d) << ',' << fmt17(v) << '\n';
      const std::string name = "fig2_" + sanitize(topic) + ".csv";
      trendvis::atomic_write(out / name, csv.str());
      manifest.outputs.push_back(name);
    }
    const auto cross = trendvis::find_crossover(find_topic(a.topics[0]), find_topic(a.topics[1]),
                                                grid.front(), grid.back(), 1e-9);
    if (cross)
      std::cout << "crossover d = " << fmt17(*cross) << '\n';
    else
      std::cout << "no crossover in [" << fmt17(grid.front()) << ", " << fmt17(grid.back())
                << "]\n";
  }

  if (figures.contains("fig3")) {
    const trendvis::FilterResult filtered = trendvis::filter_regression_points(ds, a.at_d);
    const trendvis::FitResult fit = trendvis::ols_loglog(filtered.points);
    std::ostringstream csv;
    csv << "log10_v,log10_reads\n";
    for (const trendvis::RegressionPoint& p : filtered.points)
      csv << fmt17(std::log10(p.v)) << ',' << fmt17(std::log10(static_cast<double>(p.reads)))
          << '\n';
    trendvis::atomic_write(out / "fig3_scatter.csv", csv.str());
    manifest.outputs.push_back("fig3_scatter.csv");
    json fitj;
    fitj["d"] = a.at_d;
    fitj["slope"] = fit.slope;
    fitj["intercept"] = fit.intercept;
    fitj["r2"] = fit.r2;
    fitj["n"] = fit.n;
    trendvis::atomic_write(out / "fig3_fit.json", fitj.dump(2) + "\n");
    manifest.outputs.push_back("fig3_fit.json");
  }

  if (figures.contains("fig4")) {
    const trendvis::SweepResult sweep = trendvis::sweep_dmax(ds, grid_points());
    std::ostringstream csv;
    csv << "d,r2\n";
    for (const trendvis::SweepPoint& p : sweep.curve) csv << fmt17(p.d) << ',' << fmt17(p.r2) << '\n';
    trendvis::atomic_write(out / "fig4.csv", csv.str());
    manifest.outputs.push_back("fig4.csv");
  }

  manifest.write(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trending-topic visibility analytics"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_flag("--strict", g.strict, "abort on the first parse problem (default: lenient)");
  auto* r_cap_opt =
      app.add_option("--r-cap", g.r_cap, "chart depth (default 50)")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "master seed override");
  app.add_option("--out", g.out_dir, "output directory");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "parse snapshots or CSVs into a dataset bundle");
  ingest->fallthrough();
  ingest->add_option("--snapshots", ingest_args.snapshot_files, "snapshot stream files");
  ingest->add_option("--trajectories", ingest_args.trajectory_file, "trajectory CSV");
  ingest->add_option("--meta", ingest_args.meta_file, "metadata CSV");
  ingest->add_option("--epoch", ingest_args.epoch, "ISO-8601 UTC epoch override");

  VisibilityArgs vis_args;
  auto* vis = app.add_subcommand("visibility", "visibility profiles V(d) for selected topics");
  vis->fallthrough();
  vis->add_option("--bundle", vis_args.bundle, "dataset bundle directory")->required();
  vis->add_option("--topic", vis_args.topics, "topic id (repeatable)")->required();
  vis->add_option("--d-grid", vis_args.d_grid, "grid as lo:hi:step (default 0:3:0.015)");
  vis->add_option("--at", vis_args.at_d, "evaluate at a single d instead of a grid");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "scan d for the best log-log fit of reads vs V(d)");
  sweep->fallthrough();
  sweep->add_option("--bundle", sweep_args.bundle, "dataset bundle directory")->required();
  sweep->add_option("--d-min", sweep_args.d_min, "grid start (default 0)");
  sweep->add_option("--d-max", sweep_args.d_max, "grid end (default 3)");
  sweep->add_option("--d-step", sweep_args.d_step, "grid step (default 0.015)");
  sweep->add_option("--category", sweep_args.category, "restrict to one category");
  sweep->add_flag("--per-category", sweep_args.per_category, "emit per-category report");
  sweep->add_option("--min-topics", sweep_args.min_topics,
                    "per-category inclusion threshold (default 30)");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset bundle");
  synth->fallthrough();
  synth->add_option("--config", synth_args.config_file, "key=value config file")->required();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "emit plot-ready data files");
  report->fallthrough();
  report->add_option("--bundle", report_args.bundle, "dataset bundle directory")->required();
  report->add_option("--figures", report_args.figures, "comma list from fig1,fig2,fig3,fig4")
      ->required();
  report->add_option("--topic", report_args.topics, "topic id (repeatable)");
  report->add_option("--at-d", report_args.at_d, "scatter discrimination level (default 0.8)");
  report->add_option("--d-min", report_args.d_min, "grid start (default 0)");
  report->add_option("--d-max", report_args.d_max, "grid end (default 3)");
  report->add_option("--d-step", report_args.d_step, "grid step (default 0.015)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(g, ingest_args);
    if (vis->parsed()) return cmd_visibility(g, vis_args);
    if (sweep->parsed()) return cmd_sweep(g, sweep_args);
    if (synth->parsed()) return cmd_synth(g, synth_args, r_cap_opt->count() > 0);
    if (report->parsed()) return cmd_report(g, report_args);
    throw UsageError("no subcommand selected");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const trendvis::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
