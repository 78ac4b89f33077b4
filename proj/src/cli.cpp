#include "veinmatch/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "veinmatch/error.hpp"
#include "veinmatch/evalharness.hpp"
#include "veinmatch/feature_io.hpp"
#include "veinmatch/image_io.hpp"
#include "veinmatch/parallel.hpp"
#include "veinmatch/pipeline.hpp"
#include "veinmatch/render.hpp"
#include "veinmatch/synthbench.hpp"

#ifndef VEINMATCH_VERSION
#define VEINMATCH_VERSION "0.0.0"
#endif

namespace veinmatch {
namespace {

using nlohmann::json;

// Config overrides collected from flags; applied on top of the file.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> matcher;
  std::optional<double> ratio;
  std::optional<std::string> filter;
  std::optional<double> t_mu;
  std::optional<double> t_d;
  std::optional<int> template_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> dev_fraction;
  bool root_sift = false;

  void attach(CLI::App* app, bool scoring, bool protocol) {
    app->add_option("--config", config_path, "JSON pipeline config")->check(CLI::ExistingFile);
    app->add_flag("--root-sift", root_sift, "Apply the RootSIFT descriptor transform");
    if (scoring) {
      app->add_option("--matcher", matcher, "ed | knn_rt | bidirectional");
      app->add_option("--ratio", ratio, "Ratio-test threshold for knn_rt");
      app->add_option("--filter", filter, "none | mmd | ransac");
      app->add_option("--t-mu", t_mu, "MMD maximum mean threshold (px)");
      app->add_option("--t-d", t_d, "MMD maximum distance threshold (px)");
    }
    if (protocol) {
      app->add_option("--template-size", template_size, "Enrollment samples per identity (1-5)");
      app->add_option("--seed", seed, "Protocol split seed");
      app->add_option("--dev-fraction", dev_fraction, "Fraction of identities held out for development");
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    json patch = json::object();
    if (matcher) patch["matcher"]["kind"] = *matcher;
    if (ratio) patch["matcher"]["ratio"] = *ratio;
    if (filter) patch["filter"]["kind"] = *filter;
    if (t_mu) patch["filter"]["t_mu"] = *t_mu;
    if (t_d) patch["filter"]["t_d"] = *t_d;
    if (template_size) patch["protocol"]["template_size"] = *template_size;
    if (seed) patch["protocol"]["seed"] = *seed;
    if (dev_fraction) patch["protocol"]["dev_fraction"] = *dev_fraction;
    if (root_sift) patch["root_sift"] = true;
    return config_from_json(patch, c);
  }
};

json report_header(const std::string& command, const PipelineConfig& config) {
  return {{"command", command}, {"version", toolkit_version()}, {"config", config_to_json(config)}};
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json geometry_json(const std::optional<RoiGeometry>& g) {
  if (!g) return nullptr;
  return {{"left_valley", {g->left_valley.x, g->left_valley.y}},
          {"right_valley", {g->right_valley.x, g->right_valley.y}},
          {"rotation", g->rotation},
          {"unit_d", g->unit_d},
          {"crop", {g->crop_x, g->crop_y, g->side}}};
}

struct FilterOutcome {
  json decision;
  std::vector<bool> accepted;  // per input pair
  std::size_t survivors = 0;
};

FilterOutcome apply_filter(const MatchSet& matches, const FeatureSet& probe,
                           const FeatureSet& gallery, const ScoringPipeline& p) {
  FilterOutcome out;
  out.accepted.assign(matches.size(), false);
  switch (p.filter) {
    case FilterKind::kNone:
      std::fill(out.accepted.begin(), out.accepted.end(), true);
      out.survivors = matches.size();
      out.decision = {{"kind", "none"}, {"image_accepted", true}};
      break;
    case FilterKind::kMmd: {
      const MmdDecision d = mmd_filter(matches, probe.keypoints, gallery.keypoints, p.mmd);
      for (std::size_t pos : d.accepted_positions) out.accepted[pos] = true;
      out.survivors = d.image_accepted ? d.accepted.size() : 0;
      out.decision = mmd_decision_to_json(d);
      out.decision["kind"] = "mmd";
      break;
    }
    case FilterKind::kRansac: {
      const RansacResult r = ransac_filter(matches, probe.keypoints, gallery.keypoints, p.ransac);
      // Filtered pairs keep input order, so a merge walk recovers positions.
      std::size_t k = 0;
      for (std::size_t i = 0; i < matches.size() && k < r.filtered.size(); ++i) {
        if (matches.pairs[i] == r.filtered.pairs[k]) {
          out.accepted[i] = true;
          ++k;
        }
      }
      out.survivors = r.filtered.size();
      out.decision = {{"kind", "ransac"},
                      {"degenerate", r.degenerate},
                      {"image_accepted", !r.filtered.empty()},
                      {"survivors", r.filtered.size()},
                      {"model", {r.model.a, r.model.b, r.model.tx, r.model.ty}}};
      break;
    }
  }
  return out;
}

std::vector<Sample> extract_manifest(const DatasetManifest& m, const PipelineConfig& config,
                                     unsigned threads, json* per_image) {
  std::vector<Sample> samples(m.entries.size());
  std::vector<ValleySource> sources(m.entries.size());
  parallel_for(m.entries.size(), threads, [&](std::size_t i) {
    const ManifestEntry& e = m.entries[i];
    const GrayImage img = read_image(e.path);
    const auto annotation = read_valley_annotation(annotation_path_for(e.path));
    Extraction x = extract_features(img, config, annotation, e.id());
    samples[i].identity = e.identity();
    samples[i].sample_index = e.sample;
    samples[i].id = e.id();
    samples[i].features = std::move(x.features);
    sources[i] = x.valley_source;
  });
  if (per_image) {
    std::map<std::string, int> counts;
    for (ValleySource s : sources) ++counts[valley_source_name(s)];
    *per_image = counts;
  }
  return samples;
}

int cmd_extract(const std::string& in, const std::string& out_path, const std::string& json_out,
                const ConfigFlags& flags, std::ostream& out) {
  const PipelineConfig config = flags.resolve();
  const Extraction x = extract_features_from_file(in, config);
  if (std::filesystem::path(out_path).extension() == ".json") {
    write_json_file(out_path, features_to_json(x.features));
  } else {
    write_vmfs(out_path, x.features);
  }
  json report = report_header("extract", config);
  report["input"] = in;
  report["output"] = out_path;
  report["keypoints"] = x.features.size();
  report["valley_source"] = valley_source_name(x.valley_source);
  report["roi"] = geometry_json(x.geometry);
  report["processed_size"] = {x.processed.width(), x.processed.height()};
  if (!json_out.empty()) write_json_file(json_out, report);
  out << report.dump(2) << '\n';
  return kExitOk;
}

FeatureSet read_features(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".json") {
    std::ifstream in(path);
    if (!in) Fail(ErrorKind::kIo, "cannot open " + path);
    try {
      FeatureSet fs = features_from_json(json::parse(in));
      if (fs.source_id.empty()) fs.source_id = std::filesystem::path(path).stem().string();
      return fs;
    } catch (const json::exception& e) {
      Fail(ErrorKind::kIo, "malformed feature file " + path + ": " + e.what());
    }
  }
  return read_vmfs(path);
}

int cmd_match(const std::string& probe_path, const std::string& gallery_path,
              const std::string& viz, const std::string& probe_image,
              const std::string& gallery_image, const ConfigFlags& flags, std::ostream& out) {
  const PipelineConfig config = flags.resolve();
  const FeatureSet probe = read_features(probe_path);
  const FeatureSet gallery = read_features(gallery_path);
  const MatchSet matches = run_matcher(probe, gallery, config.scoring);
  const FilterOutcome f = apply_filter(matches, probe, gallery, config.scoring);

  json report = report_header("match", config);
  report["probe"] = probe.source_id;
  report["gallery"] = gallery.source_id;
  report["probe_keypoints"] = probe.size();
  report["gallery_keypoints"] = gallery.size();
  report["matches"] = matches.size();
  report["survivors"] = f.survivors;
  report["decision"] = f.decision;
  report["pairs"] = match_set_to_json(matches);
  if (!viz.empty()) {
    std::optional<GrayImage> qi, gi;
    if (!probe_image.empty()) qi = read_image(probe_image);
    if (!gallery_image.empty()) gi = read_image(gallery_image);
    write_png(viz, render_matches(qi, gi, probe, gallery, matches, f.accepted));
    report["viz"] = viz;
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_viz(const std::string& probe_path, const std::string& gallery_path,
            const std::string& out_png, const ConfigFlags& flags, std::ostream& out) {
  const PipelineConfig config = flags.resolve();
  const Extraction p = extract_features_from_file(probe_path, config);
  const Extraction g = extract_features_from_file(gallery_path, config);
  const MatchSet matches = run_matcher(p.features, g.features, config.scoring);
  const FilterOutcome f = apply_filter(matches, p.features, g.features, config.scoring);
  write_png(out_png, render_matches(p.processed, g.processed, p.features, g.features, matches, f.accepted));
  json report = report_header("viz", config);
  report["probe"] = probe_path;
  report["gallery"] = gallery_path;
  report["matches"] = matches.size();
  report["survivors"] = f.survivors;
  report["decision"] = f.decision;
  report["output"] = out_png;
  out << report.dump(2) << '\n';
  return kExitOk;
}

DatasetManifest load_manifest(const std::string& manifest, const std::string& directory,
                              const std::string& pattern) {
  if (!manifest.empty()) return read_manifest_csv(manifest);
  FilenamePattern p;
  if (!pattern.empty()) p.regex = pattern;
  return manifest_from_directory(directory, p);
}

int cmd_enroll(const DatasetManifest& manifest, const std::string& identity_filter,
               const std::string& out_dir, const ConfigFlags& flags, std::ostream& out) {
  const PipelineConfig config = flags.resolve();
  DatasetManifest selected;
  selected.parsing_rule = manifest.parsing_rule;
  for (const ManifestEntry& e : manifest.entries) {
    if (identity_filter.empty() || e.identity().str() == identity_filter) selected.entries.push_back(e);
  }
  if (selected.entries.empty()) Fail(ErrorKind::kEnrollment, "no samples for identity '" + identity_filter + "'");

  std::vector<Sample> samples = extract_manifest(selected, config, configured_threads(), nullptr);
  std::map<Identity, std::vector<Sample>> groups;
  for (Sample& s : samples) groups[s.identity].push_back(std::move(s));

  json report = report_header("enroll", config);
  report["parsing_rule"] = manifest.parsing_rule;
  json templates = json::array();
  for (auto& [identity, group] : groups) {
    Enrollment e = enroll(identity, std::move(group), config.protocol.template_size);
    const std::filesystem::path dir = std::filesystem::path(out_dir) / identity.str();
    std::filesystem::create_directories(dir);
    json files = json::array();
    for (std::size_t i = 0; i < e.tmpl.members.size(); ++i) {
      const auto file = dir / (e.tmpl.member_ids[i] + ".vmfs");
      write_vmfs(file, e.tmpl.members[i]);
      files.push_back(file.string());
    }
    json probes = json::array();
    for (const Sample& s : e.probes) probes.push_back(s.id);
    templates.push_back({{"identity", identity.str()},
                         {"members", e.tmpl.member_ids},
                         {"files", files},
                         {"probes", probes}});
  }
  report["templates"] = templates;
  write_json_file(std::filesystem::path(out_dir) / "enrollment.json", report);
  out << report.dump(2) << '\n';
  return kExitOk;
}

json curve_json(const std::vector<std::pair<double, double>>& c) {
  json a = json::array();
  for (const auto& [t, r] : c) a.push_back({t, r});
  return a;
}

int cmd_evaluate(const DatasetManifest& manifest, const std::string& partition,
                 const std::string& report_path, const std::string& scores_path,
                 const ConfigFlags& flags, std::ostream& out) {
  const PipelineConfig config = flags.resolve();
  const ProtocolSplit split =
      build_protocol_split(manifest, config.protocol.dev_fraction, config.protocol.seed);
  const DatasetManifest* used = &split.eval;
  if (partition == "dev") {
    used = &split.dev;
  } else if (partition == "all") {
    used = &manifest;
  }

  const unsigned threads = configured_threads();
  json valley_sources;
  std::vector<Sample> samples = extract_manifest(*used, config, threads, &valley_sources);
  EvaluationConfig ec;
  ec.template_size = config.protocol.template_size;
  ec.pipeline = config.scoring;
  ec.threads = threads;
  const std::vector<ScoreRecord> records = run_evaluation(std::move(samples), ec);
  const EerResult eer = compute_eer(records);

  json report = report_header("evaluate", config);
  report["parsing_rule"] = manifest.parsing_rule;
  report["partition"] = partition;
  report["images"] = {{"total", manifest.entries.size()},
                      {"dev", split.dev.entries.size()},
                      {"eval", split.eval.entries.size()},
                      {"scored", used->entries.size()}};
  report["valley_sources"] = valley_sources;
  report["score_function"] =
      "filtered match count per template member, aggregated across members";
  report["records"] = {{"genuine", eer.genuine_count}, {"impostor", eer.impostor_count}};
  report["eer"] = eer.eer;
  report["eer_percent"] = 100.0 * eer.eer;
  report["threshold_at_eer"] = eer.threshold_at_eer;
  report["far_curve"] = curve_json(eer.far_curve);
  report["frr_curve"] = curve_json(eer.frr_curve);

  if (!scores_path.empty()) {
    std::ofstream s(scores_path);
    if (!s) Fail(ErrorKind::kIo, "cannot write " + scores_path);
    write_scores_csv(s, records);
  }
  if (!report_path.empty()) write_json_file(report_path, report);
  json summary = {{"eer", eer.eer}, {"threshold_at_eer", eer.threshold_at_eer},
                  {"genuine", eer.genuine_count}, {"impostor", eer.impostor_count}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

std::string sweep_svg(const std::vector<SweepRow>& rows, const std::vector<double>& angles,
                      const std::vector<double>& thresholds) {
  // Mean recall against threshold, one polyline per rotation angle.
  const double w = 640, h = 400, ml = 60, mr = 120, mt = 20, mb = 50;
  const double t0 = thresholds.front(), t1 = thresholds.back();
  auto sx = [&](double t) { return ml + (t1 > t0 ? (t - t0) / (t1 - t0) : 0.5) * (w - ml - mr); };
  auto sy = [&](double r) { return mt + (1.0 - r) * (h - mt - mb); };
  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << sy(0) << "\" x2=\"" << w - mr << "\" y2=\"" << sy(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << sy(0) << "\" x2=\"" << ml << "\" y2=\"" << sy(1)
      << "\" stroke=\"black\"/>\n";
  for (double t : thresholds) {
    svg << "<text x=\"" << sx(t) << "\" y=\"" << h - mb + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
        << t << "</text>\n";
  }
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">threshold (px)</text>\n";
  svg << "<text x=\"14\" y=\"" << (mt + h - mb) / 2 << "\" font-size=\"12\">recall</text>\n";
  const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  for (std::size_t a = 0; a < angles.size(); ++a) {
    svg << "<polyline fill=\"none\" stroke=\"" << palette[a % 6] << "\" stroke-width=\"2\" points=\"";
    for (double t : thresholds) {
      double sum = 0;
      int n = 0;
      for (const SweepRow& r : rows) {
        if (r.angle_deg == angles[a] && r.threshold == t) {
          sum += r.metrics.recall;
          ++n;
        }
      }
      svg << sx(t) << ',' << sy(n ? sum / n : 0.0) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << w - mr + 10 << "\" y=\"" << mt + 16 * (a + 1) << "\" font-size=\"11\" fill=\""
        << palette[a % 6] << "\">" << angles[a] << " deg</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int cmd_sweep(int n_seeds, std::uint64_t first_seed, std::vector<double> angles,
              std::vector<double> thresholds, const std::string& csv_path,
              const std::string& plot_path, std::ostream& out) {
  if (n_seeds < 1) Fail(ErrorKind::kParameter, "at least one seed is required");
  if (angles.empty()) angles = kSweepAnglesDeg;
  if (thresholds.empty()) thresholds = kSweepThresholds;
  std::sort(angles.begin(), angles.end());
  std::sort(thresholds.begin(), thresholds.end());
  std::vector<std::uint64_t> seeds(n_seeds);
  for (int i = 0; i < n_seeds; ++i) seeds[i] = first_seed + static_cast<std::uint64_t>(i);
  const std::vector<SweepRow> rows = run_sweep(seeds, angles, thresholds, configured_threads());

  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) Fail(ErrorKind::kIo, "cannot write " + csv_path);
    write_sweep_csv(f, rows);
  }
  if (!plot_path.empty()) {
    std::ofstream f(plot_path);
    if (!f) Fail(ErrorKind::kIo, "cannot write " + plot_path);
    f << sweep_svg(rows, angles, thresholds);
  }

  // Monotonicity tallies across the grid.
  std::size_t survivor_violations = 0, recall_violations = 0, restore_violations = 0;
  const std::size_t na = angles.size(), nt = thresholds.size();
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    auto cell = [&](std::size_t a, std::size_t t) -> const FilterMetrics& {
      return rows[(s * na + a) * nt + t].metrics;
    };
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t t = 1; t < nt; ++t) {
        if (cell(a, t).survivors < cell(a, t - 1).survivors) ++survivor_violations;
      }
    }
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t a = 1; a < na; ++a) {
        if (cell(a, t).recall > cell(a - 1, t).recall) ++recall_violations;
      }
    }
    // Some threshold must bring each angle back to the 0 degree recall at
    // the smallest threshold.
    for (std::size_t a = 0; a < na; ++a) {
      double best = 0.0;
      for (std::size_t t = 0; t < nt; ++t) best = std::max(best, cell(a, t).recall);
      if (best < cell(0, 0).recall) ++restore_violations;
    }
  }
  json report = {{"command", "sweep"},
                 {"version", toolkit_version()},
                 {"seeds", {first_seed, first_seed + n_seeds - 1}},
                 {"angles_deg", angles},
                 {"thresholds", thresholds},
                 {"rows", rows.size()},
                 {"survivor_monotonicity_violations", survivor_violations},
                 {"recall_rotation_violations", recall_violations},
                 {"recall_restore_violations", restore_violations}};
  out << report.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

const char* toolkit_version() { return VEINMATCH_VERSION; }

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Palm-vein SIFT matching toolkit with the MMD geometric filter", "veinmatch"};
  app.set_version_flag("--version", std::string(toolkit_version()));
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "Extract SIFT features from one palm image");
  std::string ex_in, ex_out, ex_json;
  ConfigFlags ex_flags;
  extract->add_option("--in", ex_in, "Input image (PNG, PGM or JPEG)")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", ex_out, "Output feature file (.vmfs, or .json)")->required();
  extract->add_option("--report", ex_json, "Also write the JSON report to this file");
  ex_flags.attach(extract, false, false);

  // match
  auto* match = app.add_subcommand("match", "Match two feature files and apply the configured filter");
  std::string m_probe, m_gallery, m_viz, m_probe_img, m_gallery_img;
  ConfigFlags m_flags;
  match->add_option("--probe", m_probe, "Probe feature file")->required()->check(CLI::ExistingFile);
  match->add_option("--gallery", m_gallery, "Gallery feature file")->required()->check(CLI::ExistingFile);
  match->add_option("--viz", m_viz, "Write a match overlay PNG");
  match->add_option("--probe-image", m_probe_img, "Background for the probe side of the overlay")
      ->check(CLI::ExistingFile);
  match->add_option("--gallery-image", m_gallery_img, "Background for the gallery side of the overlay")
      ->check(CLI::ExistingFile);
  m_flags.attach(match, true, false);

  // viz
  auto* viz = app.add_subcommand("viz", "Extract, match and draw two palm images");
  std::string v_probe, v_gallery, v_out;
  ConfigFlags v_flags;
  viz->add_option("--probe", v_probe, "Probe image")->required()->check(CLI::ExistingFile);
  viz->add_option("--gallery", v_gallery, "Gallery image")->required()->check(CLI::ExistingFile);
  viz->add_option("--out", v_out, "Output PNG")->required();
  v_flags.attach(viz, true, false);

  // enroll / evaluate share the dataset options
  std::string manifest_path, directory, pattern;
  auto add_dataset = [&](CLI::App* sub) {
    auto* group = sub->add_option_group("dataset");
    group->add_option("--manifest", manifest_path, "CSV manifest (path,subject,hand,sample)")
        ->check(CLI::ExistingFile);
    group->add_option("--dir", directory, "Directory scanned with --pattern")->check(CLI::ExistingDirectory);
    group->require_option(1);
    sub->add_option("--pattern", pattern, "Filename regex with subject, hand, sample groups");
  };

  auto* enroll_cmd = app.add_subcommand("enroll", "Build templates and write their feature files");
  std::string en_identity, en_out;
  ConfigFlags en_flags;
  add_dataset(enroll_cmd);
  enroll_cmd->add_option("--identity", en_identity, "Only this identity, e.g. 001_l");
  enroll_cmd->add_option("--out-dir", en_out, "Output directory")->required();
  en_flags.attach(enroll_cmd, false, true);

  auto* evaluate = app.add_subcommand("evaluate", "Run the closed-set protocol and report the EER");
  std::string ev_report, ev_scores, ev_partition = "eval";
  ConfigFlags ev_flags;
  add_dataset(evaluate);
  evaluate->add_option("--report", ev_report, "JSON report path");
  evaluate->add_option("--scores", ev_scores, "Score dump CSV path");
  evaluate->add_option("--partition", ev_partition, "eval | dev | all")
      ->check(CLI::IsMember({"eval", "dev", "all"}));
  ev_flags.attach(evaluate, true, true);

  auto* sweep = app.add_subcommand("sweep", "Synthetic threshold and rotation sweeps of the MMD filter");
  int sw_seeds = 50;
  std::uint64_t sw_first = 1;
  std::vector<double> sw_angles, sw_thresholds;
  std::string sw_csv, sw_plot;
  sweep->add_option("--seeds", sw_seeds, "Number of scenes");
  sweep->add_option("--first-seed", sw_first, "Seed of the first scene");
  sweep->add_option("--angles", sw_angles, "Rotation angles in degrees");
  sweep->add_option("--thresholds", sw_thresholds, "Common T_mu = T_D thresholds in pixels");
  sweep->add_option("--out", sw_csv, "Sweep CSV path");
  sweep->add_option("--plot", sw_plot, "SVG plot of mean recall per angle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << toolkit_version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*extract) return cmd_extract(ex_in, ex_out, ex_json, ex_flags, out);
    if (*match) return cmd_match(m_probe, m_gallery, m_viz, m_probe_img, m_gallery_img, m_flags, out);
    if (*viz) return cmd_viz(v_probe, v_gallery, v_out, v_flags, out);
    if (*enroll_cmd) {
      return cmd_enroll(load_manifest(manifest_path, directory, pattern), en_identity, en_out, en_flags, out);
    }
    if (*evaluate) {
      return cmd_evaluate(load_manifest(manifest_path, directory, pattern), ev_partition, ev_report,
                          ev_scores, ev_flags, out);
    }
    if (*sweep) return cmd_sweep(sw_seeds, sw_first, sw_angles, sw_thresholds, sw_csv, sw_plot, out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  err << "usage error: no subcommand\n";
  return kExitUsage;
}

}  // namespace veinmatch
