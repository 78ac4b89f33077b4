#include "veinmatch/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "veinmatch/error.hpp"
#include "veinmatch/parallel.hpp"
#include "veinmatch/random.hpp"

namespace veinmatch {

ProtocolSplit build_protocol_split(const DatasetManifest& manifest, double dev_fraction,
                                   std::uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    Fail(ErrorKind::kParameter, "dev fraction must lie in (0, 1)");
  }
  std::set<Identity> unique;
  for (const ManifestEntry& e : manifest.entries) unique.insert(e.identity());
  std::vector<Identity> identities(unique.begin(), unique.end());
  const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * identities.size()));
  if (n_dev == 0 || n_dev >= identities.size()) {
    Fail(ErrorKind::kProtocol, "manifest with " + std::to_string(identities.size()) +
                                   " identities is too small to split at fraction " +
                                   std::to_string(dev_fraction));
  }
  SeededRng rng(seed);
  seeded_shuffle(identities, rng);
  const std::set<Identity> dev_ids(identities.begin(), identities.begin() + n_dev);

  ProtocolSplit split;
  split.dev.parsing_rule = manifest.parsing_rule;
  split.eval.parsing_rule = manifest.parsing_rule;
  for (const ManifestEntry& e : manifest.entries) {
    (dev_ids.count(e.identity()) ? split.dev : split.eval).entries.push_back(e);
  }
  return split;
}

Enrollment enroll(const Identity& identity, std::vector<Sample> samples, int template_size) {
  if (template_size < 1) Fail(ErrorKind::kParameter, "template size must be at least 1");
  for (const Sample& s : samples) {
    if (s.identity != identity) {
      Fail(ErrorKind::kEnrollment, "sample " + s.id + " does not belong to " + identity.str());
    }
  }
  if (samples.size() <= static_cast<std::size_t>(template_size)) {
    Fail(ErrorKind::kEnrollment, identity.str() + " has " + std::to_string(samples.size()) +
                                     " samples; template size " + std::to_string(template_size) +
                                     " leaves no probes");
  }
  if (template_size > 5) Fail(ErrorKind::kParameter, "template size must lie in [1, 5]");
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.sample_index < b.sample_index; });
  Enrollment out;
  out.tmpl.identity = identity;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i < static_cast<std::size_t>(template_size)) {
      out.tmpl.members.push_back(std::move(samples[i].features));
      out.tmpl.member_ids.push_back(samples[i].id);
    } else {
      out.probes.push_back(std::move(samples[i]));
    }
  }
  return out;
}

MatchSet run_matcher(const FeatureSet& probe, const FeatureSet& gallery, const ScoringPipeline& p) {
  switch (p.matcher) {
    case MatcherKind::kClosestEd:
      return match_closest_ed(probe, gallery, p.max_distance);
    case MatcherKind::kKnnRatio:
      if (gallery.keypoints.size() < 2) {
        MatchSet empty;
        empty.query_id = probe.source_id;
        empty.gallery_id = gallery.source_id;
        return empty;
      }
      return match_knn_ratio(probe, gallery, p.ratio);
    case MatcherKind::kBidirectional:
      return match_bidirectional(probe, gallery, p.max_distance);
  }
  Fail(ErrorKind::kConfig, "unknown matcher kind");
}

std::size_t count_survivors(const FeatureSet& probe, const FeatureSet& member,
                            const ScoringPipeline& pipeline) {
  if (probe.keypoints.empty() || member.keypoints.empty()) return 0;
  const MatchSet matches = run_matcher(probe, member, pipeline);
  switch (pipeline.filter) {
    case FilterKind::kNone:
      return matches.size();
    case FilterKind::kMmd: {
      const MmdDecision d = mmd_filter(matches, probe.keypoints, member.keypoints, pipeline.mmd);
      return d.image_accepted ? d.accepted.size() : 0;
    }
    case FilterKind::kRansac:
      return ransac_filter(matches, probe.keypoints, member.keypoints, pipeline.ransac)
          .filtered.size();
  }
  Fail(ErrorKind::kConfig, "unknown filter kind");
}

double score_probe(const FeatureSet& probe, const Template& tmpl, const ScoringPipeline& pipeline) {
  if (tmpl.members.empty()) return 0.0;
  double best = 0.0;
  double total = 0.0;
  for (const FeatureSet& member : tmpl.members) {
    const double s = static_cast<double>(count_survivors(probe, member, pipeline));
    best = std::max(best, s);
    total += s;
  }
  switch (pipeline.aggregation) {
    case Aggregation::kMax:
      return best;
    case Aggregation::kSum:
      return total;
    case Aggregation::kMean:
      return total / static_cast<double>(tmpl.members.size());
  }
  return best;
}

std::vector<ScoreRecord> run_evaluation(std::vector<Sample> samples, const EvaluationConfig& config) {
  std::map<Identity, std::vector<Sample>> by_identity;
  for (Sample& s : samples) by_identity[s.identity].push_back(std::move(s));
  if (by_identity.size() < 2) {
    Fail(ErrorKind::kProtocol, "evaluation needs at least two identities");
  }

  std::vector<Template> templates;
  std::vector<Sample> probes;
  for (auto& [identity, group] : by_identity) {
    Enrollment e = enroll(identity, std::move(group), config.template_size);
    templates.push_back(std::move(e.tmpl));
    for (Sample& p : e.probes) probes.push_back(std::move(p));
  }

  // The opposite palm of the probe's own subject is never compared.
  auto comparable = [](const Identity& probe, const Identity& gallery) {
    return probe.subject != gallery.subject || probe.hand == gallery.hand;
  };

  std::vector<std::vector<ScoreRecord>> per_probe(probes.size());
  parallel_for(probes.size(), config.threads, [&](std::size_t i) {
    const Sample& probe = probes[i];
    for (const Template& t : templates) {
      if (!comparable(probe.identity, t.identity)) continue;
      ScoreRecord r;
      r.probe_id = probe.id;
      r.gallery_identity = t.identity.str();
      r.genuine = probe.identity == t.identity;
      r.score = score_probe(probe.features, t, config.pipeline);
      per_probe[i].push_back(std::move(r));
    }
  });

  std::vector<ScoreRecord> records;
  for (auto& v : per_probe) {
    for (ScoreRecord& r : v) records.push_back(std::move(r));
  }
  std::sort(records.begin(), records.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
    return std::tie(a.probe_id, a.gallery_identity) < std::tie(b.probe_id, b.gallery_identity);
  });
  return records;
}

EerResult compute_eer(std::span<const ScoreRecord> records) {
  std::vector<double> genuine;
  std::vector<double> impostor;
  for (const ScoreRecord& r : records) {
    if (!std::isfinite(r.score)) Fail(ErrorKind::kEvaluation, "non-finite score for " + r.probe_id);
    (r.genuine ? genuine : impostor).push_back(r.score);
  }
  if (genuine.empty() || impostor.empty()) {
    Fail(ErrorKind::kEvaluation, "EER needs both genuine and impostor scores");
  }
  std::sort(genuine.begin(), genuine.end());
  std::sort(impostor.begin(), impostor.end());

  std::vector<double> thresholds;
  thresholds.reserve(genuine.size() + impostor.size() + 1);
  thresholds.insert(thresholds.end(), genuine.begin(), genuine.end());
  thresholds.insert(thresholds.end(), impostor.begin(), impostor.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(thresholds.back() + 1.0);

  EerResult out;
  out.genuine_count = genuine.size();
  out.impostor_count = impostor.size();
  const double ng = static_cast<double>(genuine.size());
  const double ni = static_cast<double>(impostor.size());
  for (double t : thresholds) {
    const auto below_g = std::lower_bound(genuine.begin(), genuine.end(), t) - genuine.begin();
    const auto below_i = std::lower_bound(impostor.begin(), impostor.end(), t) - impostor.begin();
    out.far_curve.emplace_back(t, (ni - static_cast<double>(below_i)) / ni);
    out.frr_curve.emplace_back(t, static_cast<double>(below_g) / ng);
  }

  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const double far = out.far_curve[k].second;
    const double frr = out.frr_curve[k].second;
    if (frr < far) continue;
    if (frr == far || k == 0) {
      out.eer = far;
      out.threshold_at_eer = thresholds[k];
    } else {
      const double gap_prev = out.far_curve[k - 1].second - out.frr_curve[k - 1].second;
      const double gap_here = frr - far;
      const double alpha = gap_prev / (gap_prev + gap_here);
      const double far_prev = out.far_curve[k - 1].second;
      out.eer = far_prev + alpha * (far - far_prev);
      out.threshold_at_eer = thresholds[k - 1] + alpha * (thresholds[k] - thresholds[k - 1]);
    }
    break;
  }
  return out;
}

void write_scores_csv(std::ostream& out, std::span<const ScoreRecord> records) {
  out << "probe,gallery,genuine,score\n";
  for (const ScoreRecord& r : records) {
    out << r.probe_id << ',' << r.gallery_identity << ',' << (r.genuine ? 1 : 0) << ',' << r.score
        << '\n';
  }
}

}  // namespace veinmatch
