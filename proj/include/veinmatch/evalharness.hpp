#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "veinmatch/geomfilter.hpp"
#include "veinmatch/matchers.hpp"
#include "veinmatch/sift.hpp"

namespace veinmatch {

enum class Hand { kLeft, kRight };

const char* hand_name(Hand h);  // "l" / "r"
Hand parse_hand(const std::string& s);

// Left and right palms of one subject are distinct identities.
struct Identity {
  std::string subject;
  Hand hand = Hand::kLeft;

  std::string str() const;  // e.g. "001_l"
  friend auto operator<=>(const Identity&, const Identity&) = default;
};

struct ManifestEntry {
  std::filesystem::path path;
  std::string subject;
  Hand hand = Hand::kLeft;
  int sample = 0;

  Identity identity() const { return {subject, hand}; }
  std::string id() const;  // "<subject>_<hand>_<sample>"
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string parsing_rule;  // how entries were obtained (csv or pattern)

  // (subject, hand, sample) must be unique; optionally every path must
  // exist.
  void validate(bool check_files) const;
};

// CSV with header `path,subject,hand,sample`; relative paths resolve
// against the manifest's directory.
DatasetManifest read_manifest_csv(const std::filesystem::path& path, bool check_files = true);
void write_manifest_csv(const std::filesystem::path& path, const DatasetManifest& manifest);

// Regex over file names with capture groups for subject, hand and sample.
struct FilenamePattern {
  std::string regex = R"(^(\d{3})_([lLrR])_850_(\d{2})\.(jpg|png|pgm|bmp)$)";
  int subject_group = 1;
  int hand_group = 2;
  int sample_group = 3;
};
DatasetManifest manifest_from_directory(const std::filesystem::path& dir,
                                        const FilenamePattern& pattern = {});

struct ProtocolSplit {
  DatasetManifest dev;
  DatasetManifest eval;
};

// Identity-stratified split: round(dev_fraction * identities) identities,
// chosen by a seeded shuffle, go to the development partition.
ProtocolSplit build_protocol_split(const DatasetManifest& manifest, double dev_fraction,
                                   std::uint64_t seed);

struct Sample {
  Identity identity;
  int sample_index = 0;
  std::string id;
  FeatureSet features;
};

struct Template {
  Identity identity;
  std::vector<FeatureSet> members;
  std::vector<std::string> member_ids;
};

struct Enrollment {
  Template tmpl;
  std::vector<Sample> probes;
};

// The first template_size samples by sample index enrol; the rest probe.
Enrollment enroll(const Identity& identity, std::vector<Sample> samples, int template_size);

enum class MatcherKind { kClosestEd, kKnnRatio, kBidirectional };
enum class FilterKind { kNone, kMmd, kRansac };
enum class Aggregation { kMax, kSum, kMean };

struct ScoringPipeline {
  MatcherKind matcher = MatcherKind::kKnnRatio;
  double ratio = 0.7;
  std::optional<double> max_distance;
  FilterKind filter = FilterKind::kMmd;
  MmdParams mmd;
  RansacParams ransac;
  Aggregation aggregation = Aggregation::kMax;
};

MatchSet run_matcher(const FeatureSet& probe, const FeatureSet& gallery, const ScoringPipeline& p);

// Match pairs left after the configured filter (raw matches when no filter;
// 0 when MMD rejects the image).
std::size_t count_survivors(const FeatureSet& probe, const FeatureSet& member,
                            const ScoringPipeline& pipeline);

double score_probe(const FeatureSet& probe, const Template& tmpl, const ScoringPipeline& pipeline);

struct ScoreRecord {
  std::string probe_id;
  std::string gallery_identity;
  double score = 0.0;
  bool genuine = false;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

struct EvaluationConfig {
  int template_size = 1;
  ScoringPipeline pipeline;
  unsigned threads = 1;
};

// Closed-set 1:m scoring: every probe against every template except the
// opposite palm of its own subject. Output sorted by (probe, gallery).
std::vector<ScoreRecord> run_evaluation(std::vector<Sample> samples, const EvaluationConfig& config);

struct EerResult {
  double eer = 0.0;
  double threshold_at_eer = 0.0;
  std::vector<std::pair<double, double>> far_curve;  // (threshold, rate)
  std::vector<std::pair<double, double>> frr_curve;
  std::size_t genuine_count = 0;
  std::size_t impostor_count = 0;
};

// Sweeps the observed scores plus one sentinel above the maximum.
// FAR(t) = impostors with score >= t, FRR(t) = genuines with score < t.
// The EER is read at the first threshold where FRR >= FAR, interpolated
// linearly from the previous threshold when the curves cross in between.
EerResult compute_eer(std::span<const ScoreRecord> records);

void write_scores_csv(std::ostream& out, std::span<const ScoreRecord> records);

}  // namespace veinmatch
