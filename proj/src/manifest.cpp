#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "veinmatch/error.hpp"
#include "veinmatch/evalharness.hpp"

namespace veinmatch {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorKind::kConfig, "invalid " + what + " '" + s + "'");
  }
}

}  // namespace

const char* hand_name(Hand h) { return h == Hand::kLeft ? "l" : "r"; }

Hand parse_hand(const std::string& s) {
  std::string v = s;
  for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "l" || v == "left") return Hand::kLeft;
  if (v == "r" || v == "right") return Hand::kRight;
  Fail(ErrorKind::kConfig, "unknown hand '" + s + "'");
}

std::string Identity::str() const { return subject + "_" + hand_name(hand); }

std::string ManifestEntry::id() const {
  return subject + "_" + hand_name(hand) + "_" + std::to_string(sample);
}

void DatasetManifest::validate(bool check_files) const {
  std::set<std::tuple<std::string, Hand, int>> seen;
  for (const ManifestEntry& e : entries) {
    if (!seen.emplace(e.subject, e.hand, e.sample).second) {
      Fail(ErrorKind::kProtocol, "duplicate manifest entry " + e.id());
    }
    if (check_files) {
      std::ifstream probe(e.path, std::ios::binary);
      if (!probe) Fail(ErrorKind::kIo, "manifest path not readable: " + e.path.string());
    }
  }
}

DatasetManifest read_manifest_csv(const std::filesystem::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorKind::kConfig, "empty manifest " + path.string());
  const std::vector<std::string> header = split_csv_line(line);
  const std::vector<std::string> expected = {"path", "subject", "hand", "sample"};
  if (header != expected) {
    Fail(ErrorKind::kConfig, "manifest header must be 'path,subject,hand,sample'");
  }
  DatasetManifest m;
  m.parsing_rule = "csv:" + path.filename().string();
  const std::filesystem::path base = path.parent_path();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 4) {
      Fail(ErrorKind::kConfig, "manifest line " + std::to_string(line_no) + " needs 4 fields");
    }
    ManifestEntry e;
    e.path = std::filesystem::path(f[0]);
    if (e.path.is_relative()) e.path = base / e.path;
    e.subject = f[1];
    e.hand = parse_hand(f[2]);
    e.sample = parse_int(f[3], "sample index");
    m.entries.push_back(std::move(e));
  }
  m.validate(check_files);
  return m;
}

void write_manifest_csv(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  const std::filesystem::path base = path.parent_path();
  out << "path,subject,hand,sample\n";
  for (const ManifestEntry& e : manifest.entries) {
    std::filesystem::path p = e.path;
    if (!base.empty() && p.is_absolute()) p = p.lexically_relative(base);
    out << p.generic_string() << ',' << e.subject << ',' << hand_name(e.hand) << ',' << e.sample
        << '\n';
  }
}

DatasetManifest manifest_from_directory(const std::filesystem::path& dir,
                                        const FilenamePattern& pattern) {
  std::regex re;
  try {
    re = std::regex(pattern.regex);
  } catch (const std::regex_error& e) {
    Fail(ErrorKind::kConfig, std::string("bad filename pattern: ") + e.what());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  DatasetManifest m;
  m.parsing_rule = "pattern:" + pattern.regex;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    std::smatch match;
    if (!std::regex_match(name, match, re)) continue;
    ManifestEntry e;
    e.path = f;
    e.subject = match[pattern.subject_group].str();
    e.hand = parse_hand(match[pattern.hand_group].str());
    e.sample = parse_int(match[pattern.sample_group].str(), "sample index");
    m.entries.push_back(std::move(e));
  }
  m.validate(false);
  return m;
}

}  // namespace veinmatch
