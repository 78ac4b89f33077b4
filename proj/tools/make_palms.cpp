// Writes a synthetic palm dataset (PNG images plus manifest.csv) for
// end-to-end runs of the toolkit without the licensed dataset.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "veinmatch/error.hpp"
#include "veinmatch/evalharness.hpp"
#include "veinmatch/image_io.hpp"
#include "veinmatch/synthbench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic palm dataset generator", "make_palms"};
  std::string out_dir;
  int subjects = 8;
  int samples = 6;
  bool both_hands = false;
  bool annotations = false;
  std::uint64_t seed = 1;
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--subjects", subjects, "Number of subjects")->check(CLI::Range(1, 999));
  app.add_option("--samples", samples, "Samples per palm")->check(CLI::Range(1, 99));
  app.add_flag("--both-hands", both_hands, "Render left and right palms per subject");
  app.add_flag("--annotations", annotations, "Write ground-truth valley sidecars");
  app.add_option("--seed", seed, "Dataset seed");
  CLI11_PARSE(app, argc, argv);

  try {
    namespace fs = std::filesystem;
    using namespace veinmatch;
    fs::create_directories(out_dir);
    DatasetManifest manifest;
    for (int s = 1; s <= subjects; ++s) {
      for (int h = 0; h < (both_hands ? 2 : 1); ++h) {
        const Hand hand = h == 0 ? Hand::kLeft : Hand::kRight;
        const std::uint64_t identity_seed = seed * 1000003ULL + static_cast<std::uint64_t>(s) * 2 + h;
        for (int k = 1; k <= samples; ++k) {
          const SyntheticPalm palm = render_palm(identity_seed, k, hand == Hand::kRight);
          char name[64];
          std::snprintf(name, sizeof(name), "%03d_%s_850_%02d", s, hand_name(hand), k);
          const fs::path image = fs::path(out_dir) / (std::string(name) + ".png");
          write_image(image, palm.image);
          if (annotations) write_valley_annotation(fs::path(out_dir) / (std::string(name) + ".valleys.json"), palm.valleys);
          char subject[16];
          std::snprintf(subject, sizeof(subject), "%03d", s);
          manifest.entries.push_back({image, subject, hand, k});
        }
      }
    }
    write_manifest_csv(fs::path(out_dir) / "manifest.csv", manifest);
    std::cout << manifest.entries.size() << " images written to " << out_dir << '\n';
  } catch (const veinmatch::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
