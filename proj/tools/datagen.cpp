// Generates the synthetic source/target TSV corpora used by the tests and
// the CLI examples. The target table perturbs a fraction of the source rows
// (word drops, swaps, typos) so joins find realistic near-duplicates.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "linkrt/rng.hpp"

namespace {

const std::vector<std::string> kWords = {
    "amber",   "anchor",  "basin",   "beacon",  "birch",   "border",  "breeze",  "bridge",
    "canyon",  "carbon",  "cedar",   "circle",  "cloud",   "copper",  "coral",   "crystal",
    "delta",   "drift",   "ember",   "fable",   "falcon",  "fern",    "flint",   "forest",
    "garnet",  "glacier", "granite", "grove",   "harbor",  "hazel",   "heron",   "hollow",
    "island",  "ivory",   "jasper",  "juniper", "kestrel", "lagoon",  "lantern", "ledge",
    "linden",  "marble",  "meadow",  "mesa",    "mirror",  "morning", "moss",    "north",
    "oak",     "ocean",   "opal",    "orchard", "osprey",  "pebble",  "pine",    "plateau",
    "prairie", "quartz",  "raven",   "reed",    "ridge",   "river",   "salt",    "shadow",
    "shore",   "silver",  "slate",   "spruce",  "stone",   "summit",  "thicket", "thunder",
    "timber",  "trail",   "tundra",  "valley",  "violet",  "walnut",  "willow",  "winter"};

std::string random_phrase(linkrt::Rng& rng, std::size_t min_words, std::size_t max_words) {
  const std::size_t n = min_words + linkrt::uniform_u64(rng, max_words - min_words + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kWords[linkrt::uniform_u64(rng, kWords.size())];
  }
  return out;
}

std::string perturb(linkrt::Rng& rng, const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      words.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  words.push_back(cur);
  switch (linkrt::uniform_u64(rng, 4)) {
    case 0:  // drop a word
      if (words.size() > 1) words.erase(words.begin() + long(linkrt::uniform_u64(rng, words.size())));
      break;
    case 1:  // replace a word
      words[linkrt::uniform_u64(rng, words.size())] = kWords[linkrt::uniform_u64(rng, kWords.size())];
      break;
    case 2: {  // typo inside a word
      std::string& w = words[linkrt::uniform_u64(rng, words.size())];
      w[linkrt::uniform_u64(rng, w.size())] = char('a' + linkrt::uniform_u64(rng, 26));
      break;
    }
    case 3:  // append a word
      words.push_back(kWords[linkrt::uniform_u64(rng, kWords.size())]);
      break;
  }
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

struct Row {
  std::string title;
  std::string description;
};

void write_table(const std::string& path, const char* id_prefix, const std::vector<Row>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "id\ttitle\tdescription\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << id_prefix << i << "\t" << rows[i].title << "\t" << rows[i].description << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic TSV corpus generator"};
  std::string out_dir = "data";
  std::size_t rows = 1000;
  std::uint64_t seed = 42;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--rows", rows, "Resources per table")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    linkrt::Rng rng(seed);
    std::vector<Row> source(rows), target(rows);
    for (auto& r : source) {
      r.title = random_phrase(rng, 2, 5);
      r.description = random_phrase(rng, 6, 14);
    }
    for (std::size_t i = 0; i < rows; ++i) {
      // 60% near-duplicates of the same source row, the rest fresh.
      if (linkrt::uniform_u64(rng, 10) < 6) {
        target[i].title = perturb(rng, source[i].title);
        target[i].description = perturb(rng, source[i].description);
      } else {
        target[i].title = random_phrase(rng, 2, 5);
        target[i].description = random_phrase(rng, 6, 14);
      }
    }
    write_table(out_dir + "/synth_source.tsv", "s", source);
    write_table(out_dir + "/synth_target.tsv", "t", target);
    std::cout << "wrote " << rows << " + " << rows << " resources to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
