#pragma once

#include <string>
#include <vector>

#include "deixis/generator.hpp"
#include "deixis/session.hpp"

namespace deixis::tools {

struct CorpusManifest {
  std::string map;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::vector<std::string> files;
};

// Writes one session file per record plus manifest.json into `dir`
// (created when missing).
void write_corpus(const std::string& dir, const std::vector<SessionRecord>& sessions, const CorpusManifest& meta);

// Sessions listed in dir/manifest.json, or every *.ndjson file in name order
// when there is no manifest.
std::vector<SessionRecord> read_corpus(const std::string& dir);

}  // namespace deixis::tools
