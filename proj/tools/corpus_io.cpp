#include "corpus_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deixis/error.hpp"

namespace deixis::tools {

namespace fs = std::filesystem;
using nlohmann::json;

void write_corpus(const std::string& dir, const std::vector<SessionRecord>& sessions, const CorpusManifest& meta) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::IoError, "cannot create output directory '" + dir + "'");
  json files = json::array();
  for (const auto& s : sessions) {
    const std::string name = s.id + ".ndjson";
    save_session((fs::path(dir) / name).string(), s);
    files.push_back(name);
  }
  json m = {{"map", meta.map}, {"seed", meta.seed}, {"noise_sigma", meta.noise_sigma}, {"sessions", files}};
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write manifest in '" + dir + "'");
  out << m.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for manifest in '" + dir + "'");
}

std::vector<SessionRecord> read_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, "no such data directory '" + dir + "'");
  std::vector<std::string> files;
  const auto manifest = fs::path(dir) / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    if (!in) throw Error(ErrorKind::IoError, "cannot read '" + manifest.string() + "'");
    try {
      const json m = json::parse(in);
      for (const auto& f : m.at("sessions")) files.push_back((fs::path(dir) / f.get<std::string>()).string());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, "manifest: " + std::string(e.what()));
    }
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".ndjson") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
  }
  std::vector<SessionRecord> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_session(f));
  return out;
}

}  // namespace deixis::tools
