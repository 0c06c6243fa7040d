// Command-line entry points: gen, train, decode, eval, serve.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "corpus_io.hpp"
#include "deixis/config.hpp"
#include "deixis/error.hpp"
#include "deixis/generator.hpp"
#include "deixis/metrics.hpp"
#include "deixis/pipeline.hpp"
#include "deixis/training.hpp"
#include "gateway_server.hpp"

using namespace deixis;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;
constexpr int kExitUsage = 64;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::IoError: return kExitIo;
    case ErrorKind::ModelShapeError:
    case ErrorKind::IncompleteTopology: return kExitModel;
    default: return kExitData;
  }
}

EngineConfig load_config(const std::string& flag_path) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv("DEIXIS_CONFIG"); env && *env) path = env;
  }
  return path.empty() ? EngineConfig{} : EngineConfig::load(path);
}

std::shared_ptr<const Engine> make_engine(const EngineConfig& cfg, const std::string& model_path,
                                          const std::string& map_path) {
  auto model = load_model(model_path);
  auto map = MapContext::load(map_path);
  auto lexicon = cfg.lexicon_path ? Lexicon::load(*cfg.lexicon_path) : Lexicon::builtin();
  return std::make_shared<const Engine>(cfg, std::move(model), std::move(map), std::move(lexicon));
}

bool parse_switch(const std::string& v) { return v == "on"; }

json metrics_json(const Metrics& m, bool fusion, size_t sessions) {
  json confusion = json::object();
  for (size_t r = 0; r < kAllPhonemes.size(); ++r) {
    json row = json::object();
    for (size_t c = 0; c < kConfusionCols; ++c) {
      row[c < kAllPhonemes.size() ? std::string(to_string(kAllPhonemes[c])) : "none"] = m.confusion[r][c];
    }
    confusion[std::string(to_string(kAllPhonemes[r]))] = row;
  }
  return {{"sessions", sessions},
          {"fusion", fusion},
          {"segment_correct_rate", m.segment_correct_rate},
          {"deixis_accuracy", m.deixis_accuracy},
          {"command_accuracy", m.command_accuracy},
          {"counts",
           {{"truth_strokes", m.truth_strokes},
            {"correct_strokes", m.correct_strokes},
            {"deixis_total", m.deixis_total},
            {"deixis_correct", m.deixis_correct},
            {"commands_total", m.commands_total},
            {"commands_matched", m.commands_matched}}},
          {"confusion", confusion}};
}

void print_metrics(const Metrics& m, bool fusion, size_t sessions) {
  std::printf("sessions              %zu (fusion %s)\n", sessions, fusion ? "on" : "off");
  std::printf("segment correct rate  %.4f (%d/%d)\n", m.segment_correct_rate, m.correct_strokes, m.truth_strokes);
  std::printf("deixis accuracy       %.4f (%d/%d)\n", m.deixis_accuracy, m.deixis_correct, m.deixis_total);
  std::printf("command accuracy      %.4f (%d/%d)\n", m.command_accuracy, m.commands_matched, m.commands_total);
  std::printf("confusion (rows truth, columns decoded)\n%-12s", "");
  for (auto k : kAllPhonemes) std::printf("%12s", std::string(to_string(k)).c_str());
  std::printf("%12s\n", "none");
  for (size_t r = 0; r < kAllPhonemes.size(); ++r) {
    std::printf("%-12s", std::string(to_string(kAllPhonemes[r])).c_str());
    for (size_t c = 0; c < kConfusionCols; ++c) std::printf("%12d", m.confusion[r][c]);
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gesture and speech interpretation engine"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Engine config file (JSON); DEIXIS_CONFIG is used when absent");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic session corpus");
  std::string gen_map, gen_out;
  SyntheticConfig syn;
  gen->add_option("--map", gen_map, "Map file")->required();
  gen->add_option("--sessions", syn.n_sessions, "Number of sessions")->check(CLI::NonNegativeNumber);
  gen->add_option("--noise", syn.noise_sigma, "Positional noise sd (display widths)")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", syn.seed, "Generator seed");
  gen->add_option("--phrases", syn.phrases_per_session, "Gesture phrases per session")->check(CLI::PositiveNumber);
  gen->add_option("--drop", syn.drop_keyword_prob, "Probability a stroke gets no keywords")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--out", gen_out, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train phoneme HMMs on truth-labeled segments");
  std::string train_data, train_out;
  int train_iters = EngineConfig{}.train.max_iters;
  train->add_option("--data", train_data, "Corpus directory")->required();
  train->add_option("--out", train_out, "Model file to write")->required();
  train->add_option("--iters", train_iters, "Baum-Welch iterations")->check(CLI::PositiveNumber);

  // decode
  auto* decode = app.add_subcommand("decode", "Decode one session into phrase records");
  std::string dec_model, dec_map, dec_session, dec_out, dec_fusion = "on";
  decode->add_option("--model", dec_model, "Model file")->required();
  decode->add_option("--map", dec_map, "Map file")->required();
  decode->add_option("--session", dec_session, "Session file")->required();
  decode->add_option("--fusion", dec_fusion, "Speech/gesture co-occurrence rescoring")->check(CLI::IsMember({"on", "off"}));
  decode->add_option("--out", dec_out, "Output file (one JSON phrase record per line)")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Decode a corpus and score it against its truth");
  std::string ev_model, ev_map, ev_data, ev_fusion = "on", ev_json;
  int ev_workers = 1;
  eval->add_option("--model", ev_model, "Model file")->required();
  eval->add_option("--map", ev_map, "Map file")->required();
  eval->add_option("--data", ev_data, "Corpus directory")->required();
  eval->add_option("--fusion", ev_fusion, "Speech/gesture co-occurrence rescoring")->check(CLI::IsMember({"on", "off"}));
  eval->add_option("--json", ev_json, "Also write the metrics as JSON to this file");
  eval->add_option("--workers", ev_workers, "Decoding threads")->check(CLI::PositiveNumber);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the WebSocket gateway");
  std::string sv_model, sv_map, sv_address = "127.0.0.1";
  int sv_port = 8765;
  serve->add_option("--model", sv_model, "Model file")->required();
  serve->add_option("--map", sv_map, "Map file")->required();
  serve->add_option("--address", sv_address, "Listen address");
  serve->add_option("--port", sv_port, "Listen port (0 picks a free port)")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    EngineConfig cfg = load_config(config_path);

    if (*gen) {
      const auto map = MapContext::load(gen_map);
      std::vector<SessionRecord> records;
      for (auto& s : generate_synthetic(syn, map, gen_map)) records.push_back(std::move(s.record));
      tools::write_corpus(gen_out, records, {gen_map, syn.seed, syn.noise_sigma, {}});
      std::printf("wrote %zu sessions to %s\n", records.size(), gen_out.c_str());
      return kExitOk;
    }

    if (*train) {
      cfg.train.max_iters = train_iters;
      const auto sessions = tools::read_corpus(train_data);
      TrainingReport report;
      const auto model = train_models(sessions, cfg, &report);
      save_model(train_out, model);
      for (const auto& [kind, ll] : model.final_log_likelihood) {
        std::printf("%-12s final log-likelihood %.6f (%zu segments, %zu iterations)\n",
                    std::string(to_string(kind)).c_str(), ll, report.segment_counts[kind],
                    report.log_likelihoods[kind].size() - 1);
      }
      return kExitOk;
    }

    if (*decode) {
      cfg.fusion = parse_switch(dec_fusion);
      const auto engine = make_engine(cfg, dec_model, dec_map);
      const auto record = load_session(dec_session);
      const auto result = decode_session(engine, record);
      std::ofstream out(dec_out, std::ios::binary);
      if (!out) throw Error(ErrorKind::IoError, "cannot write '" + dec_out + "'");
      for (const auto& p : result.phrases) out << phrase_record_to_json(p) << '\n';
      if (!out) throw Error(ErrorKind::IoError, "write failed for '" + dec_out + "'");
      return kExitOk;
    }

    if (*eval) {
      cfg.fusion = parse_switch(ev_fusion);
      const auto engine = make_engine(cfg, ev_model, ev_map);
      const auto sessions = tools::read_corpus(ev_data);
      std::vector<DecodedSession> decoded(sessions.size());
      std::vector<std::exception_ptr> errors(static_cast<size_t>(ev_workers));
      std::vector<std::thread> pool;
      for (int w = 0; w < ev_workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (size_t i = static_cast<size_t>(w); i < sessions.size(); i += static_cast<size_t>(ev_workers)) {
              decoded[i] = decode_session(engine, sessions[i]).decoded;
            }
          } catch (...) {
            errors[static_cast<size_t>(w)] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      const auto m = evaluate(decoded, sessions, cfg.overlap_min);
      print_metrics(m, cfg.fusion, sessions.size());
      if (!ev_json.empty()) {
        std::ofstream out(ev_json, std::ios::binary);
        if (!out) throw Error(ErrorKind::IoError, "cannot write '" + ev_json + "'");
        out << metrics_json(m, cfg.fusion, sessions.size()).dump(2) << '\n';
      }
      return kExitOk;
    }

    if (*serve) {
      const auto engine = make_engine(cfg, sv_model, sv_map);
      return tools::run_gateway(engine, sv_address, static_cast<unsigned short>(sv_port));
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
