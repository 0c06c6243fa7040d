#include "deixis/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "deixis/error.hpp"

namespace deixis {

using nlohmann::json;

namespace {

PhonemeKind phoneme_named(const std::string& name) {
  const auto k = phoneme_from_string(name);
  if (!k) throw Error(ErrorKind::ParseError, "config: unknown phoneme '" + name + "'");
  return *k;
}

// Applies the members of `j` through `fields`; keys not in `fields` are
// errors so typos surface instead of silently keeping defaults.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorKind::ParseError, "config: '" + path_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw Error(ErrorKind::ParseError, "config: unknown key '" + path_ + key + "'");
    }
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, "config: '" + path_ + key + "': " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string prefix(const char* key) const { return path_ + key + "."; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void apply_overrides(EngineConfig& c, const json& root) {
  Section s(root, "");
  s.get("rate_hz", c.rate_hz);
  s.get("rest_calibration", c.rest_calibration);
  s.get("nbest", c.nbest);
  s.get("fusion_enabled", c.fusion);
  s.get("overlap_min", c.overlap_min);
  s.get("min_stroke", c.min_stroke);
  s.get("merge_continuous", c.merge_continuous);
  if (const json* j = s.child("holds")) {
    Section h(*j, s.prefix("holds"));
    h.get("v_hold", c.holds.v_hold);
    h.get("min_dwell", c.holds.min_dwell);
    h.get("gap_max", c.holds.gap_max);
  }
  if (const json* j = s.child("topology")) {
    if (!j->is_object()) throw Error(ErrorKind::ParseError, "config: 'topology' must be an object");
    for (const auto& [name, n] : j->items()) c.topology[phoneme_named(name)] = n.get<int>();
  }
  if (const json* j = s.child("penalties")) {
    Section p(*j, s.prefix("penalties"));
    p.get("uniform", c.penalties.uniform);
    if (const json* ov = p.child("overrides")) {
      c.penalties.overrides.clear();
      for (const auto& e : *ov) {
        c.penalties.overrides[{phoneme_named(e.at("from").get<std::string>()),
                               phoneme_named(e.at("to").get<std::string>())}] = e.at("log_penalty").get<double>();
      }
    }
  }
  if (const json* j = s.child("closure")) {
    Section cl(*j, s.prefix("closure"));
    cl.get("eps_close", c.closure.eps_close);
    cl.get("theta_turn", c.closure.theta_turn);
  }
  if (const json* j = s.child("fusion")) {
    Section f(*j, s.prefix("fusion"));
    f.get("holds_bonus", c.cooccurrence.holds_bonus);
    std::string credit = c.cooccurrence.credit == BonusCredit::Token ? "token" : "stroke";
    f.get("credit", credit);
    if (credit == "stroke") c.cooccurrence.credit = BonusCredit::Stroke;
    else if (credit == "token") c.cooccurrence.credit = BonusCredit::Token;
    else throw Error(ErrorKind::ParseError, "config: 'fusion.credit' must be \"stroke\" or \"token\"");
    if (const json* w = f.child("window")) {
      Section ws(*w, f.prefix("window"));
      ws.get("pre", c.cooccurrence.window.pre);
      ws.get("post", c.cooccurrence.window.post);
    }
    // A given table replaces the defaults entirely.
    if (const json* a = f.child("affinity")) {
      if (!a->is_object()) throw Error(ErrorKind::ParseError, "config: 'fusion.affinity' must be an object");
      c.cooccurrence.affinity.clear();
      for (const auto& [ph, row] : a->items()) {
        for (const auto& [cls, v] : row.items()) {
          const auto kc = keyword_class_from_string(cls);
          if (!kc) throw Error(ErrorKind::ParseError, "config: unknown keyword class '" + cls + "'");
          c.cooccurrence.affinity[{phoneme_named(ph), *kc}] = v.get<double>();
        }
      }
    }
  }
  if (const json* j = s.child("semantics")) {
    Section se(*j, s.prefix("semantics"));
    se.get("point_radius", c.semantics.point_radius);
    se.get("path_buffer", c.semantics.path_buffer);
    se.get("iconic_buffer", c.semantics.iconic_buffer);
    se.get("iconic_threshold", c.semantics.iconic_threshold);
    se.get("sync_tol", c.semantics.sync_tol);
    se.get("clause_gap", c.semantics.clause_gap);
    se.get("demotion_penalty", c.semantics.demotion_penalty);
    se.get("no_evidence_confidence", c.semantics.no_evidence_confidence);
  }
  if (const json* j = s.child("train")) {
    Section t(*j, s.prefix("train"));
    t.get("max_iters", c.train.max_iters);
    t.get("tol", c.train.tol);
    t.get("var_floor", c.train.var_floor);
  }
  if (const json* j = s.child("live")) {
    Section l(*j, s.prefix("live"));
    l.get("stride_frames", c.live.stride_frames);
    l.get("commit_rest", c.live.commit_rest);
    l.get("rest_keep", c.live.rest_keep);
    l.get("horizon", c.live.horizon);
  }
  if (const json* j = s.child("lexicon")) {
    if (j->is_null()) c.lexicon_path.reset();
    else c.lexicon_path = j->get<std::string>();
  }
}

void validate(const EngineConfig& c) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, std::string("config: ") + what);
  };
  need(c.rate_hz > 0.0, "rate_hz must be positive");
  need(c.rest_calibration > 0.0, "rest_calibration must be positive");
  need(c.min_stroke >= 0.0, "min_stroke must not be negative");
  need(c.nbest >= 1, "nbest must be at least 1");
  need(c.overlap_min > 0.0 && c.overlap_min <= 1.0, "overlap_min must lie in (0, 1]");
  need(c.live.stride_frames >= 1, "live.stride_frames must be at least 1");
  need(c.live.horizon > c.live.commit_rest, "live.horizon must exceed live.commit_rest");
  need(c.live.rest_keep >= 0.0 && c.live.rest_keep < c.live.commit_rest, "live.rest_keep must lie in [0, commit_rest)");
  for (const auto& [k, n] : c.topology) need(n >= 1, "topology state counts must be positive");
}

}  // namespace

void EngineConfig::merge_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  EngineConfig next = *this;
  try {
    apply_overrides(next, j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  validate(next);
  *this = std::move(next);
}

EngineConfig EngineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  EngineConfig c;
  c.merge_json_text(buf.str());
  return c;
}

std::string EngineConfig::to_json_text() const {
  json j;
  j["rate_hz"] = rate_hz;
  j["rest_calibration"] = rest_calibration;
  j["nbest"] = nbest;
  j["fusion_enabled"] = fusion;
  j["overlap_min"] = overlap_min;
  j["min_stroke"] = min_stroke;
  j["merge_continuous"] = merge_continuous;
  j["holds"] = {{"v_hold", holds.v_hold}, {"min_dwell", holds.min_dwell}, {"gap_max", holds.gap_max}};
  j["topology"] = json::object();
  for (const auto& [k, n] : topology) j["topology"][std::string(to_string(k))] = n;
  json ov = json::array();
  for (const auto& [edge, v] : penalties.overrides) {
    ov.push_back({{"from", to_string(edge.first)}, {"to", to_string(edge.second)}, {"log_penalty", v}});
  }
  j["penalties"] = {{"uniform", penalties.uniform}, {"overrides", ov}};
  j["closure"] = {{"eps_close", closure.eps_close}, {"theta_turn", closure.theta_turn}};
  json aff = json::object();
  for (const auto& [key, v] : cooccurrence.affinity) aff[std::string(to_string(key.first))][std::string(to_string(key.second))] = v;
  j["fusion"] = {{"holds_bonus", cooccurrence.holds_bonus},
                 {"credit", cooccurrence.credit == BonusCredit::Token ? "token" : "stroke"},
                 {"window", {{"pre", cooccurrence.window.pre}, {"post", cooccurrence.window.post}}},
                 {"affinity", aff}};
  j["semantics"] = {{"point_radius", semantics.point_radius},
                    {"path_buffer", semantics.path_buffer},
                    {"iconic_buffer", semantics.iconic_buffer},
                    {"iconic_threshold", semantics.iconic_threshold},
                    {"sync_tol", semantics.sync_tol},
                    {"clause_gap", semantics.clause_gap},
                    {"demotion_penalty", semantics.demotion_penalty},
                    {"no_evidence_confidence", semantics.no_evidence_confidence}};
  j["train"] = {{"max_iters", train.max_iters}, {"tol", train.tol}, {"var_floor", train.var_floor}};
  j["live"] = {{"stride_frames", live.stride_frames},
               {"commit_rest", live.commit_rest},
               {"rest_keep", live.rest_keep},
               {"horizon", live.horizon}};
  j["lexicon"] = lexicon_path ? json(*lexicon_path) : json(nullptr);
  return j.dump(2);
}

namespace {

json log_value(double v) { return v == kLogZero ? json(nullptr) : json(v); }
double log_from(const json& j) { return j.is_null() ? kLogZero : j.get<double>(); }

}  // namespace

std::string model_to_json_text(const ModelFile& model) {
  json j;
  j["format"] = "deixis-model/1";
  j["topology"] = json::object();
  for (const auto& [k, n] : model.topology) j["topology"][std::string(to_string(k))] = n;
  j["models"] = json::object();
  for (const auto& [k, hmm] : model.models) {
    json m;
    m["log_init"] = json::array();
    for (double v : hmm.log_init) m["log_init"].push_back(log_value(v));
    m["log_trans"] = json::array();
    for (const auto& row : hmm.log_trans) {
      json r = json::array();
      for (double v : row) r.push_back(log_value(v));
      m["log_trans"].push_back(r);
    }
    m["emissions"] = json::array();
    for (const auto& e : hmm.emissions) m["emissions"].push_back({{"mean", e.mean}, {"var", e.var}});
    j["models"][std::string(to_string(k))] = m;
  }
  j["final_log_likelihood"] = json::object();
  for (const auto& [k, v] : model.final_log_likelihood) {
    j["final_log_likelihood"][std::string(to_string(k))] = log_value(v);
  }
  return j.dump(1) + "\n";
}

ModelFile model_from_json_text(std::string_view text) {
  ModelFile out;
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != "deixis-model/1") {
      throw Error(ErrorKind::ModelShapeError, "not a deixis model file");
    }
    for (const auto& [name, n] : j.at("topology").items()) out.topology[phoneme_named(name)] = n.get<int>();
    for (const auto& [name, m] : j.at("models").items()) {
      Hmm hmm;
      for (const auto& v : m.at("log_init")) hmm.log_init.push_back(log_from(v));
      for (const auto& row : m.at("log_trans")) {
        std::vector<double> r;
        for (const auto& v : row) r.push_back(log_from(v));
        hmm.log_trans.push_back(std::move(r));
      }
      for (const auto& e : m.at("emissions")) {
        hmm.emissions.push_back({e.at("mean").get<std::vector<double>>(), e.at("var").get<std::vector<double>>()});
      }
      if (hmm.log_trans.size() != hmm.n_states() || hmm.emissions.size() != hmm.n_states()) {
        throw Error(ErrorKind::ModelShapeError, "model '" + name + "' has inconsistent state counts");
      }
      out.models[phoneme_named(name)] = std::move(hmm);
    }
    if (j.contains("final_log_likelihood")) {
      for (const auto& [name, v] : j["final_log_likelihood"].items()) {
        out.final_log_likelihood[phoneme_named(name)] = log_from(v);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ModelShapeError, std::string("model file: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw Error(ErrorKind::ModelShapeError, e.what());
    throw;
  }
  return out;
}

void save_model(const std::string& path, const ModelFile& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write model file '" + path + "'");
  out << model_to_json_text(model);
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json_text(buf.str());
}

}  // namespace deixis
