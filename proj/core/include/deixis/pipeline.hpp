#pragma once

#include <memory>
#include <string>
#include <vector>

#include "deixis/config.hpp"
#include "deixis/context.hpp"
#include "deixis/lexicon.hpp"
#include "deixis/metrics.hpp"
#include "deixis/protocol.hpp"
#include "deixis/session.hpp"

namespace deixis {

// Immutable bundle shared by every session: configuration, trained models,
// map, lexicon and the decoding network built from the model topology.
class Engine {
 public:
  // Throws ModelShapeError when a network phoneme lacks a model or a model's
  // dimension differs from the feature dimension.
  Engine(EngineConfig config, ModelFile model, MapContext map, Lexicon lexicon);

  const EngineConfig& config() const { return config_; }
  const ModelFile& model() const { return model_; }
  const MapContext& map() const { return map_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const MorphNetwork& network() const { return network_; }

 private:
  EngineConfig config_;
  ModelFile model_;
  MapContext map_;
  Lexicon lexicon_;
  MorphNetwork network_;
};

// Everything the pipeline concluded about one gesture phrase.
struct PhraseRecord {
  int id = 0;
  // Phrase tiling from preparation to retraction; ids are session-wide.
  std::vector<StrokeSegment> segments;
  std::vector<HoldSegment> holds;
  std::vector<LabeledStroke> strokes;
  std::vector<MotionComplex> complexes;
  CommandSet commands;
};

// Canonical single-line JSON (times and scores rounded to 6 decimals).
std::string phrase_record_to_json(const PhraseRecord& phrase);

// One committed decoding window: a network walk over frames [first, end).
struct CommittedWindow {
  long first_frame = 0;
  long end_frame = 0;
  std::vector<StrokeSegment> segments;
};

// Streaming interpreter for one client. Samples are resampled onto the rate
// grid as they arrive; every `stride_frames` frames the uncommitted window is
// decoded provisionally (cursor feedback, commit detection). A phrase is
// committed once the provisional best path ends in enough Rest: the window up
// to a cut inside that Rest is decoded with N-best, rescored, labeled and
// parsed, and its strokes, deixis labels and commands are emitted. Committed
// output is never revised.
class LiveSession {
 public:
  explicit LiveSession(std::shared_ptr<const Engine> engine);

  std::vector<ServerMessage> handle(const ClientMessage& msg);
  std::vector<ServerMessage> push_sample(const TrajectorySample& sample);
  std::vector<ServerMessage> push_token(const TimedWord& word);
  // Commits all buffered data.
  std::vector<ServerMessage> flush();
  void reset();

  const std::vector<PhraseRecord>& phrases() const { return phrases_; }
  const std::vector<CommittedWindow>& windows() const { return windows_; }
  // Time up to which output is final.
  double committed_until() const { return committed_until_; }
  bool cursor_point() const { return cursor_point_; }

  // Committed tiling with deixis labels and command signatures.
  DecodedSession decoded(const std::string& id) const;

 private:
  void on_new_frame(std::vector<ServerMessage>& out);
  void provisional(std::vector<ServerMessage>& out);
  void commit(long cut_frame, std::vector<ServerMessage>& out);
  double frame_time(long k) const;
  std::vector<FeatureVector> window_features(long first, long end) const;

  std::shared_ptr<const Engine> engine_;
  IncrementalResampler resampler_;
  std::vector<TrajectorySample> grid_;
  std::vector<KeywordToken> pending_;
  double last_token_end_ = -1e300;
  long start_frame_ = 0;
  int since_stride_ = 0;
  double committed_until_ = -1e300;
  bool cursor_point_ = false;
  int next_segment_id_ = 0;
  int next_phrase_id_ = 0;
  std::vector<PhraseRecord> phrases_;
  std::vector<CommittedWindow> windows_;
};

struct BatchResult {
  std::vector<PhraseRecord> phrases;
  std::vector<CommittedWindow> windows;
  DecodedSession decoded;
  std::vector<ServerMessage> messages;
};

// Replays the record through a LiveSession (tokens delivered at their end
// time, samples first on ties) and flushes.
BatchResult decode_session(std::shared_ptr<const Engine> engine, const SessionRecord& record);

// Time-ordered client events for a record, as decode_session feeds them.
std::vector<ClientMessage> replay_events(const SessionRecord& record);

}  // namespace deixis
