#pragma once

#include <string>
#include <vector>

#include "pedp/actions.hpp"

namespace pedp {

// A validated corpus: all turns share one segment layout and vocabulary.
struct Corpus {
  StateLayout layout;
  ActionVocab vocab;
  // Names of the user-side action bits referenced by the "last_user" segment.
  std::vector<std::string> user_actions;
  std::vector<TurnSample> turns;

  int state_width() const { return layout.width(); }
  int action_count() const { return vocab.size(); }
};

// Sidecar path convention: "<stem>.schema.json" next to the corpus file.
std::string sidecar_path_for(const std::string& corpus_path);

// UTF-8 JSON-lines, one object per turn:
//   {"dialog_id": str, "turn_id": int, "state": [0/1,...],
//    "macro_action": ["dom-int-slot",...], "next_state": [0/1,...]}
// The sidecar declares the segment layout and the action list; the loader
// verifies the vocabulary digest and every state width. Errors carry the
// offending line number. An empty corpus file loads as an empty list (the
// loader emits a warning on stderr).
Corpus load_corpus(const std::string& path);

void save_corpus(const Corpus& corpus, const std::string& path);

// Sidecar-only helpers (the interactive evaluator needs layout + vocab
// without any turn data).
struct CorpusSchema {
  StateLayout layout;
  ActionVocab vocab;
  std::vector<std::string> user_actions;
};
CorpusSchema load_corpus_schema(const std::string& sidecar_path);
void save_corpus_schema(const CorpusSchema& schema, const std::string& sidecar_path);

}  // namespace pedp
