#include "pedp/corpus.hpp"

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

namespace pedp {

using json = nlohmann::ordered_json;

std::string sidecar_path_for(const std::string& corpus_path) {
  const std::string suffix = ".jsonl";
  if (corpus_path.size() > suffix.size() &&
      corpus_path.compare(corpus_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return corpus_path.substr(0, corpus_path.size() - suffix.size()) + ".schema.json";
  }
  return corpus_path + ".schema.json";
}

namespace {

json layout_to_json(const StateLayout& layout) {
  json segs = json::array();
  for (const auto& s : layout.segments) {
    segs.push_back({{"name", s.name}, {"offset", s.offset}, {"width", s.width}});
  }
  return segs;
}

StateLayout layout_from_json(const json& j) {
  StateLayout layout;
  for (const auto& seg : j) {
    layout.segments.push_back({seg.at("name").get<std::string>(), seg.at("offset").get<int>(),
                               seg.at("width").get<int>()});
  }
  layout.validate();
  return layout;
}

StateBits bits_from_json(const json& arr, int expected_width, int line_no, const char* field) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != expected_width) {
    throw ValidationError("line " + std::to_string(line_no) + ": \"" + field + "\" must be a 0/1 array of length " +
                          std::to_string(expected_width));
  }
  StateBits bits;
  bits.reserve(arr.size());
  for (const auto& v : arr) {
    int b = v.get<int>();
    if (b != 0 && b != 1) {
      throw ValidationError("line " + std::to_string(line_no) + ": \"" + field + "\" entries must be 0 or 1");
    }
    bits.push_back(static_cast<std::uint8_t>(b));
  }
  return bits;
}

}  // namespace

CorpusSchema load_corpus_schema(const std::string& sidecar_path) {
  std::ifstream in(sidecar_path);
  if (!in) throw IoError("cannot open schema sidecar \"" + sidecar_path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("schema sidecar \"" + sidecar_path + "\": " + e.what());
  }
  CorpusSchema schema;
  schema.layout = layout_from_json(j.at("layout"));
  schema.vocab = ActionVocab::from_names(j.at("actions").get<std::vector<std::string>>());
  if (j.contains("user_actions")) {
    schema.user_actions = j.at("user_actions").get<std::vector<std::string>>();
  }
  if (j.contains("vocab_digest")) {
    auto declared = j.at("vocab_digest").get<std::string>();
    if (declared != schema.vocab.digest()) {
      throw ValidationError("schema sidecar \"" + sidecar_path + "\" vocab digest mismatch: declared " +
                            declared + ", computed " + schema.vocab.digest());
    }
  }
  return schema;
}

void save_corpus_schema(const CorpusSchema& schema, const std::string& sidecar_path) {
  json j;
  j["format_version"] = 1;
  j["layout"] = layout_to_json(schema.layout);
  j["actions"] = schema.vocab.names();
  j["vocab_digest"] = schema.vocab.digest();
  j["user_actions"] = schema.user_actions;
  std::ofstream out(sidecar_path);
  if (!out) throw IoError("cannot write schema sidecar \"" + sidecar_path + "\"");
  out << j.dump(2) << "\n";
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus \"" + path + "\"");
  CorpusSchema schema = load_corpus_schema(sidecar_path_for(path));

  Corpus corpus;
  corpus.layout = schema.layout;
  corpus.vocab = schema.vocab;
  corpus.user_actions = schema.user_actions;

  const int S = corpus.layout.width();
  const int M = corpus.vocab.size();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("corpus \"" + path + "\" line " + std::to_string(line_no) + ": " + e.what());
    }
    TurnSample turn;
    try {
      turn.dialog_id = j.at("dialog_id").get<std::string>();
      turn.turn_id = j.at("turn_id").get<int>();
      turn.state = bits_from_json(j.at("state"), S, line_no, "state");
      turn.next_state = bits_from_json(j.at("next_state"), S, line_no, "next_state");
      std::vector<int> members;
      for (const auto& name : j.at("macro_action")) {
        int idx = corpus.vocab.index_of(name.get<std::string>());
        if (idx < 0) {
          throw ValidationError("line " + std::to_string(line_no) + ": action \"" +
                                name.get<std::string>() + "\" not in vocabulary (digest " +
                                corpus.vocab.digest() + ")");
        }
        members.push_back(idx);
      }
      turn.macro = MacroAction::from_indices(std::move(members));
      if (turn.macro.size() > M) {
        throw ValidationError("line " + std::to_string(line_no) + ": macro larger than vocabulary");
      }
    } catch (const json::exception& e) {
      throw ValidationError("corpus \"" + path + "\" line " + std::to_string(line_no) + ": " + e.what());
    }
    corpus.turns.push_back(std::move(turn));
  }
  if (corpus.turns.empty()) {
    std::cerr << "warning: corpus \"" << path << "\" contains no turns\n";
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  save_corpus_schema({corpus.layout, corpus.vocab, corpus.user_actions}, sidecar_path_for(path));
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus \"" + path + "\"");
  for (const auto& turn : corpus.turns) {
    json j;
    j["dialog_id"] = turn.dialog_id;
    j["turn_id"] = turn.turn_id;
    j["state"] = std::vector<int>(turn.state.begin(), turn.state.end());
    json names = json::array();
    for (int idx : turn.macro.members) names.push_back(corpus.vocab.at(idx).str());
    j["macro_action"] = names;
    j["next_state"] = std::vector<int>(turn.next_state.begin(), turn.next_state.end());
    out << j.dump() << "\n";
  }
}

}  // namespace pedp
