#include "pedp/actions.hpp"

#include <algorithm>
#include <set>

#include "pedp/digest.hpp"

namespace pedp {

AtomicAction parse_action(const std::string& text) {
  auto first = text.find('-');
  auto second = first == std::string::npos ? std::string::npos : text.find('-', first + 1);
  auto third = second == std::string::npos ? std::string::npos : text.find('-', second + 1);
  if (first == std::string::npos || second == std::string::npos || third != std::string::npos) {
    throw ParseError("malformed action \"" + text + "\": expected domain-intent-slot");
  }
  AtomicAction a;
  a.domain = text.substr(0, first);
  a.intent = text.substr(first + 1, second - first - 1);
  a.slot = text.substr(second + 1);
  if (a.domain.empty() || a.intent.empty() || a.slot.empty()) {
    throw ParseError("malformed action \"" + text + "\": empty part");
  }
  return a;
}

std::string format_action(const AtomicAction& a) { return a.str(); }

ActionVocab ActionVocab::from_names(std::vector<std::string> names) {
  std::vector<AtomicAction> actions;
  actions.reserve(names.size());
  for (const auto& n : names) actions.push_back(parse_action(n));
  return from_actions(std::move(actions));
}

ActionVocab ActionVocab::from_actions(std::vector<AtomicAction> actions) {
  std::sort(actions.begin(), actions.end());
  actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
  ActionVocab v;
  v.actions_ = std::move(actions);
  for (int i = 0; i < static_cast<int>(v.actions_.size()); ++i) {
    v.actions_[i].index = i;
    v.by_name_[v.actions_[i].str()] = i;
  }
  return v;
}

const AtomicAction& ActionVocab::at(int index) const {
  if (index < 0 || index >= size()) {
    throw ValidationError("action index " + std::to_string(index) + " outside [0, " +
                          std::to_string(size()) + ")");
  }
  return actions_[static_cast<size_t>(index)];
}

int ActionVocab::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

std::vector<std::string> ActionVocab::names() const {
  std::vector<std::string> out;
  out.reserve(actions_.size());
  for (const auto& a : actions_) out.push_back(a.str());
  return out;
}

std::string ActionVocab::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& a : actions_) {
    std::string s = a.str();
    h = fnv1a(h, s.data(), s.size());
    h = fnv1a(h, "\n", 1);
  }
  return to_hex(h);
}

MacroAction MacroAction::from_indices(std::vector<int> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return MacroAction{std::move(indices)};
}

bool MacroAction::contains(int index) const {
  return std::binary_search(members.begin(), members.end(), index);
}

Eigen::VectorXd encode_macro(const MacroAction& macro, int action_count) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(action_count);
  for (int idx : macro.members) {
    if (idx < 0 || idx >= action_count) {
      throw ValidationError("macro member " + std::to_string(idx) + " outside [0, " +
                            std::to_string(action_count) + ")");
    }
    v[idx] = 1.0;
  }
  return v;
}

MacroAction decode_macro(const Eigen::VectorXd& bits) {
  std::vector<int> members;
  for (int i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0.0) members.push_back(i);
  }
  return MacroAction{std::move(members)};
}

std::vector<int> decompose_macro(const MacroAction& macro) {
  if (macro.empty()) {
    throw ValidationError("cannot decompose an empty macro-action");
  }
  return macro.members;  // already sorted by vocabulary index
}

int StateLayout::width() const {
  int w = 0;
  for (const auto& s : segments) w += s.width;
  return w;
}

const StateLayout::Segment& StateLayout::segment(const std::string& name) const {
  for (const auto& s : segments) {
    if (s.name == name) return s;
  }
  throw ValidationError("unknown state segment \"" + name + "\"");
}

bool StateLayout::has_segment(const std::string& name) const {
  for (const auto& s : segments) {
    if (s.name == name) return true;
  }
  return false;
}

void StateLayout::validate() const {
  int expected_offset = 0;
  std::set<std::string> names;
  for (const auto& s : segments) {
    if (s.width <= 0) throw ValidationError("segment \"" + s.name + "\" has non-positive width");
    if (s.offset != expected_offset) {
      throw ValidationError("segment \"" + s.name + "\" offset " + std::to_string(s.offset) +
                            " leaves a gap or overlap (expected " +
                            std::to_string(expected_offset) + ")");
    }
    if (!names.insert(s.name).second) {
      throw ValidationError("duplicate segment name \"" + s.name + "\"");
    }
    expected_offset += s.width;
  }
}

Eigen::VectorXd to_vector(const StateBits& bits) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(bits.size()));
  for (size_t i = 0; i < bits.size(); ++i) v[static_cast<Eigen::Index>(i)] = bits[i] ? 1.0 : 0.0;
  return v;
}

StateBits to_bits(const Eigen::VectorXd& v) {
  StateBits bits(static_cast<size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) bits[static_cast<size_t>(i)] = v[i] != 0.0 ? 1 : 0;
  return bits;
}

ActionVocab build_vocab(const std::vector<RawTurn>& corpus) {
  if (corpus.empty()) throw ValidationError("cannot build a vocabulary from an empty corpus");
  std::set<std::string> names;
  for (const auto& turn : corpus) {
    for (const auto& name : turn.macro_names) names.insert(name);
  }
  return ActionVocab::from_names({names.begin(), names.end()});
}

}  // namespace pedp
