#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pedp/errors.hpp"

namespace pedp {

// One domain-intent-slot triple, e.g. "hotel-inform-area".
struct AtomicAction {
  std::string domain;
  std::string intent;
  std::string slot;
  int index = -1;  // position in the owning ActionVocab, -1 if unattached

  std::string str() const { return domain + "-" + intent + "-" + slot; }

  friend bool operator==(const AtomicAction& a, const AtomicAction& b) {
    return a.domain == b.domain && a.intent == b.intent && a.slot == b.slot;
  }
  friend bool operator<(const AtomicAction& a, const AtomicAction& b) {
    if (a.domain != b.domain) return a.domain < b.domain;
    if (a.intent != b.intent) return a.intent < b.intent;
    return a.slot < b.slot;
  }
};

// Splits "domain-intent-slot" into its parts. Exactly two dashes; all parts
// nonempty. Throws ParseError naming the offending string.
AtomicAction parse_action(const std::string& text);
std::string format_action(const AtomicAction& a);

// Ordered action space. Indices equal list positions; ordering is
// lexicographic by (domain, intent, slot).
class ActionVocab {
public:
  ActionVocab() = default;

  // Sorts and deduplicates; assigns indices.
  static ActionVocab from_names(std::vector<std::string> names);
  static ActionVocab from_actions(std::vector<AtomicAction> actions);

  int size() const { return static_cast<int>(actions_.size()); }
  const AtomicAction& at(int index) const;
  // -1 when absent.
  int index_of(const std::string& name) const;
  const std::vector<AtomicAction>& actions() const { return actions_; }
  std::vector<std::string> names() const;

  // Stable FNV-1a digest over the ordered action strings, hex encoded.
  std::string digest() const;

private:
  std::vector<AtomicAction> actions_;
  std::unordered_map<std::string, int> by_name_;
};

// A set of atomic action indices; interchangeably a binary vector of length M.
struct MacroAction {
  std::vector<int> members;  // sorted, unique

  static MacroAction from_indices(std::vector<int> indices);

  bool empty() const { return members.empty(); }
  int size() const { return static_cast<int>(members.size()); }
  bool contains(int index) const;

  friend bool operator==(const MacroAction& a, const MacroAction& b) {
    return a.members == b.members;
  }
};

// Vector view of a macro-action: out[i] = 1 iff i is a member.
// Throws ValidationError on indices outside [0, M).
Eigen::VectorXd encode_macro(const MacroAction& macro, int action_count);
MacroAction decode_macro(const Eigen::VectorXd& bits);

// Canonical single-action fragment for one multi-action turn: the members
// sorted by vocabulary index. Throws ValidationError on an empty macro.
std::vector<int> decompose_macro(const MacroAction& macro);

// Named spans over the structured dialog-state bit vector.
struct StateLayout {
  struct Segment {
    std::string name;
    int offset = 0;
    int width = 0;
  };

  std::vector<Segment> segments;

  int width() const;
  const Segment& segment(const std::string& name) const;
  bool has_segment(const std::string& name) const;
  // Segments must be disjoint and cover [0, S).
  void validate() const;
};

using StateBits = std::vector<std::uint8_t>;

Eigen::VectorXd to_vector(const StateBits& bits);
StateBits to_bits(const Eigen::VectorXd& v);

// One labeled corpus turn: (s_t, A_t, s_{t+1}).
struct TurnSample {
  std::string dialog_id;
  int turn_id = 0;
  StateBits state;
  MacroAction macro;
  StateBits next_state;
};

// Pre-vocabulary corpus record; macro actions still textual.
struct RawTurn {
  std::string dialog_id;
  int turn_id = 0;
  StateBits state;
  std::vector<std::string> macro_names;
  StateBits next_state;
};

// Collects every action name appearing in any macro label, sorted
// lexicographically. Deterministic given the corpus. Throws on empty corpus.
ActionVocab build_vocab(const std::vector<RawTurn>& corpus);

}  // namespace pedp
