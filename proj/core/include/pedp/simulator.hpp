#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pedp/corpus.hpp"
#include "pedp/metrics.hpp"
#include "pedp/rng.hpp"

namespace pedp {

// Deterministic toy multi-domain world. Each entity carries a value for every
// informable and requestable slot of its domain.
struct SlotDef {
  std::string name;
  std::vector<std::string> values;
};

struct Entity {
  std::string id;
  std::map<std::string, std::string> attrs;
};

struct DomainDef {
  std::string name;
  std::vector<SlotDef> informable;
  std::vector<std::string> requestable;
  std::vector<Entity> entities;

  bool is_informable(const std::string& slot) const;
  bool is_requestable(const std::string& slot) const;
};

struct DomainSchema {
  std::vector<DomainDef> domains;

  void validate() const;
  const DomainDef& domain(const std::string& name) const;

  // System action space: domain x {inform, request} x (informable u
  // requestable), plus per-domain book and the general bookkeeping acts.
  ActionVocab system_vocab() const;
  // User-side acts: inform over informables, request over requestables,
  // book, and bye.
  ActionVocab user_vocab() const;
  // Segments: entity availability, last user action, last system action,
  // belief flags.
  StateLayout state_layout() const;

  static DomainSchema toy_default();
  static DomainSchema load(const std::string& path);
  void save(const std::string& path) const;
};

struct DomainGoal {
  std::string domain;
  std::vector<std::pair<std::string, std::string>> constraints;  // slot -> value
  std::vector<std::string> requests;
  bool book = false;
};

struct UserGoal {
  std::vector<DomainGoal> domains;
};

// Satisfiable by construction (constraints are copied off an existing
// entity); at least one requested slot per domain. Throws after 100
// unsatisfiable draws.
UserGoal sample_goal(const DomainSchema& schema, Rng& rng);

// One simulated dialog between a policy and the agenda-based user.
struct EpisodeLog {
  UserGoal goal;
  struct Turn {
    std::vector<std::string> user_acts;  // user vocabulary names
    MacroAction system_macro;
    StateBits state;  // what the policy observed
  };
  std::vector<Turn> turns;
  int turn_count = 0;
  bool user_closed = false;  // agenda drained, user said bye
  bool match = false;
  std::set<std::pair<std::string, std::string>> provided;  // (domain, requestable)
  std::map<std::string, std::string> booked;               // domain -> entity id

  EpisodeOutcome outcome() const;
};

// Live dialog state: the agenda-based user, the structured state vector, and
// the booking/provided bookkeeping. Copyable, so a pre-turn snapshot can be
// replayed act by act.
class DialogSession {
public:
  DialogSession(const DomainSchema& schema, UserGoal goal, Rng user_rng);

  const StateBits& state() const { return bits_; }
  bool done() const { return done_; }
  bool user_closed() const { return user_closed_; }
  const std::vector<std::string>& last_user_acts() const { return last_user_acts_; }
  const std::set<std::pair<std::string, std::string>>& provided() const { return provided_; }
  const std::map<std::string, std::string>& booked() const { return booked_; }
  const ActionVocab& system_vocab() const { return sys_vocab_; }
  const ActionVocab& user_vocab() const { return user_vocab_; }

  // Applies the macro act by act in canonical order, then runs the user
  // phase.
  void system_turn(const MacroAction& macro);
  // Fragment-mode building blocks: one atomic act (first_of_turn clears the
  // last-system segment), and the agenda response.
  void apply_system_act(int action_index, bool first_of_turn);
  void user_phase();

  // The scripted oracle: answers every outstanding request, asks for the
  // first missing goal constraint, books when asked and ready, and falls
  // back to reqmore.
  MacroAction expert_macro() const;

  // True once every goal request is provided and required bookings match.
  bool goal_complete() const;
  bool booking_matches(const DomainGoal& dg) const;

private:
  struct AgendaItem {
    enum class Type { inform, request, book } type;
    std::string domain;
    std::string slot;  // empty for book
  };

  void set_bit(int offset, bool on = true);
  void clear_segment(const StateLayout::Segment& seg);
  void refresh_entity_bits();
  const DomainGoal* goal_for(const std::string& domain) const;
  int matching_entities(const std::string& domain) const;
  const Entity* first_match(const std::string& domain) const;
  void remove_agenda_request(const std::string& domain, const std::string& slot);

  const DomainSchema* schema_;
  ActionVocab sys_vocab_;
  ActionVocab user_vocab_;
  StateLayout layout_;
  UserGoal goal_;
  Rng rng_;

  StateBits bits_;
  std::vector<AgendaItem> agenda_;  // back = top
  std::map<std::pair<std::string, std::string>, std::string> informed_constraints_;
  std::set<std::pair<std::string, std::string>> provided_;
  std::map<std::string, std::string> booked_;
  std::vector<std::string> last_user_acts_;
  bool done_ = false;
  bool user_closed_ = false;
};

using Policy = std::function<MacroAction(const Eigen::VectorXd& state, Rng& rng)>;

// Alternates user/system turns until the user closes or max_turns system
// turns have run. The policy sees the state vector exactly as laid out by the
// schema's segment layout.
EpisodeLog run_episode(const DomainSchema& schema, const UserGoal& goal, const Policy& policy,
                       int max_turns, Rng& rng);
EpisodeLog run_expert_episode(const DomainSchema& schema, const UserGoal& goal, int max_turns,
                              Rng& rng);

// Runs the scripted expert against the simulator. multi_action=true groups
// the expert's acts per turn into macro-actions; false spreads each macro
// over consecutive single-action rows (the user responds after the last).
// verify_replay re-executes every macro act by act from a session snapshot
// and checks the recorded next_state, throwing on any mismatch.
Corpus generate_corpus(const DomainSchema& schema, int n_dialogs, bool multi_action, Rng& rng,
                       bool verify_replay = true, int max_turns = 20);

}  // namespace pedp
