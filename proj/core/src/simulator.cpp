#include "pedp/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "pedp/errors.hpp"

namespace pedp {

using json = nlohmann::ordered_json;

bool DomainDef::is_informable(const std::string& slot) const {
  for (const auto& s : informable) {
    if (s.name == slot) return true;
  }
  return false;
}

bool DomainDef::is_requestable(const std::string& slot) const {
  return std::find(requestable.begin(), requestable.end(), slot) != requestable.end();
}

void DomainSchema::validate() const {
  if (domains.empty()) throw ValidationError("schema has no domains");
  for (const auto& d : domains) {
    if (d.name == "general") throw ValidationError("\"general\" is reserved for bookkeeping acts");
    if (d.informable.empty() || d.requestable.empty() || d.entities.empty()) {
      throw ValidationError("domain \"" + d.name + "\" needs informables, requestables, entities");
    }
    for (const auto& s : d.informable) {
      if (s.values.empty()) {
        throw ValidationError("slot \"" + d.name + "." + s.name + "\" has no values");
      }
    }
    for (const auto& e : d.entities) {
      for (const auto& s : d.informable) {
        if (!e.attrs.count(s.name)) {
          throw ValidationError("entity \"" + e.id + "\" missing informable \"" + s.name + "\"");
        }
      }
      for (const auto& r : d.requestable) {
        if (!e.attrs.count(r)) {
          throw ValidationError("entity \"" + e.id + "\" missing requestable \"" + r + "\"");
        }
      }
    }
  }
}

const DomainDef& DomainSchema::domain(const std::string& name) const {
  for (const auto& d : domains) {
    if (d.name == name) return d;
  }
  throw ValidationError("unknown domain \"" + name + "\"");
}

ActionVocab DomainSchema::system_vocab() const {
  std::vector<std::string> names;
  for (const auto& d : domains) {
    for (const auto& s : d.informable) {
      names.push_back(d.name + "-inform-" + s.name);
      names.push_back(d.name + "-request-" + s.name);
    }
    for (const auto& r : d.requestable) {
      names.push_back(d.name + "-inform-" + r);
      names.push_back(d.name + "-request-" + r);
    }
    names.push_back(d.name + "-book-none");
  }
  names.push_back("general-bye-none");
  names.push_back("general-reqmore-none");
  return ActionVocab::from_names(std::move(names));
}

ActionVocab DomainSchema::user_vocab() const {
  std::vector<std::string> names;
  for (const auto& d : domains) {
    for (const auto& s : d.informable) names.push_back(d.name + "-inform-" + s.name);
    for (const auto& r : d.requestable) names.push_back(d.name + "-request-" + r);
    names.push_back(d.name + "-book-none");
  }
  names.push_back("general-bye-none");
  return ActionVocab::from_names(std::move(names));
}

StateLayout DomainSchema::state_layout() const {
  StateLayout layout;
  int off = 0;
  int entity_width = 4 * static_cast<int>(domains.size());
  layout.segments.push_back({"entity", off, entity_width});
  off += entity_width;
  int user_width = user_vocab().size();
  layout.segments.push_back({"last_user", off, user_width});
  off += user_width;
  int sys_width = system_vocab().size();
  layout.segments.push_back({"last_sys", off, sys_width});
  off += sys_width;
  int belief_width = 0;
  for (const auto& d : domains) {
    belief_width += static_cast<int>(d.informable.size()) +
                    2 * static_cast<int>(d.requestable.size()) + 1;
  }
  layout.segments.push_back({"belief", off, belief_width});
  layout.validate();
  return layout;
}

DomainSchema DomainSchema::toy_default() {
  DomainSchema schema;
  Rng rng(0x70e5c4e1);

  auto build = [&rng](const std::string& name, std::vector<SlotDef> informable,
                      std::vector<std::string> requestable, int n_entities) {
    DomainDef d;
    d.name = name;
    d.informable = std::move(informable);
    d.requestable = std::move(requestable);
    for (int i = 0; i < n_entities; ++i) {
      Entity e;
      char suffix[8];
      std::snprintf(suffix, sizeof(suffix), "%02d", i);
      e.id = name + "_" + suffix;
      for (const auto& s : d.informable) {
        e.attrs[s.name] = s.values[static_cast<size_t>(rng.uniform_int(
            static_cast<int>(s.values.size())))];
      }
      for (const auto& r : d.requestable) {
        e.attrs[r] = e.id + "_" + r;
      }
      d.entities.push_back(std::move(e));
    }
    return d;
  };

  schema.domains.push_back(build(
      "hotel",
      {{"area", {"north", "south", "east", "west", "centre"}},
       {"price", {"cheap", "moderate", "expensive"}},
       {"stars", {"two", "three", "four", "five"}},
       {"parking", {"yes", "no"}}},
      {"phone", "address", "postcode"}, 20));
  schema.domains.push_back(build(
      "restaurant",
      {{"area", {"north", "south", "east", "west", "centre"}},
       {"price", {"cheap", "moderate", "expensive"}},
       {"food", {"italian", "chinese", "indian", "british", "thai"}},
       {"day", {"monday", "tuesday", "wednesday", "thursday", "friday"}}},
      {"phone", "address", "reference"}, 20));
  schema.validate();
  return schema;
}

DomainSchema DomainSchema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("schema \"" + path + "\": " + e.what());
  }
  DomainSchema schema;
  for (const auto& dj : j.at("domains")) {
    DomainDef d;
    d.name = dj.at("name").get<std::string>();
    for (const auto& sj : dj.at("informable")) {
      d.informable.push_back(
          {sj.at("name").get<std::string>(), sj.at("values").get<std::vector<std::string>>()});
    }
    d.requestable = dj.at("requestable").get<std::vector<std::string>>();
    for (const auto& ej : dj.at("entities")) {
      Entity e;
      e.id = ej.at("id").get<std::string>();
      for (const auto& [k, v] : ej.at("attrs").items()) e.attrs[k] = v.get<std::string>();
      d.entities.push_back(std::move(e));
    }
    schema.domains.push_back(std::move(d));
  }
  schema.validate();
  return schema;
}

void DomainSchema::save(const std::string& path) const {
  json j;
  j["format_version"] = 1;
  json domains_json = json::array();
  for (const auto& d : domains) {
    json dj;
    dj["name"] = d.name;
    json inf = json::array();
    for (const auto& s : d.informable) inf.push_back({{"name", s.name}, {"values", s.values}});
    dj["informable"] = inf;
    dj["requestable"] = d.requestable;
    json ents = json::array();
    for (const auto& e : d.entities) {
      json attrs;
      for (const auto& [k, v] : e.attrs) attrs[k] = v;
      ents.push_back({{"id", e.id}, {"attrs", attrs}});
    }
    dj["entities"] = ents;
    domains_json.push_back(dj);
  }
  j["domains"] = domains_json;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write schema \"" + path + "\"");
  out << j.dump(2) << "\n";
}

UserGoal sample_goal(const DomainSchema& schema, Rng& rng) {
  int available = static_cast<int>(schema.domains.size());
  int n_domains = (available >= 2 && rng.bernoulli(0.3)) ? 2 : 1;

  std::vector<int> order(static_cast<size_t>(available));
  for (int i = 0; i < available; ++i) order[static_cast<size_t>(i)] = i;
  for (int i = available - 1; i > 0; --i) {
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.uniform_int(i + 1))]);
  }

  UserGoal goal;
  for (int g = 0; g < n_domains; ++g) {
    const DomainDef& d = schema.domains[static_cast<size_t>(order[static_cast<size_t>(g)])];
    DomainGoal dg;
    dg.domain = d.name;
    for (int attempt = 0; attempt < 100; ++attempt) {
      dg.constraints.clear();
      // Anchor the constraints on a concrete entity so a match always exists.
      const Entity& anchor = d.entities[static_cast<size_t>(
          rng.uniform_int(static_cast<int>(d.entities.size())))];
      int n_constraints = 1 + rng.uniform_int(std::min<int>(3, static_cast<int>(d.informable.size())));
      std::vector<int> slots(d.informable.size());
      for (size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<int>(i);
      for (int i = static_cast<int>(slots.size()) - 1; i > 0; --i) {
        std::swap(slots[static_cast<size_t>(i)], slots[static_cast<size_t>(rng.uniform_int(i + 1))]);
      }
      for (int i = 0; i < n_constraints; ++i) {
        const auto& slot = d.informable[static_cast<size_t>(slots[static_cast<size_t>(i)])];
        dg.constraints.emplace_back(slot.name, anchor.attrs.at(slot.name));
      }
      std::sort(dg.constraints.begin(), dg.constraints.end());
      bool satisfiable = false;
      for (const auto& e : d.entities) {
        bool ok = true;
        for (const auto& [slot, value] : dg.constraints) {
          if (e.attrs.at(slot) != value) {
            ok = false;
            break;
          }
        }
        if (ok) {
          satisfiable = true;
          break;
        }
      }
      if (satisfiable) break;
      if (attempt == 99) throw ValidationError("goal sampling failed 100 satisfiability draws");
    }
    int n_requests = 1 + rng.uniform_int(std::min<int>(3, static_cast<int>(d.requestable.size())));
    std::vector<int> reqs(d.requestable.size());
    for (size_t i = 0; i < reqs.size(); ++i) reqs[i] = static_cast<int>(i);
    for (int i = static_cast<int>(reqs.size()) - 1; i > 0; --i) {
      std::swap(reqs[static_cast<size_t>(i)], reqs[static_cast<size_t>(rng.uniform_int(i + 1))]);
    }
    for (int i = 0; i < n_requests; ++i) {
      dg.requests.push_back(d.requestable[static_cast<size_t>(reqs[static_cast<size_t>(i)])]);
    }
    std::sort(dg.requests.begin(), dg.requests.end());
    dg.book = rng.bernoulli(0.5);
    goal.domains.push_back(std::move(dg));
  }
  return goal;
}

EpisodeOutcome EpisodeLog::outcome() const {
  EpisodeOutcome out;
  out.turns = turn_count;
  out.match = match;
  out.provided_total = static_cast<int>(provided.size());
  for (const auto& dg : goal.domains) {
    out.requested += static_cast<int>(dg.requests.size());
    for (const auto& r : dg.requests) {
      if (provided.count({dg.domain, r})) ++out.provided_requested;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// DialogSession

namespace {

// Belief sub-offsets within the belief segment, per domain in schema order:
// informable flags, requested flags, agent-informed flags, book flag.
struct BeliefIndex {
  int informed(const DomainSchema& schema, const StateLayout& layout, const std::string& domain,
               const std::string& slot) const {
    return base(schema, layout, domain) + informable_pos(schema, domain, slot);
  }
  int requested(const DomainSchema& schema, const StateLayout& layout, const std::string& domain,
                const std::string& slot) const {
    const DomainDef& d = schema.domain(domain);
    return base(schema, layout, domain) + static_cast<int>(d.informable.size()) +
           requestable_pos(d, slot);
  }
  int agent_informed(const DomainSchema& schema, const StateLayout& layout,
                     const std::string& domain, const std::string& slot) const {
    const DomainDef& d = schema.domain(domain);
    return base(schema, layout, domain) + static_cast<int>(d.informable.size()) +
           static_cast<int>(d.requestable.size()) + requestable_pos(d, slot);
  }
  int book(const DomainSchema& schema, const StateLayout& layout, const std::string& domain) const {
    const DomainDef& d = schema.domain(domain);
    return base(schema, layout, domain) + static_cast<int>(d.informable.size()) +
           2 * static_cast<int>(d.requestable.size());
  }

private:
  static int base(const DomainSchema& schema, const StateLayout& layout,
                  const std::string& domain) {
    int off = layout.segment("belief").offset;
    for (const auto& d : schema.domains) {
      if (d.name == domain) return off;
      off += static_cast<int>(d.informable.size()) + 2 * static_cast<int>(d.requestable.size()) + 1;
    }
    throw ValidationError("unknown domain \"" + domain + "\"");
  }
  static int informable_pos(const DomainSchema& schema, const std::string& domain,
                            const std::string& slot) {
    const DomainDef& d = schema.domain(domain);
    for (size_t i = 0; i < d.informable.size(); ++i) {
      if (d.informable[i].name == slot) return static_cast<int>(i);
    }
    throw ValidationError("unknown informable \"" + domain + "." + slot + "\"");
  }
  static int requestable_pos(const DomainDef& d, const std::string& slot) {
    for (size_t i = 0; i < d.requestable.size(); ++i) {
      if (d.requestable[i] == slot) return static_cast<int>(i);
    }
    throw ValidationError("unknown requestable \"" + d.name + "." + slot + "\"");
  }
};

int domain_pos(const DomainSchema& schema, const std::string& domain) {
  for (size_t i = 0; i < schema.domains.size(); ++i) {
    if (schema.domains[i].name == domain) return static_cast<int>(i);
  }
  throw ValidationError("unknown domain \"" + domain + "\"");
}

}  // namespace

DialogSession::DialogSession(const DomainSchema& schema, UserGoal goal, Rng user_rng)
    : schema_(&schema),
      sys_vocab_(schema.system_vocab()),
      user_vocab_(schema.user_vocab()),
      layout_(schema.state_layout()),
      goal_(std::move(goal)),
      rng_(user_rng) {
  bits_.assign(static_cast<size_t>(layout_.width()), 0);
  // Agenda (top = back): per goal domain, informs above requests above book,
  // first domain on top.
  for (auto dg = goal_.domains.rbegin(); dg != goal_.domains.rend(); ++dg) {
    if (dg->book) agenda_.push_back({AgendaItem::Type::book, dg->domain, ""});
    for (auto r = dg->requests.rbegin(); r != dg->requests.rend(); ++r) {
      agenda_.push_back({AgendaItem::Type::request, dg->domain, *r});
    }
    for (auto c = dg->constraints.rbegin(); c != dg->constraints.rend(); ++c) {
      agenda_.push_back({AgendaItem::Type::inform, dg->domain, c->first});
    }
  }
  refresh_entity_bits();
  user_phase();  // the user opens the dialog
}

void DialogSession::set_bit(int offset, bool on) {
  bits_[static_cast<size_t>(offset)] = on ? 1 : 0;
}

void DialogSession::clear_segment(const StateLayout::Segment& seg) {
  std::fill(bits_.begin() + seg.offset, bits_.begin() + seg.offset + seg.width, 0);
}

const DomainGoal* DialogSession::goal_for(const std::string& domain) const {
  for (const auto& dg : goal_.domains) {
    if (dg.domain == domain) return &dg;
  }
  return nullptr;
}

int DialogSession::matching_entities(const std::string& domain) const {
  const DomainDef& d = schema_->domain(domain);
  int count = 0;
  for (const auto& e : d.entities) {
    bool ok = true;
    for (const auto& [key, value] : informed_constraints_) {
      if (key.first != domain) continue;
      if (e.attrs.at(key.second) != value) {
        ok = false;
        break;
      }
    }
    if (ok) ++count;
  }
  return count;
}

const Entity* DialogSession::first_match(const std::string& domain) const {
  const DomainDef& d = schema_->domain(domain);
  for (const auto& e : d.entities) {
    bool ok = true;
    for (const auto& [key, value] : informed_constraints_) {
      if (key.first != domain) continue;
      if (e.attrs.at(key.second) != value) {
        ok = false;
        break;
      }
    }
    if (ok) return &e;
  }
  return nullptr;
}

void DialogSession::refresh_entity_bits() {
  const auto& seg = layout_.segment("entity");
  for (size_t i = 0; i < schema_->domains.size(); ++i) {
    const std::string& name = schema_->domains[i].name;
    int base = seg.offset + 4 * static_cast<int>(i);
    int n = matching_entities(name);
    set_bit(base + 0, n == 0);
    set_bit(base + 1, n == 1);
    set_bit(base + 2, n > 1);
    set_bit(base + 3, booked_.count(name) > 0);
  }
}

void DialogSession::remove_agenda_request(const std::string& domain, const std::string& slot) {
  agenda_.erase(std::remove_if(agenda_.begin(), agenda_.end(),
                               [&](const AgendaItem& item) {
                                 return item.type == AgendaItem::Type::request &&
                                        item.domain == domain && item.slot == slot;
                               }),
                agenda_.end());
}

bool DialogSession::booking_matches(const DomainGoal& dg) const {
  auto it = booked_.find(dg.domain);
  if (it == booked_.end()) return false;
  const DomainDef& d = schema_->domain(dg.domain);
  for (const auto& e : d.entities) {
    if (e.id != it->second) continue;
    for (const auto& [slot, value] : dg.constraints) {
      if (e.attrs.at(slot) != value) return false;
    }
    return true;
  }
  return false;
}

bool DialogSession::goal_complete() const {
  for (const auto& dg : goal_.domains) {
    for (const auto& r : dg.requests) {
      if (!provided_.count({dg.domain, r})) return false;
    }
    if (dg.book && !booking_matches(dg)) return false;
  }
  return true;
}

void DialogSession::apply_system_act(int action_index, bool first_of_turn) {
  const auto& seg = layout_.segment("last_sys");
  if (first_of_turn) clear_segment(seg);
  const AtomicAction& act = sys_vocab_.at(action_index);
  set_bit(seg.offset + action_index);

  if (act.domain == "general") {
    if (act.intent == "bye") done_ = true;
    return;  // reqmore has no further state effect
  }

  const DomainDef& d = schema_->domain(act.domain);
  BeliefIndex belief;
  if (act.intent == "inform") {
    if (d.is_requestable(act.slot)) {
      provided_.insert({act.domain, act.slot});
      set_bit(belief.agent_informed(*schema_, layout_, act.domain, act.slot));
      remove_agenda_request(act.domain, act.slot);
    }
    // Informs of informable slots are echoes; the belief already tracks them.
  } else if (act.intent == "request") {
    const DomainGoal* dg = goal_for(act.domain);
    if (dg != nullptr && d.is_informable(act.slot) &&
        !informed_constraints_.count({act.domain, act.slot})) {
      for (const auto& [slot, value] : dg->constraints) {
        if (slot != act.slot) continue;
        bool already = std::any_of(agenda_.begin(), agenda_.end(), [&](const AgendaItem& item) {
          return item.type == AgendaItem::Type::inform && item.domain == act.domain &&
                 item.slot == act.slot;
        });
        if (!already) agenda_.push_back({AgendaItem::Type::inform, act.domain, act.slot});
      }
    }
    // Requests for slots the goal does not constrain are ignored by the user.
  } else if (act.intent == "book") {
    const Entity* e = first_match(act.domain);
    if (e != nullptr) {
      booked_[act.domain] = e->id;
      const DomainGoal* dg = goal_for(act.domain);
      // The user keeps asking until the booked entity fits the goal.
      if (dg == nullptr || booking_matches(*dg)) {
        agenda_.erase(std::remove_if(agenda_.begin(), agenda_.end(),
                                     [&](const AgendaItem& item) {
                                       return item.type == AgendaItem::Type::book &&
                                              item.domain == act.domain;
                                     }),
                      agenda_.end());
      }
      refresh_entity_bits();
    }
  }
}

void DialogSession::user_phase() {
  const auto& seg = layout_.segment("last_user");
  clear_segment(seg);
  last_user_acts_.clear();
  if (done_) return;

  if (agenda_.empty()) {
    int bye = user_vocab_.index_of("general-bye-none");
    set_bit(seg.offset + bye);
    last_user_acts_.push_back("general-bye-none");
    done_ = true;
    user_closed_ = true;
    return;
  }

  // Acts per turn: 1..4 weighted toward shorter utterances.
  double draw = rng_.uniform();
  int acts_this_turn = draw < 0.25 ? 1 : draw < 0.60 ? 2 : draw < 0.85 ? 3 : 4;

  BeliefIndex belief;
  int emitted = 0;
  int i = static_cast<int>(agenda_.size()) - 1;
  while (i >= 0 && emitted < acts_this_turn) {
    AgendaItem item = agenda_[static_cast<size_t>(i)];
    std::string name;
    if (item.type == AgendaItem::Type::inform) {
      name = item.domain + "-inform-" + item.slot;
      const DomainGoal* dg = goal_for(item.domain);
      for (const auto& [slot, value] : dg->constraints) {
        if (slot == item.slot) informed_constraints_[{item.domain, slot}] = value;
      }
      set_bit(belief.informed(*schema_, layout_, item.domain, item.slot));
      agenda_.erase(agenda_.begin() + i);
    } else if (item.type == AgendaItem::Type::request) {
      name = item.domain + "-request-" + item.slot;
      set_bit(belief.requested(*schema_, layout_, item.domain, item.slot));
      // Stays on the agenda until the system informs it.
    } else {
      name = item.domain + "-book-none";
      set_bit(belief.book(*schema_, layout_, item.domain));
    }
    set_bit(seg.offset + user_vocab_.index_of(name));
    last_user_acts_.push_back(name);
    ++emitted;
    --i;
  }
  refresh_entity_bits();
}

void DialogSession::system_turn(const MacroAction& macro) {
  bool first = true;
  for (int idx : macro.members) {
    apply_system_act(idx, first);
    first = false;
  }
  if (macro.empty()) clear_segment(layout_.segment("last_sys"));
  user_phase();
}

MacroAction DialogSession::expert_macro() const {
  BeliefIndex belief;
  const DomainGoal* active = nullptr;
  for (const auto& dg : goal_.domains) {
    bool complete = true;
    for (const auto& r : dg.requests) {
      if (!provided_.count({dg.domain, r})) complete = false;
    }
    if (dg.book && !booking_matches(dg)) complete = false;
    if (!complete) {
      active = &dg;
      break;
    }
  }

  std::vector<int> acts;
  if (active != nullptr) {
    const std::string& d = active->domain;
    // Answer every outstanding request.
    for (const auto& r : active->requests) {
      bool asked = bits_[static_cast<size_t>(belief.requested(*schema_, layout_, d, r))] != 0;
      if (asked && !provided_.count({d, r})) {
        acts.push_back(sys_vocab_.index_of(d + "-inform-" + r));
      }
    }
    // Ask for the first goal constraint the user has not given yet.
    for (const auto& [slot, value] : active->constraints) {
      if (!informed_constraints_.count({d, slot})) {
        acts.push_back(sys_vocab_.index_of(d + "-request-" + slot));
        break;
      }
    }
    // Book once asked and every constraint is on the table.
    bool wants_book = bits_[static_cast<size_t>(belief.book(*schema_, layout_, d))] != 0;
    if (active->book && wants_book && !booking_matches(*active)) {
      bool all_informed = true;
      for (const auto& [slot, value] : active->constraints) {
        if (!informed_constraints_.count({d, slot})) all_informed = false;
      }
      if (all_informed) acts.push_back(sys_vocab_.index_of(d + "-book-none"));
    }
  }
  if (acts.empty()) acts.push_back(sys_vocab_.index_of("general-reqmore-none"));
  return MacroAction::from_indices(std::move(acts));
}

// ---------------------------------------------------------------------------
// Episode driving and corpus generation

namespace {

EpisodeLog drive_episode(const DomainSchema& schema, const UserGoal& goal,
                         const std::function<MacroAction(DialogSession&, Rng&)>& choose,
                         int max_turns, Rng& rng) {
  DialogSession session(schema, goal, rng.split());
  EpisodeLog log;
  log.goal = goal;
  while (!session.done() && log.turn_count < max_turns) {
    EpisodeLog::Turn turn;
    turn.user_acts = session.last_user_acts();
    turn.state = session.state();
    turn.system_macro = choose(session, rng);
    encode_macro(turn.system_macro, session.system_vocab().size());  // index validation
    session.system_turn(turn.system_macro);
    log.turns.push_back(std::move(turn));
    ++log.turn_count;
  }
  log.user_closed = session.user_closed();
  log.provided = session.provided();
  log.booked = session.booked();
  bool match = true;
  for (const auto& dg : goal.domains) {
    if (dg.book && !session.booking_matches(dg)) match = false;
  }
  log.match = match;
  return log;
}

}  // namespace

EpisodeLog run_episode(const DomainSchema& schema, const UserGoal& goal, const Policy& policy,
                       int max_turns, Rng& rng) {
  return drive_episode(
      schema, goal,
      [&policy](DialogSession& session, Rng& r) {
        return policy(to_vector(session.state()), r);
      },
      max_turns, rng);
}

EpisodeLog run_expert_episode(const DomainSchema& schema, const UserGoal& goal, int max_turns,
                              Rng& rng) {
  return drive_episode(
      schema, goal, [](DialogSession& session, Rng&) { return session.expert_macro(); },
      max_turns, rng);
}

Corpus generate_corpus(const DomainSchema& schema, int n_dialogs, bool multi_action, Rng& rng,
                       bool verify_replay, int max_turns) {
  if (n_dialogs < 1) throw ValidationError("n_dialogs must be >= 1");
  schema.validate();

  Corpus corpus;
  corpus.layout = schema.state_layout();
  corpus.vocab = schema.system_vocab();
  {
    ActionVocab user = schema.user_vocab();
    corpus.user_actions = user.names();
  }

  for (int d = 0; d < n_dialogs; ++d) {
    UserGoal goal = sample_goal(schema, rng);
    DialogSession session(schema, goal, rng.split());
    char id[16];
    std::snprintf(id, sizeof(id), "d%05d", d);
    int turn_id = 0;
    int system_turns = 0;
    while (!session.done() && system_turns < max_turns) {
      MacroAction macro = session.expert_macro();
      if (multi_action) {
        TurnSample turn;
        turn.dialog_id = id;
        turn.turn_id = turn_id++;
        turn.state = session.state();
        turn.macro = macro;
        DialogSession replay = session;  // pre-turn snapshot
        session.system_turn(macro);
        turn.next_state = session.state();
        if (verify_replay) {
          bool first = true;
          for (int idx : decompose_macro(macro)) {
            replay.apply_system_act(idx, first);
            first = false;
          }
          replay.user_phase();
          if (replay.state() != turn.next_state) {
            throw ValidationError("decomposition replay diverged at dialog " + std::string(id) +
                                  " turn " + std::to_string(turn.turn_id));
          }
        }
        corpus.turns.push_back(std::move(turn));
      } else {
        // One act per row; the user responds after the fragment's last act.
        std::vector<int> fragment = decompose_macro(macro);
        for (size_t i = 0; i < fragment.size(); ++i) {
          TurnSample turn;
          turn.dialog_id = id;
          turn.turn_id = turn_id++;
          turn.state = session.state();
          turn.macro = MacroAction::from_indices({fragment[i]});
          session.apply_system_act(fragment[i], i == 0);
          if (i + 1 == fragment.size()) session.user_phase();
          turn.next_state = session.state();
          corpus.turns.push_back(std::move(turn));
        }
      }
      ++system_turns;
    }
  }
  return corpus;
}

}  // namespace pedp
