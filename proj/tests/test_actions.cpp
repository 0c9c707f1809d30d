#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pedp/corpus.hpp"
#include "pedp/rng.hpp"
#include "pedp/simulator.hpp"

using namespace pedp;

TEST_CASE("parse_action splits domain-intent-slot") {
  AtomicAction a = parse_action("hotel-inform-area");
  CHECK(a.domain == "hotel");
  CHECK(a.intent == "inform");
  CHECK(a.slot == "area");
  CHECK(a.str() == "hotel-inform-area");
}

TEST_CASE("parse_action rejects malformed strings") {
  CHECK_THROWS_AS(parse_action("hotel-inform"), ParseError);
  CHECK_THROWS_AS(parse_action("a-b-c-d"), ParseError);
  CHECK_THROWS_AS(parse_action("-inform-area"), ParseError);
  CHECK_THROWS_AS(parse_action("hotel--area"), ParseError);
  CHECK_THROWS_AS(parse_action(""), ParseError);
}

TEST_CASE("parse/format round-trips over the toy vocabulary") {
  ActionVocab vocab = DomainSchema::toy_default().system_vocab();
  for (const auto& a : vocab.actions()) {
    CHECK(format_action(parse_action(a.str())) == a.str());
  }
}

TEST_CASE("build_vocab sorts lexicographically and dedups") {
  RawTurn t1{"d0", 0, {}, {"b-x-y", "a-x-y"}, {}};
  RawTurn t2{"d0", 1, {}, {"a-x-y"}, {}};
  ActionVocab v = build_vocab({t1, t2});
  REQUIRE(v.size() == 2);
  CHECK(v.at(0).str() == "a-x-y");
  CHECK(v.at(1).str() == "b-x-y");
  CHECK(v.at(0).index == 0);

  ActionVocab again = build_vocab({t1, t2});
  CHECK(v.digest() == again.digest());

  CHECK_THROWS_AS(build_vocab({}), ValidationError);
}

TEST_CASE("toy vocabulary size equals the schema enumeration") {
  DomainSchema schema = DomainSchema::toy_default();
  // Independent count: every domain contributes inform+request per slot plus
  // a book act; two general acts close the list.
  int expected = 2;
  for (const auto& d : schema.domains) {
    expected += 2 * static_cast<int>(d.informable.size() + d.requestable.size()) + 1;
  }
  CHECK(schema.system_vocab().size() == expected);
}

TEST_CASE("encode_macro produces the vector view") {
  MacroAction empty;
  Eigen::VectorXd z = encode_macro(empty, 4);
  CHECK(z.sum() == 0.0);

  MacroAction one = MacroAction::from_indices({2});
  Eigen::VectorXd v = encode_macro(one, 4);
  CHECK(v[2] == 1.0);
  CHECK(v.sum() == 1.0);

  CHECK_THROWS_AS(encode_macro(MacroAction::from_indices({5}), 4), ValidationError);
}

TEST_CASE("encode/decode macro are inverses on random sets") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    int m = 2 + rng.uniform_int(30);
    std::vector<int> members;
    for (int i = 0; i < m; ++i) {
      if (rng.bernoulli(0.3)) members.push_back(i);
    }
    MacroAction a = MacroAction::from_indices(members);
    CHECK(decode_macro(encode_macro(a, m)) == a);
  }
}

TEST_CASE("decompose_macro sorts by index and rejects empty macros") {
  MacroAction m = MacroAction::from_indices({7, 5});
  std::vector<int> order = decompose_macro(m);
  CHECK(order == std::vector<int>{5, 7});
  CHECK(static_cast<int>(order.size()) == m.size());

  MacroAction single = MacroAction::from_indices({3});
  CHECK(decompose_macro(single) == std::vector<int>{3});

  // Set semantics: permuted input order yields the same decomposition.
  MacroAction permuted = MacroAction::from_indices({7, 5});
  CHECK(decompose_macro(permuted) == order);

  CHECK_THROWS_AS(decompose_macro(MacroAction{}), ValidationError);
}

TEST_CASE("state layout validation") {
  StateLayout ok{{{"a", 0, 3}, {"b", 3, 2}}};
  ok.validate();
  CHECK(ok.width() == 5);
  CHECK(ok.segment("b").offset == 3);
  CHECK_THROWS_AS(ok.segment("c"), ValidationError);

  StateLayout gap{{{"a", 0, 3}, {"b", 4, 2}}};
  CHECK_THROWS_AS(gap.validate(), ValidationError);
  StateLayout overlap{{{"a", 0, 3}, {"b", 2, 2}}};
  CHECK_THROWS_AS(overlap.validate(), ValidationError);
}

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "pedp_actions_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("load_corpus round-trips a generated corpus") {
  DomainSchema schema = DomainSchema::toy_default();
  Rng rng(5);
  Corpus corpus = generate_corpus(schema, 20, true, rng);
  auto path = (temp_dir() / "roundtrip.jsonl").string();
  save_corpus(corpus, path);
  Corpus loaded = load_corpus(path);
  REQUIRE(loaded.turns.size() == corpus.turns.size());
  CHECK(loaded.vocab.digest() == corpus.vocab.digest());
  for (size_t i = 0; i < corpus.turns.size(); ++i) {
    CHECK(loaded.turns[i].state == corpus.turns[i].state);
    CHECK(loaded.turns[i].macro == corpus.turns[i].macro);
    CHECK(loaded.turns[i].next_state == corpus.turns[i].next_state);
  }
}

TEST_CASE("load_corpus reports schema violations with line numbers") {
  DomainSchema schema = DomainSchema::toy_default();
  Rng rng(6);
  Corpus corpus = generate_corpus(schema, 3, true, rng);
  auto dir = temp_dir();
  auto path = (dir / "broken.jsonl").string();
  save_corpus(corpus, path);

  // Truncate the state array on line 2.
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  in.close();
  REQUIRE(lines.size() >= 2);
  auto pos = lines[1].find("\"state\":[");
  REQUIRE(pos != std::string::npos);
  lines[1].replace(pos, 11, "\"state\":[1,");
  std::ofstream out(path);
  for (const auto& l : lines) out << l << "\n";
  out.close();

  try {
    load_corpus(path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load_corpus on an empty file yields an empty list") {
  DomainSchema schema = DomainSchema::toy_default();
  auto dir = temp_dir();
  auto path = (dir / "empty.jsonl").string();
  Corpus empty;
  empty.layout = schema.state_layout();
  empty.vocab = schema.system_vocab();
  save_corpus(empty, path);
  Corpus loaded = load_corpus(path);
  CHECK(loaded.turns.empty());
}

TEST_CASE("load_corpus rejects unknown actions against the sidecar vocabulary") {
  DomainSchema schema = DomainSchema::toy_default();
  Rng rng(7);
  Corpus corpus = generate_corpus(schema, 2, true, rng);
  auto dir = temp_dir();
  auto path = (dir / "unknown_act.jsonl").string();
  save_corpus(corpus, path);

  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  in.close();
  auto pos = lines[0].find("\"macro_action\":[\"");
  REQUIRE(pos != std::string::npos);
  lines[0].insert(pos + 17, "zzz-");
  std::ofstream out(path);
  for (const auto& l : lines) out << l << "\n";
  out.close();

  try {
    load_corpus(path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("not in vocabulary") != std::string::npos);
    CHECK(msg.find("digest") != std::string::npos);
  }
}

TEST_CASE("loaded turns keep decompose length equal to macro popcount") {
  DomainSchema schema = DomainSchema::toy_default();
  Rng rng(8);
  Corpus corpus = generate_corpus(schema, 30, true, rng);
  for (const auto& turn : corpus.turns) {
    REQUIRE(turn.macro.size() >= 1);
    Eigen::VectorXd v = encode_macro(turn.macro, corpus.vocab.size());
    CHECK(static_cast<int>(decompose_macro(turn.macro).size()) == static_cast<int>(v.sum()));
  }
}
