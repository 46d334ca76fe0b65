#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tagbench/error.hpp"
#include "tagbench/io.hpp"
#include "tagbench/records.hpp"

namespace tagbench {
namespace {

const std::vector<std::string> kVocab{"A", "B", "C"};

PredictionRecord sample_record() {
  PredictionRecord r;
  r.node_id = "n7";
  r.style = {StyleKind::khop_attention, 1, 3};
  r.perturbation.kind = Perturbation::Kind::neighbors;
  r.perturbation.drop = {NeighborMode::drop_same, 0.3, 9};
  r.context = TextContext::scarce;
  r.raw_text = "line one\nB \"quoted\"";
  r.parsed.label = 1;
  r.truth = 1;
  r.correct = true;
  r.homophily = 0.25;
  r.neighbor_count = 4;
  r.ranking_fallback = true;
  return r;
}

void expect_same(const PredictionRecord& a, const PredictionRecord& b) {
  EXPECT_EQ(a.node_id, b.node_id);
  EXPECT_EQ(a.style, b.style);
  EXPECT_EQ(a.perturbation.key(), b.perturbation.key());
  EXPECT_EQ(a.context, b.context);
  EXPECT_EQ(a.raw_text, b.raw_text);
  EXPECT_EQ(a.parsed, b.parsed);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.correct, b.correct);
  EXPECT_EQ(a.homophily, b.homophily);
  EXPECT_EQ(a.neighbor_count, b.neighbor_count);
  EXPECT_EQ(a.ranking_fallback, b.ranking_fallback);
  EXPECT_EQ(a.task_key(), b.task_key());
}

TEST(Records, JsonRoundTrip) {
  const auto r = sample_record();
  const auto j = record_to_json(r, kVocab);
  EXPECT_EQ(j["parsed_name"], "B");
  EXPECT_EQ(j["truth_name"], "B");
  expect_same(record_from_json(j), r);

  PredictionRecord unparsed;
  unparsed.node_id = "u";
  unparsed.parsed.reason = "empty response";
  const auto back = record_from_json(record_to_json(unparsed, kVocab));
  expect_same(back, unparsed);
  EXPECT_TRUE(record_to_json(unparsed, kVocab)["parsed"].is_null());
}

TEST(Records, TaskKeySeparatesConditions) {
  auto a = sample_record();
  auto b = a;
  b.context = TextContext::rich;
  EXPECT_NE(a.task_key(), b.task_key());
  b = a;
  b.perturbation.drop.p = 0.4;
  EXPECT_NE(a.task_key(), b.task_key());
  b = a;
  b.raw_text = "different reply";
  EXPECT_EQ(a.task_key(), b.task_key());
}

TEST(Records, CorrectMustAgreeWithTruth) {
  auto j = record_to_json(sample_record(), kVocab);
  j["truth"] = 2;
  EXPECT_THROW(record_from_json(j), SchemaError);
  j = record_to_json(sample_record(), kVocab);
  j["parsed"] = nullptr;
  EXPECT_THROW(record_from_json(j), SchemaError);
  j = record_to_json(sample_record(), kVocab);
  j.erase("node_id");
  EXPECT_THROW(record_from_json(j), SchemaError);
  j = record_to_json(sample_record(), kVocab);
  j["style"] = "khop_title@7";
  EXPECT_THROW(record_from_json(j), SchemaError);
}

TEST(Records, ReadReportsLineNumber) {
  testing::TempDir dir;
  const auto path = dir / "records.jsonl";
  const auto good = record_to_json(sample_record(), kVocab).dump();
  write_file(path, good + "\n" + good + "\n{not json\n");
  try {
    read_records(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  write_file(path, good + "\n\n" + good + "\n");
  EXPECT_EQ(read_records(path).size(), 2u);
}

}  // namespace
}  // namespace tagbench
