#include <doctest.h>

#include <vector>

#include "qreadout/errors.hpp"
#include "qreadout/metrics/metrics.hpp"

using namespace qreadout;
using namespace qreadout::metrics;

TEST_SUITE("metrics") {

TEST_CASE("per-state accuracy examples") {
  const std::vector<int> labels{0, 0, 1, 1};
  const auto perfect = per_state_accuracy(labels, labels);
  CHECK(perfect.at(0) == 1.0);
  CHECK(perfect.at(1) == 1.0);
  const std::vector<int> zeros{0, 0, 0, 0};
  const auto constant = per_state_accuracy(zeros, labels);
  CHECK(constant.at(0) == 1.0);
  CHECK(constant.at(1) == 0.0);
  const std::vector<int> preds{0, 1, 1, 1};
  const auto hand = per_state_accuracy(preds, labels);
  CHECK(hand.at(0) == 0.5);
  CHECK(hand.at(1) == 1.0);
}

TEST_CASE("per-state accuracy errors") {
  const std::vector<int> labels{0, 0, 1, 1}, short_preds{0, 1};
  CHECK_THROWS_AS(per_state_accuracy(short_preds, labels), DataError);
  const std::vector<int> states{0, 1, 2};
  CHECK_THROWS_AS(per_state_accuracy(labels, labels, states), DataError);
}

TEST_CASE("global accuracy is the unweighted state mean") {
  CHECK(global_accuracy({{0, 1.0}, {1, 1.0}}) == 1.0);
  CHECK(global_accuracy({{0, 0.5}, {1, 1.0}}) == 0.75);
  CHECK(global_accuracy({{0, 0.9}, {1, 0.8}, {2, 0.7}}) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(global_accuracy({}), UsageError);
  // Imbalanced classes: 9 of 9 on state 0 and 0 of 1 on state 1 give 0.5, not 0.9.
  std::vector<int> labels(9, 0), preds(10, 0);
  labels.push_back(1);
  CHECK(global_accuracy(per_state_accuracy(preds, labels)) == 0.5);
}

TEST_CASE("confusion matrix examples") {
  const std::vector<int> labels{0, 0, 1, 1}, preds{0, 1, 1, 1};
  const ConfusionMatrix id = confusion_matrix(labels, labels, 2);
  CHECK(id.rates.isIdentity(0.0));
  const std::vector<int> l2{0, 1}, p2{1, 0};
  const ConfusionMatrix anti = confusion_matrix(p2, l2, 2);
  CHECK(anti.rates(0, 1) == 1.0);
  CHECK(anti.rates(1, 0) == 1.0);
  CHECK(anti.rates.trace() == 0.0);
  const ConfusionMatrix hand = confusion_matrix(preds, labels, 2);
  CHECK(hand.rates(0, 0) == 0.5);
  CHECK(hand.rates(0, 1) == 0.5);
  CHECK(hand.rates(1, 0) == 0.0);
  CHECK(hand.rates(1, 1) == 1.0);
  CHECK(hand.row_counts == std::vector<std::size_t>{2, 2});

  const ConfusionMatrix empty = confusion_matrix(preds, labels, 3);
  CHECK(empty.empty_rows == std::vector<bool>{false, false, true});
  CHECK(empty.rates.row(2).isZero(0.0));
  const std::vector<int> bad{0, 3};
  CHECK_THROWS_AS(confusion_matrix(bad, l2, 3), DataError);
}

TEST_CASE("diagonal equals per-state accuracy and order does not matter") {
  const std::vector<int> labels{0, 1, 2, 2, 1, 0, 1, 2, 0, 0};
  const std::vector<int> preds{0, 2, 2, 1, 1, 0, 1, 2, 1, 0};
  const auto acc = per_state_accuracy(preds, labels);
  const ConfusionMatrix cm = confusion_matrix(preds, labels, 3);
  for (int s = 0; s < 3; ++s) {
    CHECK(cm.rates(s, s) == acc.at(s));
    CHECK(cm.rates.row(s).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  std::vector<int> rl(labels.rbegin(), labels.rend()), rp(preds.rbegin(), preds.rend());
  CHECK(per_state_accuracy(rp, rl) == acc);
}

TEST_CASE("score fills a report") {
  EvalReport r;
  const std::vector<int> labels{0, 0, 1, 1}, preds{0, 1, 1, 1};
  score(r, preds, labels, 2);
  CHECK(r.global == 0.75);
  CHECK(r.n_test == 4);
  CHECK(r.per_state.at(0) == 0.5);
  CHECK(r.confusion.rates(0, 1) == 0.5);
}

}
