#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "coal/sparse_vector.hpp"

namespace coal {

// Labels are zero-based internally and one-based in every text format.
using Label = std::size_t;

// Costs for K labels; only observed entries carry meaning. Observed costs lie in [0,1].
class CostVector {
 public:
  CostVector() = default;
  explicit CostVector(std::size_t num_labels);

  // Fully observed vector. Throws ConfigError if a cost is outside [0,1].
  static CostVector observed_all(std::vector<double> costs);

  std::size_t size() const { return costs_.size(); }
  bool observed(Label y) const { return observed_.at(y); }
  double cost(Label y) const { return costs_.at(y); }
  bool all_observed() const;

  void set(Label y, double cost);

  friend bool operator==(const CostVector&, const CostVector&) = default;

 private:
  std::vector<double> costs_;
  std::vector<bool> observed_;
};

struct LabeledExample {
  SparseVector features;
  CostVector costs;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

// Parses "y1:c1 [y2:c2 ...] | i1:v1 [i2:v2 ...]" with labels in 1..K.
// Throws ParseError carrying line_number and the 1-based column of the bad token.
LabeledExample parse_example(std::string_view line, std::size_t num_labels, std::size_t line_number = 0);

// Shortest string that parses back to v.
std::string format_double(double v);

// Inverse of parse_example; doubles are printed in shortest round-trip form.
std::string format_example(const LabeledExample& example);

// Reads one example per non-blank line. num_labels == 0 infers K from the largest label present.
std::vector<LabeledExample> read_dataset(std::istream& in, std::size_t num_labels = 0);
void write_dataset(std::ostream& out, const std::vector<LabeledExample>& examples);

// Rooted label tree. Label y corresponds to node leaf_labels[y].
class HierarchySpec {
 public:
  using Node = long long;

  HierarchySpec(std::map<Node, Node> parent, std::vector<Node> leaf_labels);

  std::size_t num_labels() const { return leaf_labels_.size(); }
  Node label_node(Label y) const { return leaf_labels_.at(y); }
  Node root() const { return root_; }

  // Number of edges on the unique path between two nodes.
  std::size_t distance(Node a, Node b) const;
  std::size_t max_label_distance() const;

 private:
  std::map<Node, Node> parent_;
  std::map<Node, std::size_t> depth_;
  std::vector<Node> leaf_labels_;
  Node root_ = 0;
};

// "node_id parent_id" per line, root maps to itself. Label y (1-based) is node id y.
HierarchySpec read_hierarchy(std::istream& in, std::size_t num_labels);

// cost(y) = scale * distance(y, true_label); throws ConfigError if any cost exceeds 1.
CostVector tree_distance_costs(const HierarchySpec& h, Label true_label, double scale);

// Per-round query indicators with the two label-effort counters.
class QueryLog {
 public:
  QueryLog() = default;
  explicit QueryLog(std::size_t num_labels) : num_labels_(num_labels) {}

  void record(const std::vector<bool>& queried);

  std::size_t rounds() const { return masks_.size(); }
  // Examples with at least one query.
  std::size_t l1() const { return l1_; }
  // Total (example, label) queries.
  std::size_t l2() const { return l2_; }
  const std::vector<bool>& mask(std::size_t round_index) const { return masks_.at(round_index); }

 private:
  std::size_t num_labels_ = 0;
  std::vector<std::vector<bool>> masks_;
  std::size_t l1_ = 0;
  std::size_t l2_ = 0;
};

}  // namespace coal
