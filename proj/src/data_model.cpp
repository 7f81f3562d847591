#include "coal/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "coal/errors.hpp"

namespace coal {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

CostVector::CostVector(std::size_t num_labels) : costs_(num_labels, 0.0), observed_(num_labels, false) {}

CostVector CostVector::observed_all(std::vector<double> costs) {
  CostVector out(costs.size());
  for (Label y = 0; y < costs.size(); ++y) out.set(y, costs[y]);
  return out;
}

bool CostVector::all_observed() const {
  return std::all_of(observed_.begin(), observed_.end(), [](bool b) { return b; });
}

void CostVector::set(Label y, double cost) {
  if (!(cost >= 0.0 && cost <= 1.0)) {
    throw ConfigError("cost " + std::to_string(cost) + " outside [0,1] for label " + std::to_string(y + 1));
  }
  costs_.at(y) = cost;
  observed_.at(y) = true;
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> split_tokens(std::string_view s, std::size_t offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back({s.substr(start, i - start), offset + start + 1});
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  // from_chars rejects a leading '+', which some writers emit.
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::pair<std::string_view, std::string_view> split_pair(const Token& tok, std::size_t line) {
  const auto colon = tok.text.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError(line, tok.column, "expected 'a:b', got '" + std::string(tok.text) + "'");
  }
  return {tok.text.substr(0, colon), tok.text.substr(colon + 1)};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

LabeledExample parse_example(std::string_view line, std::size_t num_labels, std::size_t line_number) {
  const auto bar = line.find('|');
  if (bar == std::string_view::npos) {
    throw ParseError(line_number, line.size() + 1, "missing '|' separating costs from features");
  }
  const auto label_tokens = split_tokens(line.substr(0, bar), 0);
  const auto feature_tokens = split_tokens(line.substr(bar + 1), bar + 1);
  if (label_tokens.empty()) throw ParseError(line_number, 1, "no label costs before '|'");

  LabeledExample ex{SparseVector{}, CostVector(num_labels)};
  for (const auto& tok : label_tokens) {
    auto [ls, cs] = split_pair(tok, line_number);
    unsigned long long label = 0;
    double cost = 0.0;
    if (!parse_number(ls, label)) {
      throw ParseError(line_number, tok.column, "bad label '" + std::string(ls) + "'");
    }
    if (label < 1 || label > num_labels) {
      throw ParseError(line_number, tok.column,
                       "label " + std::to_string(label) + " outside 1.." + std::to_string(num_labels));
    }
    if (!parse_number(cs, cost) || !std::isfinite(cost)) {
      throw ParseError(line_number, tok.column + ls.size() + 1, "bad cost '" + std::string(cs) + "'");
    }
    if (cost < 0.0 || cost > 1.0) {
      throw ParseError(line_number, tok.column + ls.size() + 1,
                       "cost " + std::string(cs) + " outside [0,1]");
    }
    if (ex.costs.observed(label - 1)) {
      throw ParseError(line_number, tok.column, "label " + std::to_string(label) + " listed twice");
    }
    ex.costs.set(label - 1, cost);
  }

  std::vector<FeatureEntry> entries;
  entries.reserve(feature_tokens.size());
  for (const auto& tok : feature_tokens) {
    auto [is, vs] = split_pair(tok, line_number);
    unsigned long long index = 0;
    double value = 0.0;
    if (!parse_number(is, index)) {
      throw ParseError(line_number, tok.column, "bad feature index '" + std::string(is) + "'");
    }
    if (!parse_number(vs, value) || !std::isfinite(value)) {
      throw ParseError(line_number, tok.column + is.size() + 1, "bad feature value '" + std::string(vs) + "'");
    }
    entries.push_back({static_cast<std::size_t>(index), value});
  }
  ex.features = SparseVector::from_entries(std::move(entries));
  return ex;
}

std::string format_example(const LabeledExample& ex) {
  std::string out;
  for (Label y = 0; y < ex.costs.size(); ++y) {
    if (!ex.costs.observed(y)) continue;
    if (!out.empty()) out += ' ';
    out += std::to_string(y + 1) + ':' + format_double(ex.costs.cost(y));
  }
  out += " |";
  for (const auto& e : ex.features.entries()) {
    out += ' ' + std::to_string(e.index) + ':' + format_double(e.value);
  }
  return out;
}

std::vector<LabeledExample> read_dataset(std::istream& in, std::size_t num_labels) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.emplace_back(n, line);
  }
  if (num_labels == 0) {
    // Largest label id before the bar; malformed tokens are reported by the real parse.
    for (const auto& [n, text] : lines) {
      const auto bar = text.find('|');
      for (const auto& tok : split_tokens(std::string_view(text).substr(0, bar), 0)) {
        unsigned long long label = 0;
        const auto colon = tok.text.find(':');
        if (colon != std::string_view::npos && parse_number(tok.text.substr(0, colon), label)) {
          num_labels = std::max<std::size_t>(num_labels, label);
        }
      }
    }
    if (num_labels == 0) num_labels = 1;
  }
  std::vector<LabeledExample> out;
  out.reserve(lines.size());
  for (const auto& [n, text] : lines) out.push_back(parse_example(text, num_labels, n));
  return out;
}

void write_dataset(std::ostream& out, const std::vector<LabeledExample>& examples) {
  for (const auto& ex : examples) out << format_example(ex) << '\n';
}

HierarchySpec::HierarchySpec(std::map<Node, Node> parent, std::vector<Node> leaf_labels)
    : parent_(std::move(parent)), leaf_labels_(std::move(leaf_labels)) {
  std::size_t roots = 0;
  for (const auto& [node, p] : parent_) {
    if (node == p) {
      ++roots;
      root_ = node;
    } else if (!parent_.contains(p)) {
      throw ConfigError("hierarchy node " + std::to_string(node) + " has unknown parent " + std::to_string(p));
    }
  }
  if (roots != 1) throw ConfigError("hierarchy must have exactly one root, found " + std::to_string(roots));

  // Depths by walking to the root; a walk longer than the node count means a cycle.
  for (const auto& [node, p] : parent_) {
    std::size_t depth = 0;
    Node cur = node;
    while (parent_.at(cur) != cur) {
      cur = parent_.at(cur);
      if (++depth > parent_.size()) {
        throw ConfigError("hierarchy contains a cycle through node " + std::to_string(node));
      }
    }
    depth_[node] = depth;
  }
  std::set<Node> seen;
  for (Node n : leaf_labels_) {
    if (!parent_.contains(n)) throw ConfigError("label node " + std::to_string(n) + " is not in the hierarchy");
    if (!seen.insert(n).second) throw ConfigError("label node " + std::to_string(n) + " listed twice");
  }
}

std::size_t HierarchySpec::distance(Node a, Node b) const {
  std::size_t da = depth_.at(a);
  std::size_t db = depth_.at(b);
  std::size_t edges = 0;
  while (da > db) { a = parent_.at(a); --da; ++edges; }
  while (db > da) { b = parent_.at(b); --db; ++edges; }
  while (a != b) {
    a = parent_.at(a);
    b = parent_.at(b);
    edges += 2;
  }
  return edges;
}

std::size_t HierarchySpec::max_label_distance() const {
  std::size_t best = 0;
  for (std::size_t i = 0; i < leaf_labels_.size(); ++i) {
    for (std::size_t j = i + 1; j < leaf_labels_.size(); ++j) {
      best = std::max(best, distance(leaf_labels_[i], leaf_labels_[j]));
    }
  }
  return best;
}

HierarchySpec read_hierarchy(std::istream& in, std::size_t num_labels) {
  std::map<HierarchySpec::Node, HierarchySpec::Node> parent;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto toks = split_tokens(line, 0);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw ParseError(n, toks.front().column, "expected 'node_id parent_id'");
    long long node = 0;
    long long par = 0;
    if (!parse_number(toks[0].text, node)) throw ParseError(n, toks[0].column, "bad node id");
    if (!parse_number(toks[1].text, par)) throw ParseError(n, toks[1].column, "bad parent id");
    if (!parent.emplace(node, par).second) {
      throw ParseError(n, toks[0].column, "node " + std::to_string(node) + " defined twice");
    }
  }
  std::vector<HierarchySpec::Node> labels;
  for (std::size_t y = 1; y <= num_labels; ++y) labels.push_back(static_cast<HierarchySpec::Node>(y));
  return HierarchySpec(std::move(parent), std::move(labels));
}

CostVector tree_distance_costs(const HierarchySpec& h, Label true_label, double scale) {
  if (!(scale > 0.0)) throw ConfigError("tree-distance scale must be positive");
  if (true_label >= h.num_labels()) throw ConfigError("true label outside the hierarchy's labels");
  CostVector out(h.num_labels());
  const auto truth = h.label_node(true_label);
  for (Label y = 0; y < h.num_labels(); ++y) {
    const double c = scale * static_cast<double>(h.distance(h.label_node(y), truth));
    if (c > 1.0 + 1e-12) {
      throw ConfigError("tree-distance scale " + std::to_string(scale) + " gives cost " + std::to_string(c) +
                        " above 1");
    }
    out.set(y, std::min(c, 1.0));
  }
  return out;
}

void QueryLog::record(const std::vector<bool>& queried) {
  if (queried.size() != num_labels_) throw ContractError("query mask has the wrong number of labels");
  const auto count = static_cast<std::size_t>(std::count(queried.begin(), queried.end(), true));
  masks_.push_back(queried);
  l2_ += count;
  if (count > 0) ++l1_;
}

}  // namespace coal
