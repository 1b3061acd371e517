#include <algorithm>
#include <queue>
#include <string>
#include <tuple>

#include "lexrisk/embedding.hpp"
#include "lexrisk/error.hpp"

namespace lexrisk {

std::string_view to_string(Architecture a) noexcept { return a == Architecture::dm ? "dm" : "dbow"; }
std::string_view to_string(Objective o) noexcept { return o == Objective::neg ? "neg" : "hs"; }
std::string_view to_string(Combine c) noexcept { return c == Combine::concat ? "concat" : "mean"; }

Architecture architecture_from_string(std::string_view s) {
  if (s == "dm") return Architecture::dm;
  if (s == "dbow") return Architecture::dbow;
  fail(ErrorCode::invalid_argument, "unknown architecture: " + std::string(s));
}

Objective objective_from_string(std::string_view s) {
  if (s == "neg") return Objective::neg;
  if (s == "hs") return Objective::hs;
  fail(ErrorCode::invalid_argument, "unknown objective: " + std::string(s));
}

Combine combine_from_string(std::string_view s) {
  if (s == "concat") return Combine::concat;
  if (s == "mean") return Combine::mean;
  fail(ErrorCode::invalid_argument, "unknown combine mode: " + std::string(s));
}

void Hyperparams::validate() const {
  require(dim >= 1, "dim must be at least 1");
  require(window >= 1, "window must be at least 1");
  require(objective != Objective::neg || negative >= 1, "negative sampling needs K >= 1");
  require(subsample >= 0.0, "subsample threshold must be non-negative");
  require(min_count >= 1, "min_count must be at least 1");
  require(lr_start > 0.0 && lr_end >= 0.0, "learning rates must be positive");
  require(noise_exponent > 0.0, "noise exponent must be positive");
}

std::size_t Hyperparams::hidden_width() const {
  if (architecture == Architecture::dm && combine == Combine::concat)
    return (2 * static_cast<std::size_t>(window) + 1) * dim;
  return dim;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

HuffmanTree build_huffman(std::span<const std::uint64_t> counts) {
  HuffmanTree tree;
  const std::size_t leaves = counts.size();
  tree.points.resize(leaves);
  tree.codes.resize(leaves);
  if (leaves < 2) return tree;

  const std::size_t nodes = 2 * leaves - 1;
  std::vector<std::size_t> parent(nodes, 0);
  std::vector<std::uint8_t> bit(nodes, 0);

  // Min-heap on (count, node id); the id tie-break makes the tree a pure
  // function of the counts.
  using Entry = std::pair<std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t i = 0; i < leaves; ++i) heap.emplace(counts[i], i);
  std::size_t next = leaves;
  while (heap.size() > 1) {
    const auto [c0, n0] = heap.top();
    heap.pop();
    const auto [c1, n1] = heap.top();
    heap.pop();
    parent[n0] = next;
    parent[n1] = next;
    bit[n0] = 0;
    bit[n1] = 1;
    heap.emplace(c0 + c1, next);
    ++next;
  }
  const std::size_t root = nodes - 1;
  tree.internal_nodes = leaves - 1;
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    auto& points = tree.points[leaf];
    auto& codes = tree.codes[leaf];
    for (std::size_t n = leaf; n != root; n = parent[n]) {
      points.push_back(static_cast<std::uint32_t>(parent[n] - leaves));
      codes.push_back(bit[n]);
    }
    std::reverse(points.begin(), points.end());
    std::reverse(codes.begin(), codes.end());
  }
  return tree;
}

void EmbeddingModel::set_doc_ids(std::vector<std::string> ids) {
  require(ids.size() == docs_.rows(), "doc id count must match the doc matrix");
  doc_ids_ = std::move(ids);
}

void EmbeddingModel::derive_tables() {
  noise_ = NoiseTable(vocab_, hyperparams_.noise_exponent);
  if (hyperparams_.objective == Objective::hs) huffman_ = build_huffman(vocab_.counts());
  else huffman_.reset();
  discard_.resize(vocab_.size());
  for (TokenId i = 0; i < vocab_.size(); ++i)
    discard_[i] = discard_probability(vocab_.relative_frequency(i), hyperparams_.subsample);
}

EmbeddingModel init_model(Vocabulary vocab, std::size_t num_paragraphs, const Hyperparams& hp) {
  hp.validate();
  if (vocab.empty()) fail(ErrorCode::empty_vocabulary, "cannot build a model over an empty vocabulary");

  EmbeddingModel m;
  m.hyperparams_ = hp;
  m.vocab_ = std::move(vocab);
  m.derive_tables();

  const std::size_t v = m.vocab_.size();
  const double half = 0.5 / hp.dim;
  Rng rng(derive_seed(hp.seed, 0));
  m.words_ = Matrix(v + 1, hp.dim);
  for (auto& x : m.words_.values()) x = static_cast<float>(rng.uniform(-half, half));
  m.docs_ = Matrix(num_paragraphs, hp.dim);
  for (auto& x : m.docs_.values()) x = static_cast<float>(rng.uniform(-half, half));

  const std::size_t out_rows = hp.objective == Objective::neg ? v : m.huffman_->internal_nodes;
  m.output_ = Matrix(out_rows, hp.hidden_width());

  m.doc_ids_.resize(num_paragraphs);
  for (std::size_t i = 0; i < num_paragraphs; ++i) m.doc_ids_[i] = std::to_string(i);
  return m;
}

}  // namespace lexrisk
