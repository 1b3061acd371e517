#include <algorithm>
#include <cmath>
#include <string>

#include "lexrisk/embedding.hpp"
#include "lexrisk/error.hpp"
#include "sigmoid.hpp"

namespace lexrisk {

using detail::dot;
using detail::log_sigmoid;
using detail::sigmoid;

ContextSample make_context(std::span<const TokenId> tokens, std::size_t i, std::size_t window,
                           std::size_t doc) {
  require(i < tokens.size(), "context position out of range");
  ContextSample s;
  s.target = tokens[i];
  s.doc = doc;
  const auto lo = i >= window ? i - window : 0;
  const auto hi = std::min(tokens.size(), i + window + 1);
  for (std::size_t j = lo; j < hi; ++j) {
    if (j == i) continue;
    s.context.push_back(tokens[j]);
    s.offsets.push_back(static_cast<int>(j) - static_cast<int>(i));
  }
  return s;
}

namespace {

void check_sample(const EmbeddingModel& m, const ContextSample& s) {
  require(s.doc < m.num_docs(), "doc index out of range");
  require(s.context.size() == s.offsets.size(), "context and offsets differ in length");
  const auto n = static_cast<int>(m.hyperparams().window);
  require(s.context.size() <= 2 * static_cast<std::size_t>(n), "context larger than the window");
  for (std::size_t i = 0; i < s.context.size(); ++i) {
    require(s.context[i] < m.vocab().size(), "context token out of range");
    require(s.offsets[i] != 0 && std::abs(s.offsets[i]) <= n, "context offset outside the window");
  }
}

// Slot j of the concat layout covers offset j-n for j < n and j-n+1 after.
int slot_offset(std::size_t slot, int window) {
  const int j = static_cast<int>(slot);
  return j < window ? j - window : j - window + 1;
}

TokenId slot_token(const EmbeddingModel& m, const ContextSample& s, std::size_t slot) {
  const int off = slot_offset(slot, static_cast<int>(m.hyperparams().window));
  for (std::size_t i = 0; i < s.offsets.size(); ++i)
    if (s.offsets[i] == off) return s.context[i];
  return m.pad_index();
}

std::vector<std::span<const double>> as_spans(const std::vector<std::vector<double>>& rows) {
  std::vector<std::span<const double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r);
  return out;
}

std::vector<double> to_double(std::span<const float> row) { return {row.begin(), row.end()}; }

}  // namespace

std::vector<double> hidden_layer(const EmbeddingModel& m, const ContextSample& s) {
  check_sample(m, s);
  const auto& hp = m.hyperparams();
  const std::size_t dim = hp.dim;
  const auto doc = m.docs().row(s.doc);
  if (hp.architecture == Architecture::dbow) return to_double(doc);

  std::vector<double> h(hp.hidden_width(), 0.0);
  if (hp.combine == Combine::concat) {
    std::copy(doc.begin(), doc.end(), h.begin());
    for (std::size_t slot = 0; slot < 2 * hp.window; ++slot) {
      const auto row = m.words().row(slot_token(m, s, slot));
      std::copy(row.begin(), row.end(), h.begin() + static_cast<std::ptrdiff_t>((slot + 1) * dim));
    }
    return h;
  }
  for (std::size_t c = 0; c < dim; ++c) h[c] = doc[c];
  for (TokenId w : s.context) {
    const auto row = m.words().row(w);
    for (std::size_t c = 0; c < dim; ++c) h[c] += row[c];
  }
  const double count = 1.0 + static_cast<double>(s.context.size());
  for (auto& x : h) x /= count;
  return h;
}

InputGradients route_hidden_gradient(const EmbeddingModel& m, const ContextSample& s,
                                     std::span<const double> grad_hidden) {
  check_sample(m, s);
  const auto& hp = m.hyperparams();
  require(grad_hidden.size() == hp.hidden_width(), "hidden gradient has the wrong width");
  const std::size_t dim = hp.dim;
  InputGradients g;
  if (hp.architecture == Architecture::dbow) {
    g.doc.assign(grad_hidden.begin(), grad_hidden.end());
    return g;
  }
  if (hp.combine == Combine::concat) {
    g.doc.assign(grad_hidden.begin(), grad_hidden.begin() + static_cast<std::ptrdiff_t>(dim));
    for (std::size_t slot = 0; slot < 2 * hp.window; ++slot) {
      const auto first = grad_hidden.begin() + static_cast<std::ptrdiff_t>((slot + 1) * dim);
      g.words.emplace_back(slot_token(m, s, slot), std::vector<double>(first, first + static_cast<std::ptrdiff_t>(dim)));
    }
    return g;
  }
  const double count = 1.0 + static_cast<double>(s.context.size());
  std::vector<double> share(dim);
  for (std::size_t c = 0; c < dim; ++c) share[c] = grad_hidden[c] / count;
  g.doc = share;
  for (TokenId w : s.context) g.words.emplace_back(w, share);
  return g;
}

std::vector<double> softmax_distribution(const EmbeddingModel& m, const ContextSample& s) {
  const auto& hp = m.hyperparams();
  require(hp.objective == Objective::neg, "exact softmax needs per-word output rows (NEG model)");
  require(hp.architecture != Architecture::dm || !s.context.empty(), "DM prediction needs a non-empty context");
  const auto h = hidden_layer(m, s);
  const std::size_t v = m.vocab().size();
  std::vector<double> p(v);
  double max_score = -INFINITY;
  for (std::size_t w = 0; w < v; ++w) {
    p[w] = dot(h, m.output().row(w));
    max_score = std::max(max_score, p[w]);
  }
  double z = 0.0;
  for (auto& x : p) {
    x = std::exp(x - max_score);
    z += x;
  }
  for (auto& x : p) x /= z;
  return p;
}

double softmax_probability(const EmbeddingModel& m, const ContextSample& s, TokenId target) {
  require(target < m.vocab().size(), "target out of range");
  return softmax_distribution(m, s)[target];
}

NegGradients neg_objective_and_gradients(std::span<const double> hidden,
                                         std::span<const double> target_output,
                                         const std::vector<std::span<const double>>& negative_outputs) {
  require(!negative_outputs.empty(), "negative sampling objective needs K >= 1");
  const std::size_t width = hidden.size();
  require(target_output.size() == width, "target row width mismatch");

  NegGradients r;
  r.hidden.assign(width, 0.0);

  const double xt = dot(hidden, target_output);
  r.objective = log_sigmoid(xt);
  const double gt = 1.0 - sigmoid(xt);
  r.target.resize(width);
  for (std::size_t c = 0; c < width; ++c) {
    r.hidden[c] += gt * target_output[c];
    r.target[c] = gt * hidden[c];
  }

  for (const auto& neg : negative_outputs) {
    require(neg.size() == width, "negative row width mismatch");
    const double xn = dot(hidden, neg);
    r.objective += log_sigmoid(-xn);
    const double gn = -sigmoid(xn);
    auto& out = r.negatives.emplace_back(width);
    for (std::size_t c = 0; c < width; ++c) {
      r.hidden[c] += gn * neg[c];
      out[c] = gn * hidden[c];
    }
  }
  return r;
}

NegGradients neg_objective_and_gradients(const EmbeddingModel& m, const ContextSample& s,
                                         std::span<const TokenId> negatives) {
  require(m.hyperparams().objective == Objective::neg, "model was not built for negative sampling");
  require(s.target < m.vocab().size(), "target out of range");
  const auto h = hidden_layer(m, s);
  const auto target = to_double(m.output().row(s.target));
  std::vector<std::vector<double>> rows;
  for (TokenId n : negatives) {
    require(n < m.vocab().size(), "negative out of range");
    require(n != s.target, "negative sample equals the target");
    rows.push_back(to_double(m.output().row(n)));
  }
  return neg_objective_and_gradients(h, target, as_spans(rows));
}

HsGradients hs_probability_and_gradients(std::span<const double> hidden,
                                         const std::vector<std::span<const double>>& node_outputs,
                                         std::span<const std::uint8_t> code) {
  require(node_outputs.size() == code.size(), "path and code lengths differ");
  const std::size_t width = hidden.size();
  HsGradients r;
  r.hidden.assign(width, 0.0);
  for (std::size_t d = 0; d < code.size(); ++d) {
    const auto& node = node_outputs[d];
    require(node.size() == width, "node row width mismatch");
    const double x = dot(hidden, node);
    const double label = code[d] == 0 ? 1.0 : 0.0;
    r.log_probability += log_sigmoid(code[d] == 0 ? x : -x);
    const double g = label - sigmoid(x);
    auto& out = r.nodes.emplace_back(width);
    for (std::size_t c = 0; c < width; ++c) {
      r.hidden[c] += g * node[c];
      out[c] = g * hidden[c];
    }
  }
  r.probability = std::exp(r.log_probability);
  return r;
}

HsGradients hs_probability_and_gradients(const EmbeddingModel& m, const ContextSample& s, TokenId target) {
  if (!m.huffman()) fail(ErrorCode::invalid_argument, "model has no Huffman tree (not an HS model)");
  require(target < m.vocab().size(), "target out of range");
  const auto h = hidden_layer(m, s);
  const auto& points = m.huffman()->points[target];
  std::vector<std::vector<double>> rows;
  for (auto p : points) rows.push_back(to_double(m.output().row(p)));
  auto r = hs_probability_and_gradients(h, as_spans(rows), m.huffman()->codes[target]);
  r.path = points;
  return r;
}

std::vector<TokenId> draw_negatives(const NoiseTable& noise, std::size_t k, TokenId exclude, Rng& rng) {
  require(noise.size() >= 2, "need at least two vocabulary entries to sample negatives");
  std::vector<TokenId> out;
  out.reserve(k);
  while (out.size() < k) {
    const TokenId t = noise.draw(rng);
    if (t != exclude) out.push_back(t);
  }
  return out;
}

}  // namespace lexrisk
