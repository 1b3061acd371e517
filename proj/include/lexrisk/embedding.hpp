#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexrisk/corpus.hpp"
#include "lexrisk/matrix.hpp"
#include "lexrisk/random.hpp"

namespace lexrisk {

enum class Architecture : std::uint8_t { dm = 0, dbow = 1 };
enum class Objective : std::uint8_t { neg = 0, hs = 1 };
enum class Combine : std::uint8_t { concat = 0, mean = 1 };

std::string_view to_string(Architecture a) noexcept;
std::string_view to_string(Objective o) noexcept;
std::string_view to_string(Combine c) noexcept;
Architecture architecture_from_string(std::string_view s);
Objective objective_from_string(std::string_view s);
Combine combine_from_string(std::string_view s);

struct Hyperparams {
  Architecture architecture = Architecture::dm;
  Objective objective = Objective::neg;
  std::uint32_t negative = 10;  // K
  double subsample = 1e-6;      // discard threshold t; 0 disables
  std::uint32_t window = 10;    // n words each side
  std::uint32_t dim = 100;
  std::uint64_t min_count = 5;
  Combine combine = Combine::concat;  // DM only
  std::uint32_t epochs = 20;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  std::uint64_t seed = 1;
  double noise_exponent = kDefaultNoiseExponent;
  bool lowercase = true;

  void validate() const;

  /// Width of the layer fed to the output weights: (2n+1)*dim for DM concat,
  /// dim otherwise.
  std::size_t hidden_width() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Binary code tree over the vocabulary. Internal node k owns output row k.
struct HuffmanTree {
  // Root-first internal-node rows and branch bits for each leaf.
  std::vector<std::vector<std::uint32_t>> points;
  std::vector<std::vector<std::uint8_t>> codes;
  std::size_t internal_nodes = 0;
};

HuffmanTree build_huffman(std::span<const std::uint64_t> counts);

/// Paragraph-vector model. `words` carries one extra trailing row, the padding
/// token used for window slots that fall outside the paragraph in concat mode.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;

  const Hyperparams& hyperparams() const noexcept { return hyperparams_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const NoiseTable& noise() const noexcept { return noise_; }
  const std::optional<HuffmanTree>& huffman() const noexcept { return huffman_; }

  const Matrix& words() const noexcept { return words_; }
  const Matrix& output() const noexcept { return output_; }
  const Matrix& docs() const noexcept { return docs_; }
  Matrix& words() noexcept { return words_; }
  Matrix& output() noexcept { return output_; }
  Matrix& docs() noexcept { return docs_; }

  std::size_t dim() const noexcept { return hyperparams_.dim; }
  std::size_t num_docs() const noexcept { return docs_.rows(); }
  TokenId pad_index() const noexcept { return static_cast<TokenId>(vocab_.size()); }

  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  void set_doc_ids(std::vector<std::string> ids);

  /// Per-token discard probability at the configured threshold.
  const std::vector<double>& discard() const noexcept { return discard_; }

 private:
  friend EmbeddingModel init_model(Vocabulary, std::size_t, const Hyperparams&);
  friend EmbeddingModel deserialize_model(std::string_view);
  void derive_tables();

  Hyperparams hyperparams_;
  Vocabulary vocab_;
  NoiseTable noise_;
  std::optional<HuffmanTree> huffman_;
  std::vector<double> discard_;
  std::vector<std::string> doc_ids_;
  Matrix words_;
  Matrix output_;
  Matrix docs_;
};

/// Word and doc rows uniform in [-0.5/dim, 0.5/dim] from the seed; output
/// weights zero; Huffman tree from vocabulary counts under HS.
EmbeddingModel init_model(Vocabulary vocab, std::size_t num_paragraphs, const Hyperparams& hp);

/// One prediction instance. `offsets[i]` is the signed distance of
/// `context[i]` from the target position (never 0).
struct ContextSample {
  TokenId target = 0;
  std::vector<TokenId> context;
  std::vector<int> offsets;
  std::size_t doc = 0;
};

/// Window around position `i` of `tokens` for paragraph `doc`.
ContextSample make_context(std::span<const TokenId> tokens, std::size_t i, std::size_t window,
                           std::size_t doc);

/// Hidden layer in double precision: concat or mean of the doc row and
/// context word rows under DM; the doc row alone under DBOW.
std::vector<double> hidden_layer(const EmbeddingModel& model, const ContextSample& sample);

/// Gradient of a scalar with respect to the hidden layer, routed back to the
/// rows that formed it.
struct InputGradients {
  std::vector<double> doc;
  std::vector<std::pair<TokenId, std::vector<double>>> words;  // one entry per slot
};

InputGradients route_hidden_gradient(const EmbeddingModel& model, const ContextSample& sample,
                                     std::span<const double> grad_hidden);

/// Full softmax over per-word output rows. Desk-scale only.
std::vector<double> softmax_distribution(const EmbeddingModel& model, const ContextSample& sample);
double softmax_probability(const EmbeddingModel& model, const ContextSample& sample, TokenId target);

struct NegGradients {
  double objective = 0.0;
  std::vector<double> hidden;
  std::vector<double> target;
  std::vector<std::vector<double>> negatives;
};

/// log sigma(v'_t . h) + sum_i log sigma(-v'_{n_i} . h) and its exact partials.
NegGradients neg_objective_and_gradients(std::span<const double> hidden,
                                         std::span<const double> target_output,
                                         const std::vector<std::span<const double>>& negative_outputs);
NegGradients neg_objective_and_gradients(const EmbeddingModel& model, const ContextSample& sample,
                                         std::span<const TokenId> negatives);

struct HsGradients {
  double probability = 0.0;
  double log_probability = 0.0;
  std::vector<double> hidden;
  std::vector<std::vector<double>> nodes;  // parallel to the path
  std::vector<std::uint32_t> path;
};

/// Product of sigma(+-v'_node . h) along the code path; bit 0 takes the
/// positive sign. Gradients are of the log probability.
HsGradients hs_probability_and_gradients(std::span<const double> hidden,
                                         const std::vector<std::span<const double>>& node_outputs,
                                         std::span<const std::uint8_t> code);
HsGradients hs_probability_and_gradients(const EmbeddingModel& model, const ContextSample& sample,
                                         TokenId target);

/// Survivors of per-occurrence subsampling, redrawn on every call.
void subsample(const EmbeddingModel& model, std::span<const TokenId> doc, Rng& rng, std::vector<TokenId>& out);

std::vector<TokenId> draw_negatives(const NoiseTable& noise, std::size_t k, TokenId exclude, Rng& rng);

struct EpochStats {
  std::uint32_t epoch = 0;
  double mean_objective = 0.0;  // NEG objective or HS log-probability per update
  std::uint64_t updates = 0;
  double learning_rate = 0.0;  // at epoch end
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// SGD over every surviving position of every paragraph, for the configured
/// number of epochs. `docs[i]` trains row i of the doc matrix.
std::vector<EpochStats> train(EmbeddingModel& model, std::span<const std::vector<TokenId>> docs,
                              const EpochCallback& on_epoch = {});

struct InferOptions {
  std::uint32_t epochs = 0;  // 0 means the model's training epochs
  std::uint64_t seed = 1;
  // Train a private copy of the paragraph's word rows alongside the doc
  // vector. The model itself is never written either way.
  bool update_words = false;
};

/// Fits a fresh doc vector for `tokens` with word and output weights fixed.
std::vector<float> infer_vector(const EmbeddingModel& model, std::span<const TokenId> tokens,
                                const InferOptions& options);

struct Neighbor {
  std::string token;
  double cosine = 0.0;
};

std::vector<Neighbor> most_similar(const EmbeddingModel& model, std::string_view query, std::size_t k);

double cosine(std::span<const float> a, std::span<const float> b);

// Model container: "LXRMODEL", format version, hyperparams, vocabulary, doc
// ids, then W, O, D as row-major little-endian float32.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const EmbeddingModel& model);
EmbeddingModel deserialize_model(std::string_view bytes);
void save_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(const std::string& path);

/// Mixes a base seed with a stream id so independent consumers get
/// independent generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lexrisk
