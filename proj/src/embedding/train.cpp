#include <algorithm>
#include <string>

#include "lexrisk/embedding.hpp"
#include "lexrisk/error.hpp"
#include "sigmoid.hpp"

namespace lexrisk {
namespace {

using detail::log_sigmoid;
using detail::sigmoid;

float dotf(std::span<const float> a, std::span<const float> b) {
  float s = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(float g, std::span<const float> x, std::span<float> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += g * x[i];
}

// One SGD position. Reads weights from `words`/`output` and writes through the
// optional mutable pointers, so inference can run against frozen weights.
class SgdStep {
 public:
  SgdStep(const EmbeddingModel& model, const Matrix& words, Matrix* words_rw, Matrix* output_rw)
      : model_(model), hp_(model.hyperparams()), words_(words), words_rw_(words_rw),
        output_(model.output()), output_rw_(output_rw) {
    hidden_.resize(hp_.hidden_width());
    grad_.resize(hp_.hidden_width());
    slots_.resize(2 * hp_.window);
  }

  // Returns the objective evaluated before the update.
  double operator()(std::span<float> doc, std::span<const TokenId> seq, std::size_t i, float lr, Rng& rng) {
    const std::size_t dim = hp_.dim;
    const TokenId target = seq[i];
    std::size_t context_count = 0;

    // Hidden layer.
    if (hp_.architecture == Architecture::dbow) {
      std::copy(doc.begin(), doc.end(), hidden_.begin());
    } else {
      const int n = static_cast<int>(hp_.window);
      for (std::size_t slot = 0; slot < slots_.size(); ++slot) {
        const int j = static_cast<int>(slot);
        const long pos = static_cast<long>(i) + (j < n ? j - n : j - n + 1);
        if (pos >= 0 && pos < static_cast<long>(seq.size())) {
          slots_[slot] = seq[static_cast<std::size_t>(pos)];
          ++context_count;
        } else {
          slots_[slot] = model_.pad_index();
        }
      }
      if (hp_.combine == Combine::concat) {
        std::copy(doc.begin(), doc.end(), hidden_.begin());
        for (std::size_t slot = 0; slot < slots_.size(); ++slot) {
          const auto row = words_.row(slots_[slot]);
          std::copy(row.begin(), row.end(), hidden_.begin() + static_cast<std::ptrdiff_t>((slot + 1) * dim));
        }
      } else {
        std::copy(doc.begin(), doc.end(), hidden_.begin());
        for (TokenId w : slots_)
          if (w != model_.pad_index()) axpy(1.0f, words_.row(w), hidden_);
        const float inv = 1.0f / static_cast<float>(1 + context_count);
        for (auto& x : hidden_) x *= inv;
      }
    }

    std::fill(grad_.begin(), grad_.end(), 0.0f);
    double objective = 0.0;
    auto term = [&](std::size_t row, bool label) {
      const auto out = output_.row(row);
      const double x = dotf(hidden_, out);
      objective += log_sigmoid(label ? x : -x);
      const auto g = static_cast<float>(((label ? 1.0 : 0.0) - sigmoid(x)) * lr);
      axpy(g, out, grad_);
      if (output_rw_) axpy(g, hidden_, output_rw_->row(row));
    };

    if (hp_.objective == Objective::neg) {
      term(target, true);
      for (std::uint32_t k = 0; k < hp_.negative; ++k) {
        TokenId neg = model_.noise().draw(rng);
        while (neg == target) neg = model_.noise().draw(rng);
        term(neg, false);
      }
    } else {
      const auto& tree = *model_.huffman();
      const auto& points = tree.points[target];
      const auto& codes = tree.codes[target];
      for (std::size_t d = 0; d < points.size(); ++d) term(points[d], codes[d] == 0);
    }

    // Route the hidden gradient back to its inputs.
    if (hp_.architecture == Architecture::dbow) {
      axpy(1.0f, grad_, doc);
    } else if (hp_.combine == Combine::concat) {
      axpy(1.0f, std::span<const float>(grad_).first(dim), doc);
      if (words_rw_) {
        for (std::size_t slot = 0; slot < slots_.size(); ++slot)
          axpy(1.0f, std::span<const float>(grad_).subspan((slot + 1) * dim, dim), words_rw_->row(slots_[slot]));
      }
    } else {
      const float share = 1.0f / static_cast<float>(1 + context_count);
      axpy(share, grad_, doc);
      if (words_rw_) {
        for (TokenId w : slots_)
          if (w != model_.pad_index()) axpy(share, grad_, words_rw_->row(w));
      }
    }
    return objective;
  }

 private:
  const EmbeddingModel& model_;
  const Hyperparams& hp_;
  const Matrix& words_;
  Matrix* words_rw_;
  const Matrix& output_;
  Matrix* output_rw_;
  std::vector<float> hidden_;
  std::vector<float> grad_;
  std::vector<TokenId> slots_;
};

void check_tokens(const EmbeddingModel& m, std::span<const TokenId> tokens) {
  for (TokenId t : tokens) require(t < m.vocab().size(), "token index outside the vocabulary");
}

float scheduled_rate(const Hyperparams& hp, std::uint64_t done, std::uint64_t total) {
  const double progress = total == 0 ? 0.0 : static_cast<double>(done) / static_cast<double>(total);
  return static_cast<float>(hp.lr_start - (hp.lr_start - hp.lr_end) * std::min(progress, 1.0));
}

}  // namespace

void subsample(const EmbeddingModel& m, std::span<const TokenId> doc, Rng& rng, std::vector<TokenId>& out) {
  out.clear();
  const auto& discard = m.discard();
  for (TokenId t : doc) {
    const double p = discard[t];
    if (p > 0.0 && rng.uniform() < p) continue;
    out.push_back(t);
  }
}

std::vector<EpochStats> train(EmbeddingModel& model, std::span<const std::vector<TokenId>> docs,
                              const EpochCallback& on_epoch) {
  if (docs.empty()) fail(ErrorCode::invalid_argument, "cannot train on an empty dataset");
  require(docs.size() == model.num_docs(), "dataset size does not match the model's doc matrix");
  const auto& hp = model.hyperparams();
  if (hp.objective == Objective::neg)
    require(model.vocab().size() >= 2, "negative sampling needs at least two vocabulary entries");

  std::uint64_t per_epoch = 0;
  for (const auto& d : docs) {
    check_tokens(model, d);
    per_epoch += d.size();
  }
  const std::uint64_t total = per_epoch * hp.epochs;

  Rng rng(derive_seed(hp.seed, 1));
  SgdStep step(model, model.words(), &model.words(), &model.output());
  std::vector<TokenId> kept;
  std::vector<EpochStats> trace;
  std::uint64_t done = 0;
  float lr = static_cast<float>(hp.lr_start);

  for (std::uint32_t epoch = 0; epoch < hp.epochs; ++epoch) {
    double objective_sum = 0.0;
    std::uint64_t updates = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      lr = scheduled_rate(hp, done, total);
      done += docs[d].size();
      subsample(model, docs[d], rng, kept);
      auto doc = model.docs().row(d);
      for (std::size_t i = 0; i < kept.size(); ++i) {
        objective_sum += step(doc, kept, i, lr, rng);
        ++updates;
      }
    }
    EpochStats stats{epoch, updates ? objective_sum / static_cast<double>(updates) : 0.0, updates, lr};
    trace.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return trace;
}

std::vector<float> infer_vector(const EmbeddingModel& model, std::span<const TokenId> tokens,
                                const InferOptions& options) {
  if (tokens.empty())
    fail(ErrorCode::uninferable, "uninferable paragraph: no in-vocabulary tokens");
  check_tokens(model, tokens);
  const auto& hp = model.hyperparams();
  if (hp.objective == Objective::neg)
    require(model.vocab().size() >= 2, "negative sampling needs at least two vocabulary entries");

  const std::uint32_t epochs = options.epochs ? options.epochs : hp.epochs;
  const double half = 0.5 / hp.dim;
  Rng init(derive_seed(options.seed, 0));
  std::vector<float> doc(hp.dim);
  for (auto& x : doc) x = static_cast<float>(init.uniform(-half, half));

  // Scratch word rows only exist when the caller opts into updating them.
  std::optional<Matrix> scratch;
  if (options.update_words) scratch = model.words();
  const Matrix& words = scratch ? *scratch : model.words();
  SgdStep step(model, words, scratch ? &*scratch : nullptr, nullptr);

  Rng rng(derive_seed(options.seed, 1));
  std::vector<TokenId> kept;
  const std::uint64_t total = static_cast<std::uint64_t>(tokens.size()) * epochs;
  std::uint64_t done = 0;
  for (std::uint32_t epoch = 0; epoch < epochs; ++epoch) {
    const float lr = scheduled_rate(hp, done, total);
    done += tokens.size();
    subsample(model, tokens, rng, kept);
    for (std::size_t i = 0; i < kept.size(); ++i) step(doc, kept, i, lr, rng);
  }
  return doc;
}

}  // namespace lexrisk
