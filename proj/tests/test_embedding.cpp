#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "lexrisk/embedding.hpp"
#include "lexrisk/error.hpp"
#include "lexrisk/synthetic.hpp"
#include "oracles.hpp"

using namespace lexrisk;
using namespace lexrisk::testing;

namespace {

Vocabulary counts_vocab(const std::vector<std::uint64_t>& counts) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    entries.emplace_back("w" + std::to_string(i), counts[i]);
    total += counts[i];
  }
  return Vocabulary::from_entries(entries, total, 1);
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.values().data(), b.values().data(), a.values().size() * sizeof(float)) == 0;
}

void randomize(EmbeddingModel& m, Rng& rng, double scale) {
  for (auto* mat : {&m.words(), &m.output(), &m.docs()})
    for (auto& x : mat->values()) x = static_cast<float>(rng.uniform(-scale, scale));
}

}  // namespace

TEST_CASE("init_model is seeded and shaped by the hyperparameters") {
  const auto vocab = counts_vocab({9, 7, 5, 3});
  Hyperparams hp;
  hp.dim = 8;
  hp.window = 2;
  const auto a = init_model(vocab, 3, hp);
  const auto b = init_model(vocab, 3, hp);
  CHECK(serialize_model(a) == serialize_model(b));
  CHECK(a.words().rows() == 5);  // |V| + padding row
  CHECK(a.output().cols() == (2 * 2 + 1) * 8);
  for (float x : a.output().values()) CHECK(x == 0.0f);
  for (float x : a.words().values()) CHECK(std::abs(x) <= 0.5f / 8);

  hp.combine = Combine::mean;
  CHECK(init_model(vocab, 3, hp).output().cols() == 8);
  hp.architecture = Architecture::dbow;
  hp.combine = Combine::concat;
  CHECK(init_model(vocab, 3, hp).output().cols() == 8);

  hp = {};
  hp.objective = Objective::hs;
  hp.dim = 4;
  const auto hs = init_model(counts_vocab({1, 1, 1, 1}), 1, hp);
  REQUIRE(hs.huffman().has_value());
  CHECK(hs.huffman()->internal_nodes == 3);
  CHECK(hs.output().rows() == 3);

  hp.dim = 0;
  CHECK_THROWS_AS(init_model(vocab, 1, hp), Error);
  CHECK_THROWS_AS(init_model(Vocabulary{}, 1, Hyperparams{}), Error);
}

TEST_CASE("init weights have mean zero within three standard errors") {
  Hyperparams hp;
  hp.dim = 50;
  std::vector<std::uint64_t> counts(200, 5);
  const auto m = init_model(counts_vocab(counts), 10, hp);
  double sum = 0.0;
  for (float x : m.words().values()) sum += x;
  const double n = static_cast<double>(m.words().values().size());
  const double half = 0.5 / hp.dim;
  const double standard_error = half / std::sqrt(3.0 * n);  // sd of U(-a,a) is a/sqrt(3)
  CHECK(std::abs(sum / n) < 3.0 * standard_error);
}

TEST_CASE("Huffman codes form a prefix tree over the vocabulary") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> counts(2 + rng.below(30));
    for (auto& c : counts) c = 1 + rng.below(100);
    const auto tree = build_huffman(counts);
    CHECK(tree.internal_nodes == counts.size() - 1);
    // Kraft equality holds for a full binary tree.
    double kraft = 0.0;
    for (const auto& code : tree.codes) kraft += std::ldexp(1.0, -static_cast<int>(code.size()));
    CHECK(kraft == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& points : tree.points) CHECK(points.front() == counts.size() - 2);
  }
}

TEST_CASE("exact softmax") {
  Hyperparams hp;
  hp.dim = 2;
  hp.window = 1;
  auto m = init_model(counts_vocab({5, 4, 3, 2, 1}), 2, hp);
  const std::vector<TokenId> seq{0, 1, 2};
  const auto sample = make_context(seq, 1, 1, 0);

  SUBCASE("zero output weights are uniform") {
    for (TokenId w = 0; w < 5; ++w) CHECK(softmax_probability(m, sample, w) == doctest::Approx(0.2));
  }
  SUBCASE("random model matches a direct evaluation") {
    Rng rng(4);
    randomize(m, rng, 1.0);
    // Hidden layer assembled by hand: [D[0], W[0], W[2]] for offsets -1, +1.
    std::vector<double> h;
    for (auto row : {m.docs().row(0), m.words().row(0), m.words().row(2)})
      for (float x : row) h.push_back(x);
    std::vector<double> e(5);
    double z = 0.0;
    for (TokenId w = 0; w < 5; ++w) {
      double s = 0.0;
      for (std::size_t c = 0; c < h.size(); ++c) s += m.output()(w, c) * h[c];
      e[w] = std::exp(s);
      z += e[w];
    }
    double total = 0.0;
    for (TokenId w = 0; w < 5; ++w) {
      const double p = softmax_probability(m, sample, w);
      CHECK(std::abs(p - e[w] / z) < 1e-12);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  SUBCASE("DM needs context") {
    ContextSample empty;
    empty.doc = 0;
    CHECK_THROWS_AS(softmax_probability(m, empty, 0), Error);
  }
}

TEST_CASE("exact softmax sums to one on random models") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Hyperparams hp;
    hp.dim = 1 + static_cast<std::uint32_t>(rng.below(8));
    hp.window = 1 + static_cast<std::uint32_t>(rng.below(3));
    hp.combine = rng.bernoulli(0.5) ? Combine::concat : Combine::mean;
    hp.architecture = rng.bernoulli(0.3) ? Architecture::dbow : Architecture::dm;
    std::vector<std::uint64_t> counts(2 + rng.below(19), 3);
    auto m = init_model(counts_vocab(counts), 2, hp);
    randomize(m, rng, 2.0);
    std::vector<TokenId> seq(6);
    for (auto& t : seq) t = static_cast<TokenId>(rng.below(counts.size()));
    const auto p = softmax_distribution(m, make_context(seq, 2, hp.window, 1));
    double total = 0.0;
    for (double x : p) total += x;
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("negative-sampling objective") {
  const std::vector<double> zero(4, 0.0);
  const auto r = neg_objective_and_gradients(zero, zero, {std::span<const double>(zero), std::span<const double>(zero)});
  CHECK(r.objective == doctest::Approx(3.0 * std::log(0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(neg_objective_and_gradients(zero, zero, {}), Error);

  // Raising v'_t . h with the negatives fixed raises the objective.
  std::vector<double> h{0.3, -0.2, 0.5, 0.1};
  std::vector<double> neg{0.2, 0.2, -0.1, 0.4};
  double previous = -INFINITY;
  for (double scale = -3.0; scale <= 3.0; scale += 0.25) {
    std::vector<double> target(h);
    for (auto& x : target) x *= scale;
    const double value = neg_objective_and_gradients(h, target, {std::span<const double>(neg)}).objective;
    CHECK(value > previous);
    previous = value;
  }
}

TEST_CASE("negative-sampling gradients match central differences") {
  Rng rng(100);
  for (int seed = 0; seed < 120; ++seed) {
    const auto inst = random_neg_instance(rng);
    const auto r = neg_objective_and_gradients(inst.hidden, inst.target, inst.negative_spans());
    CHECK(r.objective == doctest::Approx(neg_objective_oracle(inst)).epsilon(1e-12));
    const auto fd = neg_finite_differences(inst, 1e-5);
    CHECK(max_relative_error(r.hidden, fd.hidden) < 1e-4);
    CHECK(max_relative_error(r.target, fd.target) < 1e-4);
    for (std::size_t k = 0; k < r.negatives.size(); ++k)
      CHECK(max_relative_error(r.negatives[k], fd.negatives[k]) < 1e-4);
  }
}

TEST_CASE("hierarchical softmax") {
  Hyperparams hp;
  hp.objective = Objective::hs;
  hp.architecture = Architecture::dbow;
  hp.dim = 3;

  SUBCASE("balanced tree with zero nodes gives a quarter per leaf") {
    const auto m = init_model(counts_vocab({2, 2, 2, 2}), 1, hp);
    ContextSample s;
    for (TokenId w = 0; w < 4; ++w)
      CHECK(hs_probability_and_gradients(m, s, w).probability == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("leaf probabilities sum to one on random trees") {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::uint64_t> counts(2 + rng.below(19));
      for (auto& c : counts) c = 1 + rng.below(50);
      hp.dim = 1 + static_cast<std::uint32_t>(rng.below(8));
      auto m = init_model(counts_vocab(counts), 1, hp);
      randomize(m, rng, 1.5);
      ContextSample s;
      double total = 0.0;
      for (TokenId w = 0; w < counts.size(); ++w) total += hs_probability_and_gradients(m, s, w).probability;
      CHECK(std::abs(total - 1.0) < 1e-6);
    }
  }
  SUBCASE("NEG model has no tree") {
    hp.objective = Objective::neg;
    const auto m = init_model(counts_vocab({2, 2}), 1, hp);
    CHECK_THROWS_AS(hs_probability_and_gradients(m, ContextSample{}, 0), Error);
  }
}

TEST_CASE("hierarchical-softmax gradients match central differences") {
  Rng rng(200);
  for (int seed = 0; seed < 120; ++seed) {
    const auto inst = random_hs_instance(rng);
    const auto r = hs_probability_and_gradients(inst.hidden, inst.node_spans(), inst.code);
    CHECK(r.log_probability == doctest::Approx(hs_log_probability_oracle(inst)).epsilon(1e-12));
    const auto fd = hs_finite_differences(inst, 1e-5);
    CHECK(max_relative_error(r.hidden, fd.hidden) < 1e-4);
    for (std::size_t d = 0; d < r.nodes.size(); ++d) CHECK(max_relative_error(r.nodes[d], fd.nodes[d]) < 1e-4);
  }
}

TEST_CASE("hidden-layer routing agrees with differences through the model rows") {
  // Objective as a function of the doc row, through the composed hidden layer.
  for (auto combine : {Combine::concat, Combine::mean}) {
    Hyperparams hp;
    hp.dim = 3;
    hp.window = 2;
    hp.combine = combine;
    auto m = init_model(counts_vocab({6, 5, 4, 3, 2}), 2, hp);
    Rng rng(12);
    randomize(m, rng, 0.8);
    const std::vector<TokenId> seq{1, 3, 0, 4};
    const auto s = make_context(seq, 1, hp.window, 1);
    const std::vector<TokenId> negatives{2, 4};

    const auto r = neg_objective_and_gradients(m, s, negatives);
    const auto routed = route_hidden_gradient(m, s, r.hidden);

    auto objective = [&](const EmbeddingModel& mm) { return neg_objective_and_gradients(mm, s, negatives).objective; };
    const double eps = 1e-3;  // float storage limits the step size
    for (std::size_t c = 0; c < hp.dim; ++c) {
      auto plus = m, minus = m;
      plus.docs()(1, c) += static_cast<float>(eps);
      minus.docs()(1, c) -= static_cast<float>(eps);
      const double step = static_cast<double>(plus.docs()(1, c)) - minus.docs()(1, c);
      CHECK(routed.doc[c] == doctest::Approx((objective(plus) - objective(minus)) / step).epsilon(1e-3));
    }
    // Word 0 sits at offset +1 exactly once.
    std::vector<double> word0(hp.dim, 0.0);
    for (const auto& [w, g] : routed.words)
      if (w == 0)
        for (std::size_t c = 0; c < hp.dim; ++c) word0[c] += g[c];
    for (std::size_t c = 0; c < hp.dim; ++c) {
      auto plus = m, minus = m;
      plus.words()(0, c) += static_cast<float>(eps);
      minus.words()(0, c) -= static_cast<float>(eps);
      const double step = static_cast<double>(plus.words()(0, c)) - minus.words()(0, c);
      CHECK(word0[c] == doctest::Approx((objective(plus) - objective(minus)) / step).epsilon(1e-3));
    }
  }
}

TEST_CASE("draw_negatives") {
  Rng rng(1);
  const auto v = counts_vocab({16, 8, 4, 2, 1});
  const auto noise = build_noise_table(v);
  CHECK(draw_negatives(noise, 10, 0, rng).size() == 10);
  for (TokenId t : draw_negatives(noise, 50, 2, rng)) CHECK(t != 2);

  const auto two = build_noise_table(counts_vocab({5, 3}));
  for (TokenId t : draw_negatives(two, 100, 0, rng)) CHECK(t == 1);

  CHECK_THROWS_AS(draw_negatives(build_noise_table(counts_vocab({4})), 1, 0, rng), Error);

  // Frequencies follow the noise law renormalized without the excluded token.
  std::vector<double> hits(v.size(), 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i)
    for (TokenId t : draw_negatives(noise, 10, 0, rng)) hits[t] += 1.0;
  const double rest = 1.0 - noise.probability(0);
  for (TokenId t = 1; t < v.size(); ++t)
    CHECK(std::abs(hits[t] / (10.0 * draws) - noise.probability(t) / rest) < 0.01);
}

TEST_CASE("train") {
  SUBCASE("zero epochs leave the model untouched") {
    Hyperparams hp;
    hp.dim = 4;
    hp.epochs = 0;
    auto m = init_model(counts_vocab({5, 5, 5}), 1, hp);
    const auto before = serialize_model(m);
    const std::vector<std::vector<TokenId>> docs{{0, 1, 2, 1}};
    CHECK(train(m, docs).empty());
    CHECK(serialize_model(m) == before);
  }
  SUBCASE("empty dataset is an error") {
    auto m = init_model(counts_vocab({5, 5}), 0, Hyperparams{});
    CHECK_THROWS_AS(train(m, std::span<const std::vector<TokenId>>{}), Error);
  }
  SUBCASE("a repeated token becomes near-certain from its own paragraph") {
    // The vocabulary is padded to three words; only paragraph 0 is trained.
    const auto vocab = build_vocabulary({"deed deed deed deed deed", "lien lien lien lien lien", "writ writ writ writ writ"}, 1);
    for (auto arch : {Architecture::dbow, Architecture::dm}) {
      Hyperparams hp;
      hp.architecture = arch;
      hp.combine = Combine::mean;
      hp.dim = 8;
      hp.window = 2;
      hp.negative = 2;
      hp.subsample = 0.0;
      hp.epochs = 100;
      hp.min_count = 1;
      auto m = init_model(vocab, 1, hp);
      const TokenId deed = *vocab.find("deed");
      const std::vector<std::vector<TokenId>> docs{std::vector<TokenId>(20, deed)};
      train(m, docs);
      const auto s = make_context(docs[0], 10, hp.window, 0);
      CHECK(softmax_probability(m, s, deed) > 0.9);
    }
  }
  SUBCASE("mean objective rises over the first epochs") {
    synthetic::TwoTopicOptions o;
    o.paragraphs = 50;
    const auto corpus = synthetic::two_topic_corpus(o);
    std::vector<std::string> texts;
    for (const auto& p : corpus) texts.push_back(p.raw_text);
    const auto vocab = build_vocabulary(texts, 5);
    std::vector<std::vector<TokenId>> docs;
    for (const auto& t : texts) docs.push_back(vocab.encode(tokenize(t)));
    Hyperparams hp;
    hp.dim = 20;
    hp.window = 3;
    hp.subsample = 1e-3;
    hp.epochs = 5;
    auto m = init_model(vocab, docs.size(), hp);
    std::vector<EpochStats> seen;
    const auto trace = train(m, docs, [&](const EpochStats& s) { seen.push_back(s); });
    REQUIRE(trace.size() == 5);
    CHECK(seen.size() == 5);
    for (std::size_t e = 1; e < trace.size(); ++e) CHECK(trace[e].mean_objective >= trace[e - 1].mean_objective);
  }
  SUBCASE("HS training raises the target's path probability") {
    const auto vocab = build_vocabulary({"a a a a b b b c c d"}, 1);
    Hyperparams hp;
    hp.objective = Objective::hs;
    hp.architecture = Architecture::dbow;
    hp.dim = 6;
    hp.subsample = 0.0;
    hp.epochs = 200;
    hp.min_count = 1;
    auto m = init_model(vocab, 1, hp);
    const TokenId c = *vocab.find("c");
    const std::vector<std::vector<TokenId>> docs{std::vector<TokenId>(10, c)};
    ContextSample s;
    const double before = hs_probability_and_gradients(m, s, c).probability;
    train(m, docs);
    CHECK(hs_probability_and_gradients(m, s, c).probability > std::max(0.9, before));
  }
}

TEST_CASE("training is deterministic for a seed") {
  synthetic::TwoTopicOptions o;
  o.paragraphs = 30;
  const auto corpus = synthetic::two_topic_corpus(o);
  std::vector<std::string> texts;
  for (const auto& p : corpus) texts.push_back(p.raw_text);
  const auto vocab = build_vocabulary(texts, 5);
  std::vector<std::vector<TokenId>> docs;
  for (const auto& t : texts) docs.push_back(vocab.encode(tokenize(t)));
  for (auto objective : {Objective::neg, Objective::hs}) {
    Hyperparams hp;
    hp.objective = objective;
    hp.dim = 10;
    hp.subsample = 1e-3;
    hp.epochs = 3;
    auto a = init_model(vocab, docs.size(), hp);
    auto b = init_model(vocab, docs.size(), hp);
    train(a, docs);
    train(b, docs);
    CHECK(serialize_model(a) == serialize_model(b));
    hp.seed = 2;
    auto c = init_model(vocab, docs.size(), hp);
    train(c, docs);
    CHECK(serialize_model(a) != serialize_model(c));
  }
}

TEST_CASE("inference keeps the model frozen") {
  synthetic::TwoTopicOptions o;
  o.paragraphs = 20;
  const auto corpus = synthetic::two_topic_corpus(o);
  std::vector<std::string> texts;
  for (const auto& p : corpus) texts.push_back(p.raw_text);
  const auto vocab = build_vocabulary(texts, 5);
  std::vector<std::vector<TokenId>> docs;
  for (const auto& t : texts) docs.push_back(vocab.encode(tokenize(t)));
  Hyperparams hp;
  hp.dim = 16;
  hp.window = 3;
  hp.subsample = 1e-3;
  hp.epochs = 10;
  auto m = init_model(vocab, docs.size(), hp);
  train(m, docs);

  const Matrix words = m.words();
  const Matrix output = m.output();
  const Matrix doc_rows = m.docs();
  InferOptions options;
  options.seed = 5;
  const auto v1 = infer_vector(m, docs[3], options);
  CHECK(same_bits(m.words(), words));
  CHECK(same_bits(m.output(), output));
  CHECK(same_bits(m.docs(), doc_rows));
  CHECK(infer_vector(m, docs[3], options) == v1);

  options.update_words = true;
  const auto v2 = infer_vector(m, docs[3], options);
  CHECK(same_bits(m.words(), words));
  CHECK(same_bits(m.output(), output));
  CHECK(v2.size() == hp.dim);

  CHECK_THROWS_AS(infer_vector(m, {}, options), Error);
  try {
    infer_vector(m, vocab.encode(tokenize("zebra quagga")), options);
    FAIL("expected uninferable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::uninferable);
  }
}

TEST_CASE("inferred vectors retrieve their own training paragraph") {
  // Twenty paragraphs, each dominated by its own five-word signature.
  Rng rng(21);
  std::vector<std::string> texts;
  for (int p = 0; p < 20; ++p) {
    std::string text;
    for (int i = 0; i < 60; ++i) {
      const bool own = rng.uniform() < 0.8;
      const int word = own ? p * 5 + static_cast<int>(rng.below(5)) : static_cast<int>(rng.below(100));
      text += "s" + std::to_string(word) + " ";
    }
    texts.push_back(text);
  }
  const auto vocab = build_vocabulary(texts, 1);
  std::vector<std::vector<TokenId>> docs;
  for (const auto& t : texts) docs.push_back(vocab.encode(tokenize(t)));
  Hyperparams hp;
  hp.architecture = Architecture::dbow;
  hp.dim = 32;
  hp.subsample = 0.0;
  hp.epochs = 40;
  hp.min_count = 1;
  auto m = init_model(vocab, docs.size(), hp);
  train(m, docs);

  for (std::size_t p = 0; p < docs.size(); ++p) {
    InferOptions options;
    options.seed = 1000 + p;
    const auto v = infer_vector(m, docs[p], options);
    std::size_t best = 0;
    double best_cos = -2.0;
    for (std::size_t q = 0; q < docs.size(); ++q) {
      const double c = cosine(v, m.docs().row(q));
      if (c > best_cos) {
        best_cos = c;
        best = q;
      }
    }
    CHECK(best == p);
  }
}

TEST_CASE("most_similar") {
  synthetic::TwoTopicOptions o;
  o.paragraphs = 200;
  o.filler_share = 0.0;
  const auto corpus = synthetic::two_topic_corpus(o);
  std::vector<std::string> texts;
  for (const auto& p : corpus) texts.push_back(p.raw_text);
  const auto vocab = build_vocabulary(texts, 5);
  std::vector<std::vector<TokenId>> docs;
  for (const auto& t : texts) docs.push_back(vocab.encode(tokenize(t)));
  Hyperparams hp;
  hp.combine = Combine::mean;
  hp.dim = 20;
  hp.window = 5;
  hp.subsample = 0.0;
  hp.epochs = 10;
  auto m = init_model(vocab, docs.size(), hp);
  train(m, docs);

  const auto top = most_similar(m, "notice", 5);
  REQUIRE(top.size() == 5);
  for (std::size_t i = 0; i < top.size(); ++i) {
    CHECK(top[i].token != "notice");
    CHECK(top[i].cosine <= 1.0);
    CHECK(top[i].cosine >= -1.0);
    if (i) CHECK(top[i - 1].cosine >= top[i].cosine);
  }
  CHECK(cosine(m.words().row(0), m.words().row(0)) == doctest::Approx(1.0));

  const auto& a_words = synthetic::topic_a_words();
  const auto& b_words = synthetic::topic_b_words();
  auto in = [](const std::vector<std::string>& pool, const std::string& w) {
    return std::find(pool.begin(), pool.end(), w) != pool.end();
  };
  int same = 0, total = 0;
  for (const auto* pool : {&a_words, &b_words}) {
    for (const auto& w : *pool) {
      ++total;
      same += in(*pool, most_similar(m, w, 1).front().token);
    }
  }
  CHECK(same >= 0.9 * total);

  CHECK_THROWS_AS(most_similar(m, "unseen", 3), Error);
  CHECK_THROWS_AS(most_similar(m, "notice", vocab.size()), Error);
}

TEST_CASE("model container round-trips bit-exactly") {
  for (auto objective : {Objective::neg, Objective::hs}) {
    Hyperparams hp;
    hp.objective = objective;
    hp.dim = 5;
    hp.window = 2;
    auto m = init_model(counts_vocab({7, 6, 5, 4}), 3, hp);
    Rng rng(3);
    randomize(m, rng, 1.0);
    m.set_doc_ids({"a", "b", "\xC3\xA9"});
    const auto bytes = serialize_model(m);
    CHECK(bytes.substr(0, 8) == "LXRMODEL");
    const auto back = deserialize_model(bytes);
    CHECK(serialize_model(back) == bytes);
    CHECK(back.hyperparams() == hp);
    CHECK(back.vocab() == m.vocab());
    CHECK(back.doc_ids() == m.doc_ids());

    CHECK_THROWS_AS(deserialize_model(bytes.substr(0, bytes.size() - 3)), Error);
    auto corrupt = bytes;
    corrupt[0] = 'X';
    CHECK_THROWS_AS(deserialize_model(corrupt), Error);
    CHECK_THROWS_AS(deserialize_model(bytes + "x"), Error);
  }
}
